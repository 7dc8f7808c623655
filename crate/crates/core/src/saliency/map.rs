use crate::error::Result;
use crate::raster::Plane;

pub const DEFAULT_HISTOGRAM_BINS: usize = 256;

/// Ranges narrower than this fraction of the peak magnitude count as a
/// constant map (absorbs round-off from the transforms).
const CONSTANT_RELATIVE: f64 = 1e-12;

/// A min-max normalized saliency field with its provenance.
///
/// `entropy` is always the base-2 histogram entropy of `values` over
/// `histogram_bins` bins; every constructor recomputes it.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap {
    values: Plane,
    source_scale_index: usize,
    sigma: f64,
    entropy: f64,
    histogram_bins: usize,
}

impl SaliencyMap {
    /// Normalizes `raw` into `[0, 1]` and computes its entropy.
    pub fn from_raw(raw: Plane, histogram_bins: usize) -> Self {
        let values = normalize(&raw);
        let entropy = histogram_entropy(values.as_slice(), histogram_bins);
        Self {
            values,
            source_scale_index: 0,
            sigma: 0.0,
            entropy,
            histogram_bins,
        }
    }

    pub fn with_scale(mut self, index: usize, sigma: f64) -> Self {
        self.source_scale_index = index;
        self.sigma = sigma;
        self
    }

    pub fn with_histogram_bins(mut self, bins: usize) -> Self {
        self.histogram_bins = bins;
        self.entropy = histogram_entropy(self.values.as_slice(), bins);
        self
    }

    /// Bilinear resample to `width × height`, renormalized.
    pub fn resized(&self, width: usize, height: usize) -> Result<Self> {
        let values = if (width, height) == self.values.dims() {
            self.values.clone()
        } else {
            self.values.resize_bilinear(width, height)?
        };
        Ok(Self::from_raw(values, self.histogram_bins).with_scale(self.source_scale_index, self.sigma))
    }

    pub fn values(&self) -> &Plane {
        &self.values
    }

    pub fn source_scale_index(&self) -> usize {
        self.source_scale_index
    }

    /// Amplitude smoothing scale in frequency bins.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Histogram entropy in bits.
    pub fn entropy(&self) -> f64 {
        self.entropy
    }

    pub fn histogram_bins(&self) -> usize {
        self.histogram_bins
    }

    pub fn width(&self) -> usize {
        self.values.width()
    }

    pub fn height(&self) -> usize {
        self.values.height()
    }
}

/// Min-max normalization to `[0, 1]`; constant inputs map to all zeros.
pub fn normalize(plane: &Plane) -> Plane {
    let (lo, hi) = plane.min_max();
    let range = hi - lo;
    let scale = lo.abs().max(hi.abs());
    let mut out = plane.clone();
    if !(range > CONSTANT_RELATIVE * scale) {
        out.as_mut_slice().fill(0.0);
    } else {
        out.as_mut_slice()
            .iter_mut()
            .for_each(|v| *v = ((*v - lo) / range).clamp(0.0, 1.0));
    }
    out
}

/// Shannon entropy (bits) of a `bins`-bin histogram over `[0, 1]`.
/// Empty bins contribute nothing.
pub fn histogram_entropy(values: &[f64], bins: usize) -> f64 {
    if values.is_empty() || bins == 0 {
        return 0.0;
    }
    let mut counts = vec![0usize; bins];
    for &v in values {
        let bin = ((v * bins as f64) as usize).min(bins - 1);
        counts[bin] += 1;
    }
    let n = values.len() as f64;
    counts
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0)
}
