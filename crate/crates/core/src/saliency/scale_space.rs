use serde::{Deserialize, Serialize};

use super::{
    extract_feature_channels, hft_forward, hft_inverse_polar, smooth_amplitude, QuaternionRaster,
    SaliencyMap, DEFAULT_HISTOGRAM_BINS,
};
use crate::error::{Error, Result};
use crate::raster::{ImageRaster, Plane};

/// Number of amplitude-smoothing scales to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleCount {
    /// `floor(log2(working_size)) + 1` scales.
    Auto,
    Fixed(usize),
}

/// A hand-picked smoothing scale that bypasses entropy selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManualScale {
    /// Rung of the dyadic ladder, `sigma = 2^index · base_sigma`.
    Index(usize),
    /// Explicit sigma in frequency bins. The reported scale index is the
    /// nearest ladder rung.
    Sigma(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSpaceConfig {
    /// Smallest smoothing sigma, in frequency bins.
    pub base_sigma: f64,
    pub num_scales: ScaleCount,
    pub manual_scale: Option<ManualScale>,
    /// Side of the square raster the saliency is computed on.
    pub working_size: usize,
    pub histogram_bins: usize,
    /// Spatial Gaussian applied to the squared reconstruction, in working-size pixels.
    pub post_sigma: f64,
}

impl Default for ScaleSpaceConfig {
    fn default() -> Self {
        Self {
            base_sigma: 0.5,
            num_scales: ScaleCount::Auto,
            manual_scale: None,
            working_size: 128,
            histogram_bins: DEFAULT_HISTOGRAM_BINS,
            post_sigma: 3.0,
        }
    }
}

impl ScaleSpaceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.working_size < 16 {
            return Err(Error::config(format!(
                "working_size must be >= 16, got {}",
                self.working_size
            )));
        }
        if self.histogram_bins < 2 {
            return Err(Error::config("histogram_bins must be >= 2"));
        }
        if !(self.base_sigma > 0.0 && self.base_sigma.is_finite()) {
            return Err(Error::config("base_sigma must be positive"));
        }
        if !(self.post_sigma >= 0.0 && self.post_sigma.is_finite()) {
            return Err(Error::config("post_sigma must be non-negative"));
        }
        if self.num_scales == ScaleCount::Fixed(0) {
            return Err(Error::config("num_scales must be positive"));
        }
        if let Some(ManualScale::Sigma(s)) = self.manual_scale {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::config("manual sigma must be positive"));
            }
        }
        Ok(())
    }

    pub fn scale_count(&self) -> usize {
        match self.num_scales {
            ScaleCount::Auto => self.working_size.ilog2() as usize + 1,
            ScaleCount::Fixed(k) => k,
        }
    }

    /// Sigma of ladder rung `index` (0-based).
    pub fn sigma_for(&self, index: usize) -> f64 {
        self.base_sigma * 2f64.powi(index as i32)
    }

    /// The `(index, sigma)` pairs to evaluate.
    pub fn ladder(&self) -> Vec<(usize, f64)> {
        match self.manual_scale {
            Some(ManualScale::Index(i)) => vec![(i, self.sigma_for(i))],
            Some(ManualScale::Sigma(s)) => {
                let rung = (s / self.base_sigma).log2().round().max(0.0) as usize;
                vec![(rung, s)]
            }
            None => (0..self.scale_count()).map(|i| (i, self.sigma_for(i))).collect(),
        }
    }
}

/// Rebuilds the signal from `smoothed_amplitude × direction`, takes the
/// squared norm, blurs it spatially with `post_sigma` and normalizes.
pub fn reconstruct_saliency(
    smoothed_amplitude: &Plane,
    direction: &QuaternionRaster,
    post_sigma: f64,
) -> Result<SaliencyMap> {
    if !(post_sigma >= 0.0) {
        return Err(Error::invalid("post_sigma must be non-negative"));
    }
    let signal = hft_inverse_polar(smoothed_amplitude, direction)?;
    let raw = signal.energy().gaussian_blur(post_sigma);
    Ok(SaliencyMap::from_raw(raw, DEFAULT_HISTOGRAM_BINS))
}

/// Picks the candidate with the lowest entropy; the earliest wins ties.
pub fn select_scale(candidates: Vec<SaliencyMap>) -> Result<(usize, SaliencyMap)> {
    let mut best: Option<(usize, SaliencyMap)> = None;
    for (i, map) in candidates.into_iter().enumerate() {
        match &best {
            Some((_, b)) if map.entropy() >= b.entropy() => {}
            _ => best = Some((i, map)),
        }
    }
    best.ok_or_else(|| Error::invalid("no saliency candidates to select from"))
}

/// Saliency at the working resolution (`working_size²`), before upscaling.
pub fn saliency_at_working_size(image: &ImageRaster, config: &ScaleSpaceConfig) -> Result<SaliencyMap> {
    config.validate()?;
    let channels = extract_feature_channels(image, config.working_size)?;
    let spectrum = hft_forward(&channels);

    let candidates = config
        .ladder()
        .into_iter()
        .map(|(index, sigma)| {
            let smoothed = smooth_amplitude(&spectrum, sigma)?;
            let map = reconstruct_saliency(&smoothed, spectrum.direction(), config.post_sigma)?;
            Ok(map
                .with_histogram_bins(config.histogram_bins)
                .with_scale(index, sigma))
        })
        .collect::<Result<Vec<_>>>()?;
    let (_, map) = select_scale(candidates)?;
    Ok(map)
}

/// Full saliency pipeline, returned at the image's own dimensions.
pub fn compute_saliency(image: &ImageRaster, config: &ScaleSpaceConfig) -> Result<SaliencyMap> {
    saliency_at_working_size(image, config)?.resized(image.width(), image.height())
}
