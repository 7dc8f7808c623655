use super::QuaternionSpectrum;
use crate::error::{Error, Result};
use crate::raster::Plane;

/// Convolves the spectrum's amplitude with a unit-sum Gaussian of standard
/// deviation `sigma` (in frequency bins). The frequency plane is periodic, so
/// the kernel wraps around the edges.
pub fn smooth_amplitude(spectrum: &QuaternionSpectrum, sigma: f64) -> Result<Plane> {
    circular_gaussian(spectrum.amplitude(), sigma)
}

pub(crate) fn circular_gaussian(plane: &Plane, sigma: f64) -> Result<Plane> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!("smoothing sigma must be positive, got {sigma}")));
    }
    let (w, h) = plane.dims();
    let row_taps = periodic_taps(w, sigma);
    let col_taps = periodic_taps(h, sigma);
    let src = plane.as_slice();

    let mut tmp = vec![0.0; w * h];
    for row in 0..h {
        let line = &src[row * w..(row + 1) * w];
        for col in 0..w {
            tmp[row * w + col] = row_taps
                .iter()
                .map(|&(offset, weight)| weight * line[(col + offset) % w])
                .sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for row in 0..h {
        for col in 0..w {
            out[row * w + col] = col_taps
                .iter()
                .map(|&(offset, weight)| weight * tmp[((row + offset) % h) * w + col])
                .sum();
        }
    }
    Plane::new(w, h, out)
}

/// Gaussian wrapped onto a circle of `n` samples and normalized to unit sum.
/// Returned as `(offset, weight)` pairs with zero weights dropped; the
/// periodized kernel is symmetric so the offset sign does not matter.
fn periodic_taps(n: usize, sigma: f64) -> Vec<(usize, f64)> {
    let n_f = n as f64;
    let wraps = (10.0 * sigma / n_f).ceil() as i64 + 1;
    let mut weights = vec![0.0; n];
    for (d, weight) in weights.iter_mut().enumerate() {
        for m in -wraps..=wraps {
            let x = d as f64 + m as f64 * n_f;
            *weight += (-(x * x) / (2.0 * sigma * sigma)).exp();
        }
    }
    let sum: f64 = weights.iter().sum();
    weights
        .into_iter()
        .enumerate()
        .filter(|&(_, w)| w > 0.0)
        .map(|(d, w)| (d, w / sum))
        .collect()
}
