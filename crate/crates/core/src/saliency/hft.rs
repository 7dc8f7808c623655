//! Hypercomplex (quaternion) 2-D Fourier transform.
//!
//! The transform uses the left-sided kernel `exp(-i·2π(ux/W + vy/H))` with
//! transform axis `i`. A quaternion `a + b·i + c·j + d·k` splits
//! symplectically into `(a + b·i) + (c + d·i)·j`; the left-sided kernel acts
//! on each complex part independently, so two ordinary complex FFTs give the
//! exact result.
//!
//! Normalization: the forward transform is unnormalized and the inverse
//! scales by `1 / (W·H)`. A spectrum holding only a DC value `c` therefore
//! inverts to a constant raster of value `c / (W·H)`, and Parseval reads
//! `Σ|q|² = Σ amplitude² / (W·H)`.

use std::ops::{Add, Mul};

use rustfft::num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use super::FeatureChannels;
use crate::error::{Error, Result};
use crate::raster::Plane;

/// Bins whose amplitude falls below this fraction of the spectral peak are
/// treated as round-off and flushed to zero, so they carry no direction.
const FLUSH_RELATIVE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    /// `x·i + y·j + z·k`
    pub const fn pure(x: f64, y: f64, z: f64) -> Self {
        Self::new(0.0, x, y, z)
    }

    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    fn simplex(self) -> Complex64 {
        Complex64::new(self.w, self.x)
    }

    fn perplex(self) -> Complex64 {
        Complex64::new(self.y, self.z)
    }

    fn from_parts(simplex: Complex64, perplex: Complex64) -> Self {
        Self::new(simplex.re, simplex.im, perplex.re, perplex.im)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;

    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

/// Hamilton product.
impl Mul for Quaternion {
    type Output = Quaternion;

    fn mul(self, o: Quaternion) -> Quaternion {
        Quaternion::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )
    }
}

/// A row-major grid of quaternions.
#[derive(Debug, Clone, PartialEq)]
pub struct QuaternionRaster {
    width: usize,
    height: usize,
    data: Vec<Quaternion>,
}

impl QuaternionRaster {
    pub fn new(width: usize, height: usize, data: Vec<Quaternion>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::invalid(format!(
                "quaternion raster {width}x{height} with {} samples",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn as_slice(&self) -> &[Quaternion] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Quaternion {
        self.data[row * self.width + col]
    }

    /// Per-sample squared norm.
    pub fn energy(&self) -> Plane {
        Plane::new(
            self.width,
            self.height,
            self.data.iter().map(|q| q.norm_sqr()).collect(),
        )
        .expect("dimensions already validated")
    }

    /// `q = intensity·i + rg·j + by·k`.
    pub fn from_channels(channels: &FeatureChannels) -> Self {
        let data = channels
            .intensity
            .as_slice()
            .iter()
            .zip(channels.rg_opponent.as_slice())
            .zip(channels.by_opponent.as_slice())
            .map(|((&i, &rg), &by)| Quaternion::pure(i, rg, by))
            .collect();
        let (width, height) = channels.dims();
        Self {
            width,
            height,
            data,
        }
    }
}

/// Quaternion spectrum in polar form: `coeffs = amplitude × direction`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuaternionSpectrum {
    coeffs: QuaternionRaster,
    amplitude: Plane,
    direction: QuaternionRaster,
}

impl QuaternionSpectrum {
    /// Builds the polar decomposition. Bins below the round-off floor are
    /// zeroed in all three fields.
    pub fn from_coeffs(mut coeffs: QuaternionRaster) -> Self {
        let peak = coeffs.data.iter().map(|q| q.norm()).fold(0.0, f64::max);
        let floor = peak * FLUSH_RELATIVE;
        let mut amplitude = Vec::with_capacity(coeffs.data.len());
        let mut direction = Vec::with_capacity(coeffs.data.len());
        for q in coeffs.data.iter_mut() {
            let norm = q.norm();
            if norm <= floor || norm == 0.0 {
                *q = Quaternion::ZERO;
                amplitude.push(0.0);
                direction.push(Quaternion::ZERO);
            } else {
                amplitude.push(norm);
                direction.push(q.scale(1.0 / norm));
            }
        }
        let (w, h) = coeffs.dims();
        Self {
            amplitude: Plane::new(w, h, amplitude).expect("dimensions already validated"),
            direction: QuaternionRaster {
                width: w,
                height: h,
                data: direction,
            },
            coeffs,
        }
    }

    pub fn coeffs(&self) -> &QuaternionRaster {
        &self.coeffs
    }

    pub fn amplitude(&self) -> &Plane {
        &self.amplitude
    }

    pub fn direction(&self) -> &QuaternionRaster {
        &self.direction
    }

    pub fn dims(&self) -> (usize, usize) {
        self.coeffs.dims()
    }
}

/// Forward transform of the pure quaternion built from the feature channels.
pub fn hft_forward(channels: &FeatureChannels) -> QuaternionSpectrum {
    hft_forward_raster(&QuaternionRaster::from_channels(channels))
}

/// Forward transform of an arbitrary quaternion raster.
pub fn hft_forward_raster(signal: &QuaternionRaster) -> QuaternionSpectrum {
    QuaternionSpectrum::from_coeffs(transform(signal, FftDirection::Forward))
}

pub fn hft_inverse(spectrum: &QuaternionSpectrum) -> QuaternionRaster {
    transform(&spectrum.coeffs, FftDirection::Inverse)
}

/// Inverse transform of `amplitude × direction`, the polar recombination
/// used during saliency reconstruction.
pub fn hft_inverse_polar(amplitude: &Plane, direction: &QuaternionRaster) -> Result<QuaternionRaster> {
    if amplitude.dims() != direction.dims() {
        return Err(Error::invalid(format!(
            "amplitude {:?} and direction {:?} dimensions differ",
            amplitude.dims(),
            direction.dims()
        )));
    }
    let data = amplitude
        .as_slice()
        .iter()
        .zip(&direction.data)
        .map(|(&a, &d)| d.scale(a))
        .collect();
    let coeffs = QuaternionRaster {
        width: direction.width,
        height: direction.height,
        data,
    };
    Ok(transform(&coeffs, FftDirection::Inverse))
}

fn transform(input: &QuaternionRaster, direction: FftDirection) -> QuaternionRaster {
    let (w, h) = input.dims();
    let mut simplex: Vec<Complex64> = input.data.iter().map(|q| q.simplex()).collect();
    let mut perplex: Vec<Complex64> = input.data.iter().map(|q| q.perplex()).collect();

    let mut planner = FftPlanner::new();
    fft2(&mut planner, &mut simplex, w, h, direction);
    fft2(&mut planner, &mut perplex, w, h, direction);

    let data = simplex
        .into_iter()
        .zip(perplex)
        .map(|(s, p)| Quaternion::from_parts(s, p))
        .collect();
    QuaternionRaster {
        width: w,
        height: h,
        data,
    }
}

/// In-place 2-D FFT over a row-major `w × h` buffer; the inverse is scaled
/// by `1 / (w·h)`.
fn fft2(
    planner: &mut FftPlanner<f64>,
    buf: &mut [Complex64],
    w: usize,
    h: usize,
    direction: FftDirection,
) {
    planner.plan_fft(w, direction).process(buf);

    let mut columns = vec![Complex64::default(); w * h];
    for row in 0..h {
        for col in 0..w {
            columns[col * h + row] = buf[row * w + col];
        }
    }
    planner.plan_fft(h, direction).process(&mut columns);

    let scale = match direction {
        FftDirection::Forward => 1.0,
        FftDirection::Inverse => 1.0 / (w * h) as f64,
    };
    for col in 0..w {
        for row in 0..h {
            buf[row * w + col] = columns[col * h + row] * scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// Direct evaluation of `F(u,v) = Σ exp(-i·θ) · q(x,y)` with quaternion
    /// arithmetic, independent of the complex split.
    fn naive_qdft(signal: &QuaternionRaster) -> Vec<Quaternion> {
        let (w, h) = signal.dims();
        let mut out = Vec::with_capacity(w * h);
        for v in 0..h {
            for u in 0..w {
                let mut acc = Quaternion::ZERO;
                for y in 0..h {
                    for x in 0..w {
                        let theta = 2.0 * PI * ((u * x) as f64 / w as f64 + (v * y) as f64 / h as f64);
                        let kernel = Quaternion::new(theta.cos(), -theta.sin(), 0.0, 0.0);
                        acc = acc + kernel * signal.get(y, x);
                    }
                }
                out.push(acc);
            }
        }
        out
    }

    fn raster_from(w: usize, h: usize, seed: u64) -> QuaternionRaster {
        // small LCG; only needs to be reproducible
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let data = (0..w * h).map(|_| Quaternion::new(next(), next(), next(), next())).collect();
        QuaternionRaster::new(w, h, data).unwrap()
    }

    #[test]
    fn matches_direct_quaternion_dft() {
        let signal = raster_from(6, 4, 7);
        let fast = hft_forward_raster(&signal);
        for (got, want) in fast.coeffs().as_slice().iter().zip(naive_qdft(&signal)) {
            assert!((*got + want.scale(-1.0)).norm() < 1e-10, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn constant_signal_is_dc_only() {
        let data = vec![Quaternion::pure(0.4, 0.1, -0.2); 64];
        let spec = hft_forward_raster(&QuaternionRaster::new(8, 8, data).unwrap());
        let amp = spec.amplitude().as_slice();
        assert!(amp[0] > 0.0);
        assert!(amp[1..].iter().all(|&a| a < 1e-9 * amp[0]));
        assert!(spec.direction().as_slice()[1..].iter().all(|d| *d == Quaternion::ZERO));
    }

    #[test]
    fn impulse_has_flat_amplitude() {
        let mut data = vec![Quaternion::ZERO; 12 * 10];
        data[37] = Quaternion::pure(0.0, 1.0, 0.0);
        let spec = hft_forward_raster(&QuaternionRaster::new(12, 10, data).unwrap());
        for &a in spec.amplitude().as_slice() {
            assert!((a - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn inverse_of_zero_and_dc_only() {
        let zero = QuaternionSpectrum::from_coeffs(
            QuaternionRaster::new(4, 3, vec![Quaternion::ZERO; 12]).unwrap(),
        );
        assert!(hft_inverse(&zero).as_slice().iter().all(|q| *q == Quaternion::ZERO));

        let mut coeffs = vec![Quaternion::ZERO; 12];
        let c = Quaternion::new(6.0, -1.2, 2.4, 0.6);
        coeffs[0] = c;
        let spec = QuaternionSpectrum::from_coeffs(QuaternionRaster::new(4, 3, coeffs).unwrap());
        for q in hft_inverse(&spec).as_slice() {
            assert!((*q + c.scale(-1.0 / 12.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn polar_inverse_rejects_mismatch() {
        let spec = hft_forward_raster(&raster_from(4, 4, 1));
        let amp = Plane::filled(4, 5, 1.0);
        assert!(hft_inverse_polar(&amp, spec.direction()).is_err());
    }

    proptest! {
        #[test]
        fn polar_invariants_hold(seed in any::<u64>(), w in 1usize..10, h in 1usize..10) {
            let spec = hft_forward_raster(&raster_from(w, h, seed));
            for ((c, &a), d) in spec.coeffs().as_slice().iter()
                .zip(spec.amplitude().as_slice())
                .zip(spec.direction().as_slice())
            {
                prop_assert!((c.norm() - a).abs() <= 1e-12 * a.max(1.0));
                if a > 0.0 {
                    prop_assert!((d.norm() - 1.0).abs() < 1e-12);
                } else {
                    prop_assert_eq!(*d, Quaternion::ZERO);
                }
                prop_assert!((*c + d.scale(-a)).norm() <= 1e-12 * a.max(1.0));
            }
        }

        #[test]
        fn round_trip_and_parseval(seed in any::<u64>(), w in 1usize..17, h in 1usize..17) {
            let signal = raster_from(w, h, seed);
            let spec = hft_forward_raster(&signal);
            let back = hft_inverse(&spec);
            for (a, b) in signal.as_slice().iter().zip(back.as_slice()) {
                prop_assert!((*a + b.scale(-1.0)).norm() < 1e-6);
            }
            let spatial: f64 = signal.as_slice().iter().map(|q| q.norm_sqr()).sum();
            let spectral: f64 = spec.amplitude().as_slice().iter().map(|a| a * a).sum::<f64>()
                / (w * h) as f64;
            prop_assert!((spatial - spectral).abs() <= 1e-6 * spatial);
        }
    }
}
