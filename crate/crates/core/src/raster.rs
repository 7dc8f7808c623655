//! Raster containers and the resampling/filtering primitives shared by the
//! saliency, segmentation and cropping stages.
//!
//! All rasters are row-major. Resampling uses the half-pixel-center
//! convention: output pixel `i` samples source coordinate
//! `(i + 0.5) * src / dst - 0.5`, clamped to the source extent.

use crate::error::{Error, Result};
use image::RgbImage;

/// A dense 2-D scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!("zero-sized plane {width}x{height}")));
        }
        if data.len() != width * height {
            return Err(Error::invalid(format!(
                "plane {width}x{height} needs {} samples, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0, "zero-sized plane");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "zero-sized plane");
        let mut data = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                data.push(f(row, col));
            }
        }
        Self {
            width,
            height,
            data,
        }
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

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.width + col] = value;
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Index of the maximum sample as `(row, col)`; the first one wins on ties.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (i, &v) in self.data.iter().enumerate() {
            if v > self.data[best] {
                best = i;
            }
        }
        (best / self.width, best % self.width)
    }

    pub fn resize_bilinear(&self, width: usize, height: usize) -> Result<Plane> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("zero target dimension"));
        }
        let data = resample_bilinear(&self.data, self.width, self.height, 1, width, height);
        Plane::new(width, height, data)
    }

    /// Separable Gaussian blur with replicated borders. `sigma <= 0` copies.
    pub fn gaussian_blur(&self, sigma: f64) -> Plane {
        if !(sigma > 0.0) {
            return self.clone();
        }
        let kernel = gaussian_kernel(sigma);
        let radius = (kernel.len() / 2) as isize;
        let (w, h) = (self.width as isize, self.height as isize);

        let mut tmp = vec![0.0; self.data.len()];
        for row in 0..h {
            for col in 0..w {
                let mut acc = 0.0;
                for (k, weight) in kernel.iter().enumerate() {
                    let c = (col + k as isize - radius).clamp(0, w - 1);
                    acc += weight * self.data[(row * w + c) as usize];
                }
                tmp[(row * w + col) as usize] = acc;
            }
        }
        let mut out = vec![0.0; self.data.len()];
        for row in 0..h {
            for col in 0..w {
                let mut acc = 0.0;
                for (k, weight) in kernel.iter().enumerate() {
                    let r = (row + k as isize - radius).clamp(0, h - 1);
                    acc += weight * tmp[(r * w + col) as usize];
                }
                out[(row * w + col) as usize] = acc;
            }
        }
        Plane {
            width: self.width,
            height: self.height,
            data: out,
        }
    }
}

/// Unit-sum sampled Gaussian truncated at four standard deviations.
fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (4.0 * sigma).ceil().max(1.0) as isize;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|d| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= sum);
    kernel
}

/// An RGB raster with channel values in `[0, 1]`, stored row-major as
/// interleaved `r, g, b` triples.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageRaster {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ImageRaster {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!("zero-sized image {width}x{height}")));
        }
        if data.len() != width * height * 3 {
            return Err(Error::invalid(format!(
                "image {width}x{height} needs {} samples, got {}",
                width * height * 3,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!("channel value {bad} outside [0, 1]")));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [f64; 3]) -> Result<Self> {
        let data = (0..width * height).flat_map(|_| rgb).collect();
        Self::new(width, height, data)
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [f64; 3],
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * 3);
        for row in 0..height {
            for col in 0..width {
                data.extend_from_slice(&f(row, col));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn pixel(&self, row: usize, col: usize) -> [f64; 3] {
        let i = (row * self.width + col) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// Copies the inclusive window `rows × cols` into a new raster.
    pub(crate) fn window(
        &self,
        rows: std::ops::RangeInclusive<usize>,
        cols: std::ops::RangeInclusive<usize>,
    ) -> ImageRaster {
        let width = cols.end() - cols.start() + 1;
        let height = rows.end() - rows.start() + 1;
        let mut data = Vec::with_capacity(width * height * 3);
        for row in rows {
            let start = (row * self.width + cols.start()) * 3;
            data.extend_from_slice(&self.data[start..start + width * 3]);
        }
        ImageRaster {
            width,
            height,
            data,
        }
    }

    pub fn resize_bilinear(&self, width: usize, height: usize) -> Result<ImageRaster> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("zero target dimension"));
        }
        let data = resample_bilinear(&self.data, self.width, self.height, 3, width, height);
        Ok(ImageRaster {
            width,
            height,
            data,
        })
    }

    pub fn from_rgb8(image: &RgbImage) -> Result<Self> {
        let data = image.as_raw().iter().map(|&v| f64::from(v) / 255.0).collect();
        Self::new(image.width() as usize, image.height() as usize, data)
    }

    /// Quantizes to 8 bits by rounding; exact for rasters that came from
    /// [`ImageRaster::from_rgb8`].
    pub fn to_rgb8(&self) -> RgbImage {
        let raw = self
            .data
            .iter()
            .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect();
        RgbImage::from_raw(self.width as u32, self.height as u32, raw)
            .expect("buffer length matches dimensions")
    }
}

fn resample_bilinear(
    src: &[f64],
    sw: usize,
    sh: usize,
    channels: usize,
    dw: usize,
    dh: usize,
) -> Vec<f64> {
    let axis = |dst: usize, src_len: usize| -> Vec<(usize, usize, f64)> {
        let scale = src_len as f64 / dst as f64;
        (0..dst)
            .map(|i| {
                let x = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (src_len - 1) as f64);
                let i0 = x.floor() as usize;
                let i1 = (i0 + 1).min(src_len - 1);
                (i0, i1, x - i0 as f64)
            })
            .collect()
    };
    let xs = axis(dw, sw);
    let ys = axis(dh, sh);
    let lerp = |a: f64, b: f64, t: f64| a + t * (b - a);

    let mut out = Vec::with_capacity(dw * dh * channels);
    for &(y0, y1, ty) in &ys {
        for &(x0, x1, tx) in &xs {
            for c in 0..channels {
                let at = |y: usize, x: usize| src[(y * sw + x) * channels + c];
                let top = lerp(at(y0, x0), at(y0, x1), tx);
                let bottom = lerp(at(y1, x0), at(y1, x1), tx);
                out.push(lerp(top, bottom, ty));
            }
        }
    }
    out
}

/// Nearest-neighbour resampling of an integer grid.
pub(crate) fn resample_nearest<T: Copy>(
    src: &[T],
    sw: usize,
    sh: usize,
    dw: usize,
    dh: usize,
) -> Vec<T> {
    let index = |i: usize, dst: usize, src_len: usize| -> usize {
        (((i as f64 + 0.5) * src_len as f64 / dst as f64).floor() as usize).min(src_len - 1)
    };
    let cols: Vec<usize> = (0..dw).map(|c| index(c, dw, sw)).collect();
    let mut out = Vec::with_capacity(dw * dh);
    for row in 0..dh {
        let r = index(row, dh, sh);
        out.extend(cols.iter().map(|&c| src[r * sw + c]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_dims_and_out_of_range_values() {
        assert!(ImageRaster::new(0, 3, vec![]).is_err());
        assert!(ImageRaster::new(1, 1, vec![0.0, 1.5, 0.0]).is_err());
        assert!(Plane::new(2, 2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn bilinear_identity_and_constants() {
        let img = ImageRaster::from_fn(5, 4, |r, c| [r as f64 / 4.0, c as f64 / 5.0, 0.3]).unwrap();
        assert_eq!(img.resize_bilinear(5, 4).unwrap(), img);

        let flat = ImageRaster::filled(7, 3, [0.3, 0.7, 0.1]).unwrap();
        let big = flat.resize_bilinear(13, 11).unwrap();
        assert!(big.as_slice().chunks(3).all(|p| p == [0.3, 0.7, 0.1]));
    }

    #[test]
    fn bilinear_checkerboard_midpoint() {
        let board = Plane::new(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let up = board.resize_bilinear(3, 3).unwrap();
        assert_eq!(up.get(1, 1), 0.5);
    }

    #[test]
    fn nearest_upscale_replicates() {
        let up = resample_nearest(&[1u8, 2, 3, 4], 2, 2, 4, 4);
        assert_eq!(up, vec![1, 1, 2, 2, 1, 1, 2, 2, 3, 3, 4, 4, 3, 3, 4, 4]);
    }

    #[test]
    fn blur_preserves_constants_and_mass_center() {
        let flat = Plane::filled(9, 6, 0.25);
        assert!(flat.gaussian_blur(2.0).as_slice().iter().all(|&v| (v - 0.25).abs() < 1e-15));

        let mut spike = Plane::filled(21, 21, 0.0);
        spike.set(10, 10, 1.0);
        let blurred = spike.gaussian_blur(1.5);
        assert_eq!(blurred.argmax(), (10, 10));
        assert!((blurred.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rgb8_round_trip_is_exact() {
        let img = RgbImage::from_fn(4, 3, |x, y| image::Rgb([x as u8 * 60, y as u8 * 80, 255]));
        let raster = ImageRaster::from_rgb8(&img).unwrap();
        assert_eq!(raster.to_rgb8(), img);
    }
}
