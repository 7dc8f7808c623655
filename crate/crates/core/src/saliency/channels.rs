use crate::error::{Error, Result};
use crate::raster::{ImageRaster, Plane};

/// Intensity and colour-opponent channels on the square working raster.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureChannels {
    pub intensity: Plane,
    pub rg_opponent: Plane,
    pub by_opponent: Plane,
}

impl FeatureChannels {
    pub fn dims(&self) -> (usize, usize) {
        self.intensity.dims()
    }
}

/// Downscales `image` to `working_size × working_size` (bilinear) and builds
/// the intensity, red/green and blue/yellow channels from the broadly tuned
/// colour responses `R = r − (g+b)/2`, `G = g − (r+b)/2`, `B = b − (r+g)/2`,
/// `Y = (r+g)/2 − |r−g|/2 − b`.
pub fn extract_feature_channels(image: &ImageRaster, working_size: usize) -> Result<FeatureChannels> {
    if working_size == 0 {
        return Err(Error::invalid("working size must be positive"));
    }
    let small = image.resize_bilinear(working_size, working_size)?;
    let n = working_size * working_size;
    let mut intensity = Vec::with_capacity(n);
    let mut rg = Vec::with_capacity(n);
    let mut by = Vec::with_capacity(n);
    for px in small.as_slice().chunks_exact(3) {
        let (r, g, b) = (px[0], px[1], px[2]);
        let red = r - (g + b) / 2.0;
        let green = g - (r + b) / 2.0;
        let blue = b - (r + g) / 2.0;
        let yellow = (r + g) / 2.0 - (r - g).abs() / 2.0 - b;
        intensity.push((r + g + b) / 3.0);
        rg.push(red - green);
        by.push(blue - yellow);
    }
    Ok(FeatureChannels {
        intensity: Plane::new(working_size, working_size, intensity)?,
        rg_opponent: Plane::new(working_size, working_size, rg)?,
        by_opponent: Plane::new(working_size, working_size, by)?,
    })
}
