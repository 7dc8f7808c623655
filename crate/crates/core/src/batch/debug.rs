//! PNG exports of the intermediate saliency map and label raster.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::saliency::SaliencyMap;
use crate::segmentation::LabelRaster;

/// Colours for ranks 1..=8; further ranks use a gray ramp.
const PALETTE: [[u8; 3]; 8] = [
    [24, 24, 64],
    [0, 128, 128],
    [250, 220, 40],
    [220, 60, 60],
    [60, 180, 75],
    [145, 30, 180],
    [245, 130, 48],
    [230, 230, 230],
];

/// 8-bit grayscale encoding of a saliency map (`round(v · 255)`).
pub fn saliency_png(map: &SaliencyMap) -> Result<Vec<u8>> {
    let pixels: Vec<u8> = map
        .values()
        .as_slice()
        .iter()
        .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect();
    encode_png(map.width(), map.height(), png::ColorType::Grayscale, None, &pixels)
}

/// Indexed-colour PNG with one palette entry per rank.
pub fn labels_png(labels: &LabelRaster) -> Result<Vec<u8>> {
    let palette: Vec<u8> = (0..labels.cluster_count() as usize)
        .flat_map(|i| match PALETTE.get(i) {
            Some(c) => *c,
            None => {
                let g = (i * 255 / labels.cluster_count() as usize) as u8;
                [g, g, g]
            }
        })
        .collect();
    let pixels: Vec<u8> = labels.as_slice().iter().map(|&l| l - 1).collect();
    encode_png(
        labels.width(),
        labels.height(),
        png::ColorType::Indexed,
        Some(palette),
        &pixels,
    )
}

fn encode_png(
    width: usize,
    height: usize,
    color: png::ColorType,
    palette: Option<Vec<u8>>,
    pixels: &[u8],
) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    let mut encoder = png::Encoder::new(&mut bytes, width as u32, height as u32);
    encoder.set_color(color);
    encoder.set_depth(png::BitDepth::Eight);
    if let Some(p) = palette {
        encoder.set_palette(p);
    }
    let mut writer = encoder
        .write_header()
        .map_err(|e| Error::invalid(format!("png header: {e}")))?;
    writer
        .write_image_data(pixels)
        .map_err(|e| Error::invalid(format!("png data: {e}")))?;
    writer
        .finish()
        .map_err(|e| Error::invalid(format!("png finish: {e}")))?;
    Ok(bytes)
}

/// Writes `<prefix>.saliency.png` and `<prefix>.labels.png`. The saliency map
/// is resampled to the label raster's size first.
pub fn emit_debug_artifacts(
    saliency: &SaliencyMap,
    labels: &LabelRaster,
    out_prefix: &Path,
) -> Result<Vec<PathBuf>> {
    let saliency = saliency.resized(labels.width(), labels.height())?;
    let outputs = [
        (suffixed(out_prefix, ".saliency.png"), saliency_png(&saliency)?),
        (suffixed(out_prefix, ".labels.png"), labels_png(labels)?),
    ];
    let mut written = Vec::with_capacity(outputs.len());
    for (path, bytes) in outputs {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}
