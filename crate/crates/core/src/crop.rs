//! Crop-box extraction from rank labels and the end-to-end attention crop.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::ImageRaster;
use crate::saliency::{saliency_at_working_size, SaliencyMap, ScaleSpaceConfig};
use crate::segmentation::{kmeans_1d, rank_labels, LabelRaster, DEFAULT_MAX_ITER, DEFAULT_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ACConfig {
    /// Number of saliency clusters `N`.
    pub cluster_count: usize,
    /// Fraction of clusters cropped away, `λ ∈ [0, 1)`.
    pub lambda: f64,
    /// Output `(width, height)`; `None` keeps the crop's own size.
    pub target_size: Option<(usize, usize)>,
    /// Boxes smaller than this fraction of the image area fall back to the
    /// uncropped image. 0 disables the check.
    pub min_box_fraction: f64,
}

impl Default for ACConfig {
    fn default() -> Self {
        Self {
            cluster_count: 3,
            lambda: 1.0 / 3.0,
            target_size: None,
            min_box_fraction: 0.0,
        }
    }
}

impl ACConfig {
    pub fn validate(&self) -> Result<()> {
        threshold(self.cluster_count, self.lambda)?;
        if self.cluster_count > u8::MAX as usize {
            return Err(Error::config(format!(
                "at most {} clusters supported, got {}",
                u8::MAX,
                self.cluster_count
            )));
        }
        if !(0.0..=1.0).contains(&self.min_box_fraction) {
            return Err(Error::config("min_box_fraction must lie in [0, 1]"));
        }
        if let Some((w, h)) = self.target_size {
            if w == 0 || h == 0 {
                return Err(Error::config("target size must be positive"));
            }
        }
        Ok(())
    }

    pub fn threshold(&self) -> Result<f64> {
        threshold(self.cluster_count, self.lambda)
    }
}

/// `th = N·λ`. Pixels qualify when their rank label is strictly greater.
pub fn threshold(cluster_count: usize, lambda: f64) -> Result<f64> {
    if cluster_count < 2 {
        return Err(Error::config(format!("cluster count must be >= 2, got {cluster_count}")));
    }
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::config(format!("lambda must lie in [0, 1), got {lambda}")));
    }
    Ok(cluster_count as f64 * lambda)
}

/// Inclusive pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CropBox {
    pub row_start: usize,
    pub col_start: usize,
    pub row_end: usize,
    pub col_end: usize,
}

impl CropBox {
    pub fn full(width: usize, height: usize) -> Self {
        Self {
            row_start: 0,
            col_start: 0,
            row_end: height - 1,
            col_end: width - 1,
        }
    }

    pub fn width(&self) -> usize {
        self.col_end - self.col_start + 1
    }

    pub fn height(&self) -> usize {
        self.row_end - self.row_start + 1
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        (self.row_start..=self.row_end).contains(&row) && (self.col_start..=self.col_end).contains(&col)
    }

    pub fn contains_box(&self, other: &CropBox) -> bool {
        self.contains(other.row_start, other.col_start) && self.contains(other.row_end, other.col_end)
    }
}

/// Tight bounding box of every pixel whose label exceeds `th`.
pub fn crop_box(labels: &LabelRaster, th: f64) -> Result<CropBox> {
    let mut found: Option<CropBox> = None;
    for row in 0..labels.height() {
        for col in 0..labels.width() {
            if f64::from(labels.get(row, col)) <= th {
                continue;
            }
            let b = found.get_or_insert(CropBox {
                row_start: row,
                col_start: col,
                row_end: row,
                col_end: col,
            });
            b.col_start = b.col_start.min(col);
            b.col_end = b.col_end.max(col);
            b.row_end = row;
        }
    }
    found.ok_or(Error::EmptySelection { threshold: th })
}

pub fn apply_crop(image: &ImageRaster, b: &CropBox) -> Result<ImageRaster> {
    if b.row_start > b.row_end || b.col_start > b.col_end || b.row_end >= image.height() || b.col_end >= image.width() {
        return Err(Error::invalid(format!(
            "crop box {b:?} outside {}x{} image",
            image.width(),
            image.height()
        )));
    }
    Ok(image.window(b.row_start..=b.row_end, b.col_start..=b.col_end))
}

/// Bilinear resize to exactly `(width, height)`; aspect ratio is not kept.
pub fn resize_to_target(image: &ImageRaster, (width, height): (usize, usize)) -> Result<ImageRaster> {
    image.resize_bilinear(width, height)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FallbackReason {
    /// No pixel ranked above the threshold.
    EmptySelection,
    /// The box was smaller than `min_box_fraction` of the image.
    BoxTooSmall,
}

/// Provenance of one attention crop.
#[derive(Debug, Clone, PartialEq)]
pub struct ACRecord {
    /// Box in source-image coordinates; the full image on fallback.
    pub crop_box: CropBox,
    pub threshold: f64,
    pub scale_index: usize,
    pub sigma: f64,
    pub entropy: f64,
    pub fallback: bool,
    pub fallback_reason: Option<FallbackReason>,
    /// Clusters actually formed; below `N` when the saliency map has too few
    /// distinct values.
    pub effective_clusters: usize,
    pub seed: u64,
    pub elapsed: Duration,
}

/// Crop result together with the intermediates used to produce it.
#[derive(Debug, Clone)]
pub struct CropOutcome {
    pub image: ImageRaster,
    pub record: ACRecord,
    /// Saliency at the working resolution.
    pub saliency: SaliencyMap,
    /// Rank labels at the source resolution.
    pub labels: LabelRaster,
}

/// Saliency → k-means → rank labels → box → crop → optional resize.
///
/// Never fails for a valid image and configuration: when no box can be
/// formed the uncropped image is returned with `fallback` set.
pub fn attention_crop(
    image: &ImageRaster,
    saliency_cfg: &ScaleSpaceConfig,
    ac_cfg: &ACConfig,
    seed: u64,
) -> Result<(ImageRaster, ACRecord)> {
    let outcome = attention_crop_detailed(image, saliency_cfg, ac_cfg, seed)?;
    Ok((outcome.image, outcome.record))
}

pub fn attention_crop_detailed(
    image: &ImageRaster,
    saliency_cfg: &ScaleSpaceConfig,
    ac_cfg: &ACConfig,
    seed: u64,
) -> Result<CropOutcome> {
    let started = Instant::now();
    ac_cfg.validate()?;
    let th = ac_cfg.threshold()?;

    let saliency = saliency_at_working_size(image, saliency_cfg)?;
    let model = kmeans_1d(
        saliency.values().as_slice(),
        ac_cfg.cluster_count,
        DEFAULT_MAX_ITER,
        DEFAULT_TOL,
        seed,
    )?;
    let labels = rank_labels(&model, saliency.width(), saliency.height())?
        .resize_nearest(image.width(), image.height())?;

    let full = CropBox::full(image.width(), image.height());
    let min_area = ac_cfg.min_box_fraction * (image.width() * image.height()) as f64;
    let (crop_box, fallback_reason) = match crop_box(&labels, th) {
        Ok(b) if (b.area() as f64) < min_area => (full, Some(FallbackReason::BoxTooSmall)),
        Ok(b) => (b, None),
        Err(Error::EmptySelection { .. }) => (full, Some(FallbackReason::EmptySelection)),
        Err(e) => return Err(e),
    };

    let mut output = if crop_box == full {
        image.clone()
    } else {
        apply_crop(image, &crop_box)?
    };
    if let Some(size) = ac_cfg.target_size {
        output = resize_to_target(&output, size)?;
    }

    let record = ACRecord {
        crop_box,
        threshold: th,
        scale_index: saliency.source_scale_index(),
        sigma: saliency.sigma(),
        entropy: saliency.entropy(),
        fallback: fallback_reason.is_some(),
        fallback_reason,
        effective_clusters: model.k(),
        seed,
        elapsed: started.elapsed(),
    };
    Ok(CropOutcome {
        image: output,
        record,
        saliency,
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels_from(width: usize, height: usize, f: impl Fn(usize, usize) -> u8) -> LabelRaster {
        let data = (0..height).flat_map(|r| (0..width).map(move |c| (r, c))).map(|(r, c)| f(r, c)).collect();
        LabelRaster::new(width, height, data, 3).unwrap()
    }

    fn gradient(width: usize, height: usize) -> ImageRaster {
        ImageRaster::from_fn(width, height, |r, c| {
            [r as f64 / height as f64, c as f64 / width as f64, ((r + c) % 5) as f64 / 4.0]
        })
        .unwrap()
    }

    #[test]
    fn thresholds() {
        assert_eq!(threshold(3, 1.0 / 3.0).unwrap(), 1.0);
        assert_eq!(threshold(3, 0.0).unwrap(), 0.0);
        assert_eq!(threshold(4, 0.5).unwrap(), 2.0);
        assert!(matches!(threshold(3, 1.0), Err(Error::InvalidConfig(_))));
        assert!(threshold(3, -0.1).is_err());
        assert!(threshold(1, 0.2).is_err());
    }

    #[test]
    fn boxes() {
        let all = labels_from(6, 4, |_, _| 2);
        assert_eq!(crop_box(&all, 1.0).unwrap(), CropBox::full(6, 4));

        let single = labels_from(10, 10, |r, c| if (r, c) == (4, 7) { 3 } else { 1 });
        assert_eq!(
            crop_box(&single, 1.0).unwrap(),
            CropBox { row_start: 4, col_start: 7, row_end: 4, col_end: 7 }
        );

        let block = labels_from(10, 10, |r, c| if (2..=5).contains(&r) && (3..=7).contains(&c) { 2 } else { 1 });
        assert_eq!(
            crop_box(&block, 1.0).unwrap(),
            CropBox { row_start: 2, col_start: 3, row_end: 5, col_end: 7 }
        );

        assert!(matches!(crop_box(&labels_from(3, 3, |_, _| 1), 1.0), Err(Error::EmptySelection { .. })));
    }

    #[test]
    fn crops() {
        let img = gradient(9, 7);
        assert_eq!(apply_crop(&img, &CropBox::full(9, 7)).unwrap(), img);

        let one = apply_crop(&img, &CropBox { row_start: 3, col_start: 5, row_end: 3, col_end: 5 }).unwrap();
        assert_eq!((one.width(), one.height()), (1, 1));
        assert_eq!(one.pixel(0, 0), img.pixel(3, 5));

        let b = CropBox { row_start: 1, col_start: 2, row_end: 5, col_end: 6 };
        let once = apply_crop(&img, &b).unwrap();
        let twice = apply_crop(&once, &CropBox::full(once.width(), once.height())).unwrap();
        assert_eq!(once, twice);
        assert_eq!(once.pixel(0, 0), img.pixel(1, 2));

        assert!(apply_crop(&img, &CropBox { row_start: 0, col_start: 0, row_end: 7, col_end: 0 }).is_err());
    }

    #[test]
    fn resizes() {
        let img = gradient(8, 6);
        assert_eq!(resize_to_target(&img, (8, 6)).unwrap(), img);
        let flat = ImageRaster::filled(5, 3, [0.25, 0.5, 0.75]).unwrap();
        let out = resize_to_target(&flat, (224, 224)).unwrap();
        assert!(out.as_slice().chunks(3).all(|p| p == [0.25, 0.5, 0.75]));
        let board = ImageRaster::from_fn(2, 2, |r, c| [((r + c) % 2) as f64; 3]).unwrap();
        assert_eq!(resize_to_target(&board, (3, 3)).unwrap().pixel(1, 1), [0.5; 3]);
        assert!(resize_to_target(&img, (0, 3)).is_err());
    }

    #[test]
    fn lambda_zero_keeps_everything() {
        let img = gradient(40, 30);
        let cfg = ACConfig { lambda: 0.0, ..Default::default() };
        let (out, record) = attention_crop(&img, &ScaleSpaceConfig::default(), &cfg, 1).unwrap();
        assert_eq!(out, img);
        assert_eq!(record.crop_box, CropBox::full(40, 30));
        assert!(!record.fallback);
    }

    #[test]
    fn constant_image_falls_back() {
        let img = ImageRaster::filled(33, 21, [0.3, 0.3, 0.8]).unwrap();
        let (out, record) = attention_crop(&img, &ScaleSpaceConfig::default(), &ACConfig::default(), 0).unwrap();
        assert_eq!(out, img);
        assert!(record.fallback);
        assert_eq!(record.fallback_reason, Some(FallbackReason::EmptySelection));
        assert_eq!(record.effective_clusters, 1);
    }

    #[test]
    fn small_boxes_fall_back_when_requested() {
        let img = ImageRaster::from_fn(64, 64, |r, c| {
            if (30..34).contains(&r) && (30..34).contains(&c) { [1.0; 3] } else { [0.1; 3] }
        })
        .unwrap();
        let cfg = ACConfig { min_box_fraction: 0.9, target_size: Some((16, 16)), ..Default::default() };
        let (out, record) = attention_crop(&img, &ScaleSpaceConfig::default(), &cfg, 0).unwrap();
        assert_eq!(record.fallback_reason, Some(FallbackReason::BoxTooSmall));
        assert_eq!((out.width(), out.height()), (16, 16));
    }

    proptest! {
        #[test]
        fn box_is_tight_and_contains_all_qualifying(
            w in 1usize..24, h in 1usize..24,
            cells in prop::collection::vec(1u8..=3, 576),
            th in 0usize..3,
        ) {
            let labels = labels_from(w, h, |r, c| cells[r * 24 + c]);
            let th = th as f64;
            let qualifying: Vec<(usize, usize)> = (0..h)
                .flat_map(|r| (0..w).map(move |c| (r, c)))
                .filter(|&(r, c)| f64::from(labels.get(r, c)) > th)
                .collect();
            match crop_box(&labels, th) {
                Err(_) => prop_assert!(qualifying.is_empty()),
                Ok(b) => {
                    prop_assert!(qualifying.iter().all(|&(r, c)| b.contains(r, c)));
                    prop_assert!(qualifying.iter().any(|&(r, _)| r == b.row_start));
                    prop_assert!(qualifying.iter().any(|&(r, _)| r == b.row_end));
                    prop_assert!(qualifying.iter().any(|&(_, c)| c == b.col_start));
                    prop_assert!(qualifying.iter().any(|&(_, c)| c == b.col_end));
                    // raising the threshold can only shrink the box
                    if let Ok(inner) = crop_box(&labels, th + 1.0) {
                        prop_assert!(b.contains_box(&inner));
                    }
                }
            }
        }
    }
}
