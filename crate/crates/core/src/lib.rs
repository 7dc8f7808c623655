//! Saliency-driven attention cropping.
//!
//! The pipeline computes a quaternion-spectrum saliency map, clusters the
//! saliency values with 1-D k-means, ranks the clusters by brightness and
//! crops the image to the bounding box of every pixel whose rank exceeds
//! `th = N·λ`. The [`batch`] module runs the pipeline over a directory tree
//! and writes cropped datasets with JSON-lines manifests.
//!
//! ```
//! use attention_crop::{attention_crop, ACConfig, ImageRaster, ScaleSpaceConfig};
//!
//! // dark 64×64 frame with a bright square in the middle
//! let image = ImageRaster::from_fn(64, 64, |r, c| {
//!     if (24..40).contains(&r) && (24..40).contains(&c) { [0.9, 0.8, 0.2] } else { [0.1; 3] }
//! })?;
//! let (cropped, record) =
//!     attention_crop(&image, &ScaleSpaceConfig::default(), &ACConfig::default(), 0)?;
//! assert!(!record.fallback);
//! assert!(cropped.width() < 64 && cropped.height() < 64);
//! # Ok::<(), attention_crop::Error>(())
//! ```

pub mod batch;
pub mod crop;
pub mod error;
pub mod raster;
pub mod saliency;
pub mod segmentation;

pub use crop::{
    apply_crop, attention_crop, attention_crop_detailed, crop_box, resize_to_target, threshold, ACConfig,
    ACRecord, CropBox, CropOutcome, FallbackReason,
};
pub use error::{Error, Result};
pub use raster::{ImageRaster, Plane};
pub use saliency::{compute_saliency, SaliencyMap, ScaleSpaceConfig};
pub use segmentation::{kmeans_1d, rank_labels, ClusterModel, LabelRaster};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/saliency.md")]
    mod saliency {}
    #[doc = include_str!("../../../book/src/scale-selection.md")]
    mod scale_selection {}
    #[doc = include_str!("../../../book/src/segmentation.md")]
    mod segmentation {}
    #[doc = include_str!("../../../book/src/cropping.md")]
    mod cropping {}
    #[doc = include_str!("../../../book/src/batch.md")]
    mod batch {}
}
