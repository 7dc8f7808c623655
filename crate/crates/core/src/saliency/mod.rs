//! Frequency-domain saliency: colour-opponent quaternion signal, amplitude
//! smoothing over a dyadic scale space, reconstruction with the original
//! spectral direction, and entropy-based scale selection.

mod channels;
mod hft;
mod map;
mod scale_space;
mod smoothing;

pub use channels::{extract_feature_channels, FeatureChannels};
pub use hft::{
    hft_forward, hft_forward_raster, hft_inverse, hft_inverse_polar, Quaternion, QuaternionRaster,
    QuaternionSpectrum,
};
pub use map::{histogram_entropy, normalize, SaliencyMap, DEFAULT_HISTOGRAM_BINS};
pub use scale_space::{
    compute_saliency, reconstruct_saliency, saliency_at_working_size, select_scale, ManualScale,
    ScaleCount, ScaleSpaceConfig,
};
pub use smoothing::smooth_amplitude;
