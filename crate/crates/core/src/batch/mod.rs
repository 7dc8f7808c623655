//! Parallel batch runner over an image-folder tree.
//!
//! Every image under the input directory is processed independently on a
//! work-stealing pool. Results depend only on the corpus, the configuration
//! and the global seed: each image's k-means seed is derived from its
//! relative path, and records are sorted by source path before the manifest
//! is written.

mod debug;
mod manifest;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use image::codecs::jpeg::JpegEncoder;
use image::codecs::png::PngEncoder;
use image::ImageEncoder;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

pub use debug::{emit_debug_artifacts, labels_png, saliency_png};
pub use manifest::{read_manifest, write_manifest, ManifestRecord, OutputEntry, Variant, SCHEMA_VERSION};

use crate::crop::{attention_crop_detailed, ACConfig};
use crate::error::{Error, Result};
use crate::raster::ImageRaster;
use crate::saliency::ScaleSpaceConfig;

pub const DEFAULT_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];
pub const JPEG_QUALITY: u8 = 95;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Attention-cropped output only.
    Crop,
    /// A byte copy of the original plus the attention-cropped variant.
    Augment,
    /// Cropped output plus saliency and label PNGs.
    SaliencyDebug,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "crop" => Ok(Mode::Crop),
            "augment" => Ok(Mode::Augment),
            "saliency-debug" => Ok(Mode::SaliencyDebug),
            other => Err(Error::config(format!(
                "unknown mode {other:?} (expected crop, augment or saliency-debug)"
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Crop => "crop",
            Mode::Augment => "augment",
            Mode::SaliencyDebug => "saliency-debug",
        })
    }
}

#[derive(Debug, Clone)]
pub struct JobConfig {
    pub input_dir: PathBuf,
    pub output_dir: PathBuf,
    pub mode: Mode,
    pub ac: ACConfig,
    pub saliency: ScaleSpaceConfig,
    pub workers: usize,
    pub global_seed: u64,
    pub manifest_path: PathBuf,
    /// Lower-case extensions without the dot.
    pub image_extensions: Vec<String>,
    /// Use the parent directory name as the class label.
    pub infer_labels: bool,
    /// Store per-image wall time in the manifest.
    pub record_timings: bool,
}

impl JobConfig {
    /// Defaults for everything but the paths: `N = 3`,
    /// `λ = 1/3`, one worker per available core.
    pub fn new(input_dir: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        let output_dir = output_dir.into();
        Self {
            input_dir: input_dir.into(),
            manifest_path: output_dir.join("manifest.jsonl"),
            output_dir,
            mode: Mode::Crop,
            ac: ACConfig::default(),
            saliency: ScaleSpaceConfig::default(),
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            global_seed: 0,
            image_extensions: DEFAULT_EXTENSIONS.iter().map(|s| s.to_string()).collect(),
            infer_labels: true,
            record_timings: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::config("workers must be >= 1"));
        }
        self.ac.validate()?;
        self.saliency.validate()?;
        if self.image_extensions.is_empty() {
            return Err(Error::config("no image extensions configured"));
        }
        fs::read_dir(&self.input_dir).map_err(|e| Error::io(&self.input_dir, e))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageFailure {
    pub source_path: String,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    /// Files matching the configured extensions.
    pub discovered: usize,
    pub processed: usize,
    /// Images that could not be decoded, cropped or written.
    pub failures: Vec<ImageFailure>,
    /// Non-fatal problems, e.g. debug artifacts that could not be written.
    pub warnings: Vec<String>,
    pub fallbacks: usize,
    pub outputs_written: usize,
    pub elapsed: Duration,
    pub manifest_path: PathBuf,
}

impl RunSummary {
    /// Processed images per second of wall time.
    pub fn throughput(&self) -> f64 {
        let secs = self.elapsed.as_secs_f64();
        if secs > 0.0 {
            self.processed as f64 / secs
        } else {
            0.0
        }
    }
}

/// Processes every matching image under `config.input_dir` and writes the
/// manifest. Per-image problems are collected in the summary; only
/// configuration and manifest errors are returned as `Err`.
pub fn run_batch(config: &JobConfig) -> Result<RunSummary> {
    let started = Instant::now();
    config.validate()?;
    fs::create_dir_all(&config.output_dir).map_err(|e| Error::io(&config.output_dir, e))?;

    let sources = discover(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    let results: Vec<(String, Result<Processed>)> = pool.install(|| {
        sources
            .par_iter()
            .map(|(path, rel)| (rel.clone(), process_image(config, path, rel)))
            .collect()
    });

    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut warnings = Vec::new();
    let mut outputs_written = 0;
    for (rel, result) in results {
        match result {
            Ok(done) => {
                outputs_written += done.record.outputs.len();
                warnings.extend(done.warnings);
                records.push(done.record);
            }
            Err(e) => failures.push(ImageFailure {
                source_path: rel,
                error: e.to_string(),
            }),
        }
    }
    records.sort_by(|a, b| a.source_path.cmp(&b.source_path));
    write_manifest(&records, &config.manifest_path)?;

    Ok(RunSummary {
        discovered: sources.len(),
        processed: records.len(),
        fallbacks: records.iter().filter(|r| r.fallback).count(),
        failures,
        warnings,
        outputs_written,
        elapsed: started.elapsed(),
        manifest_path: config.manifest_path.clone(),
    })
}

/// Per-image k-means seed: the first eight bytes of
/// `SHA-256(global_seed_le ‖ relative_path)`.
pub fn derive_seed(global_seed: u64, relative_path: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(global_seed.to_le_bytes());
    hasher.update(relative_path.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("sha256 digest has 32 bytes"))
}

/// Matching files, sorted, paired with their `/`-separated relative paths.
fn discover(config: &JobConfig) -> Result<Vec<(PathBuf, String)>> {
    // Skip our own outputs when the output tree sits inside the input tree.
    let output_root = fs::canonicalize(&config.output_dir).ok();
    let input_root = fs::canonicalize(&config.input_dir).map_err(|e| Error::io(&config.input_dir, e))?;

    let mut found = Vec::new();
    let walker = walkdir::WalkDir::new(&input_root)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| output_root.as_deref() != Some(e.path()));
    for entry in walker {
        let entry = entry.map_err(|e| {
            let path = e.path().map(Path::to_path_buf).unwrap_or_else(|| input_root.clone());
            Error::io(path, e.into())
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let matches = entry
            .path()
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .is_some_and(|e| config.image_extensions.iter().any(|x| x == &e));
        if !matches {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(&input_root)
            .expect("walkdir yields paths under its root")
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        found.push((entry.into_path(), rel));
    }
    found.sort_by(|a, b| a.1.cmp(&b.1));
    Ok(found)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Encoding {
    Png,
    Jpeg,
}

impl Encoding {
    fn from_path(path: &Path) -> Result<Self> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref()
        {
            Some("png") => Ok(Encoding::Png),
            Some("jpg" | "jpeg") => Ok(Encoding::Jpeg),
            _ => Err(Error::invalid(format!("unsupported image format: {}", path.display()))),
        }
    }
}

/// Encodes an RGB raster in `encoding`; deterministic for identical input.
fn encode(image: &ImageRaster, encoding: Encoding) -> Result<Vec<u8>> {
    let rgb = image.to_rgb8();
    let mut bytes = Vec::new();
    let result = match encoding {
        Encoding::Png => PngEncoder::new(&mut bytes).write_image(
            rgb.as_raw(),
            rgb.width(),
            rgb.height(),
            image::ExtendedColorType::Rgb8,
        ),
        Encoding::Jpeg => JpegEncoder::new_with_quality(&mut bytes, JPEG_QUALITY).write_image(
            rgb.as_raw(),
            rgb.width(),
            rgb.height(),
            image::ExtendedColorType::Rgb8,
        ),
    };
    result.map_err(|source| Error::Image {
        path: PathBuf::new(),
        source,
    })?;
    Ok(bytes)
}

/// Encodes a crop the way [`run_batch`] writes it, picking PNG or JPEG from
/// `path`'s extension.
pub fn encode_for_path(image: &ImageRaster, path: &Path) -> Result<Vec<u8>> {
    encode(image, Encoding::from_path(path)?)
}

pub fn decode_image(path: &Path) -> Result<ImageRaster> {
    let decoded = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?;
    ImageRaster::from_rgb8(&decoded.to_rgb8())
}

struct Processed {
    record: ManifestRecord,
    warnings: Vec<String>,
}

fn process_image(config: &JobConfig, path: &Path, rel: &str) -> Result<Processed> {
    let encoding = Encoding::from_path(path)?;
    let image = decode_image(path)?;
    let seed = derive_seed(config.global_seed, rel);
    let outcome = attention_crop_detailed(&image, &config.saliency, &config.ac, seed)?;

    let (stem, ext) = match rel.rsplit_once('.') {
        Some((stem, ext)) => (stem, ext),
        None => (rel, ""),
    };
    let mut outputs = Vec::new();
    let mut warnings = Vec::new();
    let write = |rel_out: &str, bytes: &[u8]| -> Result<()> {
        let target = config.output_dir.join(rel_out);
        if let Some(dir) = target.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(&target, bytes).map_err(|e| Error::io(&target, e))
    };

    let cropped = encode(&outcome.image, encoding)?;
    match config.mode {
        Mode::Crop | Mode::SaliencyDebug => {
            write(rel, &cropped)?;
            outputs.push(OutputEntry {
                variant: Variant::Ac,
                path: rel.to_owned(),
            });
        }
        Mode::Augment => {
            let orig = format!("{stem}.orig.{ext}");
            let target = config.output_dir.join(&orig);
            if let Some(dir) = target.parent() {
                fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
            fs::copy(path, &target).map_err(|e| Error::io(&target, e))?;
            outputs.push(OutputEntry {
                variant: Variant::Orig,
                path: orig,
            });
            let ac = format!("{stem}.ac.{ext}");
            write(&ac, &cropped)?;
            outputs.push(OutputEntry {
                variant: Variant::Ac,
                path: ac,
            });
        }
    }
    if config.mode == Mode::SaliencyDebug {
        match emit_debug_artifacts(&outcome.saliency, &outcome.labels, &config.output_dir.join(stem)) {
            Ok(_) => {
                outputs.push(OutputEntry {
                    variant: Variant::Saliency,
                    path: format!("{stem}.saliency.png"),
                });
                outputs.push(OutputEntry {
                    variant: Variant::Labels,
                    path: format!("{stem}.labels.png"),
                });
            }
            Err(e) => warnings.push(format!("{rel}: debug artifacts not written: {e}")),
        }
    }

    let label = if config.infer_labels {
        rel.rsplit_once('/')
            .and_then(|(dir, _)| dir.rsplit('/').next())
            .map(str::to_owned)
    } else {
        None
    };
    let r = &outcome.record;
    let record = ManifestRecord {
        schema_version: SCHEMA_VERSION.to_owned(),
        source_path: rel.to_owned(),
        outputs,
        label,
        source_width: image.width(),
        source_height: image.height(),
        crop_box: r.crop_box,
        target_size: config.ac.target_size.map(|(w, h)| [w, h]),
        clusters: config.ac.cluster_count,
        lambda: config.ac.lambda,
        th: r.threshold,
        scale_index: r.scale_index,
        sigma: r.sigma,
        entropy: r.entropy,
        fallback: r.fallback,
        fallback_reason: r.fallback_reason,
        effective_clusters: r.effective_clusters,
        seed,
        elapsed_ms: config
            .record_timings
            .then(|| r.elapsed.as_secs_f64() * 1000.0),
    };
    Ok(Processed { record, warnings })
}
