use std::path::PathBuf;
use std::process::ExitCode;

use attention_crop::batch::{run_batch, JobConfig, Mode, DEFAULT_EXTENSIONS};
use attention_crop::saliency::ManualScale;
use clap::Parser;

/// Attention-crop every image under a directory tree.
#[derive(Debug, Parser)]
#[command(name = "attention-crop", version)]
struct Args {
    /// Root of the input tree; sub-directories are treated as class labels.
    #[arg(long)]
    input: PathBuf,

    /// Output root; mirrors the input layout.
    #[arg(long)]
    output: PathBuf,

    /// crop | augment | saliency-debug
    #[arg(long, default_value = "crop")]
    mode: Mode,

    /// Number of saliency clusters N.
    #[arg(long, default_value_t = 3)]
    clusters: usize,

    /// Threshold fraction in [0, 1); accepts decimals or fractions like 1/3.
    #[arg(long, default_value = "1/3", value_parser = parse_fraction)]
    lambda: f64,

    /// Resize every crop to WIDTHxHEIGHT.
    #[arg(long, value_parser = parse_size)]
    target_size: Option<(usize, usize)>,

    /// Worker threads (default: available cores).
    #[arg(long)]
    workers: Option<usize>,

    /// Global seed mixed into every per-image seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Manifest path (default: OUTPUT/manifest.jsonl).
    #[arg(long)]
    manifest: Option<PathBuf>,

    /// Force a scale-ladder index instead of entropy selection.
    #[arg(long)]
    manual_scale: Option<usize>,

    /// Fall back to the full image when the box covers less than this
    /// fraction of it.
    #[arg(long, default_value_t = 0.0)]
    min_box_frac: f64,

    /// Comma-separated extensions to pick up.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_EXTENSIONS.map(String::from))]
    extensions: Vec<String>,

    /// Do not record parent directory names as labels.
    #[arg(long)]
    no_labels: bool,

    /// Record per-image wall time in the manifest (breaks reproducibility).
    #[arg(long)]
    timings: bool,
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    let value = match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|e| format!("{s}: {e}"))?;
            let d: f64 = d.trim().parse().map_err(|e| format!("{s}: {e}"))?;
            if d == 0.0 {
                return Err(format!("{s}: zero denominator"));
            }
            n / d
        }
        None => s.trim().parse().map_err(|e| format!("{s}: {e}"))?,
    };
    Ok(value)
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("{s}: expected WIDTHxHEIGHT"))?;
    let w: usize = w.trim().parse().map_err(|e| format!("{s}: {e}"))?;
    let h: usize = h.trim().parse().map_err(|e| format!("{s}: {e}"))?;
    if w == 0 || h == 0 {
        return Err(format!("{s}: dimensions must be positive"));
    }
    Ok((w, h))
}

impl Args {
    fn into_job(self) -> JobConfig {
        let mut job = JobConfig::new(self.input, self.output);
        job.mode = self.mode;
        job.ac.cluster_count = self.clusters;
        job.ac.lambda = self.lambda;
        job.ac.target_size = self.target_size;
        job.ac.min_box_fraction = self.min_box_frac;
        job.saliency.manual_scale = self.manual_scale.map(ManualScale::Index);
        if let Some(w) = self.workers {
            job.workers = w;
        }
        job.global_seed = self.seed;
        if let Some(m) = self.manifest {
            job.manifest_path = m;
        }
        job.image_extensions = self.extensions.iter().map(|e| e.trim_start_matches('.').to_lowercase()).collect();
        job.infer_labels = !self.no_labels;
        job.record_timings = self.timings;
        job
    }
}

fn main() -> ExitCode {
    let job = Args::parse().into_job();
    let summary = match run_batch(&job) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };

    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    for f in &summary.failures {
        eprintln!("failed: {}: {}", f.source_path, f.error);
    }
    eprintln!(
        "{} discovered, {} processed, {} failed, {} fallbacks, {} files written in {:.2} s ({:.1} images/s)",
        summary.discovered,
        summary.processed,
        summary.failures.len(),
        summary.fallbacks,
        summary.outputs_written,
        summary.elapsed.as_secs_f64(),
        summary.throughput(),
    );
    eprintln!("manifest: {}", summary.manifest_path.display());

    if summary.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
