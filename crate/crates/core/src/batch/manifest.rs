//! JSON-lines manifest: one record per source image, sorted by source path.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::crop::{CropBox, FallbackReason};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Byte-for-byte copy of the source.
    Orig,
    /// Attention-cropped (and optionally resized) image.
    Ac,
    Saliency,
    Labels,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub variant: Variant,
    /// Relative to the output directory, `/`-separated.
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub schema_version: String,
    /// Relative to the input directory, `/`-separated.
    pub source_path: String,
    pub outputs: Vec<OutputEntry>,
    /// Class name from the parent directory, when labels are inferred.
    pub label: Option<String>,
    pub source_width: usize,
    pub source_height: usize,
    /// Applying this box to the source (then resizing to `target_size`)
    /// reproduces the `ac` output.
    pub crop_box: CropBox,
    pub target_size: Option<[usize; 2]>,
    pub clusters: usize,
    pub lambda: f64,
    pub th: f64,
    pub scale_index: usize,
    pub sigma: f64,
    pub entropy: f64,
    pub fallback: bool,
    pub fallback_reason: Option<FallbackReason>,
    pub effective_clusters: usize,
    pub seed: u64,
    /// Wall time of the crop; only recorded on request since it breaks
    /// byte-for-byte reproducibility.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

impl ManifestRecord {
    pub fn output(&self, variant: Variant) -> Option<&str> {
        self.outputs
            .iter()
            .find(|o| o.variant == variant)
            .map(|o| o.path.as_str())
    }
}

/// Writes `records` sorted by `source_path`, one JSON object per line.
/// The file is written to a temporary sibling and renamed into place.
pub fn write_manifest(records: &[ManifestRecord], path: &Path) -> Result<()> {
    let mut sorted: Vec<&ManifestRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.source_path.cmp(&b.source_path));

    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    {
        let mut out = std::io::BufWriter::new(tmp.as_file_mut());
        for record in sorted {
            serde_json::to_writer(&mut out, record).map_err(|e| Error::Manifest(e.to_string()))?;
            out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRecord>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ManifestRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Manifest(format!("{}:{}: {e}", path.display(), n + 1)))?;
        if record.schema_version != SCHEMA_VERSION {
            return Err(Error::Manifest(format!(
                "{}:{}: unsupported schema version {:?}",
                path.display(),
                n + 1,
                record.schema_version
            )));
        }
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(source: &str, entropy: f64, fallback: bool) -> ManifestRecord {
        ManifestRecord {
            schema_version: SCHEMA_VERSION.into(),
            source_path: source.into(),
            outputs: vec![OutputEntry {
                variant: Variant::Ac,
                path: source.into(),
            }],
            label: source.split('/').next().map(str::to_owned),
            source_width: 64,
            source_height: 48,
            crop_box: CropBox {
                row_start: 1,
                col_start: 2,
                row_end: 30,
                col_end: 40,
            },
            target_size: Some([224, 224]),
            clusters: 3,
            lambda: 1.0 / 3.0,
            th: 1.0,
            scale_index: 4,
            sigma: 8.0,
            entropy,
            fallback,
            fallback_reason: fallback.then_some(FallbackReason::EmptySelection),
            effective_clusters: 3,
            seed: 0xdead_beef_cafe,
            elapsed_ms: None,
        }
    }

    #[test]
    fn empty_manifest_is_empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        write_manifest(&[], &path).unwrap();
        assert_eq!(fs::read(&path).unwrap().len(), 0);
        assert!(read_manifest(&path).unwrap().is_empty());
    }

    #[test]
    fn lines_are_sorted_by_source() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/m.jsonl");
        let recs = [record("b/2.png", 1.0, false), record("a/9.png", 2.0, true), record("b/10.png", 3.0, false)];
        write_manifest(&recs, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let sources: Vec<String> = text
            .lines()
            .map(|l| serde_json::from_str::<ManifestRecord>(l).unwrap().source_path)
            .collect();
        assert_eq!(sources, vec!["a/9.png", "b/10.png", "b/2.png"]);
        assert!(text.lines().all(|l| l.contains("\"schema_version\":\"1\"")));
        assert!(!text.contains("elapsed_ms"));
    }

    #[test]
    fn unwritable_path_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, b"x").unwrap();
        assert!(write_manifest(&[], &blocker.join("m.jsonl")).is_err());
    }

    #[test]
    fn rejects_other_schema_versions() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        let mut r = record("x.png", 0.5, false);
        r.schema_version = "2".into();
        fs::write(&path, serde_json::to_string(&r).unwrap()).unwrap();
        assert!(matches!(read_manifest(&path), Err(Error::Manifest(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn round_trip(entries in prop::collection::vec(("[a-z]{1,6}/[a-z0-9]{1,8}\\.png", 0.0f64..8.0, any::<bool>()), 0..12)) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("m.jsonl");
            let mut recs: Vec<ManifestRecord> = entries.iter().map(|(s, e, f)| record(s, *e, *f)).collect();
            recs[..].iter_mut().enumerate().for_each(|(i, r)| if i % 2 == 0 { r.elapsed_ms = Some(i as f64 * 1.25) });
            write_manifest(&recs, &path).unwrap();
            recs.sort_by(|a, b| a.source_path.cmp(&b.source_path));
            let back = read_manifest(&path).unwrap();
            prop_assert_eq!(back.len(), recs.len());
            // stable sort keeps equal source paths in input order on both sides
            prop_assert_eq!(back, recs);
        }
    }
}
