//! On-disk formats. Every binary file is a 24-byte header (8-byte magic,
//! `u32` version, `u32` reserved, `u64` value count) followed by
//! little-endian `f64` values; a JSON manifest beside it describes the layout.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::autodiff::{Dtype, Tensor};
use crate::data::{DatasetMeta, SampleSet, Splits};
use crate::error::{Error, Result};
use crate::fno::{FnoConfig, FnoParams};
use crate::model::{Model, ModelKind, Operator};
use crate::mscale::MscaleParams;

pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_BYTES: usize = 24;
const CHECKPOINT_MAGIC: &[u8; 8] = b"MSFNOCKP";
const DATASET_MAGIC: &[u8; 8] = b"MSFNODAT";

fn write_blob(path: &Path, magic: &[u8; 8], values: &[f64]) -> Result<()> {
    let mut bytes = Vec::with_capacity(HEADER_BYTES + 8 * values.len());
    bytes.extend_from_slice(magic);
    bytes.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    bytes.extend_from_slice(&0u32.to_le_bytes());
    bytes.extend_from_slice(&(values.len() as u64).to_le_bytes());
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read_blob(path: &Path, magic: &[u8; 8]) -> Result<Vec<f64>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let bad = |why: &str| Error::Format(format!("{}: {why}", path.display()));
    if bytes.len() < HEADER_BYTES || &bytes[..8] != magic {
        return Err(bad("bad magic"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let count = u64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes")) as usize;
    if bytes.len() != HEADER_BYTES + 8 * count {
        return Err(bad("truncated or oversized payload"));
    }
    Ok(bytes[HEADER_BYTES..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DtypeName {
    F64,
    C128,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub dtype: DtypeName,
    /// Offset in `f64` values from the start of the payload.
    pub offset: usize,
    /// Length in `f64` values (complex entries take two).
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointManifest {
    pub format: String,
    pub version: u32,
    pub kind: ModelKind,
    pub config: FnoConfig,
    pub branches: usize,
    pub seed: u64,
    pub parameter_count: usize,
    pub blob: String,
    pub sections: Vec<SectionEntry>,
}

/// `stem.json` and `stem.bin` for a path given with or without extension.
fn pair(path: &Path) -> (PathBuf, PathBuf) {
    let stem = match path.extension().and_then(|e| e.to_str()) {
        Some("json") | Some("bin") => path.with_extension(""),
        _ => path.to_path_buf(),
    };
    let with = |ext: &str| {
        let mut s = stem.clone().into_os_string();
        s.push(ext);
        PathBuf::from(s)
    };
    (with(".json"), with(".bin"))
}

pub fn save_checkpoint(path: &Path, model: &Model, seed: u64) -> Result<PathBuf> {
    let (json, bin) = pair(path);
    let mut values = Vec::new();
    let mut sections = Vec::new();
    for (name, t) in model.sections() {
        let offset = values.len();
        t.extend_flat(&mut values);
        sections.push(SectionEntry {
            name,
            shape: t.shape().to_vec(),
            dtype: match t.dtype() {
                Dtype::Real => DtypeName::F64,
                Dtype::Complex => DtypeName::C128,
            },
            offset,
            len: values.len() - offset,
        });
    }
    let manifest = CheckpointManifest {
        format: "mscale-fno-checkpoint".into(),
        version: FORMAT_VERSION,
        kind: model.kind(),
        config: model.config().clone(),
        branches: model.branches(),
        seed,
        parameter_count: model.parameter_count(),
        blob: bin
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
        sections,
    };
    write_blob(&bin, CHECKPOINT_MAGIC, &values)?;
    write_json(&json, &manifest)?;
    Ok(json)
}

pub fn load_checkpoint(path: &Path) -> Result<(Model, CheckpointManifest)> {
    let (json, _) = pair(path);
    let manifest: CheckpointManifest = read_json(&json)?;
    let bin = json.with_file_name(&manifest.blob);
    let values = read_blob(&bin, CHECKPOINT_MAGIC)?;
    let mut model = match manifest.kind {
        ModelKind::NormalFno => Model::Fno(FnoParams::zeros(&manifest.config)?),
        ModelKind::MscaleFno => {
            let branches = (0..manifest.branches)
                .map(|_| FnoParams::zeros(&manifest.config))
                .collect::<Result<Vec<_>>>()?;
            let zeros = vec![0.0; manifest.branches];
            Model::Mscale(MscaleParams::from_parts(branches, zeros.clone(), zeros)?)
        }
    };
    let names: Vec<(String, Vec<usize>)> = model
        .sections()
        .into_iter()
        .map(|(n, t)| (n, t.shape().to_vec()))
        .collect();
    if names.len() != manifest.sections.len() {
        return Err(Error::Format(format!(
            "{}: {} sections listed, architecture has {}",
            json.display(),
            manifest.sections.len(),
            names.len()
        )));
    }
    for ((t, (name, shape)), entry) in model.sections_mut().into_iter().zip(names).zip(&manifest.sections) {
        if entry.name != name || entry.shape != shape || entry.len != t.real_len() {
            return Err(Error::Format(format!(
                "{}: section `{}` {:?} does not match `{name}` {shape:?}",
                json.display(),
                entry.name,
                entry.shape
            )));
        }
        let slice = values
            .get(entry.offset..entry.offset + entry.len)
            .ok_or_else(|| Error::Format(format!("section `{name}` past end of blob")))?;
        t.assign_flat(slice)?;
    }
    Ok((model, manifest))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format: String,
    pub version: u32,
    pub samples: usize,
    pub grid_points: usize,
    /// Payload order: grid, then inputs (sample-major), then targets.
    pub layout: String,
    pub blob: String,
    pub splits: Splits,
    pub meta: DatasetMeta,
}

pub const DATASET_MANIFEST: &str = "dataset.json";
pub const DATASET_BLOB: &str = "dataset.bin";

fn dataset_manifest_path(path: &Path) -> PathBuf {
    if path.extension().and_then(|e| e.to_str()) == Some("json") {
        path.to_path_buf()
    } else {
        path.join(DATASET_MANIFEST)
    }
}

/// Writes `dataset.json` and `dataset.bin` into directory `dir`.
pub fn save_dataset(dir: &Path, data: &SampleSet) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut values = Vec::with_capacity(data.n() * (1 + 2 * data.len()));
    values.extend_from_slice(data.grid());
    values.extend_from_slice(data.inputs_flat());
    values.extend_from_slice(data.targets_flat());
    let manifest = DatasetManifest {
        format: "mscale-fno-dataset".into(),
        version: FORMAT_VERSION,
        samples: data.len(),
        grid_points: data.n(),
        layout: "grid[n], inputs[samples][n], targets[samples][n]".into(),
        blob: DATASET_BLOB.into(),
        splits: data.splits().clone(),
        meta: data.meta().clone(),
    };
    write_blob(&dir.join(DATASET_BLOB), DATASET_MAGIC, &values)?;
    let json = dir.join(DATASET_MANIFEST);
    write_json(&json, &manifest)?;
    Ok(json)
}

/// Reads a dataset from its directory or its manifest path.
pub fn load_dataset(path: &Path) -> Result<SampleSet> {
    let json = dataset_manifest_path(path);
    let manifest: DatasetManifest = read_json(&json)?;
    let values = read_blob(&json.with_file_name(&manifest.blob), DATASET_MAGIC)?;
    let (n, s) = (manifest.grid_points, manifest.samples);
    if values.len() != n * (1 + 2 * s) {
        return Err(Error::Format(format!(
            "{}: payload holds {} values, manifest implies {}",
            json.display(),
            values.len(),
            n * (1 + 2 * s)
        )));
    }
    let grid = values[..n].to_vec();
    let inputs = values[n..n + n * s].to_vec();
    let targets = values[n + n * s..].to_vec();
    SampleSet::new(grid, inputs, targets, manifest.splits, manifest.meta)
}

/// Reads raw tensor sections back from a checkpoint (for inspection).
pub fn checkpoint_tensors(path: &Path) -> Result<Vec<(String, Tensor)>> {
    let (model, _) = load_checkpoint(path)?;
    Ok(model.sections().into_iter().map(|(n, t)| (n, t.clone())).collect())
}
