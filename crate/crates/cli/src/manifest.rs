//! Run manifest: what was computed, with which settings, and a checksum for
//! every file in the output directory.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::failure::Failure;

pub const MANIFEST: &str = "manifest.json";
const MANIFEST_TMP: &str = ".manifest.json.tmp";

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct Manifest {
    pub config_hash: String,
    pub version: String,
    pub seed: u64,
    pub threads: usize,
    pub solver: Option<SolverRecord>,
    pub self_test: Option<SelfTest>,
    pub stages: BTreeMap<String, StageRecord>,
    pub files: Vec<FileEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SolverRecord {
    pub m: f64,
    pub m_sampled: f64,
    pub tau_max: f64,
    pub n_terms: usize,
    pub tail_bound: f64,
}

/// Spot check of the stored ballistic term against independent ray tracing.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SelfTest {
    pub samples: usize,
    /// Max `|F0 - exp(-int mu_t)|` over sampled nodes.
    pub ballistic_max_err: f64,
    /// Max `|f - exp(-int mu_t)|`; only meaningful without scattering.
    pub total_max_err: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct StageRecord {
    pub seconds: f64,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    #[serde(default)]
    pub summary: BTreeMap<String, Value>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

pub fn sha256_file(path: &Path) -> io::Result<String> {
    let bytes = fs::read(path)?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

pub fn sha256_text(text: &str) -> String {
    format!("{:x}", Sha256::digest(text.as_bytes()))
}

impl Manifest {
    /// Existing manifest in `dir` when it was produced from the same config,
    /// otherwise an empty one.
    pub fn open(dir: &Path, config_hash: &str, seed: u64, threads: usize) -> Self {
        let fresh = Manifest {
            config_hash: config_hash.to_string(),
            version: raybound::VERSION.to_string(),
            seed,
            threads,
            ..Default::default()
        };
        let Ok(text) = fs::read_to_string(dir.join(MANIFEST)) else {
            return fresh;
        };
        match serde_json::from_str::<Manifest>(&text) {
            Ok(m) if m.config_hash == config_hash && m.version == fresh.version => Manifest {
                seed,
                threads,
                ..m
            },
            Ok(_) => {
                log::info!("existing manifest belongs to another config; starting afresh");
                fresh
            }
            Err(e) => {
                log::warn!("ignoring unreadable manifest: {e}");
                fresh
            }
        }
    }

    /// Path of an artifact declared by `stage`, checked against its recorded
    /// checksum.
    pub fn upstream(&self, dir: &Path, stage: &str, name: &str) -> Result<PathBuf, Failure> {
        let missing = |why: &str| Failure::MissingArtifact(format!("{name} from stage `{stage}`: {why}"));
        let record = self
            .stages
            .get(stage)
            .ok_or_else(|| missing("stage has not run for this config"))?;
        if !record.outputs.iter().any(|o| o == name) {
            return Err(missing("not declared by the stage"));
        }
        let entry = self
            .files
            .iter()
            .find(|f| f.path == name)
            .ok_or_else(|| missing("not listed in the manifest"))?;
        let path = dir.join(name);
        let sum = sha256_file(&path).map_err(|_| missing("file is missing"))?;
        if sum != entry.sha256 {
            return Err(missing("checksum mismatch"));
        }
        Ok(path)
    }

    /// Rescans `dir`, then writes the manifest through a temporary file and
    /// a rename so readers never see a partial manifest.
    pub fn commit(&mut self, dir: &Path) -> io::Result<()> {
        self.files = inventory(dir)?;
        let tmp = dir.join(MANIFEST_TMP);
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(serde_json::to_string_pretty(self)?.as_bytes())?;
            f.write_all(b"\n")?;
            f.sync_all()?;
        }
        fs::rename(&tmp, dir.join(MANIFEST))
    }
}

/// Every regular file under `dir` except the manifest itself, sorted.
pub fn inventory(dir: &Path) -> io::Result<Vec<FileEntry>> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d)? {
            let entry = entry?;
            let path = entry.path();
            if entry.file_type()?.is_dir() {
                stack.push(path);
                continue;
            }
            let rel = path
                .strip_prefix(dir)
                .expect("inside dir")
                .to_string_lossy()
                .replace('\\', "/");
            if rel == MANIFEST || rel == MANIFEST_TMP {
                continue;
            }
            out.push(FileEntry {
                bytes: entry.metadata()?.len(),
                sha256: sha256_file(&path)?,
                path: rel,
            });
        }
    }
    out.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(out)
}
