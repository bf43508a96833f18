//! Output directory layout: `config.toml`, `summary.csv`, `trajectories/`,
//! extra scenario tables, and `manifest.toml` with a SHA-256 per file.
//! Nothing time-dependent is written, so identical inputs give identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use super::scenarios::ExperimentOutput;
use crate::Result;

pub const SUMMARY_VERSION_LINE: &str = "# cqed summary v1";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Serialize)]
struct Manifest {
    version: u32,
    scenario: String,
    seed: u64,
    config_sha256: String,
    files: Vec<ManifestEntry>,
}

#[derive(Serialize)]
struct ManifestEntry {
    path: String,
    sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn summary_csv(out: &ExperimentOutput) -> String {
    let mut s = format!("{SUMMARY_VERSION_LINE}\nrun,quantity,value\n");
    for r in &out.summary {
        s.push_str(&format!("{},{},{:e}\n", r.run, r.quantity, r.value));
    }
    s
}

/// Writes all outputs under `dir` and returns the paths written, manifest last.
pub fn write_outputs(cfg: &ExperimentConfig, out: &ExperimentOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir.join("trajectories"))?;
    let config = cfg.to_toml();
    let mut entries = Vec::new();
    let mut written = Vec::new();
    let mut emit = |rel: String, bytes: Vec<u8>| -> Result<()> {
        let path = dir.join(&rel);
        fs::write(&path, &bytes)?;
        entries.push(ManifestEntry {
            path: rel,
            sha256: sha256_hex(&bytes),
        });
        written.push(path);
        Ok(())
    };
    emit("config.toml".into(), config.clone().into_bytes())?;
    emit("summary.csv".into(), summary_csv(out).into_bytes())?;
    for (name, contents) in &out.files {
        emit(name.clone(), contents.clone().into_bytes())?;
    }
    for (name, table) in &out.trajectories {
        let mut buf = Vec::new();
        table.write_csv(&mut buf)?;
        emit(format!("trajectories/{name}"), buf)?;
    }
    let manifest = Manifest {
        version: MANIFEST_VERSION,
        scenario: cfg.scenario.name().to_string(),
        seed: cfg.seed,
        config_sha256: sha256_hex(config.as_bytes()),
        files: entries,
    };
    let path = dir.join("manifest.toml");
    fs::write(&path, toml::to_string(&manifest).expect("manifest is serialisable"))?;
    written.push(path);
    Ok(written)
}
