//! Output directory, CSV files and the run manifest.

use std::cell::RefCell;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Config;

const MANIFEST: &str = "manifest.json";

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub core_version: String,
    pub command: String,
    pub config_hash: String,
    pub sim_seed: u64,
    pub code_seed: u64,
    pub outputs: Vec<OutputFile>,
    pub config: Config,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
}

pub struct Output {
    dir: PathBuf,
    command: String,
    config: Config,
    files: RefCell<Vec<OutputFile>>,
}

impl Output {
    pub fn create(dir: &Path, command: &str, config: &Config) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            config: config.clone(),
            files: RefCell::new(Vec::new()),
        })
    }

    pub fn bytes(&self, name: &str, data: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, data).with_context(|| format!("writing {}", path.display()))?;
        self.files.borrow_mut().push(OutputFile {
            file: name.to_string(),
            sha256: format!("{:x}", Sha256::digest(data)),
        });
        Ok(())
    }

    pub fn csv<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let data = w.into_inner().context("flushing CSV")?;
        self.bytes(name, &data)
    }

    pub fn finish(self) -> Result<()> {
        let manifest = Manifest {
            tool: "sctc".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            core_version: sctc::VERSION.into(),
            command: self.command,
            config_hash: self.config.hash(),
            sim_seed: self.config.sim.seed,
            code_seed: self.config.finite.code_seed,
            outputs: self.files.into_inner(),
            config: self.config,
        };
        let path = self.dir.join(MANIFEST);
        let mut json = serde_json::to_string_pretty(&manifest)?;
        json.push('\n');
        fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?;
        for f in &manifest.outputs {
            println!("{}", self.dir.join(&f.file).display());
        }
        Ok(())
    }
}

/// Configuration recorded by an earlier run of `command`.
pub fn config_from_manifest(path: &Path, command: &str) -> Result<Config> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let m: Manifest =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if m.command != command {
        bail!(
            "manifest {} records `{}`, not `{command}`",
            path.display(),
            m.command
        );
    }
    if m.config.hash() != m.config_hash {
        bail!(
            "manifest {} has a config hash that does not match its config",
            path.display()
        );
    }
    Ok(m.config)
}
