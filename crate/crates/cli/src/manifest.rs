//! The `manifest.json` written next to every command's outputs.

use std::path::{Path, PathBuf};

use feint_core::{Error, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

/// How an output directory was produced. Holds no timestamps or absolute
/// output paths, so identical runs write identical manifests.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<InputFile>,
    pub config: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub version: String,
    /// File names relative to the output directory.
    pub outputs: Vec<String>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        RunManifest {
            command: command.to_owned(),
            inputs: Vec::new(),
            config,
            seed: None,
            version: env!("CARGO_PKG_VERSION").to_owned(),
            outputs: Vec::new(),
        }
    }

    /// Records `path` with the digest of its current contents.
    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path).map_err(|e| io_error(path, e))?;
        self.inputs.push(InputFile {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        Ok(())
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

pub(crate) fn io_error(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
    Error::Io {
        path: path.into(),
        source,
    }
}

/// Collects output files in one directory and finishes with the manifest.
pub(crate) struct OutputDir {
    dir: PathBuf,
    manifest: RunManifest,
}

impl OutputDir {
    pub fn create(dir: &Path, manifest: RunManifest) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        Ok(OutputDir {
            dir: dir.to_owned(),
            manifest,
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|e| io_error(path, e))?;
        self.manifest.outputs.push(name.to_owned());
        Ok(())
    }

    pub fn finish(self) -> Result<RunManifest> {
        let path = self.dir.join(MANIFEST_FILE);
        std::fs::write(&path, self.manifest.to_json_string()).map_err(|e| io_error(path, e))?;
        Ok(self.manifest)
    }
}
