//! Run manifests: every command prints what it ran, which inputs it read
//! (with content hashes), and which outputs it wrote.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use tqe_core::error::{Error, Result};

pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let digest = Sha256::digest(&bytes);
    let mut hex = String::with_capacity(64);
    for b in digest {
        let _ = write!(hex, "{b:02x}");
    }
    Ok(hex)
}

pub struct Manifest {
    command: String,
    seed: u64,
    lines: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, seed: u64) -> Self {
        Manifest {
            command: command.to_string(),
            seed,
            lines: Vec::new(),
        }
    }

    pub fn config(&mut self, path: Option<&Path>) -> Result<()> {
        if let Some(p) = path {
            let hash = file_sha256(p)?;
            self.lines.push(format!("config: {} sha256={hash}", p.display()));
        }
        Ok(())
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let hash = file_sha256(path)?;
        self.lines.push(format!("input: {} sha256={hash}", path.display()));
        Ok(())
    }

    pub fn output(&mut self, path: &Path) {
        self.lines.push(format!("output: {}", path.display()));
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.lines.push(text.into());
    }

    /// Prints the collected manifest to stdout.
    pub fn print(&self) {
        println!("run: command={} seed={}", self.command, self.seed);
        for line in &self.lines {
            println!("{line}");
        }
    }
}
