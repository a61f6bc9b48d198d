//! Run manifests: a flat key=value file recording the command, its full
//! parameter set, the base seed, and a content digest per output file, so
//! any published number can be regenerated and checked from one command
//! line. Re-running with identical parameters reproduces identical digests;
//! only the duration line varies.

use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use sha2::{Digest, Sha256};

pub const ARTIFACT_VERSION: &str = "1";

pub struct Manifest {
    command: String,
    params: Vec<(String, String)>,
    seed: Option<u64>,
    files: Vec<(String, String)>,
    started: Instant,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            params: Vec::new(),
            seed: None,
            files: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Display) {
        self.params.push((key.to_string(), value.to_string()));
    }

    pub fn seed(&mut self, seed: u64) {
        self.seed = Some(seed);
    }

    /// Digest a finished output file into the manifest.
    pub fn record_file(&mut self, path: &Path) -> std::io::Result<()> {
        let bytes = fs::read(path)?;
        let digest = Sha256::digest(&bytes);
        let name = path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        self.files.push((name, format!("{digest:x}")));
        Ok(())
    }

    /// Write `<command>_manifest.txt` into `dir` and return its path.
    pub fn write(mut self, dir: &Path) -> std::io::Result<PathBuf> {
        let path = dir.join(format!("{}_manifest.txt", self.command.replace(' ', "_")));
        let mut out = String::new();
        out.push_str(&format!("command={}\n", self.command));
        out.push_str(&format!("version={ARTIFACT_VERSION}\n"));
        match self.seed {
            Some(s) => out.push_str(&format!("seed={s}\n")),
            None => out.push_str("seed=NA\n"),
        }
        for (k, v) in &self.params {
            out.push_str(&format!("param.{k}={v}\n"));
        }
        self.files.sort();
        for (name, digest) in &self.files {
            out.push_str(&format!("file.{name}=sha256:{digest}\n"));
        }
        out.push_str(&format!(
            "duration_ms={}\n",
            self.started.elapsed().as_millis()
        ));
        let mut f = fs::File::create(&path)?;
        f.write_all(out.as_bytes())?;
        Ok(path)
    }
}
