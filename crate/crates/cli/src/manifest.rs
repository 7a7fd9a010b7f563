use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Argv;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Everything needed to repeat a command: the effective argument list (flags
/// plus config values), the seed, and digests of what went in and came out.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments after the program name, with config values folded in.
    pub argv: Vec<String>,
    pub raw_argv: Vec<String>,
    pub config_file: Option<String>,
    pub config: BTreeMap<String, String>,
    pub seed: u64,
    pub threads: usize,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub timings_ms: BTreeMap<String, u128>,
    pub extras: BTreeMap<String, serde_json::Value>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

pub fn digest(path: &Path) -> Result<FileDigest> {
    let mut f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut bytes = 0u64;
    loop {
        let n = f.read(&mut buf).with_context(|| format!("reading {}", path.display()))?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
        bytes += n as u64;
    }
    Ok(FileDigest {
        path: path.display().to_string(),
        bytes,
        sha256: hex::encode(h.finalize()),
    })
}

/// Bookkeeping for one command invocation.
pub struct Run {
    out: PathBuf,
    started: Instant,
    outputs: Vec<String>,
    manifest: RunManifest,
}

impl Run {
    pub fn start(command: &str, argv: &Argv, out: &Path, seed: u64, threads: usize) -> Result<Self> {
        fs::create_dir_all(out).with_context(|| format!("creating output directory {}", out.display()))?;
        Ok(Self {
            out: out.to_path_buf(),
            started: Instant::now(),
            outputs: Vec::new(),
            manifest: RunManifest {
                tool: env!("CARGO_PKG_NAME").into(),
                version: env!("CARGO_PKG_VERSION").into(),
                command: command.into(),
                argv: argv.effective.iter().skip(1).cloned().collect(),
                raw_argv: argv.raw.iter().skip(1).cloned().collect(),
                config_file: argv.config_path.clone(),
                config: argv.config.clone(),
                seed,
                threads,
                seeds: BTreeMap::from([("master".to_owned(), seed)]),
                inputs: Vec::new(),
                outputs: Vec::new(),
                timings_ms: BTreeMap::new(),
                extras: BTreeMap::new(),
            },
        })
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let d = digest(path)?;
        self.manifest.inputs.push(d);
        Ok(())
    }

    /// Path of an output file, registered for the manifest.
    pub fn output(&mut self, name: &str) -> PathBuf {
        if !self.outputs.iter().any(|o| o == name) {
            self.outputs.push(name.to_owned());
        }
        self.out.join(name)
    }

    pub fn seed(&mut self, label: &str, seed: u64) {
        self.manifest.seeds.insert(label.to_owned(), seed);
    }

    pub fn extra(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("serialisable manifest extra");
        self.manifest.extras.insert(key.to_owned(), v);
    }

    pub fn timed<T>(&mut self, label: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let v = f();
        self.manifest.timings_ms.insert(label.to_owned(), t.elapsed().as_millis());
        v
    }

    pub fn record_time(&mut self, label: &str, started: Instant) {
        self.manifest.timings_ms.insert(label.to_owned(), started.elapsed().as_millis());
    }

    pub fn finish(mut self) -> Result<()> {
        self.manifest
            .timings_ms
            .insert("total".into(), self.started.elapsed().as_millis());
        let mut names = std::mem::take(&mut self.outputs);
        names.sort();
        for name in names {
            let mut d = digest(&self.out.join(&name))?;
            d.path = name;
            self.manifest.outputs.push(d);
        }
        let path = self.out.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&self.manifest)?;
        fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }
}
