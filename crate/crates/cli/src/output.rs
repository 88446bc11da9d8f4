//! Output directory bookkeeping and the run manifest.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

/// JSON number, or a string for non-finite values.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
    timings: Vec<(String, f64)>,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            timings: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn time<T>(&mut self, op: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.push((op.to_string(), start.elapsed().as_secs_f64()));
        out
    }

    fn open(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let file = File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(BufWriter::new(file))
    }

    pub fn csv(&mut self, name: &str, write: impl FnOnce(&mut BufWriter<File>) -> csv::Result<()>) -> Result<()> {
        let mut w = self.open(name)?;
        write(&mut w).with_context(|| format!("writing {name}"))?;
        w.flush()?;
        Ok(())
    }

    pub fn json(&mut self, name: &str, value: &Value) -> Result<()> {
        let mut w = self.open(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    /// Writes `manifest.json`: everything in `header`, the timings, and a checksum of every file
    /// written so far.
    pub fn manifest(&self, header: Map<String, Value>, wall_clock: f64) -> Result<PathBuf> {
        let mut inventory = Vec::new();
        for name in &self.files {
            let bytes = std::fs::read(self.dir.join(name))?;
            inventory.push(json!({
                "name": name,
                "bytes": bytes.len(),
                "sha256": hex::encode(Sha256::digest(&bytes)),
            }));
        }
        let mut m = header;
        m.insert("wall_clock_seconds".into(), json!(wall_clock));
        m.insert(
            "timings".into(),
            Value::Array(
                self.timings
                    .iter()
                    .map(|(op, s)| json!({"operation": op, "seconds": s}))
                    .collect(),
            ),
        );
        m.insert("files".into(), Value::Array(inventory));
        let path = self.dir.join("manifest.json");
        let mut w = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(&mut w, &Value::Object(m))?;
        writeln!(w)?;
        w.flush()?;
        Ok(path)
    }
}
