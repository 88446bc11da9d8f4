//! Command-line driver for cutlab-core: configuration, bundled scenarios, result files and run
//! manifests.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;
pub mod scenarios;

use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde_json::{json, Map};

pub use commands::{Command, Report};
pub use config::{ConfigError, RunConfig};

/// Runs `command` on a pool of `threads` workers (rayon's default when `None`) and writes the
/// outputs plus `manifest.json` into `out`.
pub fn execute(command: Command, cfg: &RunConfig, out: &Path, threads: Option<usize>) -> Result<Report> {
    let start = Instant::now();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().context("cannot start thread pool")?;
    let mut outputs = output::Outputs::create(out)?;
    let report = pool.install(|| commands::run(command, cfg, &mut outputs))?;
    let mut header = Map::new();
    header.insert("tool".into(), json!("cutlab"));
    header.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    header.insert("command".into(), json!(command.name()));
    header.insert("threads".into(), json!(pool.current_num_threads()));
    header.insert("config".into(), serde_json::to_value(cfg)?);
    header.insert("verdicts".into(), commands::verdicts_json(&report.verdicts));
    outputs.manifest(header, start.elapsed().as_secs_f64())?;
    Ok(report)
}
