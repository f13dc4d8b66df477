use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use littlewood_lab::{LabError, Result};
use serde::Serialize;
use serde_json::Value;

use crate::args::Cli;
use crate::run::{bridge_constant, Outcome};

#[derive(Serialize)]
pub struct Derived {
    /// Constant relating short vectors and small products (sup-norm).
    pub c: f64,
    /// Expansion rate of the flow direction, when the command uses one.
    pub lambda: Option<f64>,
}

#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Value,
    pub version: &'static str,
    pub seed: u64,
    pub threads: Option<usize>,
    pub outputs: Vec<String>,
    pub derived: Derived,
    pub summary: Value,
    pub wall_time_secs: f64,
}

impl RunManifest {
    pub fn new(
        cli: &Cli,
        threads: Option<usize>,
        elapsed: Duration,
        outputs: Vec<String>,
        outcome: &Outcome,
    ) -> Result<Self> {
        let config = serde_json::to_value(cli)?;
        Ok(RunManifest {
            command: command_name(&config),
            config,
            version: env!("CARGO_PKG_VERSION"),
            seed: cli.global.seed,
            threads,
            outputs,
            derived: Derived {
                c: bridge_constant(),
                lambda: outcome.lambda,
            },
            summary: outcome.summary.clone(),
            wall_time_secs: elapsed.as_secs_f64(),
        })
    }
}

/// `littlewood scan` from `{"littlewood": {"scan": {...}}}`.
fn command_name(config: &Value) -> String {
    let mut parts = Vec::new();
    let mut node = config.get("command");
    while let Some(Value::Object(map)) = node {
        match map.iter().next() {
            Some((k, v)) if map.len() == 1 => {
                parts.push(k.clone());
                node = Some(v);
            }
            _ => break,
        }
    }
    parts.join(" ")
}

pub fn absolute(p: PathBuf) -> Result<PathBuf> {
    std::path::absolute(&p).map_err(|e| LabError::Io(format!("{}: {e}", p.display())))
}

pub fn write(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))
}
