//! Helpers shared by the acceptance report: running the bundled configs
//! through the experiment runner and reading their rows back.

use std::path::{Path, PathBuf};

use coordsim_cli::runner::{load_config, run};
use coordsim_cli::{CliError, Kind};
use serde_json::Value;

/// The bundled experiment configs at the workspace root.
pub fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

/// A finished run: its JSON record and the exact CSV bytes it wrote.
pub struct Run {
    pub record: Value,
    pub csv: Vec<u8>,
    pub exit_code: i32,
}

/// Runs `configs/<name>.json` as `kind`, writing into a fresh temporary directory.
pub fn run_config(name: &str, kind: Kind) -> Result<Run, CliError> {
    let path = configs_dir().join(format!("{name}.json"));
    let mut cfg = load_config(&path, kind)?;
    let out = tempfile::tempdir()?;
    cfg.output.dir = out.path().to_path_buf();
    let output = run(&cfg, &configs_dir())?;
    let csv = std::fs::read(&output.csv_path)?;
    Ok(Run { record: output.record, csv, exit_code: output.exit_code })
}

impl Run {
    /// A numeric column of the row table; missing or null cells become NaN.
    pub fn column(&self, key: &str) -> Vec<f64> {
        self.record["rows"]
            .as_array()
            .map(|rows| rows.iter().map(|r| r[key].as_f64().unwrap_or(f64::NAN)).collect())
            .unwrap_or_default()
    }

    pub fn status(&self) -> &str {
        self.record["status"].as_str().unwrap_or("")
    }
}

/// Number of consecutive pairs with `v[i+1] < v[i]`.
pub fn strict_decreases(v: &[f64]) -> usize {
    v.windows(2).filter(|w| w[1] < w[0]).count()
}
