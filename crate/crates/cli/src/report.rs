use std::path::Path;

use serde::Serialize;

use crate::error::CliError;

/// One JSON document per run: what was asked, with which settings, and what
/// came out.
#[derive(Debug, Serialize)]
pub struct RunReport<C: Serialize, R: Serialize> {
    pub command: Vec<String>,
    pub config: C,
    pub results: R,
    pub wall_seconds: f64,
    pub version: &'static str,
}

impl<C: Serialize, R: Serialize> RunReport<C, R> {
    pub fn new(config: C, results: R, wall_seconds: f64) -> Self {
        Self {
            command: std::env::args().collect(),
            config,
            results,
            wall_seconds,
            version: env!("CARGO_PKG_VERSION"),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}
