//! Run manifest: config echo, library version, artifact paths, and wall
//! clock per stage. Timing fields are the only part excluded from
//! byte-determinism guarantees.

use std::path::Path;
use std::time::Duration;

use serde_json::{json, Map, Value};

use crate::config::ExperimentConfig;
use crate::util::write_atomic;
use crate::RunError;

pub struct ManifestBuilder {
    command: &'static str,
    config: Value,
    artifacts: Map<String, Value>,
    wall_clock: Map<String, Value>,
}

impl ManifestBuilder {
    pub fn new(command: &'static str, config: &ExperimentConfig) -> Self {
        Self {
            command,
            config: serde_json::to_value(config).unwrap_or(Value::Null),
            artifacts: Map::new(),
            wall_clock: Map::new(),
        }
    }

    /// Registers artifact file names (relative to the output directory)
    /// under a stage key such as `n=4`.
    pub fn stage(&mut self, key: &str, files: &[String], elapsed: Duration) {
        self.artifacts.insert(
            key.to_string(),
            Value::Array(files.iter().map(|f| Value::String(f.clone())).collect()),
        );
        self.wall_clock
            .insert(key.to_string(), json!(elapsed.as_secs_f64()));
    }

    pub fn write(mut self, out_dir: &Path, total: Duration) -> Result<(), RunError> {
        self.wall_clock
            .insert("total".to_string(), json!(total.as_secs_f64()));
        let manifest = json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "config": self.config,
            "artifacts": Value::Object(self.artifacts),
            "wall_clock_seconds": Value::Object(self.wall_clock),
        });
        let text = optmeas::io::render_json(&manifest);
        write_atomic(&out_dir.join("manifest.json"), text.as_bytes())
    }
}
