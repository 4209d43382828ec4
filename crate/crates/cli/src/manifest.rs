//! Run manifests: enough to reproduce any emitted figure from the config
//! hash and seed.

use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepStatus {
    pub name: String,
    pub status: String,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub config_hash: String,
    pub build: String,
    pub seed: u64,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub steps: Vec<StepStatus>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(experiment: &str, config_hash: String, seed: u64) -> Self {
        RunManifest {
            experiment: experiment.to_string(),
            config_hash,
            build: format!("strongconv {}", env!("CARGO_PKG_VERSION")),
            seed,
            started_unix: now_unix(),
            finished_unix: 0,
            steps: vec![],
            outputs: vec![],
        }
    }

    pub fn step_ok(&mut self, name: &str, detail: String) {
        self.steps.push(StepStatus {
            name: name.to_string(),
            status: "ok".to_string(),
            detail,
        });
    }

    pub fn step_failed(&mut self, name: &str, detail: String) {
        self.steps.push(StepStatus {
            name: name.to_string(),
            status: "failed".to_string(),
            detail,
        });
    }

    pub fn add_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn finish(&mut self) {
        self.finished_unix = now_unix();
    }

    pub fn write(&self, dir: &Path) -> anyhow::Result<std::path::PathBuf> {
        let path = dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }

    pub fn all_ok(&self) -> bool {
        self.steps.iter().all(|s| s.status == "ok")
    }
}

pub fn now_unix() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
