use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use stablefield::process::TestFunction;
use stablefield::stable::KernelModel;
use stablefield::GroupSpec;

use crate::exit::Failure;

fn default_terms() -> usize {
    100
}

fn default_delta() -> f64 {
    0.5
}

/// One experiment, as read from `--config`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub group_spec: GroupSpec,
    #[serde(default)]
    pub kernel_model: Option<KernelModel>,
    #[serde(default)]
    pub n_list: Vec<u64>,
    #[serde(default)]
    pub replicates: u64,
    /// Required: there is no wall-clock seeding.
    pub master_seed: u64,
    /// Initial number of series terms; the truncation rule may add more.
    #[serde(default = "default_terms")]
    pub truncation_index: usize,
    #[serde(default)]
    pub g_suite: Vec<TestFunction>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Threshold of the mass diagnostics `1{|x| >= delta}`.
    #[serde(default = "default_delta")]
    pub delta: f64,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::usage(format!("config {}: {e}", path.display())))
    }

    /// SHA-256 of the canonical JSON of the configuration as loaded.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn kernel(&self) -> Result<&KernelModel, Failure> {
        self.kernel_model.as_ref().ok_or_else(|| Failure::usage("config has no kernelModel"))
    }

    pub fn radii(&self) -> Result<&[u64], Failure> {
        if self.n_list.is_empty() || self.n_list.windows(2).any(|w| w[0] >= w[1]) || self.n_list[0] == 0 {
            return Err(Failure::usage(format!(
                "nList must be positive and strictly increasing, got {:?}",
                self.n_list
            )));
        }
        Ok(&self.n_list)
    }

    pub fn need_replicates(&self, min: u64) -> Result<u64, Failure> {
        if self.replicates < min {
            return Err(Failure::usage(format!("replicates must be at least {min}, got {}", self.replicates)));
        }
        Ok(self.replicates)
    }
}

/// Provenance block embedded in every report.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Provenance {
    pub config_hash: String,
    pub master_seed: u64,
    pub config: ExperimentConfig,
}
