//! Experiment configuration (JSON).

use std::path::{Path, PathBuf};

use rcgp_ucb::adversary::{AdversaryPolicy, BudgetMode};
use rcgp_ucb::algorithms::{AlgorithmKind, LooSearch, PlateauPolicy, SigmaProxy, Standardization};
use rcgp_ucb::kernels::KernelSpec;
use rcgp_ucb::objectives::ObjectiveKind;
use rcgp_ucb::schedules::ScheduleConfig;
use serde::{Deserialize, Serialize};

use crate::BenchError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveConfig {
    pub name: ObjectiveKind,
    pub noise_var: f64,
}

fn default_shape() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelOptions {
    /// Noise variance assumed by the models, raw units; defaults to the objective's.
    #[serde(default)]
    pub noise_var: Option<f64>,
    #[serde(default = "default_shape")]
    pub shape: f64,
    #[serde(default)]
    pub standardize: Standardization,
    #[serde(default)]
    pub plateau: PlateauPolicy,
    #[serde(default)]
    pub hyperparameters: Option<LooSearch>,
    #[serde(default)]
    pub sigma_proxy: SigmaProxy,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self {
            noise_var: None,
            shape: default_shape(),
            standardize: Standardization::default(),
            plateau: PlateauPolicy::default(),
            hyperparameters: None,
            sigma_proxy: SigmaProxy::default(),
        }
    }
}

/// Adversary as written in a config; the maximizer is filled in from the
/// objective when omitted.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum AdversaryConfig {
    #[default]
    None,
    GreedyClairvoyant {
        #[serde(default)]
        x_star: Option<Vec<f64>>,
        near_thresh: f64,
        far_thresh: f64,
        low_value: f64,
        high_value: f64,
        budget: BudgetMode,
    },
    EagerBudget {
        corruption_value: f64,
        budget: BudgetMode,
    },
}

impl AdversaryConfig {
    pub fn policy(&self, x_star: &[f64]) -> AdversaryPolicy {
        match self {
            AdversaryConfig::None => AdversaryPolicy::None,
            AdversaryConfig::GreedyClairvoyant {
                x_star: given,
                near_thresh,
                far_thresh,
                low_value,
                high_value,
                ..
            } => AdversaryPolicy::GreedyClairvoyant {
                x_star: given.clone().unwrap_or_else(|| x_star.to_vec()),
                near_thresh: *near_thresh,
                far_thresh: *far_thresh,
                low_value: *low_value,
                high_value: *high_value,
            },
            AdversaryConfig::EagerBudget {
                corruption_value, ..
            } => AdversaryPolicy::EagerBudget {
                corruption_value: *corruption_value,
            },
        }
    }

    pub fn budget(&self) -> BudgetMode {
        match self {
            AdversaryConfig::None => BudgetMode::FixedCount { count: 0 },
            AdversaryConfig::GreedyClairvoyant { budget, .. }
            | AdversaryConfig::EagerBudget { budget, .. } => *budget,
        }
    }
}

fn default_n_initial() -> usize {
    5
}

fn default_grid_size() -> usize {
    1001
}

fn default_starts() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub objective: ObjectiveConfig,
    pub algorithms: Vec<AlgorithmKind>,
    /// Kernel in standardized target units.
    pub kernel: KernelSpec,
    #[serde(default)]
    pub model: ModelOptions,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub adversary: AdversaryConfig,
    #[serde(default = "default_n_initial")]
    pub n_initial: usize,
    pub n_iterations: usize,
    pub seeds: Vec<u64>,
    #[serde(default = "default_grid_size")]
    pub grid_size: usize,
    #[serde(default = "default_starts")]
    pub starts: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Run (algorithm, seed) cells on a thread pool.
    #[serde(default)]
    pub parallel: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |msg: &str| Err(BenchError::Config(msg.to_string()));
        if self.algorithms.is_empty() {
            return bad("at least one algorithm is required");
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required");
        }
        if self.n_iterations == 0 {
            return bad("n_iterations must be >= 1");
        }
        if !(self.objective.noise_var >= 0.0) {
            return bad("objective.noise_var must be >= 0");
        }
        self.kernel
            .validate()
            .map_err(|e| BenchError::Config(e.to_string()))?;
        let dim = match self.objective.name {
            ObjectiveKind::Branin => 2,
            _ => 1,
        };
        if self.kernel.dim() != dim {
            return bad("kernel lengthscale count must match the objective dimension");
        }
        self.schedule
            .case
            .map(|c| c.validate())
            .transpose()
            .map_err(|e| BenchError::Config(e.to_string()))?;
        self.adversary
            .policy(&vec![0.0; dim])
            .validate()
            .map_err(|e| BenchError::Config(e.to_string()))?;
        Ok(())
    }

    pub fn model_noise_var(&self) -> f64 {
        self.model.noise_var.unwrap_or(self.objective.noise_var)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "objective": {"name": "forrester", "noise_var": 1.0},
        "algorithms": ["gp_ucb", "fc_rcgp_ucb"],
        "kernel": {"family": "rbf", "lengthscale": [0.1], "outputscale": 1.0},
        "n_iterations": 5,
        "seeds": [0]
    }"#;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.n_initial, 5);
        assert_eq!(cfg.grid_size, 1001);
        assert_eq!(cfg.adversary, AdversaryConfig::None);
        assert_eq!(cfg.model_noise_var(), 1.0);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = MINIMAL.replace("\"seeds\"", "\"sedes\": [1], \"seeds\"");
        assert!(matches!(
            ExperimentConfig::from_json(&text),
            Err(BenchError::Config(_))
        ));
    }

    #[test]
    fn adversary_block_parses() {
        let text = MINIMAL.replace(
            "\"seeds\"",
            r#""adversary": {"policy": "greedy_clairvoyant", "near_thresh": 0.1, "far_thresh": 0.4,
                "low_value": -10.0, "high_value": 25.0, "budget": {"mode": "time_budget", "alpha": 0.3333333333333333}},
               "seeds""#,
        );
        let cfg = ExperimentConfig::from_json(&text).unwrap();
        let p = cfg.adversary.policy(&[0.75]);
        assert_eq!(p, AdversaryPolicy::forrester_default(vec![0.75]));
    }

    #[test]
    fn semantic_errors_rejected() {
        let text = MINIMAL.replace("\"seeds\": [0]", "\"seeds\": []");
        assert!(ExperimentConfig::from_json(&text).is_err());
        let text = MINIMAL.replace("[0.1]", "[0.1, 0.2]");
        assert!(ExperimentConfig::from_json(&text).is_err());
    }
}
