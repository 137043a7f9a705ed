//! Experiment configuration, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use slpmm::SolverConfig;

use crate::error::{HarnessError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub validation: ValidationSpec,
    pub problem: ProblemSpec,
    pub solver: SolverConfig,
}

fn default_name() -> String {
    "experiment".into()
}

fn default_seeds() -> Vec<u64> {
    vec![1]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidationSpec {
    /// Monte-Carlo samples used to estimate f and g at the averaged iterate.
    pub samples: usize,
    pub seed: u64,
}

impl Default for ValidationSpec {
    fn default() -> Self {
        ValidationSpec {
            samples: 100_000,
            seed: 0x5EED,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Np,
    Qcqp,
    Ssd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ProblemSpec {
    Np(NpSpec),
    Qcqp(QcqpSpec),
    Ssd(SsdSpec),
}

impl ProblemSpec {
    pub fn family(&self) -> Family {
        match self {
            ProblemSpec::Np(_) => Family::Np,
            ProblemSpec::Qcqp(_) => Family::Qcqp,
            ProblemSpec::Ssd(_) => Family::Ssd,
        }
    }

    pub fn default_for(family: Family) -> Self {
        match family {
            Family::Np => ProblemSpec::Np(NpSpec::default()),
            Family::Qcqp => ProblemSpec::Qcqp(QcqpSpec::default()),
            Family::Ssd => ProblemSpec::Ssd(SsdSpec::default()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QcqpSpec {
    pub n: usize,
    pub p: usize,
    pub radius: f64,
    /// Seed for the anchor point `x̂`.
    pub instance_seed: u64,
}

impl Default for QcqpSpec {
    fn default() -> Self {
        QcqpSpec {
            n: 20,
            p: 3,
            radius: 2.0,
            instance_seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NpSpec {
    pub data: NpData,
    pub tau: f64,
    pub batch_fraction: f64,
    /// Radius of the ball around 0 used as the feasible set.
    pub radius: f64,
}

impl Default for NpSpec {
    fn default() -> Self {
        NpSpec {
            data: NpData::default(),
            tau: 1.0,
            batch_fraction: 0.01,
            radius: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum NpData {
    Synthetic {
        dim: usize,
        positives: usize,
        negatives: usize,
        separation: f64,
        seed: u64,
    },
    File {
        path: PathBuf,
        /// Labels treated as the positive class; needed for multiclass files.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        positive_labels: Option<Vec<String>>,
    },
}

impl Default for NpData {
    fn default() -> Self {
        NpData::Synthetic {
            dim: 50,
            positives: 2000,
            negatives: 2000,
            separation: 1.0,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SsdSpec {
    pub data: SsdData,
    /// Number of benchmark quantiles used as thresholds; 0 uses every
    /// distinct benchmark value.
    pub support_points: usize,
    /// Common per-asset cap.
    pub cap: f64,
    /// Scenarios drawn per iteration.
    pub batch: usize,
}

impl Default for SsdSpec {
    fn default() -> Self {
        SsdSpec {
            data: SsdData::default(),
            support_points: 50,
            cap: 1.0,
            batch: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SsdData {
    Synthetic {
        assets: usize,
        scenarios: usize,
        seed: u64,
    },
    File {
        path: PathBuf,
    },
}

impl Default for SsdData {
    fn default() -> Self {
        SsdData::Synthetic {
            assets: 10,
            scenarios: 500,
            seed: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        config.check()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Checks that do not need the problem data.
    pub fn check(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(HarnessError::Config("at least one seed is required".into()));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(HarnessError::Config("seeds must be distinct".into()));
        }
        if self.validation.samples == 0 {
            return Err(HarnessError::Config(
                "validation.samples must be positive".into(),
            ));
        }
        self.solver.apg.validate()?;
        Ok(())
    }

    /// Replaces the problem section with the defaults of `family` unless it
    /// already describes that family.
    pub fn override_family(&mut self, family: Family) {
        if self.problem.family() != family {
            self.problem = ProblemSpec::default_for(family);
        }
    }
}
