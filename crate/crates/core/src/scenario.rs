//! Scenario files: every experiment's configuration plus seed and run counts,
//! read from JSON. Missing fields take their defaults; unknown ones are errors.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::environment::EnvironmentConfig;
use crate::experiments::inference::InferenceConfig;
use crate::experiments::mutuality::MutualityConfig;
use crate::experiments::profit::ProfitConfig;
use crate::experiments::transitivity::TransitivityConfig;
use crate::experiments::{self, ExperimentKind, ExperimentOutput, RunSettings};
use crate::graph::SocialGraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub seed: u64,
    /// Overrides every experiment's default run count.
    pub runs: Option<u32>,
    pub mutuality: MutualityConfig,
    pub inference: InferenceConfig,
    pub transitivity: TransitivityConfig,
    pub profit: ProfitConfig,
    pub environment: EnvironmentConfig,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            seed: 1,
            runs: None,
            mutuality: MutualityConfig::default(),
            inference: InferenceConfig::default(),
            transitivity: TransitivityConfig::default(),
            profit: ProfitConfig::default(),
            environment: EnvironmentConfig::default(),
        }
    }
}

/// Runs used when neither the scenario nor the caller sets a count.
pub fn default_runs(kind: ExperimentKind) -> u32 {
    match kind {
        ExperimentKind::Inference => 50,
        _ => 100,
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn runs_for(&self, kind: ExperimentKind) -> u32 {
        self.runs.unwrap_or_else(|| default_runs(kind))
    }

    pub fn settings(&self, kind: ExperimentKind) -> Result<RunSettings> {
        RunSettings::new(self.runs_for(kind), self.seed)
    }

    /// Runs one experiment. `graph` is ignored by the experiments that do not use one.
    pub fn run(&self, kind: ExperimentKind, graph: &SocialGraph, settings: &RunSettings) -> Result<ExperimentOutput> {
        match kind {
            ExperimentKind::Mutuality => experiments::mutuality::run(graph, &self.mutuality, settings),
            ExperimentKind::Inference => experiments::inference::run(&self.inference, settings),
            ExperimentKind::Transitivity => experiments::transitivity::run(graph, &self.transitivity, settings),
            ExperimentKind::Profit => experiments::profit::run(graph, &self.profit, settings),
            ExperimentKind::Environment => experiments::environment::run(&self.environment, settings),
        }
    }
}
