//! One trustor-trustee pair tracking a fixed competence while the
//! environment changes underneath it, with and without correction.

use serde::{Deserialize, Serialize};

use super::{mean, run_parallel, run_rng, ExperimentKind, ExperimentOutput, Plot, RunSettings};
use crate::delegation::sample_outcome;
use crate::domain::{AgentProfile, CharacteristicId, Environment, RecordKind, TaskRegistry, TrustRecord};
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::report::{MetricsRow, PlotLabels, RunLabel, Series};
use crate::trust::{env_correct, update_observed, Observation, UpdateParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvPhase {
    pub iterations: u32,
    /// Environment value of both the trustor and the trustee.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvironmentConfig {
    /// The trustee's true success probability in an ideal environment.
    pub competence: f64,
    pub initial_s_hat: f64,
    pub beta: f64,
    pub phases: Vec<EnvPhase>,
    /// Delegations per update; each update uses the block's success fraction.
    pub trials_per_iteration: u32,
}

impl Default for EnvironmentConfig {
    fn default() -> Self {
        EnvironmentConfig {
            competence: 0.8,
            initial_s_hat: 1.0,
            beta: 0.1,
            phases: vec![
                EnvPhase { iterations: 100, value: 1.0 },
                EnvPhase { iterations: 100, value: 0.4 },
                EnvPhase { iterations: 100, value: 0.7 },
            ],
            trials_per_iteration: 100,
        }
    }
}

impl EnvironmentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.competence) || !(0.0..=1.0).contains(&self.initial_s_hat) {
            return Err(Error::param("environment", "competence and initial_s_hat must lie in [0, 1]"));
        }
        if self.phases.is_empty() || self.phases.iter().all(|p| p.iterations == 0) {
            return Err(Error::Empty("environment phases"));
        }
        if self.trials_per_iteration == 0 {
            return Err(Error::param("trials_per_iteration", "must be at least 1"));
        }
        UpdateParams::uniform(self.beta)?;
        Ok(())
    }

    pub fn total_iterations(&self) -> usize {
        self.phases.iter().map(|p| p.iterations as usize).sum()
    }

    /// Sets the iteration count of every phase.
    pub fn with_phase_length(mut self, iterations: u32) -> Self {
        for p in &mut self.phases {
            p.iterations = iterations;
        }
        self
    }
}

/// Update regimes, in output order.
pub const REGIMES: [&str; 3] = ["baseline", "uncorrected", "corrected"];

#[derive(Debug, Clone, Serialize)]
struct BlockTrace {
    regime: &'static str,
    iteration: usize,
    min_env: f64,
    success_rate: f64,
    s_hat: f64,
}

struct RunCurves {
    /// `[regime][iteration]` estimates after each update.
    s_hat: [Vec<f64>; 3],
    traces: Vec<BlockTrace>,
}

fn simulate(cfg: &EnvironmentConfig, settings: &RunSettings, run: u32) -> Result<RunCurves> {
    let mut reg = TaskRegistry::<f64>::new();
    let task = reg.register_uniform(&[CharacteristicId(0)])?;
    let task = reg.get(task);
    let (x, y) = (NodeId(0), NodeId(1));
    let trustor = AgentProfile::new(x);
    let mut trustee = AgentProfile::new(y);
    trustee.competence.insert(CharacteristicId(0), cfg.competence);
    // only the success estimate moves
    let params = UpdateParams::new(cfg.beta, 1.0, 1.0, 1.0)?;
    let ideal = Environment::ideal();

    let mut rng_ideal = run_rng(settings.master_seed, run, 0);
    let mut rng_env = run_rng(settings.master_seed, run, 1);
    let start = TrustRecord::new(RecordKind::Service, cfg.initial_s_hat, 0.5, 0.5, 0.5);
    let mut records = [start; 3];
    let n = cfg.total_iterations();
    let mut s_hat: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::with_capacity(n));
    let mut traces = Vec::new();
    let trials = cfg.trials_per_iteration;

    let mut iteration = 0;
    for phase in &cfg.phases {
        let mut env = Environment::ideal();
        env.set(x, phase.value)?;
        env.set(y, phase.value)?;
        for _ in 0..phase.iterations {
            iteration += 1;
            let rate = |env: &Environment<f64>, rng: &mut rand_chacha::ChaCha8Rng| {
                let wins = (0..trials).filter(|_| sample_outcome(&trustee, &trustor, task, env, &[], rng).success).count();
                wins as f64 / f64::from(trials)
            };
            let ideal_rate = rate(&ideal, &mut rng_ideal);
            let env_rate = rate(&env, &mut rng_env);
            let observed = [ideal_rate, env_rate, env_correct(&env, x, y, &[], env_rate)];
            for (i, obs) in observed.into_iter().enumerate() {
                let o = Observation { success_rate: obs, gain: None, damage: None, cost: 0.0 };
                records[i] = update_observed(&records[i], &o, &params);
                s_hat[i].push(records[i].s_hat);
                if settings.trace && run == 0 {
                    let min_env = if i == 0 { 1.0 } else { phase.value };
                    let success_rate = if i == 0 { ideal_rate } else { env_rate };
                    traces.push(BlockTrace { regime: REGIMES[i], iteration, min_env, success_rate, s_hat: records[i].s_hat });
                }
            }
        }
    }
    Ok(RunCurves { s_hat, traces })
}

pub fn param(regime: &str, iteration: usize) -> String {
    format!("regime={regime};iter={iteration:04}")
}

pub fn run(cfg: &EnvironmentConfig, settings: &RunSettings) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let curves = run_parallel(settings, |r| simulate(cfg, settings, r))?.into_iter().collect::<Result<Vec<_>>>()?;
    let name = ExperimentKind::Environment.name();
    let n = cfg.total_iterations();
    let mut rows = Vec::with_capacity(3 * n);
    let mut series = Vec::new();
    for (k, regime) in REGIMES.iter().enumerate() {
        let ys: Vec<f64> = (0..n).map(|i| mean(&curves.iter().map(|c| c.s_hat[k][i]).collect::<Vec<_>>())).collect();
        for (i, &y) in ys.iter().enumerate() {
            rows.push(MetricsRow::new(name, param(regime, i + 1), RunLabel::Aggregate, "s_hat", y));
        }
        series.push(Series::new(*regime, (1..=n).map(|i| i as f64).collect(), ys));
    }
    let traces = curves
        .into_iter()
        .next()
        .map(|c| c.traces.iter().map(|t| serde_json::to_value(t).expect("plain struct")).collect())
        .unwrap_or_default();
    Ok(ExperimentOutput {
        rows,
        plots: vec![Plot {
            name: name.into(),
            labels: PlotLabels { title: "Expected success rate".into(), x: "iteration".into(), y: "S".into() },
            series,
        }],
        traces,
        parameters: serde_json::to_value(cfg)?,
    })
}
