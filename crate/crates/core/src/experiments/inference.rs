//! Choosing among trustees that have never done the requested task, using
//! what their earlier tasks say about its characteristics.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{run_parallel, run_rng, scalar_rows, ExperimentKind, ExperimentOutput, Plot, RunSettings};
use crate::delegation::sample_outcome;
use crate::domain::{AgentProfile, CharacteristicId, Context, Environment, RecordKind, TaskRegistry, TrustRecord, TrustStore};
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::report::{PlotLabels, Series};
use crate::trust::{hop_value, rank_by_score, update_estimates, HopScope, SelectionStrategy, UpdateParams};

/// Which characteristic dishonest trustees underperform on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Taint {
    /// One of the requested task's characteristics.
    Shared,
    /// A characteristic seen only in earlier tasks unrelated to the requested one.
    Unrelated,
    /// Nobody is dishonest.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InferenceConfig {
    pub groups: u32,
    pub trustors_per_group: u32,
    pub honest_per_group: u32,
    pub dishonest_per_group: u32,
    /// Honest competences are uniform on this range.
    pub competence: (f64, f64),
    /// Dishonest trustees keep `1 - penalty` of their competence on the tainted characteristic.
    pub penalty: f64,
    pub target: Vec<u16>,
    pub previous: Vec<Vec<u16>>,
    /// Delegations per previous task that build each trustor's records.
    pub history_delegations: u32,
    pub history_beta: f64,
    pub taint: Taint,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        InferenceConfig {
            groups: 10,
            trustors_per_group: 2,
            honest_per_group: 2,
            dishonest_per_group: 2,
            competence: (0.6, 1.0),
            penalty: 0.5,
            target: vec![1, 2],
            previous: vec![vec![1, 3], vec![2, 4], vec![5, 6]],
            history_delegations: 20,
            history_beta: 0.9,
            taint: Taint::Shared,
        }
    }
}

impl InferenceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.groups == 0 || self.trustors_per_group == 0 || self.honest_per_group + self.dishonest_per_group == 0 {
            return Err(Error::Empty("inference groups"));
        }
        let (lo, hi) = self.competence;
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) || !(0.0..=1.0).contains(&self.penalty) {
            return Err(Error::param("competence", "range and penalty must lie in [0, 1]"));
        }
        if self.target.is_empty() || self.previous.iter().any(Vec::is_empty) {
            return Err(Error::Empty("task characteristics"));
        }
        if self.taint == Taint::Unrelated && self.unrelated().is_none() {
            return Err(Error::param("taint", "no previous characteristic lies outside the target"));
        }
        UpdateParams::uniform(self.history_beta)?;
        Ok(())
    }

    /// A characteristic of a previous task that shares nothing with the target.
    fn unrelated(&self) -> Option<u16> {
        self.previous.iter().find(|p| p.iter().all(|c| !self.target.contains(c))).map(|p| p[0])
    }

    fn characteristics(&self) -> Vec<u16> {
        let mut all: Vec<u16> = self.target.iter().chain(self.previous.iter().flatten()).copied().collect();
        all.sort();
        all.dedup();
        all
    }
}

pub const PARAM: &str = "all";

fn ids(chars: &[u16]) -> Vec<CharacteristicId> {
    chars.iter().map(|&c| CharacteristicId(c)).collect()
}

/// Fractions of trustors picking an honest trustee, with and without inference.
fn simulate(cfg: &InferenceConfig, settings: &RunSettings, run: u32) -> Result<(f64, f64)> {
    let mut rng = run_rng(settings.master_seed, run, 0);
    let mut pick_rng = run_rng(settings.master_seed, run, 1);
    let mut registry = TaskRegistry::new();
    let target = registry.register_uniform(&ids(&cfg.target))?;
    let previous = cfg.previous.iter().map(|p| registry.register_uniform(&ids(p))).collect::<Result<Vec<_>>>()?;
    let params = UpdateParams::uniform(cfg.history_beta)?;
    let env = Environment::ideal();
    let all_chars = cfg.characteristics();
    let mut next = 0u32;
    let mut fresh = || {
        next += 1;
        NodeId(next - 1)
    };

    let (mut honest_with, mut honest_without, mut total) = (0u32, 0u32, 0u32);
    for _ in 0..cfg.groups {
        let mut trustees = Vec::new();
        let pool = cfg.honest_per_group + cfg.dishonest_per_group;
        for i in 0..pool {
            let mut p = AgentProfile::new(fresh());
            for &c in &all_chars {
                p.competence.insert(CharacteristicId(c), rng.gen_range(cfg.competence.0..=cfg.competence.1));
            }
            let tainted = match cfg.taint {
                _ if i < cfg.honest_per_group => None,
                Taint::Shared => cfg.target.choose(&mut rng).copied(),
                Taint::Unrelated => cfg.unrelated(),
                Taint::None => None,
            };
            if let Some(c) = tainted {
                p.honest = false;
                *p.competence.get_mut(&CharacteristicId(c)).expect("all characteristics drawn") *= 1.0 - cfg.penalty;
            }
            p.is_trustee = true;
            trustees.push(p);
        }
        for _ in 0..cfg.trustors_per_group {
            let x = AgentProfile::new(fresh());
            let mut store = TrustStore::new();
            for y in &trustees {
                for &t in &previous {
                    let mut rec = TrustRecord::with_prior(RecordKind::Service, 0.5);
                    for _ in 0..cfg.history_delegations {
                        let o = sample_outcome(y, &x, registry.get(t), &env, &[], &mut rng);
                        rec = update_estimates(&rec, &o, &params);
                    }
                    store.insert(x.node, y.node, Context::Task(t), rec);
                }
            }
            let mut scored: Vec<(NodeId, f64)> = trustees
                .iter()
                .filter_map(|y| {
                    let tw = hop_value(
                        &store,
                        &registry,
                        x.node,
                        y.node,
                        RecordKind::Service,
                        registry.get(target),
                        HopScope::Task,
                        SelectionStrategy::SuccessOnly,
                    )?;
                    Some((y.node, tw))
                })
                .collect();
            rank_by_score(&mut scored);
            let honest = |n: NodeId| trustees.iter().any(|y| y.node == n && y.honest);
            if let Some(&(best, _)) = scored.first() {
                honest_with += u32::from(honest(best));
            }
            let blind = trustees.choose(&mut pick_rng).expect("nonempty pool").node;
            honest_without += u32::from(honest(blind));
            total += 1;
        }
    }
    let pct = |k: u32| 100.0 * f64::from(k) / f64::from(total);
    Ok((pct(honest_with), pct(honest_without)))
}

pub fn run(cfg: &InferenceConfig, settings: &RunSettings) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let results = run_parallel(settings, |r| simulate(cfg, settings, r))?.into_iter().collect::<Result<Vec<_>>>()?;
    let name = ExperimentKind::Inference.name();
    let per_run: Vec<Vec<(&str, f64)>> = results
        .iter()
        .map(|&(with, without)| {
            vec![
                ("honest_pct_with", with),
                ("honest_pct_without", without),
                ("improvement", with - without),
                ("with_better", f64::from(u8::from(with > without))),
            ]
        })
        .collect();
    let rows = scalar_rows(name, PARAM, &per_run);
    let xs: Vec<f64> = (1..=results.len()).map(|i| i as f64).collect();
    let series = vec![
        Series::new("with inference", xs.clone(), results.iter().map(|r| r.0).collect()),
        Series::new("without inference", xs, results.iter().map(|r| r.1).collect()),
    ];
    Ok(ExperimentOutput {
        rows,
        plots: vec![Plot {
            name: name.into(),
            labels: PlotLabels { title: "Trustors selecting honest trustees".into(), x: "repetition".into(), y: "percent".into() },
            series,
        }],
        traces: Vec::new(),
        parameters: serde_json::to_value(cfg)?,
    })
}
