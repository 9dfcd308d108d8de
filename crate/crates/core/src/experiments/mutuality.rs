//! Trustees refusing trustors that abused their resources before, swept over
//! the acceptance threshold.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ratio, run_parallel, run_rng, scalar_rows, ExperimentKind, ExperimentOutput, Plot, RunSettings};
use crate::delegation::{complete_delegation, find_direct_trustees, DelegationRequest, World};
use crate::domain::{CharacteristicId, Context, RecordKind, TaskId, TaskRegistry, TrustRecord};
use crate::error::{Error, Result};
use crate::graph::{sample_roles, NodeId, SocialGraph};
use crate::report::{format_sig, PlotLabels, Series};
use crate::trust::{SelectionStrategy, TransitivityParams, UpdateParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MutualityConfig {
    pub thetas: Vec<f64>,
    /// Share of nodes acting as trustors, and separately as trustees.
    pub role_fraction: f64,
    /// Every trustor issues one request per round.
    pub rounds: u32,
    /// Earlier uses each trustee remembers per neighbouring trustor.
    pub history_uses: u32,
    pub beta: f64,
}

impl Default for MutualityConfig {
    fn default() -> Self {
        MutualityConfig { thetas: vec![0.0, 0.3, 0.6], role_fraction: 0.4, rounds: 20, history_uses: 5, beta: 0.1 }
    }
}

impl MutualityConfig {
    pub fn validate(&self) -> Result<()> {
        if self.thetas.is_empty() {
            return Err(Error::Empty("thetas"));
        }
        if let Some(t) = self.thetas.iter().find(|t| !(0.0..=1.0).contains(*t)) {
            return Err(Error::param("theta", format!("must lie in [0, 1], got {t}")));
        }
        if self.rounds == 0 {
            return Err(Error::param("rounds", "must be at least 1"));
        }
        UpdateParams::uniform(self.beta)?;
        Ok(())
    }
}

pub fn param(theta: f64) -> String {
    format!("theta={}", format_sig(theta))
}

#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    requests: u64,
    successes: u64,
    unavailable: u64,
    uses: u64,
    abusive: u64,
}

fn setup<'g>(graph: &'g SocialGraph, cfg: &MutualityConfig, settings: &RunSettings, run: u32) -> Result<(World<'g, f64>, TaskId, Vec<NodeId>)> {
    let mut rng = run_rng(settings.master_seed, run, 0);
    let mut registry = TaskRegistry::new();
    let task = registry.register_uniform(&[CharacteristicId(0)])?;
    let mut world = World::new(graph, registry);
    world.config.update = UpdateParams::uniform(cfg.beta)?;
    let roles = sample_roles(graph, cfg.role_fraction, true, &mut rng)?;
    for p in &mut world.profiles {
        p.is_trustor = roles.trustors.contains(&p.node);
        p.is_trustee = roles.trustees.contains(&p.node);
        if p.is_trustor {
            p.integrity = rng.gen();
        }
        if p.is_trustee {
            p.competence.insert(CharacteristicId(0), rng.gen());
        }
    }
    let ctx = Context::Task(task);
    for &x in &roles.trustors {
        for &y in graph.neighbors(x) {
            let trustee = world.profile(y);
            if !trustee.is_trustee {
                continue;
            }
            let s = trustee.competence_for(world.task(task));
            world.store.insert(x, y, ctx, TrustRecord::new(RecordKind::Service, s, 0.5, 0.5, 0.5));
            let integrity = world.profile(x).integrity;
            for _ in 0..cfg.history_uses {
                world.usage.record(y, x, rng.gen::<f64>() >= integrity);
            }
        }
    }
    Ok((world, task, roles.trustors.into_iter().collect()))
}

fn simulate(graph: &SocialGraph, cfg: &MutualityConfig, settings: &RunSettings, run: u32) -> Result<(Vec<Tally>, Vec<serde_json::Value>)> {
    let (base, task, trustors) = setup(graph, cfg, settings, run)?;
    let mut tallies = Vec::with_capacity(cfg.thetas.len());
    let mut traces = Vec::new();
    for &theta in &cfg.thetas {
        let mut world = base.clone();
        for p in world.profiles.iter_mut().filter(|p| p.is_trustee) {
            p.reverse_threshold.insert(task, theta);
        }
        // the same delegation stream for every threshold
        let mut rng = run_rng(settings.master_seed, run, 1);
        let mut t = Tally::default();
        for round in 0..cfg.rounds {
            for &x in &trustors {
                let request = DelegationRequest {
                    trustor: x,
                    task,
                    strategy: SelectionStrategy::SuccessOnly,
                    transitivity: TransitivityParams::default(),
                    epoch: u64::from(round),
                };
                let discovery = find_direct_trustees(&world, &request);
                let trace = complete_delegation(&mut world, &request, discovery, &mut rng);
                t.requests += 1;
                match &trace.outcome {
                    None => t.unavailable += 1,
                    Some(o) => {
                        t.uses += 1;
                        t.successes += u64::from(o.success);
                        t.abusive += u64::from(o.abusive);
                    }
                }
                if settings.trace && run == 0 {
                    let mut v = serde_json::to_value(&trace)?;
                    v["param"] = param(theta).into();
                    traces.push(v);
                }
            }
        }
        tallies.push(t);
    }
    Ok((tallies, traces))
}

pub fn run(graph: &SocialGraph, cfg: &MutualityConfig, settings: &RunSettings) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let results = run_parallel(settings, |r| simulate(graph, cfg, settings, r))?.into_iter().collect::<Result<Vec<_>>>()?;
    let name = ExperimentKind::Mutuality.name();
    let mut rows = Vec::new();
    let mut curves: [Vec<f64>; 3] = Default::default();
    for (k, &theta) in cfg.thetas.iter().enumerate() {
        let per_run: Vec<Vec<(&str, f64)>> = results
            .iter()
            .map(|(tallies, _)| {
                let t = tallies[k];
                vec![
                    ("success_rate", ratio(t.successes, t.requests)),
                    ("unavailable_rate", ratio(t.unavailable, t.requests)),
                    ("abuse_rate", ratio(t.abusive, t.uses)),
                    ("uses", t.uses as f64),
                ]
            })
            .collect();
        let block = scalar_rows(name, &param(theta), &per_run);
        for (i, metric) in ["success_rate", "unavailable_rate", "abuse_rate"].iter().enumerate() {
            curves[i].push(super::aggregate(&block, &param(theta), metric).unwrap_or(0.0));
        }
        rows.extend(block);
    }
    let series = ["success rate", "unavailable rate", "abuse rate"]
        .iter()
        .zip(curves)
        .map(|(label, ys)| Series::new(*label, cfg.thetas.clone(), ys))
        .collect();
    let traces = results.into_iter().next().map(|(_, t)| t).unwrap_or_default();
    Ok(ExperimentOutput {
        rows,
        plots: vec![Plot {
            name: name.into(),
            labels: PlotLabels { title: "Reverse evaluation threshold".into(), x: "theta".into(), y: "rate".into() },
            series,
        }],
        traces,
        parameters: serde_json::to_value(cfg)?,
    })
}
