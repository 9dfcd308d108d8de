//! Selecting trustees by expected net profit versus by success rate alone,
//! plus a variant where some trustees quietly inflate their cost.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{mean, run_parallel, run_rng, ExperimentKind, ExperimentOutput, Plot, RunSettings};
use crate::delegation::{complete_delegation, find_direct_trustees, DelegationRequest, World};
use crate::domain::{CharacteristicId, Context, RecordKind, TaskId, TaskRegistry, TrustRecord};
use crate::error::{Error, Result};
use crate::graph::{sample_roles, NodeId, SocialGraph};
use crate::report::{MetricsRow, PlotLabels, RunLabel, Series};
use crate::trust::{SelectionStrategy, TransitivityParams, UpdateParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackConfig {
    pub tasks: u32,
    pub dishonest_fraction: f64,
    pub cost_multiplier: f64,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig { tasks: 50, dishonest_fraction: 0.3, cost_multiplier: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfitConfig {
    pub iterations: u32,
    pub beta: f64,
    pub role_fraction: f64,
    pub attack: AttackConfig,
}

impl Default for ProfitConfig {
    fn default() -> Self {
        ProfitConfig { iterations: 200, beta: 0.1, role_fraction: 0.4, attack: AttackConfig::default() }
    }
}

impl ProfitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.attack.tasks == 0 {
            return Err(Error::param("iterations", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.attack.dishonest_fraction) {
            return Err(Error::param("dishonest_fraction", "must lie in [0, 1]"));
        }
        if !(self.attack.cost_multiplier >= 1.0) {
            return Err(Error::param("cost_multiplier", "must be at least 1"));
        }
        UpdateParams::uniform(self.beta)?;
        Ok(())
    }
}

pub const STRATEGIES: [SelectionStrategy; 2] = [SelectionStrategy::FullProfit, SelectionStrategy::SuccessOnly];

pub fn param(strategy: SelectionStrategy, iteration: usize) -> String {
    format!("variant=base;strategy={};iter={iteration:04}", strategy.name())
}

pub fn attack_param(strategy: SelectionStrategy, task: usize) -> String {
    format!("variant=attack;strategy={};task={task:04}", strategy.name())
}

/// Trustees draw true (s, g, d, c) uniformly; trustors start out knowing them.
fn setup<'g>(
    graph: &'g SocialGraph,
    cfg: &ProfitConfig,
    settings: &RunSettings,
    run: u32,
    purpose: u64,
    dishonest_fraction: f64,
) -> Result<(World<'g, f64>, TaskId, Vec<NodeId>)> {
    let mut rng = run_rng(settings.master_seed, run, purpose);
    let mut registry = TaskRegistry::new();
    let task = registry.register_uniform(&[CharacteristicId(0)])?;
    let mut world = World::new(graph, registry);
    world.config.update = UpdateParams::uniform(cfg.beta)?;
    world.config.update_recommenders = false;
    let roles = sample_roles(graph, cfg.role_fraction, true, &mut rng)?;
    for p in &mut world.profiles {
        p.is_trustor = roles.trustors.contains(&p.node);
        p.is_trustee = roles.trustees.contains(&p.node);
        if p.is_trustee {
            p.competence.insert(CharacteristicId(0), rng.gen());
            p.gain = rng.gen();
            p.damage = rng.gen();
            p.cost = rng.gen();
            if rng.gen::<f64>() < dishonest_fraction {
                p.honest = false;
                p.cost_multiplier = cfg.attack.cost_multiplier;
            }
        }
    }
    let ctx = Context::Task(task);
    for &x in &roles.trustors {
        for &y in graph.neighbors(x) {
            let p = world.profile(y);
            if p.is_trustee {
                let rec = TrustRecord::new(RecordKind::Service, p.competence_for(world.task(task)), p.gain, p.damage, p.cost);
                world.store.insert(x, y, ctx, rec);
            }
        }
    }
    Ok((world, task, roles.trustors.into_iter().collect()))
}

/// Mean over delegating trustors of `metric`, for each of `steps` rounds.
fn play(
    mut world: World<'_, f64>,
    task: TaskId,
    trustors: &[NodeId],
    strategy: SelectionStrategy,
    steps: u32,
    rng: &mut impl Rng,
    metric: impl Fn(&crate::domain::DelegationOutcome<f64>) -> f64,
) -> Vec<f64> {
    let mut curve = Vec::with_capacity(steps as usize);
    for step in 0..steps {
        let mut values = Vec::with_capacity(trustors.len());
        for &x in trustors {
            let request = DelegationRequest {
                trustor: x,
                task,
                strategy,
                transitivity: TransitivityParams::default(),
                epoch: u64::from(step),
            };
            let discovery = find_direct_trustees(&world, &request);
            if let Some(o) = complete_delegation(&mut world, &request, discovery, rng).outcome {
                values.push(metric(&o));
            }
        }
        curve.push(mean(&values));
    }
    curve
}

struct RunCurves {
    /// `[strategy][iteration]` mean realized net profit.
    profit: Vec<Vec<f64>>,
    /// `[strategy][task]` mean realized cost under the attack.
    cost: Vec<Vec<f64>>,
}

fn simulate(graph: &SocialGraph, cfg: &ProfitConfig, settings: &RunSettings, run: u32) -> Result<RunCurves> {
    let (base, task, trustors) = setup(graph, cfg, settings, run, 0, 0.0)?;
    let (attacked, atask, atrustors) = setup(graph, cfg, settings, run, 2, cfg.attack.dishonest_fraction)?;
    let mut profit = Vec::new();
    let mut cost = Vec::new();
    for s in STRATEGIES {
        let mut rng = run_rng(settings.master_seed, run, 1);
        profit.push(play(base.clone(), task, &trustors, s, cfg.iterations, &mut rng, |o| o.net_profit()));
        let mut rng = run_rng(settings.master_seed, run, 3);
        cost.push(play(attacked.clone(), atask, &atrustors, s, cfg.attack.tasks, &mut rng, |o| o.cost));
    }
    Ok(RunCurves { profit, cost })
}

fn mean_curve(curves: &[RunCurves], pick: impl Fn(&RunCurves) -> &Vec<f64>) -> Vec<f64> {
    let n = curves.first().map_or(0, |c| pick(c).len());
    (0..n).map(|i| mean(&curves.iter().map(|c| pick(c)[i]).collect::<Vec<_>>())).collect()
}

pub fn run(graph: &SocialGraph, cfg: &ProfitConfig, settings: &RunSettings) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let curves = run_parallel(settings, |r| simulate(graph, cfg, settings, r))?.into_iter().collect::<Result<Vec<_>>>()?;
    let name = ExperimentKind::Profit.name();
    let mut rows = Vec::new();
    let mut profit_series = Vec::new();
    let mut cost_series = Vec::new();
    for (k, s) in STRATEGIES.into_iter().enumerate() {
        let ys = mean_curve(&curves, |c| &c.profit[k]);
        for (i, &y) in ys.iter().enumerate() {
            rows.push(MetricsRow::new(name, param(s, i + 1), RunLabel::Aggregate, "net_profit", y));
        }
        profit_series.push(Series::new(s.name(), (1..=ys.len()).map(|i| i as f64).collect(), ys));
        let ys = mean_curve(&curves, |c| &c.cost[k]);
        for (i, &y) in ys.iter().enumerate() {
            rows.push(MetricsRow::new(name, attack_param(s, i + 1), RunLabel::Aggregate, "cost", y));
        }
        cost_series.push(Series::new(s.name(), (1..=ys.len()).map(|i| i as f64).collect(), ys));
    }
    Ok(ExperimentOutput {
        rows,
        plots: vec![
            Plot {
                name: name.into(),
                labels: PlotLabels { title: "Net profit per delegation".into(), x: "iteration".into(), y: "net profit".into() },
                series: profit_series,
            },
            Plot {
                name: format!("{name}_attack_cost"),
                labels: PlotLabels { title: "Cost under cost inflation".into(), x: "task".into(), y: "cost".into() },
                series: cost_series,
            },
        ],
        traces: Vec::new(),
        parameters: serde_json::to_value(cfg)?,
    })
}
