//! Trust carried along recommendation paths in a network where every node
//! has a track record on two tasks, compared across the three methods.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{mean, ratio, run_parallel, run_rng, scalar_rows, ExperimentKind, ExperimentOutput, Plot, RunSettings};
use crate::delegation::{complete_delegation, discover_with, DelegationRequest, World};
use crate::domain::{CharacteristicId, Context, RecordKind, TaskId, TaskRegistry, TrustRecord};
use crate::error::{Error, Result};
use crate::graph::{sample_roles, NodeId, SocialGraph};
use crate::report::{PlotLabels, Series};
use crate::trust::search::SearchIndex;
use crate::trust::{Method, SelectionStrategy, TransitivityParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransitivityConfig {
    pub characteristic_counts: Vec<u16>,
    pub methods: Vec<Method>,
    pub role_fraction: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub max_hops: usize,
    /// Tasks each node has a track record on.
    pub tasks_per_node: usize,
    /// Tasks have between 1 and this many characteristics.
    pub max_task_size: usize,
    /// Chance that a node has worked with a given neighbour and so holds records about it.
    pub experience_probability: f64,
    /// Draw node tasks from the graph's binary features instead of at random.
    pub use_features: bool,
}

impl Default for TransitivityConfig {
    fn default() -> Self {
        TransitivityConfig {
            characteristic_counts: vec![4, 5, 6, 7],
            methods: Method::ALL.to_vec(),
            role_fraction: 0.4,
            omega1: 0.6,
            omega2: 0.6,
            max_hops: 3,
            tasks_per_node: 2,
            max_task_size: 2,
            experience_probability: 0.25,
            use_features: false,
        }
    }
}

impl TransitivityConfig {
    pub fn validate(&self, graph: &SocialGraph) -> Result<()> {
        if self.characteristic_counts.is_empty() {
            return Err(Error::Empty("characteristic_counts"));
        }
        if self.methods.is_empty() {
            return Err(Error::Empty("methods"));
        }
        self.params(Method::Traditional)?;
        if self.max_task_size == 0 || self.tasks_per_node == 0 {
            return Err(Error::param("tasks_per_node", "tasks per node and task size must be at least 1"));
        }
        for &k in &self.characteristic_counts {
            if usize::from(k) < self.max_task_size {
                return Err(Error::param("characteristics", format!("{k} characteristics cannot form tasks of size {}", self.max_task_size)));
            }
            if self.use_features && usize::from(k) > graph.feature_len() {
                return Err(Error::param("characteristics", format!("{k} characteristics but the graph has {} features", graph.feature_len())));
            }
        }
        if !(0.0..=1.0).contains(&self.experience_probability) {
            return Err(Error::param("experience_probability", "must lie in [0, 1]"));
        }
        Ok(())
    }

    fn params(&self, method: Method) -> Result<TransitivityParams<f64>> {
        TransitivityParams::new(self.omega1, self.omega2, self.max_hops, method)
    }
}

pub fn param(characteristics: u16, method: Method) -> String {
    format!("chars={characteristics};method={}", method.name())
}

/// Per-run counters for one (characteristic count, method) point.
#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    requests: u64,
    successes: u64,
    unavailable: u64,
    candidates: u64,
    interrogated: u64,
}

fn random_chars<R: Rng>(k: u16, max_size: usize, rng: &mut R) -> Vec<CharacteristicId> {
    let size = rng.gen_range(1..=max_size);
    let mut chars: Vec<_> = sample(rng, usize::from(k), size).into_iter().map(|c| CharacteristicId(c as u16)).collect();
    chars.sort();
    chars
}

/// Characteristics from the node's own set features, padded at random when it has too few.
fn feature_chars<R: Rng>(graph: &SocialGraph, v: NodeId, k: u16, max_size: usize, rng: &mut R) -> Vec<CharacteristicId> {
    let set: Vec<u16> = graph
        .features(v)
        .map(|f| (0..k).filter(|&i| f[usize::from(i)]).collect())
        .unwrap_or_default();
    let size = rng.gen_range(1..=max_size);
    if set.len() < size {
        return random_chars(k, max_size, rng);
    }
    let mut chars: Vec<_> = sample(rng, set.len(), size).into_iter().map(|i| CharacteristicId(set[i])).collect();
    chars.sort();
    chars
}

struct Instance<'g> {
    world: World<'g, f64>,
    requests: Vec<(NodeId, TaskId)>,
}

/// Roles, competences, node tasks, pre-seeded records and one request per trustor.
fn setup<'g>(graph: &'g SocialGraph, cfg: &TransitivityConfig, k: u16, settings: &RunSettings, run: u32) -> Result<Instance<'g>> {
    let mut rng = run_rng(settings.master_seed, run, 100 + u64::from(k));
    let mut registry = TaskRegistry::new();
    let roles = sample_roles(graph, cfg.role_fraction, true, &mut rng)?;
    let n = graph.node_count();

    let mut node_tasks: Vec<Vec<TaskId>> = Vec::with_capacity(n);
    for v in graph.nodes() {
        let mut tasks = Vec::with_capacity(cfg.tasks_per_node);
        let mut attempts = 0;
        while tasks.len() < cfg.tasks_per_node && attempts < 64 {
            attempts += 1;
            let chars = if cfg.use_features {
                feature_chars(graph, v, k, cfg.max_task_size, &mut rng)
            } else {
                random_chars(k, cfg.max_task_size, &mut rng)
            };
            let t = registry.register_uniform(&chars)?;
            if !tasks.contains(&t) {
                tasks.push(t);
            }
        }
        node_tasks.push(tasks);
    }
    let competence: Vec<Vec<f64>> = (0..n).map(|_| (0..k).map(|_| rng.gen()).collect()).collect();
    let reliability: Vec<f64> = (0..n).map(|_| rng.gen()).collect();

    let mut world = World::new(graph, registry);
    world.config.update_recommenders = false;
    for p in &mut world.profiles {
        p.is_trustor = roles.trustors.contains(&p.node);
        p.is_trustee = roles.trustees.contains(&p.node);
        for (c, &x) in competence[p.node.index()].iter().enumerate() {
            p.competence.insert(CharacteristicId(c as u16), x);
        }
    }

    // a node knows a neighbour's record on the neighbour's own tasks
    for x in graph.nodes() {
        for &y in graph.neighbors(x) {
            if !rng.gen_bool(cfg.experience_probability) {
                continue;
            }
            for &t in &node_tasks[y.index()] {
                let ctx = Context::Task(t);
                let rel = reliability[y.index()];
                world.store.insert(x, y, ctx, TrustRecord::new(RecordKind::Recommendation, rel, 0.5, 0.5, 0.5));
                if world.profile(y).is_trustee {
                    let s = world.profile(y).competence_for(world.task(t));
                    world.store.insert(x, y, ctx, TrustRecord::new(RecordKind::Service, s, 0.5, 0.5, 0.5));
                }
            }
        }
    }

    let mut requests = Vec::with_capacity(roles.trustors.len());
    for &x in &roles.trustors {
        let chars = random_chars(k, cfg.max_task_size, &mut rng);
        requests.push((x, world.registry.register_uniform(&chars)?));
    }
    Ok(Instance { world, requests })
}

fn simulate(
    graph: &SocialGraph,
    cfg: &TransitivityConfig,
    settings: &RunSettings,
    run: u32,
) -> Result<(Vec<Tally>, Vec<serde_json::Value>)> {
    let mut tallies = Vec::with_capacity(cfg.characteristic_counts.len() * cfg.methods.len());
    let mut traces = Vec::new();
    for &k in &cfg.characteristic_counts {
        let inst = setup(graph, cfg, k, settings, run)?;
        for &method in &cfg.methods {
            let params = cfg.params(method)?;
            // every search sees the store as it was before this batch of requests
            let mut indexes: BTreeMap<TaskId, SearchIndex<f64>> = BTreeMap::new();
            for &(_, t) in &inst.requests {
                indexes.entry(t).or_insert_with(|| {
                    let w = &inst.world;
                    SearchIndex::build(graph, &w.store, &w.registry, w.task(t), &params, SelectionStrategy::SuccessOnly, None)
                });
            }
            let mut world = inst.world.clone();
            let mut t = Tally::default();
            for &(x, task) in &inst.requests {
                let request =
                    DelegationRequest { trustor: x, task, strategy: SelectionStrategy::SuccessOnly, transitivity: params, epoch: 0 };
                let discovery = discover_with(&world, &indexes[&task], x);
                t.requests += 1;
                t.candidates += discovery.candidates.len() as u64;
                t.interrogated += discovery.interrogated as u64;
                // the same outcome draw for this trustor under every method
                let purpose = (u64::from(k) << 40) | (1 << 32) | u64::from(x.0);
                let mut rng = run_rng(settings.master_seed, run, purpose);
                let trace = complete_delegation(&mut world, &request, discovery, &mut rng);
                match &trace.outcome {
                    None => t.unavailable += 1,
                    Some(o) => t.successes += u64::from(o.success),
                }
                if settings.trace && run == 0 {
                    let mut v = serde_json::to_value(&trace)?;
                    v["param"] = param(k, method).into();
                    traces.push(v);
                }
            }
            tallies.push(t);
        }
    }
    Ok((tallies, traces))
}

const METRICS: [(&str, &str); 4] = [
    ("success_rate", "Success rate"),
    ("unavailable_rate", "Unavailable rate"),
    ("potential_trustees", "Potential trustees"),
    ("interrogated", "Interrogated nodes"),
];

pub fn run(graph: &SocialGraph, cfg: &TransitivityConfig, settings: &RunSettings) -> Result<ExperimentOutput> {
    cfg.validate(graph)?;
    let results = run_parallel(settings, |r| simulate(graph, cfg, settings, r))?.into_iter().collect::<Result<Vec<_>>>()?;
    let name = ExperimentKind::Transitivity.name();
    let mut rows = Vec::new();
    // [metric][method] -> curve over characteristic counts
    let mut curves = vec![vec![Vec::new(); cfg.methods.len()]; METRICS.len()];
    let mut point = 0;
    for &k in &cfg.characteristic_counts {
        for (m, &method) in cfg.methods.iter().enumerate() {
            let per_run: Vec<Vec<(&str, f64)>> = results
                .iter()
                .map(|(tallies, _)| {
                    let t = tallies[point];
                    let per_request = |x: u64| ratio(x, t.requests);
                    vec![
                        ("success_rate", per_request(t.successes)),
                        ("unavailable_rate", per_request(t.unavailable)),
                        ("potential_trustees", per_request(t.candidates)),
                        ("interrogated", per_request(t.interrogated)),
                    ]
                })
                .collect();
            for (i, (metric, _)) in METRICS.iter().enumerate() {
                curves[i][m].push(mean(&per_run.iter().map(|r| r[i].1).collect::<Vec<_>>()));
                debug_assert_eq!(per_run.first().map(|r| r[i].0), Some(*metric));
            }
            rows.extend(scalar_rows(name, &param(k, method), &per_run));
            point += 1;
        }
    }
    let xs: Vec<f64> = cfg.characteristic_counts.iter().map(|&k| f64::from(k)).collect();
    let plots = METRICS
        .iter()
        .zip(curves)
        .map(|(&(metric, title), per_method)| Plot {
            name: format!("{name}_{metric}"),
            labels: PlotLabels { title: title.into(), x: "number of characteristics".into(), y: metric.replace('_', " ") },
            series: cfg.methods.iter().zip(per_method).map(|(m, ys)| Series::new(m.name(), xs.clone(), ys)).collect(),
        })
        .collect();
    let traces = results.into_iter().next().map(|(_, t)| t).unwrap_or_default();
    Ok(ExperimentOutput { rows, plots, traces, parameters: serde_json::to_value(cfg)? })
}
