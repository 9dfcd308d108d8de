//! Shared by the integration tests and the acceptance runner: random trust
//! instances, a brute-force candidate oracle, and randomized property checks
//! that report failures as strings.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use siot_trust::domain::{
    make_task, CharacteristicId, Context, DelegationOutcome, EnvSnapshot, Environment, RecordKind, Task, TaskId, TaskRegistry,
    TrustRecord, TrustStore,
};
use siot_trust::trust::search::SearchIndex;
use siot_trust::trust::{
    env_correct, infer_characteristic_tw, infer_task_tw, transit_pair, update_estimates, update_estimates_env,
    update_observed, Experience, Method, Observation, SelectionStrategy, TransitivityParams, UpdateParams,
};
use siot_trust::{NodeId, SocialGraph};

pub type Check = Result<(), String>;

pub struct Instance {
    pub graph: SocialGraph,
    pub registry: TaskRegistry<f64>,
    pub store: TrustStore<f64>,
    pub target: TaskId,
    pub trustee: Vec<bool>,
    pub omega1: f64,
    pub omega2: f64,
    pub max_hops: usize,
    pub view: SelectionStrategy,
}

impl Instance {
    pub fn params(&self, method: Method) -> TransitivityParams<f64> {
        TransitivityParams::new(self.omega1, self.omega2, self.max_hops, method).unwrap()
    }

    pub fn task(&self) -> &Task<f64> {
        self.registry.get(self.target)
    }
}

const CHARS: u16 = 5;

/// A graph of at most 12 nodes with random records, some about non-neighbours.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=12usize);
    let p = rng.gen_range(0.2..0.7);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    let graph = SocialGraph::from_edges(n, edges).unwrap();

    let mut registry = TaskRegistry::new();
    let mut tasks = Vec::new();
    while tasks.len() < 4 {
        let mut chars: Vec<CharacteristicId> = (0..CHARS).filter(|_| rng.gen_bool(0.4)).map(CharacteristicId).collect();
        if chars.is_empty() {
            chars.push(CharacteristicId(rng.gen_range(0..CHARS)));
        }
        let parts: Vec<(CharacteristicId, f64)> = chars.iter().map(|&c| (c, rng.gen_range(0.1..1.0))).collect();
        if let Ok(id) = registry.register(&parts) {
            tasks.push(id);
        }
    }
    let target = tasks[0];

    let mut store = TrustStore::new();
    for u in 0..n {
        for v in 0..n {
            if u == v || !rng.gen_bool(0.6) {
                continue;
            }
            for _ in 0..rng.gen_range(1..=3) {
                let kind = if rng.gen_bool(0.5) { RecordKind::Service } else { RecordKind::Recommendation };
                let context = if rng.gen_bool(0.25) {
                    Context::Characteristic(CharacteristicId(rng.gen_range(0..CHARS)))
                } else {
                    Context::Task(tasks[rng.gen_range(0..tasks.len())])
                };
                let rec = TrustRecord::new(kind, rng.gen(), rng.gen(), rng.gen(), rng.gen());
                store.insert(NodeId(u as u32), NodeId(v as u32), context, rec);
            }
        }
    }
    let gates = [0.0, 0.3, 0.5, 0.6];
    Instance {
        graph,
        registry,
        store,
        target,
        trustee: (0..n).map(|_| rng.gen_bool(0.6)).collect(),
        omega1: gates[rng.gen_range(0..gates.len())],
        omega2: gates[rng.gen_range(0..gates.len())],
        max_hops: rng.gen_range(1..=4),
        view: if rng.gen_bool(0.7) { SelectionStrategy::SuccessOnly } else { SelectionStrategy::FullProfit },
    }
}

/// Hop trust straight from the observer's history: the exact record, then
/// whole-task inference, then (aggressive only) inference for `c` alone.
fn hop(inst: &Instance, u: NodeId, v: NodeId, kind: RecordKind, method: Method, c: Option<CharacteristicId>) -> Option<f64> {
    let target = inst.task();
    let mut exact = None;
    let mut history = Vec::new();
    for (ctx, rec) in inst.store.history(u, v, kind) {
        let tw = inst.view.view(rec);
        match ctx {
            Context::Task(id) => {
                if id == inst.target {
                    exact = Some(tw);
                }
                history.push((Experience::Task(inst.registry.get(id)), tw));
            }
            Context::Characteristic(ch) => history.push((Experience::Characteristic(ch), tw)),
        }
    }
    match method {
        Method::Traditional => exact,
        Method::Conservative => exact.or_else(|| infer_task_tw(&history, target)),
        Method::Aggressive => exact
            .or_else(|| infer_task_tw(&history, target))
            .or_else(|| infer_characteristic_tw(&history, c.expect("aggressive hops name a characteristic"))),
    }
}

fn path_value(inst: &Instance, path: &[NodeId], method: Method, c: Option<CharacteristicId>) -> Option<f64> {
    let k = path.len() - 1;
    let mut tws = Vec::with_capacity(k);
    for (i, w) in path.windows(2).enumerate() {
        let kind = if i + 1 == k { RecordKind::Service } else { RecordKind::Recommendation };
        tws.push(hop(inst, w[0], w[1], kind, method, c)?);
    }
    if k > 1 && (tws[..k - 1].iter().any(|&r| r < inst.omega1) || tws[k - 1] < inst.omega2) {
        return None;
    }
    Some(match method {
        Method::Traditional => tws[1..].iter().fold(tws[0], |a, &t| a * t),
        _ => tws[1..].iter().fold(tws[0], |a, &t| a * t + (1.0 - a) * (1.0 - t)),
    })
}

/// Every simple path from `from` with 1..=max_hops edges.
pub fn simple_paths(graph: &SocialGraph, from: NodeId, max_hops: usize) -> Vec<Vec<NodeId>> {
    fn go(graph: &SocialGraph, path: &mut Vec<NodeId>, max_hops: usize, out: &mut Vec<Vec<NodeId>>) {
        let u = *path.last().unwrap();
        for &v in graph.neighbors(u) {
            if path.contains(&v) {
                continue;
            }
            path.push(v);
            out.push(path.clone());
            if path.len() <= max_hops {
                go(graph, path, max_hops, out);
            }
            path.pop();
        }
    }
    let mut out = Vec::new();
    go(graph, &mut vec![from], max_hops, &mut out);
    out
}

/// Candidate trustees of `trustor` with their values, by enumerating every path.
pub fn oracle(inst: &Instance, trustor: NodeId, method: Method) -> BTreeMap<NodeId, f64> {
    let paths = simple_paths(&inst.graph, trustor, inst.max_hops);
    let layers: Vec<(Option<CharacteristicId>, f64)> = match method {
        Method::Aggressive => inst.task().parts().iter().map(|&(c, w)| (Some(c), w)).collect(),
        _ => vec![(None, 1.0)],
    };
    let mut best: Vec<BTreeMap<NodeId, f64>> = vec![BTreeMap::new(); layers.len()];
    for p in &paths {
        let end = *p.last().unwrap();
        if !inst.trustee[end.index()] {
            continue;
        }
        for (i, &(c, _)) in layers.iter().enumerate() {
            if let Some(v) = path_value(inst, p, method, c) {
                let slot = best[i].entry(end).or_insert(v);
                *slot = slot.max(v);
            }
        }
    }
    let mut out = BTreeMap::new();
    'node: for &end in best[0].keys() {
        let mut total = 0.0;
        for (i, &(_, w)) in layers.iter().enumerate() {
            let Some(v) = best[i].get(&end) else { continue 'node };
            total += w * v;
        }
        out.insert(end, total);
    }
    out
}

fn searched(inst: &Instance, trustor: NodeId, method: Method) -> Result<BTreeMap<NodeId, f64>, String> {
    let index = SearchIndex::build(&inst.graph, &inst.store, &inst.registry, inst.task(), &inst.params(method), inst.view, None);
    let found = index.search(trustor, |v| inst.trustee[v.index()]);
    let mut out = BTreeMap::new();
    for f in found {
        // every reported path must be a real path that carries the reported value
        for cp in &f.paths {
            let ok = cp.path.first() == Some(&trustor)
                && cp.path.last() == Some(&f.trustee)
                && cp.path.len() <= inst.max_hops + 1
                && cp.path.windows(2).all(|w| inst.graph.has_edge(w[0], w[1]));
            if !ok {
                return Err(format!("{method:?}: bad path {:?} for {:?}", cp.path, f.trustee));
            }
        }
        if method != Method::Aggressive {
            let v = path_value(inst, &f.paths[0].path, method, None);
            if v != Some(f.value) {
                return Err(format!("{method:?}: path {:?} carries {v:?}, reported {}", f.paths[0].path, f.value));
            }
        }
        out.insert(f.trustee, f.value);
    }
    Ok(out)
}

/// Index search against exhaustive enumeration on `count` random instances,
/// for every trustor and method, plus candidate-set nesting across methods.
pub fn check_search_oracle(count: u64) -> Check {
    // candidates per method, and those only reachable through recommenders
    let mut found = [0usize; 3];
    let mut remote = [0usize; 3];
    for seed in 0..count {
        let inst = random_instance(seed);
        for trustor in inst.graph.nodes() {
            let mut sets = Vec::new();
            for method in [Method::Traditional, Method::Conservative, Method::Aggressive] {
                let expected = oracle(&inst, trustor, method);
                let got = searched(&inst, trustor, method).map_err(|e| format!("instance {seed}: {e}"))?;
                if got != expected {
                    return Err(format!(
                        "instance {seed}, trustor {trustor:?}, {method:?}: search {got:?} vs oracle {expected:?}"
                    ));
                }
                let i = sets.len();
                found[i] += got.len();
                remote[i] += got.keys().filter(|&&v| !inst.graph.has_edge(trustor, v)).count();
                sets.push(got.into_keys().collect::<Vec<_>>());
            }
            let nested = |a: &[NodeId], b: &[NodeId]| a.iter().all(|x| b.contains(x));
            if !nested(&sets[0], &sets[1]) || !nested(&sets[1], &sets[2]) {
                return Err(format!("instance {seed}, trustor {trustor:?}: candidate sets do not nest {sets:?}"));
            }
        }
    }
    if found.iter().chain(&remote).any(|&k| k == 0) {
        return Err(format!("instances too sparse to exercise the search: {found:?} found, {remote:?} remote"));
    }
    Ok(())
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen()
}

/// Repeated updates toward a constant success rate close the gap by exactly β per step.
pub fn check_geometric_convergence(samples: u32, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let beta = rng.gen_range(0.0..1.0);
        let s0 = unit(&mut rng);
        let c = unit(&mut rng);
        let params = UpdateParams::uniform(beta).map_err(|e| e.to_string())?;
        let mut rec = TrustRecord::new(RecordKind::Service, s0, 0.5, 0.5, 0.5);
        for n in 1..=60 {
            let obs = Observation { success_rate: c, gain: None, damage: None, cost: 0.5 };
            rec = update_observed(&rec, &obs, &params);
            let expected = beta.powi(n) * (s0 - c).abs();
            if ((rec.s_hat - c).abs() - expected).abs() > 1e-12 {
                return Err(format!("beta {beta} s0 {s0} c {c}: step {n} gap {} vs {expected}", (rec.s_hat - c).abs()));
            }
        }
    }
    Ok(())
}

pub fn check_transit_pair(samples: u32, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let (a, t) = (unit(&mut rng), unit(&mut rng));
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12;
        let f = transit_pair(a, t);
        let ok = close(transit_pair(1.0, t), t)
            && close(transit_pair(0.0, t), 1.0 - t)
            && close(transit_pair(0.5, t), 0.5)
            && close(f, transit_pair(t, a))
            && (0.0..=1.0).contains(&f);
        if !ok {
            return Err(format!("transit_pair identities fail at ({a}, {t})"));
        }
    }
    Ok(())
}

fn random_task(rng: &mut ChaCha8Rng, id: u32) -> Task<f64> {
    let mut parts = Vec::new();
    for c in 0..8u16 {
        if rng.gen_bool(0.4) {
            parts.push((CharacteristicId(c), rng.gen_range(0.05..1.0)));
        }
    }
    if parts.is_empty() {
        parts.push((CharacteristicId(rng.gen_range(0..8)), 1.0));
    }
    make_task(TaskId(id), &parts).unwrap()
}

/// Equal trust everywhere infers that same trust; one uncovered characteristic blocks inference.
pub fn check_inference(samples: u32, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let target = random_task(&mut rng, 0);
        let tw = unit(&mut rng);
        let mut known: Vec<Task<f64>> = (1..=rng.gen_range(1..5)).map(|i| random_task(&mut rng, i)).collect();
        // cover the target with single-characteristic tasks so the fixed point applies
        for (i, (c, _)) in target.parts().iter().enumerate() {
            known.push(make_task(TaskId(100 + i as u32), &[(*c, 1.0)]).unwrap());
        }
        let history: Vec<(Experience<'_, f64>, f64)> = known.iter().map(|t| (Experience::Task(t), tw)).collect();
        match infer_task_tw(&history, &target) {
            Some(v) if (v - tw).abs() <= 1e-12 => {}
            other => return Err(format!("fixed point: expected {tw}, got {other:?}")),
        }

        let missing = target.parts()[rng.gen_range(0..target.parts().len())].0;
        let blocked: Vec<(Experience<'_, f64>, f64)> = known
            .iter()
            .filter(|t| !t.contains(missing))
            .map(|t| (Experience::Task(t), unit(&mut rng)))
            .chain([(Experience::Characteristic(CharacteristicId(missing.0 + 100)), 0.9)])
            .collect();
        if let Some(v) = infer_task_tw(&blocked, &target) {
            return Err(format!("characteristic {missing:?} uncovered but inferred {v}"));
        }
    }
    Ok(())
}

/// With every environment value at 1 the corrected update is the plain update, bit for bit.
pub fn check_env_reduction(samples: u32, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let env = Environment::ideal();
    for _ in 0..samples {
        let rec = TrustRecord::new(RecordKind::Service, unit(&mut rng), unit(&mut rng), unit(&mut rng), unit(&mut rng));
        let o = DelegationOutcome::new(rng.gen_bool(0.5), unit(&mut rng), unit(&mut rng), unit(&mut rng), false, EnvSnapshot::ideal());
        let params = UpdateParams::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0))
            .map_err(|e| e.to_string())?;
        let plain = update_estimates(&rec, &o, &params);
        let corrected = update_estimates_env(&rec, &o, &params, &EnvSnapshot::ideal());
        let bits = |r: &TrustRecord<f64>| [r.s_hat, r.g_hat, r.d_hat, r.c_hat].map(f64::to_bits);
        if bits(&plain) != bits(&corrected) || plain.interaction_count != corrected.interaction_count {
            return Err(format!("ideal environment changed the update: {plain:?} vs {corrected:?}"));
        }
        let x = unit(&mut rng);
        let path = [NodeId(rng.gen_range(0..50))];
        if env_correct(&env, NodeId(0), NodeId(1), &path, x).to_bits() != x.to_bits() {
            return Err(format!("env_correct moved {x} under an ideal environment"));
        }
    }
    Ok(())
}
