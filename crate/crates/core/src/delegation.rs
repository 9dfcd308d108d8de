//! The delegation protocol over a social graph: discovery, mutual
//! evaluation with retry on rejection, outcome sampling and the updates
//! both sides make afterwards.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{
    AgentProfile, Context, DelegationOutcome, Environment, EnvironmentSchedule, RecordKind, Task, TaskId,
    TaskRegistry, TrustRecord, TrustStore, UsageLog,
};
use crate::graph::{NodeId, SocialGraph};
use crate::scalar::Scalar;
use crate::trust::search::{Found, SearchIndex};
use crate::trust::{
    rank_by_score, reverse_evaluate, update_estimates, update_estimates_env, CharPath, SelectionStrategy,
    TransitivityParams, UpdateParams,
};

#[derive(Debug, Clone, PartialEq)]
pub struct DelegationRequest<T> {
    pub trustor: NodeId,
    pub task: TaskId,
    pub strategy: SelectionStrategy,
    pub transitivity: TransitivityParams<T>,
    /// Index into the environment schedule.
    pub epoch: u64,
}

/// How a world applies the results of a delegation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DelegationConfig<T> {
    pub update: UpdateParams<T>,
    /// Environment-correct realized values before updating.
    pub correct_environment: bool,
    /// Let the trustor compete with candidates using its own service record.
    pub self_execution: bool,
    /// Update the recommendation records along the paths that led to the trustee.
    pub update_recommenders: bool,
    /// Initial value of all four estimates in a fresh record.
    pub prior: T,
}

impl<T: Scalar> Default for DelegationConfig<T> {
    fn default() -> Self {
        DelegationConfig {
            update: UpdateParams::uniform(T::lit(0.1)).expect("valid default"),
            correct_environment: false,
            self_execution: false,
            update_recommenders: true,
            prior: T::lit(0.5),
        }
    }
}

/// Candidates found for one request and how many nodes were asked.
#[derive(Debug, Clone, PartialEq)]
pub struct Discovery<T> {
    pub candidates: Vec<Found<T>>,
    pub interrogated: usize,
}

/// Everything that happened during one delegation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelegationTrace<T> {
    pub trustor: NodeId,
    pub task: TaskId,
    pub epoch: u64,
    pub ranked_candidates: Vec<NodeId>,
    /// Trustees that refused, with the reverse trust they computed.
    pub rejections: Vec<(NodeId, T)>,
    pub chosen: Option<NodeId>,
    pub outcome: Option<DelegationOutcome<T>>,
    pub nodes_interrogated: usize,
    pub paths: Vec<CharPath>,
}

impl<T> DelegationTrace<T> {
    pub fn unavailable(&self) -> bool {
        self.chosen.is_none()
    }
}

/// Mutable state of one simulation run.
#[derive(Debug, Clone)]
pub struct World<'g, T> {
    pub graph: &'g SocialGraph,
    pub registry: TaskRegistry<T>,
    pub store: TrustStore<T>,
    pub profiles: Vec<AgentProfile<T>>,
    pub usage: UsageLog,
    pub environment: EnvironmentSchedule<T>,
    pub config: DelegationConfig<T>,
}

impl<'g, T: Scalar> World<'g, T> {
    /// Every node gets a default profile; the environment is ideal.
    pub fn new(graph: &'g SocialGraph, registry: TaskRegistry<T>) -> Self {
        World {
            graph,
            registry,
            store: TrustStore::new(),
            profiles: graph.nodes().map(AgentProfile::new).collect(),
            usage: UsageLog::default(),
            environment: EnvironmentSchedule::constant(Environment::ideal()),
            config: DelegationConfig::default(),
        }
    }

    pub fn profile(&self, node: NodeId) -> &AgentProfile<T> {
        &self.profiles[node.index()]
    }

    pub fn task(&self, id: TaskId) -> &Task<T> {
        self.registry.get(id)
    }

    /// Index for searches from `trustor` against the current store.
    pub fn index_for(&self, request: &DelegationRequest<T>) -> SearchIndex<T> {
        let dist = self.graph.bfs_distances(request.trustor);
        SearchIndex::build(
            self.graph,
            &self.store,
            &self.registry,
            self.task(request.task),
            &request.transitivity,
            request.strategy,
            Some(&dist),
        )
    }
}

/// Candidates for `request` using a prebuilt index.
pub fn discover_with<T: Scalar>(world: &World<'_, T>, index: &SearchIndex<T>, trustor: NodeId) -> Discovery<T> {
    let candidates = index.search(trustor, |n| world.profiles.get(n.index()).is_some_and(|p| p.is_trustee));
    let ids: Vec<NodeId> = candidates.iter().map(|f| f.trustee).collect();
    let interrogated = index.interrogated(world.graph, trustor, &ids);
    Discovery { candidates, interrogated }
}

/// Breadth-first discovery of trustees reachable by a non-blocked chain.
pub fn find_potential_trustees<T: Scalar>(world: &World<'_, T>, request: &DelegationRequest<T>) -> Discovery<T> {
    discover_with(world, &world.index_for(request), request.trustor)
}

/// Candidates among the trustor's own trustee neighbours it holds an
/// exact-task service record about. Only those neighbours are asked. The
/// candidates carry no paths; the direct edge is implied.
pub fn find_direct_trustees<T: Scalar>(world: &World<'_, T>, request: &DelegationRequest<T>) -> Discovery<T> {
    let trustor = request.trustor;
    let ctx = Context::Task(request.task);
    let candidates: Vec<Found<T>> = world
        .store
        .held_by(trustor)
        .filter(|(k, _)| k.kind == RecordKind::Service && k.context == ctx && k.subject != trustor)
        .filter(|(k, _)| world.profile(k.subject).is_trustee && world.graph.has_edge(trustor, k.subject))
        .map(|(k, rec)| Found { trustee: k.subject, value: request.strategy.view(rec), paths: Vec::new() })
        .collect();
    let interrogated = candidates.len();
    Discovery { candidates, interrogated }
}

/// Draws the result of `trustee` performing `task` for `trustor`. Success
/// probability is competence times the worst environment value involved;
/// gain, damage and cost are scaled by the same value. The abuse draw uses
/// the trustor's integrity.
pub fn sample_outcome<T: Scalar, R: Rng + ?Sized>(
    trustee: &AgentProfile<T>,
    trustor: &AgentProfile<T>,
    task: &Task<T>,
    env: &Environment<T>,
    intermediates: &[NodeId],
    rng: &mut R,
) -> DelegationOutcome<T> {
    let snapshot = env.snapshot(trustor.node, trustee.node, intermediates);
    let e = snapshot.min();
    let p = (trustee.competence_for(task) * e).as_f64();
    let success = rng.gen::<f64>() < p;
    let abusive = rng.gen::<f64>() >= trustor.integrity.as_f64();
    let cost = (trustee.cost * trustee.cost_multiplier).unit_clamp() * e;
    DelegationOutcome::new(success, trustee.gain * e, trustee.damage * e, cost, abusive, snapshot)
}

fn intermediates(paths: &[CharPath]) -> Vec<NodeId> {
    let set: BTreeSet<NodeId> =
        paths.iter().flat_map(|p| p.path.iter().skip(1).take(p.path.len().saturating_sub(2)).copied()).collect();
    set.into_iter().collect()
}

/// Runs the full protocol for one request and applies the updates.
pub fn run_delegation<T: Scalar, R: Rng + ?Sized>(
    world: &mut World<'_, T>,
    request: &DelegationRequest<T>,
    rng: &mut R,
) -> DelegationTrace<T> {
    let discovery = find_potential_trustees(world, request);
    complete_delegation(world, request, discovery, rng)
}

/// Ranks the discovered candidates, walks the ranking until a trustee
/// accepts, samples the outcome and updates both sides.
pub fn complete_delegation<T: Scalar, R: Rng + ?Sized>(
    world: &mut World<'_, T>,
    request: &DelegationRequest<T>,
    discovery: Discovery<T>,
    rng: &mut R,
) -> DelegationTrace<T> {
    let trustor = request.trustor;
    let task_ctx = Context::Task(request.task);
    let mut scored: Vec<(NodeId, T)> = discovery.candidates.iter().map(|f| (f.trustee, f.value)).collect();
    let self_record = world
        .config
        .self_execution
        .then(|| world.store.get(trustor, trustor, RecordKind::Service, task_ctx).copied())
        .flatten();
    if let Some(r) = &self_record {
        scored.push((trustor, request.strategy.view(r)));
    }
    rank_by_score(&mut scored);
    if let Some(pos) = scored.iter().position(|(n, _)| *n == trustor) {
        // a tie with the best candidate keeps the task at home
        if scored[pos].1 >= scored[0].1 {
            let me = scored.remove(pos);
            scored.insert(0, me);
        }
    }
    let ranked: Vec<NodeId> = scored.iter().map(|(n, _)| *n).collect();

    let mut trace = DelegationTrace {
        trustor,
        task: request.task,
        epoch: request.epoch,
        ranked_candidates: ranked.clone(),
        rejections: Vec::new(),
        chosen: None,
        outcome: None,
        nodes_interrogated: discovery.interrogated,
        paths: Vec::new(),
    };

    let mut chosen = None;
    for &c in &ranked {
        if c == trustor {
            chosen = Some(c);
            break;
        }
        let decision = reverse_evaluate(world.profile(c), trustor, &world.usage, request.task);
        if decision.accepted {
            chosen = Some(c);
            break;
        }
        trace.rejections.push((c, decision.reverse_trust));
    }
    let Some(trustee) = chosen else {
        return trace;
    };
    let mut paths = discovery.candidates.iter().find(|f| f.trustee == trustee).map(|f| f.paths.clone()).unwrap_or_default();
    if paths.is_empty() && trustee != trustor {
        paths.push(CharPath { characteristic: None, path: vec![trustor, trustee] });
    }
    let via = intermediates(&paths);

    let env = world.environment.at(request.epoch);
    let outcome =
        sample_outcome(world.profile(trustee), world.profile(trustor), world.task(request.task), env, &via, rng);

    let cfg = &world.config;
    let apply = |rec: &TrustRecord<T>| {
        if cfg.correct_environment {
            update_estimates_env(rec, &outcome, &cfg.update, &outcome.env)
        } else {
            update_estimates(rec, &outcome, &cfg.update)
        }
    };
    let mut updates = Vec::new();
    let current = world
        .store
        .get(trustor, trustee, RecordKind::Service, task_ctx)
        .copied()
        .unwrap_or_else(|| TrustRecord::with_prior(RecordKind::Service, cfg.prior));
    updates.push((trustor, trustee, apply(&current)));
    if cfg.update_recommenders {
        let hops: BTreeSet<(NodeId, NodeId)> = paths
            .iter()
            .flat_map(|p| p.path.windows(2).take(p.path.len().saturating_sub(2)).map(|w| (w[0], w[1])))
            .collect();
        for (x, y) in hops {
            let current = world
                .store
                .get(x, y, RecordKind::Recommendation, task_ctx)
                .copied()
                .unwrap_or_else(|| TrustRecord::with_prior(RecordKind::Recommendation, cfg.prior));
            updates.push((x, y, apply(&current)));
        }
    }
    for (x, y, rec) in updates {
        world.store.insert(x, y, task_ctx, rec);
    }
    if trustee != trustor {
        world.usage.record(trustee, trustor, outcome.abusive);
    }

    trace.chosen = Some(trustee);
    trace.outcome = Some(outcome);
    trace.paths = paths;
    trace
}
