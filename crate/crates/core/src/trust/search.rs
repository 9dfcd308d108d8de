//! Candidate discovery over the social graph: best gated paths from a trustor
//! to every reachable trustee, and the set of nodes the request touches.

use std::cmp::Ordering;
use std::collections::VecDeque;

use crate::domain::{CharacteristicId, RecordKind, Task, TaskRegistry, TrustStore};
use crate::graph::{NodeId, SocialGraph};
use crate::scalar::Scalar;

use super::transit::{transit_pair, CharPath, HopEstimates, HopScope};
use super::{Method, SelectionStrategy, TransitivityParams};

/// Hop values along social edges, for one hop scope. Recommendation edges
/// are stored only when they pass the `omega1` gate.
#[derive(Debug, Clone)]
struct HopGraph<T> {
    rec: Vec<Vec<(NodeId, T)>>,
    svc: Vec<Vec<(NodeId, T)>>,
}

impl<T> HopGraph<T> {
    fn new(n: usize) -> Self {
        HopGraph { rec: (0..n).map(|_| Vec::new()).collect(), svc: (0..n).map(|_| Vec::new()).collect() }
    }
}

/// A trustee reachable by a non-blocked chain, with the value that chain
/// carries and the path(s) used.
#[derive(Debug, Clone, PartialEq)]
pub struct Found<T> {
    pub trustee: NodeId,
    pub value: T,
    pub paths: Vec<CharPath>,
}

#[derive(Debug, Clone)]
struct Best<T> {
    value: T,
    path: Vec<NodeId>,
}

/// Higher value, then fewer hops, then the lexicographically smaller path.
fn better<T: Scalar>(value: T, path: &[NodeId], than: &Best<T>) -> bool {
    match value.partial_cmp(&than.value).unwrap_or(Ordering::Equal) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => (path.len(), path) < (than.path.len(), than.path.as_slice()),
    }
}

/// Per-target precomputation of every hop value a search can use.
#[derive(Debug, Clone)]
pub struct SearchIndex<T> {
    params: TransitivityParams<T>,
    layers: Vec<(Option<CharacteristicId>, T, HopGraph<T>)>,
    relevant: Vec<bool>,
}

impl<T: Scalar> SearchIndex<T> {
    /// Builds the index for `target`. With `scope` (hop distances from one
    /// trustor, `u32::MAX` when unreachable) only nodes a search from that
    /// trustor can touch are indexed.
    pub fn build(
        graph: &SocialGraph,
        store: &TrustStore<T>,
        registry: &TaskRegistry<T>,
        target: &Task<T>,
        params: &TransitivityParams<T>,
        view: SelectionStrategy,
        scope: Option<&[u32]>,
    ) -> Self {
        let n = graph.node_count();
        let scopes: Vec<(Option<CharacteristicId>, T, HopScope)> = match params.method {
            Method::Traditional => vec![(None, T::one(), HopScope::Exact)],
            Method::Conservative => vec![(None, T::one(), HopScope::Task)],
            Method::Aggressive => {
                target.parts().iter().map(|&(c, w)| (Some(c), w, HopScope::Characteristic(c))).collect()
            }
        };
        let mut layers: Vec<_> = scopes.iter().map(|&(c, w, _)| (c, w, HopGraph::new(n))).collect();
        let mut relevant = vec![false; n];
        let max_hops = params.max_hops as u32;

        for u in graph.nodes() {
            let dist = scope.map_or(0, |d| d[u.index()]);
            if dist > max_hops {
                continue;
            }
            let mut held = store.held_by(u).peekable();
            while let Some((key, rec)) = held.next() {
                let (subject, kind) = (key.subject, key.kind);
                let mut group = vec![(key.context, rec)];
                while let Some((k, r)) = held.next_if(|(k, _)| k.subject == subject && k.kind == kind) {
                    group.push((k.context, r));
                }
                let est = HopEstimates::from_history(group, registry, target, view);
                relevant[u.index()] |= match params.method {
                    Method::Traditional => est.exact.is_some(),
                    Method::Conservative => est.covers_task(),
                    Method::Aggressive => est.covers_any(),
                };
                if dist >= max_hops || !graph.has_edge(u, subject) {
                    continue;
                }
                for ((_, _, scope), (_, _, hg)) in scopes.iter().zip(layers.iter_mut()) {
                    let Some(x) = est.get(*scope, target) else { continue };
                    match kind {
                        RecordKind::Recommendation if x >= params.omega1 => hg.rec[u.index()].push((subject, x)),
                        RecordKind::Recommendation => {}
                        RecordKind::Service => hg.svc[u.index()].push((subject, x)),
                    }
                }
            }
        }
        SearchIndex { params: *params, layers, relevant }
    }

    pub fn params(&self) -> &TransitivityParams<T> {
        &self.params
    }

    /// Whether `node` holds any record the method can use for the target.
    pub fn is_relevant(&self, node: NodeId) -> bool {
        self.relevant.get(node.index()).copied().unwrap_or(false)
    }

    fn combine(&self, acc: T, x: T) -> T {
        match self.params.method {
            Method::Traditional => acc * x,
            Method::Conservative | Method::Aggressive => transit_pair(acc, x),
        }
    }

    fn best_paths(&self, hg: &HopGraph<T>, trustor: NodeId) -> Vec<Option<Best<T>>> {
        let n = hg.svc.len();
        let mut best: Vec<Option<Best<T>>> = vec![None; n];
        if trustor.index() >= n {
            return best;
        }
        let mut on_path = vec![false; n];
        let mut path = vec![trustor];
        on_path[trustor.index()] = true;
        self.dfs(hg, None, &mut path, &mut on_path, &mut best);
        best
    }

    fn dfs(
        &self,
        hg: &HopGraph<T>,
        acc: Option<T>,
        path: &mut Vec<NodeId>,
        on_path: &mut [bool],
        best: &mut [Option<Best<T>>],
    ) {
        let u = *path.last().expect("path starts at the trustor");
        let hops = path.len() - 1;
        for &(t, x) in &hg.svc[u.index()] {
            if on_path[t.index()] || (hops > 0 && x < self.params.omega2) {
                continue;
            }
            let value = acc.map_or(x, |a| self.combine(a, x));
            path.push(t);
            let slot = &mut best[t.index()];
            if slot.as_ref().map_or(true, |b| better(value, path, b)) {
                *slot = Some(Best { value, path: path.clone() });
            }
            path.pop();
        }
        if hops + 1 >= self.params.max_hops {
            return;
        }
        for &(w, r) in &hg.rec[u.index()] {
            if on_path[w.index()] {
                continue;
            }
            let next = acc.map_or(r, |a| self.combine(a, r));
            on_path[w.index()] = true;
            path.push(w);
            self.dfs(hg, Some(next), path, on_path, best);
            path.pop();
            on_path[w.index()] = false;
        }
    }

    /// Every trustee (per `is_trustee`) reachable from `trustor` by a
    /// non-blocked chain, in node order. Under the aggressive method each
    /// characteristic picks its own best path and the values are combined by
    /// task weight.
    pub fn search(&self, trustor: NodeId, is_trustee: impl Fn(NodeId) -> bool) -> Vec<Found<T>> {
        let per_layer: Vec<Vec<Option<Best<T>>>> =
            self.layers.iter().map(|(_, _, hg)| self.best_paths(hg, trustor)).collect();
        let n = self.relevant.len();
        let mut found = Vec::new();
        'node: for i in 0..n {
            let node = NodeId(i as u32);
            if node == trustor || !is_trustee(node) {
                continue;
            }
            let mut value = T::zero();
            let mut paths = Vec::with_capacity(self.layers.len());
            for ((c, w, _), bests) in self.layers.iter().zip(&per_layer) {
                let Some(b) = &bests[i] else { continue 'node };
                value = value + *w * b.value;
                paths.push(CharPath { characteristic: *c, path: b.path.clone() });
            }
            found.push(Found { trustee: node, value, paths });
        }
        found
    }

    /// Nodes the request reaches: relevant nodes found breadth-first within
    /// `max_hops`, relaying only through relevant nodes, plus the candidates.
    /// Each node counts once.
    pub fn interrogated(&self, graph: &SocialGraph, trustor: NodeId, candidates: &[NodeId]) -> usize {
        let n = graph.node_count();
        let mut seen = vec![false; n];
        let mut counted = vec![false; n];
        let mut queue = VecDeque::from([(trustor, 0usize)]);
        seen[trustor.index()] = true;
        while let Some((u, d)) = queue.pop_front() {
            if d >= self.params.max_hops {
                continue;
            }
            for &v in graph.neighbors(u) {
                if seen[v.index()] {
                    continue;
                }
                seen[v.index()] = true;
                if self.is_relevant(v) {
                    counted[v.index()] = true;
                    queue.push_back((v, d + 1));
                }
            }
        }
        for c in candidates {
            if *c != trustor {
                counted[c.index()] = true;
            }
        }
        counted.iter().filter(|&&c| c).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Context, TrustRecord};

    fn rec(kind: RecordKind, s: f64) -> TrustRecord<f64> {
        TrustRecord::new(kind, s, 0.5, 0.5, 0.5)
    }

    /// A - B, B - C, B - D, C - E, D - E; the target {a1, a2} is vouched for
    /// a1 through C and for a2 through D.
    fn split_world() -> (SocialGraph, TaskRegistry<f64>, TrustStore<f64>, crate::domain::TaskId) {
        let g = SocialGraph::from_edges(5, [(0, 1), (1, 2), (1, 3), (2, 4), (3, 4)]).unwrap();
        let mut reg = TaskRegistry::new();
        let a = CharacteristicId;
        let target = reg.register_uniform(&[a(1), a(2)]).unwrap();
        let left = reg.register_uniform(&[a(1), a(3)]).unwrap();
        let right = reg.register_uniform(&[a(2), a(4)]).unwrap();
        let mut store = TrustStore::new();
        for (x, y) in [(0, 1), (1, 2), (1, 3)] {
            store.insert(NodeId(x), NodeId(y), Context::Task(target), rec(RecordKind::Recommendation, 0.9));
        }
        store.insert(NodeId(2), NodeId(4), Context::Task(left), rec(RecordKind::Service, 0.8));
        store.insert(NodeId(3), NodeId(4), Context::Task(right), rec(RecordKind::Service, 0.8));
        (g, reg, store, target)
    }

    fn run(method: Method) -> (Vec<Found<f64>>, usize) {
        let (g, reg, store, t) = split_world();
        let params = TransitivityParams::default().with_method(method);
        let idx = SearchIndex::build(&g, &store, &reg, reg.get(t), &params, SelectionStrategy::SuccessOnly, None);
        let found = idx.search(NodeId(0), |_| true);
        let ids: Vec<NodeId> = found.iter().map(|f| f.trustee).collect();
        let count = idx.interrogated(&g, NodeId(0), &ids);
        (found, count)
    }

    #[test]
    fn split_characteristics_only_reach_under_aggressive() {
        assert!(run(Method::Traditional).0.is_empty());
        assert!(run(Method::Conservative).0.is_empty());
        let (found, _) = run(Method::Aggressive);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].trustee, NodeId(4));
        let expected = transit_pair(transit_pair(0.9, 0.9), 0.8);
        assert!((found[0].value - expected).abs() < 1e-12);
        assert_eq!(found[0].paths[0].path, vec![NodeId(0), NodeId(1), NodeId(2), NodeId(4)]);
        assert_eq!(found[0].paths[1].path, vec![NodeId(0), NodeId(1), NodeId(3), NodeId(4)]);
    }

    #[test]
    fn interrogation_grows_with_method() {
        let counts: Vec<usize> = Method::ALL.iter().map(|&m| run(m).1).collect();
        // B relays under all methods; C and D only when partial coverage counts
        assert_eq!(counts, vec![1, 1, 4]);
    }

    #[test]
    fn hop_limit_blocks_long_chains() {
        let (g, reg, store, t) = split_world();
        let params = TransitivityParams::new(0.6, 0.6, 2, Method::Aggressive).unwrap();
        let idx = SearchIndex::build(&g, &store, &reg, reg.get(t), &params, SelectionStrategy::SuccessOnly, None);
        assert!(idx.search(NodeId(0), |_| true).is_empty());
    }

    #[test]
    fn trustee_filter_and_self_exclusion() {
        let (g, reg, mut store, t) = split_world();
        store.insert(NodeId(1), NodeId(0), Context::Task(t), rec(RecordKind::Service, 0.9));
        store.insert(NodeId(0), NodeId(1), Context::Task(t), rec(RecordKind::Service, 0.3));
        let params = TransitivityParams::default().with_method(Method::Traditional);
        let idx = SearchIndex::build(&g, &store, &reg, reg.get(t), &params, SelectionStrategy::SuccessOnly, None);
        let found = idx.search(NodeId(0), |_| true);
        assert_eq!(found.len(), 1);
        assert_eq!((found[0].trustee, found[0].value), (NodeId(1), 0.3));
        assert!(idx.search(NodeId(0), |n| n != NodeId(1)).is_empty());
    }

    #[test]
    fn scoped_index_matches_full() {
        let (g, reg, store, t) = split_world();
        let params = TransitivityParams::default().with_method(Method::Aggressive);
        let d = g.bfs_distances(NodeId(0));
        let v = SelectionStrategy::SuccessOnly;
        let full = SearchIndex::build(&g, &store, &reg, reg.get(t), &params, v, None);
        let scoped = SearchIndex::build(&g, &store, &reg, reg.get(t), &params, v, Some(&d));
        assert_eq!(full.search(NodeId(0), |_| true), scoped.search(NodeId(0), |_| true));
    }

    #[test]
    fn ties_prefer_shorter_then_lexicographic() {
        let best = Best { value: 0.7, path: vec![NodeId(0), NodeId(3), NodeId(5)] };
        assert!(better(0.7, &[NodeId(0), NodeId(5)], &best));
        assert!(better(0.7, &[NodeId(0), NodeId(2), NodeId(5)], &best));
        assert!(!better(0.7, &[NodeId(0), NodeId(4), NodeId(5)], &best));
        assert!(better(0.71, &[NodeId(0), NodeId(9), NodeId(8), NodeId(5)], &best));
    }
}
