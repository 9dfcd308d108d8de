//! Social topologies: loading SNAP-style edge lists and feature files,
//! connectivity statistics and trustor/trustee role sampling.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::io::BufRead;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::format_sig;

/// Dense node index inside a [`SocialGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(u32::try_from(i).expect("node index fits in u32"))
    }
}

/// Undirected simple graph with dense node ids and optional binary node features.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialGraph {
    adjacency: Vec<Vec<NodeId>>,
    original_ids: Vec<u64>,
    edge_count: usize,
    features: Option<Vec<Vec<bool>>>,
}

impl SocialGraph {
    /// Builds a graph over `n` nodes (original ids `0..n`). Self-loops and
    /// duplicate edges are dropped.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut sets = vec![BTreeSet::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::UnknownNode(u.max(v) as u64));
            }
            if u != v {
                sets[u].insert(NodeId::from(v));
                sets[v].insert(NodeId::from(u));
            }
        }
        Ok(Self::from_sets(sets, (0..n as u64).collect()))
    }

    fn from_sets(sets: Vec<BTreeSet<NodeId>>, original_ids: Vec<u64>) -> Self {
        let adjacency: Vec<Vec<NodeId>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let edge_count = adjacency.iter().map(Vec::len).sum::<usize>() / 2;
        SocialGraph { adjacency, original_ids, edge_count, features: None }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count()).map(NodeId::from)
    }

    /// Sorted neighbour list.
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adjacency[v.index()]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adjacency[v.index()].len()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency[u.index()].binary_search(&v).is_ok()
    }

    /// Each undirected edge once, as `(low, high)`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes()
            .flat_map(move |u| self.neighbors(u).iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    /// Id the node had in the source file.
    pub fn original_id(&self, v: NodeId) -> u64 {
        self.original_ids[v.index()]
    }

    pub fn node_by_original(&self, id: u64) -> Option<NodeId> {
        self.original_ids.binary_search(&id).ok().map(NodeId::from)
    }

    pub fn features(&self, v: NodeId) -> Option<&[bool]> {
        self.features.as_ref().map(|f| f[v.index()].as_slice())
    }

    pub fn feature_len(&self) -> usize {
        self.features.as_ref().and_then(|f| f.first()).map_or(0, Vec::len)
    }

    /// Serializes as an edge list using the original node ids.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (u, v) in self.edges() {
            out.push_str(&format!("{} {}\n", self.original_id(u), self.original_id(v)));
        }
        out
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<NodeId>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![NodeId::from(start)];
            let mut queue = VecDeque::from([NodeId::from(start)]);
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbors(u) {
                    if !seen[v.index()] {
                        seen[v.index()] = true;
                        comp.push(v);
                        queue.push_back(v);
                    }
                }
            }
            comp.sort();
            out.push(comp);
        }
        out
    }

    /// Hop distances from `source`; `u32::MAX` marks unreachable nodes.
    pub fn bfs_distances(&self, source: NodeId) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.node_count()];
        dist[source.index()] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u.index()] + 1;
            for &v in self.neighbors(u) {
                if dist[v.index()] == u32::MAX {
                    dist[v.index()] = d;
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

fn parse_id(token: &str, line: usize) -> Result<u64> {
    token.parse::<u64>().map_err(|_| Error::Parse {
        line,
        message: format!("expected a non-negative integer node id, found `{token}`"),
    })
}

/// Reads a whitespace-separated edge list (`u v` per line, `#` comments).
/// Node ids are remapped to a dense range ordered by original id.
pub fn load_edge_list(source: impl BufRead) -> Result<SocialGraph> {
    let mut raw: Vec<(u64, u64)> = Vec::new();
    let mut ids = BTreeSet::new();
    for (idx, line) in source.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Parse { line: lineno, message: e.to_string() })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let (Some(a), Some(b), None) = (tokens.next(), tokens.next(), tokens.next()) else {
            return Err(Error::Parse { line: lineno, message: "expected exactly two node ids".into() });
        };
        let (u, v) = (parse_id(a, lineno)?, parse_id(b, lineno)?);
        ids.insert(u);
        ids.insert(v);
        raw.push((u, v));
    }
    if raw.is_empty() {
        return Err(Error::Empty("edge list has no edges"));
    }
    let original_ids: Vec<u64> = ids.into_iter().collect();
    let dense: BTreeMap<u64, usize> = original_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut sets = vec![BTreeSet::new(); original_ids.len()];
    for (u, v) in raw {
        let (du, dv) = (dense[&u], dense[&v]);
        if du != dv {
            sets[du].insert(NodeId::from(dv));
            sets[dv].insert(NodeId::from(du));
        }
    }
    Ok(SocialGraph::from_sets(sets, original_ids))
}

/// Attaches binary node features (`nodeId f1 ... fk` per line). Nodes missing
/// from the file get all-zero vectors.
pub fn load_features(source: impl BufRead, graph: SocialGraph) -> Result<SocialGraph> {
    let mut rows: Vec<(NodeId, Vec<bool>)> = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, line) in source.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Parse { line: lineno, message: e.to_string() })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let id = parse_id(tokens.next().expect("non-empty line"), lineno)?;
        let node = graph.node_by_original(id).ok_or(Error::UnknownNode(id))?;
        let flags = tokens
            .map(|t| match t {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(Error::Parse { line: lineno, message: format!("feature flag must be 0 or 1, found `{other}`") }),
            })
            .collect::<Result<Vec<bool>>>()?;
        match width {
            None => width = Some(flags.len()),
            Some(w) if w != flags.len() => {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("ragged feature row: {} flags, expected {w}", flags.len()),
                })
            }
            _ => {}
        }
        rows.push((node, flags));
    }
    let width = width.unwrap_or(0);
    let mut features = vec![vec![false; width]; graph.node_count()];
    for (node, flags) in rows {
        features[node.index()] = flags;
    }
    Ok(SocialGraph { features: Some(features), ..graph })
}

/// Connectivity summary in the layout of the classic network-statistics table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub node_count: usize,
    pub edge_count: usize,
    pub avg_degree: f64,
    /// Measured on the largest connected component.
    pub diameter: u32,
    /// Measured on the largest connected component.
    pub avg_path_length: f64,
    pub avg_clustering: f64,
    pub components: usize,
}

impl GraphStats {
    pub const CSV_HEADER: &'static str = "nodes,edges,avg_degree,diameter,avg_path_length,avg_clustering,components";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.node_count,
            self.edge_count,
            format_sig(self.avg_degree),
            self.diameter,
            format_sig(self.avg_path_length),
            format_sig(self.avg_clustering),
            self.components
        )
    }

    pub fn is_connected(&self) -> bool {
        self.components == 1
    }
}

/// Local clustering coefficient of one node (0 for degree < 2).
pub fn local_clustering(graph: &SocialGraph, v: NodeId) -> f64 {
    let nbrs = graph.neighbors(v);
    let k = nbrs.len();
    if k < 2 {
        return 0.0;
    }
    let mut links = 0usize;
    for (i, &a) in nbrs.iter().enumerate() {
        for &b in &nbrs[i + 1..] {
            if graph.has_edge(a, b) {
                links += 1;
            }
        }
    }
    2.0 * links as f64 / (k * (k - 1)) as f64
}

pub fn compute_stats(graph: &SocialGraph) -> Result<GraphStats> {
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::Empty("graph has no nodes"));
    }
    let components = graph.components();
    let largest = components
        .iter()
        .max_by(|a, b| a.len().cmp(&b.len()).then_with(|| b[0].cmp(&a[0])))
        .expect("at least one component");

    let mut diameter = 0u32;
    let mut total = 0u64;
    for &source in largest {
        let dist = graph.bfs_distances(source);
        for &t in largest {
            let d = dist[t.index()];
            diameter = diameter.max(d);
            total += u64::from(d);
        }
    }
    let m = largest.len();
    let avg_path_length = if m > 1 { total as f64 / (m * (m - 1)) as f64 } else { 0.0 };
    let avg_clustering = graph.nodes().map(|v| local_clustering(graph, v)).sum::<f64>() / n as f64;

    Ok(GraphStats {
        node_count: n,
        edge_count: graph.edge_count(),
        avg_degree: 2.0 * graph.edge_count() as f64 / n as f64,
        diameter,
        avg_path_length,
        avg_clustering,
        components: components.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleAssignment {
    pub trustors: BTreeSet<NodeId>,
    pub trustees: BTreeSet<NodeId>,
}

/// Samples `round(fraction * N)` trustors and as many trustees, each uniformly
/// without replacement. The two samples are independent (and may overlap)
/// unless `disjoint` is set.
pub fn sample_roles<R: Rng + ?Sized>(
    graph: &SocialGraph,
    fraction: f64,
    disjoint: bool,
    rng: &mut R,
) -> Result<RoleAssignment> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::param("fraction", format!("must lie in (0, 1], got {fraction}")));
    }
    let n = graph.node_count();
    let k = (fraction * n as f64).round() as usize;
    let pick = |idx: &[usize]| idx.iter().map(|&i| NodeId::from(i)).collect::<BTreeSet<_>>();
    if disjoint {
        if 2 * k > n {
            return Err(Error::param("fraction", format!("disjoint roles need 2*{k} <= {n} nodes")));
        }
        let both = rand::seq::index::sample(rng, n, 2 * k).into_vec();
        return Ok(RoleAssignment { trustors: pick(&both[..k]), trustees: pick(&both[k..]) });
    }
    let trustors = rand::seq::index::sample(rng, n, k).into_vec();
    let trustees = rand::seq::index::sample(rng, n, k).into_vec();
    Ok(RoleAssignment { trustors: pick(&trustors), trustees: pick(&trustees) })
}
