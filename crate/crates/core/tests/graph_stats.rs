use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use siot_trust::graph::{compute_stats, load_edge_list, GraphStats};
use siot_trust::SocialGraph;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn load(name: &str) -> (GraphStats, Value) {
    let g = load_edge_list(BufReader::new(File::open(fixture(&format!("{name}.edges"))).unwrap())).unwrap();
    let oracle: Value = serde_json::from_reader(File::open(fixture(&format!("{name}.stats.json"))).unwrap()).unwrap();
    (compute_stats(&g).unwrap(), oracle)
}

fn assert_matches_oracle(s: &GraphStats, o: &Value) {
    assert_eq!(s.node_count as u64, o["nodes"].as_u64().unwrap());
    assert_eq!(s.edge_count as u64, o["edges"].as_u64().unwrap());
    assert_eq!(u64::from(s.diameter), o["diameter"].as_u64().unwrap());
    assert_eq!(s.components as u64, o["components"].as_u64().unwrap());
    for (got, key) in [(s.avg_degree, "avg_degree"), (s.avg_path_length, "avg_path_length"), (s.avg_clustering, "avg_clustering")] {
        let want = o[key].as_f64().unwrap();
        assert!((got - want).abs() < 1e-9, "{key}: {got} vs {want}");
    }
}

#[test]
fn community_fixture_matches_precomputed_stats() {
    let (s, o) = load("facebook_like");
    assert_matches_oracle(&s, &o);
}

#[test]
fn community_fixture_matches_reference_table() {
    let (s, _) = load("facebook_like");
    assert_eq!((s.node_count, s.edge_count), (347, 5038));
    assert!((s.avg_degree - 29.04).abs() <= 0.01);
    assert_eq!(s.diameter, 11);
    assert!((s.avg_path_length - 3.75).abs() <= 0.01);
    assert!((s.avg_clustering - 0.49).abs() <= 0.01);
}

#[test]
fn bundled_default_matches_precomputed_stats() {
    let (s, o) = load("synthetic50");
    assert_matches_oracle(&s, &o);
}

#[test]
fn complete_graph() {
    for n in 2..9usize {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        let s = compute_stats(&SocialGraph::from_edges(n, edges).unwrap()).unwrap();
        assert_eq!(s.edge_count, n * (n - 1) / 2);
        assert_eq!(s.diameter, 1);
        assert_eq!(s.avg_path_length, 1.0);
        assert_eq!(s.avg_degree, (n - 1) as f64);
        assert_eq!(s.avg_clustering, if n > 2 { 1.0 } else { 0.0 });
    }
}

/// All-pairs distances by Floyd-Warshall, then the same summary by hand.
fn floyd_stats(n: usize, edges: &[(usize, usize)]) -> (u32, f64, f64, usize) {
    const INF: u32 = u32::MAX / 4;
    let mut adj = vec![vec![false; n]; n];
    let mut d = vec![vec![INF; n]; n];
    for i in 0..n {
        d[i][i] = 0;
    }
    for &(u, v) in edges {
        adj[u][v] = true;
        adj[v][u] = true;
        d[u][v] = 1;
        d[v][u] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
            }
        }
    }
    // components are the distinct reachability rows
    let mut comp: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if !comp.iter().any(|c| c.contains(&i)) {
            comp.push((0..n).filter(|&j| d[i][j] < INF).collect());
        }
    }
    let largest = comp.iter().fold(&comp[0], |best, c| if c.len() > best.len() { c } else { best });
    let (mut diam, mut total) = (0u32, 0u64);
    for &i in largest {
        for &j in largest {
            diam = diam.max(d[i][j]);
            total += u64::from(d[i][j]);
        }
    }
    let m = largest.len();
    let apl = if m > 1 { total as f64 / (m * (m - 1)) as f64 } else { 0.0 };
    let clustering: f64 = (0..n)
        .map(|v| {
            let nb: Vec<usize> = (0..n).filter(|&u| adj[v][u]).collect();
            let k = nb.len();
            if k < 2 {
                return 0.0;
            }
            let links = nb.iter().flat_map(|&a| nb.iter().map(move |&b| (a, b))).filter(|&(a, b)| a < b && adj[a][b]).count();
            links as f64 / (k * (k - 1) / 2) as f64
        })
        .sum();
    (diam, apl, clustering / n as f64, comp.len())
}

#[test]
fn random_graphs_match_floyd_warshall() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..300 {
        let n = rng.gen_range(1..=8usize);
        let p = rng.gen_range(0.1..0.9);
        let edges: Vec<(usize, usize)> =
            (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).filter(|_| rng.gen_bool(p)).collect();
        let s = compute_stats(&SocialGraph::from_edges(n, edges.iter().copied()).unwrap()).unwrap();
        let (diam, apl, cc, comps) = floyd_stats(n, &edges);
        assert_eq!((s.diameter, s.components), (diam, comps), "{edges:?}");
        assert!((s.avg_path_length - apl).abs() < 1e-12, "{edges:?}");
        assert!((s.avg_clustering - cc).abs() < 1e-12, "{edges:?}");
    }
}
