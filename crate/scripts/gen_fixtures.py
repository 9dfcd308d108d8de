#!/usr/bin/env python3
"""Generate the synthetic social-graph fixtures bundled with the crate.

The Facebook-like fixture is a 347-node / 5038-edge community graph with a
sparse tail, tuned so its connectivity statistics sit close to the published
Facebook ego-subnetwork figures. Reference statistics are computed with
networkx and written next to the edge list so the Rust tests can compare
against an independent implementation.
"""
import json
import random
from pathlib import Path

import networkx as nx

OUT = Path(__file__).resolve().parent.parent / "crates" / "core" / "fixtures"

N_NODES = 347
N_EDGES = 5038
TARGET = {"diameter": 11, "avg_path_length": 3.75, "avg_clustering": 0.49}


def build(seed, sizes, p_in, inter, tail_width):
    """Communities on a line, each linked to the next by `inter` random edges,
    with a chain of small cliques filling the remaining nodes as a sparse tail.
    Intra-community edges are then added or removed until the count is exact."""
    rng = random.Random(seed)
    g = nx.Graph()
    g.add_nodes_from(range(N_NODES))
    comms, start = [], 0
    for s in sizes:
        comms.append(list(range(start, start + s)))
        start += s
    core_n = start
    for c in comms:
        for i in range(len(c)):
            for j in range(i + 1, len(c)):
                if rng.random() < p_in:
                    g.add_edge(c[i], c[j])
    for k in range(len(comms) - 1):
        for _ in range(inter):
            g.add_edge(rng.choice(comms[k]), rng.choice(comms[k + 1]))
    prev = [rng.choice(comms[-1])]
    node = core_n
    while node < N_NODES:
        layer = list(range(node, min(N_NODES, node + tail_width)))
        node += len(layer)
        for i in range(len(layer)):
            for j in range(i + 1, len(layer)):
                g.add_edge(layer[i], layer[j])
        for v in layer:
            g.add_edge(v, rng.choice(prev))
        prev = layer
    comm_of = {v: i for i, c in enumerate(comms) for v in c}
    core = [v for c in comms for v in c]
    guard = 0
    while g.number_of_edges() < N_EDGES and guard < 10**6:
        guard += 1
        u, v = rng.sample(rng.choice(comms), 2)
        g.add_edge(u, v)
    while g.number_of_edges() > N_EDGES and guard < 2 * 10**6:
        guard += 1
        u = rng.choice(core)
        nbrs = [v for v in g[u] if comm_of.get(v) == comm_of[u] and g.degree(v) > 2]
        if g.degree(u) > 2 and nbrs:
            g.remove_edge(u, rng.choice(nbrs))
    return g


def stats(g):
    return {
        "nodes": g.number_of_nodes(),
        "edges": g.number_of_edges(),
        "avg_degree": 2 * g.number_of_edges() / g.number_of_nodes(),
        "diameter": nx.diameter(g),
        "avg_path_length": nx.average_shortest_path_length(g),
        "avg_clustering": nx.average_clustering(g),
        "components": nx.number_connected_components(g),
    }


def score(s):
    return (
        abs(s["diameter"] - TARGET["diameter"]) * 10
        + abs(s["avg_path_length"] - TARGET["avg_path_length"]) / 0.01
        + abs(s["avg_clustering"] - TARGET["avg_clustering"]) / 0.01
    )


def write_graph(g, stem, extra_comment):
    OUT.mkdir(parents=True, exist_ok=True)
    with open(OUT / f"{stem}.edges", "w") as f:
        f.write(f"# {extra_comment}\n")
        f.write(f"# nodes {g.number_of_nodes()} edges {g.number_of_edges()}\n")
        for u, v in sorted((min(e), max(e)) for e in g.edges()):
            f.write(f"{u} {v}\n")
    with open(OUT / f"{stem}.stats.json", "w") as f:
        json.dump(stats(g), f, indent=2, sort_keys=True)
        f.write("\n")


def write_features(g, stem, n_feat, seed):
    rng = random.Random(seed)
    # features correlate with position so neighbours share profile bits
    order = sorted(g.nodes())
    base = [rng.random() for _ in range(n_feat)]
    with open(OUT / f"{stem}.feat", "w") as f:
        for v in order:
            phase = v / len(order)
            bits = []
            for k in range(n_feat):
                centre = (k + 0.5) / n_feat
                p = 0.15 + 0.55 * max(0.0, 1 - abs(phase - centre) * 3) * base[k]
                bits.append("1" if rng.random() < p else "0")
            f.write(f"{v} {' '.join(bits)}\n")


# Found by a random search over the build parameters, scored on distance to
# the target statistics; kept fixed so the fixture is reproducible.
CHOSEN = dict(seed=613506278, sizes=[57, 57, 57, 56, 56, 56], p_in=0.4934877956473926, inter=33, tail_width=2)


def main():
    g = build(**CHOSEN)
    assert nx.is_connected(g) and g.number_of_edges() == N_EDGES
    s = stats(g)
    print("stats", s, "score", round(score(s), 3))
    write_all(CHOSEN, g)


def write_all(params, g):
    write_graph(g, "facebook_like", "synthetic Facebook-like subnetwork, generated by scripts/gen_fixtures.py")
    write_features(g, "facebook_like", 16, params["seed"])
    small = nx.connected_watts_strogatz_graph(50, 6, 0.15, seed=7)
    write_graph(small, "synthetic50", "synthetic 50-node small-world graph, generated by scripts/gen_fixtures.py")


if __name__ == "__main__":
    main()
