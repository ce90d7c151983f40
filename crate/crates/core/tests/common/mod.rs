//! Shared test corpus: seeded random connected graphs small enough for the
//! brute-force oracles.

use std::sync::Arc;

use modulus_core::{Family, Graph};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn seeded(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Random connected graph: a random attachment tree plus `extra` edges,
/// self-loops excluded. Weights are uniform in [0.5, 2) when requested.
pub fn random_connected_graph(
    rng: &mut StdRng,
    vertices: usize,
    extra: usize,
    weighted: bool,
) -> Arc<Graph> {
    assert!(vertices >= 2);
    let mut edges: Vec<(String, String, f64)> = Vec::new();
    let name = |i: usize| format!("v{i}");
    let mut weight = |rng: &mut StdRng| {
        if weighted {
            rng.random_range(0.5..2.0)
        } else {
            1.0
        }
    };
    for i in 1..vertices {
        let j = rng.random_range(0..i);
        let w = weight(rng);
        edges.push((name(j), name(i), w));
    }
    let mut added = 0;
    let mut guard = 0;
    while added < extra && guard < 50 * extra.max(1) {
        guard += 1;
        let a = rng.random_range(0..vertices);
        let b = rng.random_range(0..vertices);
        if a == b {
            continue;
        }
        let w = weight(rng);
        edges.push((name(a), name(b), w));
        added += 1;
    }
    let borrowed: Vec<(&str, &str, f64)> = edges
        .iter()
        .map(|(a, b, w)| (a.as_str(), b.as_str(), *w))
        .collect();
    Arc::new(Graph::from_edges(borrowed, false).unwrap())
}

pub struct CorpusInstance {
    pub name: String,
    pub family: Family,
}

/// The small-instance corpus: unweighted connected graphs with at most
/// `max_vertices` vertices, one connecting and one spanning-tree family per
/// graph. Enumeration stays cheap because the cyclomatic number is small.
pub fn small_corpus(count_per_kind: usize, max_vertices: usize) -> Vec<CorpusInstance> {
    let mut out = Vec::new();
    for i in 0..count_per_kind {
        let mut rng = seeded(1000 + i as u64);
        let n = 4 + (i % (max_vertices - 3));
        let extra = 1 + i % 3;
        let graph = random_connected_graph(&mut rng, n, extra, false);
        let s = rng.random_range(0..n);
        let mut t = rng.random_range(0..n);
        if t == s {
            t = (t + 1) % n;
        }
        let s_id = graph.vertex_id(s).to_string();
        let t_id = graph.vertex_id(t).to_string();
        out.push(CorpusInstance {
            name: format!("connecting[{i}] {s_id}->{t_id} (|V|={n})"),
            family: Family::connecting(graph.clone(), &s_id, &t_id).unwrap(),
        });
        out.push(CorpusInstance {
            name: format!("spanning-trees[{i}] (|V|={n})"),
            family: Family::spanning_trees(graph).unwrap(),
        });
    }
    out
}
