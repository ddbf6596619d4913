//! Seeded synthetic graphs for tests, benchmarks and sweeps.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, LabelSet};

/// `blocks` groups of `block_size` nodes; intra-block edges appear with
/// probability `p_in`, cross edges with `p_out`. Labels are block indices.
pub fn planted_partition(
    blocks: usize,
    block_size: usize,
    p_in: f64,
    p_out: f64,
    seed: u64,
) -> (Graph, LabelSet) {
    let n = blocks * block_size;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if u / block_size == v / block_size { p_in } else { p_out };
            if rng.random::<f64>() < p {
                edges.push((u, v, 1.0));
            }
        }
    }
    let labels = LabelSet::from_assignments((0..n).map(|v| vec![v / block_size]).collect());
    (Graph::from_edges(n, &edges), labels)
}

/// Two `k`-cliques joined by a single edge between their first nodes.
pub fn two_cliques(k: usize) -> Graph {
    let mut edges = Vec::new();
    for base in [0, k] {
        for u in 0..k {
            for v in u + 1..k {
                edges.push((base + u, base + v, 1.0));
            }
        }
    }
    edges.push((0, k, 1.0));
    Graph::from_edges(2 * k, &edges)
}

/// Near-regular random graph from the pairing model.
///
/// Pairings producing self-loops or repeated edges are retried a few times
/// and then dropped, so a handful of nodes may end up below `degree`.
pub fn random_regular(n: usize, degree: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, degree)).collect();
    let mut best: Vec<(usize, usize, f64)> = Vec::new();
    for _ in 0..20 {
        stubs.shuffle(&mut rng);
        let mut seen = std::collections::HashSet::new();
        let edges: Vec<_> = stubs
            .chunks_exact(2)
            .filter(|p| p[0] != p[1] && seen.insert((p[0].min(p[1]), p[0].max(p[1]))))
            .map(|p| (p[0], p[1], 1.0))
            .collect();
        if edges.len() > best.len() {
            best = edges;
        }
        if best.len() * 2 == stubs.len() {
            break;
        }
    }
    Graph::from_edges(n, &best)
}

/// Random connected graph: a random spanning tree plus extra edges with
/// probability `p_extra`, weights uniform in `weights` (or 1 when `None`).
pub fn random_connected<R: Rng>(
    rng: &mut R,
    n: usize,
    p_extra: f64,
    weights: Option<(f64, f64)>,
) -> Graph {
    let weight = |rng: &mut R| match weights {
        Some((lo, hi)) => rng.random_range(lo..=hi),
        None => 1.0,
    };
    let mut edges = Vec::new();
    for v in 1..n {
        let parent = rng.random_range(0..v);
        let w = weight(rng);
        edges.push((parent, v, w));
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p_extra {
                let w = weight(rng);
                edges.push((u, v, w));
            }
        }
    }
    Graph::from_edges(n, &edges)
}
