//! Independent reference implementations shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use csembed::circuit::CircuitSolution;
use csembed::expansion::ExpandedNeighborhood;
use csembed::graph::{Graph, NodeId};
use rand::Rng;

/// Adjacency matrix copy of `g`; 0 means no edge.
pub fn dense(g: &Graph) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let mut a = vec![vec![0.0; n]; n];
    for (u, v, c) in g.edges() {
        a[u.index()][v.index()] = c;
        a[v.index()][u.index()] = c;
    }
    a
}

/// Degree including the sink edge, recomputed from the adjacency matrix.
pub fn augmented_degree(a: &[Vec<f64>], v: usize, source: usize, alpha: f64) -> f64 {
    let s: f64 = a[v].iter().sum();
    if v == source {
        s
    } else {
        s + alpha * s
    }
}

/// Minimum summed hop length over all simple paths from `source`, by exhaustive DFS.
pub fn brute_distances(g: &Graph, source: usize, alpha: f64) -> Vec<Option<f64>> {
    let a = dense(g);
    let n = a.len();
    let mut best = vec![None::<f64>; n];
    let mut on_path = vec![false; n];

    fn walk(
        a: &[Vec<f64>],
        at: usize,
        dist: f64,
        source: usize,
        alpha: f64,
        on_path: &mut [bool],
        best: &mut [Option<f64>],
    ) {
        if best[at].is_none_or(|b| dist < b) {
            best[at] = Some(dist);
        }
        on_path[at] = true;
        let deg = augmented_degree(a, at, source, alpha);
        for next in 0..a.len() {
            let c = a[at][next];
            if c > 0.0 && !on_path[next] {
                let hop = (deg * deg / (c * c)).log10().max(0.0);
                walk(a, next, dist + hop, source, alpha, on_path, best);
            }
        }
        on_path[at] = false;
    }

    walk(&a, source, 0.0, source, alpha, &mut on_path, &mut best);
    best
}

/// The `e` nearest reachable nodes by brute-force distance: the source, then ties by id.
pub fn brute_nearest(g: &Graph, source: usize, alpha: f64, e: usize) -> Vec<(usize, f64)> {
    let mut all: Vec<(usize, f64)> = brute_distances(g, source, alpha)
        .into_iter()
        .enumerate()
        .filter_map(|(v, d)| d.map(|d| (v, d)))
        .collect();
    all.sort_by(|x, y| {
        (x.0 != source)
            .cmp(&(y.0 != source))
            .then(x.1.total_cmp(&y.1))
            .then(x.0.cmp(&y.0))
    });
    all.truncate(e);
    all
}

/// Gaussian elimination with partial pivoting on a dense copy of `a x = b`.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Voltages of the members of `members` (source first) plus the sink, solved densely.
///
/// Members with no circuit edge are left at 0.
pub fn reference_voltages(g: &Graph, members: &[usize], alpha: f64) -> Vec<f64> {
    let a = dense(g);
    let m = members.len();
    let source = members[0];
    let sink_c = |v: usize| {
        if v == source {
            0.0
        } else {
            alpha * a[v].iter().sum::<f64>()
        }
    };
    let interior: Vec<usize> = (1..m)
        .filter(|&i| {
            let v = members[i];
            sink_c(v) > 0.0 || members.iter().any(|&w| a[v][w] > 0.0)
        })
        .collect();
    let k = interior.len();
    let mut mat = vec![vec![0.0; k]; k];
    let mut rhs = vec![0.0; k];
    for (r, &i) in interior.iter().enumerate() {
        let v = members[i];
        mat[r][r] = sink_c(v);
        for (j, &w) in members.iter().enumerate() {
            let c = a[v][w];
            if c == 0.0 {
                continue;
            }
            mat[r][r] += c;
            if j == 0 {
                rhs[r] += c;
            } else if let Some(q) = interior.iter().position(|&t| t == j) {
                mat[r][q] -= c;
            }
        }
    }
    let x = if k == 0 { vec![] } else { gauss_solve(mat, rhs) };
    let mut v = vec![0.0; m + 1];
    v[0] = 1.0;
    for (r, &i) in interior.iter().enumerate() {
        v[i] = x[r];
    }
    v
}

/// Expanded neighborhood with the given members, for driving the solver directly.
pub fn neighborhood(members: &[usize]) -> ExpandedNeighborhood {
    ExpandedNeighborhood {
        source: NodeId(members[0]),
        members: members.iter().map(|&v| NodeId(v)).collect(),
        distance: vec![0.0; members.len()],
        size_target: members.len(),
    }
}

/// Every source-to-sink path over the stored currents, by DFS, with totals summed from the source.
pub fn brute_paths(cs: &CircuitSolution) -> Vec<(Vec<NodeId>, f64)> {
    let mut out: Vec<(Vec<NodeId>, f64)> = Vec::new();
    let sink = cs.sink_index();
    let mut stack = vec![(vec![0usize], 0.0)];
    while let Some((path, total)) = stack.pop() {
        let last = *path.last().unwrap();
        for c in cs.currents.iter().filter(|c| c.from == last) {
            let mut next = path.clone();
            next.push(c.to);
            if c.to == sink {
                out.push((next.iter().map(|&i| cs.nodes[i]).collect(), total + c.amount));
            } else {
                stack.push((next, total + c.amount));
            }
        }
    }
    // higher total on a 1e-10 grid first, then node-id sequence
    out.sort_by(|a, b| {
        let ra = (a.1 / 1e-10).round() as i64;
        let rb = (b.1 / 1e-10).round() as i64;
        rb.cmp(&ra).then_with(|| a.0.cmp(&b.0))
    });
    out
}

/// Central finite difference of `f` at `x` along every coordinate.
pub fn finite_difference(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `max |a - b| / max(max |a|, max |b|)`, or the absolute error when both are tiny.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let scale = a.iter().chain(b).fold(0.0f64, |m, x| m.max(x.abs()));
    if scale < 1e-8 {
        diff
    } else {
        diff / scale
    }
}

/// Every connected labeled graph on `n` nodes as an edge list.
pub fn all_connected(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    (0u64..1 << pairs.len())
        .map(|mask| {
            pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &p)| p)
                .collect::<Vec<_>>()
        })
        .filter(|edges| connected(n, edges))
        .collect()
}

/// A random connected labeled graph on `n` nodes, by rejection.
pub fn random_connected_unweighted<R: Rng>(rng: &mut R, n: usize) -> Vec<(usize, usize)> {
    loop {
        let p = rng.random_range(0.2..0.8);
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|_| rng.random::<f64>() < p)
            .collect();
        if connected(n, &edges) {
            return edges;
        }
    }
}

pub fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let root = find(p, p[x]);
            p[x] = root;
        }
        p[x]
    }
    let mut parts = n;
    for &(u, v) in edges {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a] = b;
            parts -= 1;
        }
    }
    parts <= 1
}

pub fn unit_graph(n: usize, edges: &[(usize, usize)]) -> Graph {
    let weighted: Vec<(usize, usize, f64)> = edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
    Graph::from_edges(n, &weighted)
}
