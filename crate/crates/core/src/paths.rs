//! Best-first enumeration of source-to-sink paths by total current.
//!
//! Currents in a solved circuit only run downhill, so they form a DAG over
//! the circuit nodes. For each node we precompute the largest total current
//! any remaining path to the sink can still collect; a partial path is then
//! scored by its collected current plus that bound, which is exact. Popping
//! the highest score first yields complete paths in non-increasing total.
//!
//! Totals are ranked on a grid of [`TOTAL_QUANTUM`]: paths whose totals
//! round to the same grid point are tied and ordered lexicographically by
//! node-id sequence. On unit-weight graphs the interior currents of a path
//! telescope, so large groups of paths carry mathematically equal totals
//! that differ only by rounding noise; the grid makes their order well
//! defined and lets the search walk a tie group in lexicographic order.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::circuit::CircuitSolution;
use crate::graph::NodeId;

/// Resolution at which path totals are compared.
pub const TOTAL_QUANTUM: f64 = 1e-10;

/// Grid point of a total; larger is better.
pub fn total_rank(total: f64) -> i64 {
    (total / TOTAL_QUANTUM).round() as i64
}

/// Ordering used for paths: higher ranked total first, then smaller node-id sequence.
pub fn path_order(a: (f64, &[NodeId]), b: (f64, &[NodeId])) -> Ordering {
    total_rank(b.0).cmp(&total_rank(a.0)).then_with(|| a.1.cmp(b.1))
}

/// One source-to-sink path. `nodes` ends with the sink id.
#[derive(Clone, Debug, PartialEq)]
pub struct CurrentPath {
    pub nodes: Vec<NodeId>,
    /// Sum of edge currents, accumulated from the source end.
    pub total_current: f64,
}

struct Entry {
    rank: i64,
    collected: f64,
    // ranks of the visited nodes (rank order == global id order)
    seq: Vec<u32>,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // max-heap: higher rank first, then lexicographically smaller sequence
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank
            .cmp(&other.rank)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Rounding allowance between a bound and the total of a completion.
fn slack(x: f64) -> f64 {
    1e-12 * x.abs().max(1.0)
}

/// Lazy best-first search over the downhill DAG of a circuit solution.
///
/// Yields paths in [`path_order`]; the sink sorts after every member in the
/// tie-break.
pub struct PathSearch<'a> {
    cs: &'a CircuitSolution,
    // local index of each rank, and rank of each local index
    order: Vec<usize>,
    id_rank: Vec<u32>,
    remaining: Vec<f64>,
    partial: BinaryHeap<Entry>,
    complete: BinaryHeap<Entry>,
}

impl<'a> PathSearch<'a> {
    pub fn new(cs: &'a CircuitSolution) -> Self {
        let n = cs.len();
        let sink = cs.sink_index();

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| cs.nodes[i]);
        let mut id_rank = vec![0u32; n];
        for (r, &i) in order.iter().enumerate() {
            id_rank[i] = r as u32;
        }

        // best remaining current from each node, filled sink-first by voltage
        let mut by_voltage: Vec<usize> = (0..n).collect();
        by_voltage.sort_by(|&a, &b| cs.voltage[a].total_cmp(&cs.voltage[b]));
        let mut remaining = vec![f64::NEG_INFINITY; n];
        remaining[sink] = 0.0;
        for &i in &by_voltage {
            if i == sink {
                continue;
            }
            remaining[i] = cs
                .outgoing(i)
                .map(|c| c.amount + remaining[c.to])
                .fold(f64::NEG_INFINITY, f64::max);
        }

        let mut partial = BinaryHeap::new();
        if remaining[0] > f64::NEG_INFINITY {
            partial.push(Entry {
                rank: upper_rank(remaining[0]),
                collected: 0.0,
                seq: vec![id_rank[0]],
            });
        }
        PathSearch {
            cs,
            order,
            id_rank,
            remaining,
            partial,
            complete: BinaryHeap::new(),
        }
    }

    fn expand(&mut self, p: Entry) {
        let sink = self.cs.sink_index();
        let last = self.order[*p.seq.last().expect("non-empty") as usize];
        for c in self.cs.outgoing(last) {
            let collected = p.collected + c.amount;
            if c.to != sink && self.remaining[c.to] == f64::NEG_INFINITY {
                continue;
            }
            let mut seq = Vec::with_capacity(p.seq.len() + 1);
            seq.extend_from_slice(&p.seq);
            seq.push(self.id_rank[c.to]);
            if c.to == sink {
                self.complete.push(Entry {
                    rank: total_rank(collected),
                    collected,
                    seq,
                });
            } else {
                self.partial.push(Entry {
                    rank: upper_rank(collected + self.remaining[c.to]),
                    collected,
                    seq,
                });
            }
        }
    }
}

impl Iterator for PathSearch<'_> {
    type Item = CurrentPath;

    fn next(&mut self) -> Option<CurrentPath> {
        loop {
            let emit = match (self.complete.peek(), self.partial.peek()) {
                (Some(done), Some(p)) => done > p,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (None, None) => return None,
            };
            if emit {
                let done = self.complete.pop().expect("peeked");
                return Some(CurrentPath {
                    nodes: done
                        .seq
                        .iter()
                        .map(|&r| self.cs.nodes[self.order[r as usize]])
                        .collect(),
                    total_current: done.collected,
                });
            }
            let p = self.partial.pop().expect("peeked");
            self.expand(p);
        }
    }
}

fn upper_rank(bound: f64) -> i64 {
    total_rank(bound + slack(bound))
}

/// The first `k_max` paths of [`PathSearch`]. Empty if no current reaches the sink.
pub fn enumerate_paths(cs: &CircuitSolution, k_max: usize) -> Vec<CurrentPath> {
    PathSearch::new(cs).take(k_max).collect()
}
