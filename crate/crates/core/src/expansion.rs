//! Distance-driven neighborhood expansion.
//!
//! Hop lengths come from the sink-augmented graph: stepping from `s` to `t`
//! costs `log10(deg(s)^2 / C(s,t)^2)`, so hubs (whose degree is inflated
//! further by their sink edge) are expensive to pass through. Distances
//! accumulate along paths and the expansion settles nodes nearest-first.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::io::Write;

use crate::error::{Error, Result};
use crate::graph::{AugmentedGraph, Graph, NodeId};
use crate::parallel::map_indexed;

/// Nodes settled around one source, in the order they were expanded.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpandedNeighborhood {
    pub source: NodeId,
    /// Expansion order; `members[0]` is the source.
    pub members: Vec<NodeId>,
    /// Circuit distance of each member, aligned with `members`.
    pub distance: Vec<f64>,
    pub size_target: usize,
}

impl ExpandedNeighborhood {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.members.contains(&v)
    }
}

/// Length of the hop `s -> t`, clamped below at zero.
pub fn edge_length(ag: &AugmentedGraph<'_>, s: NodeId, t: NodeId) -> Result<f64> {
    let c = ag.base().conductance(s, t).ok_or(Error::NotAnEdge {
        from: s.index(),
        to: t.index(),
    })?;
    Ok(hop_length(ag.weighted_degree(s), c))
}

#[inline]
fn hop_length(degree: f64, conductance: f64) -> f64 {
    ((degree * degree) / (conductance * conductance)).log10().max(0.0)
}

#[derive(Clone, Copy, PartialEq)]
struct Pending {
    distance: f64,
    node: NodeId,
}

impl Eq for Pending {}

impl Ord for Pending {
    // reversed: BinaryHeap is a max-heap and we want the nearest, then the smallest id
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .distance
            .total_cmp(&self.distance)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Grows the neighborhood of `ag.source()` until it holds `size` nodes or
/// the source's component is exhausted.
///
/// Ties on distance go to the smaller node id.
pub fn expand(ag: &AugmentedGraph<'_>, size: usize) -> ExpandedNeighborhood {
    assert!(size >= 1, "expansion size must be at least 1");
    let graph = ag.base();
    let source = ag.source();
    let mut members = Vec::with_capacity(size);
    let mut distance = Vec::with_capacity(size);
    let mut settled: HashSet<NodeId> = HashSet::new();
    let mut tentative: HashMap<NodeId, f64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    tentative.insert(source, 0.0);
    heap.push(Pending {
        distance: 0.0,
        node: source,
    });

    while let Some(Pending { distance: d, node }) = heap.pop() {
        if members.len() == size {
            break;
        }
        if !settled.insert(node) {
            continue;
        }
        members.push(node);
        distance.push(d);
        let deg = ag.weighted_degree(node);
        for (next, c) in graph.neighbors(node) {
            if settled.contains(&next) {
                continue;
            }
            let candidate = d + hop_length(deg, c);
            let better = tentative.get(&next).is_none_or(|&old| candidate < old);
            if better {
                tentative.insert(next, candidate);
                heap.push(Pending {
                    distance: candidate,
                    node: next,
                });
            }
        }
    }

    ExpandedNeighborhood {
        source,
        members,
        distance,
        size_target: size,
    }
}

/// Expands every node of `graph`, each against its own sink augmentation.
///
/// The result is indexed by source id and is identical for any `threads`.
pub fn expand_all(
    graph: &Graph,
    alpha: f64,
    size: usize,
    threads: usize,
) -> Result<Vec<ExpandedNeighborhood>> {
    map_indexed(graph.node_count(), threads, |i| {
        expand(&graph.augment(NodeId(i), alpha), size)
    })
}

/// Writes `u: v1 v2 ... ve` per neighborhood using node labels.
pub fn write_dump<W: Write>(
    mut out: W,
    graph: &Graph,
    neighborhoods: &[ExpandedNeighborhood],
) -> std::io::Result<()> {
    for ne in neighborhoods {
        write!(out, "{}:", graph.name(ne.source))?;
        for &v in &ne.members {
            write!(out, " {}", graph.name(v))?;
        }
        writeln!(out)?;
    }
    Ok(())
}
