//! Undirected weighted graphs with dense node ids.
//!
//! Nodes are numbered `0..n` in the order their labels were first seen.
//! Neighbor lists are kept sorted by id so every traversal in the crate
//! visits nodes in the same order regardless of how the graph was built.

mod augment;
mod io;
mod labels;

pub use augment::AugmentedGraph;
pub use io::{load_edge_list, EdgeListLoad};
pub use labels::{load_labels, LabelSet};

use std::collections::HashMap;
use std::fmt;

/// Dense node index in `0..n`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Bijection between external node labels and dense ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NameTable {
    names: Vec<String>,
    ids: HashMap<String, NodeId>,
}

impl NameTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id for `name`, assigning the next free id on first sight.
    pub fn intern(&mut self, name: &str) -> NodeId {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = NodeId(self.names.len());
        self.names.push(name.to_owned());
        self.ids.insert(name.to_owned(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<NodeId> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.names[id.0]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &str)> {
        self.names.iter().enumerate().map(|(i, s)| (NodeId(i), s.as_str()))
    }
}

/// Immutable undirected graph in compressed sparse row form.
///
/// Every undirected edge `{u, v}` is stored twice, once in each endpoint's
/// row, with the same conductance. Rows are sorted by neighbor id.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    conductances: Vec<f64>,
    strength: Vec<f64>,
    names: NameTable,
}

impl Graph {
    /// Builds a graph whose node labels are the decimal ids `0..n`.
    ///
    /// Duplicate undirected edges keep the first conductance; self-loops are dropped.
    ///
    /// # Panics
    ///
    /// Panics if an endpoint is `>= n` or a conductance is not positive.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Self {
        let mut builder = GraphBuilder::with_numeric_nodes(n);
        for &(u, v, w) in edges {
            assert!(u < n && v < n, "edge ({u}, {v}) out of range for {n} nodes");
            assert!(w > 0.0 && w.is_finite(), "conductance must be positive, got {w}");
            builder.add_edge(NodeId(u), NodeId(v), w);
        }
        builder.build()
    }

    /// Number of nodes.
    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn nodes(&self) -> impl DoubleEndedIterator<Item = NodeId> + ExactSizeIterator {
        (0..self.node_count()).map(NodeId)
    }

    /// `(neighbor, conductance)` pairs of `v`, ascending by neighbor id.
    pub fn neighbors(&self, v: NodeId) -> impl ExactSizeIterator<Item = (NodeId, f64)> + '_ {
        let range = self.offsets[v.0]..self.offsets[v.0 + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.conductances[range].iter().copied())
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.offsets[v.0 + 1] - self.offsets[v.0]
    }

    /// Sum of the conductances of the edges incident to `v`.
    pub fn strength(&self, v: NodeId) -> f64 {
        self.strength[v.0]
    }

    /// Conductance of edge `{u, v}`, if present.
    pub fn conductance(&self, u: NodeId, v: NodeId) -> Option<f64> {
        let range = self.offsets[u.0]..self.offsets[u.0 + 1];
        let row = &self.targets[range.clone()];
        row.binary_search(&v)
            .ok()
            .map(|i| self.conductances[range.start + i])
    }

    pub fn names(&self) -> &NameTable {
        &self.names
    }

    pub fn name(&self, v: NodeId) -> &str {
        self.names.name(v)
    }

    /// Each undirected edge once, as `(u, v, conductance)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.nodes().flat_map(move |u| {
            self.neighbors(u)
                .filter(move |&(v, _)| u < v)
                .map(move |(v, w)| (u, v, w))
        })
    }

    /// Sink-augmented view for expanding around `source`.
    pub fn augment(&self, source: NodeId, alpha: f64) -> AugmentedGraph<'_> {
        AugmentedGraph::new(self, source, alpha)
    }
}

/// Accumulates edges and produces a [`Graph`].
#[derive(Debug, Default)]
pub struct GraphBuilder {
    names: NameTable,
    edges: HashMap<(NodeId, NodeId), f64>,
    self_loops: usize,
    duplicates: usize,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn with_numeric_nodes(n: usize) -> Self {
        let mut builder = Self::new();
        for i in 0..n {
            builder.names.intern(&i.to_string());
        }
        builder
    }

    pub fn node(&mut self, name: &str) -> NodeId {
        self.names.intern(name)
    }

    /// Adds `{u, v}`. Returns `false` if the edge was a self-loop or a duplicate.
    pub fn add_edge(&mut self, u: NodeId, v: NodeId, conductance: f64) -> bool {
        if u == v {
            self.self_loops += 1;
            return false;
        }
        let key = if u < v { (u, v) } else { (v, u) };
        if self.edges.contains_key(&key) {
            self.duplicates += 1;
            return false;
        }
        self.edges.insert(key, conductance);
        true
    }

    pub fn self_loops(&self) -> usize {
        self.self_loops
    }

    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    pub fn build(self) -> Graph {
        let n = self.names.len();
        let mut rows: Vec<Vec<(NodeId, f64)>> = vec![Vec::new(); n];
        for (&(u, v), &w) in &self.edges {
            rows[u.0].push((v, w));
            rows[v.0].push((u, w));
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(2 * self.edges.len());
        let mut conductances = Vec::with_capacity(2 * self.edges.len());
        let mut strength = Vec::with_capacity(n);
        offsets.push(0);
        for row in &mut rows {
            row.sort_unstable_by_key(|&(v, _)| v);
            // summed in id order so the value never depends on hash iteration
            strength.push(row.iter().map(|&(_, w)| w).sum());
            for &(v, w) in row.iter() {
                targets.push(v);
                conductances.push(w);
            }
            offsets.push(targets.len());
        }
        Graph {
            offsets,
            targets,
            conductances,
            strength,
            names: self.names,
        }
    }
}
