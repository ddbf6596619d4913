use super::{Graph, NodeId};

/// A graph viewed together with a grounded universal sink.
///
/// Every node except `source` is wired to the sink with conductance
/// `alpha` times the sum of its own edge conductances. The sink has id `n`
/// and is never part of the base graph's adjacency.
#[derive(Clone, Copy, Debug)]
pub struct AugmentedGraph<'g> {
    base: &'g Graph,
    source: NodeId,
    alpha: f64,
}

impl<'g> AugmentedGraph<'g> {
    /// # Panics
    ///
    /// Panics if `source` is out of range or `alpha` is not positive.
    pub fn new(base: &'g Graph, source: NodeId, alpha: f64) -> Self {
        assert!(source.0 < base.node_count(), "source {source} out of range");
        assert!(alpha > 0.0 && alpha.is_finite(), "alpha must be positive, got {alpha}");
        AugmentedGraph {
            base,
            source,
            alpha,
        }
    }

    pub fn base(&self) -> &'g Graph {
        self.base
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sink_id(&self) -> NodeId {
        NodeId(self.base.node_count())
    }

    /// Conductance of the edge between `v` and the sink; zero for the source.
    pub fn sink_conductance(&self, v: NodeId) -> f64 {
        if v == self.source {
            0.0
        } else {
            self.alpha * self.base.strength(v)
        }
    }

    /// Sink conductances for every base node, indexed by id.
    pub fn sink_conductances(&self) -> Vec<f64> {
        self.base.nodes().map(|v| self.sink_conductance(v)).collect()
    }

    /// Weighted degree in the augmented graph: base edges plus the sink edge.
    pub fn weighted_degree(&self, v: NodeId) -> f64 {
        self.base.strength(v) + self.sink_conductance(v)
    }
}
