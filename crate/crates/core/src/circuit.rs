//! Voltages and currents on the circuit spanned by an expanded neighborhood.
//!
//! The circuit holds the members of an [`ExpandedNeighborhood`], the base
//! edges among them, and a grounded sink wired to every member except the
//! source. Sink conductances are taken from the full graph, so a member whose
//! edges mostly leave the neighborhood leaks most of its current to ground.

use std::collections::HashMap;
use std::io::Write;

use crate::expansion::ExpandedNeighborhood;
use crate::graph::{AugmentedGraph, Graph, NodeId};
use crate::linalg::{solve_spd, SparseSym};

/// Voltage drops at or below this carry no current.
pub const VOLTAGE_EPSILON: f64 = 1e-12;

/// Relative residual the voltage solve must reach.
pub const SOLVE_TOLERANCE: f64 = 1e-10;

/// A current flowing downhill from `from` to `to`, both local indices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Current {
    pub from: usize,
    pub to: usize,
    pub amount: f64,
}

/// Solved circuit for one source.
///
/// Local index `0` is the source and the last local index is the sink.
#[derive(Clone, Debug)]
pub struct CircuitSolution {
    /// Members of the neighborhood followed by the sink id.
    pub nodes: Vec<NodeId>,
    pub voltage: Vec<f64>,
    /// Downhill currents; every entry has `voltage[from] > voltage[to]`.
    pub currents: Vec<Current>,
    /// Members with no circuit edge at all, pinned to zero volts.
    pub isolated: usize,
    /// Relative residual of the harmonic equations after the solve.
    pub residual: f64,
    outgoing: Vec<Vec<usize>>,
}

impl CircuitSolution {
    /// Assembles a solution from explicit voltages and downhill currents.
    ///
    /// `nodes` lists the members (source first) followed by the sink.
    pub fn from_currents(nodes: Vec<NodeId>, voltage: Vec<f64>, currents: Vec<Current>) -> Self {
        assert_eq!(nodes.len(), voltage.len(), "one voltage per node");
        let mut outgoing = vec![Vec::new(); nodes.len()];
        for (k, c) in currents.iter().enumerate() {
            outgoing[c.from].push(k);
        }
        CircuitSolution {
            nodes,
            voltage,
            currents,
            isolated: 0,
            residual: 0.0,
            outgoing,
        }
    }

    pub fn source(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn sink(&self) -> NodeId {
        self.nodes[self.sink_index()]
    }

    pub fn sink_index(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Currents leaving local node `i`, in insertion order.
    pub fn outgoing(&self, i: usize) -> impl Iterator<Item = &Current> + '_ {
        self.outgoing[i].iter().map(|&c| &self.currents[c])
    }

    /// Writes `voltage <name> <v>` and `current <from> <to> <i>` lines.
    pub fn write_debug<W: Write>(&self, mut out: W, graph: &Graph) -> std::io::Result<()> {
        let label = |i: usize| -> String {
            if i == self.sink_index() {
                "z".to_owned()
            } else {
                graph.name(self.nodes[i]).to_owned()
            }
        };
        for (i, v) in self.voltage.iter().enumerate() {
            writeln!(out, "voltage {} {}", label(i), v)?;
        }
        for c in &self.currents {
            writeln!(out, "current {} {} {}", label(c.from), label(c.to), c.amount)?;
        }
        Ok(())
    }
}

/// Solves the circuit on `ne` with the source held at 1 V and the sink at 0 V.
pub fn solve_voltages(ne: &ExpandedNeighborhood, ag: &AugmentedGraph<'_>) -> CircuitSolution {
    let graph = ag.base();
    let m = ne.members.len();
    let sink = m;
    let local: HashMap<NodeId, usize> =
        ne.members.iter().enumerate().map(|(i, &v)| (v, i)).collect();

    let mut nodes = ne.members.clone();
    nodes.push(ag.sink_id());

    // unknowns are the interior members that touch at least one circuit edge
    let mut unknown = vec![usize::MAX; m];
    let mut isolated = 0;
    let mut count = 0;
    for (i, &v) in ne.members.iter().enumerate().skip(1) {
        let touches = ag.sink_conductance(v) > 0.0
            || graph.neighbors(v).any(|(w, _)| local.contains_key(&w));
        if touches {
            unknown[i] = count;
            count += 1;
        } else {
            isolated += 1;
        }
    }

    let mut system = SparseSym::new(count);
    let mut rhs = vec![0.0; count];
    for (i, &v) in ne.members.iter().enumerate().skip(1) {
        let row = unknown[i];
        if row == usize::MAX {
            continue;
        }
        let mut diag = ag.sink_conductance(v);
        for (w, c) in graph.neighbors(v) {
            let Some(&j) = local.get(&w) else { continue };
            diag += c;
            if j == 0 {
                rhs[row] += c;
            } else if unknown[j] != usize::MAX {
                system.off[row].push((unknown[j], -c));
            }
        }
        system.diag[row] = diag;
    }

    let solved = solve_spd(&system, &rhs, SOLVE_TOLERANCE);
    let residual = if count == 0 {
        0.0
    } else {
        system.relative_residual(&solved, &rhs)
    };

    let mut voltage = vec![0.0; m + 1];
    voltage[0] = 1.0;
    for i in 1..m {
        if unknown[i] != usize::MAX {
            voltage[i] = solved[unknown[i]].clamp(0.0, 1.0);
        }
    }

    let mut currents = Vec::new();
    for (i, &v) in ne.members.iter().enumerate() {
        for (w, c) in graph.neighbors(v) {
            let Some(&j) = local.get(&w) else { continue };
            if j <= i {
                continue;
            }
            let drop = voltage[i] - voltage[j];
            if drop > VOLTAGE_EPSILON {
                currents.push(Current { from: i, to: j, amount: c * drop });
            } else if -drop > VOLTAGE_EPSILON {
                currents.push(Current { from: j, to: i, amount: -c * drop });
            }
        }
        if i > 0 && voltage[i] > VOLTAGE_EPSILON {
            currents.push(Current {
                from: i,
                to: sink,
                amount: ag.sink_conductance(v) * voltage[i],
            });
        }
    }

    CircuitSolution {
        isolated,
        residual,
        ..CircuitSolution::from_currents(nodes, voltage, currents)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::expand;

    fn neighborhood(source: usize, members: &[usize]) -> ExpandedNeighborhood {
        ExpandedNeighborhood {
            source: NodeId(source),
            members: members.iter().map(|&i| NodeId(i)).collect(),
            distance: vec![0.0; members.len()],
            size_target: members.len(),
        }
    }

    #[test]
    fn unit_chain_splits_voltage() {
        // u - a with C(a, z) = 1: node a needs strength 1 and alpha 1
        let g = Graph::from_edges(2, &[(0, 1, 1.0)]);
        let ag = g.augment(NodeId(0), 1.0);
        let cs = solve_voltages(&expand(&ag, 2), &ag);
        assert_eq!(cs.voltage, vec![1.0, 0.5, 0.0]);
        assert_eq!(
            cs.currents,
            vec![
                Current { from: 0, to: 1, amount: 0.5 },
                Current { from: 1, to: 2, amount: 0.5 },
            ]
        );
    }

    #[test]
    fn leaf_against_heavy_sink() {
        // node 1 touches u and 47 outside nodes, so C(1, z) = 48
        let mut edges = vec![(0, 1, 1.0)];
        edges.extend((2..49).map(|i| (1, i, 1.0)));
        let g = Graph::from_edges(49, &edges);
        let ag = g.augment(NodeId(0), 1.0);
        let cs = solve_voltages(&neighborhood(0, &[0, 1]), &ag);
        assert!((cs.voltage[1] - 1.0 / 49.0).abs() < 1e-15);
    }

    #[test]
    fn doubled_conductances() {
        let g = Graph::from_edges(2, &[(0, 1, 2.0)]);
        let ag = g.augment(NodeId(0), 1.0);
        let cs = solve_voltages(&neighborhood(0, &[0, 1]), &ag);
        assert!((cs.voltage[1] - 0.5).abs() < 1e-15);
        assert!((cs.currents[0].amount - 1.0).abs() < 1e-15);
    }

    #[test]
    fn isolated_member_pinned_to_ground() {
        let g = Graph::from_edges(3, &[(0, 1, 1.0)]);
        let ag = g.augment(NodeId(0), 1.0);
        let cs = solve_voltages(&neighborhood(0, &[0, 1, 2]), &ag);
        assert_eq!(cs.isolated, 1);
        assert_eq!(cs.voltage[2], 0.0);
        assert!(cs.currents.iter().all(|c| c.from != 2 && c.to != 2));
    }

    #[test]
    fn source_alone() {
        let g = Graph::from_edges(1, &[]);
        let ag = g.augment(NodeId(0), 1.0);
        let cs = solve_voltages(&neighborhood(0, &[0]), &ag);
        assert_eq!(cs.voltage, vec![1.0, 0.0]);
        assert!(cs.currents.is_empty());
    }

    #[test]
    fn debug_dump_lines() {
        let g = Graph::from_edges(2, &[(0, 1, 1.0)]);
        let ag = g.augment(NodeId(0), 1.0);
        let cs = solve_voltages(&neighborhood(0, &[0, 1]), &ag);
        let mut out = Vec::new();
        cs.write_debug(&mut out, &g).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "voltage 0 1\nvoltage 1 0.5\nvoltage z 0\ncurrent 0 1 0.5\ncurrent 1 z 0.5\n"
        );
    }
}
