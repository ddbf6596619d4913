//! Current-driven refinement of expanded neighborhoods.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use crate::circuit::solve_voltages;
use crate::error::{Error, Result};
use crate::expansion::{expand, ExpandedNeighborhood};
use crate::graph::{AugmentedGraph, Graph, NodeId};
use crate::parallel::map_indexed;
use crate::paths::{CurrentPath, PathSearch};

/// Default cap on the number of paths examined per source.
pub const DEFAULT_MAX_PATHS: usize = 10_000;

/// Members collected from the strongest source-to-sink paths.
#[derive(Clone, Debug, PartialEq)]
pub struct RefinedNeighborhood {
    pub source: NodeId,
    /// Order of first inclusion; `members[0]` is the source.
    pub members: Vec<NodeId>,
    /// Paths consumed, in the order they were added.
    pub paths: Vec<CurrentPath>,
    pub size_target: usize,
    /// Set when the path supply ran out before `size_target` was reached.
    pub exhausted: bool,
}

impl AsRef<[NodeId]> for RefinedNeighborhood {
    fn as_ref(&self) -> &[NodeId] {
        &self.members
    }
}

/// Adds the nodes of successive highest-current paths until `size` members are held.
pub fn refine(
    ne: &ExpandedNeighborhood,
    ag: &AugmentedGraph<'_>,
    size: usize,
    max_paths: usize,
) -> RefinedNeighborhood {
    assert!(size >= 1, "refinement size must be at least 1");
    let sink = ag.sink_id();
    let mut members = vec![ne.source];
    let mut paths = Vec::new();
    if members.len() < size {
        let cs = solve_voltages(ne, ag);
        let mut seen: HashSet<NodeId> = members.iter().copied().collect();
        for path in PathSearch::new(&cs).take(max_paths) {
            for &v in &path.nodes {
                if v != sink && seen.insert(v) {
                    members.push(v);
                }
            }
            paths.push(path);
            if members.len() >= size {
                break;
            }
        }
    }
    RefinedNeighborhood {
        source: ne.source,
        exhausted: members.len() < size,
        members,
        paths,
        size_target: size,
    }
}

/// Sizes and knobs for building both neighborhood phases.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NeighborhoodParams {
    pub alpha: f64,
    pub expansion_size: usize,
    pub refinement_size: usize,
    pub max_paths: usize,
}

impl Default for NeighborhoodParams {
    fn default() -> Self {
        NeighborhoodParams {
            alpha: 1.0,
            expansion_size: 1200,
            refinement_size: 800,
            max_paths: DEFAULT_MAX_PATHS,
        }
    }
}

/// Both phases for every source, indexed by source id.
pub fn build_neighborhoods(
    graph: &Graph,
    params: &NeighborhoodParams,
    threads: usize,
) -> Result<Vec<(ExpandedNeighborhood, RefinedNeighborhood)>> {
    if params.refinement_size > params.expansion_size {
        return Err(Error::config(format!(
            "refinement size {} exceeds expansion size {}",
            params.refinement_size, params.expansion_size
        )));
    }
    if params.refinement_size == 0 {
        return Err(Error::config("neighborhood sizes must be at least 1"));
    }
    if !(params.alpha > 0.0 && params.alpha.is_finite()) {
        return Err(Error::config("alpha must be positive"));
    }
    map_indexed(graph.node_count(), threads, |i| {
        let ag = graph.augment(NodeId(i), params.alpha);
        let ne = expand(&ag, params.expansion_size);
        let nr = refine(&ne, &ag, params.refinement_size, params.max_paths);
        (ne, nr)
    })
}

/// Writes `u: v1 v2 ... | path_count total_current_first` per neighborhood.
pub fn write_dump<W: Write>(
    mut out: W,
    graph: &Graph,
    neighborhoods: &[RefinedNeighborhood],
) -> std::io::Result<()> {
    for nr in neighborhoods {
        write!(out, "{}:", graph.name(nr.source))?;
        for &v in &nr.members {
            write!(out, " {}", graph.name(v))?;
        }
        let first = nr.paths.first().map_or(0.0, |p| p.total_current);
        writeln!(out, " | {} {}", nr.paths.len(), first)?;
    }
    Ok(())
}

/// Reads a refined dump back into per-source member lists indexed by id.
///
/// Sources missing from the dump get a singleton neighborhood.
pub fn read_dump<R: BufRead>(reader: R, graph: &Graph) -> Result<Vec<Vec<NodeId>>> {
    let names = graph.names();
    let mut out: Vec<Option<Vec<NodeId>>> = vec![None; graph.node_count()];
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let parse_err = |message: &str| Error::Parse {
            line: lineno,
            message: message.to_owned(),
        };
        let (head, rest) = trimmed.split_once(':').ok_or_else(|| parse_err("missing `:`"))?;
        let members_text = rest.split_once('|').map_or(rest, |(m, _)| m);
        let lookup = |name: &str| {
            names.get(name).ok_or_else(|| Error::UnknownNode {
                line: lineno,
                name: name.to_owned(),
            })
        };
        let source = lookup(head.trim())?;
        let members = members_text
            .split_whitespace()
            .map(lookup)
            .collect::<Result<Vec<_>>>()?;
        if members.first() != Some(&source) {
            return Err(parse_err("member list must start with the source"));
        }
        if out[source.index()].replace(members).is_some() {
            return Err(parse_err("source listed twice"));
        }
    }
    Ok(out
        .into_iter()
        .enumerate()
        .map(|(i, m)| m.unwrap_or_else(|| vec![NodeId(i)]))
        .collect())
}
