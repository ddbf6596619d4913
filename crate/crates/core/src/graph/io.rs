use std::io::{BufRead, Write};

use super::{Graph, GraphBuilder};
use crate::error::{Error, Result};

/// Result of parsing an edge list.
#[derive(Clone, Debug)]
pub struct EdgeListLoad {
    pub graph: Graph,
    pub self_loops_skipped: usize,
    pub duplicates_collapsed: usize,
}

/// Parses whitespace-separated `u v` (or `u v w` when `weighted`) lines.
///
/// Blank lines and lines starting with `#` are ignored. Node labels are
/// arbitrary tokens and receive ids in order of first appearance.
pub fn load_edge_list<R: BufRead>(reader: R, weighted: bool) -> Result<EdgeListLoad> {
    let mut builder = GraphBuilder::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let expected = if weighted { 3 } else { 2 };
        if fields.len() != expected {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {expected} fields, found {}", fields.len()),
            });
        }
        let w = if weighted {
            let w: f64 = fields[2].parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid weight `{}`", fields[2]),
            })?;
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Domain {
                    line: lineno,
                    message: format!("conductance must be positive and finite, got {w}"),
                });
            }
            w
        } else {
            1.0
        };
        let u = builder.node(fields[0]);
        let v = builder.node(fields[1]);
        builder.add_edge(u, v, w);
    }
    let self_loops_skipped = builder.self_loops();
    let duplicates_collapsed = builder.duplicates();
    Ok(EdgeListLoad {
        graph: builder.build(),
        self_loops_skipped,
        duplicates_collapsed,
    })
}

impl Graph {
    /// Writes one line per undirected edge using the original node labels.
    pub fn write_edge_list<W: Write>(&self, mut out: W, weighted: bool) -> std::io::Result<()> {
        for (u, v, w) in self.edges() {
            if weighted {
                writeln!(out, "{} {} {}", self.name(u), self.name(v), w)?;
            } else {
                writeln!(out, "{} {}", self.name(u), self.name(v))?;
            }
        }
        Ok(())
    }
}
