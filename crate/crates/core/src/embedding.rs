//! Node embedding matrices and their text file format.
//!
//! The file starts with a `n d` header followed by one `name v1 ... vd` line
//! per node in id order. Values carry nine significant digits.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graph::{NameTable, NodeId};

/// Input (published) and context vectors for every node, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingMatrix {
    nodes: usize,
    dim: usize,
    input: Vec<f64>,
    context: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn zeros(nodes: usize, dim: usize) -> Self {
        EmbeddingMatrix {
            nodes,
            dim,
            input: vec![0.0; nodes * dim],
            context: vec![0.0; nodes * dim],
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn input(&self, v: NodeId) -> &[f64] {
        &self.input[v.index() * self.dim..(v.index() + 1) * self.dim]
    }

    pub fn input_mut(&mut self, v: NodeId) -> &mut [f64] {
        &mut self.input[v.index() * self.dim..(v.index() + 1) * self.dim]
    }

    pub fn context(&self, v: NodeId) -> &[f64] {
        &self.context[v.index() * self.dim..(v.index() + 1) * self.dim]
    }

    pub fn context_mut(&mut self, v: NodeId) -> &mut [f64] {
        &mut self.context[v.index() * self.dim..(v.index() + 1) * self.dim]
    }

    /// Published vectors as one row per node.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.input.chunks(self.dim.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.input.iter().chain(&self.context).all(|x| x.is_finite())
    }

    /// Writes the input vectors in the embedding text format.
    pub fn write_text<W: Write>(&self, mut out: W, names: &NameTable) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.nodes, self.dim)?;
        for v in 0..self.nodes {
            let v = NodeId(v);
            write!(out, "{}", names.name(v))?;
            for &x in self.input(v) {
                write!(out, " {}", format_significant(x))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Contents of an embedding file.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingFile {
    pub dim: usize,
    pub names: Vec<String>,
    /// One row per entry of `names`.
    pub vectors: Vec<Vec<f64>>,
}

impl EmbeddingFile {
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::Parse {
            line: 1,
            message: "missing `n d` header".into(),
        })?;
        let header = header?;
        let parsed: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| Error::Parse {
                line: 1,
                message: format!("invalid header `{header}`"),
            })?;
        let [n, dim] = parsed[..] else {
            return Err(Error::Parse {
                line: 1,
                message: format!("invalid header `{header}`"),
            });
        };
        let mut names = Vec::with_capacity(n);
        let mut vectors = Vec::with_capacity(n);
        for (idx, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let mut fields = line.split_whitespace();
            let name = fields.next().unwrap_or_default().to_owned();
            let row: Vec<f64> = fields
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|_| Error::Parse {
                    line: lineno,
                    message: "invalid vector entry".into(),
                })?;
            if row.len() != dim {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected {dim} values, found {}", row.len()),
                });
            }
            names.push(name);
            vectors.push(row);
        }
        if names.len() != n {
            return Err(Error::structure(format!(
                "header announces {n} nodes, file has {}",
                names.len()
            )));
        }
        Ok(EmbeddingFile { dim, names, vectors })
    }

    /// Rows reordered to follow `names`' ids.
    pub fn aligned_rows(&self, names: &NameTable) -> Result<Vec<Vec<f64>>> {
        if self.names.len() != names.len() {
            return Err(Error::structure(format!(
                "embedding has {} nodes, graph has {}",
                self.names.len(),
                names.len()
            )));
        }
        let mut rows = vec![Vec::new(); names.len()];
        for (name, row) in self.names.iter().zip(&self.vectors) {
            let id = names
                .get(name)
                .ok_or_else(|| Error::structure(format!("node `{name}` not in graph")))?;
            rows[id.index()] = row.clone();
        }
        Ok(rows)
    }
}

/// Formats `x` with nine significant digits, like C's `%.9g`.
pub fn format_significant(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..9).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (8 - exp) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_owned()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
