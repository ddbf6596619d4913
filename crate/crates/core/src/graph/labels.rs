use std::collections::{BTreeSet, HashMap};
use std::io::BufRead;

use super::{NameTable, NodeId};
use crate::error::{Error, Result};

/// Per-node label sets over a dense label vocabulary `0..L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelSet {
    labels: Vec<BTreeSet<usize>>,
    label_names: Vec<String>,
}

impl LabelSet {
    /// A label set with `n` nodes and no labels.
    pub fn empty(n: usize) -> Self {
        LabelSet {
            labels: vec![BTreeSet::new(); n],
            label_names: Vec::new(),
        }
    }

    /// Builds a label set from per-node label ids; label names are the ids themselves.
    pub fn from_assignments(assignments: Vec<Vec<usize>>) -> Self {
        let count = assignments.iter().flatten().map(|&l| l + 1).max().unwrap_or(0);
        LabelSet {
            labels: assignments.into_iter().map(|a| a.into_iter().collect()).collect(),
            label_names: (0..count).map(|l| l.to_string()).collect(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn label_count(&self) -> usize {
        self.label_names.len()
    }

    pub fn labels_of(&self, v: NodeId) -> &BTreeSet<usize> {
        &self.labels[v.0]
    }

    pub fn has(&self, v: NodeId, label: usize) -> bool {
        self.labels[v.0].contains(&label)
    }

    pub fn label_name(&self, label: usize) -> &str {
        &self.label_names[label]
    }

    /// Nodes carrying at least one label, ascending.
    pub fn labeled_nodes(&self) -> Vec<NodeId> {
        (0..self.labels.len())
            .filter(|&i| !self.labels[i].is_empty())
            .map(NodeId)
            .collect()
    }
}

/// Parses `node label1 label2 ...` lines against the graph's name table.
///
/// Label ids are assigned in order of first appearance.
pub fn load_labels<R: BufRead>(reader: R, names: &NameTable) -> Result<LabelSet> {
    let mut set = LabelSet::empty(names.len());
    let mut label_ids: HashMap<String, usize> = HashMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let node = fields.next().unwrap_or_default();
        let id = names.get(node).ok_or_else(|| Error::UnknownNode {
            line: idx + 1,
            name: node.to_owned(),
        })?;
        for label in fields {
            let next = label_ids.len();
            let lid = *label_ids.entry(label.to_owned()).or_insert(next);
            if lid == set.label_names.len() {
                set.label_names.push(label.to_owned());
            }
            set.labels[id.0].insert(lid);
        }
    }
    Ok(set)
}
