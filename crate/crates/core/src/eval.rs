//! Downstream evaluation: one-vs-rest logistic regression scored by
//! Micro-F1 under k-fold cross validation, and embedding stability checks.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::embedding::EmbeddingFile;
use crate::error::{Error, Result};
use crate::graph::{LabelSet, NodeId};
use crate::skipgram::sigmoid;

/// `2 TP / (2 TP + FP + FN)`, zero when there is nothing to score.
pub fn micro_f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        (2 * tp) as f64 / denom as f64
    }
}

/// Binary logistic model with an unregularized bias.
#[derive(Clone, Debug, PartialEq)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub l2_lambda: f64,
}

/// Mean log-loss plus `λ/2 ‖w‖²`.
pub fn logistic_loss(weights: &[f64], bias: f64, x: &[Vec<f64>], y: &[bool], lambda: f64) -> f64 {
    let n = x.len() as f64;
    let data: f64 = x
        .iter()
        .zip(y)
        .map(|(row, &yi)| {
            let z = dot(weights, row) + bias;
            // log(1 + e^z) - y z
            let softplus = z.max(0.0) + (-z.abs()).exp().ln_1p();
            softplus - if yi { z } else { 0.0 }
        })
        .sum();
    data / n + 0.5 * lambda * dot(weights, weights)
}

/// Gradient of [`logistic_loss`] as `(dw, db)`.
pub fn logistic_gradient(
    weights: &[f64],
    bias: f64,
    x: &[Vec<f64>],
    y: &[bool],
    lambda: f64,
) -> (Vec<f64>, f64) {
    let n = x.len() as f64;
    let mut dw = vec![0.0; weights.len()];
    let mut db = 0.0;
    for (row, &yi) in x.iter().zip(y) {
        let r = sigmoid(dot(weights, row) + bias) - if yi { 1.0 } else { 0.0 };
        for (g, xi) in dw.iter_mut().zip(row) {
            *g += r * xi;
        }
        db += r;
    }
    for (g, w) in dw.iter_mut().zip(weights) {
        *g = *g / n + lambda * w;
    }
    (dw, db / n)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl LogisticModel {
    /// Full-batch gradient descent with a fixed step from the curvature bound.
    pub fn fit(x: &[Vec<f64>], y: &[bool], lambda: f64, max_iter: usize, tolerance: f64) -> Self {
        let dim = x.first().map_or(0, Vec::len);
        let mut weights = vec![0.0; dim];
        let mut bias = 0.0;
        let mean_sq = x.iter().map(|r| dot(r, r) + 1.0).sum::<f64>() / x.len().max(1) as f64;
        let step = 1.0 / (0.25 * mean_sq + lambda);
        for _ in 0..max_iter {
            let (dw, db) = logistic_gradient(&weights, bias, x, y, lambda);
            let norm = dw.iter().fold(db.abs(), |m, g| m.max(g.abs()));
            if norm < tolerance {
                break;
            }
            for (w, g) in weights.iter_mut().zip(&dw) {
                *w -= step * g;
            }
            bias -= step * db;
        }
        LogisticModel {
            weights,
            bias,
            l2_lambda: lambda,
        }
    }

    pub fn probability(&self, row: &[f64]) -> f64 {
        sigmoid(dot(&self.weights, row) + self.bias)
    }

    pub fn predict(&self, row: &[f64]) -> bool {
        self.probability(row) >= 0.5
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalConfig {
    pub folds: usize,
    /// Fraction of each training split actually used for fitting.
    pub label_fraction: f64,
    pub l2_lambda: f64,
    pub max_iter: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            folds: 10,
            label_fraction: 1.0,
            l2_lambda: 1e-3,
            max_iter: 500,
            tolerance: 1e-8,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub fold_scores: Vec<f64>,
    pub mean_micro_f1: f64,
    pub labeled_fraction: f64,
    pub folds: usize,
    /// (label, fold) combinations whose training split had no positive example.
    pub labels_without_positives: usize,
}

impl EvalReport {
    /// `key=value` lines.
    pub fn to_lines(&self) -> String {
        let mut s = format!(
            "folds={}\nlabeled_fraction={}\nlabels_without_positives={}\n",
            self.folds, self.labeled_fraction, self.labels_without_positives
        );
        for (i, f) in self.fold_scores.iter().enumerate() {
            s += &format!("fold.{i}.micro_f1={f}\n");
        }
        s += &format!("mean_micro_f1={}\n", self.mean_micro_f1);
        s
    }

    /// Tab-separated `fold<TAB>micro_f1` table ending with the mean.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("fold\tmicro_f1\n");
        for (i, f) in self.fold_scores.iter().enumerate() {
            s += &format!("{i}\t{f}\n");
        }
        s += &format!("mean\t{}\n", self.mean_micro_f1);
        s
    }
}

/// Column means and deviations of the training rows.
struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    fn fit(rows: &[&[f64]]) -> Self {
        let dim = rows.first().map_or(0, |r| r.len());
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; dim];
        for r in rows {
            for (m, x) in mean.iter_mut().zip(r.iter()) {
                *m += x / n;
            }
        }
        let mut var = vec![0.0; dim];
        for r in rows {
            for ((v, x), m) in var.iter_mut().zip(r.iter()).zip(&mean) {
                *v += (x - m) * (x - m) / n;
            }
        }
        let scale = var
            .into_iter()
            .map(|v| if v > 0.0 { v.sqrt() } else { 1.0 })
            .collect();
        Standardizer { mean, scale }
    }

    fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((x, m), s)| (x - m) / s)
            .collect()
    }
}

/// Cross-validated Micro-F1 of one-vs-rest logistic regression on `features`.
///
/// `features[i]` is the vector of node `i`. Only nodes with at least one
/// label are evaluated; each label is predicted independently at 0.5.
pub fn train_classifier(
    features: &[Vec<f64>],
    labels: &LabelSet,
    cfg: &EvalConfig,
) -> Result<EvalReport> {
    if features.len() != labels.node_count() {
        return Err(Error::structure(format!(
            "{} feature rows for {} labeled nodes",
            features.len(),
            labels.node_count()
        )));
    }
    if cfg.folds < 2 {
        return Err(Error::config("at least 2 folds are required"));
    }
    if !(cfg.label_fraction > 0.0 && cfg.label_fraction <= 1.0) {
        return Err(Error::config("label fraction must lie in (0, 1]"));
    }
    let mut nodes = labels.labeled_nodes();
    if nodes.len() < cfg.folds {
        return Err(Error::config(format!(
            "{} labeled nodes cannot fill {} folds",
            nodes.len(),
            cfg.folds
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    // streams 0 and 1 belong to the trainer
    rng.set_stream(2);
    nodes.shuffle(&mut rng);

    let mut fold_scores = Vec::with_capacity(cfg.folds);
    let mut without_positives = 0;
    for fold in 0..cfg.folds {
        let (test, rest): (Vec<_>, Vec<_>) = nodes
            .iter()
            .copied()
            .enumerate()
            .partition(|(i, _)| i % cfg.folds == fold);
        let keep = ((rest.len() as f64 * cfg.label_fraction).ceil() as usize).clamp(1, rest.len());
        let train: Vec<NodeId> = rest.iter().take(keep).map(|&(_, v)| v).collect();
        let test: Vec<NodeId> = test.into_iter().map(|(_, v)| v).collect();

        let raw: Vec<&[f64]> = train.iter().map(|v| features[v.index()].as_slice()).collect();
        let scaler = Standardizer::fit(&raw);
        let x_train: Vec<Vec<f64>> = raw.iter().map(|r| scaler.apply(r)).collect();
        let x_test: Vec<Vec<f64>> = test
            .iter()
            .map(|v| scaler.apply(&features[v.index()]))
            .collect();

        let (mut tp, mut fp, mut fn_) = (0, 0, 0);
        for label in 0..labels.label_count() {
            let y: Vec<bool> = train.iter().map(|&v| labels.has(v, label)).collect();
            let model = if y.iter().any(|&b| b) {
                Some(LogisticModel::fit(&x_train, &y, cfg.l2_lambda, cfg.max_iter, cfg.tolerance))
            } else {
                without_positives += 1;
                None
            };
            for (v, row) in test.iter().zip(&x_test) {
                let predicted = model.as_ref().is_some_and(|m| m.predict(row));
                match (predicted, labels.has(*v, label)) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, true) => fn_ += 1,
                    (false, false) => {}
                }
            }
        }
        fold_scores.push(micro_f1(tp, fp, fn_));
    }

    let mean_micro_f1 = fold_scores.iter().sum::<f64>() / fold_scores.len() as f64;
    Ok(EvalReport {
        fold_scores,
        mean_micro_f1,
        labeled_fraction: cfg.label_fraction,
        folds: cfg.folds,
        labels_without_positives: without_positives,
    })
}

/// Per-dimension comparison of two embedding files.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    /// Max `|a - b|` over nodes, per dimension.
    pub per_dimension: Vec<f64>,
    pub global_max: f64,
    /// Dimension attaining `global_max`.
    pub worst_dimension: usize,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compares two embeddings node by node (matched by name).
pub fn compare_runs(a: &EmbeddingFile, b: &EmbeddingFile, tolerance: f64) -> Result<StabilityReport> {
    if a.dim != b.dim || a.names.len() != b.names.len() {
        return Err(Error::structure(format!(
            "{}x{} vs {}x{}",
            a.names.len(),
            a.dim,
            b.names.len(),
            b.dim
        )));
    }
    let index: HashMap<&str, usize> = b.names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut per_dimension = vec![0.0f64; a.dim];
    for (name, row) in a.names.iter().zip(&a.vectors) {
        let &j = index
            .get(name.as_str())
            .ok_or_else(|| Error::structure(format!("node `{name}` missing from second file")))?;
        for (m, (x, y)) in per_dimension.iter_mut().zip(row.iter().zip(&b.vectors[j])) {
            *m = m.max((x - y).abs());
        }
    }
    let (worst_dimension, global_max) = per_dimension
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    Ok(StabilityReport {
        per_dimension,
        global_max,
        worst_dimension,
        tolerance,
        pass: global_max <= tolerance,
    })
}
