//! SkipGram training with negative sampling over neighborhood pairs.
//!
//! Every `(u, w)` with `w` in the refined neighborhood of `u` is a positive
//! pair. The per-pair loss is
//!
//! ```text
//! L = -log σ(c_w · f_u) - Σ_neg log σ(-c_neg · f_u)
//! ```
//!
//! where `f` are the input (published) vectors and `c` the context vectors.
//! Training is strictly sequential; all randomness comes from ChaCha streams
//! derived from the configured seed.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::graph::NodeId;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub dimensions: usize,
    pub epochs: usize,
    /// Initial step size, decayed linearly over the run.
    pub learning_rate: f64,
    /// Floor of the decayed step size.
    pub min_learning_rate: f64,
    pub negatives: usize,
    pub noise_exponent: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dimensions: 128,
            epochs: 5,
            learning_rate: 0.025,
            min_learning_rate: 0.0001,
            negatives: 5,
            noise_exponent: 0.75,
            seed: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dimensions == 0 {
            return Err(Error::config("dimensions must be at least 1"));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("learning rate must be non-negative"));
        }
        if !(self.min_learning_rate >= 0.0 && self.min_learning_rate.is_finite()) {
            return Err(Error::config("minimum learning rate must be non-negative"));
        }
        if !self.noise_exponent.is_finite() {
            return Err(Error::config("noise exponent must be finite"));
        }
        Ok(())
    }

    /// Step size after `step` of `total` updates.
    pub fn learning_rate_at(&self, step: usize, total: usize) -> f64 {
        let progress = if total == 0 { 0.0 } else { step as f64 / total as f64 };
        let floor = self.min_learning_rate.min(self.learning_rate);
        (self.learning_rate * (1.0 - progress)).max(floor)
    }
}

/// Positive training pairs in a fixed order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PairList {
    pub pairs: Vec<(NodeId, NodeId)>,
    /// Sources whose neighborhood contributed no pair.
    pub empty_sources: usize,
}

/// Pairs `(u, w)` for `u` ascending and `w` in inclusion order, skipping `w = u`.
///
/// `neighborhoods[i]` holds the members of node `i`'s neighborhood.
pub fn build_pairs<N: AsRef<[NodeId]>>(neighborhoods: &[N]) -> PairList {
    let mut list = PairList::default();
    for (u, members) in neighborhoods.iter().enumerate() {
        let u = NodeId(u);
        let before = list.pairs.len();
        list.pairs
            .extend(members.as_ref().iter().filter(|&&w| w != u).map(|&w| (u, w)));
        if list.pairs.len() == before {
            list.empty_sources += 1;
        }
    }
    list
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `log σ(x)` without overflow.
#[inline]
fn log_sigmoid(x: f64) -> f64 {
    -((-x).max(0.0) + (-x.abs()).exp().ln_1p())
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Probability assigned to context `w` given `u`: `σ(c_w · f_u)`.
pub fn positive_score(emb: &EmbeddingMatrix, u: NodeId, w: NodeId) -> f64 {
    sigmoid(dot(emb.context(w), emb.input(u)))
}

/// Negative-sampling loss of one pair at the current parameters.
pub fn pair_loss(emb: &EmbeddingMatrix, (u, w): (NodeId, NodeId), negatives: &[NodeId]) -> f64 {
    let f = emb.input(u);
    let mut loss = -log_sigmoid(dot(emb.context(w), f));
    for &neg in negatives.iter().filter(|&&n| n != w) {
        loss -= log_sigmoid(-dot(emb.context(neg), f));
    }
    loss
}

/// Gradient of [`pair_loss`].
#[derive(Clone, Debug, PartialEq)]
pub struct PairGradient {
    pub input: Vec<f64>,
    /// Context-row gradients, one entry per distinct target.
    pub context: Vec<(NodeId, Vec<f64>)>,
}

pub fn pair_gradient(
    emb: &EmbeddingMatrix,
    (u, w): (NodeId, NodeId),
    negatives: &[NodeId],
) -> PairGradient {
    let f = emb.input(u);
    let mut input = vec![0.0; emb.dim()];
    let mut context: Vec<(NodeId, Vec<f64>)> = Vec::new();
    let targets = std::iter::once((w, 1.0)).chain(
        negatives
            .iter()
            .filter(|&&n| n != w)
            .map(|&n| (n, 0.0)),
    );
    for (target, label) in targets {
        let c = emb.context(target);
        // dL/d(score) for a logistic term with this label
        let g = sigmoid(dot(c, f)) - label;
        for (gi, ci) in input.iter_mut().zip(c) {
            *gi += g * ci;
        }
        let row: Vec<f64> = f.iter().map(|fi| g * fi).collect();
        match context.iter_mut().find(|(t, _)| *t == target) {
            Some((_, acc)) => acc.iter_mut().zip(&row).for_each(|(a, r)| *a += r),
            None => context.push((target, row)),
        }
    }
    PairGradient { input, context }
}

/// One SGD update for `pair` against the given negatives. Returns the loss before the update.
///
/// Negatives equal to the positive context are skipped. Context rows are
/// updated in turn; the input row receives the accumulated gradient at the end.
pub fn sgd_step(
    emb: &mut EmbeddingMatrix,
    (u, w): (NodeId, NodeId),
    negatives: &[NodeId],
    learning_rate: f64,
) -> Result<f64> {
    let dim = emb.dim();
    let f: Vec<f64> = emb.input(u).to_vec();
    let mut input_step = vec![0.0; dim];
    let mut loss = 0.0;
    let targets = std::iter::once((w, 1.0)).chain(
        negatives
            .iter()
            .filter(|&&n| n != w)
            .map(|&n| (n, 0.0)),
    );
    for (target, label) in targets {
        let ctx = emb.context_mut(target);
        let score = dot(ctx, &f);
        loss -= if label == 1.0 {
            log_sigmoid(score)
        } else {
            log_sigmoid(-score)
        };
        let g = (label - sigmoid(score)) * learning_rate;
        for (step, ci) in input_step.iter_mut().zip(ctx.iter()) {
            *step += g * ci;
        }
        for (ci, fi) in ctx.iter_mut().zip(&f) {
            *ci += g * fi;
        }
    }
    let row = emb.input_mut(u);
    for (ri, si) in row.iter_mut().zip(&input_step) {
        *ri += si;
    }
    if !loss.is_finite() || row.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!(
            "pair ({u}, {w}) produced a non-finite update"
        )));
    }
    Ok(loss)
}

/// Unigram-style noise distribution: context frequency raised to an exponent.
#[derive(Clone, Debug)]
pub struct NoiseTable {
    weights: Vec<f64>,
    dist: Option<WeightedIndex<f64>>,
}

impl NoiseTable {
    pub fn from_pairs(nodes: usize, pairs: &[(NodeId, NodeId)], exponent: f64) -> Self {
        let mut counts = vec![0usize; nodes];
        for &(_, w) in pairs {
            counts[w.index()] += 1;
        }
        let weights: Vec<f64> = counts
            .iter()
            .map(|&c| if c > 0 { (c as f64).powf(exponent) } else { 0.0 })
            .collect();
        let dist = WeightedIndex::new(&weights).ok();
        NoiseTable { weights, dist }
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_none()
    }

    pub fn probability(&self, v: NodeId) -> f64 {
        let total: f64 = self.weights.iter().sum();
        if total > 0.0 {
            self.weights[v.index()] / total
        } else {
            0.0
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> NodeId {
        NodeId(self.dist.as_ref().expect("non-empty noise table").sample(rng))
    }
}

/// Trained matrix plus the mean pair loss of every epoch.
#[derive(Clone, Debug)]
pub struct TrainOutput {
    pub embedding: EmbeddingMatrix,
    pub loss_trace: Vec<f64>,
    pub empty_sources: usize,
}

/// Seeded initialization: inputs uniform in `[-0.5/d, 0.5/d)`, contexts zero.
pub fn initial_embedding(nodes: usize, cfg: &TrainConfig) -> EmbeddingMatrix {
    let d = cfg.dimensions;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut emb = EmbeddingMatrix::zeros(nodes, d);
    for v in 0..nodes {
        for x in emb.input_mut(NodeId(v)) {
            *x = (rng.random::<f64>() - 0.5) / d as f64;
        }
    }
    emb
}

fn epoch_rng(seed: u64, epoch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ epoch as u64);
    // stream 0 of the base seed is the initializer
    rng.set_stream(1);
    rng
}

/// Trains embeddings for `neighborhoods.len()` nodes.
pub fn train<N: AsRef<[NodeId]>>(neighborhoods: &[N], cfg: &TrainConfig) -> Result<TrainOutput> {
    cfg.validate()?;
    let nodes = neighborhoods.len();
    let pairs = build_pairs(neighborhoods);
    let noise = NoiseTable::from_pairs(nodes, &pairs.pairs, cfg.noise_exponent);
    let mut emb = initial_embedding(nodes, cfg);
    let total_steps = cfg.epochs * pairs.pairs.len();
    let mut step = 0;
    let mut loss_trace = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..pairs.pairs.len()).collect();
    let mut negatives = Vec::with_capacity(cfg.negatives);

    for epoch in 0..cfg.epochs {
        let mut rng = epoch_rng(cfg.seed, epoch);
        order.sort_unstable();
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for &k in &order {
            negatives.clear();
            if !noise.is_empty() {
                negatives.extend((0..cfg.negatives).map(|_| noise.sample(&mut rng)));
            }
            let lr = cfg.learning_rate_at(step, total_steps);
            epoch_loss += sgd_step(&mut emb, pairs.pairs[k], &negatives, lr)?;
            step += 1;
        }
        let mean = if order.is_empty() {
            0.0
        } else {
            epoch_loss / order.len() as f64
        };
        loss_trace.push(mean);
    }

    Ok(TrainOutput {
        embedding: emb,
        loss_trace,
        empty_sources: pairs.empty_sources,
    })
}
