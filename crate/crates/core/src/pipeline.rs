//! End-to-end runs: configuration, neighborhood construction, training,
//! evaluation, replay checks and parameter sweeps.
//!
//! Configuration files are flat `key = value` text. Unknown keys are
//! rejected; `#` starts a comment line.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::embedding::EmbeddingFile;
use crate::error::{Error, Result};
use crate::eval::{compare_runs, train_classifier, EvalConfig, EvalReport, StabilityReport};
use crate::expansion::ExpandedNeighborhood;
use crate::graph::{load_edge_list, EdgeListLoad, Graph, LabelSet, NodeId};
use crate::refinement::{build_neighborhoods, NeighborhoodParams, RefinedNeighborhood, DEFAULT_MAX_PATHS};
use crate::skipgram::{train, TrainConfig, TrainOutput};

/// Every knob of a pipeline run.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub graph: Option<PathBuf>,
    pub weighted: bool,
    pub alpha: f64,
    pub expansion_size: usize,
    pub refinement_size: usize,
    pub max_paths: usize,
    pub dimensions: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub min_learning_rate: f64,
    pub negatives: usize,
    pub noise_exponent: f64,
    pub seed: u64,
    pub labels: Option<PathBuf>,
    pub folds: usize,
    pub label_fraction: f64,
    pub l2_lambda: f64,
    pub output_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self::full()
    }
}

const KEYS: &[&str] = &[
    "graph",
    "weighted",
    "alpha",
    "expansion_size",
    "refinement_size",
    "max_paths",
    "dimensions",
    "epochs",
    "learning_rate",
    "min_learning_rate",
    "negatives",
    "noise_exponent",
    "seed",
    "labels",
    "folds",
    "label_fraction",
    "l2_lambda",
    "output_dir",
];

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(format!("invalid value `{value}` for `{key}`")))
}

fn optional_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

impl PipelineConfig {
    /// Sizes used for graphs with tens of thousands of nodes.
    pub fn full() -> Self {
        let train = TrainConfig::default();
        let eval = EvalConfig::default();
        PipelineConfig {
            graph: None,
            weighted: false,
            alpha: 1.0,
            expansion_size: 1200,
            refinement_size: 800,
            max_paths: DEFAULT_MAX_PATHS,
            dimensions: train.dimensions,
            epochs: train.epochs,
            learning_rate: train.learning_rate,
            min_learning_rate: train.min_learning_rate,
            negatives: train.negatives,
            noise_exponent: train.noise_exponent,
            seed: train.seed,
            labels: None,
            folds: eval.folds,
            label_fraction: eval.label_fraction,
            l2_lambda: eval.l2_lambda,
            output_dir: PathBuf::from("out"),
        }
    }

    /// Small sizes for graphs of a few hundred nodes.
    pub fn desk() -> Self {
        PipelineConfig {
            expansion_size: 40,
            refinement_size: 20,
            dimensions: 16,
            // few pairs per epoch at this scale, so the default rate barely moves the loss
            epochs: 20,
            learning_rate: 0.05,
            ..Self::full()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "full" => Ok(Self::full()),
            "desk" => Ok(Self::desk()),
            other => Err(Error::config(format!("unknown preset `{other}`"))),
        }
    }

    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "graph" => self.graph = optional_path(value),
            "weighted" => self.weighted = parse_value(key, value)?,
            "alpha" => self.alpha = parse_value(key, value)?,
            "expansion_size" => self.expansion_size = parse_value(key, value)?,
            "refinement_size" => self.refinement_size = parse_value(key, value)?,
            "max_paths" => self.max_paths = parse_value(key, value)?,
            "dimensions" => self.dimensions = parse_value(key, value)?,
            "epochs" => self.epochs = parse_value(key, value)?,
            "learning_rate" => self.learning_rate = parse_value(key, value)?,
            "min_learning_rate" => self.min_learning_rate = parse_value(key, value)?,
            "negatives" => self.negatives = parse_value(key, value)?,
            "noise_exponent" => self.noise_exponent = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "labels" => self.labels = optional_path(value),
            "folds" => self.folds = parse_value(key, value)?,
            "label_fraction" => self.label_fraction = parse_value(key, value)?,
            "l2_lambda" => self.l2_lambda = parse_value(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            other => return Err(Error::config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`.
    pub fn merge_text(&mut self, text: &str) -> Result<()> {
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: idx + 1,
                message: "expected `key = value`".into(),
            })?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    /// Parses a config file body starting from the full-size defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::full();
        cfg.merge_text(text)?;
        Ok(cfg)
    }

    fn get(&self, key: &str) -> String {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        match key {
            "graph" => path(&self.graph),
            "weighted" => self.weighted.to_string(),
            "alpha" => self.alpha.to_string(),
            "expansion_size" => self.expansion_size.to_string(),
            "refinement_size" => self.refinement_size.to_string(),
            "max_paths" => self.max_paths.to_string(),
            "dimensions" => self.dimensions.to_string(),
            "epochs" => self.epochs.to_string(),
            "learning_rate" => self.learning_rate.to_string(),
            "min_learning_rate" => self.min_learning_rate.to_string(),
            "negatives" => self.negatives.to_string(),
            "noise_exponent" => self.noise_exponent.to_string(),
            "seed" => self.seed.to_string(),
            "labels" => path(&self.labels),
            "folds" => self.folds.to_string(),
            "label_fraction" => self.label_fraction.to_string(),
            "l2_lambda" => self.l2_lambda.to_string(),
            "output_dir" => self.output_dir.display().to_string(),
            _ => unreachable!("unknown key {key}"),
        }
    }

    /// Every key, one `key = value` line each, in a fixed order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for key in KEYS {
            let _ = writeln!(s, "{key} = {}", self.get(key));
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.expansion_size == 0 || self.refinement_size == 0 {
            return Err(Error::config("neighborhood sizes must be at least 1"));
        }
        if self.refinement_size > self.expansion_size {
            return Err(Error::config(format!(
                "refinement_size {} exceeds expansion_size {}",
                self.refinement_size, self.expansion_size
            )));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::config("alpha must be positive"));
        }
        if self.max_paths == 0 {
            return Err(Error::config("max_paths must be at least 1"));
        }
        self.train_config().validate()
    }

    pub fn neighborhood_params(&self) -> NeighborhoodParams {
        NeighborhoodParams {
            alpha: self.alpha,
            expansion_size: self.expansion_size,
            refinement_size: self.refinement_size,
            max_paths: self.max_paths,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            dimensions: self.dimensions,
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            min_learning_rate: self.min_learning_rate,
            negatives: self.negatives,
            noise_exponent: self.noise_exponent,
            seed: self.seed,
        }
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            folds: self.folds,
            label_fraction: self.label_fraction,
            l2_lambda: self.l2_lambda,
            seed: self.seed,
            ..EvalConfig::default()
        }
    }

    pub fn graph_path(&self) -> Result<&Path> {
        self.graph
            .as_deref()
            .ok_or_else(|| Error::config("no graph file configured"))
    }
}

/// Reads the configured edge list.
pub fn load_graph(cfg: &PipelineConfig) -> Result<EdgeListLoad> {
    let path = cfg.graph_path()?;
    let file = File::open(path)?;
    load_edge_list(BufReader::new(file), cfg.weighted)
}

/// Reads a label file against `graph`'s node names.
pub fn load_label_file(path: &Path, graph: &Graph) -> Result<LabelSet> {
    let file = File::open(path)?;
    crate::graph::load_labels(BufReader::new(file), graph.names())
}

/// Both neighborhood phases for every node.
#[derive(Clone, Debug)]
pub struct Neighborhoods {
    pub expanded: Vec<ExpandedNeighborhood>,
    pub refined: Vec<RefinedNeighborhood>,
    pub elapsed: Duration,
}

pub fn compute_neighborhoods(graph: &Graph, cfg: &PipelineConfig, threads: usize) -> Result<Neighborhoods> {
    cfg.validate()?;
    let start = Instant::now();
    let (expanded, refined) = build_neighborhoods(graph, &cfg.neighborhood_params(), threads)?
        .into_iter()
        .unzip();
    Ok(Neighborhoods {
        expanded,
        refined,
        elapsed: start.elapsed(),
    })
}

/// Neighborhoods, training output and timings of one full run.
#[derive(Clone, Debug)]
pub struct PipelineRun {
    pub neighborhoods: Neighborhoods,
    pub training: TrainOutput,
    pub train_elapsed: Duration,
}

pub fn run_pipeline(graph: &Graph, cfg: &PipelineConfig, threads: usize) -> Result<PipelineRun> {
    let neighborhoods = compute_neighborhoods(graph, cfg, threads)?;
    let start = Instant::now();
    let training = train(&neighborhoods.refined, &cfg.train_config())?;
    Ok(PipelineRun {
        neighborhoods,
        training,
        train_elapsed: start.elapsed(),
    })
}

/// Embedding file bytes for a trained run.
pub fn embedding_bytes(graph: &Graph, output: &TrainOutput) -> Vec<u8> {
    let mut bytes = Vec::new();
    output
        .embedding
        .write_text(&mut bytes, graph.names())
        .expect("writing to memory");
    bytes
}

/// Evaluates node features given in id order.
pub fn evaluate(features: &[Vec<f64>], labels: &LabelSet, cfg: &PipelineConfig) -> Result<EvalReport> {
    train_classifier(features, labels, &cfg.eval_config())
}

/// Result of replaying the pipeline several times.
#[derive(Clone, Debug)]
pub struct StabilityOutcome {
    /// Embedding file contents of each run.
    pub files: Vec<Vec<u8>>,
    /// Run `i + 1` compared with run 0.
    pub reports: Vec<StabilityReport>,
    pub global_max: f64,
    pub byte_identical: bool,
}

/// Runs the pipeline `runs` times and compares every run with the first.
///
/// With `vary_seeds`, run `i` uses `seed + i`.
pub fn stability(
    graph: &Graph,
    cfg: &PipelineConfig,
    runs: usize,
    threads: usize,
    vary_seeds: bool,
) -> Result<StabilityOutcome> {
    if runs < 2 {
        return Err(Error::config("stability needs at least 2 runs"));
    }
    let mut files = Vec::with_capacity(runs);
    for i in 0..runs {
        let mut run_cfg = cfg.clone();
        if vary_seeds {
            run_cfg.seed = cfg.seed.wrapping_add(i as u64);
        }
        let run = run_pipeline(graph, &run_cfg, threads)?;
        files.push(embedding_bytes(graph, &run.training));
    }
    let first = EmbeddingFile::read(files[0].as_slice())?;
    let mut reports = Vec::with_capacity(runs - 1);
    for bytes in &files[1..] {
        let other = EmbeddingFile::read(bytes.as_slice())?;
        reports.push(compare_runs(&first, &other, 0.0)?);
    }
    let global_max = reports.iter().map(|r| r.global_max).fold(0.0, f64::max);
    let byte_identical = files.windows(2).all(|w| w[0] == w[1]);
    Ok(StabilityOutcome {
        files,
        reports,
        global_max,
        byte_identical,
    })
}

/// Parameter varied by a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    ExpansionSize,
    RefinementSize,
    Dimensions,
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "expansion_size" | "e" => Ok(SweepParam::ExpansionSize),
            "refinement_size" | "r" => Ok(SweepParam::RefinementSize),
            "dimensions" | "d" => Ok(SweepParam::Dimensions),
            other => Err(Error::config(format!("cannot sweep `{other}`"))),
        }
    }
}

impl SweepParam {
    pub fn key(self) -> &'static str {
        match self {
            SweepParam::ExpansionSize => "expansion_size",
            SweepParam::RefinementSize => "refinement_size",
            SweepParam::Dimensions => "dimensions",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub param: SweepParam,
    pub value: usize,
    pub mean_micro_f1: f64,
    pub neighborhood_secs: f64,
    pub train_secs: f64,
    pub eval_secs: f64,
    /// Time since the sweep started, taken after this row finished.
    pub elapsed_secs: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Grid points that were skipped, with the reason.
    pub skipped: Vec<String>,
}

impl SweepTable {
    pub fn to_tsv(&self) -> String {
        let mut s = String::from(
            "param\tvalue\tmean_micro_f1\tneighborhood_secs\ttrain_secs\teval_secs\telapsed_secs\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
                r.param.key(),
                r.value,
                r.mean_micro_f1,
                r.neighborhood_secs,
                r.train_secs,
                r.eval_secs,
                r.elapsed_secs
            );
        }
        s
    }
}

/// Runs the full pipeline at every grid value of `param`.
pub fn sweep(
    graph: &Graph,
    labels: &LabelSet,
    base: &PipelineConfig,
    param: SweepParam,
    grid: &[usize],
    threads: usize,
) -> Result<SweepTable> {
    let start = Instant::now();
    let mut table = SweepTable::default();
    for &value in grid {
        let mut cfg = base.clone();
        match param {
            SweepParam::ExpansionSize => cfg.expansion_size = value,
            SweepParam::RefinementSize => cfg.refinement_size = value,
            SweepParam::Dimensions => cfg.dimensions = value,
        }
        if let Err(e) = cfg.validate() {
            table.skipped.push(format!("{}={value}: {e}", param.key()));
            continue;
        }
        let run = run_pipeline(graph, &cfg, threads)?;
        let eval_start = Instant::now();
        let report = evaluate(&run.training.embedding.rows(), labels, &cfg)?;
        let eval_secs = eval_start.elapsed().as_secs_f64();
        table.rows.push(SweepRow {
            param,
            value,
            mean_micro_f1: report.mean_micro_f1,
            neighborhood_secs: run.neighborhoods.elapsed.as_secs_f64(),
            train_secs: run.train_elapsed.as_secs_f64(),
            eval_secs,
            elapsed_secs: start.elapsed().as_secs_f64(),
        });
    }
    Ok(table)
}

/// Member lists of refined neighborhoods, for training from a dump.
pub fn members_of(refined: &[RefinedNeighborhood]) -> Vec<Vec<NodeId>> {
    refined.iter().map(|r| r.members.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text_round_trip() {
        let mut cfg = PipelineConfig::desk();
        cfg.graph = Some("data/g.txt".into());
        cfg.learning_rate = 0.1 + 0.2;
        cfg.seed = u64::MAX;
        let back = PipelineConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn config_errors() {
        assert!(PipelineConfig::parse("bogus = 1").is_err());
        assert!(PipelineConfig::parse("epochs = many").is_err());
        assert!(matches!(PipelineConfig::parse("epochs"), Err(Error::Parse { line: 1, .. })));
        let cfg = PipelineConfig::parse("expansion_size = 5\nrefinement_size = 6\n").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn single_stability_run_rejected() {
        let g = crate::synthetic::two_cliques(4);
        assert!(stability(&g, &PipelineConfig::desk(), 1, 1, false).is_err());
    }
}
