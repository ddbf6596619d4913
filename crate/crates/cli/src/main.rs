//! `csembed`: batch front end for neighborhood construction, training,
//! evaluation, replay checks and sweeps.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use csembed::embedding::EmbeddingFile;
use csembed::graph::Graph;
use csembed::pipeline::{self, PipelineConfig, SweepParam};
use csembed::skipgram::train;
use csembed::{expansion, refinement, Error};

#[derive(Parser)]
#[command(name = "csembed", version, about = "Circuit-neighborhood node embeddings")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Desk,
    Full,
}

/// Settings shared by every subcommand. Flags override the config file.
#[derive(Args)]
struct Opts {
    /// Config file of `key = value` lines.
    #[arg(long, global = true, env = "CSEMBED_CONFIG")]
    config: Option<PathBuf>,
    /// Starting values before the config file is applied.
    #[arg(long, global = true, value_enum, default_value = "full")]
    preset: Preset,
    /// Worker threads for the neighborhood phases. Never changes the output.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[arg(long, global = true)]
    graph: Option<PathBuf>,
    /// Read `u v w` lines instead of `u v`.
    #[arg(long, global = true)]
    weighted: bool,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(short = 'e', long, global = true)]
    expansion_size: Option<usize>,
    #[arg(short = 'r', long, global = true)]
    refinement_size: Option<usize>,
    #[arg(long, global = true)]
    max_paths: Option<usize>,
    #[arg(short = 'd', long, global = true)]
    dimensions: Option<usize>,
    #[arg(long, global = true)]
    epochs: Option<usize>,
    #[arg(long, global = true)]
    learning_rate: Option<f64>,
    #[arg(long, global = true)]
    negatives: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    labels: Option<PathBuf>,
    #[arg(long, global = true)]
    folds: Option<usize>,
    #[arg(long, global = true)]
    label_fraction: Option<f64>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Any config key, as KEY=VALUE. Applied last.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Write expanded and refined neighborhood dumps.
    Neighborhoods,
    /// Train embeddings and write `embedding.txt`.
    Embed {
        /// Train from a refined dump instead of recomputing neighborhoods.
        #[arg(long)]
        neighborhoods: Option<PathBuf>,
    },
    /// Cross-validated classification report.
    Evaluate {
        /// Embedding file to score; trains in-process when absent.
        #[arg(long)]
        embedding: Option<PathBuf>,
        /// Also write the per-fold table here.
        #[arg(long)]
        tsv: Option<PathBuf>,
    },
    /// Run the pipeline several times and require identical embeddings.
    Stability {
        #[arg(long, default_value_t = 2)]
        runs: usize,
        /// Offset the seed per run and only report the deviation.
        #[arg(long)]
        vary_seeds: bool,
    },
    /// Rerun the pipeline over a grid of one parameter.
    Sweep {
        /// `e`, `r` or `d` (or the full key name).
        #[arg(long)]
        param: SweepParam,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        values: Vec<usize>,
        /// Treat the values as base-2 exponents.
        #[arg(long)]
        log2: bool,
        #[arg(long)]
        tsv: Option<PathBuf>,
    },
}

/// Exit status classes.
enum Failure {
    /// A replay or assertion check did not hold.
    Check(String),
    /// Bad flags, config or inputs that fail validation.
    Usage(String),
    /// Reading or writing files failed.
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Check(m) | Failure::Usage(m) | Failure::Io(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Config(_) | Error::Structure(_) | Error::NotAnEdge { .. } => Failure::Usage(msg),
            Error::NonFinite(_) => Failure::Check(msg),
            Error::Parse { .. } | Error::Domain { .. } | Error::UnknownNode { .. } | Error::Io(_) => {
                Failure::Io(msg)
            }
        }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn io_failure(path: &Path) -> impl FnOnce(io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

/// Errors while reading `path` get the path prefixed.
fn in_file(path: &Path) -> impl FnOnce(Error) -> Failure + '_ {
    move |e| match Failure::from(e) {
        Failure::Io(m) => Failure::Io(format!("{}: {m}", path.display())),
        Failure::Usage(m) => Failure::Usage(format!("{}: {m}", path.display())),
        other => other,
    }
}

/// Missing inputs are a precondition failure, not an I/O fault.
fn require_file(path: &Path, what: &str) -> Outcome {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{what} `{}` does not exist", path.display())))
    }
}

fn resolve(opts: &Opts) -> Outcome<PipelineConfig> {
    let mut cfg = match opts.preset {
        Preset::Desk => PipelineConfig::desk(),
        Preset::Full => PipelineConfig::full(),
    };
    if let Some(path) = &opts.config {
        require_file(path, "config file")?;
        let text = fs::read_to_string(path).map_err(io_failure(path))?;
        cfg.merge_text(&text)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    if opts.graph.is_some() {
        cfg.graph.clone_from(&opts.graph);
    }
    if opts.weighted {
        cfg.weighted = true;
    }
    macro_rules! take {
        ($($field:ident),*) => {
            $(if let Some(v) = opts.$field.clone() { cfg.$field = v; })*
        };
    }
    take!(
        alpha,
        expansion_size,
        refinement_size,
        max_paths,
        dimensions,
        epochs,
        learning_rate,
        negatives,
        seed,
        folds,
        label_fraction,
        output_dir
    );
    if opts.labels.is_some() {
        cfg.labels.clone_from(&opts.labels);
    }
    for kv in &opts.overrides {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("`--set {kv}` is not KEY=VALUE")))?;
        cfg.set(key.trim(), value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn threads(opts: &Opts) -> Outcome<usize> {
    match opts.threads {
        Some(0) => Err(Failure::Usage("--threads must be at least 1".into())),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn load_graph(cfg: &PipelineConfig) -> Outcome<Graph> {
    let path = cfg.graph_path()?;
    require_file(path, "graph file")?;
    let load = pipeline::load_graph(cfg).map_err(in_file(path))?;
    if load.self_loops_skipped > 0 || load.duplicates_collapsed > 0 {
        eprintln!(
            "graph: skipped {} self-loops, collapsed {} duplicate edges",
            load.self_loops_skipped, load.duplicates_collapsed
        );
    }
    eprintln!(
        "graph: {} nodes, {} edges",
        load.graph.node_count(),
        load.graph.edge_count()
    );
    Ok(load.graph)
}

fn load_labels(cfg: &PipelineConfig, graph: &Graph) -> Outcome<csembed::graph::LabelSet> {
    let path = cfg
        .labels
        .as_deref()
        .ok_or_else(|| Failure::Usage("no label file configured".into()))?;
    require_file(path, "label file")?;
    pipeline::load_label_file(path, graph).map_err(in_file(path))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Outcome {
    let file = File::create(path).map_err(io_failure(path))?;
    let mut out = BufWriter::new(file);
    f(&mut out).and_then(|_| out.flush()).map_err(io_failure(path))
}

fn prepare_output(cfg: &PipelineConfig) -> Outcome {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(io_failure(dir))?;
    let text = cfg.to_text();
    eprint!("# resolved config\n{text}");
    write_file(&dir.join("config.resolved"), |out| out.write_all(text.as_bytes()))
}

fn write_neighborhoods(cfg: &PipelineConfig, graph: &Graph, hoods: &pipeline::Neighborhoods) -> Outcome {
    let dir = &cfg.output_dir;
    write_file(&dir.join("expanded.txt"), |out| {
        expansion::write_dump(out, graph, &hoods.expanded)
    })?;
    write_file(&dir.join("refined.txt"), |out| {
        refinement::write_dump(out, graph, &hoods.refined)
    })
}

fn write_embedding(cfg: &PipelineConfig, bytes: &[u8]) -> Outcome<PathBuf> {
    let path = cfg.output_dir.join("embedding.txt");
    write_file(&path, |out| out.write_all(bytes))?;
    Ok(path)
}

fn log_neighborhoods(hoods: &pipeline::Neighborhoods) {
    let exhausted = hoods.refined.iter().filter(|r| r.exhausted).count();
    eprintln!(
        "time neighborhoods: {:.3}s ({} sources, {} with fewer members than requested)",
        hoods.elapsed.as_secs_f64(),
        hoods.refined.len(),
        exhausted
    );
}

fn log_training(out: &csembed::skipgram::TrainOutput, secs: f64) {
    for (epoch, loss) in out.loss_trace.iter().enumerate() {
        eprintln!("epoch {epoch}: mean loss {loss:.6}");
    }
    if out.empty_sources > 0 {
        eprintln!("training: {} nodes had no context pairs", out.empty_sources);
    }
    eprintln!("time training: {secs:.3}s");
}

fn cmd_neighborhoods(opts: &Opts) -> Outcome {
    let cfg = resolve(opts)?;
    let graph = load_graph(&cfg)?;
    prepare_output(&cfg)?;
    let hoods = pipeline::compute_neighborhoods(&graph, &cfg, threads(opts)?)?;
    log_neighborhoods(&hoods);
    write_neighborhoods(&cfg, &graph, &hoods)
}

/// Trains, writes `embedding.txt` and returns the file contents.
fn embed(opts: &Opts, cfg: &PipelineConfig, graph: &Graph, dump: Option<&Path>) -> Outcome<Vec<u8>> {
    let start = Instant::now();
    let training = match dump {
        Some(path) => {
            require_file(path, "neighborhood file")?;
            let file = File::open(path).map_err(io_failure(path))?;
            let hoods = refinement::read_dump(BufReader::new(file), graph).map_err(in_file(path))?;
            train(&hoods, &cfg.train_config())?
        }
        None => {
            let hoods = pipeline::compute_neighborhoods(graph, cfg, threads(opts)?)?;
            log_neighborhoods(&hoods);
            write_neighborhoods(cfg, graph, &hoods)?;
            train(&hoods.refined, &cfg.train_config())?
        }
    };
    log_training(&training, start.elapsed().as_secs_f64());
    let bytes = pipeline::embedding_bytes(graph, &training);
    let path = write_embedding(cfg, &bytes)?;
    eprintln!("wrote {}", path.display());
    Ok(bytes)
}

fn cmd_embed(opts: &Opts, dump: Option<&Path>) -> Outcome {
    let cfg = resolve(opts)?;
    let graph = load_graph(&cfg)?;
    prepare_output(&cfg)?;
    embed(opts, &cfg, &graph, dump).map(drop)
}

fn cmd_evaluate(opts: &Opts, embedding: Option<&Path>, tsv: Option<&Path>) -> Outcome {
    let cfg = resolve(opts)?;
    let graph = load_graph(&cfg)?;
    let labels = load_labels(&cfg, &graph)?;
    let file = match embedding {
        Some(path) => {
            require_file(path, "embedding file")?;
            let f = File::open(path).map_err(io_failure(path))?;
            EmbeddingFile::read(BufReader::new(f)).map_err(in_file(path))?
        }
        None => {
            prepare_output(&cfg)?;
            let bytes = embed(opts, &cfg, &graph, None)?;
            EmbeddingFile::read(bytes.as_slice())?
        }
    };
    let features = file.aligned_rows(graph.names())?;
    let start = Instant::now();
    let report = pipeline::evaluate(&features, &labels, &cfg)?;
    eprintln!("time evaluation: {:.3}s", start.elapsed().as_secs_f64());
    print!("{}", report.to_lines());
    if let Some(path) = tsv {
        write_file(path, |out| out.write_all(report.to_tsv().as_bytes()))?;
    }
    Ok(())
}

fn cmd_stability(opts: &Opts, runs: usize, vary_seeds: bool) -> Outcome {
    let cfg = resolve(opts)?;
    if runs < 2 {
        return Err(Failure::Usage("stability needs --runs of at least 2".into()));
    }
    let graph = load_graph(&cfg)?;
    prepare_output(&cfg)?;
    let start = Instant::now();
    let outcome = pipeline::stability(&graph, &cfg, runs, threads(opts)?, vary_seeds)?;
    eprintln!("time stability: {:.3}s", start.elapsed().as_secs_f64());
    let dir = cfg.output_dir.join("stability");
    fs::create_dir_all(&dir).map_err(io_failure(&dir))?;
    for (i, bytes) in outcome.files.iter().enumerate() {
        write_file(&dir.join(format!("run{i}.txt")), |out| out.write_all(bytes))?;
    }

    println!("runs={runs}");
    println!("vary_seeds={vary_seeds}");
    for (i, r) in outcome.reports.iter().enumerate() {
        println!("run.{}.global_max={}", i + 1, r.global_max);
        println!("run.{}.worst_dimension={}", i + 1, r.worst_dimension);
    }
    println!("global_max={}", outcome.global_max);
    println!("byte_identical={}", outcome.byte_identical);
    let pass = outcome.global_max == 0.0 && outcome.byte_identical;
    println!("pass={pass}");

    if pass || vary_seeds {
        return Ok(());
    }
    let (run, report) = outcome
        .reports
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.global_max.total_cmp(&b.1.global_max))
        .expect("at least one comparison");
    Err(Failure::Check(format!(
        "run {} deviates from run 0 by {} in dimension {}",
        run + 1,
        report.global_max,
        report.worst_dimension
    )))
}

fn cmd_sweep(opts: &Opts, param: SweepParam, values: &[usize], log2: bool, tsv: Option<&Path>) -> Outcome {
    let cfg = resolve(opts)?;
    let grid: Vec<usize> = if log2 {
        if param != SweepParam::Dimensions {
            return Err(Failure::Usage("--log2 only applies to dimensions".into()));
        }
        values
            .iter()
            .map(|&k| {
                u32::try_from(k)
                    .ok()
                    .and_then(|k| 1usize.checked_shl(k))
                    .ok_or_else(|| Failure::Usage(format!("2^{k} is out of range")))
            })
            .collect::<Outcome<_>>()?
    } else {
        values.to_vec()
    };
    let graph = load_graph(&cfg)?;
    let labels = load_labels(&cfg, &graph)?;
    prepare_output(&cfg)?;
    let table = pipeline::sweep(&graph, &labels, &cfg, param, &grid, threads(opts)?)?;
    for note in &table.skipped {
        eprintln!("skipped {note}");
    }
    for r in &table.rows {
        eprintln!(
            "{}={}: micro_f1 {:.4}, neighborhoods {:.3}s, training {:.3}s, evaluation {:.3}s",
            r.param.key(),
            r.value,
            r.mean_micro_f1,
            r.neighborhood_secs,
            r.train_secs,
            r.eval_secs
        );
    }
    let text = table.to_tsv();
    print!("{text}");
    if let Some(path) = tsv {
        write_file(path, |out| out.write_all(text.as_bytes()))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Outcome {
    let opts = &cli.opts;
    match &cli.command {
        Command::Neighborhoods => cmd_neighborhoods(opts),
        Command::Embed { neighborhoods } => cmd_embed(opts, neighborhoods.as_deref()),
        Command::Evaluate { embedding, tsv } => cmd_evaluate(opts, embedding.as_deref(), tsv.as_deref()),
        Command::Stability { runs, vary_seeds } => cmd_stability(opts, *runs, *vary_seeds),
        Command::Sweep {
            param,
            values,
            log2,
            tsv,
        } => cmd_sweep(opts, *param, values, *log2, tsv.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
