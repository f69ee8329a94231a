use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use wordgraph::embed::{save_embeddings, train_with_report};
use wordgraph::eval::{format_table, Task};
use wordgraph::graph::{load_graph, save_graph, write_edge_list, GraphStats, WeightMode};
use wordgraph::pipeline::{
    build_graph_from_corpus, load_walks, run_eval, run_pipeline, scaling_bench, with_threads, EvalSpec, PipelineConfig,
    RunHeader, THREADS_ENV,
};
use wordgraph::walk::generate_corpus;
use wordgraph::{Error, Result};

#[derive(Parser)]
#[command(
    name = "wordgraph",
    version,
    about = "Word embeddings from biased random walks over a word co-occurrence graph"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the co-occurrence graph and node weights from text.
    BuildGraph(BuildGraphArgs),
    /// Sample the walk corpus from a graph file.
    Walk(WalkArgs),
    /// Train skip-gram embeddings on a walk corpus.
    Train(TrainArgs),
    /// Score embeddings on a benchmark dataset.
    Eval(EvalArgs),
    /// Run every stage from a JSON config.
    Pipeline(PipelineArgs),
    /// Print graph statistics.
    Stats(StatsArgs),
    /// Time the pipeline on the corpus duplicated several times.
    ScalingBench(ScalingArgs),
}

#[derive(Args)]
struct Common {
    /// Pipeline JSON config supplying defaults; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, env = THREADS_ENV)]
    threads: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<PipelineConfig> {
        let mut c = match &self.config {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        };
        if self.threads.is_some() {
            c.threads = self.threads;
        }
        Ok(c)
    }
}

#[derive(Args)]
struct BuildGraphArgs {
    /// Corpus files, read as one stream.
    inputs: Vec<PathBuf>,
    #[arg(short, long)]
    out: PathBuf,
    #[arg(long)]
    min_count: Option<u64>,
    /// One allowed word per line.
    #[arg(long)]
    wordlist: Option<PathBuf>,
    #[arg(long)]
    weight_mode: Option<WeightMode>,
    /// Block length for TF-IDF document frequencies.
    #[arg(long, alias = "window")]
    idf_window: Option<usize>,
    /// Keep case; uppercase letters are then dropped like punctuation.
    #[arg(long)]
    no_lowercase: bool,
    /// Split tokens on whitespace only, deleting other non-letters in place.
    #[arg(long)]
    keep_non_alpha: bool,
    /// Also write a `src<TAB>dst<TAB>count` edge list.
    #[arg(long)]
    edge_list: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

fn at_least_one(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(x) if x >= 1 => Ok(x),
        _ => Err(format!("`{s}` is not an integer of at least 1")),
    }
}

#[derive(Args)]
struct WalkArgs {
    #[arg(short, long)]
    graph: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
    #[arg(short, value_parser = positive)]
    p: Option<f64>,
    #[arg(short, value_parser = positive)]
    q: Option<f64>,
    /// Steps after the start node.
    #[arg(short = 'l', long, value_parser = at_least_one)]
    walk_length: Option<usize>,
    /// Total walk budget.
    #[arg(short = 'n', long, conflicts_with = "walks_per_node")]
    total_walks: Option<u64>,
    /// Budget as a multiple of the vocabulary size.
    #[arg(long)]
    walks_per_node: Option<u64>,
    #[arg(long)]
    min_walks_per_node: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write one walk per line as words instead of the binary format.
    #[arg(long)]
    text: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct TrainArgs {
    /// Walk corpus, binary or text.
    #[arg(short, long)]
    walks: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
    #[arg(short = 'd', long)]
    dimension: Option<usize>,
    #[arg(short = 'k', long)]
    window: Option<usize>,
    #[arg(long)]
    negatives: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    initial_lr: Option<f64>,
    #[arg(long)]
    min_lr: Option<f64>,
    #[arg(long)]
    noise_exponent: Option<f64>,
    #[arg(long)]
    subsample: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Lock-free multi-threaded updates (not bit-reproducible).
    #[arg(long)]
    parallel: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Table,
    Json,
    Both,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(short, long)]
    embeddings: PathBuf,
    #[arg(short, long, value_parser = clap::value_parser!(TaskArg))]
    task: TaskArg,
    #[arg(short, long)]
    dataset: PathBuf,
    /// Label for the report; defaults to the dataset file stem.
    #[arg(long)]
    name: Option<String>,
    #[arg(long, value_enum, default_value = "both")]
    format: OutputFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Similarity,
    Analogy,
    Categorization,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Task {
        match t {
            TaskArg::Similarity => Task::Similarity,
            TaskArg::Analogy => Task::Analogy,
            TaskArg::Categorization => Task::Categorization,
        }
    }
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = THREADS_ENV)]
    threads: Option<usize>,
}

impl PipelineArgs {
    fn load(&self) -> Result<PipelineConfig> {
        let mut c = PipelineConfig::load(&self.config)?;
        if let Some(d) = &self.output_dir {
            c.output_dir = d.clone();
        }
        if self.seed.is_some() {
            c.seed = self.seed;
        }
        if self.threads.is_some() {
            c.threads = self.threads;
        }
        Ok(c)
    }
}

#[derive(Args)]
struct StatsArgs {
    #[arg(short, long)]
    graph: PathBuf,
    /// Write the edge list to this path (`-` for stdout) instead of stats.
    #[arg(long)]
    edge_list: Option<PathBuf>,
}

#[derive(Args)]
struct ScalingArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Duplication factors, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    factors: Vec<usize>,
    /// Also print the report as JSON.
    #[arg(long)]
    json: bool,
}

/// Echo the run header to stderr; once `run` succeeds, also store it next
/// to the artifact.
fn with_header<C: Serialize>(
    command: &str,
    seed: Option<u64>,
    config: &C,
    artifact: &std::path::Path,
    run: impl FnOnce() -> Result<()>,
) -> Result<()> {
    let header = RunHeader::new(command, seed, config);
    eprintln!("{}", header.to_json_line());
    run()?;
    header.write_sidecar(artifact)?;
    Ok(())
}

fn print_stats(s: &GraphStats) {
    println!("{}", GraphStats::TSV_HEADER);
    println!("{s}");
}

fn create(path: &std::path::Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::at_path(path, e))
}

fn build_graph(a: BuildGraphArgs) -> Result<()> {
    let mut c = a.common.load()?.effective();
    if !a.inputs.is_empty() {
        c.corpus.inputs = a.inputs;
    }
    if let Some(m) = a.min_count {
        c.corpus.min_count = m;
    }
    if a.wordlist.is_some() {
        c.corpus.wordlist = a.wordlist;
    }
    if let Some(m) = a.weight_mode {
        c.graph.weight_mode = m;
    }
    if let Some(w) = a.idf_window {
        c.graph.idf_window = w;
    }
    c.corpus.tokenizer.lowercase &= !a.no_lowercase;
    c.corpus.tokenizer.strip_non_alpha &= !a.keep_non_alpha;
    if c.corpus.inputs.is_empty() {
        return Err(Error::config("no corpus input files given"));
    }
    let config = serde_json::json!({ "corpus": &c.corpus, "graph": &c.graph });
    with_header("build-graph", c.seed, &config, &a.out, || {
        let g = with_threads(c.threads, || build_graph_from_corpus(&c.corpus, &c.graph))??;
        save_graph(&g, &a.out)?;
        if let Some(p) = &a.edge_list {
            write_edge_list(&g, create(p)?)?;
        }
        print_stats(&g.stats());
        Ok(())
    })
}

fn walk(a: WalkArgs) -> Result<()> {
    let c = a.common.load()?.effective();
    let mut w = c.walk;
    if let Some(p) = a.p {
        w.p = p;
    }
    if let Some(q) = a.q {
        w.q = q;
    }
    if let Some(l) = a.walk_length {
        w.walk_length = l;
    }
    if a.total_walks.is_some() {
        w.total_walks = a.total_walks;
        w.walks_per_node = None;
    }
    if a.walks_per_node.is_some() {
        w.walks_per_node = a.walks_per_node;
        w.total_walks = None;
    }
    if let Some(m) = a.min_walks_per_node {
        w.min_walks_per_node = m;
    }
    if let Some(s) = a.seed {
        w.seed = s;
    }
    w.validate()?;
    with_header("walk", Some(w.seed), &w, &a.out, || {
        let g = load_graph(&a.graph)?;
        let corpus = with_threads(c.threads, || generate_corpus(&g, &w))??;
        if a.text {
            corpus.save_text(g.vocab(), &a.out)?;
        } else {
            corpus.save_binary(g.vocab(), &a.out)?;
        }
        eprintln!("{} walks, {} tokens", corpus.len(), corpus.token_count());
        Ok(())
    })
}

fn train(a: TrainArgs) -> Result<()> {
    let c = a.common.load()?.effective();
    let mut t = c.train;
    macro_rules! set {
        ($($field:ident),*) => { $( if let Some(v) = a.$field { t.$field = v; } )* };
    }
    set!(
        dimension,
        window,
        negatives,
        epochs,
        initial_lr,
        min_lr,
        noise_exponent,
        seed
    );
    if a.subsample.is_some() {
        t.subsample = a.subsample;
    }
    if a.parallel {
        t.deterministic = false;
    }
    if let Some(n) = a.common.threads {
        t.threads = n;
    }
    t.validate()?;
    with_header("train", Some(t.seed), &t, &a.out, || {
        let (vocab, walks) = load_walks(&a.walks)?;
        let (emb, report) = train_with_report(&walks, &vocab, &t)?;
        save_embeddings(&emb, &a.out)?;
        for (i, l) in report.epoch_losses.iter().enumerate() {
            eprintln!("epoch {}\tloss {l:.6}", i + 1);
        }
        Ok(())
    })
}

fn eval(a: EvalArgs) -> Result<()> {
    let emb = wordgraph::embed::load_embeddings(&a.embeddings)?;
    let spec = EvalSpec {
        task: a.task.into(),
        path: a.dataset,
        name: a.name,
    };
    let report = run_eval(&emb, &spec)?;
    if matches!(a.format, OutputFormat::Table | OutputFormat::Both) {
        print!("{}", format_table(std::slice::from_ref(&report)));
    }
    if matches!(a.format, OutputFormat::Json | OutputFormat::Both) {
        println!("{}", report.to_json_line());
    }
    Ok(())
}

fn pipeline(a: PipelineArgs) -> Result<()> {
    let out = run_pipeline(&a.load()?)?;
    println!("stage\tstart\tend\tseconds");
    for t in &out.timings {
        println!("{}\t{:.3}\t{:.3}\t{:.3}", t.stage, t.start, t.end, t.seconds);
    }
    print_stats(&out.graph_stats);
    if !out.reports.is_empty() {
        print!("{}", format_table(&out.reports));
        for r in &out.reports {
            println!("{}", r.to_json_line());
        }
    }
    Ok(())
}

fn stats(a: StatsArgs) -> Result<()> {
    let g = load_graph(&a.graph)?;
    match a.edge_list {
        Some(p) if p.as_os_str() == "-" => write_edge_list(&g, BufWriter::new(io::stdout().lock())),
        Some(p) => write_edge_list(&g, create(&p)?),
        None => {
            print_stats(&g.stats());
            Ok(())
        }
    }
}

fn scaling(a: ScalingArgs) -> Result<()> {
    let c = a.pipeline.load()?;
    eprintln!(
        "{}",
        RunHeader::new("scaling-bench", c.seed, &c.effective()).to_json_line()
    );
    let r = scaling_bench(&c, &a.factors)?;
    print!("{}", r.format_table());
    println!(
        "vocab_identical\t{}\nmax_edge_set_difference\t{}",
        r.vocab_identical, r.max_edge_set_difference
    );
    if a.json {
        println!("{}", serde_json::to_string(&r).expect("report serializes"));
    }
    if !r.vocab_identical {
        return Err(Error::Internal("vocabulary changed under duplication".into()));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::BuildGraph(a) => build_graph(a),
        Command::Walk(a) => walk(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::Pipeline(a) => pipeline(a),
        Command::Stats(a) => stats(a),
        Command::ScalingBench(a) => scaling(a),
    };
    match result {
        Ok(()) => {
            let _ = io::stdout().flush();
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.class().exit_code() as u8)
        }
    }
}
