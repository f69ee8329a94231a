//! End-to-end runs: corpus → graph → walks → embeddings (→ evaluation),
//! driven by one JSON config, plus the corpus-duplication scaling bench.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{load_wordlist, open_corpus, TokenScanner, TokenizerConfig, VocabCounter};
use crate::embed::{save_embeddings, train_with_report, EmbeddingMatrix, TrainConfig, TrainReport};
use crate::error::{Error, Result};
use crate::eval::{
    eval_analogy, eval_categorization, eval_similarity, load_analogy, load_categorization, load_similarity, EvalReport,
    Task,
};
use crate::graph::{
    build_graph_from_ids, compute_tf_node_weights, compute_tfidf_node_weights, save_graph, CooccurrenceGraph,
    GraphStats, WeightMode, DEFAULT_IDF_WINDOW,
};
use crate::walk::{generate_corpus, WalkConfig, WalkCorpus};

/// Environment variable holding the default worker-thread count.
pub const THREADS_ENV: &str = "WORDGRAPH_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    /// Read in order as one concatenated stream.
    pub inputs: Vec<PathBuf>,
    pub min_count: u64,
    /// Optional filter, one word per line.
    pub wordlist: Option<PathBuf>,
    pub tokenizer: TokenizerConfig,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            inputs: Vec::new(),
            min_count: 5,
            wordlist: None,
            tokenizer: TokenizerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    pub weight_mode: WeightMode,
    /// Block length for document frequencies in TF-IDF mode.
    pub idf_window: usize,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            weight_mode: WeightMode::default(),
            idf_window: DEFAULT_IDF_WINDOW,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSpec {
    pub task: Task,
    pub path: PathBuf,
    /// Report label; the file stem when unset.
    #[serde(default)]
    pub name: Option<String>,
}

impl EvalSpec {
    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            self.path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Master seed; when set, the walk and train seeds are derived from it.
    pub seed: Option<u64>,
    /// Worker threads for graph and walk stages (and parallel training);
    /// unset means the environment default.
    pub threads: Option<usize>,
    pub output_dir: PathBuf,
    pub corpus: CorpusConfig,
    pub graph: GraphConfig,
    pub walk: WalkConfig,
    pub train: TrainConfig,
    pub eval: Vec<EvalSpec>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: None,
            threads: None,
            output_dir: PathBuf::from("out"),
            corpus: CorpusConfig::default(),
            graph: GraphConfig::default(),
            walk: WalkConfig::default(),
            train: TrainConfig::default(),
            eval: Vec::new(),
        }
    }
}

/// Independent per-stage seed from a master seed.
pub fn derive_seed(master: u64, stage: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stage);
    rng.next_u64()
}

pub const WALK_STAGE_STREAM: u64 = 1;
pub const TRAIN_STAGE_STREAM: u64 = 2;

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(format!("pipeline config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut s = String::new();
        File::open(path)
            .and_then(|mut f| f.read_to_string(&mut s))
            .map_err(|e| Error::at_path(path, e))?;
        Self::from_json(&s)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// The config actually run: stage seeds derived from the master seed.
    pub fn effective(&self) -> Self {
        let mut c = self.clone();
        if let Some(s) = self.seed {
            c.walk.seed = derive_seed(s, WALK_STAGE_STREAM);
            c.train.seed = derive_seed(s, TRAIN_STAGE_STREAM);
        }
        if c.train.threads == 0 {
            c.train.threads = c.threads.unwrap_or(0);
        }
        c
    }

    pub fn validate(&self) -> Result<()> {
        if self.corpus.inputs.is_empty() {
            return Err(Error::config("corpus.inputs is empty"));
        }
        for p in self
            .corpus
            .inputs
            .iter()
            .chain(&self.corpus.wordlist)
            .chain(self.eval.iter().map(|e| &e.path))
        {
            if !p.exists() {
                return Err(Error::config(format!("input {} does not exist", p.display())));
            }
        }
        if self.corpus.min_count < 1 {
            return Err(Error::config("corpus.min_count must be at least 1"));
        }
        if self.graph.idf_window < 1 {
            return Err(Error::config("graph.idf_window must be at least 1"));
        }
        self.walk.validate()?;
        self.train.validate()
    }
}

/// Thread count from `WORDGRAPH_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Run `f` on a rayon pool of `threads` workers (environment default when
/// unset, rayon default when that is unset too).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads.filter(|&n| n > 0).or_else(threads_from_env) {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::Internal(format!("thread pool: {e}"))),
        None => Ok(f()),
    }
}

/// Scan the corpus twice (count, then encode), build the graph and attach
/// node weights.
pub fn build_graph_from_corpus(corpus: &CorpusConfig, graph: &GraphConfig) -> Result<CooccurrenceGraph> {
    let wordlist = corpus.wordlist.as_deref().map(load_wordlist).transpose()?;
    let mut counter = VocabCounter::new();
    counter.add_stream(&mut TokenScanner::new(open_corpus(&corpus.inputs)?, corpus.tokenizer))?;
    let vocab = counter.build(corpus.min_count, wordlist.as_ref())?;
    let mut ids = Vec::with_capacity(vocab.total_count() as usize);
    vocab.encode_stream(
        &mut TokenScanner::new(open_corpus(&corpus.inputs)?, corpus.tokenizer),
        &mut ids,
    )?;
    let pw = match graph.weight_mode {
        WeightMode::Tf => compute_tf_node_weights(&vocab)?,
        WeightMode::TfIdf => compute_tfidf_node_weights(&ids, &vocab, graph.idf_window)?,
    };
    let mut g = build_graph_from_ids(&ids, vocab)?;
    g.set_node_weights(pw)?;
    Ok(g)
}

/// Load a walk corpus in either the binary or the text format.
pub fn load_walks(path: &Path) -> Result<(crate::corpus::Vocabulary, WalkCorpus)> {
    let mut magic = [0u8; 8];
    let n = File::open(path)
        .and_then(|f| BufReader::new(f).take(8).read(&mut magic))
        .map_err(|e| Error::at_path(path, e))?;
    if n == 8 && &magic == b"WGWALKS\0" {
        WalkCorpus::load_binary(path)
    } else {
        WalkCorpus::load_text(path)
    }
}

pub fn run_eval(emb: &EmbeddingMatrix, spec: &EvalSpec) -> Result<EvalReport> {
    let report = match spec.task {
        Task::Similarity => eval_similarity(emb, &load_similarity(&spec.path)?),
        Task::Analogy => eval_analogy(emb, &load_analogy(&spec.path)?),
        Task::Categorization => eval_categorization(emb, &load_categorization(&spec.path)?),
    }?;
    Ok(report.with_dataset(spec.label()))
}

/// Wall-clock interval of one stage, in seconds since the run started.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub start: f64,
    pub end: f64,
    pub seconds: f64,
}

fn millis(s: f64) -> f64 {
    (s * 1000.0).round() / 1000.0
}

struct Clock {
    origin: Instant,
    stages: Vec<StageTiming>,
}

impl Clock {
    fn new() -> Self {
        Clock {
            origin: Instant::now(),
            stages: Vec::new(),
        }
    }

    fn time<T>(&mut self, stage: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = self.origin.elapsed().as_secs_f64();
        let out = f().map_err(|e| e.in_stage(stage))?;
        let end = self.origin.elapsed().as_secs_f64();
        self.stages.push(StageTiming {
            stage: stage.to_owned(),
            start: millis(start),
            end: millis(end),
            seconds: millis(end - start),
        });
        Ok(out)
    }
}

/// Provenance record written to stderr and next to each artifact.
#[derive(Debug, Clone, Serialize)]
pub struct RunHeader<'a, C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub seed: Option<u64>,
    pub config: &'a C,
}

impl<'a, C: Serialize> RunHeader<'a, C> {
    pub fn new(command: &'a str, seed: Option<u64>, config: &'a C) -> Self {
        RunHeader {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            config,
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("header serializes")
    }

    /// Write `<artifact>.meta.json`.
    pub fn write_sidecar(&self, artifact: &Path) -> Result<PathBuf> {
        let mut name = artifact.as_os_str().to_owned();
        name.push(".meta.json");
        let path = PathBuf::from(name);
        let mut f = File::create(&path).map_err(|e| Error::at_path(&path, e))?;
        writeln!(f, "{}", serde_json::to_string_pretty(self).expect("header serializes"))
            .map_err(|e| Error::at_path(&path, e))?;
        Ok(path)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Artifacts {
    pub graph: PathBuf,
    pub walks: PathBuf,
    pub embeddings: PathBuf,
    pub timing: PathBuf,
    pub meta: PathBuf,
}

impl Artifacts {
    pub fn in_dir(dir: &Path) -> Self {
        Artifacts {
            graph: dir.join("graph.wgg"),
            walks: dir.join("walks.wgw"),
            embeddings: dir.join("embeddings.txt"),
            timing: dir.join("timing.json"),
            meta: dir.join("pipeline.meta.json"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineOutcome {
    pub artifacts: Artifacts,
    pub graph_stats: GraphStats,
    pub token_count: u64,
    pub walk_count: usize,
    pub walk_tokens: usize,
    pub train: TrainReport,
    pub timings: Vec<StageTiming>,
    pub reports: Vec<EvalReport>,
}

impl PipelineOutcome {
    pub fn stage_seconds(&self, stage: &str) -> f64 {
        self.timings
            .iter()
            .filter(|t| t.stage == stage)
            .map(|t| t.seconds)
            .sum()
    }
}

/// Run every stage, writing artifacts into `config.output_dir`.
///
/// Prints the run header as one JSON line on stderr.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutcome> {
    run_pipeline_inner(config, true)
}

fn run_pipeline_inner(config: &PipelineConfig, announce: bool) -> Result<PipelineOutcome> {
    config.validate()?;
    let cfg = config.effective();
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::at_path(dir, e))?;
    let artifacts = Artifacts::in_dir(dir);
    let header = RunHeader::new("pipeline", cfg.seed, &cfg);
    if announce {
        eprintln!("{}", header.to_json_line());
    }
    header.write_sidecar(&dir.join("pipeline"))?;

    let mut clock = Clock::new();
    let threads = cfg.threads;
    let graph = clock.time("build-graph", || {
        let g = with_threads(threads, || build_graph_from_corpus(&cfg.corpus, &cfg.graph))??;
        save_graph(&g, &artifacts.graph)?;
        Ok(g)
    })?;
    let walks = clock.time("walk", || {
        let w = with_threads(threads, || generate_corpus(&graph, &cfg.walk))??;
        w.save_binary(graph.vocab(), &artifacts.walks)?;
        Ok(w)
    })?;
    let (emb, train) = clock.time("train", || {
        let (emb, report) = train_with_report(&walks, graph.vocab(), &cfg.train)?;
        save_embeddings(&emb, &artifacts.embeddings)?;
        Ok((emb, report))
    })?;
    let reports = if cfg.eval.is_empty() {
        Vec::new()
    } else {
        clock.time("eval", || cfg.eval.iter().map(|s| run_eval(&emb, s)).collect())?
    };

    let outcome = PipelineOutcome {
        graph_stats: graph.stats(),
        token_count: graph.vocab().total_count(),
        walk_count: walks.len(),
        walk_tokens: walks.token_count(),
        train,
        timings: clock.stages,
        reports,
        artifacts,
    };
    let path = &outcome.artifacts.timing;
    let mut f = File::create(path).map_err(|e| Error::at_path(path, e))?;
    writeln!(
        f,
        "{}",
        serde_json::to_string_pretty(&outcome.timings).expect("timings serialize")
    )
    .map_err(|e| Error::at_path(path, e))?;
    Ok(outcome)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub factor: usize,
    pub tokens: u64,
    pub vocab_size: usize,
    pub edge_count: usize,
    pub graph_seconds: f64,
    pub walk_seconds: f64,
    pub train_seconds: f64,
}

impl ScalingRow {
    pub fn walk_train_seconds(&self) -> f64 {
        self.walk_seconds + self.train_seconds
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    /// Same vocabulary (words and order) at every factor.
    pub vocab_identical: bool,
    /// Largest number of edges present at one factor but not the first.
    pub max_edge_set_difference: usize,
}

impl ScalingReport {
    /// `(factor, graph-build ratio, walk+train ratio)` against the first row.
    pub fn ratios(&self) -> Vec<(usize, f64, f64)> {
        let Some(base) = self.rows.first() else {
            return Vec::new();
        };
        self.rows
            .iter()
            .map(|r| {
                (
                    r.factor,
                    r.graph_seconds / base.graph_seconds,
                    r.walk_train_seconds() / base.walk_train_seconds(),
                )
            })
            .collect()
    }

    pub fn format_table(&self) -> String {
        let mut s =
            String::from("factor\ttokens\tvocab\tedges\tgraph_s\twalk_s\ttrain_s\tgraph_ratio\twalk_train_ratio\n");
        for (r, (_, g, wt)) in self.rows.iter().zip(self.ratios()) {
            s += &format!(
                "{}\t{}\t{}\t{}\t{:.3}\t{:.3}\t{:.3}\t{:.3}\t{:.3}\n",
                r.factor, r.tokens, r.vocab_size, r.edge_count, r.graph_seconds, r.walk_seconds, r.train_seconds, g, wt
            );
        }
        s
    }
}

/// Run the pipeline on the corpus repeated `f` times for each factor.
///
/// Each run writes to `output_dir/x<f>`. Vocabulary filtering uses
/// `min_count * f` so the retained word set does not grow with duplication.
pub fn scaling_bench(config: &PipelineConfig, factors: &[usize]) -> Result<ScalingReport> {
    if factors.is_empty() || factors.contains(&0) {
        return Err(Error::config("duplication factors must be positive"));
    }
    let mut rows = Vec::new();
    let mut first: Option<CooccurrenceGraph> = None;
    let mut vocab_identical = true;
    let mut max_edge_set_difference = 0;
    for &f in factors {
        let mut c = config.clone();
        c.corpus.inputs = std::iter::repeat_n(&config.corpus.inputs, f)
            .flatten()
            .cloned()
            .collect();
        c.corpus.min_count = config.corpus.min_count * f as u64;
        c.output_dir = config.output_dir.join(format!("x{f}"));
        c.eval.clear();
        let out = run_pipeline_inner(&c, false)?;
        let g = crate::graph::load_graph(&out.artifacts.graph)?;
        match &first {
            None => first = Some(g.clone()),
            Some(base) => {
                vocab_identical &= base.vocab().words() == g.vocab().words();
                let extra = g.edges().filter(|&(u, x, _)| !base.has_edge(u, x)).count();
                max_edge_set_difference = max_edge_set_difference.max(extra);
            }
        }
        rows.push(ScalingRow {
            factor: f,
            tokens: out.token_count,
            vocab_size: out.graph_stats.node_count,
            edge_count: out.graph_stats.edge_count,
            graph_seconds: out.stage_seconds("build-graph"),
            walk_seconds: out.stage_seconds("walk"),
            train_seconds: out.stage_seconds("train"),
        });
    }
    Ok(ScalingReport {
        rows,
        vocab_identical,
        max_edge_set_difference,
    })
}
