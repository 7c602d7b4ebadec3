mod stats;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use prelink::authors::ProfileTable;
use prelink::candidates::{CandidateIndex, DEFAULT_CANDIDATES};
use prelink::corpus::{write_atomic, Clock, CorpusStore, FixedClock, StoreLock, SystemClock, Timestamp};
use prelink::eval::{evaluate, EvalConfig};
use prelink::forest::{bootstrap_training_set, train_forest, ForestParams};
use prelink::matcher::batch_match;
use prelink::scope::{scope_report, scope_report_csv, ScopeRules};
use prelink::synth::{gen_synthetic_corpus, PerturbationProfile};
use prelink::{Error, ForestModel};

const PROFILES_FILE: &str = "profiles.jsonl";

#[derive(Parser)]
#[command(
    name = "prelink",
    version,
    about = "Link arXiv preprints to their published versions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic corpus with ground truth.
    Gen(GenArgs),
    /// Load preprint and/or published JSONL files into a store.
    Ingest {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        preprints: Option<PathBuf>,
        #[arg(long)]
        published: Option<PathBuf>,
    },
    /// Per-category scope report as CSV.
    Scope {
        #[arg(long)]
        store: PathBuf,
        /// Rules JSON; the shipped rules when omitted.
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Train a forest on the store's DOI matches.
    Train {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 100)]
        trees: usize,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = 3)]
        neg_per_pos: usize,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Match every unmerged preprint and record the decisions.
    Match {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_CANDIDATES)]
        candidates: usize,
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        time: TimeArgs,
    },
    /// Merge every matched, not yet merged preprint into its published record.
    Merge {
        #[arg(long)]
        store: PathBuf,
    },
    /// Subject breakdown of preprints without a published version.
    Stats {
        #[arg(long)]
        store: PathBuf,
    },
    /// Held-out precision and recall of the classifier step.
    Eval {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        trees: usize,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = 3)]
        neg_per_pos: usize,
        #[arg(long, default_value_t = DEFAULT_CANDIDATES)]
        candidates: usize,
    },
    /// Flag a preprint as withdrawn.
    Withdraw {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        id: String,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    title_sub: f64,
    #[arg(long, default_value_t = 0.05)]
    author_change: f64,
    #[arg(long, default_value_t = 0.2)]
    abstract_edit: f64,
    #[arg(long, default_value_t = 0.3)]
    doi_rate: f64,
    #[arg(long, default_value_t = 0.01)]
    wrong_doi: f64,
    #[arg(long, default_value_t = 0.15)]
    abstract_missing: f64,
    #[arg(long, default_value_t = 0.2)]
    unpublished: f64,
    #[arg(long, default_value_t = 0.01)]
    withdrawn: f64,
}

#[derive(Args)]
struct TimeArgs {
    /// Decision time in seconds since the epoch. Defaults to
    /// SOURCE_DATE_EPOCH, then the system clock.
    #[arg(long)]
    timestamp: Option<u64>,
}

impl TimeArgs {
    fn clock(&self) -> Result<Box<dyn Clock>, Failure> {
        if let Some(t) = self.timestamp {
            return Ok(Box::new(FixedClock(Timestamp(t))));
        }
        match std::env::var("SOURCE_DATE_EPOCH") {
            Ok(v) => v
                .trim()
                .parse()
                .map(|t| Box::new(FixedClock(Timestamp(t))) as Box<dyn Clock>)
                .map_err(|_| Failure::usage("SOURCE_DATE_EPOCH is not an integer")),
            Err(_) => Ok(Box::new(SystemClock)),
        }
    }
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure::Usage(msg.into())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            report_error("usage", &msg);
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            report_error(e.kind(), &e.to_string());
            ExitCode::from(1)
        }
    }
}

fn report_error(kind: &str, message: &str) {
    let line = serde_json::json!({ "error": kind, "message": message });
    eprintln!("{line}");
}

fn run(command: Command) -> CmdResult {
    match command {
        Command::Gen(a) => cmd_gen(a),
        Command::Ingest {
            store,
            preprints,
            published,
        } => cmd_ingest(&store, preprints.as_deref(), published.as_deref()),
        Command::Scope { store, rules, report } => cmd_scope(&store, rules.as_deref(), report.as_deref()),
        Command::Train {
            store,
            model,
            trees,
            depth,
            neg_per_pos,
            threshold,
            seed,
        } => {
            let params = ForestParams {
                n_trees: trees,
                max_depth: depth,
                seed,
                decision_threshold: threshold,
            };
            cmd_train(&store, &model, &params, neg_per_pos)
        }
        Command::Match {
            store,
            model,
            candidates,
            report,
            time,
        } => {
            let Some(model) = model.filter(|m| m.is_file()) else {
                return Err(Failure::usage("model required: run `prelink train` and pass --model"));
            };
            cmd_match(&store, &model, candidates, report.as_deref(), time.clock()?.as_ref())
        }
        Command::Merge { store } => cmd_merge(&store),
        Command::Stats { store } => cmd_stats(&store),
        Command::Eval {
            store,
            seed,
            report,
            trees,
            depth,
            neg_per_pos,
            candidates,
        } => {
            let config = EvalConfig {
                seed,
                n_trees: trees,
                max_depth: depth,
                neg_per_pos,
                candidates_k: candidates,
            };
            cmd_eval(&store, &config, report.as_deref())
        }
        Command::Withdraw { store, id } => cmd_withdraw(&store, &id),
    }
}

fn cmd_gen(a: GenArgs) -> CmdResult {
    let profile = PerturbationProfile {
        title_word_substitution: a.title_sub,
        author_change: a.author_change,
        abstract_sentence_edit: a.abstract_edit,
        doi_rate: a.doi_rate,
        wrong_doi_rate: a.wrong_doi,
        published_abstract_missing: a.abstract_missing,
        unpublished_fraction: a.unpublished,
        withdrawn_rate: a.withdrawn,
    };
    let corpus = gen_synthetic_corpus(a.n, &profile, a.seed)?;
    corpus.write_to(&a.out)?;
    print_json(&serde_json::json!({
        "preprints": corpus.preprints.len(),
        "published": corpus.published.len(),
        "pairs": corpus.truth_map().len(),
    }))
}

/// Load a store for reading. The directory must exist.
fn open_store(dir: &Path) -> Result<CorpusStore, Failure> {
    if !dir.is_dir() {
        return Err(Failure::usage(format!("store {} does not exist", dir.display())));
    }
    Ok(CorpusStore::load(dir)?)
}

/// Persist the store and the author profiles derived from it.
fn save_store(store: &CorpusStore, dir: &Path) -> CmdResult {
    store.save(dir)?;
    let profiles = ProfileTable::build(store)?;
    write_atomic(&dir.join(PROFILES_FILE), profiles.to_jsonl().as_bytes())?;
    Ok(())
}

fn cmd_ingest(dir: &Path, preprints: Option<&Path>, published: Option<&Path>) -> CmdResult {
    if preprints.is_none() && published.is_none() {
        return Err(Failure::usage("nothing to ingest: pass --preprints and/or --published"));
    }
    let _lock = StoreLock::acquire(dir)?;
    let mut store = CorpusStore::load(dir)?;
    let mut out = serde_json::Map::new();
    // Published records first so a re-run sees the same DOI index.
    if let Some(p) = published {
        out.insert(
            "published".into(),
            serde_json::to_value(store.ingest_published(p)?).expect("serializable"),
        );
    }
    if let Some(p) = preprints {
        out.insert(
            "preprints".into(),
            serde_json::to_value(store.ingest_preprints(p)?).expect("serializable"),
        );
    }
    save_store(&store, dir)?;
    print_json(&out)
}

fn cmd_scope(dir: &Path, rules: Option<&Path>, report: Option<&Path>) -> CmdResult {
    let store = open_store(dir)?;
    let rules = match rules {
        Some(p) => ScopeRules::from_file(p)?,
        None => ScopeRules::default(),
    };
    let csv = scope_report_csv(&scope_report(&store, &rules));
    emit(report, &csv)
}

fn cmd_train(dir: &Path, model_path: &Path, params: &ForestParams, neg_per_pos: usize) -> CmdResult {
    params.validate()?;
    let store = open_store(dir)?;
    let index = CandidateIndex::build(&store);
    let data = bootstrap_training_set::<f64>(&store, &index, neg_per_pos, params.seed)?;
    let model = train_forest(&data, params)?;
    model.save(model_path)?;
    let positives = data.iter().filter(|p| p.label).count();
    print_json(&serde_json::json!({
        "positives": positives,
        "negatives": data.len() - positives,
        "n_trees": model.n_trees,
        "max_depth": model.max_depth,
        "seed": model.seed,
    }))
}

fn cmd_match(dir: &Path, model_path: &Path, k: usize, report: Option<&Path>, clock: &dyn Clock) -> CmdResult {
    let model = ForestModel::load(model_path)?;
    let _lock = StoreLock::acquire(dir)?;
    let mut store = open_store(dir)?;
    let index = CandidateIndex::build(&store);
    let run = batch_match(&mut store, &index, &model, k, clock)?;
    save_store(&store, dir)?;
    emit(report, &pretty(&run))
}

fn cmd_merge(dir: &Path) -> CmdResult {
    let _lock = StoreLock::acquire(dir)?;
    let mut store = open_store(dir)?;
    let pending: Vec<_> = store
        .decisions()
        .filter(|d| d.is_match() && !store.is_merged(&d.preprint.value))
        .cloned()
        .collect();
    for d in &pending {
        store.merge_on_publication(d)?;
    }
    save_store(&store, dir)?;
    print_json(&serde_json::json!({
        "merged": pending.len(),
        "total_merged": store.merged_pairs().count(),
    }))
}

fn cmd_stats(dir: &Path) -> CmdResult {
    let store = open_store(dir)?;
    emit(None, &stats::subject_table(&store))
}

fn cmd_eval(dir: &Path, config: &EvalConfig, report: Option<&Path>) -> CmdResult {
    let store = open_store(dir)?;
    let index = CandidateIndex::build(&store);
    let (result, _) = evaluate(&store, &index, config)?;
    emit(report, &pretty(&result))
}

fn cmd_withdraw(dir: &Path, id: &str) -> CmdResult {
    let _lock = StoreLock::acquire(dir)?;
    let mut store = open_store(dir)?;
    let changed = store.mark_withdrawn(id)?;
    save_store(&store, dir)?;
    print_json(&serde_json::json!({ "id": id, "changed": changed }))
}

fn pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn print_json<T: Serialize>(value: &T) -> CmdResult {
    emit(None, &(serde_json::to_string(value).expect("serializable") + "\n"))
}

/// Write to `path` when given, and always to stdout.
fn emit(path: Option<&Path>, text: &str) -> CmdResult {
    if let Some(p) = path {
        write_atomic(p, text.as_bytes())?;
    }
    let mut out = std::io::stdout().lock();
    // A closed pipe is not worth failing the command over.
    let _ = out.write_all(text.as_bytes());
    Ok(())
}
