//! Command-line front end. Each subcommand runs one pipeline stage; `run`
//! chains them all. Exit codes: 0 success, 1 internal error, 2 input error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use alignwalk::pipeline::{self, Layout, PipelineConfig, PipelineError, Stage, StageError};
use clap::{ArgAction, Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "alignwalk", version, about = "Alignment-tailored ontology embeddings")]
struct Cli {
    /// Worker threads; 1 keeps every stage deterministic.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    rng_seed: Option<u64>,
    /// Config file supplying defaults; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Extra `key=value` settings in config syntax, applied after the file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutDir {
    /// Output directory (default: the config's `output`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Project ontologies to edge lists and lexical tables.
    Project {
        #[arg(long, num_args = 1..)]
        onto: Vec<PathBuf>,
        #[arg(long, action = ArgAction::Set)]
        inverse_subclass: Option<bool>,
        #[arg(long, num_args = 1..)]
        annotation_prop: Vec<String>,
        /// Skip malformed lines instead of failing.
        #[arg(long)]
        lenient: bool,
        #[command(flatten)]
        out: OutDir,
    },
    /// Combine mappings and merge the projected graphs.
    Merge {
        #[arg(long, num_args = 1..)]
        edges: Vec<PathBuf>,
        #[arg(long, num_args = 1..)]
        mappings: Vec<PathBuf>,
        /// union or intersection
        #[arg(long)]
        combine: Option<String>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Generate biased random walks from the seed entities.
    Walk {
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        seeds: Option<PathBuf>,
        #[arg(long)]
        walk_depth: Option<usize>,
        #[arg(long)]
        iterations: Option<usize>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Build the structure, lexical and combined documents.
    Corpus {
        #[arg(long)]
        walks: Option<PathBuf>,
        #[arg(long, num_args = 1..)]
        lex: Vec<PathBuf>,
        #[arg(long)]
        replace_prob: Option<f64>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Train skip-gram embeddings on the corpus.
    Train {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        negatives: Option<usize>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Score and rank every candidate of every pool.
    Rank(RankArgs),
    /// Compute MRR and Hits@K over the candidate pools.
    Eval(RankArgs),
    /// Run every stage from a config file.
    Run,
}

#[derive(Args)]
struct RankArgs {
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long, num_args = 1..)]
    lex: Vec<PathBuf>,
    #[arg(long)]
    candidates: Option<PathBuf>,
    #[command(flatten)]
    out: OutDir,
}

enum Failure {
    Input(String),
    Internal(String),
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Internal(e.to_string())
        }
    }
}

fn stage(stage: Stage) -> impl FnOnce(StageError) -> Failure {
    move |source| PipelineError::Stage { stage, source }.into()
}

fn set(cfg: &mut PipelineConfig, key: &str, value: impl ToString) -> Result<(), Failure> {
    cfg.set(key, &value.to_string(), Path::new("")).map_err(Failure::Input)
}

fn or_paths(given: Vec<PathBuf>, default: Vec<PathBuf>) -> Vec<PathBuf> {
    if given.is_empty() {
        default
    } else {
        given
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::from_file(path)?,
        None => PipelineConfig::default(),
    };
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::Input(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        set(&mut cfg, k.trim(), v.trim())?;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(s) = cli.rng_seed {
        cfg.rng_seed = s;
    }
    if cfg.workers < 1 {
        return Err(Failure::Input("--workers must be >= 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build_global()
        .map_err(|e| Failure::Internal(e.to_string()))?;

    let out_dir = |o: OutDir, cfg: &mut PipelineConfig| {
        if let Some(o) = o.out {
            cfg.output = o;
        }
        cfg.layout()
    };

    match cli.command {
        Command::Project {
            onto,
            inverse_subclass,
            annotation_prop,
            lenient,
            out,
        } => {
            if !onto.is_empty() {
                cfg.ontologies = onto;
            }
            if let Some(b) = inverse_subclass {
                cfg.inverse_subclass = b;
            }
            if !annotation_prop.is_empty() {
                cfg.annotation_props.clear();
                for p in annotation_prop {
                    set(&mut cfg, "annotation_prop", p)?;
                }
            }
            cfg.lenient |= lenient;
            let layout = out_dir(out, &mut cfg);
            if cfg.ontologies.is_empty() {
                return Err(Failure::Input("no ontology given (--onto)".into()));
            }
            for p in &cfg.ontologies {
                if !p.is_file() {
                    return Err(PipelineError::MissingInput(p.clone()).into());
                }
            }
            let outputs = pipeline::project_stage(&cfg.ontologies, &cfg.projection_config(), cfg.lenient, &layout.dir)
                .map_err(stage(Stage::Project))?;
            for o in outputs {
                println!("{}: {} edges -> {}", o.name, o.summary.total_edges(), o.edges.display());
            }
        }
        Command::Merge {
            edges,
            mappings,
            combine,
            out,
        } => {
            if let Some(c) = combine {
                set(&mut cfg, "combine", c)?;
            }
            let layout = out_dir(out, &mut cfg);
            let edges = or_paths(edges, pipeline::projected_paths(&cfg).0);
            let mappings = or_paths(mappings, cfg.mappings.clone());
            let m = pipeline::merge_stage(&edges, &mappings, &cfg.merge_options(), &layout.dir)
                .map_err(stage(Stage::Merge))?;
            println!(
                "{} vertices, {} edges, {} mappings, {} seeds",
                m.vertices, m.edges, m.mappings, m.seeds
            );
        }
        Command::Walk {
            graph,
            seeds,
            walk_depth,
            iterations,
            out,
        } => {
            if let Some(d) = walk_depth {
                cfg.walk_depth = d;
            }
            if let Some(i) = iterations {
                cfg.iterations = i;
            }
            let layout = out_dir(out, &mut cfg);
            let graph = graph.unwrap_or_else(|| layout.graph());
            let seeds = seeds.unwrap_or_else(|| layout.seeds());
            let n =
                pipeline::walk_stage(&graph, &seeds, &cfg.walk_config(), &layout.dir).map_err(stage(Stage::Walk))?;
            println!("{n} walks -> {}", layout.walks().display());
        }
        Command::Corpus {
            walks,
            lex,
            replace_prob,
            out,
        } => {
            if let Some(p) = replace_prob {
                cfg.replace_prob = p;
            }
            if !(0.0..=1.0).contains(&cfg.replace_prob) {
                return Err(Failure::Input("replace_prob must lie in [0, 1]".into()));
            }
            let layout = out_dir(out, &mut cfg);
            let walks = walks.unwrap_or_else(|| layout.walks());
            let lex = or_paths(lex, pipeline::projected_paths(&cfg).1);
            let docs = pipeline::corpus_stage(&walks, &lex, &cfg.corpus_config(), &layout.dir)
                .map_err(stage(Stage::Corpus))?;
            println!(
                "{} sentences per document -> {}",
                docs.structure.len(),
                layout.corpus().display()
            );
        }
        Command::Train {
            corpus,
            dim,
            epochs,
            window,
            negatives,
            out,
        } => {
            let t = &mut cfg.train;
            t.dim = dim.unwrap_or(t.dim);
            t.epochs = epochs.unwrap_or(t.epochs);
            t.window = window.unwrap_or(t.window);
            t.negatives = negatives.unwrap_or(t.negatives);
            let layout = out_dir(out, &mut cfg);
            let corpus = corpus.unwrap_or_else(|| layout.corpus());
            let report =
                pipeline::train_stage(&corpus, &cfg.train_config(), &layout.dir).map_err(stage(Stage::Train))?;
            println!(
                "{} training pairs, final epoch loss {:.4} -> {}",
                report.examples,
                report.epoch_losses.last().copied().unwrap_or(0.0),
                layout.embeddings().display()
            );
        }
        Command::Rank(args) => {
            let (layout, embeddings, lex, candidates) = rank_inputs(args, &mut cfg, out_dir)?;
            pipeline::rank_stage(&embeddings, &lex, &candidates, &layout.dir).map_err(stage(Stage::Rank))?;
            println!("rankings -> {}", layout.ranking().display());
        }
        Command::Eval(args) => {
            let (layout, embeddings, lex, candidates) = rank_inputs(args, &mut cfg, out_dir)?;
            let report =
                pipeline::eval_stage(&embeddings, &lex, &candidates, &layout.dir).map_err(stage(Stage::Eval))?;
            println!("{report}");
        }
        Command::Run => {
            if cli.config.is_none() {
                return Err(Failure::Input("run needs --config FILE".into()));
            }
            let result = pipeline::run(&cfg)?;
            match result.report {
                Some(report) => println!("{report}"),
                None => println!("embeddings -> {}", result.layout.embeddings().display()),
            }
        }
    }
    Ok(())
}

type RankInputs = (Layout, PathBuf, Vec<PathBuf>, PathBuf);

fn rank_inputs(
    args: RankArgs,
    cfg: &mut PipelineConfig,
    out_dir: impl FnOnce(OutDir, &mut PipelineConfig) -> Layout,
) -> Result<RankInputs, Failure> {
    let layout = out_dir(args.out, cfg);
    let embeddings = args.embeddings.unwrap_or_else(|| layout.embeddings());
    let lex = or_paths(args.lex, pipeline::projected_paths(cfg).1);
    let candidates = args
        .candidates
        .or_else(|| cfg.candidates.clone())
        .ok_or_else(|| Failure::Input("no candidate pools given (--candidates)".into()))?;
    Ok((layout, embeddings, lex, candidates))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(1)
        }
    }
}
