//! Pipeline configuration and the file-to-file stages behind the command
//! line: project, merge, walk, corpus, train, rank, eval.
//!
//! Every stage reads its inputs from disk and writes plain-text artifacts,
//! so `run` is exactly the stages chained over one output directory.
//!
//! # Config grammar
//!
//! One `key = value` pair per line. Blank lines and lines whose first
//! non-blank character is `#` are ignored; there are no trailing comments,
//! since IRIs contain `#`. Keys `ontology`, `mappings` and `annotation_prop`
//! may repeat and accumulate. Relative paths resolve against the config
//! file's directory. Unknown keys are errors.
//!
//! | key | default |
//! |---|---|
//! | `ontology` | (at least one required) |
//! | `mappings` | none |
//! | `mapping_relation` | `=` (`=` or `<`, for rows without a relation) |
//! | `combine` | `union` (`union` or `intersection`) |
//! | `union_rule`, `intersection_rule` | `max`, `mean` |
//! | `annotation_prop` | `rdfs:label` |
//! | `inverse_subclass`, `lenient` | `true`, `false` |
//! | `walk_depth`, `iterations` | 3, 1 |
//! | `replace_prob`, `label_choice` | 0.5, `primary` (or `uniform`) |
//! | `dim`, `epochs`, `window`, `negatives` | 100, 70, 5, 5 |
//! | `initial_lr`, `final_lr` | 0.025, 0.0001 |
//! | `min_count`, `unigram_power`, `subsample` | 1, 0.75, `none` |
//! | `rng_seed`, `workers` | 42, 1 |
//! | `candidates` | none (skips rank and eval) |
//! | `output` | `out` |

use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::alignment::{self, ConfidenceRule, MappingError, MappingSet, Relation};
use crate::corpus::{self, CorpusConfig, LabelChoice, TokenizerConfig};
use crate::graph::{self, WeightedGraph};
use crate::ntriples::{self, Iri, ParseError, ParseOptions};
use crate::projection::{self, LexicalTable, ProjectionConfig};
use crate::ranking::{self, RankingError, RankingReport};
use crate::sgns::{self, TrainConfig, TrainError, WordVectors};
use crate::tsv::TsvError;
use crate::walker::{self, WalkConfig, WalkError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combine {
    Union,
    Intersection,
}

impl fmt::Display for Combine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Combine::Union => "union",
            Combine::Intersection => "intersection",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub ontologies: Vec<PathBuf>,
    pub mappings: Vec<PathBuf>,
    pub mapping_relation: Relation,
    pub combine: Combine,
    pub union_rule: ConfidenceRule,
    pub intersection_rule: ConfidenceRule,
    pub annotation_props: Vec<Iri>,
    pub inverse_subclass: bool,
    pub lenient: bool,
    pub walk_depth: usize,
    pub iterations: usize,
    pub replace_prob: f64,
    pub label_choice: LabelChoice,
    /// Its `rng_seed` and `workers` are ignored in favour of the fields below.
    pub train: TrainConfig,
    pub rng_seed: u64,
    pub workers: usize,
    pub candidates: Option<PathBuf>,
    pub output: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            ontologies: Vec::new(),
            mappings: Vec::new(),
            mapping_relation: Relation::Equivalence,
            combine: Combine::Union,
            union_rule: ConfidenceRule::Max,
            intersection_rule: ConfidenceRule::Mean,
            annotation_props: ProjectionConfig::default().annotation_props,
            inverse_subclass: true,
            lenient: false,
            walk_depth: WalkConfig::default().walk_depth,
            iterations: WalkConfig::default().iterations,
            replace_prob: CorpusConfig::default().replace_prob,
            label_choice: LabelChoice::Primary,
            train: TrainConfig::default(),
            rng_seed: 42,
            workers: 1,
            candidates: None,
            output: PathBuf::from("out"),
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("bad value {value:?} for {key}"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, String> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("bad value {value:?} for {key} (true|false)")),
    }
}

impl PipelineConfig {
    pub fn from_file(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, base).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
    }

    /// Parses config text; relative paths are joined onto `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, String> {
        let mut cfg = PipelineConfig::default();
        let mut props_given = false;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", i + 1))?;
            let (key, value) = (key.trim(), value.trim());
            if key == "annotation_prop" && !props_given {
                cfg.annotation_props.clear();
                props_given = true;
            }
            cfg.set(key, value, base).map_err(|e| format!("line {}: {e}", i + 1))?;
        }
        Ok(cfg)
    }

    /// Applies one setting. Repeatable keys append.
    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<(), String> {
        let path = || base.join(value);
        match key {
            "ontology" => self.ontologies.push(path()),
            "mappings" => self.mappings.push(path()),
            "mapping_relation" => {
                self.mapping_relation = value.parse().map_err(|_| format!("bad relation {value:?} (= or <)"))?
            }
            "combine" => {
                self.combine = match value {
                    "union" => Combine::Union,
                    "intersection" => Combine::Intersection,
                    _ => return Err(format!("bad value {value:?} for combine (union|intersection)")),
                }
            }
            "union_rule" => self.union_rule = value.parse()?,
            "intersection_rule" => self.intersection_rule = value.parse()?,
            "annotation_prop" => self
                .annotation_props
                .push(Iri::new(value).map_err(|e| format!("annotation_prop: {e}"))?),
            "inverse_subclass" => self.inverse_subclass = parse_bool(key, value)?,
            "lenient" => self.lenient = parse_bool(key, value)?,
            "walk_depth" => self.walk_depth = parse_value(key, value)?,
            "iterations" => self.iterations = parse_value(key, value)?,
            "replace_prob" => self.replace_prob = parse_value(key, value)?,
            "label_choice" => {
                self.label_choice = match value {
                    "primary" => LabelChoice::Primary,
                    "uniform" => LabelChoice::Uniform,
                    _ => return Err(format!("bad value {value:?} for label_choice (primary|uniform)")),
                }
            }
            "dim" => self.train.dim = parse_value(key, value)?,
            "epochs" => self.train.epochs = parse_value(key, value)?,
            "window" => self.train.window = parse_value(key, value)?,
            "negatives" => self.train.negatives = parse_value(key, value)?,
            "initial_lr" => self.train.initial_lr = parse_value(key, value)?,
            "final_lr" => self.train.final_lr = parse_value(key, value)?,
            "min_count" => self.train.min_count = parse_value(key, value)?,
            "unigram_power" => self.train.unigram_power = parse_value(key, value)?,
            "subsample" => {
                self.train.subsample = match value {
                    "none" => None,
                    v => Some(parse_value(key, v)?),
                }
            }
            "rng_seed" => self.rng_seed = parse_value(key, value)?,
            "workers" => self.workers = parse_value(key, value)?,
            "candidates" => self.candidates = Some(path()),
            "output" => self.output = path(),
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Every setting in config syntax, paths made absolute; parsing the
    /// result gives back this configuration.
    pub fn to_config_text(&self) -> String {
        let abs = |p: &Path| {
            std::path::absolute(p)
                .unwrap_or_else(|_| p.to_path_buf())
                .display()
                .to_string()
        };
        let mut out = String::new();
        let mut kv = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        for p in &self.ontologies {
            kv("ontology", abs(p));
        }
        for p in &self.mappings {
            kv("mappings", abs(p));
        }
        kv("mapping_relation", self.mapping_relation.symbol().into());
        kv("combine", self.combine.to_string());
        kv("union_rule", self.union_rule.to_string());
        kv("intersection_rule", self.intersection_rule.to_string());
        for p in &self.annotation_props {
            kv("annotation_prop", p.to_string());
        }
        kv("inverse_subclass", self.inverse_subclass.to_string());
        kv("lenient", self.lenient.to_string());
        kv("walk_depth", self.walk_depth.to_string());
        kv("iterations", self.iterations.to_string());
        kv("replace_prob", format!("{:?}", self.replace_prob));
        kv(
            "label_choice",
            match self.label_choice {
                LabelChoice::Primary => "primary",
                LabelChoice::Uniform => "uniform",
            }
            .into(),
        );
        let t = &self.train;
        kv("dim", t.dim.to_string());
        kv("epochs", t.epochs.to_string());
        kv("window", t.window.to_string());
        kv("negatives", t.negatives.to_string());
        kv("initial_lr", format!("{:?}", t.initial_lr));
        kv("final_lr", format!("{:?}", t.final_lr));
        kv("min_count", t.min_count.to_string());
        kv("unigram_power", format!("{:?}", t.unigram_power));
        kv("subsample", t.subsample.map_or("none".into(), |s| format!("{s:?}")));
        kv("rng_seed", self.rng_seed.to_string());
        kv("workers", self.workers.to_string());
        if let Some(c) = &self.candidates {
            kv("candidates", abs(c));
        }
        kv("output", abs(&self.output));
        out
    }

    pub fn projection_config(&self) -> ProjectionConfig {
        ProjectionConfig {
            annotation_props: self.annotation_props.clone(),
            inverse_subclass: self.inverse_subclass,
        }
    }

    pub fn merge_options(&self) -> MergeOptions {
        MergeOptions {
            combine: self.combine,
            union_rule: self.union_rule,
            intersection_rule: self.intersection_rule,
            relation: self.mapping_relation,
        }
    }

    pub fn walk_config(&self) -> WalkConfig {
        WalkConfig {
            walk_depth: self.walk_depth,
            iterations: self.iterations,
            rng_seed: self.rng_seed,
        }
    }

    pub fn corpus_config(&self) -> CorpusConfig {
        CorpusConfig {
            replace_prob: self.replace_prob,
            label_choice: self.label_choice,
            tokenizer: TokenizerConfig::default(),
            rng_seed: self.rng_seed,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            rng_seed: self.rng_seed,
            workers: self.workers,
            ..self.train.clone()
        }
    }

    pub fn layout(&self) -> Layout {
        Layout::new(&self.output)
    }

    /// Checks everything that can be checked before any stage runs.
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.ontologies.is_empty() {
            return Err(PipelineError::Config("at least one ontology is required".into()));
        }
        let inputs = self.ontologies.iter().chain(&self.mappings).chain(&self.candidates);
        for p in inputs {
            if !p.is_file() {
                return Err(PipelineError::MissingInput(p.clone()));
            }
        }
        ontology_names(&self.ontologies).map_err(PipelineError::Config)?;
        self.walk_config()
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        self.train_config()
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        if !(0.0..=1.0).contains(&self.replace_prob) {
            return Err(PipelineError::Config("replace_prob must lie in [0, 1]".into()));
        }
        if self.workers < 1 {
            return Err(PipelineError::Config("workers must be >= 1".into()));
        }
        Ok(())
    }
}

/// Artifact file names inside an output directory.
#[derive(Debug, Clone)]
pub struct Layout {
    pub dir: PathBuf,
}

impl Layout {
    pub fn new(dir: &Path) -> Self {
        Layout { dir: dir.to_path_buf() }
    }

    pub fn edges(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{name}.edges.tsv"))
    }

    pub fn lexical_table(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{name}.lex.tsv"))
    }

    pub fn projection_report(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{name}.report.txt"))
    }

    pub fn mappings(&self) -> PathBuf {
        self.dir.join("mappings.tsv")
    }

    pub fn graph(&self) -> PathBuf {
        self.dir.join("graph.tsv")
    }

    pub fn seeds(&self) -> PathBuf {
        self.dir.join("seeds.txt")
    }

    pub fn walks(&self) -> PathBuf {
        self.dir.join("walks.txt")
    }

    pub fn structure(&self) -> PathBuf {
        self.dir.join("structure.txt")
    }

    pub fn lexical(&self) -> PathBuf {
        self.dir.join("lexical.txt")
    }

    pub fn combined(&self) -> PathBuf {
        self.dir.join("combined.txt")
    }

    pub fn corpus(&self) -> PathBuf {
        self.dir.join("corpus.txt")
    }

    pub fn embeddings(&self) -> PathBuf {
        self.dir.join("embeddings.txt")
    }

    pub fn ranking(&self) -> PathBuf {
        self.dir.join("ranking.tsv")
    }

    pub fn report_tsv(&self) -> PathBuf {
        self.dir.join("report.tsv")
    }

    pub fn report_txt(&self) -> PathBuf {
        self.dir.join("report.txt")
    }

    pub fn manifest(&self) -> PathBuf {
        self.dir.join("manifest.txt")
    }
}

/// File name up to the first `.`: `foo.nt` and `foo.owl.nt` both give `foo`.
pub fn ontology_name(path: &Path) -> String {
    let name = path.file_name().map(|n| n.to_string_lossy()).unwrap_or_default();
    name.split('.').next().unwrap_or_default().to_owned()
}

fn ontology_names(paths: &[PathBuf]) -> Result<Vec<String>, String> {
    let names: Vec<String> = paths.iter().map(|p| ontology_name(p)).collect();
    for (i, n) in names.iter().enumerate() {
        if n.is_empty() {
            return Err(format!("cannot derive a name from {}", paths[i].display()));
        }
        if names[..i].contains(n) {
            return Err(format!("two ontologies share the name {n:?}"));
        }
    }
    Ok(names)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Project,
    Merge,
    Walk,
    Corpus,
    Train,
    Rank,
    Eval,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Project => "project",
            Stage::Merge => "merge",
            Stage::Walk => "walk",
            Stage::Corpus => "corpus",
            Stage::Train => "train",
            Stage::Rank => "rank",
            Stage::Eval => "eval",
        })
    }
}

#[derive(Debug, Error)]
pub enum StageError {
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
    #[error("{path}: {source}")]
    Mappings { path: String, source: MappingError },
    #[error("{path}: {source}")]
    Table { path: String, source: TsvError },
    #[error("{path}: {source}")]
    Walks { path: String, source: WalkError },
    #[error("{path}: {source}")]
    Embeddings { path: String, source: TrainError },
    #[error("{path}: {source}")]
    Pools { path: String, source: RankingError },
    #[error(transparent)]
    Train(TrainError),
    #[error(transparent)]
    Ranking(RankingError),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{0}")]
    Invalid(String),
}

impl StageError {
    /// Bad input as opposed to an environment or internal failure.
    pub fn is_input_error(&self) -> bool {
        match self {
            StageError::Io { source, .. } => {
                matches!(source.kind(), io::ErrorKind::NotFound | io::ErrorKind::InvalidData)
            }
            StageError::Train(TrainError::Io(_)) => false,
            _ => true,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("input file not found: {}", .0.display())]
    MissingInput(PathBuf),
    #[error("stage {stage} failed: {source}")]
    Stage { stage: Stage, source: StageError },
}

impl PipelineError {
    pub fn is_input_error(&self) -> bool {
        match self {
            PipelineError::Config(_) | PipelineError::MissingInput(_) => true,
            PipelineError::Stage { source, .. } => source.is_input_error(),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StageError + '_ {
    move |source| StageError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn open(path: &Path) -> Result<BufReader<File>, StageError> {
    File::open(path).map(BufReader::new).map_err(io_err(path))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<(), StageError> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    f(&mut w).and_then(|_| w.flush()).map_err(io_err(path))
}

fn create_dir(dir: &Path) -> Result<(), StageError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

#[derive(Debug, Clone)]
pub struct ProjectOutput {
    pub name: String,
    pub edges: PathBuf,
    pub lexical: PathBuf,
    pub report: PathBuf,
    pub summary: projection::ProjectionReport,
}

/// Parses every ontology before writing anything, so a parse failure leaves
/// no outputs behind.
pub fn project_stage(
    ontologies: &[PathBuf],
    cfg: &ProjectionConfig,
    lenient: bool,
    out: &Path,
) -> Result<Vec<ProjectOutput>, StageError> {
    let names = ontology_names(ontologies).map_err(StageError::Invalid)?;
    let mut projections = Vec::with_capacity(ontologies.len());
    for path in ontologies {
        let mut bytes = Vec::new();
        open(path)?.read_to_end(&mut bytes).map_err(io_err(path))?;
        let doc = ntriples::parse_bytes(&bytes, ParseOptions { lenient }).map_err(|source| StageError::Parse {
            path: path.display().to_string(),
            source,
        })?;
        if !doc.skipped.is_empty() {
            log::warn!("{}: skipped {} malformed lines", path.display(), doc.skipped.len());
        }
        projections.push(projection::project(&doc.triples, cfg));
    }

    create_dir(out)?;
    let layout = Layout::new(out);
    let mut outputs = Vec::with_capacity(names.len());
    for (name, p) in names.into_iter().zip(projections) {
        let o = ProjectOutput {
            edges: layout.edges(&name),
            lexical: layout.lexical_table(&name),
            report: layout.projection_report(&name),
            summary: p.report,
            name,
        };
        write_file(&o.edges, |w| projection::write_edges_tsv(&p.edges, w))?;
        write_file(&o.lexical, |w| p.lexical.write_tsv(w))?;
        write_file(&o.report, |w| write!(w, "{}", p.report))?;
        log::info!("projected {}: {} edges", o.name, p.report.total_edges());
        outputs.push(o);
    }
    Ok(outputs)
}

#[derive(Debug, Clone, Copy)]
pub struct MergeOptions {
    pub combine: Combine,
    pub union_rule: ConfidenceRule,
    pub intersection_rule: ConfidenceRule,
    /// Relation for mapping rows that do not name one.
    pub relation: Relation,
}

#[derive(Debug, Clone)]
pub struct MergeOutput {
    pub mappings: usize,
    pub vertices: usize,
    pub edges: usize,
    pub seeds: usize,
}

/// Combines the mapping files left to right, merges them with the projected
/// edge lists and writes `mappings.tsv`, `graph.tsv` and `seeds.txt`.
///
/// Seeds are the mapped entities. With no mapping files at all every graph
/// vertex is a seed, which walks each ontology on its own.
pub fn merge_stage(
    edge_files: &[PathBuf],
    mapping_files: &[PathBuf],
    opts: &MergeOptions,
    out: &Path,
) -> Result<MergeOutput, StageError> {
    let mut projections = Vec::with_capacity(edge_files.len());
    for path in edge_files {
        let edges = projection::read_edges_tsv(open(path)?).map_err(|source| StageError::Table {
            path: path.display().to_string(),
            source,
        })?;
        projections.push(edges);
    }
    let mut combined: Option<MappingSet> = None;
    for path in mapping_files {
        let set = alignment::load_mappings(path, opts.relation).map_err(|source| StageError::Mappings {
            path: path.display().to_string(),
            source,
        })?;
        combined = Some(match combined {
            None => set,
            Some(acc) => match opts.combine {
                Combine::Union => alignment::union_with(&acc, &set, opts.union_rule),
                Combine::Intersection => alignment::intersection_with(&acc, &set, opts.intersection_rule),
            },
        });
    }
    let mappings = combined.unwrap_or_default();
    let g = graph::merge(&projections, &mappings);
    let seeds = if mapping_files.is_empty() {
        g.vertices().to_vec()
    } else {
        alignment::seed_entities(&mappings)
    };

    create_dir(out)?;
    let layout = Layout::new(out);
    write_file(&layout.mappings(), |w| mappings.write_tsv(w))?;
    write_file(&layout.graph(), |w| g.write_tsv(w))?;
    write_file(&layout.seeds(), |w| seeds.iter().try_for_each(|s| writeln!(w, "{s}")))?;
    log::info!(
        "merged graph: {} vertices, {} edges, {} mappings, {} seeds",
        g.vertex_count(),
        g.edge_count(),
        mappings.len(),
        seeds.len()
    );
    Ok(MergeOutput {
        mappings: mappings.len(),
        vertices: g.vertex_count(),
        edges: g.edge_count(),
        seeds: seeds.len(),
    })
}

fn read_seeds(path: &Path) -> Result<Vec<Iri>, StageError> {
    let mut seeds = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        seeds
            .push(Iri::new(line).map_err(|e| StageError::Invalid(format!("{}: line {}: {e}", path.display(), i + 1)))?);
    }
    Ok(seeds)
}

/// Writes `walks.txt`; returns the number of walks.
pub fn walk_stage(graph: &Path, seeds: &Path, cfg: &WalkConfig, out: &Path) -> Result<usize, StageError> {
    let g = WeightedGraph::read_tsv(open(graph)?).map_err(|source| StageError::Table {
        path: graph.display().to_string(),
        source,
    })?;
    let seeds = read_seeds(seeds)?;
    let result = walker::generate_walks(&g, &seeds, cfg).map_err(|source| StageError::Walks {
        path: graph.display().to_string(),
        source,
    })?;
    create_dir(out)?;
    let path = Layout::new(out).walks();
    write_file(&path, |w| walker::write_walks(&result.walks, w))?;
    log::info!(
        "{} walks ({} seeds not in the graph)",
        result.walks.len(),
        result.missing_seeds.len()
    );
    Ok(result.walks.len())
}

fn read_lexical(paths: &[PathBuf]) -> Result<LexicalTable, StageError> {
    let mut table = LexicalTable::new();
    for path in paths {
        let t = LexicalTable::read_tsv(open(path)?).map_err(|source| StageError::Table {
            path: path.display().to_string(),
            source,
        })?;
        table.extend(&t);
    }
    Ok(table)
}

/// Writes the three documents and `corpus.txt`, their concatenation.
pub fn corpus_stage(
    walks: &Path,
    lexical_tables: &[PathBuf],
    cfg: &CorpusConfig,
    out: &Path,
) -> Result<corpus::Documents, StageError> {
    let ws = walker::read_walks(open(walks)?).map_err(|source| StageError::Walks {
        path: walks.display().to_string(),
        source,
    })?;
    let lex = read_lexical(lexical_tables)?;
    let docs = corpus::build_documents(&ws, &lex, cfg);
    if docs.iri_fallbacks > 0 {
        log::warn!("{} lexical tokens fell back to the full IRI", docs.iri_fallbacks);
    }
    create_dir(out)?;
    let layout = Layout::new(out);
    write_file(&layout.structure(), |w| corpus::write_sentences(&docs.structure, w))?;
    write_file(&layout.lexical(), |w| corpus::write_sentences(&docs.lexical, w))?;
    write_file(&layout.combined(), |w| corpus::write_sentences(&docs.combined, w))?;
    write_file(&layout.corpus(), |w| corpus::write_sentences(docs.merged(), w))?;
    Ok(docs)
}

/// Trains on `corpus` and writes `embeddings.txt`.
pub fn train_stage(corpus_file: &Path, cfg: &TrainConfig, out: &Path) -> Result<sgns::TrainReport, StageError> {
    let sentences = corpus::read_sentences(open(corpus_file)?).map_err(io_err(corpus_file))?;
    let trained = sgns::train(&sentences, cfg).map_err(StageError::Train)?;
    create_dir(out)?;
    let path = Layout::new(out).embeddings();
    write_file(&path, |w| trained.table.word_vectors().write_text(w))?;
    if let Some(last) = trained.report.epoch_losses.last() {
        log::info!(
            "trained {} tokens x {} dims, final epoch loss {last:.4}",
            trained.table.vocab.len(),
            cfg.dim
        );
    }
    Ok(trained.report)
}

fn load_ranking_inputs(
    embeddings: &Path,
    lexical_tables: &[PathBuf],
    candidates: &Path,
) -> Result<(WordVectors, LexicalTable, Vec<ranking::CandidatePool>), StageError> {
    let vectors = WordVectors::read_text(open(embeddings)?).map_err(|source| StageError::Embeddings {
        path: embeddings.display().to_string(),
        source,
    })?;
    let lex = read_lexical(lexical_tables)?;
    let pools = ranking::read_pools(open(candidates)?).map_err(|source| StageError::Pools {
        path: candidates.display().to_string(),
        source,
    })?;
    Ok((vectors, lex, pools))
}

/// Writes per-candidate scores and ranks to `ranking.tsv`.
pub fn rank_stage(
    embeddings: &Path,
    lexical_tables: &[PathBuf],
    candidates: &Path,
    out: &Path,
) -> Result<(), StageError> {
    let (vectors, lex, pools) = load_ranking_inputs(embeddings, lexical_tables, candidates)?;
    create_dir(out)?;
    write_file(&Layout::new(out).ranking(), |w| {
        ranking::write_rankings(&pools, &vectors, &lex, w)
    })
}

/// Writes `report.tsv` and the human-readable `report.txt`.
pub fn eval_stage(
    embeddings: &Path,
    lexical_tables: &[PathBuf],
    candidates: &Path,
    out: &Path,
) -> Result<RankingReport, StageError> {
    let (vectors, lex, pools) = load_ranking_inputs(embeddings, lexical_tables, candidates)?;
    let report = ranking::evaluate(&pools, &vectors, &lex).map_err(StageError::Ranking)?;
    create_dir(out)?;
    let layout = Layout::new(out);
    write_file(&layout.report_tsv(), |w| report.write_tsv(w))?;
    write_file(&layout.report_txt(), |w| writeln!(w, "{report}"))?;
    Ok(report)
}

fn sha256_file(path: &Path) -> io::Result<String> {
    let mut hasher = Sha256::new();
    io::copy(&mut File::open(path)?, &mut hasher)?;
    Ok(hex::encode(hasher.finalize()))
}

/// Config in parseable form plus `# sha256 <hex> <path>` lines for every
/// input file.
pub fn write_manifest(cfg: &PipelineConfig, path: &Path) -> Result<(), StageError> {
    let mut text = format!("# alignwalk {} run manifest\n", env!("CARGO_PKG_VERSION"));
    text.push_str(&cfg.to_config_text());
    for input in cfg.ontologies.iter().chain(&cfg.mappings).chain(&cfg.candidates) {
        let digest = sha256_file(input).map_err(io_err(input))?;
        let abs = std::path::absolute(input).unwrap_or_else(|_| input.clone());
        text.push_str(&format!("# sha256 {digest} {}\n", abs.display()));
    }
    fs::write(path, text).map_err(io_err(path))
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub layout: Layout,
    pub report: Option<RankingReport>,
}

/// project, merge, walk, corpus, train, then rank and eval when candidates
/// are configured. Outputs of completed stages stay on disk when a later
/// stage fails.
pub fn run(cfg: &PipelineConfig) -> Result<RunOutput, PipelineError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| PipelineError::Config(format!("thread pool: {e}")))?;
    pool.install(|| run_stages(cfg))
}

fn run_stages(cfg: &PipelineConfig) -> Result<RunOutput, PipelineError> {
    let layout = cfg.layout();
    let at = |stage| move |source| PipelineError::Stage { stage, source };
    create_dir(&layout.dir).map_err(at(Stage::Project))?;
    write_manifest(cfg, &layout.manifest()).map_err(at(Stage::Project))?;

    let projected = project_stage(&cfg.ontologies, &cfg.projection_config(), cfg.lenient, &layout.dir)
        .map_err(at(Stage::Project))?;
    let edges: Vec<PathBuf> = projected.iter().map(|p| p.edges.clone()).collect();
    let lexical: Vec<PathBuf> = projected.iter().map(|p| p.lexical.clone()).collect();

    merge_stage(&edges, &cfg.mappings, &cfg.merge_options(), &layout.dir).map_err(at(Stage::Merge))?;
    walk_stage(&layout.graph(), &layout.seeds(), &cfg.walk_config(), &layout.dir).map_err(at(Stage::Walk))?;
    corpus_stage(&layout.walks(), &lexical, &cfg.corpus_config(), &layout.dir).map_err(at(Stage::Corpus))?;
    train_stage(&layout.corpus(), &cfg.train_config(), &layout.dir).map_err(at(Stage::Train))?;

    let report = match &cfg.candidates {
        None => None,
        Some(candidates) => {
            rank_stage(&layout.embeddings(), &lexical, candidates, &layout.dir).map_err(at(Stage::Rank))?;
            Some(eval_stage(&layout.embeddings(), &lexical, candidates, &layout.dir).map_err(at(Stage::Eval))?)
        }
    };
    Ok(RunOutput { layout, report })
}

/// The standard edge and lexical table paths for the configured ontologies.
pub fn projected_paths(cfg: &PipelineConfig) -> (Vec<PathBuf>, Vec<PathBuf>) {
    let layout = cfg.layout();
    cfg.ontologies
        .iter()
        .map(|p| {
            let name = ontology_name(p);
            (layout.edges(&name), layout.lexical_table(&name))
        })
        .unzip()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_defaults_and_overrides() {
        let text = "# comment\n\nontology = a.nt\nontology = /abs/b.nt\nmappings = m.tsv\nwalk_depth = 4\n\
                    annotation_prop = http://www.w3.org/2004/02/skos/core#prefLabel\nsubsample = 0.001\ncandidates = pools.tsv\n";
        let cfg = PipelineConfig::parse(text, Path::new("/base")).unwrap();
        assert_eq!(
            cfg.ontologies,
            [PathBuf::from("/base/a.nt"), PathBuf::from("/abs/b.nt")]
        );
        assert_eq!(cfg.mappings, [PathBuf::from("/base/m.tsv")]);
        assert_eq!(cfg.walk_depth, 4);
        assert_eq!(cfg.iterations, 1);
        assert_eq!(cfg.annotation_props.len(), 1);
        assert_eq!(cfg.annotation_props[0].as_str(), crate::vocab::SKOS_PREF_LABEL);
        assert_eq!(cfg.train.subsample, Some(0.001));
        assert_eq!(cfg.train.dim, 100);
        assert_eq!(cfg.train.epochs, 70);
        assert_eq!(cfg.candidates, Some(PathBuf::from("/base/pools.tsv")));
    }

    #[test]
    fn parse_errors() {
        assert!(PipelineConfig::parse("nonsense\n", Path::new("")).is_err());
        assert!(PipelineConfig::parse("colour = blue\n", Path::new("")).is_err());
        assert!(PipelineConfig::parse("walk_depth = deep\n", Path::new("")).is_err());
        assert!(PipelineConfig::parse("inverse_subclass = maybe\n", Path::new("")).is_err());
    }

    #[test]
    fn config_text_round_trips() {
        let mut cfg = PipelineConfig {
            ontologies: vec![PathBuf::from("/x/a.nt")],
            mappings: vec![PathBuf::from("/x/m.tsv")],
            replace_prob: 0.1 + 0.2,
            ..Default::default()
        };
        cfg.train.initial_lr = 0.03;
        cfg.train.subsample = Some(1e-3);
        cfg.label_choice = LabelChoice::Uniform;
        cfg.combine = Combine::Intersection;
        cfg.output = PathBuf::from("/x/out");
        cfg.candidates = Some(PathBuf::from("/x/p.tsv"));
        let back = PipelineConfig::parse(&cfg.to_config_text(), Path::new("/elsewhere")).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn ontology_names_from_paths() {
        assert_eq!(ontology_name(Path::new("/d/helis.nt")), "helis");
        assert_eq!(ontology_name(Path::new("foodon.owl.nt")), "foodon");
        assert!(ontology_names(&[PathBuf::from("a/x.nt"), PathBuf::from("b/x.nt")]).is_err());
    }

    #[test]
    fn validate_reports_missing_input() {
        let mut cfg = PipelineConfig::default();
        assert!(matches!(cfg.validate(), Err(PipelineError::Config(_))));
        cfg.ontologies.push(PathBuf::from("/definitely/not/here.nt"));
        assert!(matches!(cfg.validate(), Err(PipelineError::MissingInput(_))));
    }
}
