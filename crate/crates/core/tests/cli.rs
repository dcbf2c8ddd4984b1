use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use alignwalk::synthetic::{self, SyntheticConfig};
use tempfile::TempDir;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data").join(name)
}

fn alignwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alignwalk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// A small generated task plus a config for it; `output` is left to the caller.
fn synthetic_setup(dir: &Path) -> PathBuf {
    let task = synthetic::generate(&SyntheticConfig {
        classes: 40,
        pool_size: 10,
        ..Default::default()
    });
    let files = task.write(&dir.join("input")).unwrap();
    let cfg = dir.join("task.conf");
    fs::write(
        &cfg,
        format!(
            "# small generated task\nontology = {}\nontology = {}\nmappings = {}\ncandidates = {}\n\
             walk_depth = 4\niterations = 3\nepochs = 2\ndim = 100\n",
            s(&files.source),
            s(&files.target),
            s(&files.seeds),
            s(&files.pools)
        ),
    )
    .unwrap();
    cfg
}

const ARTIFACTS: [&str; 14] = [
    "source.edges.tsv",
    "source.lex.tsv",
    "source.report.txt",
    "target.edges.tsv",
    "target.lex.tsv",
    "mappings.tsv",
    "graph.tsv",
    "seeds.txt",
    "walks.txt",
    "structure.txt",
    "corpus.txt",
    "embeddings.txt",
    "ranking.tsv",
    "report.tsv",
];

#[test]
fn version_flag() {
    let out = alignwalk(&["--version"]);
    assert_ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn project_writes_unit_weight_edges() {
    let dir = TempDir::new().unwrap();
    let out = alignwalk(&[
        "project",
        "--onto",
        s(&data("foodon_fragment.nt")),
        "--out",
        s(dir.path()),
    ]);
    assert_ok(&out);
    let edges = fs::read_to_string(dir.path().join("foodon_fragment.edges.tsv")).unwrap();
    assert_eq!(edges.lines().count(), 5);
    assert!(edges.lines().all(|l| l.ends_with("\t1.0")));
    assert!(edges.contains("urn:owl2vec4oa:inverseSubClassOf"));
    assert!(dir.path().join("foodon_fragment.lex.tsv").is_file());
    let report = fs::read_to_string(dir.path().join("foodon_fragment.report.txt")).unwrap();
    assert!(report.contains("edges.existential = 1"));
}

#[test]
fn inverse_subclass_can_be_disabled() {
    let dir = TempDir::new().unwrap();
    let out = alignwalk(&[
        "project",
        "--onto",
        s(&data("foodon_fragment.nt")),
        "--inverse-subclass=false",
        "--out",
        s(dir.path()),
    ]);
    assert_ok(&out);
    let edges = fs::read_to_string(dir.path().join("foodon_fragment.edges.tsv")).unwrap();
    assert_eq!(edges.matches("urn:owl2vec4oa:inverseSubClassOf").count(), 0);
    assert_eq!(edges.lines().count(), 3);
}

#[test]
fn malformed_input_exits_2_without_outputs() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.nt");
    fs::write(
        &bad,
        "<http://example.org/a> <http://example.org/p> <http://example.org/b>\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = alignwalk(&[
        "project",
        "--onto",
        s(&data("helis_fragment.nt")),
        s(&bad),
        "--out",
        s(&out_dir),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.nt"));
    assert!(!out_dir.exists() || fs::read_dir(&out_dir).unwrap().next().is_none());

    let out = alignwalk(&["project", "--lenient", "--onto", s(&bad), "--out", s(&out_dir)]);
    assert_ok(&out);
}

#[test]
fn missing_inputs_fail_before_any_stage() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("c.conf");
    let out_dir = dir.path().join("out");
    fs::write(&cfg, format!("ontology = nowhere.nt\noutput = {}\n", s(&out_dir))).unwrap();
    let out = alignwalk(&["--config", s(&cfg), "run"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere.nt"));
    assert!(!out_dir.exists());

    let out = alignwalk(&["walk", "--graph", s(&dir.path().join("none.tsv")), "--out", s(&out_dir)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_config_values_are_input_errors() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("c.conf");
    fs::write(&cfg, "walk_depth = zero\n").unwrap();
    assert_eq!(alignwalk(&["--config", s(&cfg), "run"]).status.code(), Some(2));
    fs::write(
        &cfg,
        format!("ontology = {}\nwalk_depth = 0\n", s(&data("helis_fragment.nt"))),
    )
    .unwrap();
    assert_eq!(alignwalk(&["--config", s(&cfg), "run"]).status.code(), Some(2));
    assert_eq!(alignwalk(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn failing_stage_is_named() {
    let dir = TempDir::new().unwrap();
    let pools = dir.path().join("pools.tsv");
    // the target is not among the candidates
    fs::write(&pools, "e:s\te:t\te:a\n").unwrap();
    let cfg = dir.path().join("c.conf");
    fs::write(
        &cfg,
        format!(
            "ontology = {}\nontology = {}\nmappings = {}\ncandidates = {}\ndim = 8\nepochs = 1\noutput = out\n",
            s(&data("helis_fragment.nt")),
            s(&data("foodon_fragment.nt")),
            s(&data("fragment_mappings.tsv")),
            s(&pools)
        ),
    )
    .unwrap();
    let out = alignwalk(&["--config", s(&cfg), "run"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stage rank failed"));
    // earlier stages keep their outputs
    assert!(dir.path().join("out/embeddings.txt").is_file());
}

#[test]
fn run_produces_manifest_embeddings_and_report() {
    let dir = TempDir::new().unwrap();
    let cfg = synthetic_setup(dir.path());
    let out_dir = dir.path().join("run");
    let out = alignwalk(&["--config", s(&cfg), "--set", &format!("output={}", s(&out_dir)), "run"]);
    assert_ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("Hits@10"));
    for name in ARTIFACTS {
        assert!(out_dir.join(name).is_file(), "{name} missing");
    }
    let emb = fs::read_to_string(out_dir.join("embeddings.txt")).unwrap();
    let header: Vec<usize> = emb
        .lines()
        .next()
        .unwrap()
        .split(' ')
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(header[1], 100);
    assert_eq!(header[0], emb.lines().count() - 1);

    let manifest = fs::read_to_string(out_dir.join("manifest.txt")).unwrap();
    for key in [
        "walk_depth = 4",
        "iterations = 3",
        "epochs = 2",
        "dim = 100",
        "window = 5",
        "negatives = 5",
        "replace_prob = 0.5",
        "rng_seed = 42",
        "workers = 1",
        "unigram_power = 0.75",
    ] {
        assert!(manifest.contains(key), "manifest lacks {key}");
    }
    assert_eq!(manifest.matches("# sha256 ").count(), 4);

    // the manifest is itself a config that reproduces the run
    let again = dir.path().join("again");
    let out = alignwalk(&[
        "--config",
        s(&out_dir.join("manifest.txt")),
        "--set",
        &format!("output={}", s(&again)),
        "run",
    ]);
    assert_ok(&out);
    for name in ["walks.txt", "corpus.txt", "embeddings.txt", "report.tsv"] {
        assert_eq!(
            fs::read(out_dir.join(name)).unwrap(),
            fs::read(again.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn run_equals_chained_subcommands() {
    let dir = TempDir::new().unwrap();
    let cfg = synthetic_setup(dir.path());
    let run_dir = dir.path().join("run");
    let chain_dir = dir.path().join("chain");
    assert_ok(&alignwalk(&[
        "--config",
        s(&cfg),
        "--set",
        &format!("output={}", s(&run_dir)),
        "run",
    ]));

    let base = ["--config", s(&cfg), "--set"];
    let out_set = format!("output={}", s(&chain_dir));
    for stage in ["project", "merge", "walk", "corpus", "train", "rank", "eval"] {
        let mut args = base.to_vec();
        args.push(&out_set);
        args.push(stage);
        assert_ok(&alignwalk(&args));
    }
    for name in ARTIFACTS.iter().chain(&["lexical.txt", "combined.txt", "report.txt"]) {
        assert_eq!(
            fs::read(run_dir.join(name)).unwrap(),
            fs::read(chain_dir.join(name)).unwrap(),
            "{name} differs"
        );
    }
}

#[test]
fn explicit_paths_work_without_config() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let o = s(d);
    assert_ok(&alignwalk(&[
        "project",
        "--onto",
        s(&data("helis_fragment.nt")),
        s(&data("foodon_fragment.nt")),
        "--out",
        o,
    ]));
    assert_ok(&alignwalk(&[
        "merge",
        "--edges",
        s(&d.join("helis_fragment.edges.tsv")),
        s(&d.join("foodon_fragment.edges.tsv")),
        "--mappings",
        s(&data("fragment_mappings.tsv")),
        "--out",
        o,
    ]));
    assert_eq!(fs::read_to_string(d.join("seeds.txt")).unwrap().lines().count(), 2);
    assert_ok(&alignwalk(&[
        "--rng-seed",
        "9",
        "walk",
        "--walk-depth",
        "3",
        "--iterations",
        "10",
        "--out",
        o,
    ]));
    assert_eq!(fs::read_to_string(d.join("walks.txt")).unwrap().lines().count(), 20);
    assert_ok(&alignwalk(&[
        "corpus",
        "--lex",
        s(&d.join("helis_fragment.lex.tsv")),
        s(&d.join("foodon_fragment.lex.tsv")),
        "--out",
        o,
    ]));
    assert_eq!(fs::read_to_string(d.join("corpus.txt")).unwrap().lines().count(), 60);
    assert_ok(&alignwalk(&["train", "--dim", "8", "--epochs", "2", "--out", o]));
    let emb = fs::read_to_string(d.join("embeddings.txt")).unwrap();
    assert!(emb.starts_with(&format!("{} 8\n", emb.lines().count() - 1)));
}
