use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;
use uslh_cli::parse_scores;

fn uslh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uslh"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = uslh(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

/// A small sample with all four models trained.
fn trained() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&[
        "sample-data",
        "--out-dir",
        &s(&d.join("data")),
        "--dialogues",
        "80",
        "--contexts",
        "8",
        "--seed",
        "5",
    ]);
    let corpus = s(&d.join("data/dialogues.txt"));
    let emotions = s(&d.join("data/emotions.txt"));
    for kind in ["vup", "nup", "empathy"] {
        let data = s(&d.join(format!("{kind}.tsv")));
        ok(&[
            "build-data",
            kind,
            "--corpus",
            &corpus,
            "--emotions",
            &emotions,
            "--part",
            "all",
            "--out",
            &data,
        ]);
        ok(&[
            "train",
            kind,
            "--data",
            &data,
            "--epochs",
            "2",
            "--model-dir",
            &s(&d.join("models")),
        ]);
    }
    ok(&[
        "train",
        "lm",
        "--corpus",
        &corpus,
        "--model-dir",
        &s(&d.join("models")),
    ]);
    dir
}

#[test]
fn missing_model_names_the_path_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let pairs = dir.path().join("pairs.tsv");
    std::fs::write(&pairs, "a\thello .\thi .\n").unwrap();
    let models = dir.path().join("nowhere");
    let out = uslh(&[
        "score",
        "--pairs",
        &s(&pairs),
        "--model-dir",
        &s(&models),
        "--out",
        &s(&dir.path().join("o")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(&s(&models.join("vup.model"))), "{err}");
    assert!(!dir.path().join("o").exists());
}

#[test]
fn malformed_corpus_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.txt");
    std::fs::write(&corpus, "hello __eou__ hi __eou__\n").unwrap();
    let emotions = dir.path().join("e.txt");
    std::fs::write(&emotions, "0 9\n").unwrap();
    let out = uslh(&[
        "build-data",
        "empathy",
        "--corpus",
        &s(&corpus),
        "--emotions",
        &s(&emotions),
        "--out",
        &s(&dir.path().join("x")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn score_contract() {
    let dir = trained();
    let d = dir.path();
    let models = s(&d.join("models"));
    let pairs = s(&d.join("data/pairs.tsv"));
    let n = std::fs::read_to_string(d.join("data/pairs.tsv"))
        .unwrap()
        .lines()
        .count();

    let out = s(&d.join("scores.tsv"));
    ok(&[
        "score",
        "--pairs",
        &pairs,
        "--model-dir",
        &models,
        "--out",
        &out,
    ]);
    let table = parse_scores(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(table.len(), n);
    assert!(table
        .values()
        .all(|c| (0.0..=1.0).contains(&c["usl_h"]) && c.contains_key("empathy")));

    // the persisted bounds reproduce the batch-normalized run
    let again = s(&d.join("again.tsv"));
    let w = format!("{out}.weights");
    ok(&[
        "score",
        "--pairs",
        &pairs,
        "--model-dir",
        &models,
        "--weights",
        &w,
        "--normalizer",
        "file",
        "--out",
        &again,
    ]);
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());

    // column selection
    let sel = s(&d.join("sel.tsv"));
    ok(&[
        "score",
        "--pairs",
        &pairs,
        "--model-dir",
        &models,
        "--metrics",
        "usl_h,vup",
        "--out",
        &sel,
    ]);
    let text = std::fs::read_to_string(&sel).unwrap();
    assert_eq!(text.lines().count(), 2 * n);
    assert!(text
        .lines()
        .all(|l| l.contains("\tusl_h\t") || l.contains("\tvup\t")));
    assert_eq!(
        uslh(&[
            "score",
            "--pairs",
            &pairs,
            "--model-dir",
            &models,
            "--metrics",
            "nope",
            "--out",
            &sel
        ])
        .status
        .code(),
        Some(2)
    );

    // empty input gives empty output
    let empty = d.join("empty.tsv");
    std::fs::write(&empty, "").unwrap();
    let eo = s(&d.join("eo.tsv"));
    ok(&[
        "score",
        "--pairs",
        &s(&empty),
        "--model-dir",
        &models,
        "--out",
        &eo,
    ]);
    assert_eq!(std::fs::read_to_string(&eo).unwrap(), "");

    // file normalization without weights is rejected
    assert_eq!(
        uslh(&[
            "score",
            "--pairs",
            &pairs,
            "--model-dir",
            &models,
            "--normalizer",
            "file",
            "--out",
            &eo
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn rank_outputs_a_permutation_per_pool() {
    let dir = trained();
    let d = dir.path();
    let out = s(&d.join("rank.tsv"));
    let run = ok(&[
        "rank",
        "--pool",
        &s(&d.join("data/pools.tsv")),
        "--model-dir",
        &s(&d.join("models")),
        "--out",
        &out,
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    let pools = std::fs::read_to_string(d.join("data/pools.tsv")).unwrap();
    assert_eq!(text.lines().count(), pools.lines().count());
    let mut by_pool: std::collections::BTreeMap<&str, Vec<(usize, f64)>> = Default::default();
    for l in text.lines() {
        let f: Vec<&str> = l.split('\t').collect();
        by_pool
            .entry(f[0])
            .or_default()
            .push((f[2].parse().unwrap(), f[3].parse().unwrap()));
    }
    for rows in by_pool.values() {
        let mut idx: Vec<usize> = rows.iter().map(|r| r.0).collect();
        idx.sort();
        assert_eq!(idx, (0..rows.len()).collect::<Vec<_>>());
        assert!(rows.windows(2).all(|w| w[0].1 >= w[1].1));
    }
    assert_eq!(
        String::from_utf8_lossy(&run.stdout).lines().count(),
        by_pool.len()
    );
}

#[test]
fn calibrate_evaluate_and_agreement() {
    let dir = trained();
    let d = dir.path();
    let ann = s(&d.join("data/annotations.tsv"));
    let w = s(&d.join("w.txt"));
    ok(&["calibrate", "--annotations", &ann, "--out", &w]);
    let text = std::fs::read_to_string(&w).unwrap();
    assert!(text.starts_with("alpha = "));

    let scores = s(&d.join("scores.tsv"));
    ok(&[
        "score",
        "--pairs",
        &s(&d.join("data/pairs.tsv")),
        "--model-dir",
        &s(&d.join("models")),
        "--weights",
        &w,
        "--out",
        &scores,
    ]);
    let report = s(&d.join("report.tsv"));
    ok(&[
        "evaluate",
        "--scores",
        &scores,
        "--annotations",
        &ann,
        "--metrics",
        "usl_h,bleu2",
        "--weights",
        &w,
        "--out",
        &report,
    ]);
    let r = std::fs::read_to_string(&report).unwrap();
    assert_eq!(r.lines().count(), 1 + 2 * 2);

    let agree = ok(&["agreement", "--annotations", &ann]);
    let out = String::from_utf8_lossy(&agree.stdout);
    for q in [
        "understandable",
        "sensible",
        "specific",
        "overall",
        "human_avg",
        "human_max",
    ] {
        assert!(out.lines().any(|l| l.starts_with(q)), "{out}");
    }
}
