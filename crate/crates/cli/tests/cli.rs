//! End-to-end tests that drive the compiled binary the way a shell user
//! would: generate a corpus, validate it, run the judge, and feed the run
//! artifacts back into the report commands.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_plurijudge"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should execute")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout should be utf-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr should be utf-8")
}

fn synth_corpus(dir: &Path) {
    let out = run(&["synth", "--out", dir.to_str().unwrap(), "--seed", "42"]);
    assert!(out.status.success(), "synth failed: {}", stderr(&out));
}

#[test]
fn synth_corpus_passes_validation_and_reports_coverage() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    synth_corpus(&corpus);

    let out = run(&["validate", "--corpus-dir", corpus.to_str().unwrap()]);
    assert!(out.status.success(), "validate failed: {}", stderr(&out));
    assert!(stdout(&out).contains("screening clean"));

    let reports = tmp.path().join("reports");
    let out = run(&[
        "stats",
        "--corpus-dir",
        corpus.to_str().unwrap(),
        "--out",
        reports.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stats failed: {}", stderr(&out));
    assert!(stdout(&out).contains("Total"));
    assert!(reports.join("corpus_stats.csv").exists());
    assert!(reports.join("corpus_stats.json").exists());
}

#[test]
fn validate_rejects_gated_score_without_passing_gate() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::write(
        dir.join("patents.jsonl"),
        r#"{"patent_id":"P1","domain":"NLP","title":"t","abstract":"a","claims":["c"],"description":""}
"#,
    )
    .unwrap();
    std::fs::write(
        dir.join("ideas.jsonl"),
        r#"{"idea_id":"P1-I1","patent_id":"P1","system_id":"s","title":"t","description":"d","implementation":"i","differentiation":"f"}
"#,
    )
    .unwrap();
    std::fs::write(
        dir.join("evaluators.jsonl"),
        r#"{"evaluator_id":"E1","domain":"NLP","background":"technical"}
"#,
    )
    .unwrap();
    // Specificity 2 fails the gate, so the technical validity score is a
    // protocol violation.
    std::fs::write(
        dir.join("scores.jsonl"),
        r#"{"evaluator_id":"E1","idea_id":"P1-I1","dimension":"specificity","score":2}
{"evaluator_id":"E1","idea_id":"P1-I1","dimension":"technical_validity","score":3}
"#,
    )
    .unwrap();

    let out = run(&["validate", "--corpus-dir", dir.to_str().unwrap()]);
    assert!(!out.status.success(), "violations must exit nonzero");
    assert!(stdout(&out).contains("technical_validity"));
    assert!(stderr(&out).contains("screening violations"));
}

#[test]
fn run_judge_artifact_feeds_align_coarse_and_reasoning() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    let reports = tmp.path().join("reports");
    synth_corpus(&corpus);

    let out = run(&[
        "run-judge",
        "--corpus-dir",
        corpus.to_str().unwrap(),
        "--out",
        reports.to_str().unwrap(),
        "--dimension",
        "specificity",
        "--domain",
        "NLP",
        "--condition",
        "personalized",
        "--shots",
        "5",
        "--seeds",
        "11",
        "--backend",
        "mock_knn",
    ]);
    assert!(out.status.success(), "run-judge failed: {}", stderr(&out));
    let artifact = reports.join("run-specificity-NLP-personalized-5shot.jsonl");
    assert!(artifact.exists());
    assert!(reports
        .join("run-specificity-NLP-personalized-5shot-summary.csv")
        .exists());

    for (command, csv) in [
        ("align", "alignment_curve.csv"),
        ("coarse", "coarse_judge.csv"),
        ("reasoning", "reasoning_summary.csv"),
    ] {
        let out = run(&[
            command,
            "--corpus-dir",
            corpus.to_str().unwrap(),
            "--out",
            reports.to_str().unwrap(),
            "--artifact",
            artifact.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{command} failed: {}", stderr(&out));
        assert!(reports.join(csv).exists(), "{command} should write {csv}");
        assert!(
            reports.join(csv).with_extension("json").exists(),
            "{command} should write the json twin of {csv}"
        );
        assert!(stdout(&out).contains("personalized"));
    }
}

#[test]
fn config_file_supplies_missing_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    synth_corpus(&corpus);

    // Plural alias with a list, singular key with a bare value: both parse.
    let config = tmp.path().join("study.json");
    std::fs::write(
        &config,
        serde_json::json!({
            "corpus_dir": corpus,
            "out": tmp.path().join("reports"),
            "dimensions": ["specificity", "need_validity"],
            "domain": "NLP",
            "shots": [1, 3],
            "seeds": [11],
        })
        .to_string(),
    )
    .unwrap();

    let out = run(&[
        "align",
        "--config",
        config.to_str().unwrap(),
        "--condition",
        "personalized",
    ]);
    assert!(out.status.success(), "align failed: {}", stderr(&out));
    let text = stdout(&out);
    for dimension in ["specificity", "need_validity"] {
        for shots in [1, 3] {
            let row = format!("{dimension},NLP,personalized,{shots},");
            assert!(text.contains(&row), "missing curve row {row}");
        }
    }
}

#[test]
fn flag_overrides_beat_config_file_values() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    synth_corpus(&corpus);

    let config = tmp.path().join("study.json");
    std::fs::write(
        &config,
        serde_json::json!({
            "corpus_dir": "/nonexistent/from/config",
            "out": tmp.path().join("reports"),
        })
        .to_string(),
    )
    .unwrap();

    let out = run(&[
        "stats",
        "--config",
        config.to_str().unwrap(),
        "--corpus-dir",
        corpus.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "flag should override config: {}",
        stderr(&out)
    );
}

#[test]
fn malformed_inputs_exit_nonzero_with_a_message() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    synth_corpus(&corpus);
    let base = ["--corpus-dir", corpus.to_str().unwrap()];

    let out = run(&[
        &["run-judge"],
        &base[..],
        &[
            "--dimension",
            "specificity",
            "--domain",
            "NLP",
            "--condition",
            "sideways",
            "--shots",
            "3",
        ],
    ]
    .concat());
    assert!(!out.status.success());
    assert!(stderr(&out).contains("sideways"));

    let out = run(&[
        &["coarse"],
        &base[..],
        &["--artifact", "/nonexistent.jsonl"],
    ]
    .concat());
    assert!(!out.status.success());
    assert!(stderr(&out).contains("missing run artifact"));

    let out = run(&["stats", "--corpus-dir", "/nonexistent/corpus"]);
    assert!(!out.status.success());

    let out = run(&[&["reasoning"], &base[..]].concat());
    assert!(
        !out.status.success(),
        "reasoning without artifacts must fail"
    );
    assert!(stderr(&out).contains("--artifact"));
}
