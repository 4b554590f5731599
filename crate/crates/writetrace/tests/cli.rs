//! CLI integration tests: exit codes, file formats, manifests, and
//! determinism, driving the installed binary through real files.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_writetrace")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn CLI")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = run_in(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn no_arguments_prints_usage_and_exits_one() {
    let out = Command::new(bin()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stderr);
    assert!(text.contains("Usage"), "no usage text: {text}");
}

#[test]
fn unknown_subcommand_exits_one() {
    let out = Command::new(bin()).arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let out = Command::new(bin()).arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("Usage"));
}

#[test]
fn missing_input_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["lm", "train", "--corpus", "nope.txt", "--out", "m.json"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.txt"));
}

#[test]
fn malformed_session_log_exits_two_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.jsonl"), "{\"session_id\":\"s\"}\n").unwrap();
    let out = run_in(
        dir.path(),
        &["features", "extract", "--sessions", "bad.jsonl", "--out", "f.csv"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn eval_roc_reproduces_the_three_quarters_fixture() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("s.csv"),
        "id,score,label\na,0.8,1\nb,0.3,1\nc,0.5,0\nd,0.1,0\n",
    )
    .unwrap();
    let out = run_in(
        dir.path(),
        &["eval", "roc", "--scores", "s.csv", "--labels", "in-file", "--out", "roc.csv"],
    );
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("auc=0.75"));
    let roc = fs::read_to_string(dir.path().join("roc.csv")).unwrap();
    assert!(roc.starts_with("threshold,fpr,tpr\n"));
    assert!(roc.contains("# summary auc=0.75"));
    // Manifest written beside the output, recording the input hash.
    let manifest = fs::read_to_string(dir.path().join("roc.csv.manifest.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(v["command"], "eval roc");
    assert_eq!(v["inputs"][0]["name"], "s.csv");
    assert_eq!(v["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn labels_from_separate_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.csv"), "id,score\na,0.8\nb,0.3\nc,0.5\nd,0.1\n").unwrap();
    fs::write(dir.path().join("l.csv"), "id,label\na,1\nb,1\nc,0\nd,0\n").unwrap();
    let out = run_in(
        dir.path(),
        &["eval", "roc", "--scores", "s.csv", "--labels", "l.csv", "--out", "roc.csv"],
    );
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("auc=0.75"));
    // in-file without a label column is a data error.
    let out = run_in(
        dir.path(),
        &["eval", "roc", "--scores", "s.csv", "--labels", "in-file", "--out", "r2.csv"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lm_score_twice_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["simgen", "corpora", "--mode", "seed", "--split", "train", "--out", "c.txt"]);
    ok(dir.path(), &["lm", "train", "--corpus", "c.txt", "--out", "m.json"]);
    ok(
        dir.path(),
        &["simgen", "corpora", "--mode", "lm", "--lm", "m.json", "--n", "5", "--min-words", "40",
          "--max-words", "60", "--seed", "3", "--out", "e.txt"],
    );
    ok(dir.path(), &["lm", "score", "--model", "m.json", "--essays", "e.txt", "--out", "s1.csv"]);
    ok(dir.path(), &["lm", "score", "--model", "m.json", "--essays", "e.txt", "--out", "s2.csv"]);
    let a = fs::read(dir.path().join("s1.csv")).unwrap();
    let b = fs::read(dir.path().join("s2.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("id,n_tokens,ppl\n"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn per_sentence_scores_have_sentence_indices() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.txt"), "the cat sat on the mat\nthe dog ran over the hill\n").unwrap();
    fs::write(dir.path().join("e.txt"), "The cat sat. The dog ran over the hill.\n").unwrap();
    ok(dir.path(), &["lm", "train", "--corpus", "c.txt", "--min-count", "1", "--out", "m.json"]);
    ok(
        dir.path(),
        &["lm", "score", "--model", "m.json", "--essays", "e.txt", "--per-sentence", "--out", "s.csv"],
    );
    let text = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(text.starts_with("id,sentence,n_tokens,ppl\n"));
    assert!(text.contains("e0000,0,"));
    assert!(text.contains("e0000,1,"));
}

#[test]
fn simgen_sessions_emit_parseable_logs_and_config() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["simgen", "sessions", "--kind", "copytask", "--n", "6", "--seed", "1", "--out", "s.jsonl"],
    );
    let log = fs::read_to_string(dir.path().join("s.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(log.lines().next().unwrap()).unwrap();
    for field in ["session_id", "writer_id", "task_id", "t_ms", "kind", "payload", "pos", "cut_len"] {
        assert!(first.get(field).is_some(), "missing field {field}");
    }
    let labels = fs::read_to_string(dir.path().join("s.labels.csv")).unwrap();
    assert!(labels.starts_with("session_id,label\n"));
    assert_eq!(labels.matches(",draft").count(), 3);
    assert_eq!(labels.matches(",transcribe").count(), 3);
    // Generator constants written beside the data.
    let gen = fs::read_to_string(dir.path().join("s.gen.toml")).unwrap();
    assert!(gen.contains("mu_log_iki_mean"));
}

#[test]
fn features_extract_excludes_invalid_sessions_by_default() {
    let dir = tempfile::tempdir().unwrap();
    let good = r#"{"session_id":"g","writer_id":"w1","t_ms":0,"kind":"Insert","payload":"h","pos":0}"#;
    let bad = r#"{"session_id":"b","writer_id":"w2","t_ms":0,"kind":"Backspace","payload":"","pos":0}"#;
    fs::write(dir.path().join("s.jsonl"), format!("{good}\n{bad}\n")).unwrap();
    let out = run_in(
        dir.path(),
        &["features", "extract", "--sessions", "s.jsonl", "--out", "f.csv"],
    );
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("excluded 1"));
    let table = fs::read_to_string(dir.path().join("f.csv")).unwrap();
    assert_eq!(table.lines().count(), 2); // header + the good session

    ok(
        dir.path(),
        &["features", "extract", "--sessions", "s.jsonl", "--include-invalid", "--out", "f2.csv"],
    );
    let table = fs::read_to_string(dir.path().join("f2.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn aitext_scores_decide_positive_below_any_threshold() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.txt"), "the cat sat on the mat\n").unwrap();
    fs::write(dir.path().join("e.txt"), "the cat sat\n").unwrap();
    ok(dir.path(), &["lm", "train", "--corpus", "c.txt", "--min-count", "1", "--out", "m.json"]);
    ok(
        dir.path(),
        &["detect", "aitext", "score", "--model", "m.json", "--essays", "e.txt",
          "--threshold", "-inf", "--out", "d.jsonl"],
    );
    let text = fs::read_to_string(dir.path().join("d.jsonl")).unwrap();
    let v: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(v["decision"], true);
    assert_eq!(v["detector"], "PerplexityAiText");
}

#[test]
fn impostor_flag_flips_pair_scores() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["simgen", "sessions", "--kind", "repeaters", "--writers", "6",
          "--sessions-per-writer", "2", "--seed", "9", "--out", "r.jsonl"],
    );
    ok(
        dir.path(),
        &["detect", "pairs", "fit", "--sessions", "r.jsonl", "--n-same", "6", "--n-diff", "6",
          "--seed", "10", "--rounds", "20", "--out", "m.json"],
    );
    // First two session ids in the log form one same-writer pair.
    let log = fs::read_to_string(dir.path().join("r.jsonl")).unwrap();
    let mut ids = Vec::new();
    for line in log.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let id = v["session_id"].as_str().unwrap().to_string();
        if !ids.contains(&id) {
            ids.push(id);
        }
    }
    fs::write(dir.path().join("p.csv"), format!("id_a,id_b\n{},{}\n", ids[0], ids[1])).unwrap();
    ok(
        dir.path(),
        &["detect", "pairs", "score", "--model", "m.json", "--sessions", "r.jsonl",
          "--pairs", "p.csv", "--out", "d1.jsonl"],
    );
    ok(
        dir.path(),
        &["detect", "pairs", "score", "--model", "m.json", "--sessions", "r.jsonl",
          "--pairs", "p.csv", "--impostor", "--out", "d2.jsonl"],
    );
    let score = |name: &str| -> f64 {
        let text = fs::read_to_string(dir.path().join(name)).unwrap();
        let v: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        v["score"].as_f64().unwrap()
    };
    assert_eq!(score("d1.jsonl"), -score("d2.jsonl"));
}

#[test]
fn config_file_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cfg.toml"), "[lm]\norder = 2\nalpha = 0.5\n").unwrap();
    fs::write(dir.path().join("c.txt"), "a b c d e f g\n").unwrap();
    ok(
        dir.path(),
        &["--config", "cfg.toml", "lm", "train", "--corpus", "c.txt", "--min-count", "1",
          "--out", "m.json"],
    );
    let model = fs::read_to_string(dir.path().join("m.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&model).unwrap();
    assert_eq!(v["order"], 2);
    assert_eq!(v["smoothing_alpha"], 0.5);
    // Flags still beat the config file.
    ok(
        dir.path(),
        &["--config", "cfg.toml", "lm", "train", "--corpus", "c.txt", "--order", "4",
          "--min-count", "1", "--out", "m2.json"],
    );
    let model = fs::read_to_string(dir.path().join("m2.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&model).unwrap();
    assert_eq!(v["order"], 4);
}

#[test]
fn corpora_seed_mode_needs_no_seed_but_lm_mode_does() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["simgen", "corpora", "--mode", "seed", "--split", "holdout", "--out", "h.txt"]);
    assert!(dir.path().join("h.txt").exists());
    let out = run_in(
        dir.path(),
        &["simgen", "corpora", "--mode", "human", "--n", "2", "--min-words", "40",
          "--max-words", "60", "--out", "x.txt"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));
}

#[test]
fn derive_jumps_flag_changes_event_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let lines = [
        r#"{"session_id":"s","writer_id":"w","t_ms":0,"kind":"Insert","payload":"a","pos":0}"#,
        r#"{"session_id":"s","writer_id":"w","t_ms":10,"kind":"Insert","payload":"b","pos":1}"#,
        r#"{"session_id":"s","writer_id":"w","t_ms":20,"kind":"Insert","payload":"x","pos":0}"#,
    ];
    fs::write(dir.path().join("s.jsonl"), lines.join("\n")).unwrap();
    ok(dir.path(), &["features", "extract", "--sessions", "s.jsonl", "--out", "f1.csv"]);
    ok(
        dir.path(),
        &["features", "extract", "--sessions", "s.jsonl", "--derive-jumps", "--out", "f2.csv"],
    );
    // Jump-edit count is identical either way (mid-document inserts count),
    // but the derived log parses with an explicit JumpInsert kind.
    let f1 = fs::read_to_string(dir.path().join("f1.csv")).unwrap();
    let f2 = fs::read_to_string(dir.path().join("f2.csv")).unwrap();
    assert_eq!(f1, f2);
}

#[test]
fn eval_report_at_fixed_fpr() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("s.csv"),
        "id,score,label\na,0.9,1\nb,0.6,1\nc,0.4,1\nd,0.7,0\ne,0.3,0\nf,0.1,0\n",
    )
    .unwrap();
    ok(
        dir.path(),
        &["eval", "report", "--scores", "s.csv", "--operating-point", "fpr:0.0",
          "--out", "rep.json"],
    );
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("rep.json")).unwrap()).unwrap();
    assert_eq!(v["false_pos"], 0);
    assert_eq!(v["operating_point"], "fpr:0.0");
    // Bad operating point is a usage-level data error.
    let out = run_in(
        dir.path(),
        &["eval", "report", "--scores", "s.csv", "--operating-point", "magic", "--out", "r.json"],
    );
    assert_eq!(out.status.code(), Some(2));
}
