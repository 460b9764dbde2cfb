use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn stackdet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stackdet"))
        .args(args)
        .output()
        .unwrap()
}

fn stackdet_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_stackdet"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn ok(out: Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Two-author toy corpus where every word reveals the label.
fn toy_corpus(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("toy.jsonl");
    let mut f = fs::File::create(&path).unwrap();
    for i in 0..40 {
        let (label, words) = if i % 2 == 0 {
            ("0", ["apple", "brook", "cedar", "dune"])
        } else {
            ("1", ["quartz", "rivet", "sprocket", "turbine"])
        };
        let text: Vec<String> = (0..4)
            .map(|s| {
                format!(
                    "The {} {} {} near the {}.",
                    words[s % 4],
                    words[(s + 1) % 4],
                    words[(s + i) % 4],
                    words[(s + 3) % 4]
                )
            })
            .collect();
        writeln!(f, r#"{{"id":"d{i}","text":"{}","label":{label}}}"#, text.join(" ")).unwrap();
    }
    path
}

#[test]
fn missing_corpus_is_a_config_error_naming_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = stackdet(&["train", "--output", p(&dir.path().join("m"))]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--corpus"), "{err}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "tua = 0.2\n").unwrap();
    let out = stackdet(&["--config", p(&cfg), "simulate", "--trials", "100"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tua"));
}

#[test]
fn separable_toy_corpus_trains_to_perfect_validation() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = toy_corpus(dir.path());
    for detector in ["logreg", "lm"] {
        let m = dir.path().join(detector);
        ok(stackdet(&[
            "train",
            "--corpus",
            p(&corpus),
            "--detector",
            detector,
            "--output",
            p(&m),
        ]));
        let report: serde_json::Value = serde_json::from_slice(&fs::read(m.join("val_report.json")).unwrap()).unwrap();
        assert_eq!(report["auroc"], 1.0, "{detector}: {report}");
    }
    assert!(dir.path().join("logreg/trace.jsonl").exists());
}

#[test]
fn zero_budget_training_writes_the_plain_model() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = toy_corpus(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(stackdet(&[
        "train",
        "--corpus",
        p(&corpus),
        "--tau",
        "0",
        "--output",
        p(&a),
    ]));
    ok(stackdet(&[
        "train",
        "--corpus",
        p(&corpus),
        "--plain",
        "--output",
        p(&b),
    ]));
    assert_eq!(
        fs::read(a.join("model.bin")).unwrap(),
        fs::read(b.join("model.bin")).unwrap()
    );
}

#[test]
fn detect_keeps_order_and_respects_budget() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = toy_corpus(dir.path());
    let m = dir.path().join("m");
    ok(stackdet(&[
        "train",
        "--corpus",
        p(&corpus),
        "--detector",
        "lm",
        "--output",
        p(&m),
    ]));
    let model = m.join("model.json");

    assert_eq!(ok(stackdet_stdin(&["detect", "--model", p(&model)], "")), "");

    let input = concat!(
        r#"{"id":"x","text":"The apple brook. The cedar dune. The apple cedar. The brook dune."}"#,
        "\n",
        r#"{"id":"y","text":"The quartz rivet turbine."}"#,
        "\n\n",
        r#"{"id":"z","text":"One sprocket. Two apple. Three turbine. Four dune. Five rivet. Six brook. Seven cedar. Eight quartz."}"#,
        "\n",
    );
    let out = ok(stackdet_stdin(
        &["detect", "--model", p(&model), "--k", "1", "--tau", "0.25"],
        input,
    ));
    let rows: Vec<serde_json::Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let ids: Vec<&str> = rows.iter().map(|r| r["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["x", "y", "z"]);
    for r in &rows {
        let n = r["n_groups"].as_u64().unwrap() as f64;
        assert!(r["n_filtered"].as_u64().unwrap() as f64 <= (0.25 * n).floor(), "{r}");
        let s = r["score"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&s));
    }
    assert_eq!(rows[2]["n_groups"], 8);
}

#[test]
fn malformed_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = toy_corpus(dir.path());
    let m = dir.path().join("m");
    ok(stackdet(&[
        "train",
        "--corpus",
        p(&corpus),
        "--detector",
        "lm",
        "--output",
        p(&m),
    ]));
    let out = stackdet_stdin(&["detect", "--model", p(&m.join("model.json"))], "{\"id\": 3\n");
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn simulate_writes_one_row_per_grid_point() {
    let out = ok(stackdet(&[
        "simulate",
        "--n",
        "5,10",
        "--alpha",
        "0,0.3",
        "--trials",
        "100",
        "--bootstrap",
        "50",
    ]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("world,delta,tv,n,alpha"));
}

#[test]
fn simulate_rejects_filters_larger_than_the_mixture() {
    let out = stackdet(&["simulate", "--alpha", "0.2", "--alpha-s", "0.3", "--trials", "100"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_rejects_too_few_trials() {
    let out = stackdet(&["simulate", "--trials", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn overlap_of_a_corpus_with_itself_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = toy_corpus(dir.path());
    let out = ok(stackdet(&["overlap", "--human", p(&corpus), "--machine", p(&corpus)]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["proportion"], 1.0);
}

#[test]
fn external_adapter_failures_exit_with_five() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = toy_corpus(dir.path());
    let out = stackdet(&[
        "detect",
        "--external",
        "sh",
        "--external-arg",
        "-c",
        "--external-arg",
        "cat > /dev/null; echo nope",
        "--input",
        p(&corpus),
    ]);
    assert_eq!(out.status.code(), Some(5), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn external_adapter_scores_documents() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = toy_corpus(dir.path());
    let script = "while IFS= read -r l; do case \"$l\" in *quartz*|*rivet*|*sprocket*|*turbine*) echo 0.9;; *) echo 0.1;; esac; done";
    let out = ok(stackdet(&[
        "eval",
        "--external",
        "sh",
        "--external-arg",
        "-c",
        "--external-arg",
        script,
        "--corpus",
        p(&corpus),
    ]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["auroc"], 1.0);
}

#[test]
fn bench_reports_call_counts() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = toy_corpus(dir.path());
    let m = dir.path().join("m");
    ok(stackdet(&[
        "train",
        "--corpus",
        p(&corpus),
        "--detector",
        "lm",
        "--output",
        p(&m),
    ]));
    let out = ok(stackdet(&[
        "bench",
        "--model",
        p(&m.join("model.json")),
        "--corpus",
        p(&corpus),
        "--repeats",
        "1",
    ]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["n_docs"], 40);
    assert_eq!(v["base_calls"], 40);
    // 4 sentences in groups of 3 give 2 groups and a zero budget
    assert_eq!(v["n_groups"], 80);
    assert_eq!(v["stacked_calls"], 40);
}

#[test]
fn synth_is_deterministic_and_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, name: &str| {
        let path = dir.path().join(name);
        ok(stackdet(&[
            "synth",
            "--n-human",
            "5",
            "--n-machine",
            "5",
            "--seed",
            seed,
            "--output",
            p(&path),
        ]));
        fs::read(path).unwrap()
    };
    let (a, b, c) = (run("1", "a"), run("1", "b"), run("2", "c"));
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 10);
}

#[test]
fn logs_are_json_lines_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = toy_corpus(dir.path());
    let out = stackdet(&[
        "--log-level",
        "info",
        "train",
        "--corpus",
        p(&corpus),
        "--detector",
        "lm",
        "--output",
        p(&dir.path().join("m")),
    ]);
    assert!(out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.lines().count() >= 1);
    for line in err.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["level"], "INFO");
    }
}

#[test]
fn zero_budget_bench_costs_about_one_base_pass() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic.jsonl");
    let m = dir.path().join("m");
    ok(stackdet(&[
        "train",
        "--corpus",
        p(&corpus),
        "--detector",
        "lm",
        "--output",
        p(&m),
    ]));
    let out = ok(stackdet(&[
        "bench",
        "--tau",
        "0",
        "--model",
        p(&m.join("model.json")),
        "--corpus",
        p(&corpus),
    ]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let ratio = v["ratio"].as_f64().unwrap();
    assert!((0.9..=1.6).contains(&ratio), "{v}");
    assert_eq!(v["n_filtered"], 0);
}
