//! End-to-end checks of the `pairstream` binary.

use std::path::Path;
use std::process::{Command, Output};

fn pairstream(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pairstream"))
        .args(args)
        .env_remove("PAIRSTREAM_SEED")
        .output()
        .expect("spawn pairstream")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(String::from).collect()).collect()
}

fn write_libsvm(path: &Path) {
    let mut text = String::from("# tiny separable set\n");
    for i in 0..40 {
        let v = 0.5 + (i % 7) as f64 / 10.0;
        if i % 2 == 0 {
            text += &format!("+1 1:{v} 3:0.1\n");
        } else {
            text += &format!("-1 1:-{v} 2:0.2\n");
        }
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn run_on_separable_synth_task() {
    let o = pairstream(&["run", "--seeds", "0..5", "--buffer-sizes", "64", "--synth-sep", "6"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[0], ["dataset", "policy", "s", "seed", "auc", "ensembleAvgRisk", "avgHypRisk", "wallMillis"]);
    assert_eq!(rows.len(), 6);
    for row in &rows[1..] {
        let auc: f64 = row[4].parse().unwrap();
        assert!(auc >= 0.95, "auc {auc}");
        assert_eq!(row[7], "0");
    }
}

#[test]
fn missing_data_file_leaves_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rows.csv");
    let o = pairstream(&["run", "--data", "/nonexistent/file.svm", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
    assert!(String::from_utf8_lossy(&o.stderr).contains("not found"));
}

#[test]
fn sweep_needs_two_sizes() {
    let o = pairstream(&["sweep", "--buffer-sizes", "16"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sweep needs ≥2 sizes"));
}

#[test]
fn sweep_grid_covers_policies_and_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rows.csv");
    let summary = dir.path().join("summary.csv");
    let o = pairstream(&[
        "sweep",
        "--policy",
        "rsx,rs",
        "--buffer-sizes",
        "4,16",
        "--seeds",
        "1,2,3",
        "--synth-pos",
        "60",
        "--synth-neg",
        "60",
        "--out",
        out.to_str().unwrap(),
        "--summary-out",
        summary.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 1 + 2 * 2 * 3);
    let keys: Vec<(String, String, String)> =
        rows[1..].iter().map(|r| (r[1].clone(), r[2].clone(), r[3].clone())).collect();
    assert_eq!(keys[0], ("RSX".into(), "4".into(), "1".into()));
    assert_eq!(keys[11], ("RS".into(), "16".into(), "3".into()));
    let summary = csv_rows(&std::fs::read_to_string(&summary).unwrap());
    assert_eq!(summary[0], ["policy", "s", "seeds", "aucMean", "aucSd", "avgHypRiskMean"]);
    assert_eq!(summary.len(), 5);
}

#[test]
fn sweep_without_paths_prints_both_tables() {
    let o = pairstream(&["sweep", "--buffer-sizes", "2,4", "--synth-pos", "20", "--synth-neg", "20"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let (rows, summary) = text.split_once("\n\n").unwrap();
    assert_eq!(rows.lines().count(), 3);
    assert!(summary.starts_with("policy,s,seeds"));
}

#[test]
fn json_output_parses() {
    let o = pairstream(&["run", "--format", "json", "--synth-pos", "30", "--synth-neg", "30"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["policy"], "RSX");
    assert!(rows[0]["auc"].is_f64());
}

#[test]
fn metric_task_leaves_auc_empty() {
    let o = pairstream(&["run", "--task", "metric", "--synth-dim", "3", "--synth-pos", "40", "--synth-neg", "40"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[1][4], "");
    assert!(rows[1][6].parse::<f64>().unwrap() >= 0.0);
}

#[test]
fn environment_seed_is_the_default() {
    let run = |env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_pairstream"));
        cmd.args(["run", "--synth-pos", "30", "--synth-neg", "30"]);
        cmd.env_remove("PAIRSTREAM_SEED");
        if let Some(v) = env {
            cmd.env("PAIRSTREAM_SEED", v);
        }
        stdout(&cmd.output().unwrap())
    };
    let with_env = run(Some("42"));
    assert_eq!(csv_rows(&with_env)[1][3], "42");
    assert_eq!(with_env, stdout(&pairstream(&["run", "--synth-pos", "30", "--synth-neg", "30", "--seeds", "42"])));
    assert_eq!(csv_rows(&run(None))[1][3], "0");
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(
        &cfg,
        "policy = \"fifo\"\nbuffer-sizes = [3, 5]\nseeds = \"0..2\"\nsynth-pos = 25\nsynth-neg = 25\n",
    )
    .unwrap();
    let o = pairstream(&["run", "--config", cfg.to_str().unwrap(), "--buffer-sizes", "7"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 3);
    assert!(rows[1..].iter().all(|r| r[1] == "FIFO" && r[2] == "7"));

    std::fs::write(&cfg, "buffer_sizes = 3\n").unwrap();
    assert_eq!(pairstream(&["run", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn run_on_libsvm_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("tiny.svm");
    write_libsvm(&data);
    let o = pairstream(&["run", "--data", data.to_str().unwrap(), "--buffer-sizes", "8", "--train-frac", "0.5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[1][0], "tiny");
    assert_eq!(rows[1][4].parse::<f64>().unwrap(), 1.0);

    let o = pairstream(&["ingest", "--data", data.to_str().unwrap()]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[0], ["name", "points", "dimension", "positives", "negatives", "max_l2_norm", "nonzeros"]);
    assert_eq!(&rows[1][..5], ["tiny", "40", "3", "20", "20"]);
}

#[test]
fn ingest_reports_parse_errors_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.svm");
    std::fs::write(&data, "+1 1:0.5\n-1 2:x\n").unwrap();
    let o = pairstream(&["ingest", "--data", data.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn bounds_tables() {
    let o = pairstream(&["bounds"]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[0], ["table", "variant", "formula", "value"]);
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[1][0], "1");
    assert_eq!(rows[1].last().unwrap(), "0.2");

    let dir = tempfile::tempdir().unwrap();
    let inputs = dir.path().join("b.toml");
    std::fs::write(&inputs, "n = 101\ndelta = 0.1\nregret = 10.0\n").unwrap();
    let o = pairstream(&["bounds", "--inputs", inputs.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l.starts_with("thm3,")));

    std::fs::write(&inputs, "delta = 2.0\nregret = 1.0\n").unwrap();
    assert_eq!(pairstream(&["bounds", "--inputs", inputs.to_str().unwrap()]).status.code(), Some(1));
    std::fs::write(&inputs, "nope = 1\n").unwrap();
    assert_eq!(pairstream(&["bounds", "--inputs", inputs.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn disttest_contract() {
    let dir = tempfile::tempdir().unwrap();
    let hist = dir.path().join("hist.csv");
    let o = pairstream(&[
        "disttest",
        "--policy",
        "rsx",
        "-s",
        "4",
        "--stream-len",
        "20",
        "--trials",
        "200000",
        "--hist-out",
        hist.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[0], ["test", "statistic", "threshold", "pass"]);
    assert!(rows[1..].iter().all(|r| r[3] == "true"));
    let hist = csv_rows(&std::fs::read_to_string(&hist).unwrap());
    assert_eq!(hist[0], ["slot", "stream_index", "count"]);
    assert_eq!(hist.len(), 1 + 4 * 19);

    let o = pairstream(&["disttest", "--policy", "fifo", "-s", "3", "--trials", "10000"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("fifo-suffix,0.0,0.0,true"));

    assert_eq!(pairstream(&["disttest", "--policy", "rs", "-s", "2", "--trials", "100"]).status.code(), Some(1));
}

#[test]
fn bad_flags_are_config_errors() {
    assert_eq!(pairstream(&["run", "--eta", "-1"]).status.code(), Some(1));
    assert_eq!(pairstream(&["run", "--policy", "lifo"]).status.code(), Some(1));
    assert_eq!(pairstream(&["run", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(pairstream(&["--help"]).status.code(), Some(0));
}
