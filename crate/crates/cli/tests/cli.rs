use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = "n=60,views=2,clusters=2,sep=12,noise=1,corrupt=0,seed=3";

fn anchor_mvc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anchor-mvc"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn help_exits_zero() {
    let o = anchor_mvc(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("RAYON_NUM_THREADS"));
}

#[test]
fn unknown_flag_is_usage_error() {
    let o = anchor_mvc(&["cluster", "--synth", SMALL, "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn both_inputs_is_usage_error() {
    let o = anchor_mvc(&["cluster", "--synth", SMALL, "--manifest", "x.toml"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bad_p_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = anchor_mvc(&["cluster", "--synth", SMALL, "--p", "1.5", "--out", p(dir.path())]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn missing_manifest_names_the_path() {
    let o = anchor_mvc(&["cluster", "--manifest", "/nonexistent/data.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent/data.toml"), "{}", stderr(&o));
}

#[test]
fn eval_identical_labels_scores_one() {
    let dir = tempfile::tempdir().unwrap();
    let labels = dir.path().join("l.txt");
    fs::write(&labels, "0\n0\n1\n1\n2\n").unwrap();
    let o = anchor_mvc(&["eval", "--truth", p(&labels), "--pred", p(&labels)]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let values: Vec<f64> = out.lines().nth(1).unwrap().split('\t').map(|v| v.parse().unwrap()).collect();
    assert_eq!(values, vec![1.0; 7]);
}

#[test]
fn eval_length_mismatch_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    fs::write(&a, "0\n1\n").unwrap();
    fs::write(&b, "0\n1\n1\n").unwrap();
    let o = anchor_mvc(&["eval", "--truth", p(&a), "--pred", p(&b)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn synth_then_cluster_from_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let data_dir = dir.path().join("data");
    let o = anchor_mvc(&["synth", "--synth", SMALL, "--out", p(&data_dir), "--name", "toy"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let manifest = stdout(&o).trim().to_string();
    assert!(Path::new(&manifest).exists());

    let out = dir.path().join("res");
    let o = anchor_mvc(&["cluster", "--manifest", &manifest, "--anchors", "20", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["labels.txt", "anchor_labels.txt", "trace.tsv", "fused_graph.txt", "metrics.tsv"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let labels = fs::read_to_string(out.join("labels.txt")).unwrap();
    assert_eq!(labels.lines().count(), 60);
    assert!(stdout(&o).starts_with("ACC\tNMI"));
}

#[test]
fn repetitions_write_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = anchor_mvc(&[
        "cluster", "--synth", SMALL, "--anchors", "20", "--repetitions", "2", "--out", p(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("rep_00/labels.txt").exists());
    assert!(dir.path().join("rep_01/labels.txt").exists());
    let summary = fs::read_to_string(dir.path().join("summary.tsv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
}

#[test]
fn sweep_rows_and_determinism() {
    let run = |dir: &Path| {
        let o = anchor_mvc(&[
            "sweep", "--synth", SMALL, "--sweep", "anchors", "--values", "0.3,20",
            "--repetitions", "2", "--out", p(dir),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        fs::read_to_string(dir.join("sweep_anchors.tsv")).unwrap()
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = run(a.path());
    assert_eq!(first.lines().count(), 1 + 2 * 2);
    assert!(a.path().join("sweep_anchors_timings.tsv").exists());
    let anchors: Vec<&str> = first.lines().skip(1).map(|l| l.split('\t').nth(9).unwrap()).collect();
    assert_eq!(anchors, ["18", "18", "20", "20"]);
    assert_eq!(first, run(b.path()));
}

#[test]
fn fractional_anchor_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = anchor_mvc(&[
        "sweep", "--synth", SMALL, "--sweep", "anchors", "--values", "2.5", "--out", p(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn iteration_cap_reports_non_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let o = anchor_mvc(&[
        "cluster", "--synth", SMALL, "--anchors", "20", "--max-iters", "2", "--out", p(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(dir.path().join("labels.txt").exists());
}
