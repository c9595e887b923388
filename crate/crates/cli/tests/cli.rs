use std::path::Path;
use std::process::{Command, Output};

fn gradecode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gradecode"))
        .args(args)
        .env_remove("GRADECODE_SEED")
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn build(dir: &Path, name: &str, args: &[&str]) -> String {
    let out_path = dir.join(name);
    let mut full = vec!["scheme", "build"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", path_str(&out_path)]);
    let out = gradecode(&full);
    assert!(out.status.success(), "{}", stderr(&out));
    path_str(&out_path).to_string()
}

#[test]
fn real_bch_file_has_expected_c1() {
    let dir = tempfile::tempdir().unwrap();
    let path = build(dir.path(), "r.json", &["--kind", "real-bch", "--n", "4", "--s", "1"]);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["c1"], serde_json::json!([1.0, 1.0, 0.0, 0.0]));
}

#[test]
fn parity_violation_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("x.json");
    let out = gradecode(&["scheme", "build", "--kind", "real-bch", "--n", "4", "--s", "2", "--out", path_str(&out_path)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("parity"));
    assert!(!out_path.exists());
}

#[test]
fn missing_flags_and_unknown_flags_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("x.json");
    let out = gradecode(&["scheme", "build", "--kind", "expander", "--n", "30", "--out", path_str(&out_path)]);
    assert_eq!(out.status.code(), Some(2));
    let out = gradecode(&["scheme", "build", "--kind", "identity", "--n", "3", "--bogus", "--out", path_str(&out_path)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn expander_build_reports_gap_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("e.json");
    let out = gradecode(&[
        "scheme", "build", "--kind", "expander", "--n", "30", "--d", "3", "--seed", "7", "--out",
        path_str(&out_path),
    ]);
    assert!(out.status.success());
    assert!(stderr(&out).contains("seed: 7"));
    let lambda: f64 = stdout(&out)
        .lines()
        .find_map(|l| l.strip_prefix("lambda: "))
        .expect("lambda line")
        .parse()
        .unwrap();
    assert!(lambda < 3.0);
    assert!(stdout(&out).contains("row support: 3"));
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("e.json");
    let out = Command::new(env!("CARGO_BIN_EXE_gradecode"))
        .args(["scheme", "build", "--kind", "expander", "--n", "20", "--d", "4", "--out", path_str(&out_path)])
        .env("GRADECODE_SEED", "42")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stderr(&out).contains("seed: 42"));
}

#[test]
fn verify_exact_exhaustive_passes() {
    let dir = tempfile::tempdir().unwrap();
    let path = build(dir.path(), "c.json", &["--kind", "complex-mds", "--n", "10", "--s", "3"]);
    let out = gradecode(&["verify", "--scheme", &path, "--mode", "exhaustive"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["sets_tested"], 120);
    assert_eq!(report["passed"], true);
}

#[test]
fn verify_expander_with_auto_epsilon() {
    let dir = tempfile::tempdir().unwrap();
    let path = build(dir.path(), "e.json", &["--kind", "expander", "--n", "30", "--d", "3", "--seed", "1"]);
    let out = gradecode(&["verify", "--scheme", &path, "--s", "5", "--epsilon", "auto", "--samples", "300"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
}

#[test]
fn verify_identity_against_half_sqrt_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = build(dir.path(), "i.json", &["--kind", "identity", "--n", "9"]);
    let args = ["verify", "--scheme", &path, "--s", "4", "--decoder", "ignore-stragglers", "--epsilon", "sqrt"];
    assert_eq!(gradecode(&args).status.code(), Some(0));
    let mut tight = args.to_vec();
    tight.extend_from_slice(&["--epsilon-scale", "0.5"]);
    let out = gradecode(&tight);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["passed"], false);
}

#[test]
fn sweep_is_deterministic_and_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = gradecode(&[
            "sweep", "--n", "30", "--d", "3", "--s-min", "1", "--s-max", "10", "--trials", "1", "--seed", "5", "--out",
            path_str(p),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,d,s,decoder,mean_residual,std_residual,bound"));
    assert_eq!(lines.count(), 20);
}

#[test]
fn sweep_mean_residual_grows_with_s() {
    let out = gradecode(&[
        "sweep", "--n", "30", "--d", "3", "--s-min", "1", "--s-max", "10", "--trials", "200", "--decoders", "linear",
    ]);
    assert!(out.status.success());
    let means: Vec<f64> = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    assert_eq!(means.len(), 10);
    assert!(means.windows(2).all(|w| w[0] < w[1]), "{means:?}");
}

#[test]
fn sweep_mean_residual_shrinks_with_d() {
    let out = gradecode(&[
        "sweep", "--n", "50", "--d", "3,4,5,6,7,8,9,10", "--s-min", "5", "--s-max", "5", "--trials", "200",
        "--decoders", "linear",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let means: Vec<f64> = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    assert_eq!(means.len(), 8);
    assert!(means.windows(2).all(|w| w[1] <= w[0]), "{means:?}");
}

#[test]
fn bound_on_identity_and_expander() {
    let dir = tempfile::tempdir().unwrap();
    let path = build(dir.path(), "i.json", &["--kind", "identity", "--n", "10"]);
    let out = gradecode(&["bound", "--scheme", &path, "--s", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("residual: 2\n"));
    assert!(text.contains("lower bound: 2\n"));
    assert!(text.trim_end().ends_with("pass"));

    let out = gradecode(&["bound", "--n", "30", "--d", "3", "--s", "6", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let residual: f64 = stdout(&out)
        .lines()
        .find_map(|l| l.strip_prefix("residual: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(residual >= 2f64.sqrt() - 1e-9);
}

#[test]
fn bound_requires_s_above_d() {
    let out = gradecode(&["bound", "--n", "30", "--d", "3", "--s", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn train_exact_scheme_has_zero_deviation() {
    let dir = tempfile::tempdir().unwrap();
    build(dir.path(), "c.json", &["--kind", "complex-mds", "--n", "10", "--s", "3"]);
    let config = dir.path().join("train.json");
    std::fs::write(
        &config,
        r#"{"scheme_path": "c.json", "decoder": "exact", "T": 40,
            "lr": {"c1": 5.0, "c2": 5.0},
            "straggler": {"kind": "fixed-random", "s": 3, "seed": 9},
            "pack": true,
            "data": {"kind": "synthetic", "m": 200, "p": 5, "seed": 1}}"#,
    )
    .unwrap();
    let metrics = dir.path().join("m.csv");
    let out = gradecode(&["train", "--config", path_str(&config), "--decoder", "exact", "--out", path_str(&metrics)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("seed: 9"));
    let text = std::fs::read_to_string(metrics).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,s_t,l2_dev,bound,loss"));
    let devs: Vec<f64> = lines.map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(devs.len(), 40);
    assert!(devs.iter().all(|&d| d <= 1e-8));
}

#[test]
fn train_with_csv_data_and_graph_scheme() {
    let dir = tempfile::tempdir().unwrap();
    build(dir.path(), "e.json", &["--kind", "expander", "--n", "10", "--d", "3", "--seed", "2"]);
    let mut csv = String::from("y,x1,x2\n");
    for i in 0..50 {
        let x1 = (i as f64 * 0.37).sin();
        let x2 = (i as f64 * 0.11).cos();
        csv.push_str(&format!("{},{x1},{x2}\n", if x1 + 0.3 * x2 > 0.0 { 1 } else { -1 }));
    }
    std::fs::write(dir.path().join("d.csv"), csv).unwrap();
    let config = dir.path().join("train.json");
    std::fs::write(
        &config,
        r#"{"scheme_path": "e.json", "decoder": "linear", "T": 20, "lr": 0.5,
            "straggler": {"kind": "delay-tail", "s": 2, "seed": 4},
            "data": {"kind": "csv", "path": "d.csv"}}"#,
    )
    .unwrap();
    let out = gradecode(&["train", "--config", path_str(&config)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 21);
}

#[test]
fn exact_decoder_on_graph_scheme_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    build(dir.path(), "e.json", &["--kind", "expander", "--n", "10", "--d", "3"]);
    let config = dir.path().join("train.json");
    std::fs::write(
        &config,
        r#"{"scheme_path": "e.json", "decoder": "exact", "T": 5, "lr": 0.5,
            "straggler": {"kind": "fixed-random", "s": 2, "seed": 4}}"#,
    )
    .unwrap();
    assert_eq!(gradecode(&["train", "--config", path_str(&config)]).status.code(), Some(2));
}

#[test]
fn graph_file_roundtrip_through_build() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    build(dir.path(), "a.json", &["--kind", "expander", "--n", "12", "--d", "4", "--seed", "3", "--graph-out", path_str(&graph)]);
    let first = std::fs::read_to_string(&graph).unwrap();
    assert!(first.starts_with("1: "));
    assert_eq!(first.lines().count(), 12);
    build(dir.path(), "b.json", &["--kind", "expander", "--n", "12", "--graph", path_str(&graph)]);
    assert_eq!(
        std::fs::read_to_string(dir.path().join("a.json")).unwrap(),
        std::fs::read_to_string(dir.path().join("b.json")).unwrap()
    );
}

#[test]
fn help_lists_subcommands() {
    let out = gradecode(&["--help"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for cmd in ["scheme", "verify", "sweep", "train", "bound"] {
        assert!(text.contains(cmd));
    }
}
