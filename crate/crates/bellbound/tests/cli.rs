use std::process::{Command, Output};

use bellbound::io::read_curve_csv;

fn bellbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellbound"))
        .args(args)
        .env_remove("BELLBOUND_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn bound_examples() {
    let o = bellbound(&["bound", "--state", "pure", "--theta", "0.7854"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("tight bound      6.928203"),
        "{}",
        stdout(&o)
    );

    let o = bellbound(&["bound", "--state", "werner", "--p", "0.5"]);
    assert!(stdout(&o).contains("3.464102"));
    assert!(stdout(&o).contains("violation        no"));

    let o = bellbound(&["--json", "bound", "--state", "pure", "--theta", "0"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["tight_bound"], 4.0);
    assert_eq!(v["violation"], false);
}

#[test]
fn measure_singlet_is_tight() {
    let dir = tempfile::tempdir().unwrap();
    let strat = dir.path().join("s.json");
    let behavior = dir.path().join("b.csv");
    let o = bellbound(&[
        "--json",
        "measure",
        "--state",
        "singlet",
        "--out",
        strat.to_str().unwrap(),
        "--behavior",
        behavior.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["tightness"]["all_ok"], true);
    let s = bellbound::io::strategy_from_json(&std::fs::read_to_string(strat).unwrap()).unwrap();
    assert_eq!((s.alice.len(), s.bob.len()), (3, 4));
    let csv = std::fs::read_to_string(behavior).unwrap();
    assert_eq!(csv.lines().count(), 49);
}

#[test]
fn classical_tsirelson_and_gram() {
    let o = bellbound(&["classical", "--expr", "chained", "--n", "3"]);
    assert_eq!(stdout(&o).trim(), "4.000000");
    let o = bellbound(&["tsirelson", "--expr", "ebi", "--level", "1"]);
    assert_eq!(stdout(&o).trim(), "6.928203");
    let o = bellbound(&["--json", "gram-demo"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["primal"].as_f64().unwrap() + 2.0).abs() < 1e-6);
    assert!((v["dual"].as_f64().unwrap() + 2.0).abs() < 1e-6);
    assert!(v["certificate_min_eigenvalue"].as_f64().unwrap() >= -1e-9);
}

#[test]
fn config_errors_exit_two() {
    for args in [
        &["bound", "--state", "pure", "--theta", "1.0"][..],
        &["bound", "--state", "werner"],
        &["classical", "--expr", "nope"],
        &[
            "randomness",
            "--family",
            "pure",
            "--expr",
            "ebi",
            "--grid",
            "0:0.5:1",
        ],
        &[
            "randomness",
            "--family",
            "werner",
            "--expr",
            "ebi",
            "--grid",
            "0:0.5",
        ],
        &[
            "randomness",
            "--family",
            "werner",
            "--expr",
            "chsh",
            "--grid",
            "0:1:3",
            "--pair",
            "3,1",
        ],
        &["tsirelson", "--expr", "ebi", "--level", "3"],
        &["--config", "/nonexistent/run.json"],
        &["--bogus-flag"],
        &[],
    ] {
        let o = bellbound(args);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn solver_failure_exits_three_and_keeps_partial_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    let o = bellbound(&[
        "randomness",
        "--family",
        "werner",
        "--expr",
        "ebi",
        "--grid",
        "0.8:1:5",
        "--max-iterations",
        "20",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(
        text.lines().last().unwrap().starts_with("# truncated"),
        "{text}"
    );
    let rows = read_curve_csv(&text).unwrap();
    assert!(!rows.is_empty() && rows.len() < 5, "{text}");

    let o = bellbound(&["gram-demo", "--config", "/dev/null"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweeps_are_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("c{threads}.csv"));
        let o = bellbound(&[
            "randomness",
            "--family",
            "pure",
            "--expr",
            "chsh",
            "--grid",
            "0.3:0.7854:6",
            "--seed",
            "42",
            "--threads",
            threads,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);

    let rows = read_curve_csv(std::str::from_utf8(&outputs[0]).unwrap()).unwrap();
    assert_eq!(rows.len(), 6);
    assert!((rows[5].param - std::f64::consts::FRAC_PI_4).abs() < 1e-11);
    for r in &rows {
        // Each column is rounded to 12 significant digits independently.
        let want = -r.guessing_probability.log2();
        assert!((r.min_entropy - want).abs() <= 1e-11, "{r:?}");
    }
}

#[test]
fn werner_below_threshold_is_all_zero() {
    let o = bellbound(&[
        "randomness",
        "--family",
        "werner",
        "--expr",
        "ebi",
        "--grid",
        "0:0.5:11",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rows = read_curve_csv(&stdout(&o)).unwrap();
    assert_eq!(rows.len(), 11);
    assert!(rows
        .iter()
        .all(|r| r.min_entropy == 0.0 && r.guessing_probability == 1.0));
}

#[test]
fn config_file_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"command": "randomness", "family": "werner", "expr": "chsh",
            "grid": {"start": 0.9, "stop": 1.0, "steps": 3}, "threads": 2}"#,
    )
    .unwrap();
    let o = bellbound(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let rows = read_curve_csv(&stdout(&o)).unwrap();
    assert_eq!(rows.len(), 3);
    assert!((rows[2].min_entropy - 1.23).abs() < 0.05);

    // Flags layered over the file.
    let o = bellbound(&[
        "--config",
        cfg.to_str().unwrap(),
        "randomness",
        "--grid",
        "0.95:1:2",
    ]);
    assert_eq!(read_curve_csv(&stdout(&o)).unwrap().len(), 2);
    let o = bellbound(&["--config", cfg.to_str().unwrap(), "bound"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solve_command_reads_problem_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    std::fs::write(
        &path,
        bellbound::io::sdp_to_json(&bellbound_core::sdp::gram_problem()),
    )
    .unwrap();
    let o = bellbound(&["--json", "solve", "--problem", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["status"], "Optimal");
    assert!((v["primal"].as_f64().unwrap() + 2.0).abs() < 1e-6);

    std::fs::write(
        &path,
        r#"{"n": 2, "C": [[1, 2], [0, 1]], "constraints": [], "sense": "minimize"}"#,
    )
    .unwrap();
    let o = bellbound(&["solve", "--problem", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn compare_reports_a_crossover() {
    let o = bellbound(&[
        "--json",
        "randomness",
        "--family",
        "werner",
        "--expr",
        "ebi",
        "--compare",
        "chsh",
        "--grid",
        "0.94:0.98:3",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let x = v["compare"]["crossover"].as_f64().unwrap();
    assert!((0.94..0.98).contains(&x), "{x}");
}
