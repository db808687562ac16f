use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn divlab() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_divlab"));
    cmd.env_remove("DIVLAB_TOLERANCE_FILE");
    cmd
}

fn run(args: &[&str]) -> Output {
    divlab().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn classify_reference_lines() {
    for (args, want) in [
        (
            ["--p", "0.5", "--q", "0.3", "--s", "1.0"],
            "ConcaveKnown Theorem-2(1)",
        ),
        (
            ["--p", "-0.5", "--q", "-0.5", "--s", "3"],
            "ConvexKnown Theorem-2(2)",
        ),
        (
            ["--p", "1.5", "--q", "-0.5", "--s", "1.2"],
            "ConjecturedConvex Conjecture-2",
        ),
    ] {
        let o = divlab().arg("classify").args(args).output().unwrap();
        assert!(o.status.success());
        assert_eq!(stdout(&o).trim(), want);
    }
    let o = run(&["classify", "--p", "2.5", "--s", "0.4", "--upsilon"]);
    assert_eq!(stdout(&o).trim(), "NotConvexNotConcave Proposition-6");
}

#[test]
fn classify_rejects_zero_s() {
    let o = run(&["classify", "--p", "0.5", "--q", "0.5", "--s", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("s = 0"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["nonsense"]).status.code(), Some(1));
    assert_eq!(run(&["classify", "--p", "1"]).status.code(), Some(1));
    assert_eq!(
        run(&["verify", "nope", "--seed", "1"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_symmetries() {
    let o = run(&["verify", "symmetries", "--seed", "7"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        stdout(&o).lines().last().unwrap(),
        "6/6 identity suites passed"
    );
}

#[test]
fn sweep_has_no_known_violations_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("thm-main-grid.json");
    let cfg = cfg.to_str().unwrap();
    let wit = dir.path().join("w");
    let a = run(&[
        "sweep",
        "--config",
        cfg,
        "--witness-dir",
        wit.to_str().unwrap(),
    ]);
    assert!(a.status.success(), "{}", stderr(&a));
    let csv = stdout(&a);
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "p,q,s,label,citation,dim,samples,worst_margin,violations"
    );
    let mut known = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        if f[3].ends_with("Known") {
            known += 1;
            assert_eq!(f[8], "0", "{line}");
        }
    }
    assert!(known > 20);
    let b = run(&[
        "--sequential",
        "sweep",
        "--config",
        cfg,
        "--witness-dir",
        wit.to_str().unwrap(),
    ]);
    assert_eq!(a.stdout, b.stdout);
    let out = dir.path().join("grid.csv");
    let c = run(&[
        "sweep",
        "--config",
        cfg,
        "--out",
        out.to_str().unwrap(),
        "--witness-dir",
        wit.to_str().unwrap(),
    ]);
    assert!(c.status.success());
    assert_eq!(std::fs::read(&out).unwrap(), a.stdout);
}

#[test]
fn probe_reproduces_a_sweep_row() {
    let cfg = configs().join("thm-main-grid.json");
    let a = run(&["sweep", "--config", cfg.to_str().unwrap()]);
    let csv = stdout(&a);
    let row: Vec<String> = csv
        .lines()
        .find(|l| l.starts_with("-1,0.5,1,"))
        .unwrap()
        .split(',')
        .map(String::from)
        .collect();
    let o = run(&[
        "probe",
        "--p",
        "-1",
        "--q",
        "0.5",
        "--s",
        "1",
        "--seed",
        "2024",
        "--samples",
        "100",
        "--dim",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let worst = v["report"]["worst_margin"].as_f64().unwrap();
    assert_eq!(worst, row[7].parse::<f64>().unwrap());
    assert_eq!(
        v["report"]["violations"].as_u64().unwrap(),
        row[8].parse::<u64>().unwrap()
    );
    assert_eq!(v["label"], format!("{} {}", row[3], row[4]));
}

#[test]
fn stein_binary_sandwich() {
    let o = run(&[
        "stein",
        "--r",
        "0.9,0.1",
        "--s",
        "0.1,0.9",
        "--eps",
        "0.05",
        "--N",
        "10:500:10",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = stdout(&o);
    assert_eq!(
        csv.lines().next().unwrap(),
        "N,epsilon,log_beta,rate,bound_low,bound_high"
    );
    assert_eq!(csv.lines().count(), 51);
    let last: Vec<f64> = csv
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    let (rate, lo, hi) = (last[3], last[4], last[5]);
    assert_eq!(last[0], 500.0);
    assert!(
        rate >= 0.9 * lo && rate <= 1.1 * hi,
        "{rate} not in [{lo}, {hi}]"
    );
    let cfg = configs().join("stein-binary.json");
    let f = run(&["stein", "--config", cfg.to_str().unwrap()]);
    assert_eq!(f.stdout, o.stdout);
}

#[test]
fn stein_quantum_from_matrix_files() {
    let dir = tempfile::tempdir().unwrap();
    let rho = dir.path().join("rho.json");
    let sigma = dir.path().join("sigma.json");
    std::fs::write(
        &rho,
        r#"{"dim":2,"entries":[[0.5,0.0],[0.475,0.0],[0.475,0.0],[0.5,0.0]]}"#,
    )
    .unwrap();
    std::fs::write(
        &sigma,
        r#"{"dim":2,"entries":[[0.7,0.0],[0.0,0.0],[0.0,0.0],[0.3,0.0]]}"#,
    )
    .unwrap();
    let o = run(&[
        "stein",
        "--rho",
        rho.to_str().unwrap(),
        "--sigma",
        sigma.to_str().unwrap(),
        "--eps",
        "0.1",
        "--N",
        "2,4,8",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 4);
}

#[test]
fn config_schema_is_enforced() {
    let dir = tempfile::tempdir().unwrap();
    let bad_field = dir.path().join("a.json");
    std::fs::write(
        &bad_field,
        r#"{"schema_version":1,"seed":1,"grid":{"kind":"points","points":[]},"sampels":3}"#,
    )
    .unwrap();
    let o = run(&["sweep", "--config", bad_field.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("sampels"), "{}", stderr(&o));

    let bad_version = dir.path().join("b.json");
    std::fs::write(
        &bad_version,
        r#"{"schema_version":9,"seed":1,"grid":{"kind":"points","points":[]}}"#,
    )
    .unwrap();
    let o = run(&["sweep", "--config", bad_version.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("schema_version"));

    let o = run(&["probe", "--p", "0.5", "--q", "0.5", "--s", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("seed"));
}

#[test]
fn contradiction_exits_two_with_witness() {
    // Ψ_{1,0,1} = Tr K*AK is linear, so rounding noise in the midpoint gap
    // exceeds a vanishing violation threshold.
    let dir = tempfile::tempdir().unwrap();
    let tol = dir.path().join("tol.json");
    std::fs::write(&tol, r#"{"violation_relative": 1e-300}"#).unwrap();
    let wit = dir.path().join("witnesses");
    let o = divlab()
        .env("DIVLAB_TOLERANCE_FILE", &tol)
        .args([
            "probe",
            "--p",
            "1",
            "--q",
            "0",
            "--s",
            "1",
            "--seed",
            "3",
            "--samples",
            "300",
        ])
        .arg("--witness-dir")
        .arg(&wit)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("witness"));
    let files: Vec<_> = std::fs::read_dir(&wit).unwrap().collect();
    assert_eq!(files.len(), 1);
}

#[test]
fn bad_tolerance_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let tol = dir.path().join("tol.json");
    std::fs::write(&tol, r#"{"no_such_tolerance": 1}"#).unwrap();
    let o = divlab()
        .env("DIVLAB_TOLERANCE_FILE", &tol)
        .args(["classify", "--p", "0.5", "--q", "0.5", "--s", "1"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn dpi_and_counterexample_reports() {
    let o = run(&[
        "dpi",
        "--alpha",
        "2",
        "--z",
        "1",
        "--seed",
        "1",
        "--channels",
        "10",
        "--pairs",
        "10",
        "--dim",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["monotonicity_known"], true);
    assert_eq!(v["report"]["violations"], 0);

    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "counterexample",
        "--p",
        "2.5",
        "--s",
        "0.4",
        "--direction",
        "concave",
        "--seed",
        "1",
        "--witness-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["certified"], true);
    assert!(Path::new(v["witness_path"].as_str().unwrap()).exists());
}
