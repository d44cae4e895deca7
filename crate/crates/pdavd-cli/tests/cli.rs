//! End-to-end checks of the binary: exit codes, artifact layout and
//! reproducibility.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pdavd"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir()
        .join("pdavd-cli-tests")
        .join(format!("{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

const QP2_PROBLEM: &str = r#"
[problem]
kind = "quadratic"
q_matrix = [[1.0, 0.0], [0.0, 1.0]]
q_linear = [0.0, 0.0]
constraint = [[1.0, 1.0]]
rhs = [1.0]
"#;

fn qp2_config(extra: &str) -> String {
    format!(
        r#"mode = "strict"
alpha = 4.0
beta = 1.0
theta = 0.45
t0 = 1.0
t_end = 1000.0
abs_tol = 1e-8
rel_tol = 1e-8
samples = 120
{extra}
{QP2_PROBLEM}"#
    )
}

#[test]
fn run_emits_artifacts_and_passes() {
    let dir = scratch("run-pass");
    let cfg = dir.join("exp.toml");
    write(&cfg, &qp2_config(""));
    let out_dir = dir.join("out");
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let csv = std::fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    let mut rows = csv.lines();
    let header = rows.next().unwrap();
    // 1 + 2n + 2m + 11 columns for n = 2, m = 1
    assert_eq!(header.split(',').count(), 18);
    assert!(header.starts_with("t,x_0,x_1,lambda_0,"));
    assert_eq!(rows.count(), 120);

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("constants.json")).unwrap())
            .unwrap();
    assert_eq!(json["mode_satisfied"], "strict");
    assert!(json["c_bnd"].as_f64().unwrap() > 0.0);
    assert!((json["f_star"].as_f64().unwrap() - 0.25).abs() < 1e-10);

    let checks = std::fs::read_to_string(out_dir.join("checks.txt")).unwrap();
    assert!(checks.contains("pass\tenergy_monotone"));
    assert!(checks.contains("pass\trate_feasibility"));
    assert!(!checks.contains("\nfail\t"));
    for plot in ["gap.svg", "feasibility.svg", "velocity.svg", "kkt.svg", "energy.svg"] {
        let svg = std::fs::read_to_string(out_dir.join(plot)).unwrap();
        assert!(svg.starts_with("<svg"), "{plot} malformed");
    }
    // write-then-rename leaves no temporaries
    assert!(!out_dir.join("trajectory.tmp").exists());
}

#[test]
fn saddle_start_is_quiet_and_passes() {
    let dir = scratch("saddle");
    let cfg = dir.join("exp.toml");
    write(
        &cfg,
        &qp2_config("x0 = [0.5, 0.5]\nlambda0 = [-0.5]\n"),
    );
    let out_dir = dir.join("out");
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    // the primal series stays at the saddle
    let csv = std::fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    for row in csv.lines().skip(1) {
        let x0: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!((x0 - 0.5).abs() < 1e-6);
    }
}

#[test]
fn invalid_alpha_exits_two_and_writes_nothing() {
    let dir = scratch("invalid-alpha");
    let cfg = dir.join("exp.toml");
    write(&cfg, &qp2_config("").replace("alpha = 4.0", "alpha = 2.0"));
    let out_dir = dir.join("out");
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("alpha") && stderr.contains("violated"),
        "stderr: {stderr}"
    );
    assert!(!out_dir.exists() || std::fs::read_dir(&out_dir).unwrap().next().is_none());
}

#[test]
fn malformed_config_exits_two() {
    let dir = scratch("parse-error");
    let cfg = dir.join("exp.toml");
    write(&cfg, "alpha = [not toml");
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn seeded_outputs_are_byte_identical() {
    let dir = scratch("bytes");
    let cfg = dir.join("exp.toml");
    write(
        &cfg,
        r#"mode = "strict"
alpha = 4.0
beta = 1.0
theta = 0.45
t_end = 200.0
abs_tol = 1e-8
rel_tol = 1e-8
samples = 60
seed = 11
checks = []

[problem]
kind = "random-qp"
n = 6
m = 2
"#,
    );
    let run = |out_dir: &Path, seed: Option<&str>| {
        let mut c = bin();
        c.args(["run", "--config"]).arg(&cfg).arg("--out").arg(out_dir);
        if let Some(s) = seed {
            c.args(["--seed", s]);
        }
        let out = c.output().unwrap();
        assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    };
    let (a, b, c) = (dir.join("a"), dir.join("b"), dir.join("c"));
    run(&a, None);
    run(&b, None);
    run(&c, Some("12"));
    for file in ["trajectory.csv", "constants.json", "checks.txt", "gap.svg"] {
        let fa = std::fs::read(a.join(file)).unwrap();
        let fb = std::fs::read(b.join(file)).unwrap();
        assert_eq!(fa, fb, "{file} differs between identical runs");
    }
    let fa = std::fs::read(a.join("trajectory.csv")).unwrap();
    let fc = std::fs::read(c.join("trajectory.csv")).unwrap();
    assert_ne!(fa, fc, "different seeds must differ");
}

#[test]
fn sweep_reports_grid_and_marks_invalid_points() {
    let dir = scratch("sweep");
    let cfg = dir.join("exp.toml");
    write(
        &cfg,
        &qp2_config(
            "[sweep]\nalphas = [2.0, 3.0, 4.0]\nthetas = [0.5, 0.45]\n",
        )
        .replace("mode = \"strict\"", "mode = \"standard\""),
    );
    let out_dir = dir.join("out");
    let out = bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .env("PDAVD_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("sweep_summary.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 7); // header + 6 grid points
    // α = 2 never validates; α = 3 admits only θ = 1/2; α = 4, θ = 0.45 is strict
    assert!(rows[1].starts_with("2,0.5,invalid"));
    assert!(rows[2].starts_with("2,0.45,invalid"));
    assert!(rows[3].starts_with("3,0.5,standard-pass"));
    assert!(rows[4].starts_with("3,0.45,invalid"));
    assert!(rows[5].starts_with("4,0.5,standard-pass"));
    assert!(rows[6].starts_with("4,0.45,strict-pass"));
}

#[test]
fn compare_nesterov_checks_closed_form() {
    let dir = scratch("nesterov");
    let cfg = dir.join("exp.toml");
    write(
        &cfg,
        r#"mode = "standard"
alpha = 3.0
beta = 0.0
theta = 0.5
t_end = 10000.0
samples = 150
x0 = [1.0]
lambda_dot0 = [1.0]
checks = ["nesterov"]

[problem]
kind = "quadratic"
q_matrix = [[1.0]]
q_linear = [0.0]
constraint = [[0.0]]
rhs = [0.0]
"#,
    );
    let out_dir = dir.join("out");
    let out = bin()
        .args(["compare-nesterov", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(out_dir.join("nesterov.txt")).unwrap();
    assert!(report.contains("pass\tnesterov_closed_form"));
    assert!(report.contains("pass\tnesterov_objective_rate"));

    // a nonzero constraint is rejected up front
    let bad = dir.join("bad.toml");
    write(&bad, &qp2_config(""));
    let out = bin()
        .args(["compare-nesterov", "--config"])
        .arg(&bad)
        .arg("--out")
        .arg(dir.join("out2"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn problem_file_reference_and_flag_overrides() {
    let dir = scratch("problem-file");
    let problem = dir.join("problem.toml");
    write(
        &problem,
        r#"kind = "quadratic"
q_matrix = [[1.0, 0.0], [0.0, 1.0]]
q_linear = [0.0, 0.0]
constraint = [[1.0, 1.0]]
rhs = [1.0]
"#,
    );
    let cfg = dir.join("exp.toml");
    write(
        &cfg,
        r#"mode = "standard"
alpha = 4.0
beta = 1.0
theta = 0.45
t_end = 5000.0
abs_tol = 1e-8
rel_tol = 1e-8
samples = 200
checks = []
problem_file = "problem.toml"
"#,
    );
    let out_dir = dir.join("out");
    // --t-end and --samples override the config; --strict upgrades the mode
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .args(["--t-end", "500", "--samples", "50", "--strict"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 51); // header + 50 samples
    let last = csv.lines().last().unwrap();
    let t_last: f64 = last.split(',').next().unwrap().parse().unwrap();
    assert!((t_last - 500.0).abs() < 1e-9);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("constants.json")).unwrap())
            .unwrap();
    assert_eq!(json["mode_satisfied"], "strict");
    assert_eq!(json["t_end"], 500.0);
}

#[test]
fn non_quadratic_objectives_run_via_newton_oracle() {
    let dir = scratch("newton-kinds");
    let logistic = dir.join("logistic.toml");
    write(
        &logistic,
        r#"mode = "strict"
alpha = 4.0
beta = 1.0
theta = 0.45
t_end = 300.0
abs_tol = 1e-8
rel_tol = 1e-8
samples = 50
checks = []

[problem]
kind = "logistic-smooth"
data = [[1.0, 0.2], [-0.8, 1.0], [0.3, -1.1]]
offsets = [0.0, 0.5, -0.2]
constraint = [[1.0, -1.0]]
rhs = [0.3]
"#,
    );
    let out = bin()
        .args(["run", "--config"])
        .arg(&logistic)
        .arg("--out")
        .arg(dir.join("out-logistic"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let logcosh = dir.join("logcosh.toml");
    write(
        &logcosh,
        r#"mode = "strict"
alpha = 4.0
beta = 1.0
theta = 0.45
t_end = 300.0
abs_tol = 1e-8
rel_tol = 1e-8
samples = 50
checks = []

[problem]
kind = "custom-registered"
name = "log-cosh"
center = [1.0, -0.5]
weight = 2.0
constraint = [[1.0, 1.0]]
rhs = [0.2]
"#,
    );
    let out = bin()
        .args(["run", "--config"])
        .arg(&logcosh)
        .arg("--out")
        .arg(dir.join("out-logcosh"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    // unknown registry names are configuration errors
    let bad = dir.join("bad.toml");
    write(
        &bad,
        &std::fs::read_to_string(&logcosh)
            .unwrap()
            .replace("log-cosh", "no-such-objective"),
    );
    let out = bin()
        .args(["run", "--config"])
        .arg(&bad)
        .arg("--out")
        .arg(dir.join("out-bad"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn compare_nesterov_alpha4_trajectory_settles() {
    let dir = scratch("nesterov4");
    let cfg = dir.join("exp.toml");
    write(
        &cfg,
        r#"mode = "strict"
alpha = 4.0
beta = 0.0
theta = 0.45
t_end = 100000.0
samples = 150
x0 = [1.0]
checks = ["nesterov"]

[problem]
kind = "quadratic"
q_matrix = [[1.0]]
q_linear = [0.0]
constraint = [[0.0]]
rhs = [0.0]
"#,
    );
    let out_dir = dir.join("out");
    let out = bin()
        .args(["compare-nesterov", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(out_dir.join("nesterov.txt")).unwrap();
    assert!(report.contains("pass\tnesterov_trajectory_settles"), "{report}");
    // over this horizon the tail movement drops below 1e-6
    let osc: f64 = report
        .lines()
        .find(|l| l.contains("nesterov_trajectory_settles"))
        .and_then(|l| l.split("tail oscillation ").nth(1))
        .and_then(|s| s.split(' ').next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(osc < 1e-6, "tail oscillation {osc}");
}

#[test]
fn selftest_passes() {
    let dir = scratch("selftest");
    let out = bin().args(["selftest", "--out"]).arg(&dir).output().unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.join("selftest.txt")).unwrap();
    assert!(text.contains("pass\tquadrature_flat"));
    assert!(text.contains("pass\toracle_cross_agreement"));
}
