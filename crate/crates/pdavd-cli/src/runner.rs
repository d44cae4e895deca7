//! Subcommand implementations: single runs, parameter sweeps, the
//! unconstrained-reduction comparison, and the self-test battery.

use std::path::Path;

use pdavd::diagnostics::{self, CheckStatus, ConstantsReport, LyapunovSample};
use pdavd::dynamics::{
    nesterov_lambda_closed_form, SolverParams, SystemState, ValidationMode,
};
use pdavd::integrator::{integrate, SampleSchedule, Trajectory};
use pdavd::linalg;
use pdavd::oracle::{self, SaddlePoint};
use pdavd::problem::ProblemInstance;
use pdavd::rates;
use pdavd::synth;
use pdavd::Error as CoreError;

use crate::config::{ExperimentConfig, RequestedCheck};
use crate::output::{self, CheckLine};
use crate::{CliError, Overrides};

const SLOPE_THRESHOLD: f64 = -1.9;

fn map_integration_error(e: CoreError) -> CliError {
    match e {
        CoreError::StepSizeUnderflow { .. } | CoreError::Divergence { .. } => {
            CliError::Integration(e.to_string())
        }
        other => CliError::Config(other.to_string()),
    }
}

fn solve_saddle(p: &ProblemInstance, tol: f64) -> Result<SaddlePoint, CliError> {
    let result = if p.objective().as_quadratic().is_some() {
        oracle::solve_kkt_qp(p)
    } else {
        let x0 = vec![0.0; p.dim_primal()];
        let l0 = vec![0.0; p.dim_dual()];
        oracle::solve_kkt_newton(p, &x0, &l0, tol)
    };
    result.map_err(|e| CliError::Config(format!("saddle-point oracle failed: {e}")))
}

pub struct RunArtifacts {
    pub problem: ProblemInstance,
    pub params: SolverParams,
    pub mode: ValidationMode,
    pub saddle: SaddlePoint,
    pub traj: Trajectory,
    pub samples: Vec<LyapunovSample>,
    pub consts: ConstantsReport,
    pub lines: Vec<CheckLine>,
}

impl RunArtifacts {
    pub fn all_passed(&self) -> bool {
        self.lines.iter().all(|l| l.status != CheckStatus::Fail)
    }
}

/// Integrates one configuration and evaluates the requested checks.
pub fn execute(
    cfg: &ExperimentConfig,
    config_path: &Path,
    ov: &Overrides,
) -> Result<RunArtifacts, CliError> {
    let requested_mode = cfg.validation_mode(ov.strict)?;
    let seed = ov.seed.unwrap_or(cfg.seed);
    let problem = cfg.build_problem(config_path, seed)?;
    let mut params = cfg.solver_params(&problem)?;
    if let Some(t_end) = ov.t_end {
        params.t_end = t_end;
    }
    if let Some(samples) = ov.samples {
        params.samples = samples;
    }
    params
        .validate(requested_mode)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mode = params.strictest_mode().expect("validated above");
    let checks = cfg.requested_checks()?;

    let saddle = solve_saddle(&problem, cfg.oracle_tol)?;
    let schedule = SampleSchedule::new(params.t0, params.t_end, params.samples, cfg.spacing()?)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let traj = integrate(&problem, &params, &schedule).map_err(map_integration_error)?;
    let samples = diagnostics::evaluate(&problem, &params, &traj, &saddle)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let consts = diagnostics::constants(&problem, &params, &traj.samples[0], &saddle)
        .map_err(|e| CliError::Config(e.to_string()))?;

    let mut lines = Vec::new();
    for check in &checks {
        match check {
            RequestedCheck::Lyapunov => {
                let report = diagnostics::lyapunov_report(&problem, &params, &traj, &saddle, mode)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                for r in report.records {
                    lines.push(CheckLine::new(
                        r.status,
                        r.id,
                        if r.worst_margin.is_nan() {
                            None
                        } else {
                            Some(r.worst_margin)
                        },
                        r.note,
                    ));
                }
            }
            RequestedCheck::Integrals => {
                let rep = diagnostics::cumulative_integrals(&problem, &params, &traj, &saddle)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                for e in rep.entries {
                    let bound_ok = e.bound.is_none_or(|b| b.satisfied);
                    let finite = e.tail_fraction < diagnostics::TAIL_FRACTION_LIMIT;
                    let status = if !e.claimed {
                        CheckStatus::Skipped
                    } else if finite && bound_ok {
                        CheckStatus::Pass
                    } else {
                        CheckStatus::Fail
                    };
                    let note = match e.bound {
                        Some(b) => format!(
                            "total {:.6e}, scaled {:.6e} vs limit {:.6e}",
                            e.total, b.scaled_value, b.limit
                        ),
                        None => format!("total {:.6e}", e.total),
                    };
                    lines.push(CheckLine::new(
                        status,
                        &format!("integral_{}", e.id),
                        Some(diagnostics::TAIL_FRACTION_LIMIT - e.tail_fraction),
                        note,
                    ));
                }
            }
            RequestedCheck::Rates => {
                rates_checks(&params, &traj, &samples, &mut lines);
            }
            RequestedCheck::Kkt => {
                kkt_checks(&params, &consts, &samples, &mut lines);
            }
            RequestedCheck::Nesterov => {
                nesterov_check(&problem, &params, &saddle, &traj, &mut lines);
            }
        }
    }

    Ok(RunArtifacts {
        problem,
        params,
        mode,
        saddle,
        traj,
        samples,
        consts,
        lines,
    })
}

/// Series whose peak is below the accumulated integrator noise cannot carry
/// a decay verdict.
fn noise_floor(params: &SolverParams) -> f64 {
    1e4 * params.abs_tol * params.t_end
}

/// Last two decades of the segment where the series still carries signal:
/// once values drop 12 orders below their own peak, samples measure the
/// numerical floor rather than the decay.
fn decay_window(times: &[f64], values: &[f64], t_end: f64) -> (f64, f64) {
    let peak = values.iter().cloned().fold(0.0_f64, f64::max);
    let floor = 1e-12 * (1.0 + peak);
    let t_hi = times
        .iter()
        .zip(values)
        .filter(|(_, v)| **v >= floor)
        .map(|(t, _)| *t)
        .fold(f64::NAN, f64::max);
    let t_hi = if t_hi.is_nan() { t_end } else { t_hi };
    (t_hi / 100.0, t_hi)
}

fn rates_checks(
    params: &SolverParams,
    traj: &Trajectory,
    samples: &[LyapunovSample],
    lines: &mut Vec<CheckLine>,
) {
    let times = traj.times();
    let window = (params.t_end / 100.0, params.t_end);
    let floor = noise_floor(params);

    let mut slope_check = |name: &str, series: Vec<f64>| {
        let peak = series.iter().cloned().fold(0.0_f64, f64::max);
        if peak <= floor {
            lines.push(CheckLine::new(
                CheckStatus::Skipped,
                name,
                None,
                format!("series peak {peak:.2e} below noise floor {floor:.2e}"),
            ));
            return;
        }
        let window = decay_window(&times, &series, params.t_end);
        match rates::fit_auto(&times, &series, window) {
            Ok((fit, variant)) => {
                let status = if fit.slope <= SLOPE_THRESHOLD {
                    CheckStatus::Pass
                } else {
                    CheckStatus::Fail
                };
                lines.push(CheckLine::new(
                    status,
                    name,
                    Some(SLOPE_THRESHOLD - fit.slope),
                    format!(
                        "slope {:.3} ({} fit, r2 {:.3})",
                        fit.slope, variant, fit.r_squared
                    ),
                ));
            }
            Err(e) => lines.push(CheckLine::new(
                CheckStatus::Skipped,
                name,
                None,
                format!("no fit: {e}"),
            )),
        }
    };

    let gap_feas: Vec<f64> = samples
        .iter()
        .map(|s| {
            (s.gap - 0.5 * params.beta * s.feasibility * s.feasibility + s.feasibility).max(0.0)
        })
        .collect();
    slope_check("rate_gap_feasibility", gap_feas);
    slope_check(
        "rate_feasibility",
        samples.iter().map(|s| s.feasibility).collect(),
    );

    // t·velocity stays bounded; √t-scaled split quantities vanish
    let mut decay_check = |name: &str, values: Vec<f64>, p: f64, want_little_o: bool| {
        let peak = values
            .iter()
            .zip(samples)
            .map(|(v, s)| s.t.powf(p) * v)
            .fold(0.0_f64, f64::max);
        if peak <= floor {
            lines.push(CheckLine::new(
                CheckStatus::Skipped,
                name,
                None,
                format!("series peak {peak:.2e} below noise floor {floor:.2e}"),
            ));
            return;
        }
        match rates::little_o_check(&times, &values, p, window) {
            Ok(v) => {
                let ok = if want_little_o { v.little_o } else { v.big_o };
                lines.push(CheckLine::new(
                    if ok { CheckStatus::Pass } else { CheckStatus::Fail },
                    name,
                    Some(if want_little_o {
                        0.5 - v.halving_ratio
                    } else {
                        1.0 - v.last_decade_ratio
                    },),
                    format!(
                        "little_o {} big_o {} decade ratio {:.3}",
                        v.little_o, v.big_o, v.last_decade_ratio
                    ),
                ));
            }
            Err(e) => lines.push(CheckLine::new(
                CheckStatus::Skipped,
                name,
                None,
                format!("no verdict: {e}"),
            )),
        }
    };
    decay_check(
        "velocity_big_o",
        samples.iter().map(|s| s.velocity_norm).collect(),
        1.0,
        false,
    );
    decay_check(
        "kkt_grad_little_o",
        samples.iter().map(|s| s.gradient_gap).collect(),
        0.5,
        true,
    );
    decay_check(
        "kkt_adjoint_little_o",
        samples.iter().map(|s| s.adjoint_gap).collect(),
        0.5,
        true,
    );
}

fn kkt_checks(
    params: &SolverParams,
    consts: &ConstantsReport,
    samples: &[LyapunovSample],
    lines: &mut Vec<CheckLine>,
) {
    // triangle split at every sample
    let mut worst = f64::INFINITY;
    for s in samples {
        worst = worst.min(s.gradient_gap + s.adjoint_gap - s.stationarity);
    }
    lines.push(CheckLine::new(
        if worst >= -1e-12 {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        "kkt_triangle_split",
        Some(worst),
        String::new(),
    ));
    // pointwise quadratic bound on the dual residual
    let mut worst = f64::INFINITY;
    for s in samples {
        worst = worst.min(consts.rate_bound(params.theta, s.t) - s.feasibility);
    }
    lines.push(CheckLine::new(
        if worst >= -1e-12 {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        "kkt_dual_residual_bound",
        Some(worst),
        String::new(),
    ));
}

fn is_unconstrained(p: &ProblemInstance) -> bool {
    p.dim_dual() == 0
        || (p.constraint().matrix().max_abs() == 0.0 && p.rhs().iter().all(|b| *b == 0.0))
}

fn nesterov_check(
    p: &ProblemInstance,
    params: &SolverParams,
    saddle: &SaddlePoint,
    traj: &Trajectory,
    lines: &mut Vec<CheckLine>,
) {
    if !is_unconstrained(p) {
        lines.push(CheckLine::new(
            CheckStatus::Skipped,
            "nesterov_closed_form",
            None,
            "constraint operator is nonzero".into(),
        ));
        return;
    }
    let mut worst = 0.0_f64;
    if p.dim_dual() > 0 {
        for st in &traj.samples {
            let expect = nesterov_lambda_closed_form(params, st.t).unwrap();
            let err = linalg::norm(&linalg::sub(&st.lambda, &expect))
                / (1.0 + linalg::norm(&expect));
            worst = worst.max(err);
        }
    }
    lines.push(CheckLine::new(
        if worst <= 1e-6 {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        "nesterov_closed_form",
        Some(1e-6 - worst),
        format!("worst dual deviation {worst:.3e} (rel)"),
    ));
    let times = traj.times();
    let fgap: Vec<f64> = traj
        .samples
        .iter()
        .map(|st| (p.objective().value(&st.x) - saddle.f_star).max(0.0))
        .collect();
    let window = decay_window(&times, &fgap, params.t_end);
    match rates::fit_auto(&times, &fgap, window) {
        Ok((fit, variant)) => lines.push(CheckLine::new(
            if fit.slope <= SLOPE_THRESHOLD {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            "nesterov_objective_rate",
            Some(SLOPE_THRESHOLD - fit.slope),
            format!("slope {:.3} ({variant} fit)", fit.slope),
        )),
        Err(e) => lines.push(CheckLine::new(
            CheckStatus::Skipped,
            "nesterov_objective_rate",
            None,
            format!("no fit: {e}"),
        )),
    }
}

/// `run`: integrate, check, and write the artifact set.
pub fn run(config_path: &Path, ov: &Overrides) -> Result<bool, CliError> {
    let cfg = ExperimentConfig::load(config_path)?;
    let art = execute(&cfg, config_path, ov)?;
    let out_dir = resolve_out_dir(&cfg, ov)?;

    output::write_atomic(
        &out_dir.join("trajectory.csv"),
        output::trajectory_csv(&art.traj, &art.samples).as_bytes(),
    )?;
    output::write_atomic(
        &out_dir.join("constants.json"),
        output::constants_json(
            &art.params,
            &art.mode.to_string(),
            &art.consts,
            &art.saddle,
            &art.traj,
        )
        .as_bytes(),
    )?;
    output::write_atomic(
        &out_dir.join("checks.txt"),
        output::checks_text(&art.mode.to_string(), &art.lines).as_bytes(),
    )?;
    for (name, svg) in output::run_plots(&art.params, &art.consts, &art.traj, &art.samples) {
        output::write_atomic(&out_dir.join(name), svg.as_bytes())?;
    }

    for l in &art.lines {
        println!("{}\t{}\t{}", l.status, l.name, l.note);
    }
    Ok(art.all_passed())
}

fn resolve_out_dir(cfg: &ExperimentConfig, ov: &Overrides) -> Result<std::path::PathBuf, CliError> {
    match (&ov.out, &cfg.out_dir) {
        (Some(o), _) => Ok(o.clone()),
        (None, Some(o)) => Ok(std::path::PathBuf::from(o)),
        (None, None) => Err(CliError::Config(
            "no output directory: set out_dir in the config or pass --out".into(),
        )),
    }
}

/// One sweep row.
struct SweepRow {
    alpha: f64,
    theta: f64,
    outcome: String,
    gap_slope: Option<f64>,
    feas_slope: Option<f64>,
    passed: usize,
    failed: usize,
    skipped: usize,
}

/// `sweep`: runs the α×θ grid from the config, one row per point;
/// individual failures do not stop the sweep. Parallelism is capped by
/// `PDAVD_THREADS`.
pub fn sweep(config_path: &Path, ov: &Overrides) -> Result<bool, CliError> {
    let cfg = ExperimentConfig::load(config_path)?;
    let spec = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep requires a [sweep] table".into()))?;
    let grid: Vec<(f64, f64)> = spec
        .alphas
        .iter()
        .flat_map(|a| spec.thetas.iter().map(move |t| (*a, *t)))
        .collect();
    if grid.is_empty() {
        return Err(CliError::Config("sweep grid is empty".into()));
    }
    let out_dir = resolve_out_dir(&cfg, ov)?;

    let threads = std::env::var("PDAVD_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|v| *v >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|p| p.get())
                .unwrap_or(1)
        })
        .min(grid.len());

    let text = std::fs::read_to_string(config_path)
        .map_err(|e| CliError::Config(format!("cannot read config: {e}")))?;
    let next = std::sync::atomic::AtomicUsize::new(0);
    let rows: Vec<std::sync::Mutex<Option<SweepRow>>> =
        grid.iter().map(|_| std::sync::Mutex::new(None)).collect();

    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if idx >= grid.len() {
                    break;
                }
                let (alpha, theta) = grid[idx];
                // each worker reparses the config so points stay independent
                let mut point_cfg: ExperimentConfig =
                    toml::from_str(&text).expect("config reparse");
                point_cfg.alpha = alpha;
                point_cfg.theta = theta;
                let row = sweep_point(&point_cfg, config_path, ov, alpha, theta);
                *rows[idx].lock().unwrap() = Some(row);
            });
        }
    });

    let mut csv = String::from(
        "alpha,theta,outcome,gap_slope,feas_slope,checks_passed,checks_failed,checks_skipped\n",
    );
    let mut all_ok = true;
    for cell in &rows {
        let row = cell.lock().unwrap().take().unwrap();
        if row.outcome == "fail" || row.outcome == "error" {
            all_ok = false;
        }
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.alpha,
            row.theta,
            row.outcome,
            row.gap_slope.map_or("-".into(), |v| format!("{v:.4}")),
            row.feas_slope.map_or("-".into(), |v| format!("{v:.4}")),
            row.passed,
            row.failed,
            row.skipped
        ));
    }
    output::write_atomic(&out_dir.join("sweep_summary.csv"), csv.as_bytes())?;
    print!("{csv}");
    Ok(all_ok)
}

fn sweep_point(
    cfg: &ExperimentConfig,
    config_path: &Path,
    ov: &Overrides,
    alpha: f64,
    theta: f64,
) -> SweepRow {
    let mut row = SweepRow {
        alpha,
        theta,
        outcome: String::new(),
        gap_slope: None,
        feas_slope: None,
        passed: 0,
        failed: 0,
        skipped: 0,
    };
    // grid points that satisfy no regime are recorded, not fatal
    let seed = ov.seed.unwrap_or(cfg.seed);
    let probe = cfg.solver_params(&match cfg.build_problem(config_path, seed) {
        Ok(p) => p,
        Err(e) => {
            row.outcome = format!("error: {e}");
            return row;
        }
    });
    let mode = match probe {
        Ok(params) => params.strictest_mode(),
        Err(e) => {
            row.outcome = format!("error: {e}");
            return row;
        }
    };
    if mode.is_none() {
        row.outcome = "invalid".into();
        return row;
    }
    let mut point_ov = ov.clone();
    point_ov.strict = false; // the achieved mode is recorded per point
    match execute(cfg, config_path, &point_ov) {
        Ok(art) => {
            for l in &art.lines {
                match l.status {
                    CheckStatus::Pass => row.passed += 1,
                    CheckStatus::Fail => row.failed += 1,
                    CheckStatus::Skipped => row.skipped += 1,
                }
            }
            let slope_of = |name: &str| {
                art.lines
                    .iter()
                    .find(|l| l.name == name)
                    .and_then(|l| l.note.split_whitespace().nth(1))
                    .and_then(|s| s.parse::<f64>().ok())
            };
            row.gap_slope = slope_of("rate_gap_feasibility");
            row.feas_slope = slope_of("rate_feasibility");
            row.outcome = format!(
                "{}-{}",
                art.mode,
                if art.all_passed() { "pass" } else { "fail" }
            );
            if !art.all_passed() {
                row.outcome = "fail".into();
            }
        }
        Err(e) => row.outcome = format!("error: {e}"),
    }
    row
}

/// `compare-nesterov`: requires a zero constraint; checks the dual closed
/// form, the objective decay rate and (for α > 3) trajectory settling.
pub fn compare_nesterov(config_path: &Path, ov: &Overrides) -> Result<bool, CliError> {
    let cfg = ExperimentConfig::load(config_path)?;
    let problem = cfg.build_problem(config_path, ov.seed.unwrap_or(cfg.seed))?;
    if !is_unconstrained(&problem) {
        return Err(CliError::Config(
            "compare-nesterov requires a zero (or absent) constraint".into(),
        ));
    }
    let art = execute(&cfg, config_path, ov)?;
    let out_dir = resolve_out_dir(&cfg, ov)?;

    let mut lines = art.lines.clone();
    // ensure the reduction checks are present even if not requested
    if !lines.iter().any(|l| l.name == "nesterov_closed_form") {
        nesterov_check(
            &art.problem,
            &art.params,
            &art.saddle,
            &art.traj,
            &mut lines,
        );
    }
    if art.params.alpha > 3.0 {
        let terminal = art.traj.terminal().clone();
        let d = |st: &SystemState| {
            linalg::pair_norm(
                &linalg::sub(&st.x, &terminal.x),
                &linalg::sub(&st.lambda, &terminal.lambda),
            )
        };
        let d0 = d(&art.traj.samples[0]);
        let t_end = terminal.t;
        let tail: Vec<f64> = art
            .traj
            .samples
            .iter()
            .filter(|st| st.t >= t_end / 10.0)
            .map(d)
            .collect();
        let osc = tail.iter().cloned().fold(f64::MIN, f64::max)
            - tail.iter().cloned().fold(f64::MAX, f64::min);
        let limit = 1e-4 * (1.0 + d0);
        lines.push(CheckLine::new(
            if osc <= limit {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            "nesterov_trajectory_settles",
            Some(limit - osc),
            format!("tail oscillation {osc:.3e} vs {limit:.3e}"),
        ));
    }

    output::write_atomic(
        &out_dir.join("nesterov.txt"),
        output::checks_text(&art.mode.to_string(), &lines).as_bytes(),
    )?;
    for l in &lines {
        println!("{}\t{}\t{}", l.status, l.name, l.note);
    }
    Ok(lines.iter().all(|l| l.status != CheckStatus::Fail))
}

/// `selftest`: quadrature inequality plus oracle cross-checks.
pub fn selftest(out: Option<&Path>) -> Result<bool, CliError> {
    let mut lines: Vec<CheckLine> = Vec::new();
    let mut push = |ok: bool, name: &str, note: String| {
        lines.push(CheckLine::new(
            if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            name,
            None,
            note,
        ));
    };

    // double-integral inequality: flat h against its closed form
    let rep = diagnostics::quadrature_selftest(2.0, 1.0, 10.0, &vec![1.0; 20001])
        .map_err(|e| CliError::Config(e.to_string()))?;
    push(
        rep.margin >= 0.0 && (rep.lhs - 4.05).abs() < 1e-6,
        "quadrature_flat",
        format!("lhs {:.6} rhs {:.6}", rep.lhs, rep.rhs),
    );
    for seed in [21u64, 22] {
        let h = synth::seeded_spline_samples(seed, 9, 20001);
        let rep = diagnostics::quadrature_selftest(2.5, 1.0, 50.0, &h)
            .map_err(|e| CliError::Config(e.to_string()))?;
        push(
            rep.margin >= 0.0,
            &format!("quadrature_spline_{seed}"),
            format!("margin {:.6}", rep.margin),
        );
    }

    // oracle cross-checks
    let qp2 = synth::qp2();
    let s = oracle::solve_kkt_qp(&qp2).map_err(|e| CliError::Config(e.to_string()))?;
    push(
        (s.x_star[0] - 0.5).abs() < 1e-10
            && (s.lambda_star[0] + 0.5).abs() < 1e-10
            && (s.f_star - 0.25).abs() < 1e-10,
        "oracle_canonical_qp",
        format!("x* = ({:.6}, {:.6}), f* = {:.6}", s.x_star[0], s.x_star[1], s.f_star),
    );
    let p = synth::random_qp(3, 6, 2);
    let direct = oracle::solve_kkt_qp(&p).map_err(|e| CliError::Config(e.to_string()))?;
    let newton = oracle::solve_kkt_newton(&p, &[0.0; 6], &[0.0; 2], 1e-11)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let dx = linalg::norm(&linalg::sub(&direct.x_star, &newton.x_star));
    push(
        dx < 1e-8,
        "oracle_cross_agreement",
        format!("direct vs Newton primal gap {dx:.3e}"),
    );
    let deg = synth::degenerate_qp();
    let s1 = SaddlePoint::from_parts(&deg, vec![0.5, 0.5], vec![-0.5, 0.0]);
    let s2 = SaddlePoint::from_parts(&deg, vec![0.5, 0.5], vec![0.0, -0.5]);
    let rep = oracle::check_solution_set_consistency(&deg, &s1, &s2, 1e-10);
    push(
        rep.passed,
        "oracle_solution_set_structure",
        format!("grad diff {:.2e}, adjoint diff {:.2e}", rep.grad_diff, rep.adjoint_diff),
    );

    let text = output::checks_text("selftest", &lines);
    print!("{text}");
    if let Some(dir) = out {
        output::write_atomic(&dir.join("selftest.txt"), text.as_bytes())?;
    }
    Ok(lines.iter().all(|l| l.status != CheckStatus::Fail))
}
