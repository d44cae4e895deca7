//! Browser bindings: three interactive operations over the core library,
//! each returning a JSON string (with embedded SVG where a plot helps).
//! The same functions compile natively, which is how they are tested.

use pdavd::diagnostics::{self, CheckStatus};
use pdavd::dynamics::{nesterov_lambda_closed_form, SolverParams, ValidationMode};
use pdavd::integrator::{integrate, SampleSchedule, Spacing};
use pdavd::linalg;
use pdavd::oracle;
use pdavd::plot::{log_log_svg, Series};
use pdavd::problem::{LinearMap, ProblemInstance, QuadraticObjective, SmoothObjective};
use pdavd::rates;
use pdavd::synth;
use wasm_bindgen::prelude::wasm_bindgen;

fn err_json(msg: &str) -> String {
    serde_json::json!({ "error": msg }).to_string()
}

fn demo_problem(kind: &str, seed: u32) -> Result<ProblemInstance, String> {
    match kind {
        "qp2" => Ok(synth::qp2()),
        "random" => Ok(synth::random_qp(seed as u64, 8, 3)),
        other => Err(format!("unknown problem \"{other}\" (use qp2 | random)")),
    }
}

/// Integrates the system for the chosen parameters and problem, returning
/// the key certification numbers and two log-log plots as JSON.
#[wasm_bindgen]
pub fn run_experiment(
    alpha: f64,
    beta: f64,
    theta: f64,
    t_end: f64,
    problem: &str,
    seed: u32,
) -> String {
    let p = match demo_problem(problem, seed) {
        Ok(p) => p,
        Err(e) => return err_json(&e),
    };
    let n = p.dim_primal();
    let m = p.dim_dual();
    let mut params = SolverParams::new(alpha, beta, theta, 1.0, t_end.clamp(10.0, 1e4), vec![0.0; n], vec![0.0; m]);
    params.abs_tol = 1e-9;
    params.rel_tol = 1e-9;
    let mode = match params.strictest_mode() {
        Some(m) => m,
        None => {
            return err_json(&format!(
                "parameters satisfy no regime: {}",
                params.validate(ValidationMode::Standard).unwrap_err()
            ))
        }
    };
    let saddle = match oracle::solve_kkt_qp(&p) {
        Ok(s) => s,
        Err(e) => return err_json(&e.to_string()),
    };
    let schedule = match SampleSchedule::new(params.t0, params.t_end, 160, Spacing::Log) {
        Ok(s) => s,
        Err(e) => return err_json(&e.to_string()),
    };
    let traj = match integrate(&p, &params, &schedule) {
        Ok(t) => t,
        Err(e) => return err_json(&e.to_string()),
    };
    let samples = diagnostics::evaluate(&p, &params, &traj, &saddle).unwrap();
    let consts = diagnostics::constants(&p, &params, &traj.samples[0], &saddle).unwrap();
    let report = diagnostics::lyapunov_report(&p, &params, &traj, &saddle, mode).unwrap();

    let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let gap: Vec<f64> = samples.iter().map(|s| s.gap.max(0.0)).collect();
    let feas: Vec<f64> = samples.iter().map(|s| s.feasibility).collect();
    let bound: Vec<f64> = times
        .iter()
        .map(|t| consts.rate_bound(params.theta, *t))
        .collect();
    let energy: Vec<f64> = samples.iter().map(|s| s.energy.max(0.0)).collect();
    let tvel: Vec<f64> = samples.iter().map(|s| s.t * s.velocity_norm).collect();

    let decay_svg = log_log_svg(
        "primal-dual gap and feasibility vs explicit bound",
        &[
            Series { label: "gap", times: &times, values: &gap },
            Series { label: "|Ax - b|", times: &times, values: &feas },
            Series { label: "C_bnd/(theta^2 t^2)", times: &times, values: &bound },
        ],
    );
    let energy_svg = log_log_svg(
        "energy and scaled velocity",
        &[
            Series { label: "E", times: &times, values: &energy },
            Series { label: "t * velocity", times: &times, values: &tvel },
        ],
    );

    let window = (params.t_end / 100.0, params.t_end);
    let gap_slope = rates::fit_envelope_slope(&times, &gap, window)
        .map(|f| f.slope)
        .ok();
    let feas_slope = rates::fit_envelope_slope(&times, &feas, window)
        .map(|f| f.slope)
        .ok();

    let checks: Vec<serde_json::Value> = report
        .records
        .iter()
        .map(|r| {
            serde_json::json!({
                "id": r.id,
                "status": r.status.to_string(),
                "worst_margin": if r.worst_margin.is_nan() { None } else { Some(r.worst_margin) },
            })
        })
        .collect();
    let failed = report
        .records
        .iter()
        .filter(|r| r.status == CheckStatus::Fail)
        .count();

    serde_json::json!({
        "mode": mode.to_string(),
        "xi": consts.xi,
        "sigma": consts.sigma,
        "energy_t0": consts.energy_t0,
        "c_bnd": consts.c_bnd,
        "velocity_bound": consts.velocity_bound,
        "gap_slope": gap_slope,
        "feas_slope": feas_slope,
        "accepted_steps": traj.stats.accepted_steps,
        "checks": checks,
        "checks_failed": failed,
        "decay_svg": decay_svg,
        "energy_svg": energy_svg,
    })
    .to_string()
}

/// Integrates the zero-constraint reduction and compares the dual block
/// against its closed form; returns the comparison and a plot as JSON.
#[wasm_bindgen]
pub fn nesterov_reduction(alpha: f64, t_end: f64) -> String {
    let obj = SmoothObjective::quadratic(
        QuadraticObjective::new(linalg::DMat::identity(1), vec![0.0]).unwrap(),
    );
    let p = ProblemInstance::new(obj, LinearMap::zero(1, 1), vec![0.0]).unwrap();
    let theta = if alpha > 3.0 { 0.45 } else { 0.5 };
    let mut params = SolverParams::new(
        alpha,
        0.0,
        theta,
        1.0,
        t_end.clamp(10.0, 1e5),
        vec![1.0],
        vec![0.0],
    );
    params.lambda_dot0 = vec![1.0];
    params.abs_tol = 1e-10;
    params.rel_tol = 1e-10;
    if params.strictest_mode().is_none() {
        return err_json("alpha must be at least 3");
    }
    let schedule = SampleSchedule::new(1.0, params.t_end, 160, Spacing::Log).unwrap();
    let traj = match integrate(&p, &params, &schedule) {
        Ok(t) => t,
        Err(e) => return err_json(&e.to_string()),
    };
    let times = traj.times();
    let numeric: Vec<f64> = traj.samples.iter().map(|s| s.lambda[0].abs()).collect();
    let mut worst_rel = 0.0_f64;
    let mut closed = Vec::with_capacity(times.len());
    for st in &traj.samples {
        let expect = nesterov_lambda_closed_form(&params, st.t).unwrap()[0];
        closed.push(expect.abs());
        worst_rel = worst_rel.max((st.lambda[0] - expect).abs() / (1.0 + expect.abs()));
    }
    let fgap: Vec<f64> = traj.samples.iter().map(|s| 0.5 * s.x[0] * s.x[0]).collect();
    let slope = rates::fit_envelope_slope(&times, &fgap, (params.t_end / 100.0, params.t_end))
        .map(|f| f.slope)
        .ok();
    let svg = log_log_svg(
        "objective gap under the zero-constraint reduction",
        &[Series { label: "f(x) - f*", times: &times, values: &fgap }],
    );
    let dual_svg = log_log_svg(
        "dual block: numeric vs closed form",
        &[
            Series { label: "|lambda| numeric", times: &times, values: &numeric },
            Series { label: "|lambda| closed form", times: &times, values: &closed },
        ],
    );
    serde_json::json!({
        "dual_worst_rel_err": worst_rel,
        "dual_matches": worst_rel <= 1e-6,
        "objective_slope": slope,
        "fgap_svg": svg,
        "dual_svg": dual_svg,
    })
    .to_string()
}

/// Classifies `(α, β, θ)` against the parameter regimes and reports the
/// derived quantities.
#[wasm_bindgen]
pub fn check_assumptions(alpha: f64, beta: f64, theta: f64) -> String {
    let params = SolverParams::new(alpha, beta, theta, 1.0, 10.0, vec![0.0], vec![0.0]);
    let d = params.derived();
    let strict = params.validate(ValidationMode::Strict);
    let standard = params.validate(ValidationMode::Standard);
    let (regime, note) = match (&strict, &standard) {
        (Ok(_), _) => ("strict", String::new()),
        (Err(_), Ok(_)) => ("standard", format!("{}", strict.unwrap_err())),
        (Err(_), Err(e)) => ("invalid", e.to_string()),
    };
    serde_json::json!({
        "regime": regime,
        "xi": d.xi,
        "sigma": d.sigma,
        "theta_lower": 1.0 / (alpha - 1.0),
        "theta_upper": 0.5,
        "note": note,
    })
    .to_string()
}
