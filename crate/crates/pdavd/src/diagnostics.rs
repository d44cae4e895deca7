//! Lyapunov instrumentation along trajectories.
//!
//! For an anchor `(z, μ)` and the extrapolation weight `θt`, the energy
//!
//! ```text
//! E_{z,μ}(t) = θ²t²·G_β((x,λ)|(z,μ)) + ½‖v_{z,μ}(t)‖² + (ξ/2)‖(x,λ)−(z,μ)‖²
//! G_β((x,λ)|(z,μ)) = L_β(x, μ) − L_β(z, λ)
//! v_{z,μ}(t) = (x,λ) − (z,μ) + θt·(ẋ, λ̇)
//! ```
//!
//! is nonincreasing whenever `z` is feasible, and nonnegative when the
//! anchor is a saddle point. Everything downstream of that decrease — the
//! explicit `O(1/t²)` constants, the velocity bound, the differential
//! inequalities driving trajectory convergence, and five integrability
//! statements — is recomputed here, per sample, with explicit slack. All
//! time derivatives of diagnostic scalars are evaluated from the ODE
//! right-hand side, never by finite differences (those appear only in
//! cross-validation tests).

use crate::dynamics::{second_derivatives, SolverParams, SystemState, ValidationMode};
use crate::integrator::Trajectory;
use crate::linalg;
use crate::oracle::SaddlePoint;
use crate::problem::{augmented_lagrangian, ProblemInstance};
use crate::synth::SplitMix64;
use crate::{Error, Result};

/// Relative slack for first-order inequality checks.
pub const SLACK_FIRST_ORDER: f64 = 1e-8;
/// Relative slack for checks involving second derivatives.
pub const SLACK_SECOND_ORDER: f64 = 1e-6;
/// Tail fraction below which a cumulative integral is declared finite.
pub const TAIL_FRACTION_LIMIT: f64 = 0.05;

const BALL_PROBE_SEED: u64 = 0xB0_11;
const BALL_PROBES: usize = 10;

/// Fixed comparison point `(z, μ)` for the energy function, with a recorded
/// feasibility claim for `z`.
#[derive(Clone, Debug)]
pub struct AnchorPoint {
    pub z: Vec<f64>,
    pub mu: Vec<f64>,
    pub feasible: bool,
}

impl AnchorPoint {
    /// Anchor at an oracle saddle point (feasible by construction).
    pub fn at_saddle(s: &SaddlePoint) -> Self {
        Self {
            z: s.x_star.clone(),
            mu: s.lambda_star.clone(),
            feasible: true,
        }
    }

    /// Anchor with a verified feasibility claim `‖Az − b‖ ≤ 1e-10·(1+‖b‖)`.
    pub fn feasible(p: &ProblemInstance, z: Vec<f64>, mu: Vec<f64>) -> Result<Self> {
        let r = linalg::norm(&p.constraint_residual(&z));
        if r > 1e-10 * (1.0 + linalg::norm(p.rhs())) {
            return Err(Error::InvalidDomain(format!(
                "anchor is not feasible: ‖Az − b‖ = {r:.3e}"
            )));
        }
        Ok(Self {
            z,
            mu,
            feasible: true,
        })
    }

    /// Anchor without a feasibility claim.
    pub fn infeasible(z: Vec<f64>, mu: Vec<f64>) -> Self {
        Self {
            z,
            mu,
            feasible: false,
        }
    }
}

/// Energy `E_{z,μ}` at one phase point. Callers are expected to have
/// validated `params` (ξ is derived from them directly).
pub fn energy(
    p: &ProblemInstance,
    params: &SolverParams,
    state: &SystemState,
    anchor: &AnchorPoint,
) -> Result<f64> {
    let theta_t = params.theta * state.t;
    let xi = params.derived().xi;
    let g = augmented_lagrangian(p, &state.x, &anchor.mu, params.beta)?
        - augmented_lagrangian(p, &anchor.z, &state.lambda, params.beta)?;
    let dx = linalg::sub(&state.x, &anchor.z);
    let dl = linalg::sub(&state.lambda, &anchor.mu);
    let mut vx = dx.clone();
    linalg::axpy(&mut vx, theta_t, &state.x_dot);
    let mut vl = dl.clone();
    linalg::axpy(&mut vl, theta_t, &state.lambda_dot);
    let v2 = linalg::dot(&vx, &vx) + linalg::dot(&vl, &vl);
    let d2 = linalg::dot(&dx, &dx) + linalg::dot(&dl, &dl);
    Ok(theta_t * theta_t * g + 0.5 * v2 + 0.5 * xi * d2)
}

/// Saddle-anchored primal-dual gap
/// `f(x) − f* + ⟨λ*, Ax − b⟩ + (β/2)‖Ax − b‖² ≥ 0`.
pub fn gap(p: &ProblemInstance, params: &SolverParams, state: &SystemState, saddle: &SaddlePoint) -> f64 {
    let r = p.constraint_residual(&state.x);
    p.objective().value(&state.x) - saddle.f_star
        + linalg::dot(&saddle.lambda_star, &r)
        + 0.5 * params.beta * linalg::dot(&r, &r)
}

/// The auxiliary convergence quantities at one phase point.
#[derive(Clone, Copy, Debug)]
pub struct WPhi {
    /// `W = L_β(x, λ*) − L_β(x*, λ) + ½‖(ẋ, λ̇)‖²`
    pub w: f64,
    /// `φ = ½‖(x, λ) − (x*, λ*)‖²`
    pub phi: f64,
    pub phi_dot: f64,
    pub phi_ddot: f64,
    /// Closed form `Ẇ = −(α/t)‖(ẋ,λ̇)‖² − ⟨λ−λ*, Aẋ⟩ + ⟨Ax−b, λ̇⟩`
    pub w_dot: f64,
}

/// Computes `(W, φ, φ̇, φ̈, Ẇ)`; the second derivative of `φ` uses the ODE
/// right-hand side.
pub fn w_phi(
    p: &ProblemInstance,
    params: &SolverParams,
    state: &SystemState,
    saddle: &SaddlePoint,
) -> Result<WPhi> {
    let (xdd, ldd) = second_derivatives(p, params, state)?;
    Ok(w_phi_with_accel(p, params, state, &(xdd, ldd), saddle))
}

pub(crate) fn w_phi_with_accel(
    p: &ProblemInstance,
    params: &SolverParams,
    state: &SystemState,
    accel: &(Vec<f64>, Vec<f64>),
    saddle: &SaddlePoint,
) -> WPhi {
    let vel2 = linalg::dot(&state.x_dot, &state.x_dot)
        + linalg::dot(&state.lambda_dot, &state.lambda_dot);
    let w = augmented_lagrangian(p, &state.x, &saddle.lambda_star, params.beta).unwrap()
        - augmented_lagrangian(p, &saddle.x_star, &state.lambda, params.beta).unwrap()
        + 0.5 * vel2;
    let dx = linalg::sub(&state.x, &saddle.x_star);
    let dl = linalg::sub(&state.lambda, &saddle.lambda_star);
    let phi = 0.5 * (linalg::dot(&dx, &dx) + linalg::dot(&dl, &dl));
    let phi_dot = linalg::dot(&dx, &state.x_dot) + linalg::dot(&dl, &state.lambda_dot);
    let phi_ddot = linalg::dot(&dx, &accel.0) + vel2 + linalg::dot(&dl, &accel.1);
    let r = p.constraint_residual(&state.x);
    let w_dot = -params.alpha / state.t * vel2
        - linalg::dot(&dl, &p.constraint().apply(&state.x_dot))
        + linalg::dot(&r, &state.lambda_dot);
    WPhi {
        w,
        phi,
        phi_dot,
        phi_ddot,
        w_dot,
    }
}

/// Worst-case dual probe `μ(s) = λ* + (Ax − b)/‖Ax − b‖` (or `λ*` at
/// feasibility); always inside the closed unit ball around `λ*`.
pub fn worst_case_dual(p: &ProblemInstance, state: &SystemState, saddle: &SaddlePoint) -> Vec<f64> {
    let r = p.constraint_residual(&state.x);
    let nr = linalg::norm(&r);
    if nr == 0.0 {
        return saddle.lambda_star.clone();
    }
    let mut mu = saddle.lambda_star.clone();
    linalg::axpy(&mut mu, 1.0 / nr, &r);
    mu
}

/// Explicit constants of the rate bounds, evaluated at the initial state.
#[derive(Clone, Copy, Debug)]
pub struct ConstantsReport {
    pub xi: f64,
    pub sigma: f64,
    /// `E_{x*,λ*}(t0)`
    pub energy_t0: f64,
    /// `|f(x0) − f*| + (1 + ‖λ*‖)·‖Ax0 − b‖ + (β/2)‖Ax0 − b‖²`
    pub c_lag: f64,
    /// `‖(x0,λ0) − (x*,λ*) + θt0·(ẋ0,λ̇0)‖² + 1`
    pub c_v: f64,
    /// `‖(x0,λ0) − (x*,λ*)‖² + 1`
    pub c_ite: f64,
    /// Upper bound `θ²t0²·c_lag + c_v + ξ·c_ite` for the ball supremum of
    /// the initial energy (the bound is implemented, not the supremum).
    pub c_sup_bound: f64,
    /// `c_sup_bound + 2·E(t0) + θ(α − 1)`
    pub c_bnd: f64,
    /// `(1/θ)(1/√ξ + 1)·√(2E(t0))`; absent when `ξ = 0`.
    pub velocity_bound: Option<f64>,
}

impl ConstantsReport {
    /// Pointwise rate bound `c_bnd / (θ²t²)`.
    pub fn rate_bound(&self, theta: f64, t: f64) -> f64 {
        self.c_bnd / (theta * theta * t * t)
    }
}

/// Computes every explicit constant from the initial state and the saddle.
pub fn constants(
    p: &ProblemInstance,
    params: &SolverParams,
    initial: &SystemState,
    saddle: &SaddlePoint,
) -> Result<ConstantsReport> {
    let d = params.derived();
    let anchor = AnchorPoint::at_saddle(saddle);
    let e0 = energy(p, params, initial, &anchor)?;
    let r0 = p.constraint_residual(&initial.x);
    let feas0 = linalg::norm(&r0);
    let lam_norm = linalg::norm(&saddle.lambda_star);
    let c_lag = (p.objective().value(&initial.x) - saddle.f_star).abs()
        + (1.0 + lam_norm) * feas0
        + 0.5 * params.beta * feas0 * feas0;
    let dx = linalg::sub(&initial.x, &saddle.x_star);
    let dl = linalg::sub(&initial.lambda, &saddle.lambda_star);
    let tt = params.theta * params.t0;
    let mut vx = dx.clone();
    linalg::axpy(&mut vx, tt, &initial.x_dot);
    let mut vl = dl.clone();
    linalg::axpy(&mut vl, tt, &initial.lambda_dot);
    let c_v = linalg::dot(&vx, &vx) + linalg::dot(&vl, &vl) + 1.0;
    let c_ite = linalg::dot(&dx, &dx) + linalg::dot(&dl, &dl) + 1.0;
    let c_sup_bound = tt * tt * c_lag + c_v + d.xi * c_ite;
    let c_bnd = c_sup_bound + 2.0 * e0 + params.theta * (params.alpha - 1.0);
    let velocity_bound = if d.xi > 0.0 {
        Some((1.0 / params.theta) * (1.0 / d.xi.sqrt() + 1.0) * (2.0 * e0.max(0.0)).sqrt())
    } else {
        None
    };
    Ok(ConstantsReport {
        xi: d.xi,
        sigma: d.sigma,
        energy_t0: e0,
        c_lag,
        c_v,
        c_ite,
        c_sup_bound,
        c_bnd,
        velocity_bound,
    })
}

/// Per-sample diagnostic scalars.
#[derive(Clone, Copy, Debug)]
pub struct LyapunovSample {
    pub t: f64,
    /// `E_{x*,λ*}(t)`
    pub energy: f64,
    /// saddle-anchored primal-dual gap including the penalty term
    pub gap: f64,
    pub v_norm: f64,
    /// `‖Ax − b‖` (also the dual KKT residual)
    pub feasibility: f64,
    /// `f(x) − f*`
    pub objective_gap: f64,
    /// `‖(ẋ, λ̇)‖`
    pub velocity_norm: f64,
    pub w: f64,
    pub phi: f64,
    pub phi_dot: f64,
    pub phi_ddot: f64,
    pub w_dot: f64,
    /// `‖∇f(x) + A*λ‖` (primal KKT residual)
    pub stationarity: f64,
    /// `‖∇f(x) − ∇f(x*)‖`
    pub gradient_gap: f64,
    /// `‖A*(λ − λ*)‖`
    pub adjoint_gap: f64,
}

/// Evaluates the full diagnostic vector at every trajectory sample.
pub fn evaluate(
    p: &ProblemInstance,
    params: &SolverParams,
    traj: &Trajectory,
    saddle: &SaddlePoint,
) -> Result<Vec<LyapunovSample>> {
    let anchor = AnchorPoint::at_saddle(saddle);
    let grad_star = p.objective().gradient(&saddle.x_star);
    let mut out = Vec::with_capacity(traj.len());
    for (state, accel) in traj.samples.iter().zip(&traj.accelerations) {
        let r = p.constraint_residual(&state.x);
        let feasibility = linalg::norm(&r);
        let objective_gap = p.objective().value(&state.x) - saddle.f_star;
        let g = objective_gap
            + linalg::dot(&saddle.lambda_star, &r)
            + 0.5 * params.beta * feasibility * feasibility;
        let wp = w_phi_with_accel(p, params, state, accel, saddle);
        let theta_t = params.theta * state.t;
        let mut vx = linalg::sub(&state.x, &saddle.x_star);
        linalg::axpy(&mut vx, theta_t, &state.x_dot);
        let mut vl = linalg::sub(&state.lambda, &saddle.lambda_star);
        linalg::axpy(&mut vl, theta_t, &state.lambda_dot);
        let grad = p.objective().gradient(&state.x);
        let mut stat = grad.clone();
        linalg::axpy(&mut stat, 1.0, &p.constraint().adjoint_apply(&state.lambda));
        let dl = linalg::sub(&state.lambda, &saddle.lambda_star);
        out.push(LyapunovSample {
            t: state.t,
            energy: energy(p, params, state, &anchor)?,
            gap: g,
            v_norm: linalg::pair_norm(&vx, &vl),
            feasibility,
            objective_gap,
            velocity_norm: linalg::pair_norm(&state.x_dot, &state.lambda_dot),
            w: wp.w,
            phi: wp.phi,
            phi_dot: wp.phi_dot,
            phi_ddot: wp.phi_ddot,
            w_dot: wp.w_dot,
            stationarity: linalg::norm(&stat),
            gradient_gap: linalg::norm(&linalg::sub(&grad, &grad_star)),
            adjoint_gap: linalg::norm(&p.constraint().adjoint_apply(&dl)),
        });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

impl std::fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CheckStatus::Pass => write!(f, "pass"),
            CheckStatus::Fail => write!(f, "fail"),
            CheckStatus::Skipped => write!(f, "skip"),
        }
    }
}

/// One named per-sample check with its worst margin (`bound − value`;
/// negative means violated before slack).
#[derive(Clone, Debug)]
pub struct CheckRecord {
    pub id: &'static str,
    pub status: CheckStatus,
    /// Worst raw margin over all samples (bound minus value).
    pub worst_margin: f64,
    /// Sample index attaining the worst margin.
    pub worst_index: Option<usize>,
    pub note: String,
}

impl CheckRecord {
    fn skipped(id: &'static str, note: &str) -> Self {
        Self {
            id,
            status: CheckStatus::Skipped,
            worst_margin: f64::NAN,
            worst_index: None,
            note: note.to_string(),
        }
    }
}

/// Aggregated result of the per-sample certification checks.
#[derive(Clone, Debug)]
pub struct LyapunovReport {
    pub mode: ValidationMode,
    pub records: Vec<CheckRecord>,
}

impl LyapunovReport {
    pub fn all_passed(&self) -> bool {
        self.records.iter().all(|r| r.status != CheckStatus::Fail)
    }

    pub fn record(&self, id: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    /// One record per line: `status  id  worst_margin  note`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# mode: {}\n", self.mode));
        for r in &self.records {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                r.status,
                r.id,
                if r.worst_margin.is_nan() {
                    "-".to_string()
                } else {
                    format!("{:e}", r.worst_margin)
                },
                r.note
            ));
        }
        out
    }
}

struct MarginTracker {
    worst: f64,
    index: Option<usize>,
    ok: bool,
}

impl MarginTracker {
    fn new() -> Self {
        Self {
            worst: f64::INFINITY,
            index: None,
            ok: true,
        }
    }

    /// `margin` is bound − value; `slack` is the allowed violation.
    fn push(&mut self, idx: usize, margin: f64, slack: f64) {
        if margin < self.worst {
            self.worst = margin;
            self.index = Some(idx);
        }
        if margin < -slack {
            self.ok = false;
        }
    }

    fn into_record(self, id: &'static str, note: String) -> CheckRecord {
        CheckRecord {
            id,
            status: if self.ok {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            worst_margin: if self.worst.is_finite() {
                self.worst
            } else {
                f64::NAN
            },
            worst_index: self.index,
            note,
        }
    }
}

/// Runs every per-sample certification check along a trajectory.
///
/// `mode` is the regime the run's parameters satisfy; strict-only checks are
/// reported as skipped under standard parameters, and the checks that divide
/// by `ℓ` are skipped for affine objectives (`ℓ = 0`).
pub fn lyapunov_report(
    p: &ProblemInstance,
    params: &SolverParams,
    traj: &Trajectory,
    saddle: &SaddlePoint,
    mode: ValidationMode,
) -> Result<LyapunovReport> {
    if traj.is_empty() {
        return Err(Error::TooFewSamples { needed: 2, got: 0 });
    }
    let samples = evaluate(p, params, traj, saddle)?;
    let consts = constants(p, params, &traj.samples[0], saddle)?;
    let d = params.derived();
    let theta = params.theta;
    let alpha = params.alpha;
    let beta = params.beta;
    let ell = p.objective().lipschitz();
    let strict = mode == ValidationMode::Strict;
    let e0 = consts.energy_t0;
    let mut records = Vec::new();

    // (a) anchored energy is nonincreasing between consecutive samples;
    // the slack follows the run's integrator tolerance budget
    {
        let mut tr = MarginTracker::new();
        let slack = (SLACK_FIRST_ORDER + 1e3 * params.abs_tol) * (1.0 + e0);
        for k in 1..samples.len() {
            tr.push(k, samples[k - 1].energy - samples[k].energy, slack);
        }
        records.push(tr.into_record(
            "energy_monotone",
            format!("E(t0) = {:.6e}, slack {:.1e}", e0, slack),
        ));
    }

    // energy at dual-ball anchors obeys the perturbed bound
    {
        let mut tr = MarginTracker::new();
        let m = p.dim_dual();
        let mut rng = SplitMix64::new(BALL_PROBE_SEED);
        let probes = if m == 0 { 1 } else { BALL_PROBES };
        for _ in 0..probes {
            let mu = if m == 0 {
                saddle.lambda_star.clone()
            } else {
                let c: Vec<f64> = (0..m).map(|_| rng.next_symmetric()).collect();
                let nc = linalg::norm(&c).max(1e-12);
                let radius = rng.next_f64();
                let mut mu = saddle.lambda_star.clone();
                linalg::axpy(&mut mu, radius / nc, &c);
                mu
            };
            let anchor = AnchorPoint {
                z: saddle.x_star.clone(),
                mu: mu.clone(),
                feasible: true,
            };
            let dmu = linalg::sub(&mu, &saddle.lambda_star);
            for (k, (state, s)) in traj.samples.iter().zip(&samples).enumerate() {
                let e_mu = energy(p, params, state, &anchor)?;
                let r = p.constraint_residual(&state.x);
                let bound = 2.0 * e0
                    + theta * (alpha - 1.0)
                    + theta * theta * s.t * s.t * linalg::dot(&dmu, &r);
                let slack = SLACK_FIRST_ORDER * (1.0 + bound.abs() + e_mu.abs());
                tr.push(k, bound - e_mu, slack);
            }
        }
        records.push(tr.into_record(
            "energy_ball_bound",
            format!("{probes} dual probes in the unit ball"),
        ));
    }

    // (c) gap + feasibility under the explicit rate bound
    {
        let mut tr = MarginTracker::new();
        for (k, s) in samples.iter().enumerate() {
            let lag_gap = s.gap - 0.5 * beta * s.feasibility * s.feasibility;
            let lhs = lag_gap + s.feasibility;
            let rhs = consts.rate_bound(theta, s.t);
            tr.push(k, rhs - lhs, SLACK_FIRST_ORDER * (1.0 + rhs));
        }
        records.push(tr.into_record(
            "gap_feasibility_bound",
            format!("C_bnd = {:.6e}", consts.c_bnd),
        ));
    }

    // (d) two-sided objective bound
    {
        let mut tr = MarginTracker::new();
        let lam_norm = linalg::norm(&saddle.lambda_star);
        for (k, s) in samples.iter().enumerate() {
            let bound = consts.rate_bound(theta, s.t);
            let upper = (1.0 + lam_norm) * bound;
            let lower = -lam_norm * bound;
            let slack = SLACK_FIRST_ORDER * (1.0 + upper.abs() + lower.abs());
            let margin = (upper - s.objective_gap).min(s.objective_gap - lower);
            tr.push(k, margin, slack);
        }
        records.push(tr.into_record("objective_bounds", String::new()));
    }

    // gap identity: formula route vs Lagrangian-difference route
    {
        let mut tr = MarginTracker::new();
        for (k, (state, s)) in traj.samples.iter().zip(&samples).enumerate() {
            let via_lag = augmented_lagrangian(p, &state.x, &saddle.lambda_star, beta)?
                - augmented_lagrangian(p, &saddle.x_star, &state.lambda, beta)?;
            let scale = 1.0
                + s.gap.abs()
                + saddle.f_star.abs()
                + p.objective().value(&state.x).abs()
                + linalg::norm(&state.lambda)
                + linalg::norm(&saddle.lambda_star);
            let slack = 1e-12 * scale;
            tr.push(k, slack - (s.gap - via_lag).abs(), slack);
        }
        records.push(tr.into_record("gap_identity", String::new()));
    }

    // (b) velocity bound (strict)
    if strict {
        let mut tr = MarginTracker::new();
        let bound = consts.velocity_bound.expect("xi > 0 in strict mode");
        for (k, s) in samples.iter().enumerate() {
            // t·‖vel‖ carries accumulated integrator noise of order
            // sqrt(steps)·tol, so the slack gets a t·tol allowance
            let slack =
                SLACK_FIRST_ORDER * (1.0 + bound) + 1e4 * params.abs_tol * s.t;
            tr.push(k, bound - s.t * s.velocity_norm, slack);
        }
        records.push(tr.into_record("velocity_bound", format!("bound = {bound:.6e}")));
    } else {
        records.push(CheckRecord::skipped(
            "velocity_bound",
            "requires strict-mode parameters",
        ));
    }

    // (f) trajectory stays in the energy ball (strict)
    if strict {
        let mut tr = MarginTracker::new();
        let radius2 = 2.0 * e0 / d.xi;
        for (k, s) in samples.iter().enumerate() {
            tr.push(
                k,
                radius2 - 2.0 * s.phi,
                SLACK_FIRST_ORDER * (1.0 + radius2),
            );
        }
        records.push(tr.into_record(
            "trajectory_radius",
            format!("2E(t0)/xi = {radius2:.6e}"),
        ));
    } else {
        records.push(CheckRecord::skipped(
            "trajectory_radius",
            "requires strict-mode parameters",
        ));
    }

    // (e) second-order descent inequality (strict, ℓ > 0)
    if strict && ell > 0.0 {
        let mut tr = MarginTracker::new();
        for (k, s) in samples.iter().enumerate() {
            let terms = [
                s.phi_ddot,
                alpha / s.t * s.phi_dot,
                theta * s.t * s.w_dot,
                s.gradient_gap * s.gradient_gap / (2.0 * ell),
                0.5 * beta * s.feasibility * s.feasibility,
            ];
            let lhs: f64 = terms.iter().sum();
            let scale: f64 = 1.0 + terms.iter().map(|v| v.abs()).sum::<f64>();
            tr.push(k, -lhs, SLACK_SECOND_ORDER * scale);
        }
        records.push(tr.into_record("descent_inequality", String::new()));
    } else {
        records.push(CheckRecord::skipped(
            "descent_inequality",
            if strict {
                "objective is affine (l = 0)"
            } else {
                "requires strict-mode parameters"
            },
        ));
    }

    // combined second-order inequality with the adjoint-gap terms
    // (strict, ℓ > 0)
    if strict && ell > 0.0 {
        let a_norm = p.constraint().operator_norm();
        let c_gra = (2.0 - 1.0 / (2.0 * ell)).max(0.0);
        let c_fea = (2.0 * beta * beta * a_norm * a_norm + 1.0 - 0.5 * beta).max(0.0);
        let mut tr = MarginTracker::new();
        for (k, ((state, accel), s)) in traj
            .samples
            .iter()
            .zip(&traj.accelerations)
            .zip(&samples)
            .enumerate()
        {
            let dl = linalg::sub(&state.lambda, &saddle.lambda_star);
            let adj = p.constraint().adjoint_apply(&dl);
            let adj_dot = p.constraint().adjoint_apply(&state.lambda_dot);
            // d/dt ‖(ẋ, λ̇)‖²
            let dvel2 = 2.0
                * (linalg::dot(&state.x_dot, &accel.0)
                    + linalg::dot(&state.lambda_dot, &accel.1));
            // d/dt ( t·‖A*(λ − λ*)‖² )
            let dtal = linalg::dot(&adj, &adj) + 2.0 * state.t * linalg::dot(&adj, &adj_dot);
            // ⟨ẍ + (α/t)ẋ, A*(λ − λ*)⟩
            let mut newton_term = accel.0.clone();
            linalg::axpy(&mut newton_term, alpha / state.t, &state.x_dot);
            let cross = linalg::dot(&newton_term, &adj);
            let lhs_terms = [
                s.phi_ddot,
                alpha / s.t * s.phi_dot,
                theta * s.t * s.w_dot,
                alpha / s.t * dvel2,
                theta * dtal,
                2.0 * cross,
            ];
            let lhs: f64 = lhs_terms.iter().sum();
            let rhs = (theta - 1.0) * s.adjoint_gap * s.adjoint_gap
                + c_gra * s.gradient_gap * s.gradient_gap
                + c_fea * s.feasibility * s.feasibility;
            let scale: f64 =
                1.0 + lhs_terms.iter().map(|v| v.abs()).sum::<f64>() + rhs.abs();
            tr.push(k, rhs - lhs, SLACK_SECOND_ORDER * scale);
        }
        records.push(tr.into_record(
            "combined_inequality",
            format!("C_gra = {c_gra:.4e}, C_fea = {c_fea:.4e}"),
        ));
    } else {
        records.push(CheckRecord::skipped(
            "combined_inequality",
            if strict {
                "objective is affine (l = 0)"
            } else {
                "requires strict-mode parameters"
            },
        ));
    }

    // φ settles: oscillation over the last sampled decade (strict)
    if strict {
        let t_end = samples.last().unwrap().t;
        let phis: Vec<f64> = samples
            .iter()
            .filter(|s| s.t >= t_end / 10.0)
            .map(|s| s.phi)
            .collect();
        let osc = phis.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - phis.iter().cloned().fold(f64::INFINITY, f64::min);
        let limit = 1e-4 * (1.0 + samples[0].phi);
        let mut tr = MarginTracker::new();
        tr.push(samples.len() - 1, limit - osc, 0.0);
        records.push(tr.into_record(
            "phi_limit_oscillation",
            format!("oscillation {osc:.3e} vs limit {limit:.3e}"),
        ));
    } else {
        records.push(CheckRecord::skipped(
            "phi_limit_oscillation",
            "requires strict-mode parameters",
        ));
    }

    Ok(LyapunovReport { mode, records })
}

/// One cumulative integral with its plateau statistics.
#[derive(Clone, Debug)]
pub struct IntegralEntry {
    pub id: &'static str,
    /// Trapezoid total over the sample grid.
    pub total: f64,
    /// Fraction of the total accumulated over the last time decade.
    pub tail_fraction: f64,
    /// Whether finiteness is claimed for the run's parameters (e.g. the
    /// velocity integral carries no claim at ξ = 0, where its a-priori
    /// bound is vacuous).
    pub claimed: bool,
    pub bound: Option<IntegralBound>,
}

/// An explicit a-priori bound for a (scaled) integral.
#[derive(Clone, Copy, Debug)]
pub struct IntegralBound {
    pub scaled_value: f64,
    pub limit: f64,
    pub satisfied: bool,
}

#[derive(Clone, Debug)]
pub struct IntegralReport {
    pub entries: Vec<IntegralEntry>,
}

impl IntegralReport {
    pub fn entry(&self, id: &str) -> Option<&IntegralEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// Every integral whose finiteness the run's parameters claim has
    /// plateaued.
    pub fn all_finite(&self) -> bool {
        self.entries
            .iter()
            .filter(|e| e.claimed)
            .all(|e| e.tail_fraction < TAIL_FRACTION_LIMIT)
    }

    pub fn bounds_satisfied(&self) -> bool {
        self.entries
            .iter()
            .filter_map(|e| e.bound)
            .all(|b| b.satisfied)
    }
}

fn trapezoid_cumulative(times: &[f64], values: &[f64]) -> Vec<f64> {
    let mut cum = vec![0.0; times.len()];
    for k in 1..times.len() {
        cum[k] = cum[k - 1] + 0.5 * (times[k] - times[k - 1]) * (values[k] + values[k - 1]);
    }
    cum
}

fn tail_fraction(times: &[f64], cum: &[f64]) -> f64 {
    let total = *cum.last().unwrap();
    if total <= 0.0 {
        return 0.0;
    }
    let cut = times.last().unwrap() / 10.0;
    // cumulative value at the decade cut, linearly interpolated
    let mut at_cut = 0.0;
    for k in 1..times.len() {
        if times[k] >= cut {
            let f = (cut - times[k - 1]) / (times[k] - times[k - 1]);
            at_cut = cum[k - 1] + f * (cum[k] - cum[k - 1]);
            break;
        }
    }
    (total - at_cut) / total
}

/// Cumulative trapezoid integrals of the five integrable quantities, their
/// last-decade tail fractions, and the explicit a-priori bounds where one
/// exists.
pub fn cumulative_integrals(
    p: &ProblemInstance,
    params: &SolverParams,
    traj: &Trajectory,
    saddle: &SaddlePoint,
) -> Result<IntegralReport> {
    if traj.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: traj.len(),
        });
    }
    let samples = evaluate(p, params, traj, saddle)?;
    let consts = constants(p, params, &traj.samples[0], saddle)?;
    let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let theta = params.theta;
    let e0 = consts.energy_t0;
    let ell = p.objective().lipschitz();

    // velocity noise of order 1e3·tol accumulates into the integrands, so a
    // total below this level carries no tail structure worth judging
    let span = times.last().unwrap() - times[0];
    let vel_noise = 1e3 * params.abs_tol;
    let noise_floor = 2.0 * vel_noise * vel_noise * span * span;
    let make = |id: &'static str,
                values: Vec<f64>,
                claimed: bool,
                bound: Option<(f64, f64)>|
     -> IntegralEntry {
        let cum = trapezoid_cumulative(&times, &values);
        let total = *cum.last().unwrap();
        let wmax = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let floor = noise_floor + 1e-13 * (1.0 + wmax * span);
        let tail = if total <= floor {
            0.0
        } else {
            tail_fraction(&times, &cum)
        };
        IntegralEntry {
            id,
            total,
            tail_fraction: tail,
            claimed,
            bound: bound.map(|(scaled, limit)| IntegralBound {
                scaled_value: scaled,
                limit,
                satisfied: scaled <= limit * (1.0 + 1e-6) + floor,
            }),
        }
    };

    let feas2: Vec<f64> = samples
        .iter()
        .map(|s| s.t * s.feasibility * s.feasibility)
        .collect();
    let feas_total = *trapezoid_cumulative(&times, &feas2).last().unwrap();
    let lag: Vec<f64> = samples
        .iter()
        .map(|s| s.t * (s.gap - 0.5 * params.beta * s.feasibility * s.feasibility))
        .collect();
    let lag_total = *trapezoid_cumulative(&times, &lag).last().unwrap();
    let vel2: Vec<f64> = samples
        .iter()
        .map(|s| s.t * s.velocity_norm * s.velocity_norm)
        .collect();
    let vel_total = *trapezoid_cumulative(&times, &vel2).last().unwrap();
    let grad2: Vec<f64> = samples
        .iter()
        .map(|s| s.t * s.gradient_gap * s.gradient_gap)
        .collect();
    let grad_total = *trapezoid_cumulative(&times, &grad2).last().unwrap();
    let adj2: Vec<f64> = samples
        .iter()
        .map(|s| s.t * s.adjoint_gap * s.adjoint_gap)
        .collect();

    let strict = params.strictest_mode() == Some(crate::dynamics::ValidationMode::Strict);
    let entries = vec![
        make(
            "feasibility_sq",
            feas2,
            params.beta > 0.0 || strict,
            (params.beta > 0.0).then(|| (params.beta * feas_total, 2.0 * e0 / theta)),
        ),
        make(
            "lagrangian_gap",
            lag,
            theta < 0.5,
            (theta < 0.5).then(|| ((1.0 - 2.0 * theta) * lag_total, e0 / theta)),
        ),
        make(
            "velocity_sq",
            vel2,
            consts.xi > 0.0,
            (consts.xi > 0.0).then(|| (consts.xi * vel_total, e0 / theta)),
        ),
        make(
            "gradient_gap_sq",
            grad2,
            ell > 0.0,
            (ell > 0.0).then(|| (theta / (2.0 * ell) * grad_total, e0)),
        ),
        make("adjoint_gap_sq", adj2, strict && ell > 0.0, None),
    ];
    Ok(IntegralReport { entries })
}

/// The four KKT residual quantities at one phase point.
#[derive(Clone, Copy, Debug)]
pub struct KktResiduals {
    /// `‖∇f(x) + A*λ‖`
    pub stationarity: f64,
    /// `‖Ax − b‖`
    pub feasibility: f64,
    /// `‖∇f(x) − ∇f(x*)‖`
    pub gradient_gap: f64,
    /// `‖A*(λ − λ*)‖`
    pub adjoint_gap: f64,
}

pub fn kkt_residuals(
    p: &ProblemInstance,
    state: &SystemState,
    saddle: &SaddlePoint,
) -> KktResiduals {
    let grad = p.objective().gradient(&state.x);
    let mut stat = grad.clone();
    linalg::axpy(&mut stat, 1.0, &p.constraint().adjoint_apply(&state.lambda));
    let grad_star = p.objective().gradient(&saddle.x_star);
    let dl = linalg::sub(&state.lambda, &saddle.lambda_star);
    KktResiduals {
        stationarity: linalg::norm(&stat),
        feasibility: linalg::norm(&p.constraint_residual(&state.x)),
        gradient_gap: linalg::norm(&linalg::sub(&grad, &grad_star)),
        adjoint_gap: linalg::norm(&p.constraint().adjoint_apply(&dl)),
    }
}

/// Result of the double-integral inequality self-test.
#[derive(Clone, Copy, Debug)]
pub struct QuadratureReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs ≥ 0` up to quadrature accuracy.
    pub margin: f64,
}

/// Verifies numerically that for `α > 1` and nonnegative `h` on `[δ, r]`
///
/// ```text
/// ∫_δ^r t^{−α} ( ∫_δ^t s^{α−1} h(s) ds ) dt  ≤  (α−1)⁻¹ ∫_δ^r h(t) dt ,
/// ```
///
/// with equality in the limit `r → ∞` for integrable `h`. `h_samples` are
/// values of `h` on the uniform grid over `[δ, r]`.
pub fn quadrature_selftest(
    alpha: f64,
    delta: f64,
    r: f64,
    h_samples: &[f64],
) -> Result<QuadratureReport> {
    if !(alpha > 1.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            message: format!("must be > 1, got {alpha}"),
        });
    }
    if !(delta > 0.0) || !(r > delta) {
        return Err(Error::InvalidDomain(format!(
            "need 0 < delta < r, got delta = {delta}, r = {r}"
        )));
    }
    if h_samples.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: h_samples.len(),
        });
    }
    if h_samples.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidDomain(
            "h must be nonnegative and finite".into(),
        ));
    }
    let n = h_samples.len();
    let times: Vec<f64> = (0..n)
        .map(|i| delta + (r - delta) * i as f64 / (n - 1) as f64)
        .collect();
    let inner: Vec<f64> = times
        .iter()
        .zip(h_samples)
        .map(|(t, h)| t.powf(alpha - 1.0) * h)
        .collect();
    let g = trapezoid_cumulative(&times, &inner);
    let outer: Vec<f64> = times
        .iter()
        .zip(&g)
        .map(|(t, gi)| t.powf(-alpha) * gi)
        .collect();
    let lhs = *trapezoid_cumulative(&times, &outer).last().unwrap();
    let rhs = *trapezoid_cumulative(&times, h_samples).last().unwrap() / (alpha - 1.0);
    Ok(QuadratureReport {
        lhs,
        rhs,
        margin: rhs - lhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::{integrate, SampleSchedule, Spacing};
    use crate::oracle::solve_kkt_qp;
    use crate::synth;

    fn qp2_setup() -> (ProblemInstance, SolverParams, SaddlePoint) {
        let p = synth::qp2();
        let s = solve_kkt_qp(&p).unwrap();
        let params = SolverParams::new(4.0, 1.0, 0.45, 1.0, 1e3, vec![0.0, 0.0], vec![0.0]);
        (p, params, s)
    }

    #[test]
    fn energy_hand_value() {
        let (p, params, s) = qp2_setup();
        let state = SystemState::initial(&params);
        let anchor = AnchorPoint::at_saddle(&s);
        let e = energy(&p, &params, &state, &anchor).unwrap();
        assert!((e - 0.658125).abs() < 1e-12, "E = {e}");
        // zero at the saddle with zero velocities
        let at_saddle = SystemState {
            t: 1.0,
            x: s.x_star.clone(),
            lambda: s.lambda_star.clone(),
            x_dot: vec![0.0; 2],
            lambda_dot: vec![0.0],
        };
        assert!(energy(&p, &params, &at_saddle, &anchor).unwrap().abs() < 1e-12);
    }

    #[test]
    fn energy_grows_with_velocity() {
        let (p, params, s) = qp2_setup();
        let anchor = AnchorPoint::at_saddle(&s);
        let mut state = SystemState::initial(&params);
        state.x_dot = vec![0.3, -0.2];
        state.lambda_dot = vec![0.5];
        let e1 = energy(&p, &params, &state, &anchor).unwrap();
        state.x_dot = vec![0.6, -0.4];
        state.lambda_dot = vec![1.0];
        let e2 = energy(&p, &params, &state, &anchor).unwrap();
        // doubling the velocity from a feasible-direction offset must raise E
        assert!(e2 > e1, "{e2} <= {e1}");
    }

    #[test]
    fn gap_hand_values_and_identity() {
        let (p, params, s) = qp2_setup();
        let state = SystemState::initial(&params);
        let g = gap(&p, &params, &state, &s);
        assert!((g - 0.75).abs() < 1e-12, "gap {g}");
        // x = x* gives zero
        let at = SystemState {
            t: 1.0,
            x: s.x_star.clone(),
            lambda: vec![0.9],
            x_dot: vec![0.0; 2],
            lambda_dot: vec![0.0],
        };
        assert!(gap(&p, &params, &at, &s).abs() < 1e-12);
        // identity with the Lagrangian-difference route
        let via = augmented_lagrangian(&p, &state.x, &s.lambda_star, params.beta).unwrap()
            - augmented_lagrangian(&p, &s.x_star, &state.lambda, params.beta).unwrap();
        assert!((g - via).abs() < 1e-12);
    }

    #[test]
    fn w_phi_zero_at_saddle() {
        let (p, params, s) = qp2_setup();
        let at = SystemState {
            t: 2.0,
            x: s.x_star.clone(),
            lambda: s.lambda_star.clone(),
            x_dot: vec![0.0; 2],
            lambda_dot: vec![0.0],
        };
        let wp = w_phi(&p, &params, &at, &s).unwrap();
        assert!(wp.w.abs() < 1e-12);
        assert!(wp.phi.abs() < 1e-24);
        assert!(wp.phi_dot.abs() < 1e-12);
        assert!(wp.phi_ddot.abs() < 1e-12);
        assert!(wp.w_dot.abs() < 1e-12);
    }

    #[test]
    fn gap_never_dips_below_rounding() {
        // anchored at a saddle, the gap is nonnegative up to rounding for
        // arbitrary phase points
        let (p, params, s) = qp2_setup();
        let mut rng = synth::SplitMix64::new(41);
        for _ in 0..100 {
            let state = SystemState {
                t: 1.0 + 9.0 * rng.next_f64(),
                x: vec![3.0 * rng.next_symmetric(), 3.0 * rng.next_symmetric()],
                lambda: vec![3.0 * rng.next_symmetric()],
                x_dot: vec![rng.next_symmetric(), rng.next_symmetric()],
                lambda_dot: vec![rng.next_symmetric()],
            };
            let g = gap(&p, &params, &state, &s);
            let scale = 1.0 + p.objective().value(&state.x).abs() + s.f_star.abs();
            assert!(g >= -1e-10 * scale, "gap {g} at {state:?}");
        }
    }

    #[test]
    fn w_dot_and_phi_ddot_match_finite_differences() {
        let (p, params, s) = qp2_setup();
        let schedule = SampleSchedule::from_times(vec![
            4.6, 4.8, 4.9, 4.95, 5.0, 5.05, 5.1, 5.2, 5.4,
        ])
        .unwrap();
        let mut params = params;
        params.t_end = 6.0;
        let traj = integrate(&p, &params, &schedule).unwrap();
        let wp: Vec<WPhi> = traj
            .samples
            .iter()
            .zip(&traj.accelerations)
            .map(|(st, acc)| w_phi_with_accel(&p, &params, st, acc, &s))
            .collect();
        // centered differences at t = 5.0 with shrinking h: observed order ≥ 1.9
        let idx = [(0, 8, 0.4), (1, 7, 0.2), (2, 6, 0.1), (3, 5, 0.05)];
        let at = 4;
        let mut prev_err_w: Option<f64> = None;
        let mut prev_err_p: Option<f64> = None;
        let mut orders_w = Vec::new();
        let mut orders_p = Vec::new();
        for (lo, hi, h) in idx {
            let fd_w = (wp[hi].w - wp[lo].w) / (2.0 * h);
            let err_w = (fd_w - wp[at].w_dot).abs();
            let fd_p = (wp[hi].phi_dot - wp[lo].phi_dot) / (2.0 * h);
            let err_p = (fd_p - wp[at].phi_ddot).abs();
            if let Some(pw) = prev_err_w {
                orders_w.push((pw / err_w).log2());
            }
            if let Some(pp) = prev_err_p {
                orders_p.push((pp / err_p).log2());
            }
            prev_err_w = Some(err_w);
            prev_err_p = Some(err_p);
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(mean(&orders_w) >= 1.9, "W order {:?}", orders_w);
        assert!(mean(&orders_p) >= 1.9, "phi order {:?}", orders_p);
    }

    #[test]
    fn worst_case_dual_examples() {
        let (p, params, s) = qp2_setup();
        // feasible point returns λ*
        let at = SystemState {
            t: 1.0,
            x: s.x_star.clone(),
            lambda: vec![0.0],
            x_dot: vec![0.0; 2],
            lambda_dot: vec![0.0],
        };
        assert_eq!(worst_case_dual(&p, &at, &s), s.lambda_star);
        // infeasible point: probe sits at distance exactly 1
        let state = SystemState::initial(&params);
        let mu = worst_case_dual(&p, &state, &s);
        let d = linalg::norm(&linalg::sub(&mu, &s.lambda_star));
        assert!((d - 1.0).abs() < 1e-14);

        // unit residual direction is preserved
        let deg = synth::degenerate_qp();
        let sd = crate::oracle::solve_kkt_qp(&deg).unwrap();
        let st = SystemState {
            t: 1.0,
            x: vec![0.8, 0.8], // residual (0.6, 0.6)·... direction (1,1)/√2
            lambda: vec![0.0, 0.0],
            x_dot: vec![0.0; 2],
            lambda_dot: vec![0.0; 2],
        };
        let mu = worst_case_dual(&deg, &st, &sd);
        let diff = linalg::sub(&mu, &sd.lambda_star);
        assert!((diff[0] - diff[1]).abs() < 1e-14);
        assert!((linalg::norm(&diff) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn constants_collapse_at_saddle_start() {
        let (p, mut params, s) = qp2_setup();
        params.x0 = s.x_star.clone();
        params.lambda0 = s.lambda_star.clone();
        let initial = SystemState::initial(&params);
        let c = constants(&p, &params, &initial, &s).unwrap();
        let d = params.derived();
        assert!(c.c_lag.abs() < 1e-12);
        assert!((c.c_v - 1.0).abs() < 1e-12);
        assert!((c.c_ite - 1.0).abs() < 1e-12);
        assert!(c.energy_t0.abs() < 1e-12);
        let expect = 1.0 + d.xi + params.theta * (params.alpha - 1.0);
        assert!((c.c_bnd - expect).abs() < 1e-10, "c_bnd {}", c.c_bnd);
        assert!(c.c_bnd >= c.c_sup_bound);
    }

    #[test]
    fn constants_finite_positive_and_monotone_in_energy() {
        let (p, params, s) = qp2_setup();
        let initial = SystemState::initial(&params);
        let c = constants(&p, &params, &initial, &s).unwrap();
        for v in [c.c_lag, c.c_v, c.c_ite, c.c_sup_bound, c.c_bnd, c.energy_t0] {
            assert!(v.is_finite() && v >= 0.0);
        }
        // independent recomputation of C_lag: |f(x0) − f*| + (1+‖λ*‖)‖r‖ + β/2‖r‖²
        let expect_clag = 0.25 + (1.0 + 0.5) * 1.0 + 0.5;
        assert!((c.c_lag - expect_clag).abs() < 1e-12);
        // E(t0) enters C_bnd with slope 2
        let mut faster = SystemState::initial(&params);
        faster.x_dot = vec![3.0, -1.0];
        let c2 = constants(&p, &params, &faster, &s).unwrap();
        assert!(c2.energy_t0 > c.energy_t0);
        assert!(c2.c_bnd > c.c_bnd);
    }

    #[test]
    fn quadrature_selftest_cases() {
        // h ≡ 0: both sides vanish
        let rep = quadrature_selftest(2.0, 1.0, 10.0, &vec![0.0; 51]).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert_eq!(rep.rhs, 0.0);

        // h ≡ 1, δ = 1, r = 10, α = 2: closed forms
        // inner ∫₁ᵗ s ds = (t²−1)/2, LHS = ½(t + 1/t)|₁¹⁰ = 4.05, RHS = 9
        let rep = quadrature_selftest(2.0, 1.0, 10.0, &vec![1.0; 20001]).unwrap();
        assert!((rep.lhs - 4.05).abs() < 1e-6, "lhs {}", rep.lhs);
        assert!((rep.rhs - 9.0).abs() < 1e-12);
        assert!(rep.margin > 0.0);

        // equality in the limit: h = 1/t², gap under 1% at r = 1000
        let n = 400_001;
        let h: Vec<f64> = (0..n)
            .map(|i| {
                let t = 1.0 + 999.0 * i as f64 / (n - 1) as f64;
                t.powi(-2)
            })
            .collect();
        let rep = quadrature_selftest(2.0, 1.0, 1000.0, &h).unwrap();
        assert!(rep.margin >= 0.0);
        assert!(rep.margin / rep.rhs < 0.01, "gap {}", rep.margin / rep.rhs);

        assert!(quadrature_selftest(1.0, 1.0, 10.0, &[1.0; 10]).is_err());
        assert!(quadrature_selftest(2.0, 0.0, 10.0, &[1.0; 10]).is_err());
        assert!(quadrature_selftest(2.0, 1.0, 10.0, &[-1.0; 10]).is_err());
    }

    #[test]
    fn kkt_residuals_at_saddle_and_triangle_inequality() {
        let (p, params, s) = qp2_setup();
        let at = SystemState {
            t: 1.0,
            x: s.x_star.clone(),
            lambda: s.lambda_star.clone(),
            x_dot: vec![0.0; 2],
            lambda_dot: vec![0.0],
        };
        let r = kkt_residuals(&p, &at, &s);
        assert!(r.stationarity < 1e-12);
        assert!(r.feasibility < 1e-12);
        assert!(r.gradient_gap < 1e-12);
        assert!(r.adjoint_gap < 1e-12);

        let schedule = SampleSchedule::new(1.0, 1e3, 40, Spacing::Log).unwrap();
        let traj = integrate(&p, &params, &schedule).unwrap();
        for st in &traj.samples {
            let r = kkt_residuals(&p, st, &s);
            assert!(r.stationarity <= r.gradient_gap + r.adjoint_gap + 1e-12);
        }
    }

    #[test]
    fn report_constant_saddle_trajectory_all_pass() {
        let (p, mut params, s) = qp2_setup();
        params.x0 = s.x_star.clone();
        params.lambda0 = s.lambda_star.clone();
        let schedule = SampleSchedule::new(1.0, 1e3, 60, Spacing::Log).unwrap();
        let traj = integrate(&p, &params, &schedule).unwrap();
        let report =
            lyapunov_report(&p, &params, &traj, &s, ValidationMode::Strict).unwrap();
        assert!(report.all_passed(), "{}", report.to_text());
    }

    #[test]
    fn report_qp2_run_all_pass_and_standard_mode_skips() {
        let (p, params, s) = qp2_setup();
        let schedule = SampleSchedule::new(1.0, 1e3, 120, Spacing::Log).unwrap();
        let traj = integrate(&p, &params, &schedule).unwrap();
        let report =
            lyapunov_report(&p, &params, &traj, &s, ValidationMode::Strict).unwrap();
        assert!(report.all_passed(), "{}", report.to_text());

        let std_report =
            lyapunov_report(&p, &params, &traj, &s, ValidationMode::Standard).unwrap();
        assert_eq!(
            std_report.record("velocity_bound").unwrap().status,
            CheckStatus::Skipped
        );
        assert_eq!(
            std_report.record("descent_inequality").unwrap().status,
            CheckStatus::Skipped
        );
        assert!(std_report.all_passed());
    }

    #[test]
    fn report_detects_corrupted_velocity() {
        let (p, params, s) = qp2_setup();
        let schedule = SampleSchedule::new(1.0, 1e3, 120, Spacing::Log).unwrap();
        let mut traj = integrate(&p, &params, &schedule).unwrap();
        // blow one interior sample's velocity past the explicit bound
        let k = 60;
        let consts = constants(&p, &params, &traj.samples[0], &s).unwrap();
        let st = &traj.samples[k];
        let vel = crate::linalg::pair_norm(&st.x_dot, &st.lambda_dot);
        let factor = 2.0 * consts.velocity_bound.unwrap() / (st.t * vel);
        assert!(factor > 1.0, "sample already violates the bound?");
        for v in traj.samples[k].x_dot.iter_mut() {
            *v *= factor;
        }
        for v in traj.samples[k].lambda_dot.iter_mut() {
            *v *= factor;
        }
        let report = lyapunov_report(&p, &params, &traj, &s, ValidationMode::Strict).unwrap();
        assert!(!report.all_passed());
        let failing: Vec<&str> = report
            .records
            .iter()
            .filter(|r| r.status == CheckStatus::Fail)
            .map(|r| r.id)
            .collect();
        assert!(failing.contains(&"velocity_bound"), "failing: {failing:?}");
        assert_eq!(
            report.record("velocity_bound").unwrap().worst_index,
            Some(k)
        );
    }

    #[test]
    fn integrals_zero_on_constant_trajectory_and_bounded_on_qp2() {
        let (p, mut params, s) = qp2_setup();
        params.x0 = s.x_star.clone();
        params.lambda0 = s.lambda_star.clone();
        let schedule = SampleSchedule::new(1.0, 1e3, 60, Spacing::Log).unwrap();
        let traj = integrate(&p, &params, &schedule).unwrap();
        let rep = cumulative_integrals(&p, &params, &traj, &s).unwrap();
        for e in &rep.entries {
            // zero up to accumulated integrator noise
            assert!(e.total.abs() < 1e-6, "{}: {}", e.id, e.total);
            assert_eq!(e.tail_fraction, 0.0, "{}: {}", e.id, e.total);
        }
        assert!(rep.all_finite());
        assert!(rep.bounds_satisfied());

        let (p, params, s) = qp2_setup();
        let mut params = params;
        params.t_end = 1e4;
        let schedule = SampleSchedule::new(1.0, 1e4, 200, Spacing::Log).unwrap();
        let traj = integrate(&p, &params, &schedule).unwrap();
        let rep = cumulative_integrals(&p, &params, &traj, &s).unwrap();
        assert!(rep.all_finite(), "{:?}", rep.entries);
        assert!(rep.bounds_satisfied(), "{:?}", rep.entries);
        // the β-scaled feasibility integral respects its explicit limit
        let feas = rep.entry("feasibility_sq").unwrap();
        let b = feas.bound.unwrap();
        assert!(b.scaled_value <= b.limit * (1.0 + 1e-6));

        assert!(matches!(
            cumulative_integrals(
                &p,
                &params,
                &Trajectory {
                    samples: traj.samples[..2].to_vec(),
                    accelerations: traj.accelerations[..2].to_vec(),
                    stats: traj.stats
                },
                &s
            ),
            Err(Error::TooFewSamples { .. })
        ));
    }
}
