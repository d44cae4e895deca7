//! The damped inertial primal-dual vector field and its parameter theory.
//!
//! In first-order form the system evolves the phase point
//! `(x, λ, y, ν) = (x, λ, ẋ, λ̇)`:
//!
//! ```text
//! ẋ = y
//! λ̇ = ν
//! ẏ = −(α/t)·y − ∇f(x) − A*(λ + θt·ν) − βA*(Ax − b)
//! ν̇ = −(α/t)·ν + (A(x + θt·y) − b)
//! ```
//!
//! Two parameter regimes matter:
//!
//! * **standard** — `α ≥ 3`, `β ≥ 0`, `1/2 ≥ θ ≥ 1/(α−1)`: energy decrease
//!   and the `O(1/t²)` rate bounds hold;
//! * **strict** — `α > 3`, `β ≥ 0`, `1/2 > θ > 1/(α−1)`: additionally the
//!   trajectory is bounded, its velocity is `O(1/t)` and it converges to a
//!   primal-dual optimal solution.
//!
//! The derived quantities `ξ = θα − θ − 1` and `σ = (1 − 2θ)/θ` are
//! nonnegative in the standard regime; `ξ > 0` in the strict one.

use crate::linalg;
use crate::problem::{grad_lambda_aug, grad_x_aug, ProblemInstance};
use crate::{Error, Result};

/// Which parameter regime a run claims (or satisfies).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValidationMode {
    Standard,
    Strict,
}

impl std::fmt::Display for ValidationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ValidationMode::Standard => write!(f, "standard"),
            ValidationMode::Strict => write!(f, "strict"),
        }
    }
}

/// Derived parameters `ξ = θα − θ − 1` and `σ = (1 − 2θ)/θ`.
#[derive(Clone, Copy, Debug)]
pub struct DerivedXi {
    pub xi: f64,
    pub sigma: f64,
}

/// Full parameterization of one run: damping `α`, penalty `β`, extrapolation
/// coefficient `θ`, time window `[t0, t_end]`, initial conditions, integrator
/// tolerances and the default sample count.
#[derive(Clone, Debug)]
pub struct SolverParams {
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    pub t0: f64,
    pub t_end: f64,
    pub x0: Vec<f64>,
    pub lambda0: Vec<f64>,
    pub x_dot0: Vec<f64>,
    pub lambda_dot0: Vec<f64>,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub samples: usize,
}

impl SolverParams {
    /// Zero initial velocities, default tolerances `1e-10` and 200 samples.
    pub fn new(
        alpha: f64,
        beta: f64,
        theta: f64,
        t0: f64,
        t_end: f64,
        x0: Vec<f64>,
        lambda0: Vec<f64>,
    ) -> Self {
        let n = x0.len();
        let m = lambda0.len();
        Self {
            alpha,
            beta,
            theta,
            t0,
            t_end,
            x0,
            lambda0,
            x_dot0: vec![0.0; n],
            lambda_dot0: vec![0.0; m],
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            samples: 200,
        }
    }

    pub fn validate(&self, mode: ValidationMode) -> Result<DerivedXi> {
        validate_params(self, mode)
    }

    /// The strongest regime these parameters satisfy, if any.
    pub fn strictest_mode(&self) -> Option<ValidationMode> {
        if self.validate(ValidationMode::Strict).is_ok() {
            Some(ValidationMode::Strict)
        } else if self.validate(ValidationMode::Standard).is_ok() {
            Some(ValidationMode::Standard)
        } else {
            None
        }
    }

    pub fn derived(&self) -> DerivedXi {
        DerivedXi {
            xi: self.theta * self.alpha - self.theta - 1.0,
            sigma: (1.0 - 2.0 * self.theta) / self.theta,
        }
    }
}

/// Phase point of the first-order reformulation at time `t`.
#[derive(Clone, Debug)]
pub struct SystemState {
    pub t: f64,
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
    pub x_dot: Vec<f64>,
    pub lambda_dot: Vec<f64>,
}

impl SystemState {
    pub fn initial(params: &SolverParams) -> Self {
        Self {
            t: params.t0,
            x: params.x0.clone(),
            lambda: params.lambda0.clone(),
            x_dot: params.x_dot0.clone(),
            lambda_dot: params.lambda_dot0.clone(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.x.iter().all(|v| v.is_finite())
            && self.lambda.iter().all(|v| v.is_finite())
            && self.x_dot.iter().all(|v| v.is_finite())
            && self.lambda_dot.iter().all(|v| v.is_finite())
    }
}

/// Time derivative of the phase point.
#[derive(Clone, Debug)]
pub struct StateDerivative {
    pub x_dot: Vec<f64>,
    pub lambda_dot: Vec<f64>,
    pub x_ddot: Vec<f64>,
    pub lambda_ddot: Vec<f64>,
}

/// Validates `(α, β, θ, t0, …)` against the requested regime, returning the
/// derived `(ξ, σ)` on success. Every rejection names the violated bound.
pub fn validate_params(params: &SolverParams, mode: ValidationMode) -> Result<DerivedXi> {
    let SolverParams {
        alpha,
        beta,
        theta,
        t0,
        t_end,
        ..
    } = *params;
    if !(t0 > 0.0) {
        return Err(Error::InvalidParameter {
            name: "t0",
            message: format!("must be > 0, got {t0}"),
        });
    }
    if !(t_end > t0) {
        return Err(Error::InvalidParameter {
            name: "t_end",
            message: format!("must exceed t0 = {t0}, got {t_end}"),
        });
    }
    if !(params.abs_tol > 0.0) || !(params.rel_tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tolerances",
            message: "abs_tol and rel_tol must be > 0".into(),
        });
    }
    if params.x0.len() != params.x_dot0.len() || params.lambda0.len() != params.lambda_dot0.len() {
        return Err(Error::InvalidParameter {
            name: "initial conditions",
            message: "position and velocity dimensions differ".into(),
        });
    }
    if !(beta >= 0.0) {
        return Err(Error::AssumptionViolated(format!("beta >= 0 violated: beta = {beta}")));
    }
    match mode {
        ValidationMode::Standard => {
            if !(alpha >= 3.0) {
                return Err(Error::AssumptionViolated(format!(
                    "alpha >= 3 violated: alpha = {alpha}"
                )));
            }
            if !(theta <= 0.5) {
                return Err(Error::AssumptionViolated(format!(
                    "theta <= 1/2 violated: theta = {theta}"
                )));
            }
            if !(theta >= 1.0 / (alpha - 1.0)) {
                return Err(Error::AssumptionViolated(format!(
                    "theta >= 1/(alpha-1) violated: theta = {theta}, 1/(alpha-1) = {}",
                    1.0 / (alpha - 1.0)
                )));
            }
        }
        ValidationMode::Strict => {
            if !(alpha > 3.0) {
                return Err(Error::AssumptionViolated(format!(
                    "alpha > 3 violated: alpha = {alpha}"
                )));
            }
            if !(theta < 0.5) {
                return Err(Error::AssumptionViolated(format!(
                    "theta < 1/2 violated: theta = {theta}"
                )));
            }
            if !(theta > 1.0 / (alpha - 1.0)) {
                return Err(Error::AssumptionViolated(format!(
                    "theta > 1/(alpha-1) violated: theta = {theta}, 1/(alpha-1) = {}",
                    1.0 / (alpha - 1.0)
                )));
            }
        }
    }
    Ok(params.derived())
}

fn check_dims(p: &ProblemInstance, state: &SystemState) -> Result<()> {
    let n = p.dim_primal();
    let m = p.dim_dual();
    for (len, ctx) in [
        (state.x.len(), "vector_field: x"),
        (state.x_dot.len(), "vector_field: x_dot"),
    ] {
        if len != n {
            return Err(Error::DimensionMismatch {
                context: ctx,
                expected: n,
                actual: len,
            });
        }
    }
    for (len, ctx) in [
        (state.lambda.len(), "vector_field: lambda"),
        (state.lambda_dot.len(), "vector_field: lambda_dot"),
    ] {
        if len != m {
            return Err(Error::DimensionMismatch {
                context: ctx,
                expected: m,
                actual: len,
            });
        }
    }
    Ok(())
}

/// Evaluates the first-order vector field at a phase point. Pure and
/// deterministic: identical inputs give bit-identical outputs.
pub fn vector_field(
    p: &ProblemInstance,
    params: &SolverParams,
    state: &SystemState,
) -> Result<StateDerivative> {
    if !(state.t > 0.0) {
        return Err(Error::InvalidDomain(format!(
            "vector field undefined for t <= 0 (t = {})",
            state.t
        )));
    }
    check_dims(p, state)?;
    let t = state.t;
    let damping = params.alpha / t;
    let ext = params.theta * t;

    // λ + θt·ν
    let mut lam_ext = state.lambda.clone();
    linalg::axpy(&mut lam_ext, ext, &state.lambda_dot);
    // ẏ = −(α/t)y − ∇ₓL_β(x, λ + θt·ν)
    let mut x_ddot = grad_x_aug(p, &state.x, &lam_ext, params.beta)?;
    for (a, y) in x_ddot.iter_mut().zip(&state.x_dot) {
        *a = -*a - damping * y;
    }

    // x + θt·y
    let mut x_ext = state.x.clone();
    linalg::axpy(&mut x_ext, ext, &state.x_dot);
    // ν̇ = −(α/t)ν + (A(x + θt·y) − b)
    let mut lambda_ddot = grad_lambda_aug(p, &x_ext)?;
    for (a, v) in lambda_ddot.iter_mut().zip(&state.lambda_dot) {
        *a -= damping * v;
    }

    Ok(StateDerivative {
        x_dot: state.x_dot.clone(),
        lambda_dot: state.lambda_dot.clone(),
        x_ddot,
        lambda_ddot,
    })
}

/// Second derivatives `(ẍ, λ̈)` at a phase point (the acceleration components
/// of [`vector_field`]); used by diagnostics for `φ̈` and the differential
/// inequality checks.
pub fn second_derivatives(
    p: &ProblemInstance,
    params: &SolverParams,
    state: &SystemState,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = vector_field(p, params, state)?;
    Ok((d.x_ddot, d.lambda_ddot))
}

/// Lipschitz constant of the vector field over the box
/// `[t1, t2] × B(0; δ)⁴` (each phase block in the ball of radius `δ`):
///
/// ```text
/// L_F = sqrt( 2(1 + α/t1 + θ·t2·‖A‖)²
///           + (β‖A‖² + ‖A‖ + ℓ)²
///           + ‖A‖²
///           + 4δ²(α/t1² + θ‖A‖)² )
/// ```
///
/// Nondecreasing in both `δ` and `t2`.
pub fn lipschitz_bound(
    p: &ProblemInstance,
    params: &SolverParams,
    t1: f64,
    t2: f64,
    delta: f64,
) -> Result<f64> {
    if !(t1 > 0.0) || !(t2 >= t1) {
        return Err(Error::InvalidDomain(format!(
            "need 0 < t1 <= t2, got t1 = {t1}, t2 = {t2}"
        )));
    }
    if delta < 0.0 {
        return Err(Error::InvalidParameter {
            name: "delta",
            message: format!("must be >= 0, got {delta}"),
        });
    }
    let a_norm = p.constraint().operator_norm();
    let ell = p.objective().lipschitz();
    let alpha = params.alpha;
    let theta = params.theta;
    let beta = params.beta;
    let c1 = 1.0 + alpha / t1 + theta * t2 * a_norm;
    let c2 = beta * a_norm * a_norm + a_norm + ell;
    let c3 = alpha / (t1 * t1) + theta * a_norm;
    Ok((2.0 * c1 * c1 + c2 * c2 + a_norm * a_norm + 4.0 * delta * delta * c3 * c3).sqrt())
}

/// Closed-form dual trajectory of the unconstrained reduction (`A = 0`,
/// `b = 0`), where the dual equation decouples into
/// `λ̈ + (α/t)λ̇ = 0`:
///
/// ```text
/// λ(t) = λ₀ + (λ̇₀·t₀/(1 − α))·((t/t₀)^{1−α} − 1)
/// ```
///
/// Requires `α > 1`. Evaluates to `λ₀` exactly at `t = t₀`.
pub fn nesterov_lambda_closed_form(params: &SolverParams, t: f64) -> Result<Vec<f64>> {
    let alpha = params.alpha;
    if (alpha - 1.0).abs() < 1e-14 {
        return Err(Error::InvalidParameter {
            name: "alpha",
            message: "closed form undefined at alpha = 1".into(),
        });
    }
    if !(t > 0.0) {
        return Err(Error::InvalidDomain(format!("t must be > 0, got {t}")));
    }
    let scale = (t / params.t0).powf(1.0 - alpha) - 1.0;
    let coef = params.t0 / (1.0 - alpha) * scale;
    Ok(params
        .lambda0
        .iter()
        .zip(&params.lambda_dot0)
        .map(|(l0, ld0)| l0 + coef * ld0)
        .collect())
}

pub(crate) fn pack_state(state: &SystemState, out: &mut [f64]) {
    let n = state.x.len();
    let m = state.lambda.len();
    out[..n].copy_from_slice(&state.x);
    out[n..n + m].copy_from_slice(&state.lambda);
    out[n + m..2 * n + m].copy_from_slice(&state.x_dot);
    out[2 * n + m..].copy_from_slice(&state.lambda_dot);
}

pub(crate) fn unpack_state(t: f64, y: &[f64], n: usize, m: usize) -> SystemState {
    SystemState {
        t,
        x: y[..n].to_vec(),
        lambda: y[n..n + m].to_vec(),
        x_dot: y[n + m..2 * n + m].to_vec(),
        lambda_dot: y[2 * n + m..].to_vec(),
    }
}

/// Reusable scratch buffers for the flat right-hand side (the integrator's
/// inner loop must not allocate).
pub(crate) struct RhsWorkspace {
    lam_ext: Vec<f64>,
    grad: Vec<f64>,
    residual: Vec<f64>,
    a_xdot: Vec<f64>,
}

impl RhsWorkspace {
    pub(crate) fn new(n: usize, m: usize) -> Self {
        Self {
            lam_ext: vec![0.0; m],
            grad: vec![0.0; n],
            residual: vec![0.0; m],
            a_xdot: vec![0.0; m],
        }
    }
}

/// Flat right-hand side over the packed layout `[x; λ; y; ν]`.
pub(crate) fn rhs_packed(
    p: &ProblemInstance,
    params: &SolverParams,
    t: f64,
    y: &[f64],
    out: &mut [f64],
    ws: &mut RhsWorkspace,
) {
    let n = p.dim_primal();
    let m = p.dim_dual();
    debug_assert_eq!(y.len(), 2 * (n + m));
    let (x, rest) = y.split_at(n);
    let (lam, rest) = rest.split_at(m);
    let (xd, ld) = rest.split_at(n);
    let damping = params.alpha / t;
    let ext = params.theta * t;

    out[..n].copy_from_slice(xd);
    out[n..n + m].copy_from_slice(ld);

    // gradient block: ∇f(x) + A*(λ + θt·ν) + βA*(Ax − b)
    ws.lam_ext.copy_from_slice(lam);
    linalg::axpy(&mut ws.lam_ext, ext, ld);
    p.objective().gradient_into(x, &mut ws.grad);
    p.constraint().adjoint_apply_acc(&ws.lam_ext, 1.0, &mut ws.grad);
    p.constraint().apply_into(x, &mut ws.residual);
    for (ri, bi) in ws.residual.iter_mut().zip(p.rhs()) {
        *ri -= bi;
    }
    if params.beta != 0.0 {
        p.constraint()
            .adjoint_apply_acc(&ws.residual, params.beta, &mut ws.grad);
    }
    for i in 0..n {
        out[n + m + i] = -damping * xd[i] - ws.grad[i];
    }

    // dual block: A(x + θt·y) − b = (Ax − b) + θt·A·y
    p.constraint().apply_into(xd, &mut ws.a_xdot);
    for i in 0..m {
        out[n + m + n + i] = -damping * ld[i] + ws.residual[i] + ext * ws.a_xdot[i];
    }
}
