//! Reference saddle points.
//!
//! A pair `(x*, λ*)` is a primal-dual optimal solution exactly when
//!
//! ```text
//! ∇f(x*) + A*λ* = 0   and   Ax* − b = 0.
//! ```
//!
//! For quadratic objectives this is one symmetric linear system; for general
//! smooth objectives a damped Newton iteration drives the residual map to
//! zero. Either way the result is checked by direct residual evaluation,
//! which is independent of the solve path.

use crate::linalg::{self, DMat};
use crate::problem::ProblemInstance;
use crate::{Error, Result};

/// A reference primal-dual solution together with its verified KKT residual
/// `‖∇f(x*) + A*λ*‖ + ‖Ax* − b‖`.
#[derive(Clone, Debug)]
pub struct SaddlePoint {
    pub x_star: Vec<f64>,
    pub lambda_star: Vec<f64>,
    pub f_star: f64,
    pub residual: f64,
}

impl SaddlePoint {
    /// Builds a saddle point from explicit primal/dual vectors, recomputing
    /// `f*` and the residual from the problem data.
    pub fn from_parts(p: &ProblemInstance, x_star: Vec<f64>, lambda_star: Vec<f64>) -> Self {
        let residual = kkt_residual(p, &x_star, &lambda_star);
        let f_star = p.objective().value(&x_star);
        Self {
            x_star,
            lambda_star,
            f_star,
            residual,
        }
    }
}

/// KKT residual `‖∇f(x) + A*λ‖ + ‖Ax − b‖` at an arbitrary point.
pub fn kkt_residual(p: &ProblemInstance, x: &[f64], lambda: &[f64]) -> f64 {
    let mut g = p.objective().gradient(x);
    linalg::axpy(&mut g, 1.0, &p.constraint().adjoint_apply(lambda));
    linalg::norm(&g) + linalg::norm(&p.constraint_residual(x))
}

fn assemble_kkt(q: &DMat, a: &DMat) -> DMat {
    let n = q.rows();
    let m = a.rows();
    let mut k = DMat::zeros(n + m, n + m);
    for i in 0..n {
        for j in 0..n {
            k.set(i, j, q.get(i, j));
        }
    }
    for i in 0..m {
        for j in 0..n {
            k.set(n + i, j, a.get(i, j));
            k.set(j, n + i, a.get(i, j));
        }
    }
    k
}

/// Direct solve of the stacked KKT system
///
/// ```text
/// [ Q  A* ] [x*]   [−q]
/// [ A  0  ] [λ*] = [ b]
/// ```
///
/// for instances with a quadratic objective. Singular but consistent systems
/// (degenerate constraints, rank-deficient `Q` on the feasible set) return
/// the minimum-norm least-squares solution; inconsistent systems are
/// reported as having no saddle point.
pub fn solve_kkt_qp(p: &ProblemInstance) -> Result<SaddlePoint> {
    let quad = p.objective().as_quadratic().ok_or_else(|| {
        Error::InvalidDomain("solve_kkt_qp requires a quadratic objective".into())
    })?;
    let n = p.dim_primal();
    let m = p.dim_dual();
    let k = assemble_kkt(quad.matrix(), p.constraint().matrix());
    let mut rhs = Vec::with_capacity(n + m);
    rhs.extend(quad.linear().iter().map(|v| -v));
    rhs.extend_from_slice(p.rhs());

    let solve = linalg::solve_sym_least_squares(&k, &rhs, 1e-10)?;
    let scale = 1.0 + linalg::norm(&rhs) + k.max_abs() * linalg::norm(&solve.solution);
    if solve.residual > 1e-9 * scale {
        return Err(Error::NoSaddlePoint(format!(
            "KKT system is inconsistent (least-squares residual {:.3e})",
            solve.residual
        )));
    }
    let x_star = solve.solution[..n].to_vec();
    let lambda_star = solve.solution[n..].to_vec();
    Ok(SaddlePoint::from_parts(p, x_star, lambda_star))
}

/// Damped Newton iteration on the KKT residual map
/// `R(x, λ) = (∇f(x) + A*λ, Ax − b)` with backtracking on `‖R‖`.
/// Returns as soon as the summed residual drops below `tol`; fails after
/// 200 iterations. The Hessian comes from the registered oracle when one
/// exists, otherwise from central finite differences (so `tol` below 1e-8
/// is not meaningful for oracle-free objectives).
pub fn solve_kkt_newton(
    p: &ProblemInstance,
    x0: &[f64],
    lambda0: &[f64],
    tol: f64,
) -> Result<SaddlePoint> {
    solve_kkt_newton_detailed(p, x0, lambda0, tol).map(|(s, _)| s)
}

/// As [`solve_kkt_newton`], additionally reporting the iteration count.
pub fn solve_kkt_newton_detailed(
    p: &ProblemInstance,
    x0: &[f64],
    lambda0: &[f64],
    tol: f64,
) -> Result<(SaddlePoint, usize)> {
    if tol <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "tol",
            message: format!("must be > 0, got {tol}"),
        });
    }
    let n = p.dim_primal();
    let m = p.dim_dual();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            context: "solve_kkt_newton: x0",
            expected: n,
            actual: x0.len(),
        });
    }
    if lambda0.len() != m {
        return Err(Error::DimensionMismatch {
            context: "solve_kkt_newton: lambda0",
            expected: m,
            actual: lambda0.len(),
        });
    }

    let residual_vec = |x: &[f64], lam: &[f64]| -> Vec<f64> {
        let mut g = p.objective().gradient(x);
        linalg::axpy(&mut g, 1.0, &p.constraint().adjoint_apply(lam));
        let mut r = g;
        r.extend(p.constraint_residual(x));
        r
    };
    // split norm: ‖stationarity‖ + ‖feasibility‖, matching `kkt_residual`
    let split_norm =
        |r: &[f64]| -> f64 { linalg::norm(&r[..n]) + linalg::norm(&r[n..]) };

    let mut x = x0.to_vec();
    let mut lam = lambda0.to_vec();
    let mut r = residual_vec(&x, &lam);
    let mut rnorm = split_norm(&r);

    for iter in 0..200 {
        if rnorm <= tol {
            return Ok((SaddlePoint::from_parts(p, x, lam), iter));
        }
        let h = p.objective().hessian(&x);
        let j = assemble_kkt(&h, p.constraint().matrix());
        let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
        let step = linalg::solve_sym_least_squares(&j, &neg_r, 1e-10)?.solution;

        // backtracking on the residual norm
        let mut s = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let xt: Vec<f64> = x.iter().zip(&step[..n]).map(|(a, d)| a + s * d).collect();
            let lt: Vec<f64> = lam.iter().zip(&step[n..]).map(|(a, d)| a + s * d).collect();
            let rt = residual_vec(&xt, &lt);
            let rtn = split_norm(&rt);
            if rtn <= (1.0 - 1e-4 * s) * rnorm {
                x = xt;
                lam = lt;
                r = rt;
                rnorm = rtn;
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if !accepted {
            return Err(Error::OracleFailed {
                residual: rnorm,
                iterations: iter,
            });
        }
    }
    if rnorm <= tol {
        return Ok((SaddlePoint::from_parts(p, x, lam), 200));
    }
    Err(Error::OracleFailed {
        residual: rnorm,
        iterations: 200,
    })
}

/// Report of the solution-set structure check: along the set of primal-dual
/// optimal solutions, `∇f(x*)` and `A*λ*` are constant even when the
/// multiplier itself is not unique.
#[derive(Clone, Debug)]
pub struct ConsistencyReport {
    /// Recomputed residuals of the two inputs and whether each is ≤ `tol`.
    pub residuals: (f64, f64),
    pub inputs_ok: (bool, bool),
    /// `‖∇f(x₁*) − ∇f(x₂*)‖`
    pub grad_diff: f64,
    /// `‖A*λ₁* − A*λ₂*‖`
    pub adjoint_diff: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Checks that two saddle points agree on `∇f(x*)` and `A*λ*` to within
/// `10·tol`. Inputs whose recomputed residual exceeds `tol` are rejected
/// first (reported, not raised).
pub fn check_solution_set_consistency(
    p: &ProblemInstance,
    s1: &SaddlePoint,
    s2: &SaddlePoint,
    tol: f64,
) -> ConsistencyReport {
    let r1 = kkt_residual(p, &s1.x_star, &s1.lambda_star);
    let r2 = kkt_residual(p, &s2.x_star, &s2.lambda_star);
    let ok1 = r1 <= tol;
    let ok2 = r2 <= tol;
    let grad_diff = linalg::norm(&linalg::sub(
        &p.objective().gradient(&s1.x_star),
        &p.objective().gradient(&s2.x_star),
    ));
    let adjoint_diff = linalg::norm(&linalg::sub(
        &p.constraint().adjoint_apply(&s1.lambda_star),
        &p.constraint().adjoint_apply(&s2.lambda_star),
    ));
    let passed = ok1 && ok2 && grad_diff <= 10.0 * tol && adjoint_diff <= 10.0 * tol;
    ConsistencyReport {
        residuals: (r1, r2),
        inputs_ok: (ok1, ok2),
        grad_diff,
        adjoint_diff,
        tol,
        passed,
    }
}
