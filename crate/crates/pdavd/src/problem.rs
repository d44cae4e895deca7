//! Constrained problem instances and their (augmented) Lagrangian calculus.
//!
//! A [`ProblemInstance`] bundles a smooth convex objective `f` (value and
//! gradient oracles plus a declared Lipschitz constant `ℓ` of `∇f`), a dense
//! linear constraint operator `A` and a right-hand side `b`, optionally with
//! a multi-block decomposition. All evaluation functions are pure; instances
//! are immutable after construction and safe to share across threads.
//!
//! The Lagrangian and augmented Lagrangian are
//!
//! ```text
//! Λ(x, λ)     = f(x) + ⟨λ, Ax − b⟩
//! L_β(x, λ)   = Λ(x, λ) + (β/2)‖Ax − b‖²
//! ```
//!
//! with partial gradients `∇ₓL_β = ∇f(x) + A*λ + βA*(Ax − b)` and
//! `∇_λL_β = Ax − b`.

use std::fmt;
use std::sync::Arc;

use crate::linalg::{self, DMat};
use crate::{Error, Result};

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type HessFn = dyn Fn(&[f64]) -> DMat + Send + Sync;

/// Dense linear operator with a cached upper bound on its operator norm.
///
/// `apply` maps `ℝⁿ → ℝᵐ`; `adjoint_apply` maps `ℝᵐ → ℝⁿ` and satisfies
/// `⟨Ax, y⟩ = ⟨x, A*y⟩`.
#[derive(Clone, Debug)]
pub struct LinearMap {
    mat: DMat,
    norm: f64,
}

impl LinearMap {
    pub fn new(mat: DMat) -> Self {
        let norm = linalg::operator_norm(&mat);
        Self { mat, norm }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Ok(Self::new(DMat::from_rows(rows)?))
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Ok(Self::new(DMat::from_row_major(rows, cols, data)?))
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Self {
            mat: DMat::zeros(rows, cols),
            norm: 0.0,
        }
    }

    pub fn rows(&self) -> usize {
        self.mat.rows()
    }

    pub fn cols(&self) -> usize {
        self.mat.cols()
    }

    /// `A·x`
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.mat.matvec(x)
    }

    /// `out = A·x`
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        self.mat.matvec_into(x, out);
    }

    /// `A*·y`
    pub fn adjoint_apply(&self, y: &[f64]) -> Vec<f64> {
        self.mat.tr_matvec(y)
    }

    /// `out += c·A*·y`
    pub fn adjoint_apply_acc(&self, y: &[f64], c: f64, out: &mut [f64]) {
        self.mat.tr_matvec_acc(y, c, out);
    }

    /// Cached upper bound on the largest singular value, computed by power
    /// iteration at construction (200 iterations, tolerance 1e-10).
    pub fn operator_norm(&self) -> f64 {
        self.norm
    }

    pub fn matrix(&self) -> &DMat {
        &self.mat
    }
}

/// Symmetric positive-semidefinite quadratic `f(x) = ½⟨x, Qx⟩ + ⟨q, x⟩`.
#[derive(Clone, Debug)]
pub struct QuadraticObjective {
    matrix: DMat,
    linear: Vec<f64>,
    lipschitz: f64,
}

impl QuadraticObjective {
    /// Validates symmetry (1e-12 relative), positive semidefiniteness
    /// (smallest eigenvalue ≥ −1e-10) and sets `ℓ` to the largest eigenvalue.
    pub fn new(matrix: DMat, linear: Vec<f64>) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::DimensionMismatch {
                context: "QuadraticObjective: Q must be square",
                expected: matrix.rows(),
                actual: matrix.cols(),
            });
        }
        if linear.len() != matrix.rows() {
            return Err(Error::DimensionMismatch {
                context: "QuadraticObjective: dim(q) must match Q",
                expected: matrix.rows(),
                actual: linear.len(),
            });
        }
        if !matrix.is_symmetric(1e-12) {
            return Err(Error::InvalidDomain(
                "quadratic objective matrix is not symmetric to 1e-12".into(),
            ));
        }
        let lipschitz = if matrix.rows() == 0 {
            0.0
        } else {
            let eig = linalg::sym_eigen(&matrix)?;
            let min = eig.values.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = eig.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if min < -1e-10 * (1.0 + matrix.max_abs()) {
                return Err(Error::InvalidDomain(format!(
                    "quadratic objective matrix is not positive semidefinite: smallest eigenvalue {min:.3e}"
                )));
            }
            max.max(0.0)
        };
        Ok(Self {
            matrix,
            linear,
            lipschitz,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &DMat {
        &self.matrix
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        0.5 * linalg::dot(x, &self.matrix.matvec(x)) + linalg::dot(&self.linear, x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.matrix.matvec(x);
        linalg::axpy(&mut g, 1.0, &self.linear);
        g
    }
}

/// Smooth convex objective given by value/gradient oracles plus a declared
/// Lipschitz constant of the gradient. The constant is part of the problem
/// data; it is never estimated.
#[derive(Clone)]
pub struct SmoothObjective {
    dim: usize,
    lipschitz: f64,
    value: Arc<ValueFn>,
    gradient: Arc<GradFn>,
    hessian: Option<Arc<HessFn>>,
    quadratic: Option<Arc<QuadraticObjective>>,
}

impl fmt::Debug for SmoothObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothObjective")
            .field("dim", &self.dim)
            .field("lipschitz", &self.lipschitz)
            .field("quadratic", &self.quadratic.is_some())
            .finish()
    }
}

impl SmoothObjective {
    /// The zero objective `f ≡ 0` (ℓ = 0).
    pub fn zero(dim: usize) -> Self {
        Self::custom(dim, 0.0, |_| 0.0, move |x| vec![0.0; x.len()])
    }

    pub fn quadratic(q: QuadraticObjective) -> Self {
        let q = Arc::new(q);
        let dim = q.dim();
        let lipschitz = q.lipschitz;
        let qv = Arc::clone(&q);
        let qg = Arc::clone(&q);
        let qh = Arc::clone(&q);
        Self {
            dim,
            lipschitz,
            value: Arc::new(move |x| qv.value(x)),
            gradient: Arc::new(move |x| qg.gradient(x)),
            hessian: Some(Arc::new(move |_| qh.matrix().clone())),
            quadratic: Some(q),
        }
    }

    /// Softplus sum `f(x) = Σᵢ log(1 + exp(⟨aᵢ, x⟩ − cᵢ))` over the rows `aᵢ`
    /// of `data`; convex and smooth with `ℓ = ¼·‖data‖²`.
    pub fn logistic_smooth(data: DMat, offsets: Vec<f64>) -> Result<Self> {
        if offsets.len() != data.rows() {
            return Err(Error::DimensionMismatch {
                context: "logistic_smooth: offsets must match data rows",
                expected: data.rows(),
                actual: offsets.len(),
            });
        }
        let dim = data.cols();
        let nrm = linalg::operator_norm(&data);
        let lipschitz = 0.25 * nrm * nrm;
        let data = Arc::new(data);
        let offsets = Arc::new(offsets);

        fn softplus(z: f64) -> f64 {
            if z > 30.0 {
                z
            } else if z < -30.0 {
                z.exp()
            } else {
                z.exp().ln_1p()
            }
        }
        fn sigmoid(z: f64) -> f64 {
            if z >= 0.0 {
                1.0 / (1.0 + (-z).exp())
            } else {
                let e = z.exp();
                e / (1.0 + e)
            }
        }

        let dv = Arc::clone(&data);
        let ov = Arc::clone(&offsets);
        let value = move |x: &[f64]| -> f64 {
            let ax = dv.matvec(x);
            ax.iter().zip(ov.iter()).map(|(a, c)| softplus(a - c)).sum()
        };
        let dg = Arc::clone(&data);
        let og = Arc::clone(&offsets);
        let gradient = move |x: &[f64]| -> Vec<f64> {
            let ax = dg.matvec(x);
            let s: Vec<f64> = ax.iter().zip(og.iter()).map(|(a, c)| sigmoid(a - c)).collect();
            dg.tr_matvec(&s)
        };
        let dh = Arc::clone(&data);
        let oh = Arc::clone(&offsets);
        let hessian = move |x: &[f64]| -> DMat {
            let ax = dh.matvec(x);
            let n = dh.cols();
            let mut h = DMat::zeros(n, n);
            for (i, (a, c)) in ax.iter().zip(oh.iter()).enumerate() {
                let s = sigmoid(a - c);
                let w = s * (1.0 - s);
                for j in 0..n {
                    let dj = dh.get(i, j);
                    if dj != 0.0 {
                        for k in 0..n {
                            let v = w * dj * dh.get(i, k);
                            h.set(j, k, h.get(j, k) + v);
                        }
                    }
                }
            }
            h
        };

        Ok(Self {
            dim,
            lipschitz,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            hessian: Some(Arc::new(hessian)),
            quadratic: None,
        })
    }

    pub fn custom(
        dim: usize,
        lipschitz: f64,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            lipschitz,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            hessian: None,
            quadratic: None,
        }
    }

    pub fn custom_with_hessian(
        dim: usize,
        lipschitz: f64,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        hessian: impl Fn(&[f64]) -> DMat + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            lipschitz,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            hessian: Some(Arc::new(hessian)),
            quadratic: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Declared Lipschitz constant of `∇f` (0 for affine objectives).
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim, "objective value dimension");
        (self.value)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim, "objective gradient dimension");
        let g = (self.gradient)(x);
        assert_eq!(g.len(), self.dim, "gradient oracle output dimension");
        g
    }

    /// `out = ∇f(x)`; allocation-free for quadratic objectives (the hot path
    /// of the integrator). `Q` is symmetric, so `Qx` is computed by the
    /// reduction-free transposed kernel.
    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        if let Some(q) = &self.quadratic {
            out.copy_from_slice(q.linear());
            q.matrix().tr_matvec_acc(x, 1.0, out);
        } else {
            out.copy_from_slice(&self.gradient(x));
        }
    }

    /// Hessian: the registered oracle when present, otherwise central finite
    /// differences of the gradient with step `h = 1e-5·(1 + ‖x‖)`,
    /// symmetrized.
    pub fn hessian(&self, x: &[f64]) -> DMat {
        if let Some(h) = &self.hessian {
            return h(x);
        }
        let n = self.dim;
        let step = 1e-5 * (1.0 + linalg::norm(x));
        let mut h = DMat::zeros(n, n);
        let mut xp = x.to_vec();
        for j in 0..n {
            xp[j] = x[j] + step;
            let gp = self.gradient(&xp);
            xp[j] = x[j] - step;
            let gm = self.gradient(&xp);
            xp[j] = x[j];
            for i in 0..n {
                h.set(i, j, (gp[i] - gm[i]) / (2.0 * step));
            }
        }
        // symmetrize
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (h.get(i, j) + h.get(j, i));
                h.set(i, j, v);
                h.set(j, i, v);
            }
        }
        h
    }

    pub fn as_quadratic(&self) -> Option<&QuadraticObjective> {
        self.quadratic.as_deref()
    }

    pub fn has_hessian_oracle(&self) -> bool {
        self.hessian.is_some()
    }
}

/// A linearly constrained smooth convex minimization instance
/// `min f(x) s.t. Ax = b`.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    objective: SmoothObjective,
    constraint: LinearMap,
    rhs: Vec<f64>,
    blocks: Option<Vec<usize>>,
}

impl ProblemInstance {
    pub fn new(objective: SmoothObjective, constraint: LinearMap, rhs: Vec<f64>) -> Result<Self> {
        if constraint.cols() != objective.dim() {
            return Err(Error::DimensionMismatch {
                context: "ProblemInstance: cols(A) must equal dim(f)",
                expected: objective.dim(),
                actual: constraint.cols(),
            });
        }
        if rhs.len() != constraint.rows() {
            return Err(Error::DimensionMismatch {
                context: "ProblemInstance: dim(b) must equal rows(A)",
                expected: constraint.rows(),
                actual: rhs.len(),
            });
        }
        Ok(Self {
            objective,
            constraint,
            rhs,
            blocks: None,
        })
    }

    /// Unconstrained instance (`m = 0`).
    pub fn unconstrained(objective: SmoothObjective) -> Self {
        let n = objective.dim();
        Self {
            objective,
            constraint: LinearMap::zero(0, n),
            rhs: Vec::new(),
            blocks: None,
        }
    }

    pub fn dim_primal(&self) -> usize {
        self.objective.dim()
    }

    pub fn dim_dual(&self) -> usize {
        self.constraint.rows()
    }

    pub fn objective(&self) -> &SmoothObjective {
        &self.objective
    }

    pub fn constraint(&self) -> &LinearMap {
        &self.constraint
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn blocks(&self) -> Option<&[usize]> {
        self.blocks.as_deref()
    }

    /// Constraint residual `Ax − b`.
    pub fn constraint_residual(&self, x: &[f64]) -> Vec<f64> {
        let mut r = self.constraint.apply(x);
        for (ri, bi) in r.iter_mut().zip(&self.rhs) {
            *ri -= bi;
        }
        r
    }

    fn check_x(&self, x: &[f64], context: &'static str) -> Result<()> {
        if x.len() != self.dim_primal() {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.dim_primal(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    fn check_lambda(&self, lambda: &[f64], context: &'static str) -> Result<()> {
        if lambda.len() != self.dim_dual() {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.dim_dual(),
                actual: lambda.len(),
            });
        }
        Ok(())
    }
}

/// Lagrangian `Λ(x, λ) = f(x) + ⟨λ, Ax − b⟩`.
pub fn lagrangian(p: &ProblemInstance, x: &[f64], lambda: &[f64]) -> Result<f64> {
    p.check_x(x, "lagrangian: x")?;
    p.check_lambda(lambda, "lagrangian: lambda")?;
    let r = p.constraint_residual(x);
    Ok(p.objective.value(x) + linalg::dot(lambda, &r))
}

/// Augmented Lagrangian `L_β(x, λ) = Λ(x, λ) + (β/2)‖Ax − b‖²`, `β ≥ 0`.
pub fn augmented_lagrangian(p: &ProblemInstance, x: &[f64], lambda: &[f64], beta: f64) -> Result<f64> {
    if beta < 0.0 {
        return Err(Error::InvalidParameter {
            name: "beta",
            message: format!("must be >= 0, got {beta}"),
        });
    }
    p.check_x(x, "augmented_lagrangian: x")?;
    p.check_lambda(lambda, "augmented_lagrangian: lambda")?;
    let r = p.constraint_residual(x);
    Ok(p.objective.value(x) + linalg::dot(lambda, &r) + 0.5 * beta * linalg::dot(&r, &r))
}

/// Primal gradient of the augmented Lagrangian,
/// `∇ₓL_β(x, λ) = ∇f(x) + A*λ + βA*(Ax − b)`.
pub fn grad_x_aug(p: &ProblemInstance, x: &[f64], lambda: &[f64], beta: f64) -> Result<Vec<f64>> {
    p.check_x(x, "grad_x_aug: x")?;
    p.check_lambda(lambda, "grad_x_aug: lambda")?;
    let mut g = p.objective.gradient(x);
    linalg::axpy(&mut g, 1.0, &p.constraint.adjoint_apply(lambda));
    if beta != 0.0 {
        let r = p.constraint_residual(x);
        linalg::axpy(&mut g, beta, &p.constraint.adjoint_apply(&r));
    }
    Ok(g)
}

/// Dual gradient of the augmented Lagrangian, `∇_λL_β(x, λ) = Ax − b`
/// (independent of `λ` and `β`).
pub fn grad_lambda_aug(p: &ProblemInstance, x: &[f64]) -> Result<Vec<f64>> {
    p.check_x(x, "grad_lambda_aug: x")?;
    Ok(p.constraint_residual(x))
}

/// Builds the single-block reduction of a separable problem
/// `min Σ fᵢ(xᵢ) s.t. Σ Aᵢxᵢ = b`: the objective is the block sum with the
/// gradient stacked block-wise, the constraint is the horizontal
/// concatenation `[A₁ … A_k]`, and `ℓ = maxᵢ ℓᵢ`. Block sizes are recorded
/// on the returned instance.
pub fn compose_multiblock(
    blocks: Vec<(SmoothObjective, LinearMap)>,
    b: Vec<f64>,
) -> Result<ProblemInstance> {
    if blocks.is_empty() {
        return Err(Error::InvalidParameter {
            name: "blocks",
            message: "at least one block is required".into(),
        });
    }
    let m = b.len();
    for (i, (obj, a)) in blocks.iter().enumerate() {
        if a.rows() != m {
            return Err(Error::DimensionMismatch {
                context: "compose_multiblock: block range dimension",
                expected: m,
                actual: a.rows(),
            });
        }
        if a.cols() != obj.dim() {
            return Err(Error::DimensionMismatch {
                context: "compose_multiblock: block domain dimension",
                expected: obj.dim(),
                actual: a.cols(),
            });
        }
        let _ = i;
    }

    let sizes: Vec<usize> = blocks.iter().map(|(o, _)| o.dim()).collect();
    let n: usize = sizes.iter().sum();
    let lipschitz = blocks
        .iter()
        .map(|(o, _)| o.lipschitz())
        .fold(0.0_f64, f64::max);

    // stacked constraint [A₁ … A_k]
    let mut a_full = DMat::zeros(m, n);
    let mut col0 = 0;
    for (_, a) in &blocks {
        for i in 0..m {
            for j in 0..a.cols() {
                a_full.set(i, col0 + j, a.matrix().get(i, j));
            }
        }
        col0 += a.cols();
    }

    // quadratic marker when every block is quadratic
    let quadratic = if blocks.iter().all(|(o, _)| o.as_quadratic().is_some()) {
        let mut q_full = DMat::zeros(n, n);
        let mut lin_full = vec![0.0; n];
        let mut off = 0;
        for (o, _) in &blocks {
            let q = o.as_quadratic().unwrap();
            for i in 0..q.dim() {
                for j in 0..q.dim() {
                    q_full.set(off + i, off + j, q.matrix().get(i, j));
                }
                lin_full[off + i] = q.linear()[i];
            }
            off += q.dim();
        }
        Some(QuadraticObjective::new(q_full, lin_full)?)
    } else {
        None
    };

    let offsets: Vec<usize> = sizes
        .iter()
        .scan(0, |acc, s| {
            let start = *acc;
            *acc += s;
            Some(start)
        })
        .collect();

    let objective = if let Some(q) = quadratic {
        SmoothObjective::quadratic(q)
    } else {
        let blocks = Arc::new(blocks);
        let bv = Arc::clone(&blocks);
        let ov = offsets.clone();
        let value = move |x: &[f64]| -> f64 {
            bv.iter()
                .zip(&ov)
                .map(|((o, _), &s)| o.value(&x[s..s + o.dim()]))
                .sum()
        };
        let bg = Arc::clone(&blocks);
        let og = offsets.clone();
        let grad = move |x: &[f64]| -> Vec<f64> {
            let mut g = Vec::with_capacity(x.len());
            for ((o, _), &s) in bg.iter().zip(&og) {
                g.extend(o.gradient(&x[s..s + o.dim()]));
            }
            g
        };
        SmoothObjective::custom(n, lipschitz, value, grad)
    };

    let mut p = ProblemInstance::new(objective, LinearMap::new(a_full), b)?;
    p.blocks = Some(sizes);
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "expected {a} ≈ {b} (tol {tol})");
    }

    #[test]
    fn lagrangian_known_values() {
        let p = synth::qp2();
        // feasible point: value equals f(x) for any multiplier
        close(lagrangian(&p, &[0.5, 0.5], &[3.7]).unwrap(), 0.25, 1e-15);
        // direct formula: f=0, ⟨λ, Ax−b⟩ = (−0.5)(−1)
        close(lagrangian(&p, &[0.0, 0.0], &[-0.5]).unwrap(), 0.5, 1e-15);
        // zero constraint: Λ = f
        let free = ProblemInstance::new(
            SmoothObjective::quadratic(
                QuadraticObjective::new(DMat::identity(2), vec![0.0, 0.0]).unwrap(),
            ),
            LinearMap::zero(1, 2),
            vec![0.0],
        )
        .unwrap();
        close(lagrangian(&free, &[1.0, 2.0], &[9.0]).unwrap(), 2.5, 1e-15);
    }

    #[test]
    fn augmented_lagrangian_known_values() {
        let p = synth::qp2();
        // feasible point: penalty vanishes
        close(
            augmented_lagrangian(&p, &[0.5, 0.5], &[1.3], 2.0).unwrap(),
            lagrangian(&p, &[0.5, 0.5], &[1.3]).unwrap(),
            1e-15,
        );
        // L_1((0,0), 0) = 0 + 0 + ½·1
        close(augmented_lagrangian(&p, &[0.0, 0.0], &[0.0], 1.0).unwrap(), 0.5, 1e-15);
        // β = 0 reduces to the plain Lagrangian
        close(
            augmented_lagrangian(&p, &[0.2, -0.4], &[0.7], 0.0).unwrap(),
            lagrangian(&p, &[0.2, -0.4], &[0.7]).unwrap(),
            1e-15,
        );
        assert!(augmented_lagrangian(&p, &[0.0, 0.0], &[0.0], -1.0).is_err());
    }

    #[test]
    fn grad_x_aug_known_values() {
        let p = synth::qp2();
        // at the saddle the gradient vanishes for any β
        let g = grad_x_aug(&p, &[0.5, 0.5], &[-0.5], 3.0).unwrap();
        assert!(linalg::norm(&g) < 1e-14);
        // hand evaluation at (0,0), λ=0, β=1: βA*(A·0 − 1) = (−1,−1)
        let g = grad_x_aug(&p, &[0.0, 0.0], &[0.0], 1.0).unwrap();
        close(g[0], -1.0, 1e-15);
        close(g[1], -1.0, 1e-15);
        // β = 0 and A = 0: plain ∇f
        let free = ProblemInstance::new(
            SmoothObjective::quadratic(
                QuadraticObjective::new(DMat::identity(2), vec![1.0, -1.0]).unwrap(),
            ),
            LinearMap::zero(1, 2),
            vec![0.0],
        )
        .unwrap();
        let g = grad_x_aug(&free, &[2.0, 3.0], &[5.0], 0.0).unwrap();
        close(g[0], 3.0, 1e-15);
        close(g[1], 2.0, 1e-15);
    }

    #[test]
    fn grad_lambda_aug_known_values() {
        let p = synth::qp2();
        assert!(linalg::norm(&grad_lambda_aug(&p, &[0.5, 0.5]).unwrap()) < 1e-15);
        close(grad_lambda_aug(&p, &[0.0, 0.0]).unwrap()[0], -1.0, 1e-15);
        close(grad_lambda_aug(&p, &[1.0, 1.0]).unwrap()[0], 1.0, 1e-15);
    }

    #[test]
    fn dimension_mismatches_are_rejected() {
        let p = synth::qp2();
        assert!(lagrangian(&p, &[1.0], &[0.0]).is_err());
        assert!(lagrangian(&p, &[1.0, 2.0], &[0.0, 0.0]).is_err());
        assert!(grad_x_aug(&p, &[1.0, 2.0, 3.0], &[0.0], 1.0).is_err());
        assert!(grad_lambda_aug(&p, &[1.0]).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences_of_augmented_lagrangian() {
        let p = synth::random_qp(3, 4, 2);
        let mut rng = synth::SplitMix64::new(99);
        for _ in 0..20 {
            let x: Vec<f64> = (0..4).map(|_| rng.next_symmetric()).collect();
            let lam: Vec<f64> = (0..2).map(|_| rng.next_symmetric()).collect();
            let beta = 0.5 + rng.next_f64();
            let g = grad_x_aug(&p, &x, &lam, beta).unwrap();
            let h = 1e-6;
            for j in 0..4 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let fd = (augmented_lagrangian(&p, &xp, &lam, beta).unwrap()
                    - augmented_lagrangian(&p, &xm, &lam, beta).unwrap())
                    / (2.0 * h);
                assert!(
                    (fd - g[j]).abs() <= 1e-6 * (1.0 + g[j].abs()),
                    "fd {fd} vs grad {}",
                    g[j]
                );
            }
            // λ-gradient is exact by linearity
            let gl = grad_lambda_aug(&p, &x).unwrap();
            for j in 0..2 {
                let mut lp = lam.clone();
                let mut lm = lam.clone();
                lp[j] += 1.0;
                lm[j] -= 1.0;
                let fd = (augmented_lagrangian(&p, &x, &lp, beta).unwrap()
                    - augmented_lagrangian(&p, &x, &lm, beta).unwrap())
                    / 2.0;
                assert!((fd - gl[j]).abs() <= 1e-12 * (1.0 + gl[j].abs()));
            }
        }
    }

    #[test]
    fn adjoint_consistency_random_probes() {
        let a = synth::random_qp(17, 9, 4).constraint().clone();
        let mut rng = synth::SplitMix64::new(5);
        for _ in 0..100 {
            let x: Vec<f64> = (0..9).map(|_| rng.next_symmetric()).collect();
            let y: Vec<f64> = (0..4).map(|_| rng.next_symmetric()).collect();
            let lhs = linalg::dot(&a.apply(&x), &y);
            let rhs = linalg::dot(&x, &a.adjoint_apply(&y));
            assert!(
                (lhs - rhs).abs() <= 1e-12 * (1.0 + linalg::norm(&x) * linalg::norm(&y)),
                "adjoint identity violated: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn descent_bound_chain_quadratic_and_logistic() {
        let objs: Vec<SmoothObjective> = vec![
            synth::random_qp(8, 5, 2).objective().clone(),
            SmoothObjective::logistic_smooth(
                DMat::from_rows(&[
                    vec![1.0, 0.3, -0.2],
                    vec![-0.5, 1.1, 0.4],
                    vec![0.2, -0.7, 0.9],
                ])
                .unwrap(),
                vec![0.1, -0.3, 0.2],
            )
            .unwrap(),
        ];
        let mut rng = synth::SplitMix64::new(17);
        for f in &objs {
            let n = f.dim();
            let ell = f.lipschitz();
            assert!(ell > 0.0);
            for _ in 0..100 {
                let x: Vec<f64> = (0..n).map(|_| 2.0 * rng.next_symmetric()).collect();
                let y: Vec<f64> = (0..n).map(|_| 2.0 * rng.next_symmetric()).collect();
                let bregman =
                    f.value(&x) - f.value(&y) - linalg::dot(&f.gradient(&y), &linalg::sub(&x, &y));
                let gd = linalg::norm(&linalg::sub(&f.gradient(&x), &f.gradient(&y)));
                let lower = gd * gd / (2.0 * ell);
                let upper = 0.5 * ell * {
                    let d = linalg::sub(&x, &y);
                    linalg::dot(&d, &d)
                };
                let slack = 1e-10 * (1.0 + bregman.abs() + upper);
                assert!(bregman >= -slack, "convexity violated: {bregman}");
                assert!(lower <= bregman + slack, "lower bound violated: {lower} > {bregman}");
                assert!(bregman <= upper + slack, "upper bound violated: {bregman} > {upper}");
            }
        }
    }

    #[test]
    fn multiblock_reduces_to_monolithic_qp2() {
        let block = || {
            (
                SmoothObjective::quadratic(
                    QuadraticObjective::new(DMat::identity(1), vec![0.0]).unwrap(),
                ),
                LinearMap::from_rows(&[vec![1.0]]).unwrap(),
            )
        };
        let p = compose_multiblock(vec![block(), block()], vec![1.0]).unwrap();
        assert_eq!(p.blocks(), Some(&[1usize, 1][..]));
        let q2 = synth::qp2();
        let mut rng = synth::SplitMix64::new(31);
        for _ in 0..50 {
            let x: Vec<f64> = (0..2).map(|_| rng.next_symmetric()).collect();
            let lam = [rng.next_symmetric()];
            let a = augmented_lagrangian(&p, &x, &lam, 1.5).unwrap();
            let b = augmented_lagrangian(&q2, &x, &lam, 1.5).unwrap();
            assert!((a - b).abs() <= 1e-14 * (1.0 + a.abs()));
            let ga = grad_x_aug(&p, &x, &lam, 1.5).unwrap();
            let gb = grad_x_aug(&q2, &x, &lam, 1.5).unwrap();
            assert!(linalg::norm(&linalg::sub(&ga, &gb)) <= 1e-14 * (1.0 + linalg::norm(&gb)));
        }
    }

    #[test]
    fn multiblock_single_block_is_identity_wrapper() {
        let q2 = synth::qp2();
        let p = compose_multiblock(
            vec![(q2.objective().clone(), q2.constraint().clone())],
            vec![1.0],
        )
        .unwrap();
        assert_eq!(p.dim_primal(), 2);
        assert_eq!(p.blocks(), Some(&[2usize][..]));
        let x = [0.3, -0.8];
        assert_eq!(
            lagrangian(&p, &x, &[0.4]).unwrap(),
            lagrangian(&q2, &x, &[0.4]).unwrap()
        );
    }

    #[test]
    fn multiblock_stacked_gradient_matches_finite_differences() {
        // blocks of sizes (2, 3) into m = 2
        let b1 = (
            SmoothObjective::logistic_smooth(
                DMat::from_rows(&[vec![1.0, -0.4], vec![-0.8, 0.6]]).unwrap(),
                vec![0.0, 0.1],
            )
            .unwrap(),
            LinearMap::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(),
        );
        let b2 = (
            SmoothObjective::quadratic(
                QuadraticObjective::new(
                    DMat::from_rows(&[
                        vec![2.0, 0.1, 0.0],
                        vec![0.1, 1.5, -0.2],
                        vec![0.0, -0.2, 1.0],
                    ])
                    .unwrap(),
                    vec![0.3, 0.0, -0.1],
                )
                .unwrap(),
            ),
            LinearMap::from_rows(&[vec![1.0, 2.0, 3.0], vec![0.0, 1.0, -1.0]]).unwrap(),
        );
        let p = compose_multiblock(vec![b1, b2], vec![1.0, 0.5]).unwrap();
        assert_eq!(p.dim_primal(), 5);
        assert_eq!(p.blocks(), Some(&[2usize, 3][..]));
        let x = [0.2, -0.3, 0.5, 0.1, -0.4];
        let g = p.objective().gradient(&x);
        let h = 1e-6;
        for j in 0..5 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let fd = (p.objective().value(&xp) - p.objective().value(&xm)) / (2.0 * h);
            assert!((fd - g[j]).abs() <= 1e-6 * (1.0 + g[j].abs()));
        }
    }

    #[test]
    fn multiblock_range_mismatch_rejected() {
        let b1 = (
            SmoothObjective::zero(1),
            LinearMap::from_rows(&[vec![1.0]]).unwrap(),
        );
        let b2 = (
            SmoothObjective::zero(1),
            LinearMap::from_rows(&[vec![1.0], vec![2.0]]).unwrap(),
        );
        assert!(compose_multiblock(vec![b1, b2], vec![1.0]).is_err());
    }

    #[test]
    fn problem_objects_are_send_and_sync() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<SmoothObjective>();
        assert_send_sync::<LinearMap>();
        assert_send_sync::<ProblemInstance>();
        assert_send_sync::<QuadraticObjective>();
    }

    #[test]
    fn quadratic_objective_validation() {
        // asymmetric
        let bad = DMat::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
        assert!(QuadraticObjective::new(bad, vec![0.0, 0.0]).is_err());
        // indefinite
        let neg = DMat::from_rows(&[vec![-1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(QuadraticObjective::new(neg, vec![0.0, 0.0]).is_err());
        // ℓ = largest eigenvalue
        let q = QuadraticObjective::new(
            DMat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap(),
            vec![0.0, 0.0],
        )
        .unwrap();
        assert!((q.lipschitz - 3.0).abs() < 1e-12);
    }
}
