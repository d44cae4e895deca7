//! Small dense linear-algebra kernels: row-major matrices, power iteration,
//! a cyclic Jacobi eigensolver and a minimum-norm least-squares solve for
//! symmetric systems. Everything targets desk-scale dimensions (n, m ≤ 10³)
//! where dense exact kernels beat iterative machinery.

use crate::{Error, Result};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // four independent accumulators so the loop vectorizes
    let quads = a.len() / 4 * 4;
    let (a4, a_tail) = a.split_at(quads);
    let (b4, b_tail) = b.split_at(quads);
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    for (ca, cb) in a4.chunks_exact(4).zip(b4.chunks_exact(4)) {
        s0 += ca[0] * cb[0];
        s1 += ca[1] * cb[1];
        s2 += ca[2] * cb[2];
        s3 += ca[3] * cb[3];
    }
    let mut s = (s0 + s2) + (s1 + s3);
    for (x, y) in a_tail.iter().zip(b_tail) {
        s += x * y;
    }
    s
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Norm of a stacked pair, `sqrt(‖a‖² + ‖b‖²)` (the product-space norm).
pub fn pair_norm(a: &[f64], b: &[f64]) -> f64 {
    (dot(a, a) + dot(b, b)).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scaled(a: &[f64], c: f64) -> Vec<f64> {
    a.iter().map(|x| c * x).collect()
}

/// `y += c·x`
#[inline]
pub fn axpy(y: &mut [f64], c: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += c * xi;
    }
}


/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DMat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "DMat::from_row_major",
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    context: "DMat::from_rows",
                    expected: c,
                    actual: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// `A·x`
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.matvec_into(x, &mut out);
        out
    }

    /// `out = A·x` without allocating.
    pub fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.cols, "matvec dimension");
        assert_eq!(out.len(), self.rows, "matvec output dimension");
        let n = self.cols;
        for (i, oi) in out.iter_mut().enumerate() {
            *oi = dot(&self.data[i * n..(i + 1) * n], x);
        }
    }

    /// `Aᵀ·y`
    pub fn tr_matvec(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        self.tr_matvec_acc(y, 1.0, &mut out);
        out
    }

    /// `out += c·Aᵀ·y` without allocating.
    pub fn tr_matvec_acc(&self, y: &[f64], c: f64, out: &mut [f64]) {
        assert_eq!(y.len(), self.rows, "tr_matvec dimension");
        assert_eq!(out.len(), self.cols, "tr_matvec output dimension");
        for (i, yi) in y.iter().enumerate() {
            let w = c * yi;
            if w != 0.0 {
                axpy(out, w, &self.data[i * self.cols..(i + 1) * self.cols]);
            }
        }
    }

    pub fn transpose(&self) -> DMat {
        let mut t = DMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn frobenius(&self) -> f64 {
        norm(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let scale = 1.0 + self.max_abs();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if (self.get(i, j) - self.get(j, i)).abs() > tol * scale {
                    return false;
                }
            }
        }
        true
    }

    /// The Gram matrix `AᵀA` (cols × cols).
    pub fn gram(&self) -> DMat {
        let n = self.cols;
        let mut g = DMat::zeros(n, n);
        for i in 0..self.rows {
            let row = &self.data[i * n..(i + 1) * n];
            for j in 0..n {
                let rj = row[j];
                if rj != 0.0 {
                    for (k, rk) in row.iter().enumerate().skip(j) {
                        g.data[j * n + k] += rj * rk;
                    }
                }
            }
        }
        for j in 0..n {
            for k in (j + 1)..n {
                g.data[k * n + j] = g.data[j * n + k];
            }
        }
        g
    }
}

/// Largest eigenvalue of a symmetric positive-semidefinite matrix by power
/// iteration: 200 iterations, convergence tolerance 1e-10 on the Rayleigh
/// quotient. Returns 0 for the zero matrix.
pub fn power_iteration_psd(b: &DMat, iterations: usize, tol: f64) -> f64 {
    let n = b.rows();
    if n == 0 || b.max_abs() == 0.0 {
        return 0.0;
    }
    // Deterministic start vector with a mild asymmetry so it is not
    // orthogonal to the leading eigenvector of structured matrices.
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.013 * ((i % 7) as f64)).collect();
    let nv = norm(&v);
    for x in v.iter_mut() {
        *x /= nv;
    }
    let mut rho = 0.0;
    for _ in 0..iterations {
        let w = b.matvec(&v);
        let nw = norm(&w);
        if nw == 0.0 {
            return 0.0;
        }
        let rho_new = dot(&v, &w);
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / nw;
        }
        if (rho_new - rho).abs() <= tol * rho_new.abs().max(1.0) {
            return rho_new.max(0.0);
        }
        rho = rho_new;
    }
    rho.max(0.0)
}

/// Operator norm `‖A‖` (largest singular value), via power iteration on the
/// smaller of `AᵀA` and `AAᵀ`. Inflated by 1e-8 relative so the cached value
/// is an upper bound at working precision.
pub fn operator_norm(a: &DMat) -> f64 {
    if a.rows() == 0 || a.cols() == 0 {
        return 0.0;
    }
    let gram = if a.cols() <= a.rows() {
        a.gram()
    } else {
        a.transpose().gram()
    };
    let lam = power_iteration_psd(&gram, 200, 1e-10);
    lam.max(0.0).sqrt() * (1.0 + 1e-8)
}

/// Eigendecomposition `M = V diag(values) Vᵀ` of a symmetric matrix.
/// `vectors` holds eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: DMat,
}

/// Cyclic Jacobi eigensolver for symmetric matrices. Robust and accurate at
/// desk scale; cost is O(n³) per sweep.
pub fn sym_eigen(m: &DMat) -> Result<SymEigen> {
    if m.rows() != m.cols() {
        return Err(Error::DimensionMismatch {
            context: "sym_eigen",
            expected: m.rows(),
            actual: m.cols(),
        });
    }
    if !m.is_symmetric(1e-11) {
        return Err(Error::InvalidDomain(
            "sym_eigen requires a symmetric matrix".into(),
        ));
    }
    let n = m.rows();
    let mut a = m.clone();
    // Exact symmetrization so rotations preserve symmetry bit-for-bit.
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a.get(i, j) + a.get(j, i));
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    let mut v = DMat::identity(n);
    let scale = a.frobenius().max(f64::MIN_POSITIVE);
    let tol = 1e-15 * scale;

    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a.get(i, j) * a.get(i, j);
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq.abs() <= 1e-18 * scale {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // A ← JᵀAJ on rows/cols p, q
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    let values = (0..n).map(|i| a.get(i, i)).collect();
    Ok(SymEigen { values, vectors: v })
}

/// Result of a symmetric least-squares solve.
#[derive(Clone, Debug)]
pub struct SymSolve {
    /// Minimum-norm least-squares solution.
    pub solution: Vec<f64>,
    /// Numerical rank at the relative tolerance used.
    pub rank: usize,
    /// `‖K·solution − rhs‖`; nonzero when the system is inconsistent.
    pub residual: f64,
}

/// Minimum-norm least-squares solve of `K w = rhs` for symmetric `K`, via the
/// spectral pseudoinverse with rank tolerance `rank_tol_rel · max|eig|`.
pub fn solve_sym_least_squares(k: &DMat, rhs: &[f64], rank_tol_rel: f64) -> Result<SymSolve> {
    if rhs.len() != k.rows() {
        return Err(Error::DimensionMismatch {
            context: "solve_sym_least_squares",
            expected: k.rows(),
            actual: rhs.len(),
        });
    }
    let eig = sym_eigen(k)?;
    let n = k.rows();
    let max_eig = eig.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let cutoff = rank_tol_rel * max_eig;
    // coefficients in the eigenbasis: c = Vᵀ rhs
    let c = eig.vectors.tr_matvec(rhs);
    let mut w = vec![0.0; n];
    let mut rank = 0;
    for (idx, &lam) in eig.values.iter().enumerate() {
        if lam.abs() > cutoff {
            rank += 1;
            let coef = c[idx] / lam;
            for (i, wi) in w.iter_mut().enumerate() {
                *wi += coef * eig.vectors.get(i, idx);
            }
        }
    }
    let residual = norm(&sub(&k.matvec(&w), rhs));
    Ok(SymSolve {
        solution: w,
        rank,
        residual,
    })
}
