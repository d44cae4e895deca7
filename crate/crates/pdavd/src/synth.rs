//! Seeded, platform-stable test problems.
//!
//! The generator is a hand-rolled SplitMix64 so that identical seeds produce
//! identical problem data (and therefore identical output files) on every
//! platform and toolchain.

use crate::linalg::DMat;
use crate::problem::{LinearMap, ProblemInstance, QuadraticObjective, SmoothObjective};

/// SplitMix64 pseudo-random generator.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[-1, 1)`.
    pub fn next_symmetric(&mut self) -> f64 {
        2.0 * self.next_f64() - 1.0
    }
}

/// The canonical 2-variable instance `min ½‖x‖² s.t. x₁ + x₂ = 1`,
/// with saddle point `x* = (½, ½)`, `λ* = −½`, `f* = ¼`.
pub fn qp2() -> ProblemInstance {
    let obj = SmoothObjective::quadratic(
        QuadraticObjective::new(DMat::identity(2), vec![0.0, 0.0]).unwrap(),
    );
    let a = LinearMap::from_rows(&[vec![1.0, 1.0]]).unwrap();
    ProblemInstance::new(obj, a, vec![1.0]).unwrap()
}

/// The 1-D instance `min ½x² s.t. x = 1`, with `x* = 1`, `λ* = −1`, `f* = ½`.
pub fn qp1() -> ProblemInstance {
    let obj = SmoothObjective::quadratic(
        QuadraticObjective::new(DMat::identity(1), vec![0.0]).unwrap(),
    );
    let a = LinearMap::from_rows(&[vec![1.0]]).unwrap();
    ProblemInstance::new(obj, a, vec![1.0]).unwrap()
}

/// Degenerate instance `min ½‖x‖²` with a duplicated constraint row
/// `A = [[1,1],[1,1]]`, `b = (1,1)`: the multiplier is not unique
/// (any `λ` with `λ₁ + λ₂ = −½` works) but `A*λ` is.
pub fn degenerate_qp() -> ProblemInstance {
    let obj = SmoothObjective::quadratic(
        QuadraticObjective::new(DMat::identity(2), vec![0.0, 0.0]).unwrap(),
    );
    let a = LinearMap::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
    ProblemInstance::new(obj, a, vec![1.0, 1.0]).unwrap()
}

/// Seeded strongly convex QP: `Q = MᵀM + 0.1·I` with `M` uniform in
/// `[-1, 1)`, `A` with uniform entries scaled by `1/√n` (so `‖A‖ = O(1)`
/// independent of size), and `b = A·x̄` for a random feasible `x̄` so the
/// solution set is nonempty.
pub fn random_qp(seed: u64, n: usize, m: usize) -> ProblemInstance {
    let mut rng = SplitMix64::new(seed);
    let mut mdat = DMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            mdat.set(i, j, rng.next_symmetric());
        }
    }
    let mut q = mdat.gram();
    for i in 0..n {
        q.set(i, i, q.get(i, i) + 0.1);
    }
    let lin: Vec<f64> = (0..n).map(|_| rng.next_symmetric()).collect();
    let obj = SmoothObjective::quadratic(QuadraticObjective::new(q, lin).unwrap());

    let scale = 1.0 / (n as f64).sqrt();
    let mut a = DMat::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            a.set(i, j, scale * rng.next_symmetric());
        }
    }
    let xbar: Vec<f64> = (0..n).map(|_| rng.next_symmetric()).collect();
    let b = a.matvec(&xbar);
    ProblemInstance::new(obj, LinearMap::new(a), b).unwrap()
}

/// Nonnegative piecewise-linear function sampled on a uniform grid over
/// `[delta, r]`: seeded knot values in `[0, 1]`, linearly interpolated.
pub fn seeded_spline_samples(seed: u64, knots: usize, samples: usize) -> Vec<f64> {
    assert!(knots >= 2 && samples >= 2);
    let mut rng = SplitMix64::new(seed);
    let kv: Vec<f64> = (0..knots).map(|_| rng.next_f64()).collect();
    (0..samples)
        .map(|i| {
            let u = i as f64 / (samples - 1) as f64 * (knots - 1) as f64;
            let k = (u.floor() as usize).min(knots - 2);
            let frac = u - k as f64;
            kv[k] * (1.0 - frac) + kv[k + 1] * frac
        })
        .collect()
}
