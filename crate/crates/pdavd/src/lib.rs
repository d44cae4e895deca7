//! Continuous-time primal-dual solver for linearly constrained smooth convex
//! minimization, with full instrumentation of its certification theory.
//!
//! The central object is the damped inertial system
//!
//! ```text
//! ẍ(t) + (α/t) ẋ(t) + ∇f(x(t)) + A*(λ(t) + θt λ̇(t)) + β A*(Ax(t) − b) = 0
//! λ̈(t) + (α/t) λ̇(t) − (A(x(t) + θt ẋ(t)) − b)                         = 0
//! ```
//!
//! associated with `min f(x) s.t. Ax = b`, where `f` is convex with an
//! `ℓ`-Lipschitz gradient and `A` is a dense linear operator. Trajectories of
//! this system drive the primal-dual gap, the feasibility measure `‖Ax − b‖`
//! and the objective error to zero at rate `O(1/t²)`, and the KKT residuals at
//! rate `o(1/√t)`; the crate integrates the system numerically and checks all
//! of those guarantees, including their explicit constants, along the
//! computed trajectory.
//!
//! Module map:
//!
//! * [`problem`] — problem instances, (augmented) Lagrangian values and
//!   partial gradients, multi-block composition.
//! * [`oracle`] — reference saddle points via direct KKT solves or damped
//!   Newton iteration.
//! * [`dynamics`] — the first-order vector field, parameter validation and
//!   closed forms for the unconstrained reduction.
//! * [`integrator`] — adaptive Dormand-Prince integration with dense output
//!   on a prescribed sample grid.
//! * [`diagnostics`] — energy/gap/velocity instrumentation, explicit rate
//!   constants, per-sample inequality checks, cumulative integrals.
//! * [`rates`] — log-log slope fits and asymptotic-decay verdicts.
//! * [`synth`] — seeded test problems (reproducible across platforms).
//! * [`plot`] — dependency-free log-log SVG rendering.

// negated comparisons like `!(t > 0.0)` are deliberate: they reject NaN,
// which `t <= 0.0` would silently accept
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod dynamics;
mod error;
pub mod integrator;
pub mod linalg;
pub mod oracle;
pub mod plot;
pub mod problem;
pub mod rates;
pub mod synth;

pub use error::{Error, Result};
