//! Adaptive Dormand-Prince 5(4) integration of the first-order system with
//! dense output on a prescribed sample grid.
//!
//! The integrator advances in physical time with componentwise error control
//! `|e_i| ≤ abs_tol + rel_tol·|y_i|` per step. Sample states are produced by
//! the method's own quartic interpolant, so no step ever skips a sample
//! time; the final step is clipped to land on `t_end` exactly. Each stored
//! sample carries its second derivatives, recomputed from the stored state
//! so the two are identical by construction.

use crate::dynamics::{self, second_derivatives, SolverParams, SystemState, ValidationMode};
use crate::problem::ProblemInstance;
use crate::{Error, Result};

/// Sample-grid spacing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spacing {
    Log,
    Linear,
}

/// A monotone sample grid on `[t0, t_end]`.
#[derive(Clone, Debug)]
pub struct SampleSchedule {
    times: Vec<f64>,
}

impl SampleSchedule {
    pub fn new(t0: f64, t_end: f64, count: usize, spacing: Spacing) -> Result<Self> {
        Ok(Self {
            times: sample_schedule(t0, t_end, count, spacing)?,
        })
    }

    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::TooFewSamples {
                needed: 2,
                got: times.len(),
            });
        }
        if !times.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidDomain(
                "sample times must be strictly increasing".into(),
            ));
        }
        if times[0] <= 0.0 {
            return Err(Error::InvalidDomain("sample times must be positive".into()));
        }
        Ok(Self { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }
}

/// Sample times: log spacing puts `t_k = t0·(t_end/t0)^{(k−1)/(N−1)}`,
/// linear spacing is uniform. Both endpoints are exact.
pub fn sample_schedule(t0: f64, t_end: f64, count: usize, spacing: Spacing) -> Result<Vec<f64>> {
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
    if count < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: count,
        });
    }
    let n = count;
    let mut times = Vec::with_capacity(n);
    match spacing {
        Spacing::Log => {
            let ratio = t_end / t0;
            for k in 0..n {
                times.push(t0 * ratio.powf(k as f64 / (n - 1) as f64));
            }
        }
        Spacing::Linear => {
            let step = (t_end - t0) / (n - 1) as f64;
            for k in 0..n {
                times.push(t0 + step * k as f64);
            }
        }
    }
    times[0] = t0;
    times[n - 1] = t_end;
    Ok(times)
}

/// Counters from one integration.
#[derive(Clone, Copy, Debug, Default)]
pub struct IntegrationStats {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
}

/// States, second derivatives and solver statistics on the sample grid.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<SystemState>,
    /// `(ẍ, λ̈)` at each sample, equal to `second_derivatives` applied to the
    /// stored state.
    pub accelerations: Vec<(Vec<f64>, Vec<f64>)>,
    pub stats: IntegrationStats,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn terminal(&self) -> &SystemState {
        self.samples.last().expect("trajectory has samples")
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
// difference between the 5th- and 4th-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// dense-output coefficients
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

struct DenseSegment<'a> {
    t_old: f64,
    h: f64,
    cont: &'a [Vec<f64>; 5],
}

impl DenseSegment<'_> {
    fn eval(&self, t: f64, out: &mut [f64]) {
        let s = ((t - self.t_old) / self.h).clamp(0.0, 1.0);
        let s1 = 1.0 - s;
        let [c0, c1, c2, c3, c4] = self.cont;
        for i in 0..out.len() {
            out[i] = c0[i] + s * (c1[i] + s1 * (c2[i] + s * (c3[i] + s1 * c4[i])));
        }
    }
}

/// Integrates the first-order system over `[t0, t_end]` and returns the
/// trajectory on the given schedule. Parameters must satisfy at least the
/// standard regime; the schedule must lie inside the time window.
pub fn integrate(
    p: &ProblemInstance,
    params: &SolverParams,
    schedule: &SampleSchedule,
) -> Result<Trajectory> {
    params.validate(ValidationMode::Standard)?;
    let n = p.dim_primal();
    let m = p.dim_dual();
    if params.x0.len() != n {
        return Err(Error::DimensionMismatch {
            context: "integrate: x0",
            expected: n,
            actual: params.x0.len(),
        });
    }
    if params.lambda0.len() != m {
        return Err(Error::DimensionMismatch {
            context: "integrate: lambda0",
            expected: m,
            actual: params.lambda0.len(),
        });
    }
    let times = schedule.times();
    if times[0] < params.t0 - 1e-12 * params.t0
        || *times.last().unwrap() > params.t_end * (1.0 + 1e-12)
    {
        return Err(Error::InvalidDomain(format!(
            "schedule [{}, {}] outside the integration window [{}, {}]",
            times[0],
            times.last().unwrap(),
            params.t0,
            params.t_end
        )));
    }

    let dim = 2 * (n + m);
    let mut stats = IntegrationStats::default();
    let mut ws = dynamics::RhsWorkspace::new(n, m);

    let mut t = params.t0;
    let t_end = params.t_end;
    let mut y = vec![0.0; dim];
    dynamics::pack_state(&SystemState::initial(params), &mut y);

    // stages 2..7 stored contiguously; stage 1 (k0) separate for FSAL reuse
    let mut k = vec![0.0; 6 * dim];
    let mut k0 = vec![0.0; dim];
    dynamics::rhs_packed(p, params, t, &y, &mut k0, &mut ws);
    stats.rhs_evaluations += 1;

    let mut samples = Vec::with_capacity(times.len());
    let mut accels = Vec::with_capacity(times.len());
    let mut next_sample = 0usize;
    let record = |tq: f64,
                  yq: &[f64],
                  samples: &mut Vec<SystemState>,
                  accels: &mut Vec<(Vec<f64>, Vec<f64>)>|
     -> Result<()> {
        let state = dynamics::unpack_state(tq, yq, n, m);
        let acc = second_derivatives(p, params, &state)?;
        samples.push(state);
        accels.push(acc);
        Ok(())
    };
    // emit every sample at or before the start time
    while next_sample < times.len() && times[next_sample] <= t {
        record(times[next_sample], &y, &mut samples, &mut accels)?;
        next_sample += 1;
    }

    let mut h = initial_step(p, params, &y, &k0, t, t_end, &mut stats, &mut ws);
    let mut y_new = vec![0.0; dim];
    let mut y_stage = vec![0.0; dim];
    let mut err_vec = vec![0.0; dim];
    let mut cont: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; dim]);
    let mut last_rejected = false;
    // PI step-size stabilization (reduces chatter on oscillatory problems)
    const PI_BETA: f64 = 0.04;
    const EXPO: f64 = 0.2 - PI_BETA * 0.75;
    const SAFE: f64 = 0.9;
    let mut facold: f64 = 1e-4;

    while t < t_end {
        let remaining = t_end - t;
        // the interval is numerically exhausted; land on t_end
        if remaining <= 4.0 * f64::EPSILON * t_end {
            break;
        }
        if h >= remaining {
            h = remaining;
        } else if h < 1e-14 * t {
            return Err(Error::StepSizeUnderflow { t, h });
        }

        // stages 2..7; k0 is the first stage, stage index 5 lands on t + h.
        // each assembly is one fused pass so the loop vectorizes.
        for stage in 0..6 {
            let (done, rest) = k.split_at_mut(stage * dim);
            let row = &A[stage];
            match stage {
                0 => {
                    for i in 0..dim {
                        y_stage[i] = y[i] + h * (row[0] * k0[i]);
                    }
                }
                1 => {
                    let k1 = &done[..dim];
                    for i in 0..dim {
                        y_stage[i] = y[i] + h * (row[0] * k0[i] + row[1] * k1[i]);
                    }
                }
                2 => {
                    let (k1, k2) = done.split_at(dim);
                    for i in 0..dim {
                        y_stage[i] =
                            y[i] + h * (row[0] * k0[i] + row[1] * k1[i] + row[2] * k2[i]);
                    }
                }
                3 => {
                    let (k1, r) = done.split_at(dim);
                    let (k2, k3) = r.split_at(dim);
                    for i in 0..dim {
                        y_stage[i] = y[i]
                            + h * (row[0] * k0[i]
                                + row[1] * k1[i]
                                + row[2] * k2[i]
                                + row[3] * k3[i]);
                    }
                }
                4 => {
                    let (k1, r) = done.split_at(dim);
                    let (k2, r) = r.split_at(dim);
                    let (k3, k4) = r.split_at(dim);
                    for i in 0..dim {
                        y_stage[i] = y[i]
                            + h * (row[0] * k0[i]
                                + row[1] * k1[i]
                                + row[2] * k2[i]
                                + row[3] * k3[i]
                                + row[4] * k4[i]);
                    }
                }
                _ => {
                    let (k1, r) = done.split_at(dim);
                    let (k2, r) = r.split_at(dim);
                    let (k3, r) = r.split_at(dim);
                    let (k4, k5) = r.split_at(dim);
                    let _ = k1; // A[5][1] = 0
                    for i in 0..dim {
                        y_stage[i] = y[i]
                            + h * (row[0] * k0[i]
                                + row[2] * k2[i]
                                + row[3] * k3[i]
                                + row[4] * k4[i]
                                + row[5] * k5[i]);
                    }
                }
            }
            let ts = t + C[stage] * h;
            if stage == 5 {
                y_new.copy_from_slice(&y_stage);
            }
            dynamics::rhs_packed(p, params, ts, &y_stage, &mut rest[..dim], &mut ws);
            stats.rhs_evaluations += 1;
        }

        // embedded error estimate
        {
            let (k2, k3, k4, k5, k6) = (
                &k[dim..2 * dim],
                &k[2 * dim..3 * dim],
                &k[3 * dim..4 * dim],
                &k[4 * dim..5 * dim],
                &k[5 * dim..6 * dim],
            );
            for i in 0..dim {
                err_vec[i] = h
                    * (E[0] * k0[i]
                        + E[2] * k2[i]
                        + E[3] * k3[i]
                        + E[4] * k4[i]
                        + E[5] * k5[i]
                        + E[6] * k6[i]);
            }
        }
        let mut err = 0.0;
        let mut finite = true;
        for i in 0..dim {
            if !y_new[i].is_finite() {
                finite = false;
                break;
            }
            let sk = params.abs_tol + params.rel_tol * y[i].abs().max(y_new[i].abs());
            let q = err_vec[i] / sk;
            err += q * q;
        }
        err = (err / dim as f64).sqrt();

        if !finite || !err.is_finite() {
            // a non-finite trial from an already huge state is divergence;
            // otherwise retry with a smaller step
            if crate::linalg::norm(&y) > 1e150 {
                return Err(Error::Divergence { t });
            }
            h *= 0.25;
            stats.rejected_steps += 1;
            last_rejected = true;
            continue;
        }

        if err <= 1.0 {
            let t_new = t + h;
            {
                let (k2, k3, k4, k5, k6) = (
                    &k[dim..2 * dim],
                    &k[2 * dim..3 * dim],
                    &k[3 * dim..4 * dim],
                    &k[4 * dim..5 * dim],
                    &k[5 * dim..6 * dim],
                );
                for i in 0..dim {
                    let dy = y_new[i] - y[i];
                    let bspl = h * k0[i] - dy;
                    cont[0][i] = y[i];
                    cont[1][i] = dy;
                    cont[2][i] = bspl;
                    cont[3][i] = dy - h * k6[i] - bspl;
                    cont[4][i] = h
                        * (D[0] * k0[i]
                            + D[2] * k2[i]
                            + D[3] * k3[i]
                            + D[4] * k4[i]
                            + D[5] * k5[i]
                            + D[6] * k6[i]);
                }
            }
            let seg = DenseSegment {
                t_old: t,
                h,
                cont: &cont,
            };
            let eps = 1e-9 * h;
            while next_sample < times.len() && times[next_sample] <= t_new + eps {
                let tq = times[next_sample];
                if (tq - t_new).abs() <= eps {
                    record(t_new, &y_new, &mut samples, &mut accels)?;
                } else {
                    seg.eval(tq, &mut y_stage);
                    record(tq, &y_stage, &mut samples, &mut accels)?;
                }
                next_sample += 1;
            }

            if crate::linalg::norm(&y_new) > 1e150 {
                return Err(Error::Divergence { t: t_new });
            }

            t = t_new;
            std::mem::swap(&mut y, &mut y_new);
            k0.copy_from_slice(&k[5 * dim..6 * dim]); // FSAL
            stats.accepted_steps += 1;

            let fac11 = err.powf(EXPO);
            let fac = (fac11 / facold.powf(PI_BETA) / SAFE).clamp(0.1, 5.0);
            facold = err.max(1e-4);
            let mut h_new = h / fac;
            if last_rejected {
                h_new = h_new.min(h);
            }
            h = h_new;
            last_rejected = false;
        } else {
            stats.rejected_steps += 1;
            h /= (err.powf(EXPO) / SAFE).max(1.0);
            last_rejected = true;
        }
    }

    // sample times numerically tied to t_end
    while next_sample < times.len() {
        record(times[next_sample], &y, &mut samples, &mut accels)?;
        next_sample += 1;
    }

    Ok(Trajectory {
        samples,
        accelerations: accels,
        stats,
    })
}

/// Standard starting-step heuristic from the scaled norms of `y0`, `f(y0)`
/// and one Euler probe.
#[allow(clippy::too_many_arguments)]
fn initial_step(
    p: &ProblemInstance,
    params: &SolverParams,
    y: &[f64],
    f0: &[f64],
    t: f64,
    t_end: f64,
    stats: &mut IntegrationStats,
    ws: &mut dynamics::RhsWorkspace,
) -> f64 {
    let dim = y.len() as f64;
    let scaled_norm = |v: &[f64], yref: &[f64]| -> f64 {
        let s: f64 = v
            .iter()
            .zip(yref)
            .map(|(vi, yi)| {
                let sk = params.abs_tol + params.rel_tol * yi.abs();
                (vi / sk) * (vi / sk)
            })
            .sum();
        (s / dim).sqrt()
    };
    let d0 = scaled_norm(y, y);
    let d1 = scaled_norm(f0, y);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(t_end - t);
    let y1: Vec<f64> = y.iter().zip(f0).map(|(yi, fi)| yi + h0 * fi).collect();
    let mut f1 = vec![0.0; y.len()];
    dynamics::rhs_packed(p, params, t + h0, &y1, &mut f1, ws);
    stats.rhs_evaluations += 1;
    let df: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = scaled_norm(&df, y) / h0;
    let dmax = d1.max(d2);
    let h1 = if dmax <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dmax).powf(0.2)
    };
    (100.0 * h0).min(h1).min(t_end - t)
}
