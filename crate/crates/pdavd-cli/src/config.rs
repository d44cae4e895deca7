//! Experiment configuration: a single TOML file with flat keys; only the
//! problem description is nested.
//!
//! ```toml
//! mode    = "strict"          # "standard" | "strict"
//! alpha   = 4.0
//! beta    = 1.0
//! theta   = 0.45
//! t0      = 1.0
//! t_end   = 1000.0
//! abs_tol = 1e-10             # optional, default 1e-10
//! rel_tol = 1e-10             # optional, default 1e-10
//! samples = 200               # optional, default 200
//! spacing = "log"             # "log" | "linear", default log
//! seed    = 42                # seeds random-qp generation
//! out_dir = "out"             # overridden by --out
//! checks  = ["lyapunov", "integrals", "rates", "kkt"]
//! x0          = [0.0, 0.0]    # optional initial conditions (default zeros)
//! lambda0     = [0.0]
//! x_dot0      = [0.0, 0.0]
//! lambda_dot0 = [0.0]
//! oracle_tol  = 1e-9          # Newton oracle tolerance for non-quadratic f
//!
//! [problem]                   # or `problem_file = "path.toml"`
//! kind       = "quadratic"    # quadratic | logistic-smooth |
//!                             # custom-registered | random-qp
//! q_matrix   = [[1.0, 0.0], [0.0, 1.0]]
//! q_linear   = [0.0, 0.0]
//! constraint = [[1.0, 1.0]]   # rows of A (row-major); [] for unconstrained
//! rhs        = [1.0]
//! blocks     = [1, 1]         # optional block sizes (separable reduction)
//! ```
//!
//! Other problem kinds:
//!
//! * `logistic-smooth` — fields `data` (rows), `offsets`, plus
//!   `constraint`/`rhs`: the objective is `Σ log(1 + exp(⟨aᵢ,x⟩ − cᵢ))`.
//! * `custom-registered` — `name` (currently `"log-cosh"`), `center`,
//!   `weight`, plus `constraint`/`rhs`.
//! * `random-qp` — `n`, `m`: seeded strongly convex instance
//!   (`Q = MᵀM + 0.1·I`, consistent right-hand side).
//!
//! A sweep adds:
//!
//! ```toml
//! [sweep]
//! alphas = [3.0, 4.0]
//! thetas = [0.5, 0.45]
//! ```

use std::path::{Path, PathBuf};

use pdavd::dynamics::{SolverParams, ValidationMode};
use pdavd::integrator::Spacing;
use pdavd::linalg::DMat;
use pdavd::problem::{
    compose_multiblock, LinearMap, ProblemInstance, QuadraticObjective, SmoothObjective,
};
use pdavd::synth;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Option<String>,
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    #[serde(default = "default_t0")]
    pub t0: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_tol")]
    pub abs_tol: f64,
    #[serde(default = "default_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    pub spacing: Option<String>,
    #[serde(default)]
    pub seed: u64,
    pub out_dir: Option<String>,
    pub checks: Option<Vec<String>>,
    pub x0: Option<Vec<f64>>,
    pub lambda0: Option<Vec<f64>>,
    pub x_dot0: Option<Vec<f64>>,
    pub lambda_dot0: Option<Vec<f64>>,
    #[serde(default = "default_oracle_tol")]
    pub oracle_tol: f64,
    pub problem: Option<ProblemSpec>,
    pub problem_file: Option<String>,
    pub sweep: Option<SweepSpec>,
}

fn default_t0() -> f64 {
    1.0
}
fn default_t_end() -> f64 {
    1e4
}
fn default_tol() -> f64 {
    1e-10
}
fn default_samples() -> usize {
    200
}
fn default_oracle_tol() -> f64 {
    1e-9
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub alphas: Vec<f64>,
    pub thetas: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemSpec {
    Quadratic {
        q_matrix: Vec<Vec<f64>>,
        q_linear: Vec<f64>,
        #[serde(default)]
        constraint: Vec<Vec<f64>>,
        #[serde(default)]
        rhs: Vec<f64>,
        blocks: Option<Vec<usize>>,
    },
    LogisticSmooth {
        data: Vec<Vec<f64>>,
        offsets: Vec<f64>,
        #[serde(default)]
        constraint: Vec<Vec<f64>>,
        #[serde(default)]
        rhs: Vec<f64>,
    },
    CustomRegistered {
        name: String,
        center: Vec<f64>,
        #[serde(default = "default_weight")]
        weight: f64,
        #[serde(default)]
        constraint: Vec<Vec<f64>>,
        #[serde(default)]
        rhs: Vec<f64>,
    },
    RandomQp {
        n: usize,
        m: usize,
    },
}

fn default_weight() -> f64 {
    1.0
}

/// The checks a run may request.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RequestedCheck {
    Lyapunov,
    Integrals,
    Rates,
    Kkt,
    Nesterov,
}

pub const DEFAULT_CHECKS: [RequestedCheck; 4] = [
    RequestedCheck::Lyapunov,
    RequestedCheck::Integrals,
    RequestedCheck::Rates,
    RequestedCheck::Kkt,
];

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("config parse error: {e}")))
    }

    pub fn validation_mode(&self, strict_flag: bool) -> Result<ValidationMode, CliError> {
        if strict_flag {
            return Ok(ValidationMode::Strict);
        }
        match self.mode.as_deref() {
            None | Some("standard") => Ok(ValidationMode::Standard),
            Some("strict") => Ok(ValidationMode::Strict),
            Some(other) => Err(CliError::Config(format!(
                "mode must be \"standard\" or \"strict\", got \"{other}\""
            ))),
        }
    }

    pub fn spacing(&self) -> Result<Spacing, CliError> {
        match self.spacing.as_deref() {
            None | Some("log") => Ok(Spacing::Log),
            Some("linear") => Ok(Spacing::Linear),
            Some(other) => Err(CliError::Config(format!(
                "spacing must be \"log\" or \"linear\", got \"{other}\""
            ))),
        }
    }

    pub fn requested_checks(&self) -> Result<Vec<RequestedCheck>, CliError> {
        match &self.checks {
            None => Ok(DEFAULT_CHECKS.to_vec()),
            Some(names) => names
                .iter()
                .map(|n| match n.as_str() {
                    "lyapunov" => Ok(RequestedCheck::Lyapunov),
                    "integrals" => Ok(RequestedCheck::Integrals),
                    "rates" => Ok(RequestedCheck::Rates),
                    "kkt" => Ok(RequestedCheck::Kkt),
                    "nesterov" => Ok(RequestedCheck::Nesterov),
                    other => Err(CliError::Config(format!("unknown check \"{other}\""))),
                })
                .collect(),
        }
    }

    /// Builds the problem instance, resolving a `problem_file` reference
    /// relative to the config location. `seed` feeds seeded problem kinds.
    pub fn build_problem(&self, config_path: &Path, seed: u64) -> Result<ProblemInstance, CliError> {
        let spec = match (&self.problem, &self.problem_file) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "give either an inline [problem] or problem_file, not both".into(),
                ))
            }
            (Some(spec), None) => return build_from_spec(spec, seed),
            (None, Some(file)) => {
                let base = config_path.parent().unwrap_or(Path::new("."));
                let path: PathBuf = base.join(file);
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    CliError::Config(format!("cannot read problem file {}: {e}", path.display()))
                })?;
                toml::from_str::<ProblemSpec>(&text)
                    .map_err(|e| CliError::Config(format!("problem file parse error: {e}")))?
            }
            (None, None) => {
                return Err(CliError::Config(
                    "missing [problem] table or problem_file".into(),
                ))
            }
        };
        build_from_spec(&spec, seed)
    }

    /// Solver parameters with config initial conditions (zeros by default).
    pub fn solver_params(&self, p: &ProblemInstance) -> Result<SolverParams, CliError> {
        let n = p.dim_primal();
        let m = p.dim_dual();
        let take = |v: &Option<Vec<f64>>, len: usize, name: &str| -> Result<Vec<f64>, CliError> {
            match v {
                None => Ok(vec![0.0; len]),
                Some(vec) if vec.len() == len => Ok(vec.clone()),
                Some(vec) => Err(CliError::Config(format!(
                    "{name} has length {}, expected {len}",
                    vec.len()
                ))),
            }
        };
        let mut params = SolverParams::new(
            self.alpha,
            self.beta,
            self.theta,
            self.t0,
            self.t_end,
            take(&self.x0, n, "x0")?,
            take(&self.lambda0, m, "lambda0")?,
        );
        params.x_dot0 = take(&self.x_dot0, n, "x_dot0")?;
        params.lambda_dot0 = take(&self.lambda_dot0, m, "lambda_dot0")?;
        params.abs_tol = self.abs_tol;
        params.rel_tol = self.rel_tol;
        params.samples = self.samples;
        Ok(params)
    }
}

fn constraint_parts(
    constraint: &[Vec<f64>],
    rhs: &[f64],
    n: usize,
) -> Result<(LinearMap, Vec<f64>), CliError> {
    if constraint.is_empty() {
        if !rhs.is_empty() {
            return Err(CliError::Config(
                "rhs given without constraint rows".into(),
            ));
        }
        return Ok((LinearMap::zero(0, n), Vec::new()));
    }
    let a = LinearMap::from_rows(constraint)
        .map_err(|e| CliError::Config(format!("bad constraint matrix: {e}")))?;
    if a.cols() != n {
        return Err(CliError::Config(format!(
            "constraint has {} columns, objective dimension is {n}",
            a.cols()
        )));
    }
    if rhs.len() != a.rows() {
        return Err(CliError::Config(format!(
            "rhs has length {}, constraint has {} rows",
            rhs.len(),
            a.rows()
        )));
    }
    Ok((a, rhs.to_vec()))
}

fn build_from_spec(spec: &ProblemSpec, seed: u64) -> Result<ProblemInstance, CliError> {
    match spec {
        ProblemSpec::Quadratic {
            q_matrix,
            q_linear,
            constraint,
            rhs,
            blocks,
        } => {
            let q = DMat::from_rows(q_matrix)
                .map_err(|e| CliError::Config(format!("bad q_matrix: {e}")))?;
            let quad = QuadraticObjective::new(q, q_linear.clone())
                .map_err(|e| CliError::Config(format!("bad quadratic objective: {e}")))?;
            let n = quad.dim();
            let (a, b) = constraint_parts(constraint, rhs, n)?;
            match blocks {
                None => ProblemInstance::new(SmoothObjective::quadratic(quad), a, b)
                    .map_err(|e| CliError::Config(e.to_string())),
                Some(sizes) => build_blocked_quadratic(&quad, &a, b, sizes),
            }
        }
        ProblemSpec::LogisticSmooth {
            data,
            offsets,
            constraint,
            rhs,
        } => {
            let d = DMat::from_rows(data)
                .map_err(|e| CliError::Config(format!("bad data matrix: {e}")))?;
            let n = d.cols();
            let obj = SmoothObjective::logistic_smooth(d, offsets.clone())
                .map_err(|e| CliError::Config(e.to_string()))?;
            let (a, b) = constraint_parts(constraint, rhs, n)?;
            ProblemInstance::new(obj, a, b).map_err(|e| CliError::Config(e.to_string()))
        }
        ProblemSpec::CustomRegistered {
            name,
            center,
            weight,
            constraint,
            rhs,
        } => {
            let obj = registered_objective(name, center.clone(), *weight)?;
            let n = obj.dim();
            let (a, b) = constraint_parts(constraint, rhs, n)?;
            ProblemInstance::new(obj, a, b).map_err(|e| CliError::Config(e.to_string()))
        }
        ProblemSpec::RandomQp { n, m } => Ok(synth::random_qp(seed, *n, *m)),
    }
}

/// Slices a block-diagonal quadratic objective and the constraint columns
/// into the separable composition.
fn build_blocked_quadratic(
    quad: &QuadraticObjective,
    a: &LinearMap,
    b: Vec<f64>,
    sizes: &[usize],
) -> Result<ProblemInstance, CliError> {
    let n: usize = sizes.iter().sum();
    if n != quad.dim() {
        return Err(CliError::Config(format!(
            "block sizes sum to {n}, objective dimension is {}",
            quad.dim()
        )));
    }
    // verify Q is block diagonal to the declared structure
    let q = quad.matrix();
    let mut offsets = vec![0usize];
    for s in sizes {
        offsets.push(offsets.last().unwrap() + s);
    }
    for i in 0..n {
        for j in 0..n {
            let bi = offsets.iter().position(|&o| o > i).unwrap() - 1;
            let bj = offsets.iter().position(|&o| o > j).unwrap() - 1;
            if bi != bj && q.get(i, j).abs() > 1e-12 {
                return Err(CliError::Config(format!(
                    "q_matrix is not block diagonal with respect to blocks at ({i}, {j})"
                )));
            }
        }
    }
    let m = a.rows();
    let mut parts = Vec::with_capacity(sizes.len());
    for (k, &s) in sizes.iter().enumerate() {
        let off = offsets[k];
        let mut qb = DMat::zeros(s, s);
        for i in 0..s {
            for j in 0..s {
                qb.set(i, j, q.get(off + i, off + j));
            }
        }
        let lin = quad.linear()[off..off + s].to_vec();
        let quad_b = QuadraticObjective::new(qb, lin)
            .map_err(|e| CliError::Config(format!("block {k}: {e}")))?;
        let mut ab = DMat::zeros(m, s);
        for i in 0..m {
            for j in 0..s {
                ab.set(i, j, a.matrix().get(i, off + j));
            }
        }
        parts.push((SmoothObjective::quadratic(quad_b), LinearMap::new(ab)));
    }
    compose_multiblock(parts, b).map_err(|e| CliError::Config(e.to_string()))
}

/// Code-level objective registry for `kind = "custom-registered"`.
fn registered_objective(
    name: &str,
    center: Vec<f64>,
    weight: f64,
) -> Result<SmoothObjective, CliError> {
    match name {
        // w·Σ log cosh(xᵢ − cᵢ): smooth, convex, ∇ is w-Lipschitz
        "log-cosh" => {
            if weight <= 0.0 {
                return Err(CliError::Config("log-cosh weight must be > 0".into()));
            }
            let n = center.len();
            let c1 = center.clone();
            let value = move |x: &[f64]| -> f64 {
                x.iter()
                    .zip(&c1)
                    .map(|(xi, ci)| {
                        let z: f64 = xi - ci;
                        // ln cosh(z) without overflow
                        z.abs() + (-2.0 * z.abs()).exp().ln_1p() - std::f64::consts::LN_2
                    })
                    .sum::<f64>()
                    * weight
            };
            let c2 = center;
            let gradient = move |x: &[f64]| -> Vec<f64> {
                x.iter()
                    .zip(&c2)
                    .map(|(xi, ci)| weight * (xi - ci).tanh())
                    .collect()
            };
            Ok(SmoothObjective::custom(n, weight, value, gradient))
        }
        other => Err(CliError::Config(format!(
            "no registered objective named \"{other}\" (available: log-cosh)"
        ))),
    }
}
