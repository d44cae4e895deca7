//! Artifact emission: CSV time series, structured check reports, constants
//! JSON and SVG plots. Every file is written to a temporary sibling and
//! renamed into place, so a crash never leaves a partial artifact. All
//! formatting is deterministic: identical inputs give identical bytes.

use std::path::{Path, PathBuf};

use pdavd::diagnostics::{CheckStatus, ConstantsReport, LyapunovSample};
use pdavd::dynamics::SolverParams;
use pdavd::integrator::Trajectory;
use pdavd::oracle::SaddlePoint;
use pdavd::plot::{log_log_svg, Series};

use crate::CliError;

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    }
    let tmp: PathBuf = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::Config(format!("cannot rename into {}: {e}", path.display())))?;
    Ok(())
}

fn fmt(v: f64) -> String {
    format!("{v:e}")
}

/// Trajectory CSV: `t`, primal/dual positions and velocities, then the
/// fixed diagnostic block. Total columns: `1 + 2n + 2m + 11`, named in the
/// header row.
pub fn trajectory_csv(traj: &Trajectory, samples: &[LyapunovSample]) -> String {
    let n = traj.samples[0].x.len();
    let m = traj.samples[0].lambda.len();
    let mut out = String::new();
    let mut header: Vec<String> = vec!["t".into()];
    header.extend((0..n).map(|i| format!("x_{i}")));
    header.extend((0..m).map(|i| format!("lambda_{i}")));
    header.extend((0..n).map(|i| format!("xdot_{i}")));
    header.extend((0..m).map(|i| format!("lambdadot_{i}")));
    for name in [
        "E",
        "gap",
        "feas",
        "fgap",
        "velnorm",
        "W",
        "phi",
        "r_x",
        "r_lambda",
        "kkt_split_grad",
        "kkt_split_alam",
    ] {
        header.push(name.into());
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for (st, s) in traj.samples.iter().zip(samples) {
        let mut row: Vec<String> = vec![fmt(st.t)];
        row.extend(st.x.iter().map(|v| fmt(*v)));
        row.extend(st.lambda.iter().map(|v| fmt(*v)));
        row.extend(st.x_dot.iter().map(|v| fmt(*v)));
        row.extend(st.lambda_dot.iter().map(|v| fmt(*v)));
        for v in [
            s.energy,
            s.gap,
            s.feasibility,
            s.objective_gap,
            s.velocity_norm,
            s.w,
            s.phi,
            s.stationarity,
            s.feasibility,
            s.gradient_gap,
            s.adjoint_gap,
        ] {
            row.push(fmt(v));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// One uniform record per check across all requested check groups.
#[derive(Clone, Debug)]
pub struct CheckLine {
    pub status: CheckStatus,
    pub name: String,
    pub margin: Option<f64>,
    pub note: String,
}

impl CheckLine {
    pub fn new(status: CheckStatus, name: &str, margin: Option<f64>, note: String) -> Self {
        Self {
            status,
            name: name.to_string(),
            margin,
            note,
        }
    }
}

pub fn checks_text(mode: &str, lines: &[CheckLine]) -> String {
    let mut out = format!("# mode: {mode}\n# status\tcheck\tworst_margin\tnote\n");
    for l in lines {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            l.status,
            l.name,
            l.margin.map_or("-".to_string(), fmt),
            l.note
        ));
    }
    out
}

pub fn constants_json(
    params: &SolverParams,
    mode: &str,
    consts: &ConstantsReport,
    saddle: &SaddlePoint,
    traj: &Trajectory,
) -> String {
    let v = serde_json::json!({
        "alpha": params.alpha,
        "beta": params.beta,
        "theta": params.theta,
        "t0": params.t0,
        "t_end": params.t_end,
        "mode_satisfied": mode,
        "xi": consts.xi,
        "sigma": consts.sigma,
        "energy_t0": consts.energy_t0,
        "c_lag": consts.c_lag,
        "c_v": consts.c_v,
        "c_ite": consts.c_ite,
        "c_sup_bound": consts.c_sup_bound,
        "c_bnd": consts.c_bnd,
        "velocity_bound": consts.velocity_bound,
        "f_star": saddle.f_star,
        "saddle_residual": saddle.residual,
        "accepted_steps": traj.stats.accepted_steps,
        "rejected_steps": traj.stats.rejected_steps,
        "rhs_evaluations": traj.stats.rhs_evaluations,
    });
    let mut s = serde_json::to_string_pretty(&v).expect("constants serialize");
    s.push('\n');
    s
}

/// The standard plot set for one run.
pub fn run_plots(
    params: &SolverParams,
    consts: &ConstantsReport,
    traj: &Trajectory,
    samples: &[LyapunovSample],
) -> Vec<(&'static str, String)> {
    let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let theta = params.theta;
    let bound: Vec<f64> = times.iter().map(|t| consts.rate_bound(theta, *t)).collect();
    let gap: Vec<f64> = samples.iter().map(|s| s.gap.max(0.0)).collect();
    let feas: Vec<f64> = samples.iter().map(|s| s.feasibility).collect();
    let tvel: Vec<f64> = samples.iter().map(|s| s.t * s.velocity_norm).collect();
    let velocity_bound: Vec<f64> = match consts.velocity_bound {
        Some(b) => vec![b; times.len()],
        None => Vec::new(),
    };
    let grad_split: Vec<f64> = samples
        .iter()
        .map(|s| s.t.sqrt() * s.gradient_gap)
        .collect();
    let adj_split: Vec<f64> = samples.iter().map(|s| s.t.sqrt() * s.adjoint_gap).collect();
    let energy: Vec<f64> = samples.iter().map(|s| s.energy.max(0.0)).collect();
    let w: Vec<f64> = samples.iter().map(|s| s.w.max(0.0)).collect();
    let _ = traj;

    let mut plots = Vec::new();
    plots.push((
        "gap.svg",
        log_log_svg(
            "primal-dual gap vs explicit bound",
            &[
                Series {
                    label: "gap",
                    times: &times,
                    values: &gap,
                },
                Series {
                    label: "C_bnd/(theta^2 t^2)",
                    times: &times,
                    values: &bound,
                },
            ],
        ),
    ));
    plots.push((
        "feasibility.svg",
        log_log_svg(
            "feasibility measure vs explicit bound",
            &[
                Series {
                    label: "|Ax - b|",
                    times: &times,
                    values: &feas,
                },
                Series {
                    label: "C_bnd/(theta^2 t^2)",
                    times: &times,
                    values: &bound,
                },
            ],
        ),
    ));
    let mut vel_series = vec![Series {
        label: "t * |(xdot, lambdadot)|",
        times: &times,
        values: &tvel,
    }];
    if !velocity_bound.is_empty() {
        vel_series.push(Series {
            label: "velocity bound",
            times: &times,
            values: &velocity_bound,
        });
    }
    plots.push(("velocity.svg", log_log_svg("scaled velocity", &vel_series)));
    plots.push((
        "kkt.svg",
        log_log_svg(
            "sqrt(t)-scaled KKT split quantities",
            &[
                Series {
                    label: "sqrt(t) * |grad f - grad f*|",
                    times: &times,
                    values: &grad_split,
                },
                Series {
                    label: "sqrt(t) * |A*(lambda - lambda*)|",
                    times: &times,
                    values: &adj_split,
                },
            ],
        ),
    ));
    plots.push((
        "energy.svg",
        log_log_svg(
            "energy and convergence functionals",
            &[
                Series {
                    label: "E",
                    times: &times,
                    values: &energy,
                },
                Series {
                    label: "W",
                    times: &times,
                    values: &w,
                },
            ],
        ),
    ));
    plots
}
