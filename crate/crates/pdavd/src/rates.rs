//! Log-log slope fits and asymptotic-decay verdicts for diagnostic series.
//!
//! Inertial trajectories ring, so raw series oscillate through near-zeros
//! under a decaying envelope. Decay claims are claims about the envelope;
//! when a raw fit is poor (`r² < 0.9`) the fit switches to the running
//! maximum-from-the-right envelope and reports which variant was used.

use crate::{Error, Result};

/// Values at or below this magnitude are treated as numerical zeros and
/// clamped out of fits (their count is reported).
pub const CLAMP_FLOOR: f64 = 1e-15;

/// An ordinary-least-squares fit of `log value` against `log t`.
#[derive(Clone, Debug)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    /// Samples kept by the fit after windowing and clamping.
    pub kept: usize,
    /// Positive-window samples discarded as numerical zeros.
    pub clamped: usize,
}

/// Which series the fit ran on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitVariant {
    Raw,
    Envelope,
}

impl std::fmt::Display for FitVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FitVariant::Raw => write!(f, "raw"),
            FitVariant::Envelope => write!(f, "envelope"),
        }
    }
}

fn windowed<'a>(
    times: &'a [f64],
    values: &'a [f64],
    window: (f64, f64),
) -> impl Iterator<Item = (f64, f64)> + 'a {
    times
        .iter()
        .zip(values)
        .filter(move |(t, _)| **t >= window.0 && **t <= window.1)
        .map(|(t, v)| (*t, *v))
}

/// OLS fit on `(log t, log value)` inside the window. Requires at least 8
/// positive samples; values at or below [`CLAMP_FLOOR`] are clamped out.
pub fn fit_slope(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<RateFit> {
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch {
            context: "fit_slope",
            expected: times.len(),
            actual: values.len(),
        });
    }
    let mut pts: Vec<(f64, f64)> = Vec::new();
    let mut clamped = 0usize;
    for (t, v) in windowed(times, values, window) {
        if v > CLAMP_FLOOR {
            pts.push((t.ln(), v.ln()));
        } else {
            clamped += 1;
        }
    }
    if pts.len() < 8 {
        return Err(Error::TooFewSamples {
            needed: 8,
            got: pts.len(),
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts
        .iter()
        .map(|p| {
            let e = p.1 - (intercept + slope * p.0);
            e * e
        })
        .sum();
    // a constant series (up to rounding in the log values) is fit exactly
    // by slope 0
    let r_squared = if syy <= 1e-24 * n * (1.0 + my * my) {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        window,
        kept: pts.len(),
        clamped,
    })
}

/// Maximum-from-the-right envelope: `env[k] = max(values[k..])`.
/// Nonincreasing by construction; captures the peaks of a ringing series.
pub fn max_tail_envelope(values: &[f64]) -> Vec<f64> {
    let mut env = values.to_vec();
    for k in (0..values.len().saturating_sub(1)).rev() {
        env[k] = env[k].max(env[k + 1]);
    }
    env
}

/// Fit on the running maximum envelope.
pub fn fit_envelope_slope(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<RateFit> {
    let env = max_tail_envelope(values);
    fit_slope(times, &env, window)
}

/// Raw fit when it explains the data (`r² ≥ 0.9`), envelope fit otherwise.
pub fn fit_auto(
    times: &[f64],
    values: &[f64],
    window: (f64, f64),
) -> Result<(RateFit, FitVariant)> {
    let raw = fit_slope(times, values, window)?;
    if raw.r_squared >= 0.9 {
        Ok((raw, FitVariant::Raw))
    } else {
        Ok((fit_envelope_slope(times, values, window)?, FitVariant::Envelope))
    }
}

/// Verdict of the decay check for `g(t) = t^p · value(t)`.
///
/// Decade maxima of `g` inside the window drive both verdicts, so a ringing
/// series is judged by its peaks:
///
/// * `little_o`: the latest decade maximum is strictly below the previous
///   one, and at most half of the earliest decade maximum;
/// * `big_o`: no new maximum appears in the latest decade.
#[derive(Clone, Debug)]
pub struct LittleOVerdict {
    pub little_o: bool,
    pub big_o: bool,
    /// max g over the latest decade / max g over the previous decade
    pub last_decade_ratio: f64,
    /// max g over the latest decade / max g over the earliest decade
    pub halving_ratio: f64,
    /// number of decade buckets examined
    pub decades: usize,
}

pub fn little_o_check(
    times: &[f64],
    values: &[f64],
    exponent: f64,
    window: (f64, f64),
) -> Result<LittleOVerdict> {
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch {
            context: "little_o_check",
            expected: times.len(),
            actual: values.len(),
        });
    }
    let pts: Vec<(f64, f64)> = windowed(times, values, window)
        .map(|(t, v)| (t, t.powf(exponent) * v))
        .collect();
    if pts.len() < 8 {
        return Err(Error::TooFewSamples {
            needed: 8,
            got: pts.len(),
        });
    }
    let hi = window.1;
    // decade buckets (hi/10^{j+1}, hi/10^j], newest first
    let mut maxima: Vec<f64> = Vec::new();
    let mut edge_hi = hi;
    loop {
        let edge_lo = edge_hi / 10.0;
        let mut m: Option<f64> = None;
        for (t, g) in &pts {
            if *t > edge_lo && *t <= edge_hi * (1.0 + 1e-12) {
                m = Some(m.map_or(*g, |c: f64| c.max(*g)));
            }
        }
        match m {
            Some(v) => maxima.push(v),
            None => break,
        }
        edge_hi = edge_lo;
        if edge_hi < window.0 {
            break;
        }
    }
    if maxima.len() < 2 {
        return Err(Error::InvalidDomain(
            "window must span at least two time decades".into(),
        ));
    }
    let newest = maxima[0];
    let previous = maxima[1];
    let oldest = *maxima.last().unwrap();
    let historical = maxima[1..]
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let last_decade_ratio = if previous > 0.0 { newest / previous } else { 1.0 };
    let halving_ratio = if oldest > 0.0 { newest / oldest } else { 1.0 };
    let little_o = last_decade_ratio < 1.0 - 1e-9 && halving_ratio <= 0.5;
    // bounded: no new maximum in the latest decade
    let big_o = newest <= historical * (1.0 + 1e-9);
    Ok(LittleOVerdict {
        little_o,
        big_o,
        last_decade_ratio,
        halving_ratio,
        decades: maxima.len(),
    })
}
