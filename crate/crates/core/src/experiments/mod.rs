//! Convergence studies, decay-rate estimation and verification batteries
//! behind the `rkhs` command-line tool.

use serde::Serialize;

use crate::error::{domain, Error, Result};

mod studies;
pub mod verify;

pub use studies::{
    gaussian_mirror_sigma, gh_hermite_error, mdm_study, tensor_decay, tensor_optimal_decay, univariate_decay, MdmRow, TensorRow, UnivariateRow,
};

/// Fitted power law `error ≈ exp(intercept) * cost^(-exponent)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayEstimate {
    pub exponent: f64,
    pub intercept: f64,
    pub points_used: usize,
    pub r_squared: f64,
}

/// Ordinary least squares `y = a + b x`, returning `(a, b, r²)`.
pub(crate) fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let sse: f64 = x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum();
    let r2 = if syy > 0.0 { (1.0 - sse / syy).clamp(0.0, 1.0) } else { 1.0 };
    Some((a, b, r2))
}

/// Log-log least squares over the largest-cost half of `pairs` (at least
/// three points), slope negated.
pub fn decay_estimate(pairs: &[(f64, f64)]) -> Result<DecayEstimate> {
    if let Some(&(c, e)) = pairs.iter().find(|(c, e)| !(*e > 0.0) || !(*c > 0.0) || !c.is_finite() || !e.is_finite()) {
        return Err(domain(format!("decay estimation needs positive finite cost and error, got ({c}, {e})")));
    }
    if pairs.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: pairs.len() });
    }
    let mut sorted = pairs.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let used = (sorted.len() / 2).max(3);
    let window = &sorted[sorted.len() - used..];
    let x: Vec<f64> = window.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = window.iter().map(|p| p.1.ln()).collect();
    let (a, b, r2) = linear_fit(&x, &y).ok_or(Error::InsufficientData { needed: 3, got: 1 })?;
    Ok(DecayEstimate { exponent: -b, intercept: a, points_used: used, r_squared: r2 })
}

/// How the target accuracy is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    Absolute,
    /// Relative to the initial error.
    Normalized,
}

/// Smallest recorded cost reaching `eps` (or `eps * e0`), `+inf` if none.
pub fn empirical_info_complexity(curve: &[(f64, f64)], eps: f64, e0: f64, criterion: Criterion) -> f64 {
    let target = match criterion {
        Criterion::Absolute => eps,
        Criterion::Normalized => eps * e0,
    };
    curve.iter().filter(|(_, e)| *e <= target).map(|(c, _)| *c).fold(f64::INFINITY, f64::min)
}

/// `error ≈ exp(log_scale) * exp(-rate * n^power)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StretchedFit {
    pub power: f64,
    pub rate: f64,
    pub log_scale: f64,
    pub r_squared: f64,
}

/// Fits `ln e = a - c n^p` by scanning `p` over `[0.05, 2]` in steps of
/// `1e-3` and solving for `(a, c)` by least squares at each `p`.
pub fn fit_stretched_exponential(points: &[(f64, f64)]) -> Result<StretchedFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: points.len() });
    }
    if let Some(&(n, e)) = points.iter().find(|(n, e)| !(*n > 0.0) || !(*e > 0.0)) {
        return Err(domain(format!("stretched-exponential fit needs positive n and error, got ({n}, {e})")));
    }
    let y: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mut best: Option<(f64, StretchedFit)> = None;
    for k in 50..=2000 {
        let p = k as f64 * 1e-3;
        let x: Vec<f64> = points.iter().map(|q| q.0.powf(p)).collect();
        let Some((a, b, r2)) = linear_fit(&x, &y) else { continue };
        let sse: f64 = x.iter().zip(&y).map(|(u, v)| (v - a - b * u).powi(2)).sum();
        if best.as_ref().is_none_or(|(s, _)| sse < *s) {
            best = Some((sse, StretchedFit { power: p, rate: -b, log_scale: a, r_squared: r2 }));
        }
    }
    best.map(|b| b.1).ok_or(Error::InsufficientData { needed: 3, got: 1 })
}
