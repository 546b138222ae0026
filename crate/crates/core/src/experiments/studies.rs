use rayon::prelude::*;
use serde::Serialize;

use crate::algorithms::{gh_rule_on_space, mdm_build, mdm_wce, tensor_rule, tensor_rule_for_eps, MdmOptions, MdmSpace, Space};
use crate::error::{domain, Result};
use crate::hermite_basis::{gauss_hermite_rule, MAX_DEGREE};
use crate::kernels::{KernelSpec, Problem, ShapeSeq};
use crate::transference::{beta_from_sigma, sigma_from_beta};
use crate::worst_case::{optimal_rule, wce_integration_spectral, CostModel, ErrorBracket};

use super::linear_fit;

/// Spectral truncation degree that makes `beta^(degree+1)` negligible.
pub(crate) fn spectral_degree(n: usize, beta: f64) -> usize {
    let decay = (1e-40f64).ln() / beta.ln();
    (decay.ceil() as usize).max(2 * n + 40).min(MAX_DEGREE)
}

/// Worst-case integration error of the `n`-point Gauss–Hermite rule on the
/// univariate Hermite space with base `beta`.
pub fn gh_hermite_error(n: usize, beta: f64) -> Result<ErrorBracket> {
    let spec = KernelSpec::hermite(vec![beta])?;
    let rule = gh_rule_on_space(n, &spec)?;
    wce_integration_spectral(&rule, &spec, spectral_degree(n, beta))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnivariateRow {
    pub n: usize,
    pub error: f64,
    /// `(1/2)(beta/2)^{2n}(n+1)^{-2}`, times the Gaussian prefactor on the
    /// Gaussian side.
    pub t4_lower: f64,
    /// Least-squares slope of `ln error` against `n` over rows `1..=n`.
    pub rate_fit: f64,
}

/// Errors of Gauss–Hermite rules with `1..=n_max` points on the univariate
/// Hermite (`param = beta`) or Gaussian (`param = sigma`) space. The lower
/// bound uses the integration `beta` matched to `sigma`.
pub fn univariate_decay(space: Space, param: f64, n_max: usize) -> Result<Vec<UnivariateRow>> {
    if n_max == 0 {
        return Err(domain("n_max must be positive"));
    }
    let (spec, beta, prefactor) = match space {
        Space::Hermite => (KernelSpec::hermite(vec![param])?, param, 1.0),
        Space::Gaussian => {
            let beta = beta_from_sigma(Problem::Integration, param)?;
            (KernelSpec::gaussian(vec![param])?, beta, (1.0 + 4.0 * param * param).powf(-0.25))
        }
    };
    let errors = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let rule = gh_rule_on_space(n, &spec)?;
            Ok(wce_integration_spectral(&rule, &spec, spectral_degree(n, beta))?.value)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut rows = Vec::with_capacity(n_max);
    for (k, &error) in errors.iter().enumerate() {
        let n = k + 1;
        let t4 = 0.5 * (beta / 2.0).powi(2 * n as i32) / ((n + 1) as f64).powi(2);
        let x: Vec<f64> = (1..=n).map(|v| v as f64).collect();
        let y: Vec<f64> = errors[..n].iter().map(|e| e.ln()).collect();
        let rate_fit = linear_fit(&x, &y).map_or(f64::NAN, |f| f.1);
        rows.push(UnivariateRow { n, error, t4_lower: prefactor * t4, rate_fit });
    }
    Ok(rows)
}

/// Inverse of the Gaussian-side relation used by [`univariate_decay`].
pub fn gaussian_mirror_sigma(beta: f64) -> Result<f64> {
    sigma_from_beta(Problem::Integration, beta)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TensorRow {
    pub eps: f64,
    /// Per-axis sizes joined by `;`.
    pub n_choice: String,
    pub size: usize,
    /// Normalized worst-case error, the same on both spaces.
    pub error: f64,
}

/// Tensor Gauss–Hermite rules sized for each `eps`. The error comes from
/// `e² = prod (1 + e_j²) - 1` with univariate spectral errors `e_j`.
pub fn tensor_decay(sigma: &ShapeSeq, eps_list: &[f64]) -> Result<Vec<TensorRow>> {
    let betas = sigma.as_slice().iter().map(|&s| beta_from_sigma(Problem::Integration, s)).collect::<Result<Vec<_>>>()?;
    eps_list
        .par_iter()
        .map(|&eps| {
            let choice = tensor_rule_for_eps(eps, sigma, Space::Hermite)?;
            let mut log_sum = 0.0;
            for (&n, &b) in choice.sizes.iter().zip(&betas) {
                let e = gh_hermite_error(n, b)?.value;
                log_sum += (e * e).ln_1p();
            }
            let n_choice = choice.sizes.iter().map(usize::to_string).collect::<Vec<_>>().join(";");
            Ok(TensorRow { eps, n_choice, size: choice.rule.len(), error: log_sum.exp_m1().max(0.0).sqrt() })
        })
        .collect()
}

/// Normalized errors of optimally weighted `k^d`-point tensor Gauss–Hermite
/// node sets for `k = 1..=k_max`, as `(n, error)` pairs.
pub fn tensor_optimal_decay(sigma: &ShapeSeq, k_max: usize) -> Result<Vec<(usize, f64)>> {
    let spec = KernelSpec::gaussian(sigma.as_slice().to_vec())?;
    let e0 = crate::kernels::initial_error(&spec, Problem::Integration);
    (1..=k_max)
        .into_par_iter()
        .map(|k| {
            let factors = vec![gauss_hermite_rule(k)?; sigma.len()];
            let grid = tensor_rule(&factors)?;
            let (_, e2) = optimal_rule(grid.nodes(), &spec)?;
            Ok((grid.len(), e2.max(0.0).sqrt() / e0))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MdmRow {
    pub cost: f64,
    pub error: f64,
    pub tail_bound: f64,
}

/// One decomposition-method plan per budget, with its error on the
/// infinite-variate space truncated to `trunc` coordinates.
pub fn mdm_study(space: &MdmSpace, budgets: &[f64], model: &CostModel, options: MdmOptions, trunc: usize) -> Result<Vec<MdmRow>> {
    budgets
        .par_iter()
        .map(|&b| {
            let plan = mdm_build(space, b, model, options)?;
            let e = mdm_wce(&plan, space, trunc)?;
            Ok(MdmRow { cost: plan.cost(), error: e.value, tail_bound: e.tail_bound })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worst_case::wce_integration;

    #[test]
    fn gh_error_matches_gram() {
        for &b in &[0.3, 0.7] {
            let spec = KernelSpec::hermite(vec![b]).unwrap();
            for n in 1..6 {
                let s = gh_hermite_error(n, b).unwrap();
                let g = wce_integration(&gh_rule_on_space(n, &spec).unwrap(), &spec).unwrap();
                assert!((s.value - g).abs() < 1e-7, "b={b} n={n}: {} vs {g}", s.value);
            }
        }
    }

    #[test]
    fn univariate_hermite_monotone() {
        let rows = univariate_decay(Space::Hermite, 0.5, 20).unwrap();
        assert!(rows.windows(2).all(|w| w[1].error <= w[0].error));
        assert!(rows.iter().all(|r| r.error >= r.t4_lower));
        assert!(rows[0].rate_fit.is_nan());
    }

    #[test]
    fn gaussian_mirror() {
        let beta = 0.5;
        let sigma = gaussian_mirror_sigma(beta).unwrap();
        let h = univariate_decay(Space::Hermite, beta, 12).unwrap();
        let g = univariate_decay(Space::Gaussian, sigma, 12).unwrap();
        let pref = (1.0 + 4.0 * sigma * sigma).powf(-0.25);
        for (a, b) in h.iter().zip(&g) {
            assert!((b.t4_lower - pref * a.t4_lower).abs() <= 1e-13 * a.t4_lower);
            assert!(b.error >= b.t4_lower);
        }
        assert!((g[11].rate_fit - beta.ln()).abs() < 0.05, "{}", g[11].rate_fit);
        let spec = KernelSpec::gaussian(vec![sigma]).unwrap();
        let gram = wce_integration(&gh_rule_on_space(3, &spec).unwrap(), &spec).unwrap();
        assert!((gram - g[2].error).abs() < 1e-8);
    }

    #[test]
    fn tensor_rows() {
        let sigma = ShapeSeq::new(vec![1.0, 1.0]).unwrap();
        let rows = tensor_decay(&sigma, &[1e-2, 1e-4]).unwrap();
        assert_eq!(rows[0].size, rows[0].n_choice.split(';').map(|s| s.parse::<usize>().unwrap()).product::<usize>());
        assert!(rows.iter().all(|r| r.error <= r.eps.sqrt()));
    }
}
