use crate::error::{domain, shape, Error, Result};
use crate::hermite_basis::{gauss_hermite_rule, QuadratureRule1D};
use crate::kernels::{KernelSpec, ShapeSeq};
use crate::transference::transfer_quadrature_to_gaussian;
use crate::worst_case::{Nodes, QuadratureRule};

use super::Space;

/// Largest node count any tensor or sparse-grid builder will materialize.
pub const TENSOR_BUDGET: usize = 1_000_000;

/// The `n`-point Gauss–Hermite rule as a rule on the univariate space of
/// `spec`.
pub fn gh_rule_on_space(n: usize, spec: &KernelSpec) -> Result<QuadratureRule> {
    if spec.dimension() != 1 {
        return Err(shape(format!("expected a univariate kernel, got dimension {}", spec.dimension())));
    }
    Ok(lift_1d(&gauss_hermite_rule(n)?))
}

pub(crate) fn lift_1d(rule: &QuadratureRule1D) -> QuadratureRule {
    let nodes = Nodes::new(1, rule.nodes().to_vec()).expect("univariate nodes");
    QuadratureRule::new(nodes, rule.weights().to_vec()).expect("matching lengths")
}

/// Full product grid, first coordinate varying slowest.
pub fn tensor_rule(factors: &[QuadratureRule1D]) -> Result<QuadratureRule> {
    if factors.is_empty() {
        return Err(shape("tensor rule needs at least one factor"));
    }
    let mut size = 1usize;
    for f in factors {
        size = size.checked_mul(f.len()).filter(|s| *s <= TENSOR_BUDGET).ok_or_else(|| {
            Error::Budget(format!(
                "tensor rule with factor sizes {:?} exceeds {TENSOR_BUDGET} nodes",
                factors.iter().map(QuadratureRule1D::len).collect::<Vec<_>>()
            ))
        })?;
    }
    if size == 0 {
        return Err(shape("tensor factor with no nodes"));
    }
    let d = factors.len();
    let mut data = Vec::with_capacity(size * d);
    let mut weights = Vec::with_capacity(size);
    let mut idx = vec![0usize; d];
    for _ in 0..size {
        let mut w = 1.0;
        for (j, f) in factors.iter().enumerate() {
            data.push(f.nodes()[idx[j]]);
            w *= f.weights()[idx[j]];
        }
        weights.push(w);
        for j in (0..d).rev() {
            idx[j] += 1;
            if idx[j] < factors[j].len() {
                break;
            }
            idx[j] = 0;
        }
    }
    QuadratureRule::new(Nodes::new(d, data)?, weights)
}

/// Tensor Gauss–Hermite rule chosen for a target accuracy.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorChoice {
    /// Points per coordinate.
    pub sizes: Vec<usize>,
    /// `zeta_j = ln(1 + 1 / (2 sigma_j²))`.
    pub zeta: Vec<f64>,
    /// `sum_j exp(-n_j zeta_j)`, at most `eps`.
    pub bound: f64,
    pub rule: QuadratureRule,
}

/// Picks `n_j = ceil(ln(d / eps) / zeta_j)` and builds the tensor
/// Gauss–Hermite rule on the Hermite twin of `sigma`; for [`Space::Gaussian`]
/// the rule is carried back through the integration transference.
pub fn tensor_rule_for_eps(eps: f64, sigma: &ShapeSeq, space: Space) -> Result<TensorChoice> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(domain(format!("eps must lie in (0, 1), got {eps}")));
    }
    let d = sigma.len();
    let target = (d as f64 / eps).ln();
    let zeta: Vec<f64> = sigma.as_slice().iter().map(|s| (1.0 / (2.0 * s * s)).ln_1p()).collect();
    let mut sizes = Vec::with_capacity(d);
    for &z in &zeta {
        let mut n = ((target / z).ceil() as usize).max(1);
        while (-(n as f64) * z).exp() > eps / d as f64 {
            n += 1;
        }
        sizes.push(n);
    }
    let mut total = 1usize;
    for (j, &n) in sizes.iter().enumerate() {
        total = total.checked_mul(n).filter(|t| *t <= TENSOR_BUDGET).ok_or_else(|| {
            Error::Budget(format!("n_{} = {n} pushes the tensor size past {TENSOR_BUDGET} (choices {sizes:?})", j + 1))
        })?;
    }
    let factors = sizes.iter().map(|&n| gauss_hermite_rule(n)).collect::<Result<Vec<_>>>()?;
    let hermite = tensor_rule(&factors)?;
    let rule = match space {
        Space::Hermite => hermite,
        Space::Gaussian => transfer_quadrature_to_gaussian(&hermite, sigma)?,
    };
    let bound = sizes.iter().zip(&zeta).map(|(&n, z)| (-(n as f64) * z).exp()).sum();
    Ok(TensorChoice { sizes, zeta, bound, rule })
}
