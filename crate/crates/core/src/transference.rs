//! Correspondence between Gaussian-kernel and Hermite-kernel spaces: the
//! shape/base parameter relations, the weighted dilation `Q_c`, and explicit
//! bijections between algorithms on the two spaces that scale worst-case
//! errors by a known constant.
//!
//! For integration the relation is `1 - beta = 1 / (1 + 2 sigma²)`, for
//! L²-approximation it is `1 - beta = 2 / (1 + sqrt(1 + 8 sigma²))`.

use crate::error::{domain, shape, Result};
use crate::kernels::{initial_error, BaseSeq, KernelSpec, Problem, ShapeSeq};
use crate::worst_case::{QuadratureRule, SamplingMethod};

/// Base parameter matched to the shape parameter `sigma` for `problem`.
pub fn beta_from_sigma(problem: Problem, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(domain(format!("shape parameter must be positive and finite, got {sigma}")));
    }
    let s2 = sigma * sigma;
    Ok(match problem {
        Problem::Integration => 2.0 * s2 / (1.0 + 2.0 * s2),
        Problem::Approximation => {
            // 1 - 2/(1+r) = (r-1)/(r+1) = 8 sigma² / (1+r)², no cancellation
            let r = (1.0 + 8.0 * s2).sqrt();
            8.0 * s2 / ((1.0 + r) * (1.0 + r))
        }
    })
}

/// Inverse of [`beta_from_sigma`].
pub fn sigma_from_beta(problem: Problem, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(domain(format!("base parameter must lie in (0, 1), got {beta}")));
    }
    Ok(match problem {
        Problem::Integration => (beta / (2.0 * (1.0 - beta))).sqrt(),
        Problem::Approximation => (beta / 2.0).sqrt() / (1.0 - beta),
    })
}

/// All constants tying a Gaussian space `H(L_sigma)` to its Hermite twin for
/// one problem.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferConstants {
    pub problem: Problem,
    pub sigma: ShapeSeq,
    pub beta: BaseSeq,
    /// Dilation of `Q_c`.
    pub c: Vec<f64>,
    /// Integration only: `tau_j = (1 + 2 sigma_j²)^{1/2}`.
    pub tau: Option<Vec<f64>>,
    /// Integration only: node scaling `e_j = c_j / tau_j`.
    pub e: Option<Vec<f64>>,
    /// `e(A, L_sigma) = gauss_prefactor * e(B, K_beta)`.
    pub gauss_prefactor: f64,
}

impl TransferConstants {
    pub fn new(problem: Problem, sigma: &ShapeSeq) -> Result<Self> {
        let s = sigma.as_slice();
        let beta = BaseSeq::new(s.iter().map(|&sg| beta_from_sigma(problem, sg)).collect::<Result<_>>()?)?;
        Ok(match problem {
            Problem::Integration => {
                let c: Vec<f64> = s.iter().map(|&sg| (1.0 + 4.0 * sg * sg).sqrt()).collect();
                let tau: Vec<f64> = s.iter().map(|&sg| (1.0 + 2.0 * sg * sg).sqrt()).collect();
                let e = c.iter().zip(&tau).map(|(c, t)| c / t).collect();
                let gauss_prefactor = s.iter().map(|&sg| (1.0 + 4.0 * sg * sg).powf(-0.25)).product();
                Self { problem, sigma: sigma.clone(), beta, c, tau: Some(tau), e: Some(e), gauss_prefactor }
            }
            Problem::Approximation => {
                let c = s.iter().map(|&sg| (1.0 + 8.0 * sg * sg).powf(0.25)).collect();
                let gauss_prefactor = beta.as_slice().iter().map(|b| (1.0 - b).sqrt()).product();
                Self { problem, sigma: sigma.clone(), beta, c, tau: None, e: None, gauss_prefactor }
            }
        })
    }

    pub fn gaussian_spec(&self) -> KernelSpec {
        KernelSpec::from_family(crate::kernels::Family::Gaussian(self.sigma.clone()))
    }

    pub fn hermite_spec(&self) -> KernelSpec {
        KernelSpec::from_family(crate::kernels::Family::Hermite(self.beta.clone()))
    }

    pub fn dimension(&self) -> usize {
        self.sigma.len()
    }

    /// Consistency of the prefactor with the closed-form initial error.
    pub fn prefactor_residual(&self) -> f64 {
        let e0 = initial_error(&self.gaussian_spec(), self.problem);
        (self.gauss_prefactor - e0).abs() / e0
    }

    fn integration_parts(&self) -> Result<(&[f64], f64)> {
        match &self.e {
            Some(e) => Ok((e, e.iter().product())),
            None => Err(domain("quadrature transfer needs integration constants")),
        }
    }

    /// `phi_c(tau^{-1} x) = exp(-sum_j sigma_j² x_j² / (1 + 2 sigma_j²))`.
    fn integration_density(&self, x: &[f64]) -> f64 {
        let s = self.sigma.as_slice();
        let expo: f64 = s.iter().zip(x).map(|(&sg, &xj)| sg * sg * xj * xj / (1.0 + 2.0 * sg * sg)).sum();
        (-expo).exp()
    }
}

fn check_len(c: &[f64], x: &[f64]) -> Result<()> {
    if c.len() != x.len() {
        return Err(shape(format!("dilation has {} entries, point has {}", c.len(), x.len())));
    }
    Ok(())
}

/// `phi_c(x) = exp(-sum_j (c_j² - 1) / 4 * x_j²)`.
pub fn phi_c(c: &[f64], x: &[f64]) -> Result<f64> {
    check_len(c, x)?;
    Ok(phi_c_unchecked(c, x))
}

pub(crate) fn phi_c_unchecked(c: &[f64], x: &[f64]) -> f64 {
    let expo: f64 = c.iter().zip(x).map(|(&cj, &xj)| (cj * cj - 1.0) / 4.0 * xj * xj).sum();
    (-expo).exp()
}

/// `(Q_c f)(x) = c_*^{1/2} phi_c(x) f(c x)`.
pub fn q_c_apply<F: Fn(&[f64]) -> f64>(c: &[f64], f: F, x: &[f64]) -> Result<f64> {
    check_len(c, x)?;
    let cx: Vec<f64> = c.iter().zip(x).map(|(a, b)| a * b).collect();
    let cstar: f64 = c.iter().product();
    Ok(cstar.sqrt() * phi_c_unchecked(c, x) * f(&cx))
}

/// `(Q_c^{-1} f)(x) = f(c^{-1} x) / (c_*^{1/2} phi_c(c^{-1} x))`.
pub fn q_c_inverse_apply<F: Fn(&[f64]) -> f64>(c: &[f64], f: F, x: &[f64]) -> Result<f64> {
    check_len(c, x)?;
    let cinv_x: Vec<f64> = c.iter().zip(x).map(|(a, b)| b / a).collect();
    let cstar: f64 = c.iter().product();
    Ok(f(&cinv_x) / (cstar.sqrt() * phi_c_unchecked(c, &cinv_x)))
}

fn check_rule_dim(dim: usize, k: &TransferConstants) -> Result<()> {
    if dim != k.dimension() {
        return Err(shape(format!("algorithm has dimension {dim}, shape sequence has {}", k.dimension())));
    }
    Ok(())
}

/// Quadrature rule on `H(K_beta)` with `e(A, L_sigma) = prefactor * e(B, K_beta)`:
/// nodes `y_i = e ∘ x_i`, weights `e_* phi_c(tau^{-1} x_i) a_i`. The global
/// factor `e_*` is folded into the weights.
pub fn transfer_quadrature_to_hermite(rule: &QuadratureRule, sigma: &ShapeSeq) -> Result<QuadratureRule> {
    let k = TransferConstants::new(Problem::Integration, sigma)?;
    transfer_quadrature_to_hermite_with(rule, &k)
}

pub fn transfer_quadrature_to_hermite_with(rule: &QuadratureRule, k: &TransferConstants) -> Result<QuadratureRule> {
    check_rule_dim(rule.dim(), k)?;
    let (e, estar) = k.integration_parts()?;
    let nodes = rule.nodes().map_rows(|x| x.iter().zip(e).map(|(a, b)| a * b).collect());
    let weights = rule
        .weights()
        .iter()
        .enumerate()
        .map(|(i, &a)| estar * k.integration_density(rule.nodes().row(i)) * a)
        .collect();
    QuadratureRule::new(nodes, weights)
}

/// Inverse of [`transfer_quadrature_to_hermite`].
pub fn transfer_quadrature_to_gaussian(rule: &QuadratureRule, sigma: &ShapeSeq) -> Result<QuadratureRule> {
    let k = TransferConstants::new(Problem::Integration, sigma)?;
    transfer_quadrature_to_gaussian_with(rule, &k)
}

pub fn transfer_quadrature_to_gaussian_with(rule: &QuadratureRule, k: &TransferConstants) -> Result<QuadratureRule> {
    check_rule_dim(rule.dim(), k)?;
    let (e, estar) = k.integration_parts()?;
    let nodes = rule.nodes().map_rows(|y| y.iter().zip(e).map(|(a, b)| a / b).collect());
    let weights = rule
        .weights()
        .iter()
        .enumerate()
        .map(|(i, &w)| w / (estar * k.integration_density(nodes.row(i))))
        .collect();
    QuadratureRule::new(nodes, weights)
}

fn approximation_constants(method: &SamplingMethod, sigma: &ShapeSeq) -> Result<TransferConstants> {
    let k = TransferConstants::new(Problem::Approximation, sigma)?;
    check_rule_dim(method.dim(), &k)?;
    if method.index_set().dim() != k.dimension() {
        return Err(shape("index set dimension differs from the shape sequence"));
    }
    Ok(k)
}

/// Sampling method `Q_c^{-1} A Q_c` on `H(K_beta)`.
///
/// Coefficient functions are stored in each space's eigenbasis (tensor
/// Hermite polynomials on the Hermite side, their images under `Q_c` on the
/// Gaussian side), so the map is node dilation `y_i = c ∘ x_i` plus scaling
/// row `i` of the coefficient table by `c_*^{1/2} phi_c(x_i)`.
pub fn transfer_sampling_to_hermite(method: &SamplingMethod, sigma: &ShapeSeq) -> Result<SamplingMethod> {
    let k = approximation_constants(method, sigma)?;
    let c = &k.c;
    let root: f64 = c.iter().product::<f64>().sqrt();
    let nodes = method.nodes().map_rows(|x| x.iter().zip(c).map(|(a, b)| a * b).collect());
    let factors: Vec<f64> = (0..method.len()).map(|i| root * phi_c_unchecked(c, method.nodes().row(i))).collect();
    SamplingMethod::new(nodes, method.index_set().clone(), method.scaled_rows(&factors))
}

/// Inverse of [`transfer_sampling_to_hermite`].
pub fn transfer_sampling_to_gaussian(method: &SamplingMethod, sigma: &ShapeSeq) -> Result<SamplingMethod> {
    let k = approximation_constants(method, sigma)?;
    let c = &k.c;
    let root: f64 = c.iter().product::<f64>().sqrt();
    let nodes = method.nodes().map_rows(|y| y.iter().zip(c).map(|(a, b)| a / b).collect());
    let factors: Vec<f64> = (0..method.len()).map(|i| 1.0 / (root * phi_c_unchecked(c, nodes.row(i)))).collect();
    SamplingMethod::new(nodes, method.index_set().clone(), method.scaled_rows(&factors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite_basis::hermite_normalized;
    use crate::worst_case::{wce_integration, MultiIndexSet, Nodes};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn parameter_relations() {
        let i = Problem::Integration;
        let a = Problem::Approximation;
        assert!(rel(beta_from_sigma(i, 0.5f64.sqrt()).unwrap(), 0.5) < 1e-15);
        assert!(rel(beta_from_sigma(a, 1.0).unwrap(), 0.5) < 1e-15);
        assert!(rel(beta_from_sigma(i, 1.0).unwrap(), 2.0 / 3.0) < 1e-15);
        assert!(rel(sigma_from_beta(i, 0.5).unwrap(), 0.5f64.sqrt()) < 1e-15);
        assert!(rel(sigma_from_beta(a, 0.5).unwrap(), 1.0) < 1e-15);
        assert!(rel(sigma_from_beta(i, 2.0 / 3.0).unwrap(), 1.0) < 1e-15);
        assert!(beta_from_sigma(i, 0.0).is_err());
        assert!(beta_from_sigma(a, -1.0).is_err());
        assert!(sigma_from_beta(i, 1.0).is_err());
        assert!(sigma_from_beta(a, 0.0).is_err());
    }

    #[test]
    fn relations_are_increasing() {
        for p in [Problem::Integration, Problem::Approximation] {
            let mut last = 0.0;
            for k in 1..200 {
                let b = beta_from_sigma(p, 0.02 * k as f64).unwrap();
                assert!(b > last);
                last = b;
            }
        }
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_c(&[2.0, 3.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert!(rel(phi_c(&[3f64.sqrt()], &[1.0]).unwrap(), (-0.5f64).exp()) < 1e-15);
        assert_eq!(phi_c(&[1.0], &[7.0]).unwrap(), 1.0);
        assert!(phi_c(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn q_c_examples() {
        let c = [3f64.sqrt()];
        assert!(rel(q_c_apply(&c, |_| 1.0, &[0.0]).unwrap(), 3f64.powf(0.25)) < 1e-15);
        let v = q_c_apply(&c, |x| hermite_normalized(1, x[0]).unwrap(), &[1.0]).unwrap();
        // c_*^{1/2} phi_c(1) h_1(sqrt 3)
        assert!(rel(v, 3f64.powf(0.25) * (-0.5f64).exp() * 3f64.sqrt()) < 1e-15);
        assert!(rel(v, 1.382_590_92) < 1e-8);
        let f = |x: &[f64]| 1.0 + 0.5 * x[0] - x[1] * x[1] * x[0];
        let c2 = [1.3, 0.7];
        for x in [[0.2, -1.0], [1.5, 0.5], [-2.0, 3.0]] {
            let back = q_c_inverse_apply(&c2, |y| q_c_apply(&c2, f, y).unwrap(), &x).unwrap();
            assert!(rel(back, f(&x)) < 1e-12);
        }
    }

    #[test]
    fn constants_consistent() {
        let sigma = ShapeSeq::new(vec![0.1, 0.7, 2.5]).unwrap();
        for p in [Problem::Integration, Problem::Approximation] {
            let k = TransferConstants::new(p, &sigma).unwrap();
            assert!(k.prefactor_residual() < 1e-13);
            for (j, &s) in sigma.as_slice().iter().enumerate() {
                let b = k.beta.get(j);
                match p {
                    Problem::Integration => {
                        assert!(rel(1.0 - b, 1.0 / (1.0 + 2.0 * s * s)) < 1e-14);
                        let (t, e) = (k.tau.as_ref().unwrap()[j], k.e.as_ref().unwrap()[j]);
                        assert!(rel(e, ((1.0 + 4.0 * s * s) / (1.0 + 2.0 * s * s)).sqrt()) < 1e-15);
                        assert!(rel(t * t, (k.c[j] * k.c[j] + 1.0) / 2.0) < 1e-14);
                    }
                    Problem::Approximation => {
                        assert!(rel(k.c[j], (1.0 + 8.0 * s * s).powf(0.25)) < 1e-15);
                        assert!(k.tau.is_none());
                    }
                }
            }
        }
    }

    #[test]
    fn quadrature_transfer_examples() {
        let sigma = ShapeSeq::new(vec![0.5f64.sqrt()]).unwrap();
        let a = QuadratureRule::new(Nodes::from_rows(vec![vec![0.0]]).unwrap(), vec![0.5f64.sqrt()]).unwrap();
        let b = transfer_quadrature_to_hermite(&a, &sigma).unwrap();
        assert_eq!(b.nodes().row(0), &[0.0]);
        assert!(rel(b.weights()[0], 3f64.sqrt() / 2.0) < 1e-15);
        let herm = KernelSpec::hermite(vec![0.5]).unwrap();
        let gauss = KernelSpec::gaussian(vec![0.5f64.sqrt()]).unwrap();
        let eb = wce_integration(&b, &herm).unwrap();
        let ea = wce_integration(&a, &gauss).unwrap();
        assert!(rel(eb, (3f64.sqrt() - 1.0) / 2.0) < 1e-12);
        assert!(rel(ea, 0.278_119_17) < 1e-7);
        assert!(rel(ea, 3f64.powf(-0.25) * eb) < 1e-12);

        let a1 = QuadratureRule::new(Nodes::from_rows(vec![vec![1.0]]).unwrap(), vec![1.0]).unwrap();
        let b1 = transfer_quadrature_to_hermite(&a1, &sigma).unwrap();
        assert!(rel(b1.nodes().row(0)[0], 1.5f64.sqrt()) < 1e-15);
        assert!(rel(b1.weights()[0], 1.5f64.sqrt() * (-0.25f64).exp()) < 1e-15);
        let ea1 = wce_integration(&a1, &gauss).unwrap();
        let eb1 = wce_integration(&b1, &herm).unwrap();
        assert!(rel(ea1, 3f64.powf(-0.25) * eb1) < 1e-12);

        let back = transfer_quadrature_to_gaussian(&b, &sigma).unwrap();
        assert!(rel(back.weights()[0], 0.5f64.sqrt()) < 1e-15);
    }

    #[test]
    fn zero_rule_maps_to_zero_rule() {
        let sigma = ShapeSeq::new(vec![0.4, 1.1]).unwrap();
        let a = QuadratureRule::new(Nodes::from_rows(vec![vec![0.3, -0.2], vec![1.0, 0.0]]).unwrap(), vec![0.0, 0.0]).unwrap();
        let b = transfer_quadrature_to_hermite(&a, &sigma).unwrap();
        assert!(b.weights().iter().all(|w| *w == 0.0));
        let k = TransferConstants::new(Problem::Integration, &sigma).unwrap();
        let ea = wce_integration(&a, &k.gaussian_spec()).unwrap();
        let eb = wce_integration(&b, &k.hermite_spec()).unwrap();
        assert!(rel(ea / eb, k.gauss_prefactor) < 1e-14);
        let back = transfer_quadrature_to_gaussian(&b, &sigma).unwrap();
        assert!(back.weights().iter().all(|w| *w == 0.0));
    }

    #[test]
    fn dimension_mismatch() {
        let sigma = ShapeSeq::new(vec![0.4, 1.1]).unwrap();
        let a = QuadratureRule::new(Nodes::from_rows(vec![vec![0.3]]).unwrap(), vec![1.0]).unwrap();
        assert!(transfer_quadrature_to_hermite(&a, &sigma).is_err());
        let lam = MultiIndexSet::box_set(&[3]).unwrap();
        let m = SamplingMethod::new(Nodes::from_rows(vec![vec![0.0]]).unwrap(), lam, vec![0.0; 4]).unwrap();
        assert!(transfer_sampling_to_hermite(&m, &sigma).is_err());
    }

    #[test]
    fn sampling_node_at_origin() {
        let sigma = ShapeSeq::new(vec![1.0]).unwrap();
        let lam = MultiIndexSet::box_set(&[4]).unwrap();
        let mut coeffs = vec![0.0; 5];
        coeffs[0] = 1.0;
        let a = SamplingMethod::new(Nodes::from_rows(vec![vec![0.0]]).unwrap(), lam, coeffs.clone()).unwrap();
        let b = transfer_sampling_to_hermite(&a, &sigma).unwrap();
        assert_eq!(b.nodes().row(0), &[0.0]);
        // c = 9^{1/4} = sqrt 3, so the row picks up c_*^{1/2} = 3^{1/4}
        assert!(rel(b.coeffs()[0], 3f64.powf(0.25)) < 1e-15);
        assert!(b.coeffs()[1..].iter().all(|v| *v == 0.0));
        let back = transfer_sampling_to_gaussian(&b, &sigma).unwrap();
        assert!(rel(back.coeffs()[0], 1.0) < 1e-15);
    }
}
