//! Orthonormal probabilists' Hermite polynomials and Gauss–Hermite rules for
//! the standard normal distribution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{compensated_sum, tridiagonal_eigen};

/// Largest supported polynomial degree.
pub const MAX_DEGREE: usize = 512;
/// Largest supported Gauss–Hermite rule.
pub const MAX_RULE_SIZE: usize = 256;

fn check_degree(nu: usize) -> Result<()> {
    if nu > MAX_DEGREE {
        return Err(Error::UnsupportedDegree { degree: nu, max: MAX_DEGREE });
    }
    Ok(())
}

/// `h_nu(x)` for the Hermite polynomial normalized in L² of the standard
/// normal distribution, via the normalized three-term recurrence.
pub fn hermite_normalized(nu: usize, x: f64) -> Result<f64> {
    check_degree(nu)?;
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..nu {
        let next = (x * cur - (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `(h_0(x), ..., h_{nu_max}(x))` in one recurrence pass. Entries are
/// bitwise identical to [`hermite_normalized`].
pub fn hermite_row(nu_max: usize, x: f64) -> Result<Vec<f64>> {
    check_degree(nu_max)?;
    Ok(hermite_row_unchecked(nu_max, x))
}

pub(crate) fn hermite_row_unchecked(nu_max: usize, x: f64) -> Vec<f64> {
    let mut row = Vec::with_capacity(nu_max + 1);
    let (mut prev, mut cur) = (0.0, 1.0);
    row.push(cur);
    for k in 0..nu_max {
        let next = (x * cur - (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
        prev = cur;
        cur = next;
        row.push(cur);
    }
    row
}

/// `ln sum_{k<n} h_k(x)^2`, evaluated on the rescaled family
/// `h_k(x) exp(-x²/4)` (bounded by 1) so it cannot overflow.
fn log_christoffel_sum(n: usize, x: f64) -> f64 {
    let scale = -x * x / 4.0;
    let (mut prev, mut cur) = (0.0, scale.exp());
    let mut acc = cur * cur;
    for k in 0..n.saturating_sub(1) {
        let next = (x * cur - (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
        prev = cur;
        cur = next;
        acc += cur * cur;
    }
    acc.ln() - 2.0 * scale
}

/// A univariate quadrature rule for the standard normal distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule1D {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule1D {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::Shape(format!(
                "rule needs matching non-empty node/weight lists, got {} and {}",
                nodes.len(),
                weights.len()
            )));
        }
        Ok(Self { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum_k w_k f(x_k)`, left to right.
    pub fn apply<F: FnMut(f64) -> f64>(&self, mut f: F) -> Result<f64> {
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let v = f(x);
            if !v.is_finite() {
                return Err(Error::Evaluation(format!("integrand is not finite at node {x}")));
            }
            acc += w * v;
        }
        Ok(acc)
    }
}

/// The `n`-point Gauss–Hermite rule for the standard normal distribution.
///
/// Nodes are the eigenvalues of the Jacobi matrix (zero diagonal,
/// off-diagonal `sqrt(1), ..., sqrt(n-1)`), computed by implicit QL. Weights
/// are the squared first eigenvector components, evaluated through the
/// equivalent Christoffel form `1 / sum_k h_k(x_i)^2` so that the tiny
/// weights of the outermost nodes keep full relative accuracy. Nodes and
/// weights are symmetrized exactly; for odd `n` the middle node is exactly 0.
pub fn gauss_hermite_rule(n: usize) -> Result<QuadratureRule1D> {
    if n == 0 || n > MAX_RULE_SIZE {
        return Err(Error::UnsupportedSize { size: n, max: MAX_RULE_SIZE });
    }
    let diag = vec![0.0; n];
    let off: Vec<f64> = (1..n).map(|k| (k as f64).sqrt()).collect();
    let eig = tridiagonal_eigen(&diag, &off, true)?;
    let mut nodes = eig.values;
    let first = eig.first_components.expect("first components requested");

    let mut weights: Vec<f64> = nodes.iter().map(|&x| (-log_christoffel_sum(n, x)).exp()).collect();
    for (i, (&w, &z)) in weights.iter().zip(&first).enumerate() {
        if !((w - z * z).abs() <= 1e-10) {
            return Err(Error::Numerical(format!(
                "Gauss-Hermite weight {i} of {n}: Christoffel value {w:.6e} disagrees with eigenvector value {:.6e}",
                z * z
            )));
        }
    }

    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        nodes[i] = -x;
        nodes[j] = x;
        let w = 0.5 * (weights[i] + weights[j]);
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    let total = compensated_sum(weights.iter().copied());
    for w in &mut weights {
        *w /= total;
    }
    Ok(QuadratureRule1D { nodes, weights })
}

/// `sum_k w_k f(x_k)` with the `n`-point Gauss–Hermite rule.
pub fn integrate_gh<F: FnMut(f64) -> f64>(f: F, n: usize) -> Result<f64> {
    gauss_hermite_rule(n)?.apply(f)
}

/// Exact moment `E[X^p]` of the standard normal distribution.
pub fn normal_moment(p: u32) -> f64 {
    if p % 2 == 1 {
        return 0.0;
    }
    (1..p).step_by(2).map(f64::from).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn normalized_values() {
        assert_eq!(hermite_normalized(0, 3.7).unwrap(), 1.0);
        // He_2(x) = x^2 - 1 evaluated by monomials, divided by sqrt(2!).
        let he2 = |x: f64| (x * x - 1.0) / 2f64.sqrt();
        assert!(hermite_normalized(2, 1.0).unwrap().abs() < 1e-15);
        assert!(close(hermite_normalized(2, 0.3).unwrap(), he2(0.3), 1e-15));
        let he3 = |x: f64| (x * x * x - 3.0 * x) / 6f64.sqrt();
        assert!(close(hermite_normalized(3, 2.0).unwrap(), 0.816_496_580_927_726, 1e-14));
        assert!(close(hermite_normalized(3, -1.3).unwrap(), he3(-1.3), 1e-14));
    }

    #[test]
    fn degree_guard() {
        assert!(matches!(hermite_normalized(513, 0.1), Err(Error::UnsupportedDegree { degree: 513, .. })));
        assert!(hermite_row(600, 0.0).is_err());
        assert!(hermite_normalized(512, 3.0).unwrap().is_finite());
    }

    #[test]
    fn rows() {
        let r = hermite_row(2, 0.0).unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(r[0], 1.0);
        assert_eq!(r[1], 0.0);
        assert!(close(r[2], -1.0 / 2f64.sqrt(), 1e-15));
        assert_eq!(hermite_row(1, 1.5).unwrap(), vec![1.0, 1.5]);
        assert_eq!(hermite_row(0, -4.0).unwrap(), vec![1.0]);
    }

    #[test]
    fn row_is_bitwise_consistent() {
        for &x in &[-7.25, -1.0, 0.0, 0.4, 3.3, 11.0] {
            let row = hermite_row(80, x).unwrap();
            for (nu, v) in row.iter().enumerate() {
                assert_eq!(v.to_bits(), hermite_normalized(nu, x).unwrap().to_bits());
            }
        }
    }

    #[test]
    fn small_rules() {
        let r1 = gauss_hermite_rule(1).unwrap();
        assert_eq!(r1.nodes(), &[0.0]);
        assert!(close(r1.weights()[0], 1.0, 1e-15));

        let r2 = gauss_hermite_rule(2).unwrap();
        assert!(close(r2.nodes()[0], -1.0, 1e-14) && close(r2.nodes()[1], 1.0, 1e-14));
        assert!(close(r2.weights()[0], 0.5, 1e-14) && close(r2.weights()[1], 0.5, 1e-14));

        let r3 = gauss_hermite_rule(3).unwrap();
        let s3 = 3f64.sqrt();
        assert!(close(r3.nodes()[0], -s3, 1e-14));
        assert_eq!(r3.nodes()[1], 0.0);
        assert!(close(r3.nodes()[2], s3, 1e-14));
        assert!(close(r3.weights()[0], 1.0 / 6.0, 1e-14));
        assert!(close(r3.weights()[1], 2.0 / 3.0, 1e-14));
    }

    #[test]
    fn size_guard() {
        assert!(matches!(gauss_hermite_rule(0), Err(Error::UnsupportedSize { .. })));
        assert!(matches!(gauss_hermite_rule(257), Err(Error::UnsupportedSize { .. })));
        let big = gauss_hermite_rule(256).unwrap();
        assert!(big.weights().iter().all(|w| *w > 0.0));
    }

    #[test]
    fn rule_invariants() {
        for n in [1usize, 2, 5, 17, 64, 100, 256] {
            let r = gauss_hermite_rule(n).unwrap();
            let s: f64 = r.weights().iter().sum();
            assert!((s - 1.0).abs() < 1e-13, "n={n} sum={s}");
            for i in 0..n {
                assert!((r.nodes()[i] + r.nodes()[n - 1 - i]).abs() <= 1e-12);
                if i > 0 {
                    assert!(r.nodes()[i] > r.nodes()[i - 1]);
                }
            }
        }
    }

    #[test]
    fn integrate_examples() {
        assert!(close(integrate_gh(|_| 1.0, 7).unwrap(), 1.0, 1e-14));
        assert!(close(integrate_gh(|x| x * x, 3).unwrap(), 1.0, 1e-14));
        assert!(close(integrate_gh(|x| x.powi(4), 3).unwrap(), 3.0, 1e-14));
        assert!(matches!(integrate_gh(|x| 1.0 / x, 3), Err(Error::Evaluation(_))));
    }

    #[test]
    fn orthonormality_and_exactness() {
        for n in [1usize, 2, 3, 8, 21, 40, 64] {
            let r = gauss_hermite_rule(n).unwrap();
            let rows: Vec<Vec<f64>> = r.nodes().iter().map(|&x| hermite_row(2 * n - 1, x).unwrap()).collect();
            for i in 0..2 * n {
                for j in 0..2 * n - i {
                    let q: f64 = rows.iter().zip(r.weights()).map(|(h, w)| w * h[i] * h[j]).sum();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((q - expect).abs() < 1e-10, "n={n} i={i} j={j} got {q}");
                }
            }
            for p in 0..(2 * n as u32) {
                let q = r.apply(|x| x.powi(p as i32)).unwrap();
                let exact = normal_moment(p);
                // odd moments vanish by cancellation, so scale by E|X|^p
                let scale = r.apply(|x| x.abs().powi(p as i32)).unwrap();
                let tol = 1e-10 * scale.max(1.0);
                assert!((q - exact).abs() <= tol, "n={n} p={p}: {q} vs {exact}");
            }
        }
    }
}
