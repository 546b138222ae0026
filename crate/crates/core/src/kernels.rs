//! Gaussian and Hermite kernels, univariate and tensor-product, with their
//! mean embeddings, double integrals and initial errors under the standard
//! Gaussian measure.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, shape, Error, Result};
use crate::hermite_basis::hermite_row_unchecked;

/// Which linear problem an error or constant refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Problem {
    #[serde(rename = "int")]
    Integration,
    #[serde(rename = "approx")]
    Approximation,
}

impl FromStr for Problem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "int" | "integration" => Ok(Problem::Integration),
            "approx" | "approximation" => Ok(Problem::Approximation),
            other => Err(Error::Parse(format!("unknown problem '{other}' (expected int or approx)"))),
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Problem::Integration => "int",
            Problem::Approximation => "approx",
        })
    }
}

/// Shape parameters `sigma_1, ..., sigma_d`, all strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSeq(Vec<f64>);

impl ShapeSeq {
    pub fn new(sigma: Vec<f64>) -> Result<Self> {
        if sigma.is_empty() {
            return Err(domain("shape sequence must not be empty"));
        }
        if let Some((j, s)) = sigma.iter().enumerate().find(|(_, s)| !(s.is_finite() && **s > 0.0)) {
            return Err(domain(format!("shape parameter {j} must be positive and finite, got {s}")));
        }
        Ok(Self(sigma))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, j: usize) -> f64 {
        self.0[j]
    }
}

/// Base parameters `beta_1, ..., beta_d`, all in the open interval (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct BaseSeq(Vec<f64>);

impl BaseSeq {
    pub fn new(beta: Vec<f64>) -> Result<Self> {
        if beta.is_empty() {
            return Err(domain("base sequence must not be empty"));
        }
        if let Some((j, b)) = beta.iter().enumerate().find(|(_, b)| !(**b > 0.0 && **b < 1.0)) {
            return Err(domain(format!("base parameter {j} must lie in (0, 1), got {b}")));
        }
        Ok(Self(beta))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, j: usize) -> f64 {
        self.0[j]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Gaussian(ShapeSeq),
    Hermite(BaseSeq),
}

/// A tensor-product kernel on `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelSpecJson", into = "KernelSpecJson")]
pub struct KernelSpec {
    family: Family,
}

#[derive(Serialize, Deserialize)]
struct KernelSpecJson {
    family: String,
    params: Vec<f64>,
}

impl TryFrom<KernelSpecJson> for KernelSpec {
    type Error = Error;
    fn try_from(raw: KernelSpecJson) -> Result<Self> {
        match raw.family.as_str() {
            "gaussian" => KernelSpec::gaussian(raw.params),
            "hermite" => KernelSpec::hermite(raw.params),
            other => Err(Error::Parse(format!("unknown kernel family '{other}' (expected gaussian or hermite)"))),
        }
    }
}

impl From<KernelSpec> for KernelSpecJson {
    fn from(spec: KernelSpec) -> Self {
        let (family, params) = match spec.family {
            Family::Gaussian(s) => ("gaussian", s.0),
            Family::Hermite(b) => ("hermite", b.0),
        };
        KernelSpecJson { family: family.to_owned(), params }
    }
}

impl KernelSpec {
    pub fn gaussian(sigma: Vec<f64>) -> Result<Self> {
        Ok(Self { family: Family::Gaussian(ShapeSeq::new(sigma)?) })
    }

    pub fn hermite(beta: Vec<f64>) -> Result<Self> {
        Ok(Self { family: Family::Hermite(BaseSeq::new(beta)?) })
    }

    pub fn from_family(family: Family) -> Self {
        Self { family }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self.family, Family::Gaussian(_))
    }

    pub fn dimension(&self) -> usize {
        match &self.family {
            Family::Gaussian(s) => s.len(),
            Family::Hermite(b) => b.len(),
        }
    }

    /// The parameter sequence (`sigma` or `beta`).
    pub fn params(&self) -> &[f64] {
        match &self.family {
            Family::Gaussian(s) => s.as_slice(),
            Family::Hermite(b) => b.as_slice(),
        }
    }

    /// Same family restricted to the coordinates in `coords`.
    pub fn restrict(&self, coords: &[usize]) -> Result<Self> {
        let p = self.params();
        if let Some(&j) = coords.iter().find(|&&j| j >= p.len()) {
            return Err(shape(format!("coordinate {j} outside kernel of dimension {}", p.len())));
        }
        let sub: Vec<f64> = coords.iter().map(|&j| p[j]).collect();
        match self.family {
            Family::Gaussian(_) => Self::gaussian(sub),
            Family::Hermite(_) => Self::hermite(sub),
        }
    }

    pub(crate) fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension() {
            return Err(shape(format!("point has {} coordinates, kernel dimension is {}", x.len(), self.dimension())));
        }
        Ok(())
    }

    /// Univariate factor `j` evaluated at `(x, y)`.
    pub fn factor_kernel(&self, j: usize, x: f64, y: f64) -> f64 {
        match &self.family {
            Family::Gaussian(s) => gaussian_kernel(s.get(j), x, y),
            Family::Hermite(b) => hermite_kernel(b.get(j), x, y),
        }
    }

    /// `int k_j(x, y) dmu_0(y)` for factor `j`.
    pub fn factor_embedding(&self, j: usize, x: f64) -> f64 {
        match &self.family {
            Family::Gaussian(s) => gaussian_embedding(s.get(j), x),
            Family::Hermite(_) => 1.0,
        }
    }

    /// `int int k_j dmu_0 dmu_0` for factor `j`.
    pub fn factor_double_integral(&self, j: usize) -> f64 {
        match &self.family {
            Family::Gaussian(s) => gaussian_double_integral(s.get(j)),
            Family::Hermite(_) => 1.0,
        }
    }
}

/// `exp(-sigma² (x - y)²)`.
pub fn gaussian_kernel(sigma: f64, x: f64, y: f64) -> f64 {
    let d = x - y;
    (-sigma * sigma * d * d).exp()
}

/// `sum_nu beta^nu h_nu(x) h_nu(y)` in the closed Mehler form.
pub fn hermite_kernel(beta: f64, x: f64, y: f64) -> f64 {
    let b2 = beta * beta;
    let q = 1.0 - b2;
    (-(b2 * (x * x + y * y) - 2.0 * beta * (x * y)) / (2.0 * q)).exp() / q.sqrt()
}

/// Truncated series `sum_{nu < terms} beta^nu h_nu(x) h_nu(y)`, the defining
/// form of the Hermite kernel; used to cross-check [`hermite_kernel`].
pub fn hermite_kernel_series(beta: f64, x: f64, y: f64, terms: usize) -> f64 {
    if terms == 0 {
        return 0.0;
    }
    let hx = hermite_row_unchecked(terms - 1, x);
    let hy = hermite_row_unchecked(terms - 1, y);
    let mut acc = 0.0;
    let mut p = 1.0;
    for (a, b) in hx.iter().zip(&hy) {
        acc += p * a * b;
        p *= beta;
    }
    acc
}

fn gaussian_embedding(sigma: f64, x: f64) -> f64 {
    let s2 = sigma * sigma;
    let t = 1.0 + 2.0 * s2;
    (-s2 * x * x / t).exp() / t.sqrt()
}

fn gaussian_double_integral(sigma: f64) -> f64 {
    1.0 / (1.0 + 4.0 * sigma * sigma).sqrt()
}

/// `prod_j k_j(x_j, y_j)`.
pub fn product_kernel_eval(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    spec.check_point(x)?;
    spec.check_point(y)?;
    Ok(product_kernel_unchecked(spec, x, y))
}

pub(crate) fn product_kernel_unchecked(spec: &KernelSpec, x: &[f64], y: &[f64]) -> f64 {
    match &spec.family {
        Family::Gaussian(s) => {
            // one exponential for the whole product
            let e: f64 = s.as_slice().iter().zip(x.iter().zip(y)).map(|(sg, (a, b))| sg * sg * (a - b) * (a - b)).sum();
            (-e).exp()
        }
        Family::Hermite(b) => b.as_slice().iter().zip(x.iter().zip(y)).map(|(&bj, (&a, &c))| hermite_kernel(bj, a, c)).product(),
    }
}

/// `m(x) = int M(x, y) dmu(y)`, the representer of integration.
pub fn mean_embedding(spec: &KernelSpec, x: &[f64]) -> Result<f64> {
    spec.check_point(x)?;
    Ok(mean_embedding_unchecked(spec, x))
}

pub(crate) fn mean_embedding_unchecked(spec: &KernelSpec, x: &[f64]) -> f64 {
    match &spec.family {
        Family::Gaussian(s) => s.as_slice().iter().zip(x).map(|(&sg, &xj)| gaussian_embedding(sg, xj)).product(),
        Family::Hermite(_) => 1.0,
    }
}

/// `int int M dmu dmu`.
pub fn double_integral(spec: &KernelSpec) -> f64 {
    match &spec.family {
        Family::Gaussian(s) => s.as_slice().iter().map(|&sg| gaussian_double_integral(sg)).product(),
        Family::Hermite(_) => 1.0,
    }
}

/// Initial error: the worst-case error of the zero algorithm.
pub fn initial_error(spec: &KernelSpec, problem: Problem) -> f64 {
    match (&spec.family, problem) {
        (Family::Hermite(_), _) => 1.0,
        (Family::Gaussian(s), Problem::Integration) => {
            s.as_slice().iter().map(|&sg| (1.0 + 4.0 * sg * sg).powf(-0.25)).product()
        }
        (Family::Gaussian(s), Problem::Approximation) => s
            .as_slice()
            .iter()
            .map(|&sg| (2.0 / (1.0 + (1.0 + 8.0 * sg * sg).sqrt())).sqrt())
            .product(),
    }
}

/// Generator `j -> sigma_j` for shape sequences of unbounded length
/// (coordinates are 0-based; coordinate `j` carries `sigma_{j+1}`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShapeRule {
    /// `sigma_j = j^{-p}`, requires `p > 1/2` for square summability.
    Power { p: f64 },
    /// `sigma_j = r^j` with `0 < r < 1`.
    Geometric { r: f64 },
}

impl ShapeRule {
    pub fn new_power(p: f64) -> Result<Self> {
        if !(p > 0.5 && p.is_finite()) {
            return Err(domain(format!("power rule j^-p needs p > 1/2 for summable squares, got {p}")));
        }
        Ok(ShapeRule::Power { p })
    }

    pub fn new_geometric(r: f64) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(domain(format!("geometric rule r^j needs 0 < r < 1, got {r}")));
        }
        Ok(ShapeRule::Geometric { r })
    }

    /// `sigma` of 0-based coordinate `j`.
    pub fn sigma(&self, j: usize) -> f64 {
        let k = (j + 1) as f64;
        match *self {
            ShapeRule::Power { p } => k.powf(-p),
            ShapeRule::Geometric { r } => r.powf(k),
        }
    }

    /// First `len` shape parameters.
    pub fn prefix(&self, len: usize) -> Result<ShapeSeq> {
        ShapeSeq::new((0..len).map(|j| self.sigma(j)).collect())
    }

    /// Upper bound on `sum_{j >= from} sigma_j²` (0-based `from`).
    pub fn tail_square_sum(&self, from: usize) -> f64 {
        let k = (from + 1) as f64;
        match *self {
            ShapeRule::Power { p } => {
                let q = 2.0 * p;
                k.powf(-q) + k.powf(1.0 - q) / (q - 1.0)
            }
            ShapeRule::Geometric { r } => r.powf(2.0 * k) / (1.0 - r * r),
        }
    }
}

impl FromStr for ShapeRule {
    type Err = Error;
    /// Accepts `"j^-p"` and `"r^j"`.
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if let Some(p) = t.strip_prefix("j^-") {
            let p: f64 = p.trim_matches(|c| c == '(' || c == ')').parse().map_err(|_| Error::Parse(format!("bad exponent in '{s}'")))?;
            return ShapeRule::new_power(p);
        }
        if let Some(r) = t.strip_suffix("^j") {
            let r: f64 = r.trim_matches(|c| c == '(' || c == ')').parse().map_err(|_| Error::Parse(format!("bad base in '{s}'")))?;
            return ShapeRule::new_geometric(r);
        }
        Err(Error::Parse(format!("unsupported sigma rule '{s}' (expected \"j^-p\" or \"r^j\")")))
    }
}

impl fmt::Display for ShapeRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShapeRule::Power { p } => write!(f, "j^-{p}"),
            ShapeRule::Geometric { r } => write!(f, "{r}^j"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite_basis::gauss_hermite_rule;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn univariate_gaussian() {
        assert_eq!(gaussian_kernel(1.0, 2.0, 2.0), 1.0);
        assert!(rel(gaussian_kernel(1.0, 0.0, 1.0), (-1f64).exp()) < 1e-15);
        assert!(rel(gaussian_kernel(0.5, -1.0, 1.0), (-1f64).exp()) < 1e-15);
    }

    #[test]
    fn hermite_against_series() {
        // sum_m beta^{2m} C(2m, m) / 4^m = (1 - beta^2)^{-1/2} at the origin
        let mut series = 0.0;
        let mut c = 1.0;
        for m in 0..60 {
            if m > 0 {
                c *= (2 * m) as f64 * (2 * m - 1) as f64 / ((m * m) as f64 * 4.0);
            }
            series += 0.25f64.powi(m) * c;
        }
        assert!(rel(hermite_kernel(0.5, 0.0, 0.0), 2.0 / 3f64.sqrt()) < 1e-15);
        assert!(rel(series, 2.0 / 3f64.sqrt()) < 1e-14);
        let s = hermite_kernel_series(0.3, 1.0, 1.0, 60);
        assert!(rel(hermite_kernel(0.3, 1.0, 1.0), s) < 1e-14);
        let far = hermite_kernel(0.5, 5.0, -5.0);
        assert!(far > 0.0 && far < 1e-10);
        assert!(rel(far, (-25f64).exp() / 0.75f64.sqrt()) < 1e-13);
    }

    #[test]
    fn mehler_grid() {
        for &beta in &[0.1, 0.5, 0.9] {
            // 0.9^80 is not small; the series needs several hundred terms there
            let terms = if beta > 0.6 { 600 } else { 80 };
            for i in 0..=16 {
                for j in 0..=16 {
                    let x = -4.0 + 0.5 * i as f64;
                    let y = -4.0 + 0.5 * j as f64;
                    let m = hermite_kernel(beta, x, y);
                    let s = hermite_kernel_series(beta, x, y, terms);
                    let scale = (hermite_kernel(beta, x, x) * hermite_kernel(beta, y, y)).sqrt();
                    assert!((m - s).abs() <= 1e-12 * scale, "beta={beta} x={x} y={y}: {m} vs {s}");
                }
            }
        }
    }

    #[test]
    fn products() {
        let g = KernelSpec::gaussian(vec![1.0, 1.0]).unwrap();
        assert_eq!(product_kernel_eval(&g, &[0.3, -2.0], &[0.3, -2.0]).unwrap(), 1.0);
        assert!(rel(product_kernel_eval(&g, &[0.0, 0.0], &[1.0, 0.0]).unwrap(), (-1f64).exp()) < 1e-15);
        let h = KernelSpec::hermite(vec![0.5, 0.5]).unwrap();
        assert!(rel(product_kernel_eval(&h, &[0.0, 0.0], &[0.0, 0.0]).unwrap(), 4.0 / 3.0) < 1e-15);
        assert!(matches!(product_kernel_eval(&h, &[0.0], &[0.0, 0.0]), Err(Error::Shape(_))));
    }

    #[test]
    fn embeddings_against_quadrature() {
        let g = KernelSpec::gaussian(vec![1.0]).unwrap();
        let gh = gauss_hermite_rule(64).unwrap();
        for &x in &[0.0, 1.0, -2.5] {
            let oracle = gh.apply(|y| gaussian_kernel(1.0, x, y)).unwrap();
            assert!(rel(mean_embedding(&g, &[x]).unwrap(), oracle) < 1e-12);
        }
        assert!(rel(mean_embedding(&g, &[0.0]).unwrap(), 3f64.powf(-0.5)) < 1e-15);
        assert!(rel(mean_embedding(&g, &[1.0]).unwrap(), 0.413_689_545) < 1e-9);
        let h = KernelSpec::hermite(vec![0.7]).unwrap();
        assert_eq!(mean_embedding(&h, &[2.0]).unwrap(), 1.0);
        assert!(rel(gh.apply(|y| hermite_kernel(0.7, 1.3, y)).unwrap(), 1.0) < 1e-12);
    }

    #[test]
    fn double_integrals() {
        // x - y is N(0, 2), so the double integral is E exp(-2 s² Z²)
        let gh = gauss_hermite_rule(256).unwrap();
        for &s in &[0.5, 1.0, 2.0] {
            let spec = KernelSpec::gaussian(vec![s]).unwrap();
            let oracle = gh.apply(|z| (-2.0 * s * s * z * z).exp()).unwrap();
            assert!(rel(double_integral(&spec), oracle) < 1e-10, "sigma={s}");
        }
        assert!(rel(double_integral(&KernelSpec::gaussian(vec![0.5]).unwrap()), 0.5f64.sqrt()) < 1e-15);
        assert!(rel(double_integral(&KernelSpec::gaussian(vec![1.0, 1.0]).unwrap()), 0.2) < 1e-15);
        assert_eq!(double_integral(&KernelSpec::hermite(vec![0.3, 0.9]).unwrap()), 1.0);
    }

    #[test]
    fn initial_errors() {
        let h = KernelSpec::hermite(vec![0.4, 0.2]).unwrap();
        assert_eq!(initial_error(&h, Problem::Integration), 1.0);
        assert_eq!(initial_error(&h, Problem::Approximation), 1.0);
        let g = KernelSpec::gaussian(vec![0.5]).unwrap();
        assert!(rel(initial_error(&g, Problem::Integration), 2f64.powf(-0.25)) < 1e-15);
        let g1 = KernelSpec::gaussian(vec![1.0]).unwrap();
        assert!(rel(initial_error(&g1, Problem::Approximation), 0.5f64.sqrt()) < 1e-15);
        let g3 = KernelSpec::gaussian(vec![0.2, 1.7, 3.0]).unwrap();
        assert!(rel(initial_error(&g3, Problem::Integration).powi(2), double_integral(&g3)) < 1e-13);
    }

    #[test]
    fn degenerate_parameters_rejected() {
        assert!(KernelSpec::gaussian(vec![0.0]).is_err());
        assert!(KernelSpec::gaussian(vec![]).is_err());
        assert!(KernelSpec::hermite(vec![1.0]).is_err());
        assert!(KernelSpec::hermite(vec![0.0]).is_err());
        assert!(KernelSpec::hermite(vec![f64::NAN]).is_err());
    }

    #[test]
    fn json_schema() {
        let spec: KernelSpec = serde_json::from_str(r#"{"family":"hermite","params":[0.5,0.25]}"#).unwrap();
        assert_eq!(spec.dimension(), 2);
        assert!(!spec.is_gaussian());
        let text = serde_json::to_string(&KernelSpec::gaussian(vec![1.5]).unwrap()).unwrap();
        assert_eq!(text, r#"{"family":"gaussian","params":[1.5]}"#);
        assert!(serde_json::from_str::<KernelSpec>(r#"{"family":"laplace","params":[1]}"#).is_err());
        assert!(serde_json::from_str::<KernelSpec>(r#"{"family":"hermite","params":[1.5]}"#).is_err());
    }

    #[test]
    fn shape_rules() {
        let r: ShapeRule = "j^-1.5".parse().unwrap();
        assert_eq!(r, ShapeRule::Power { p: 1.5 });
        assert!((r.sigma(0) - 1.0).abs() < 1e-15);
        assert!((r.sigma(3) - 4f64.powf(-1.5)).abs() < 1e-15);
        let direct: f64 = (100..2_000_000).map(|j| r.sigma(j).powi(2)).sum();
        assert!(r.tail_square_sum(100) >= direct);
        let g: ShapeRule = "0.5^j".parse().unwrap();
        let direct: f64 = (4..200).map(|j| g.sigma(j).powi(2)).sum();
        assert!((g.tail_square_sum(4) - direct).abs() < 1e-15);
        assert!("j^-0.4".parse::<ShapeRule>().is_err());
        assert!("1.2^j".parse::<ShapeRule>().is_err());
        assert!("sin(j)".parse::<ShapeRule>().is_err());
    }
}
