//! Exact worst-case errors of quadrature rules and linear sampling methods on
//! Gaussian and Hermite kernel spaces, optimal weights for fixed nodes, and
//! cost accounting.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{shape, Error, Result};
use crate::hermite_basis::hermite_row_unchecked;
use crate::kernels::{double_integral, mean_embedding_unchecked, product_kernel_unchecked, Family, KernelSpec, Problem};
use crate::linalg::{compensated_sum, symmetric_max_eigenvalue, SpdFactor};
use crate::transference::{beta_from_sigma, phi_c_unchecked, TransferConstants};

/// Round-off allowance on a squared worst-case error before it is reported
/// as inconsistent.
pub const NEGATIVE_SQUARE_TOLERANCE: f64 = 1e-12;

/// Cramér-type constant: `|h_nu(x)| <= CRAMER_CONSTANT * exp(x² / 4)`.
pub const CRAMER_CONSTANT: f64 = 1.1;

/// Row-major `n x d` node matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Nodes {
    dim: usize,
    data: Vec<f64>,
}

impl Nodes {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(shape(format!("{} values do not form rows of dimension {dim}", data.len())));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map(Vec::len).ok_or_else(|| shape("node list is empty"))?;
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(shape(format!("node {i} has {} coordinates, expected {dim}", r.len())));
        }
        Self::new(dim, rows.concat())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    pub(crate) fn map_rows<F: Fn(&[f64]) -> Vec<f64>>(&self, f: F) -> Nodes {
        let data = self.rows().flat_map(f).collect();
        Nodes { dim: self.dim, data }
    }

    /// Number of nonzero coordinates of node `i`.
    pub fn active_count(&self, i: usize) -> usize {
        self.row(i).iter().filter(|v| **v != 0.0).count()
    }

    fn concat(&self, other: &Nodes) -> Result<Nodes> {
        if self.dim != other.dim {
            return Err(shape(format!("cannot concatenate nodes of dimension {} and {}", self.dim, other.dim)));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Nodes { dim: self.dim, data })
    }
}

impl Serialize for Nodes {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Nodes {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        Nodes::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

/// Anything that evaluates its input at a node matrix.
pub trait NodeSource {
    fn nodes(&self) -> &Nodes;
}

/// `A(f) = sum_i a_i f(x_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RuleJson")]
pub struct QuadratureRule {
    nodes: Nodes,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RuleJson {
    nodes: Nodes,
    weights: Vec<f64>,
}

impl TryFrom<RuleJson> for QuadratureRule {
    type Error = Error;
    fn try_from(raw: RuleJson) -> Result<Self> {
        QuadratureRule::new(raw.nodes, raw.weights)
    }
}

impl QuadratureRule {
    pub fn new(nodes: Nodes, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(shape(format!("{} nodes but {} weights", nodes.len(), weights.len())));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::Domain(format!("weight {w} is not finite")));
        }
        Ok(Self { nodes, weights })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        Self::new(Nodes::from_rows(rows)?, weights)
    }

    pub fn nodes(&self) -> &Nodes {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.nodes.dim
    }

    /// Node list of `self` followed by that of `other`.
    pub fn concat(&self, other: &QuadratureRule) -> Result<QuadratureRule> {
        let nodes = self.nodes.concat(&other.nodes)?;
        let mut weights = self.weights.clone();
        weights.extend_from_slice(&other.weights);
        QuadratureRule::new(nodes, weights)
    }

    /// `sum_i a_i f(x_i)` in node order.
    pub fn apply<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> Result<f64> {
        let mut acc = 0.0;
        for (x, &w) in self.nodes.rows().zip(&self.weights) {
            let v = f(x);
            if !v.is_finite() {
                return Err(Error::Evaluation(format!("integrand is not finite at {x:?}")));
            }
            acc += w * v;
        }
        Ok(acc)
    }
}

impl NodeSource for QuadratureRule {
    fn nodes(&self) -> &Nodes {
        &self.nodes
    }
}

/// Downward-closed finite set of multi-indices, kept in insertion order
/// (that order indexes coefficient tables).
#[derive(Debug, Clone, PartialEq)]
pub struct MultiIndexSet {
    dim: usize,
    indices: Vec<Vec<usize>>,
    lookup: HashMap<Vec<usize>, usize>,
    box_degrees: Option<Vec<usize>>,
}

impl MultiIndexSet {
    pub fn new(dim: usize, indices: Vec<Vec<usize>>) -> Result<Self> {
        if dim == 0 {
            return Err(shape("multi-index dimension must be positive"));
        }
        let mut lookup = HashMap::with_capacity(indices.len());
        for (k, nu) in indices.iter().enumerate() {
            if nu.len() != dim {
                return Err(shape(format!("multi-index {nu:?} does not have {dim} entries")));
            }
            if lookup.insert(nu.clone(), k).is_some() {
                return Err(shape(format!("multi-index {nu:?} listed twice")));
            }
        }
        for nu in &indices {
            for j in 0..dim {
                if nu[j] > 0 {
                    let mut lower = nu.clone();
                    lower[j] -= 1;
                    if !lookup.contains_key(&lower) {
                        return Err(shape(format!("index set is not downward closed: {nu:?} present, {lower:?} missing")));
                    }
                }
            }
        }
        if indices.is_empty() {
            return Err(shape("index set must contain the zero multi-index"));
        }
        let box_degrees = Self::detect_box(dim, &indices);
        Ok(Self { dim, indices, lookup, box_degrees })
    }

    fn detect_box(dim: usize, indices: &[Vec<usize>]) -> Option<Vec<usize>> {
        let degrees: Vec<usize> = (0..dim).map(|j| indices.iter().map(|nu| nu[j]).max().unwrap_or(0)).collect();
        let volume = degrees.iter().try_fold(1usize, |acc, d| acc.checked_mul(d + 1))?;
        (volume == indices.len()).then_some(degrees)
    }

    /// `{0..=n_1} x ... x {0..=n_d}` in lexicographic order.
    pub fn box_set(degrees: &[usize]) -> Result<Self> {
        let dim = degrees.len();
        let mut indices = Vec::new();
        let mut nu = vec![0usize; dim];
        loop {
            indices.push(nu.clone());
            let mut j = dim;
            loop {
                if j == 0 {
                    return Self::new(dim, indices);
                }
                j -= 1;
                if nu[j] < degrees[j] {
                    nu[j] += 1;
                    break;
                }
                nu[j] = 0;
            }
        }
    }

    /// All multi-indices with `|nu|_1 <= n`.
    pub fn total_degree(dim: usize, n: usize) -> Result<Self> {
        let full = Self::box_set(&vec![n; dim])?;
        let indices = full.indices.into_iter().filter(|nu| nu.iter().sum::<usize>() <= n).collect();
        Self::new(dim, indices)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[Vec<usize>] {
        &self.indices
    }

    pub fn position(&self, nu: &[usize]) -> Option<usize> {
        self.lookup.get(nu).copied()
    }

    pub fn max_degree(&self, j: usize) -> usize {
        self.indices.iter().map(|nu| nu[j]).max().unwrap_or(0)
    }

    /// Per-axis degrees when the set is a full box.
    pub fn box_degrees(&self) -> Option<&[usize]> {
        self.box_degrees.as_deref()
    }

    /// Minimal elements of the complement: `nu + e_j` outside the set.
    pub fn margin(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for nu in &self.indices {
            for j in 0..self.dim {
                let mut up = nu.clone();
                up[j] += 1;
                if !self.lookup.contains_key(&up) && !out.contains(&up) {
                    out.push(up);
                }
            }
        }
        out
    }
}

impl Serialize for MultiIndexSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.indices.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultiIndexSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let indices = Vec::<Vec<usize>>::deserialize(d)?;
        let dim = indices.first().map(Vec::len).unwrap_or(0);
        MultiIndexSet::new(dim, indices).map_err(serde::de::Error::custom)
    }
}

/// `A(f) = sum_i f(x_i) a_i` with each `a_i` given by its coefficients in
/// the eigenbasis of a [`SpectralSystem`] over an index set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SamplingJson", into = "SamplingJson")]
pub struct SamplingMethod {
    nodes: Nodes,
    index_set: MultiIndexSet,
    /// Row-major `n x |index_set|`.
    coeffs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SamplingJson {
    nodes: Nodes,
    index_set: MultiIndexSet,
    coeffs: Vec<Vec<f64>>,
}

impl TryFrom<SamplingJson> for SamplingMethod {
    type Error = Error;
    fn try_from(raw: SamplingJson) -> Result<Self> {
        let width = raw.index_set.len();
        if let Some(row) = raw.coeffs.iter().find(|r| r.len() != width) {
            return Err(shape(format!("coefficient row has {} entries, index set has {width}", row.len())));
        }
        SamplingMethod::new(raw.nodes, raw.index_set, raw.coeffs.concat())
    }
}

impl From<SamplingMethod> for SamplingJson {
    fn from(m: SamplingMethod) -> Self {
        let width = m.index_set.len();
        let coeffs = m.coeffs.chunks_exact(width).map(<[f64]>::to_vec).collect();
        SamplingJson { nodes: m.nodes, index_set: m.index_set, coeffs }
    }
}

impl SamplingMethod {
    pub fn new(nodes: Nodes, index_set: MultiIndexSet, coeffs: Vec<f64>) -> Result<Self> {
        if nodes.dim() != index_set.dim() {
            return Err(shape(format!("nodes have dimension {}, index set {}", nodes.dim(), index_set.dim())));
        }
        if coeffs.len() != nodes.len() * index_set.len() {
            return Err(shape(format!(
                "coefficient table has {} entries, expected {} x {}",
                coeffs.len(),
                nodes.len(),
                index_set.len()
            )));
        }
        Ok(Self { nodes, index_set, coeffs })
    }

    /// The zero algorithm with the given nodes.
    pub fn zero(nodes: Nodes, index_set: MultiIndexSet) -> Result<Self> {
        let n = nodes.len() * index_set.len();
        Self::new(nodes, index_set, vec![0.0; n])
    }

    pub fn nodes(&self) -> &Nodes {
        &self.nodes
    }

    pub fn index_set(&self) -> &MultiIndexSet {
        &self.index_set
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff_row(&self, i: usize) -> &[f64] {
        let w = self.index_set.len();
        &self.coeffs[i * w..(i + 1) * w]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.nodes.dim()
    }

    pub(crate) fn scaled_rows(&self, factors: &[f64]) -> Vec<f64> {
        let w = self.index_set.len();
        self.coeffs.chunks_exact(w).zip(factors).flat_map(|(row, f)| row.iter().map(move |v| v * f)).collect()
    }

    /// Same method with the table re-expressed over a larger index set
    /// (new columns are zero).
    pub fn extend_index_set(&self, larger: &MultiIndexSet) -> Result<Self> {
        let mut map = Vec::with_capacity(self.index_set.len());
        for nu in self.index_set.indices() {
            map.push(larger.position(nu).ok_or_else(|| shape(format!("index {nu:?} missing from the larger set")))?);
        }
        let w = larger.len();
        let mut coeffs = vec![0.0; self.len() * w];
        for i in 0..self.len() {
            for (k, &pos) in map.iter().enumerate() {
                coeffs[i * w + pos] = self.coeff_row(i)[k];
            }
        }
        Self::new(self.nodes.clone(), larger.clone(), coeffs)
    }
}

impl NodeSource for SamplingMethod {
    fn nodes(&self) -> &Nodes {
        &self.nodes
    }
}

/// Cost of one function evaluation as a function of the number of active
/// variables.
#[derive(Debug, Clone, PartialEq)]
pub enum DollarCost {
    /// Explicit values `$(0), ..., $(m_max)`.
    Table(Vec<f64>),
    /// `$(m) = offset + slope * m`.
    Linear { offset: f64, slope: f64 },
    /// `$(m) = base^m`.
    Exponential { base: f64 },
}

impl DollarCost {
    pub fn eval(&self, m: usize) -> Result<f64> {
        match self {
            DollarCost::Table(t) => t.get(m).copied().ok_or_else(|| {
                Error::Domain(format!("dollar table covers 0..={} active variables, {m} requested", t.len() - 1))
            }),
            DollarCost::Linear { offset, slope } => Ok(offset + slope * m as f64),
            DollarCost::Exponential { base } => Ok(base.powi(m as i32)),
        }
    }
}

/// How evaluations are charged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CostJson", into = "CostJson")]
pub enum CostModel {
    /// Every evaluation costs 1.
    Unit,
    /// Evaluation at `x` costs `$(Act(x))`.
    Dollar(DollarCost),
}

#[derive(Serialize, Deserialize)]
struct CostJson {
    mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    table: Option<Vec<f64>>,
}

impl TryFrom<CostJson> for CostModel {
    type Error = Error;
    fn try_from(raw: CostJson) -> Result<Self> {
        match (raw.mode.as_str(), raw.table) {
            ("unit", _) => Ok(CostModel::Unit),
            ("dollar", Some(t)) => CostModel::dollar_table(t),
            ("dollar", None) => Err(Error::Parse("dollar cost model needs a 'table'".into())),
            (other, _) => Err(Error::Parse(format!("unknown cost mode '{other}'"))),
        }
    }
}

impl From<CostModel> for CostJson {
    fn from(m: CostModel) -> Self {
        match m {
            CostModel::Unit => CostJson { mode: "unit".into(), table: None },
            CostModel::Dollar(DollarCost::Table(t)) => CostJson { mode: "dollar".into(), table: Some(t) },
            CostModel::Dollar(other) => {
                // closed forms serialize as the table over a fixed range
                let t = (0..=64).map(|m| other.eval(m).unwrap_or(f64::INFINITY)).collect();
                CostJson { mode: "dollar".into(), table: Some(t) }
            }
        }
    }
}

impl CostModel {
    /// Validated table model: entries `>= 1` and non-decreasing.
    pub fn dollar_table(table: Vec<f64>) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::Domain("dollar table must cover at least m = 0".into()));
        }
        for (m, w) in table.windows(2).enumerate() {
            if w[1] < w[0] {
                return Err(Error::Domain(format!("dollar table decreases between m = {m} and m = {}", m + 1)));
            }
        }
        if let Some(v) = table.iter().find(|v| !(**v >= 1.0) || !v.is_finite()) {
            return Err(Error::Domain(format!("dollar values must be finite and >= 1, got {v}")));
        }
        Ok(CostModel::Dollar(DollarCost::Table(table)))
    }

    /// `$(m) = 1 + m`.
    pub fn linear() -> Self {
        CostModel::Dollar(DollarCost::Linear { offset: 1.0, slope: 1.0 })
    }

    /// `$(m) = base^m`, `base >= 1`.
    pub fn exponential(base: f64) -> Result<Self> {
        if !(base >= 1.0) {
            return Err(Error::Domain(format!("exponential cost base must be >= 1, got {base}")));
        }
        Ok(CostModel::Dollar(DollarCost::Exponential { base }))
    }

    /// Cost of one evaluation with `active` nonzero coordinates.
    pub fn evaluation_cost(&self, active: usize) -> Result<f64> {
        match self {
            CostModel::Unit => Ok(1.0),
            CostModel::Dollar(d) => d.eval(active),
        }
    }

    /// Checks `c1 m <= $(m) <= exp(c2 m)` and monotonicity on `1..=m_max`.
    pub fn check_growth(&self, c1: f64, c2: f64, m_max: usize) -> Result<()> {
        let CostModel::Dollar(d) = self else { return Ok(()) };
        let mut prev = d.eval(0)?;
        if prev < 1.0 {
            return Err(Error::Domain(format!("$(0) = {prev} is below 1")));
        }
        for m in 1..=m_max {
            let v = d.eval(m)?;
            let mf = m as f64;
            if v < prev || v < c1 * mf || v > (c2 * mf).exp() {
                return Err(Error::Domain(format!(
                    "$({m}) = {v} violates monotonicity or the bounds {c1}*m <= $(m) <= exp({c2}*m)"
                )));
            }
            prev = v;
        }
        Ok(())
    }
}

/// Total cost of evaluating at every node.
pub fn rule_cost<R: NodeSource + ?Sized>(alg: &R, model: &CostModel) -> Result<f64> {
    let nodes = alg.nodes();
    match model {
        CostModel::Unit => Ok(nodes.len() as f64),
        CostModel::Dollar(_) => {
            let mut acc = 0.0;
            for i in 0..nodes.len() {
                acc += model.evaluation_cost(nodes.active_count(i))?;
            }
            Ok(acc)
        }
    }
}

fn check_dims(rule_dim: usize, spec: &KernelSpec) -> Result<()> {
    if rule_dim != spec.dimension() {
        return Err(shape(format!("algorithm has dimension {rule_dim}, kernel has {}", spec.dimension())));
    }
    Ok(())
}

/// `sum_{i,j} a_i a_j M(x_i, x_j)`, rows in parallel, combined in row order.
fn weighted_gram_sum(nodes: &Nodes, weights: &[f64], spec: &KernelSpec) -> f64 {
    let n = nodes.len();
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = nodes.row(i);
            let off = compensated_sum((i + 1..n).map(|j| weights[j] * product_kernel_unchecked(spec, xi, nodes.row(j))));
            weights[i] * (weights[i] * product_kernel_unchecked(spec, xi, xi) + 2.0 * off)
        })
        .collect();
    compensated_sum(rows)
}

/// Squared worst-case integration error before the final clamp.
pub fn wce_integration_squared(rule: &QuadratureRule, spec: &KernelSpec) -> Result<f64> {
    check_dims(rule.dim(), spec)?;
    let embed = compensated_sum(rule.nodes.rows().zip(&rule.weights).map(|(x, w)| w * mean_embedding_unchecked(spec, x)));
    let gram = weighted_gram_sum(&rule.nodes, &rule.weights, spec);
    Ok(compensated_sum([double_integral(spec), -2.0 * embed, gram]))
}

/// Worst-case integration error of `rule` on the unit ball of `H(M)`:
/// `e² = ∬M - 2 sum_i a_i m(x_i) + sum_{i,j} a_i a_j M(x_i, x_j)`.
pub fn wce_integration(rule: &QuadratureRule, spec: &KernelSpec) -> Result<f64> {
    clamp_square(wce_integration_squared(rule, spec)?)
}

pub(crate) fn clamp_square(e2: f64) -> Result<f64> {
    if e2 < -NEGATIVE_SQUARE_TOLERANCE || !e2.is_finite() {
        return Err(Error::NegativeSquaredError { value: e2 });
    }
    Ok(e2.max(0.0).sqrt())
}

/// Kernel Gram matrix of `nodes`.
pub fn gram_matrix(nodes: &Nodes, spec: &KernelSpec) -> Result<DMatrix<f64>> {
    check_dims(nodes.dim(), spec)?;
    let n = nodes.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| product_kernel_unchecked(spec, nodes.row(i), nodes.row(j))).collect())
        .collect();
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Weights minimizing the worst-case integration error for fixed nodes,
/// `G w = m`. Ill-conditioned Gram systems are reported, never regularized.
pub fn optimal_weights(nodes: &Nodes, spec: &KernelSpec) -> Result<QuadratureRule> {
    Ok(optimal_rule(nodes, spec)?.0)
}

/// Optimal rule together with `e² = ∬M - m^T w`.
pub fn optimal_rule(nodes: &Nodes, spec: &KernelSpec) -> Result<(QuadratureRule, f64)> {
    let gram = gram_matrix(nodes, spec)?;
    let factor = SpdFactor::new(gram)?;
    let m = DVector::from_iterator(nodes.len(), nodes.rows().map(|x| mean_embedding_unchecked(spec, x)));
    let w = factor.solve_vec(&m);
    let e2 = double_integral(spec) - compensated_sum(m.iter().zip(w.iter()).map(|(a, b)| a * b));
    let rule = QuadratureRule::new(nodes.clone(), w.iter().copied().collect())?;
    Ok((rule, e2))
}

/// Eigen-expansion `M(x, y) = sum_nu lambda_nu e_nu(x) e_nu(y)` restricted to
/// an index set, with `e_nu` orthonormal in L²(mu).
///
/// Hermite kernels: `e_nu = prod h_{nu_j}`, `lambda_nu = prod beta_j^{nu_j}`.
/// Gaussian kernels: `e_nu = Q_c(prod h_{nu_j})` and
/// `lambda_nu = prod (1 - beta_j) beta_j^{nu_j}` with the approximation-matched
/// `beta_j` and `c_j = (1 + 8 sigma_j²)^{1/4}`.
#[derive(Debug, Clone)]
pub struct SpectralSystem {
    spec: KernelSpec,
    index_set: MultiIndexSet,
    ratios: Vec<f64>,
    leading: Vec<f64>,
    dilation: Vec<f64>,
    eigenvalues: Vec<f64>,
}

/// Exact worst-case error lies in `[value, value + tail_bound]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBracket {
    pub value: f64,
    pub tail_bound: f64,
}

impl SpectralSystem {
    pub fn new(spec: &KernelSpec, index_set: MultiIndexSet) -> Result<Self> {
        check_dims(index_set.dim(), spec)?;
        let d = spec.dimension();
        let (ratios, leading, dilation) = match spec.family() {
            Family::Hermite(b) => (b.as_slice().to_vec(), vec![1.0; d], vec![1.0; d]),
            Family::Gaussian(s) => {
                let k = TransferConstants::new(Problem::Approximation, s)?;
                let ratios: Vec<f64> = s.as_slice().iter().map(|&sg| beta_from_sigma(Problem::Approximation, sg)).collect::<Result<_>>()?;
                let leading = ratios.iter().map(|b| 1.0 - b).collect();
                (ratios, leading, k.c)
            }
        };
        let eigenvalues = index_set
            .indices()
            .iter()
            .map(|nu| nu.iter().enumerate().map(|(j, &k)| leading[j] * ratios[j].powi(k as i32)).product())
            .collect();
        Ok(Self { spec: spec.clone(), index_set, ratios, leading, dilation, eigenvalues })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn index_set(&self) -> &MultiIndexSet {
        &self.index_set
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, nu: &[usize]) -> f64 {
        nu.iter().enumerate().map(|(j, &k)| self.leading[j] * self.ratios[j].powi(k as i32)).product()
    }

    /// Per-coordinate geometric ratio of the eigenvalues.
    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    pub fn dilation(&self) -> &[f64] {
        &self.dilation
    }

    fn amplitude(&self, x: &[f64]) -> f64 {
        if self.spec.is_gaussian() {
            let root: f64 = self.dilation.iter().product::<f64>().sqrt();
            root * phi_c_unchecked(&self.dilation, x)
        } else {
            1.0
        }
    }

    /// Per-coordinate Hermite rows at the dilated point, up to the degree
    /// used by the index set.
    fn coordinate_rows(&self, x: &[f64]) -> Vec<Vec<f64>> {
        (0..x.len()).map(|j| hermite_row_unchecked(self.index_set.max_degree(j), self.dilation[j] * x[j])).collect()
    }

    /// `e_nu(x)` for every `nu` in the index set.
    pub fn eigenfunction_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dims(x.len(), &self.spec)?;
        Ok(self.eigenfunction_values_unchecked(x))
    }

    fn eigenfunction_values_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let amp = self.amplitude(x);
        let rows = self.coordinate_rows(x);
        self.index_set
            .indices()
            .iter()
            .map(|nu| amp * nu.iter().enumerate().map(|(j, &k)| rows[j][k]).product::<f64>())
            .collect()
    }

    pub fn eigenfunction_value(&self, nu: &[usize], x: &[f64]) -> Result<f64> {
        check_dims(x.len(), &self.spec)?;
        if nu.len() != x.len() {
            return Err(shape("multi-index and point dimensions differ"));
        }
        let amp = self.amplitude(x);
        Ok(amp * nu.iter().zip(x).zip(&self.dilation).map(|((&k, &xj), &c)| *hermite_row_unchecked(k, c * xj).last().unwrap()).product::<f64>())
    }

    /// `n x |index set|` matrix of eigenfunction values at the nodes.
    pub fn evaluation_matrix(&self, nodes: &Nodes) -> Result<DMatrix<f64>> {
        check_dims(nodes.dim(), &self.spec)?;
        let rows: Vec<Vec<f64>> = (0..nodes.len()).into_par_iter().map(|i| self.eigenfunction_values_unchecked(nodes.row(i))).collect();
        Ok(DMatrix::from_fn(nodes.len(), self.index_set.len(), |i, k| rows[i][k]))
    }

    /// Upper bound on `sup_nu |e_nu(x)|` over all multi-indices.
    pub fn envelope(&self, x: &[f64]) -> f64 {
        let amp = if self.spec.is_gaussian() { self.dilation.iter().product::<f64>().sqrt() } else { 1.0 };
        // phi_c(x) exp(c² x² / 4) = exp(x² / 4) coordinatewise
        amp * x.iter().map(|xj| CRAMER_CONSTANT * (xj * xj / 4.0).exp()).product::<f64>()
    }

    /// Upper bound on `sum_{nu not in set} lambda_nu`.
    pub fn tail_eigen_sum(&self) -> f64 {
        let total: f64 = self.leading.iter().zip(&self.ratios).map(|(l, b)| l / (1.0 - b)).product();
        if let Some(deg) = self.index_set.box_degrees() {
            // total * (1 - prod_j (1 - beta_j^{n_j+1})), without cancellation
            let log_kept: f64 = deg.iter().zip(&self.ratios).map(|(&n, b)| (-b.powi(n as i32 + 1)).ln_1p()).sum();
            return total * -log_kept.exp_m1();
        }
        let kept = compensated_sum(self.eigenvalues.iter().copied());
        let slack = 4.0 * f64::EPSILON * self.eigenvalues.len() as f64 * total;
        (total - kept).max(0.0) + slack
    }

    /// Largest eigenvalue outside the index set.
    pub fn max_eigenvalue_outside(&self) -> f64 {
        self.index_set.margin().iter().map(|nu| self.eigenvalue(nu)).fold(0.0, f64::max)
    }
}

/// Builds the spectral system of `spec` over `index_set`.
pub fn spectral_system(spec: &KernelSpec, index_set: MultiIndexSet) -> Result<SpectralSystem> {
    SpectralSystem::new(spec, index_set)
}

fn check_method(method: &SamplingMethod, sys: &SpectralSystem) -> Result<()> {
    check_dims(method.dim(), &sys.spec)?;
    if method.index_set.indices() != sys.index_set.indices() {
        return Err(shape("sampling method and spectral system use different index sets"));
    }
    Ok(())
}

/// Worst-case L²(mu) error of a sampling method.
///
/// On the index set the error operator has matrix
/// `G[m, nu] = sqrt(lambda_nu) (delta_{m nu} - sum_i e_nu(x_i) coeff[i, m])`
/// and `value = ||G||_2`. Indices outside the set contribute a block whose
/// norm is bounded using the Cramér-type envelope and the eigenvalue tail.
pub fn wce_approximation(method: &SamplingMethod, sys: &SpectralSystem) -> Result<ErrorBracket> {
    check_method(method, sys)?;
    let n = method.len();
    let width = sys.index_set.len();
    let evals = sys.evaluation_matrix(&method.nodes)?;
    let coeffs = DMatrix::from_row_slice(n, width, &method.coeffs);
    // P[m, nu] = sum_i coeff[i, m] e_nu(x_i)
    let p = coeffs.transpose() * &evals;
    let roots: Vec<f64> = sys.eigenvalues.iter().map(|l| l.sqrt()).collect();
    let g = DMatrix::from_fn(width, width, |m, nu| roots[nu] * (if m == nu { 1.0 } else { 0.0 } - p[(m, nu)]));
    let gram = g.transpose() * &g;
    let top = symmetric_max_eigenvalue(&gram)?;
    let value = top.max(0.0).sqrt();

    // || sum_i B(x_i) |coeff_i| ||_2 bounds every column of the off-set block
    let mut weight = vec![0.0; width];
    for i in 0..n {
        let b = sys.envelope(method.nodes.row(i));
        for (acc, c) in weight.iter_mut().zip(method.coeff_row(i)) {
            *acc += b * c.abs();
        }
    }
    let col_norm = weight.iter().map(|v| v * v).sum::<f64>().sqrt();
    let tail_bound = sys.tail_eigen_sum().sqrt() * col_norm + sys.max_eigenvalue_outside().sqrt();
    Ok(ErrorBracket { value, tail_bound })
}

/// Minimal-norm interpolation: `a_i = sum_j (G^{-1})_{ij} M(., x_j)` expanded
/// into the eigenbasis of `sys`.
pub fn spline_method(nodes: &Nodes, sys: &SpectralSystem) -> Result<SamplingMethod> {
    let gram = gram_matrix(nodes, &sys.spec)?;
    let factor = SpdFactor::new(gram)?;
    let evals = sys.evaluation_matrix(nodes)?;
    let solved = factor.solve_mat(&evals);
    let (n, width) = (nodes.len(), sys.index_set.len());
    let mut coeffs = Vec::with_capacity(n * width);
    for i in 0..n {
        for k in 0..width {
            coeffs.push(sys.eigenvalues[k] * solved[(i, k)]);
        }
    }
    SamplingMethod::new(nodes.clone(), sys.index_set.clone(), coeffs)
}

/// Worst-case integration error from the eigen-expansion of a Hermite kernel:
/// `e² = sum_nu beta^nu (delta_{nu 0} - A(e_nu))²` over the box of per-axis
/// degree `degree`, plus a bound for the rest. Free of the cancellation that
/// limits [`wce_integration`] to errors above about `1e-8`. Gaussian kernels
/// go through the integration transference.
pub fn wce_integration_spectral(rule: &QuadratureRule, spec: &KernelSpec, degree: usize) -> Result<ErrorBracket> {
    check_dims(rule.dim(), spec)?;
    match spec.family() {
        Family::Hermite(b) => hermite_integration_spectral(rule, b.as_slice(), degree),
        Family::Gaussian(s) => {
            let k = TransferConstants::new(Problem::Integration, s)?;
            let twin = crate::transference::transfer_quadrature_to_hermite_with(rule, &k)?;
            let inner = hermite_integration_spectral(&twin, k.beta.as_slice(), degree)?;
            Ok(ErrorBracket { value: k.gauss_prefactor * inner.value, tail_bound: k.gauss_prefactor * inner.tail_bound })
        }
    }
}

fn hermite_integration_spectral(rule: &QuadratureRule, beta: &[f64], degree: usize) -> Result<ErrorBracket> {
    let d = beta.len();
    if d > 6 {
        return Err(Error::Budget(format!("spectral integration error supports up to 6 dimensions, got {d}")));
    }
    let n = rule.len();
    // rows[i][j][k] = h_k(x_ij)
    let rows: Vec<Vec<Vec<f64>>> =
        (0..n).map(|i| rule.nodes.row(i).iter().map(|&x| hermite_row_unchecked(degree, x)).collect()).collect();
    let index_set = MultiIndexSet::box_set(&vec![degree; d])?;
    let terms: Vec<f64> = index_set
        .indices()
        .par_iter()
        .map(|nu| {
            let lam: f64 = nu.iter().zip(beta).map(|(&k, b)| b.powi(k as i32)).product();
            let q = compensated_sum((0..n).map(|i| rule.weights[i] * nu.iter().enumerate().map(|(j, &k)| rows[i][j][k]).product::<f64>()));
            let target = if nu.iter().all(|&k| k == 0) { 1.0 } else { 0.0 };
            lam * (target - q) * (target - q)
        })
        .collect();
    let head = compensated_sum(terms);
    let total: f64 = beta.iter().map(|b| 1.0 / (1.0 - b)).product();
    let log_kept: f64 = beta.iter().map(|b| (-b.powi(degree as i32 + 1)).ln_1p()).sum();
    let tail_mass = total * -log_kept.exp_m1();
    let reach: f64 = (0..n)
        .map(|i| rule.weights[i].abs() * rule.nodes.row(i).iter().map(|x| CRAMER_CONSTANT * (x * x / 4.0).exp()).product::<f64>())
        .sum();
    let tail = tail_mass * reach * reach;
    let value = head.sqrt();
    Ok(ErrorBracket { value, tail_bound: (head + tail).sqrt() - value })
}
