use std::collections::HashMap;

use crate::error::{domain, shape, Error, Result};
use crate::hermite_basis::{gauss_hermite_rule, QuadratureRule1D};
use crate::worst_case::{Nodes, QuadratureRule};

use super::tensor::TENSOR_BUDGET;

/// Largest subset handled by the `2^|u|` anchored expansion.
pub const MAX_ANCHORED_DIM: usize = 20;

/// Univariate rule sizes `m_1 < m_2 < ...` and a Smolyak level `q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmolyakLevels {
    schedule: Vec<usize>,
    level: usize,
}

impl SmolyakLevels {
    pub fn new(schedule: Vec<usize>, level: usize) -> Result<Self> {
        match schedule.first() {
            None => return Err(domain("Smolyak schedule is empty")),
            Some(&0) => return Err(domain("Smolyak schedule must start at m_1 >= 1")),
            _ => {}
        }
        if let Some(w) = schedule.windows(2).find(|w| w[1] <= w[0]) {
            return Err(domain(format!("Smolyak schedule must increase strictly, found {} then {}", w[0], w[1])));
        }
        Ok(Self { schedule, level })
    }

    /// `m_i = i` up to the largest index level `q` can reach.
    pub fn linear(level: usize) -> Self {
        Self { schedule: (1..=level.max(1)).collect(), level }
    }

    pub fn schedule(&self) -> &[usize] {
        &self.schedule
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// `m_i` for 1-based `i`.
    pub fn size(&self, i: usize) -> usize {
        self.schedule[i - 1]
    }
}

/// One tensor term `coeff * (x)_j Q_{m_{i_j}}` of the combination technique.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SmolyakTerm {
    pub index: Vec<usize>,
    pub coeff: f64,
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64).round()
}

/// Terms of `sum_{q-k+1 <= |i| <= q} (-1)^{q-|i|} C(k-1, q-|i|) (x) Q_{m_{i_j}}`
/// in dimension `k`, multi-indices in lexicographic order.
pub(crate) fn smolyak_terms(k: usize, levels: &SmolyakLevels) -> Result<Vec<SmolyakTerm>> {
    let q = levels.level;
    if k == 0 {
        return Err(shape("Smolyak rule needs a non-empty coordinate set"));
    }
    if q < k {
        return Err(domain(format!("Smolyak level {q} is below the dimension {k}")));
    }
    let top = q - k + 1;
    if top > levels.schedule.len() {
        return Err(domain(format!("level {q} in dimension {k} needs m_{top}, schedule has {} entries", levels.schedule.len())));
    }
    let low = q.saturating_sub(k - 1).max(k);
    let mut terms = Vec::new();
    let mut idx = vec![1usize; k];
    loop {
        let s: usize = idx.iter().sum();
        if s >= low && s <= q {
            let r = q - s;
            let sign = if r.is_multiple_of(2) { 1.0 } else { -1.0 };
            terms.push(SmolyakTerm { index: idx.clone(), coeff: sign * binomial(k - 1, r) });
        }
        // odometer over 1..=top with early exit when the sum is too large
        let mut j = k;
        loop {
            if j == 0 {
                return Ok(terms);
            }
            j -= 1;
            if idx[j] < top && idx.iter().sum::<usize>() < q {
                idx[j] += 1;
                break;
            }
            idx[j] = 1;
        }
    }
}

pub(crate) struct RuleCache {
    rules: HashMap<usize, QuadratureRule1D>,
}

impl RuleCache {
    pub fn new() -> Self {
        Self { rules: HashMap::new() }
    }

    pub fn get(&mut self, m: usize) -> Result<&QuadratureRule1D> {
        if let std::collections::hash_map::Entry::Vacant(e) = self.rules.entry(m) {
            e.insert(gauss_hermite_rule(m)?);
        }
        Ok(&self.rules[&m])
    }
}

fn key(x: &[f64]) -> Vec<u64> {
    // +0.0 and -0.0 are the same node
    x.iter().map(|v| if *v == 0.0 { 0 } else { v.to_bits() }).collect()
}

/// Node list with exact-equality merging, first-appearance order.
#[derive(Default)]
pub(crate) struct NodeAccumulator {
    dim: usize,
    index: HashMap<Vec<u64>, usize>,
    data: Vec<f64>,
    weights: Vec<f64>,
}

impl NodeAccumulator {
    pub fn new(dim: usize) -> Self {
        Self { dim, ..Default::default() }
    }

    pub fn add(&mut self, x: &[f64], w: f64) {
        match self.index.get(&key(x)) {
            Some(&i) => self.weights[i] += w,
            None => {
                self.index.insert(key(x), self.weights.len());
                self.data.extend(x.iter().map(|v| if *v == 0.0 { 0.0 } else { *v }));
                self.weights.push(w);
            }
        }
    }

    pub fn into_parts(self) -> (usize, Vec<f64>, Vec<f64>) {
        (self.dim, self.data, self.weights)
    }

    pub fn into_rule(self) -> Result<QuadratureRule> {
        QuadratureRule::new(Nodes::new(self.dim, self.data)?, self.weights)
    }
}

fn check_subset(u: &[usize]) -> Result<()> {
    if u.is_empty() {
        return Err(shape("coordinate subset is empty"));
    }
    let mut sorted = u.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(shape(format!("coordinate subset {u:?} has repeated entries")));
    }
    Ok(())
}

pub(crate) fn smolyak_rule_in_dim(k: usize, levels: &SmolyakLevels, cache: &mut RuleCache) -> Result<QuadratureRule> {
    let terms = smolyak_terms(k, levels)?;
    let mut raw = 0usize;
    for t in &terms {
        let size = t.index.iter().try_fold(1usize, |acc, &i| acc.checked_mul(levels.size(i)));
        raw = size.and_then(|s| raw.checked_add(s)).filter(|r| *r <= TENSOR_BUDGET).ok_or_else(|| {
            Error::Budget(format!("Smolyak level {} in dimension {k} exceeds {TENSOR_BUDGET} nodes", levels.level))
        })?;
    }
    let mut acc = NodeAccumulator::new(k);
    let mut point = vec![0.0; k];
    for t in &terms {
        let factors: Vec<QuadratureRule1D> = t.index.iter().map(|&i| cache.get(levels.size(i)).cloned()).collect::<Result<_>>()?;
        let mut idx = vec![0usize; k];
        loop {
            let mut w = t.coeff;
            for j in 0..k {
                point[j] = factors[j].nodes()[idx[j]];
                w *= factors[j].weights()[idx[j]];
            }
            acc.add(&point, w);
            let mut j = k;
            loop {
                if j == 0 {
                    break;
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] < factors[j].len() {
                    break;
                }
                idx[j] = 0;
            }
            if idx.iter().all(|&v| v == 0) {
                break;
            }
        }
    }
    acc.into_rule()
}

/// Smolyak rule from Gauss–Hermite building blocks on the coordinates `u`,
/// returned in local coordinates (column `t` is coordinate `u[t]`), with
/// exactly coinciding nodes merged.
pub fn smolyak_rule(u: &[usize], levels: &SmolyakLevels) -> Result<QuadratureRule> {
    check_subset(u)?;
    smolyak_rule_in_dim(u.len(), levels, &mut RuleCache::new())
}

/// `sum_{v ⊆ u} (-1)^{|u \ v|} f(x_v, 0)`: the anchored component `f_u` at
/// a point `x` supported on `u`.
pub fn anchored_component_eval<F: FnMut(&[f64]) -> f64>(mut f: F, u: &[usize], x: &[f64]) -> Result<f64> {
    if u.len() > MAX_ANCHORED_DIM {
        return Err(Error::Budget(format!("anchored expansion over {} coordinates exceeds {MAX_ANCHORED_DIM}", u.len())));
    }
    let mut sorted = u.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(shape(format!("coordinate subset {u:?} has repeated entries")));
    }
    if let Some(&j) = u.iter().find(|&&j| j >= x.len()) {
        return Err(shape(format!("coordinate {j} is outside a point of dimension {}", x.len())));
    }
    if let Some((j, v)) = x.iter().enumerate().find(|(j, v)| **v != 0.0 && !u.contains(j)) {
        return Err(domain(format!("point has x_{j} = {v} outside the subset {u:?}")));
    }
    let k = u.len();
    let mut point = vec![0.0; x.len()];
    let mut acc = 0.0;
    for mask in 0u32..(1u32 << k) {
        for (t, &j) in u.iter().enumerate() {
            point[j] = if mask >> t & 1 == 1 { x[j] } else { 0.0 };
        }
        let v = f(&point);
        if !v.is_finite() {
            return Err(Error::Evaluation(format!("integrand is not finite at {point:?}")));
        }
        let missing = k - mask.count_ones() as usize;
        acc += if missing.is_multiple_of(2) { v } else { -v };
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules() {
        assert!(SmolyakLevels::new(vec![], 1).is_err());
        assert!(SmolyakLevels::new(vec![0, 1], 1).is_err());
        assert!(SmolyakLevels::new(vec![1, 3, 3], 1).is_err());
        assert!(SmolyakLevels::new(vec![1, 3, 7], 2).is_ok());
    }

    #[test]
    fn univariate_telescopes() {
        for k in 1..8 {
            let r = smolyak_rule(&[4], &SmolyakLevels::linear(k)).unwrap();
            let gh = gauss_hermite_rule(k).unwrap();
            assert_eq!(r.nodes().as_slice(), gh.nodes());
            assert_eq!(r.weights(), gh.weights());
        }
    }

    #[test]
    fn two_dim_level_two() {
        let r = smolyak_rule(&[0, 1], &SmolyakLevels::linear(2)).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.nodes().row(0), &[0.0, 0.0]);
        assert_eq!(r.weights(), &[1.0]);
    }

    #[test]
    fn weight_sums_and_exactness() {
        for (k, q) in [(2, 5), (3, 6), (4, 8)] {
            let r = smolyak_rule(&(0..k).collect::<Vec<_>>(), &SmolyakLevels::linear(q)).unwrap();
            assert!((r.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            // x_1² x_2² has expectation 1 once both directions carry 2 points
            let v = r.apply(|x| x[0] * x[0] * x[1] * x[1]).unwrap();
            assert!((v - 1.0).abs() < 1e-12, "k={k} q={q}: {v}");
        }
        let nested = SmolyakLevels::new(vec![1, 3, 7], 4).unwrap();
        let r = smolyak_rule(&[0, 1], &nested).unwrap();
        assert!((r.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((r.apply(|x| x[0].powi(4)).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn term_structure() {
        let t = smolyak_terms(2, &SmolyakLevels::linear(4)).unwrap();
        let summary: Vec<(Vec<usize>, f64)> = t.into_iter().map(|t| (t.index, t.coeff)).collect();
        assert_eq!(
            summary,
            vec![(vec![1, 2], -1.0), (vec![1, 3], 1.0), (vec![2, 1], -1.0), (vec![2, 2], 1.0), (vec![3, 1], 1.0)]
        );
        assert!(smolyak_terms(3, &SmolyakLevels::linear(2)).is_err());
    }

    #[test]
    fn anchored_examples() {
        let f = |x: &[f64]| x[0] * x[1];
        assert_eq!(anchored_component_eval(f, &[0, 1], &[2.0, 3.0]).unwrap(), 6.0);
        assert_eq!(anchored_component_eval(|_| 4.5, &[1], &[0.0, 3.0]).unwrap(), 0.0);
        assert_eq!(anchored_component_eval(|x| x[0], &[1], &[0.0, 3.0]).unwrap(), 0.0);
        assert!(anchored_component_eval(|x| x[0], &[1], &[1.0, 3.0]).is_err());
        let big: Vec<usize> = (0..21).collect();
        assert!(matches!(anchored_component_eval(|_| 1.0, &big, &[0.0; 21]), Err(Error::Budget(_))));
    }

    #[test]
    fn anchored_completeness() {
        // multilinear f = sum over subsets of prod x_j, with distinct weights
        for k in 1..=6usize {
            let coef = |mask: usize| 1.0 + mask as f64 * 0.37;
            let f = |x: &[f64]| {
                (0..1usize << k).map(|m| coef(m) * (0..k).filter(|j| m >> j & 1 == 1).map(|j| x[j]).product::<f64>()).sum::<f64>()
            };
            let x: Vec<f64> = (0..k).map(|j| 0.3 + 0.41 * j as f64).collect();
            let mut total = f(&vec![0.0; k]);
            for mask in 1usize..(1 << k) {
                let u: Vec<usize> = (0..k).filter(|j| mask >> j & 1 == 1).collect();
                let mut xu = vec![0.0; k];
                for &j in &u {
                    xu[j] = x[j];
                }
                total += anchored_component_eval(f, &u, &xu).unwrap();
            }
            assert!((total - f(&x)).abs() <= 1e-12 * f(&x).abs());
        }
    }
}
