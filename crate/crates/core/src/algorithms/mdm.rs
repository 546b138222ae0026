use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, shape, Error, Result};
use crate::hermite_basis::gauss_hermite_rule;
use crate::kernels::{KernelSpec, ShapeRule};
use crate::linalg::compensated_sum;
use crate::transference::beta_from_sigma;
use crate::worst_case::{rule_cost, CostModel, Nodes, QuadratureRule};

use super::smolyak::{anchored_component_eval, smolyak_rule_in_dim, smolyak_terms, NodeAccumulator, RuleCache, SmolyakLevels, MAX_ANCHORED_DIM};

/// Infinite-variate product space seen by the decomposition method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MdmSpace {
    /// Gaussian factors with `sigma_j` from the rule.
    Gaussian(ShapeRule),
    /// Hermite factors with `beta_j` from the rule.
    Hermite(ShapeRule),
}

impl MdmSpace {
    fn validate(&self) -> Result<()> {
        if let MdmSpace::Hermite(r) = self {
            let b = r.sigma(0);
            if !(b > 0.0 && b < 1.0) {
                return Err(domain(format!("Hermite rule must give beta_j in (0, 1), first value is {b}")));
            }
        }
        Ok(())
    }

    /// Kernel parameter of coordinate `j` (0-based).
    pub fn param(&self, j: usize) -> f64 {
        match self {
            MdmSpace::Gaussian(r) | MdmSpace::Hermite(r) => r.sigma(j),
        }
    }

    /// Geometric rate of coordinate `j` on the Hermite side of integration.
    pub fn rate(&self, j: usize) -> f64 {
        match self {
            MdmSpace::Gaussian(r) => beta_from_sigma(crate::kernels::Problem::Integration, r.sigma(j)).unwrap_or(0.0),
            MdmSpace::Hermite(r) => r.sigma(j),
        }
    }

    /// The first `d` coordinates as a finite-dimensional kernel.
    pub fn prefix_spec(&self, d: usize) -> Result<KernelSpec> {
        let params = (0..d).map(|j| self.param(j)).collect();
        match self {
            MdmSpace::Gaussian(_) => KernelSpec::gaussian(params),
            MdmSpace::Hermite(_) => KernelSpec::hermite(params),
        }
    }
}

/// Planner switches.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MdmOptions {
    /// Charge the anchor node once instead of once per component.
    pub anchor_dedup: bool,
}

/// `f(0) + sum_{u in active_sets} B_u(f_u)` with each `B_u` a Smolyak rule on
/// the coordinates `u` built from Gauss–Hermite rules with `m_i = i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PlanJson")]
pub struct MdmPlan {
    active_sets: Vec<Vec<usize>>,
    /// Number of Smolyak nodes of each component.
    budgets: Vec<usize>,
    /// Smolyak level of each component.
    levels: Vec<usize>,
    flattened: QuadratureRule,
    cost: f64,
    #[serde(default)]
    anchor_dedup: bool,
}

#[derive(Deserialize)]
struct PlanJson {
    active_sets: Vec<Vec<usize>>,
    budgets: Vec<usize>,
    levels: Vec<usize>,
    flattened: QuadratureRule,
    cost: f64,
    #[serde(default)]
    anchor_dedup: bool,
}

impl TryFrom<PlanJson> for MdmPlan {
    type Error = Error;
    fn try_from(p: PlanJson) -> Result<Self> {
        if p.active_sets.len() != p.budgets.len() || p.active_sets.len() != p.levels.len() {
            return Err(shape("active_sets, budgets and levels must have equal lengths"));
        }
        let mut seen = BTreeSet::new();
        for (u, &q) in p.active_sets.iter().zip(&p.levels) {
            if u.is_empty() || u.windows(2).any(|w| w[0] >= w[1]) {
                return Err(shape(format!("active set {u:?} must be non-empty and strictly increasing")));
            }
            if q < 2 * u.len() {
                return Err(shape(format!("level {q} of {u:?} is below {}", 2 * u.len())));
            }
            if u.last().copied().unwrap_or(0) >= p.flattened.dim() {
                return Err(shape(format!("active set {u:?} exceeds the flattened dimension {}", p.flattened.dim())));
            }
            if !seen.insert(u.clone()) {
                return Err(shape(format!("active set {u:?} listed twice")));
            }
        }
        Ok(MdmPlan {
            active_sets: p.active_sets,
            budgets: p.budgets,
            levels: p.levels,
            flattened: p.flattened,
            cost: p.cost,
            anchor_dedup: p.anchor_dedup,
        })
    }
}

impl MdmPlan {
    pub fn active_sets(&self) -> &[Vec<usize>] {
        &self.active_sets
    }

    pub fn budgets(&self) -> &[usize] {
        &self.budgets
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn flattened(&self) -> &QuadratureRule {
        &self.flattened
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn anchor_dedup(&self) -> bool {
        self.anchor_dedup
    }

    /// Number of materialized coordinates.
    pub fn dimension(&self) -> usize {
        self.flattened.dim()
    }
}

/// Component rule in local coordinates: Smolyak nodes with every coordinate
/// nonzero (the anchored component vanishes elsewhere), and its expansion
/// into anchored evaluations of `f`.
struct Component {
    rule: QuadratureRule,
    /// Local points with signed weights, anchor (all zeros) included.
    expansion: (Vec<f64>, Vec<f64>),
    /// Active-variable counts of the expansion points.
    active: Vec<usize>,
}

impl Component {
    fn build(k: usize, q: usize, cache: &mut RuleCache) -> Result<Self> {
        let full = smolyak_rule_in_dim(k, &SmolyakLevels::linear(q), cache)?;
        let mut acc = NodeAccumulator::new(k);
        for (x, &w) in full.nodes().rows().zip(full.weights()) {
            if x.iter().all(|v| *v != 0.0) {
                acc.add(x, w);
            }
        }
        let rule = acc.into_rule()?;
        let mut exp = NodeAccumulator::new(k);
        exp.add(&vec![0.0; k], 0.0);
        let mut point = vec![0.0; k];
        for (y, &w) in rule.nodes().rows().zip(rule.weights()) {
            for mask in 0u32..(1u32 << k) {
                for t in 0..k {
                    point[t] = if mask >> t & 1 == 1 { y[t] } else { 0.0 };
                }
                let missing = k - mask.count_ones() as usize;
                exp.add(&point, if missing.is_multiple_of(2) { w } else { -w });
            }
        }
        let (_, data, weights) = exp.into_parts();
        let mut kept_data = Vec::with_capacity(data.len());
        let mut kept_w = Vec::with_capacity(weights.len());
        let mut active = Vec::with_capacity(weights.len());
        for (i, &w) in weights.iter().enumerate() {
            let x = &data[i * k..(i + 1) * k];
            let act = x.iter().filter(|v| **v != 0.0).count();
            // the anchor stays even if its weight cancels
            if w != 0.0 || act == 0 {
                kept_data.extend_from_slice(x);
                kept_w.push(w);
                active.push(act);
            }
        }
        Ok(Self { rule, expansion: (kept_data, kept_w), active })
    }

    fn cost(&self, model: &CostModel, dedup: bool) -> Result<f64> {
        let mut total = 0.0;
        for &a in &self.active {
            if a == 0 && dedup {
                continue;
            }
            total += model.evaluation_cost(a)?;
        }
        Ok(total)
    }
}

struct ComponentCache {
    rules: RuleCache,
    built: HashMap<(usize, usize), Option<(Component, f64)>>,
    model: CostModel,
    dedup: bool,
}

impl ComponentCache {
    fn new(model: &CostModel, dedup: bool) -> Self {
        Self { rules: RuleCache::new(), built: HashMap::new(), model: model.clone(), dedup }
    }

    /// Component and its cost, `None` when it cannot be built within the
    /// size guards or priced by the cost model.
    fn get(&mut self, k: usize, q: usize) -> Option<&(Component, f64)> {
        if !self.built.contains_key(&(k, q)) {
            let built = Component::build(k, q, &mut self.rules).ok().and_then(|c| {
                let cost = c.cost(&self.model, self.dedup).ok()?;
                Some((c, cost))
            });
            self.built.insert((k, q), built);
        }
        self.built[&(k, q)].as_ref()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Step {
    ratio: f64,
    set: Vec<usize>,
    level: usize,
    dcost: f64,
}

fn better(a: &Step, b: &Step) -> bool {
    a.ratio > b.ratio || (a.ratio == b.ratio && a.set < b.set)
}

/// Greedy cost-benefit planner.
///
/// Each component `u` is scored by the surrogate
/// `E(u, l) = prod_{j in u} beta_j * (max_{j in u} beta_j)^l`, where `l = 0`
/// means `u` is not yet active and `l >= 1` means it runs at Smolyak level
/// `2|u| + l - 1`. Each step grants the move with the largest
/// `(E(u, l) - E(u, l + 1)) / (extra cost)` that still fits the budget; ties go
/// to the lexicographically smaller `u`. A set becomes eligible once all of its
/// subsets with one element fewer are active.
pub fn mdm_build(space: &MdmSpace, budget: f64, model: &CostModel, options: MdmOptions) -> Result<MdmPlan> {
    space.validate()?;
    let anchor = model.evaluation_cost(0)?;
    if !(budget >= anchor) {
        return Err(Error::Budget(format!("budget {budget} is below the anchor evaluation cost {anchor}")));
    }
    let mut cache = ComponentCache::new(model, options.anchor_dedup);
    let mut spent = anchor;
    let mut active: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut singles: BTreeSet<usize> = BTreeSet::new();
    let mut candidates: BTreeSet<Vec<usize>> = BTreeSet::new();
    // a singleton's gain beta (1 - beta) peaks at beta = 1/2, so the best
    // unused singleton is the last one above that rate or the first below it
    let mut wide = 0usize;
    while space.rate(wide) > 0.5 {
        wide += 1;
    }
    let mut frontier = wide;

    let gain = |u: &[usize], l: usize| -> f64 {
        let rates: Vec<f64> = u.iter().map(|&j| space.rate(j)).collect();
        let top = rates.iter().copied().fold(0.0, f64::max);
        rates.iter().product::<f64>() * top.powi(l as i32) * (1.0 - top)
    };

    loop {
        let mut best: Option<Step> = None;
        let consider = |step: Step, best: &mut Option<Step>| {
            if spent + step.dcost <= budget && best.as_ref().is_none_or(|b| better(&step, b)) {
                *best = Some(step);
            }
        };
        for (u, &q) in &active {
            let k = u.len();
            let Some(now) = cache.get(k, q).map(|c| c.1) else { continue };
            let Some(next) = cache.get(k, q + 1).map(|c| c.1) else { continue };
            let dcost = next - now;
            let g = gain(u, q + 1 - 2 * k);
            let ratio = if dcost > 0.0 { g / dcost } else { f64::INFINITY };
            consider(Step { ratio, set: u.clone(), level: q + 1, dcost }, &mut best);
        }
        let below = (0..wide).rev().find(|j| !singles.contains(j));
        let fresh = below.into_iter().chain(std::iter::once(frontier)).map(|j| vec![j]);
        for u in fresh.chain(candidates.iter().cloned()) {
            let k = u.len();
            let Some(c) = cache.get(k, 2 * k).map(|c| c.1) else { continue };
            let g = gain(&u, 0);
            let ratio = if c > 0.0 { g / c } else { f64::INFINITY };
            consider(Step { ratio, set: u, level: 2 * k, dcost: c }, &mut best);
        }
        let Some(step) = best else { break };
        spent += step.dcost;
        let fresh = !active.contains_key(&step.set);
        active.insert(step.set.clone(), step.level);
        if fresh {
            candidates.remove(&step.set);
            if step.set.len() == 1 {
                let j = step.set[0];
                singles.insert(j);
                while singles.contains(&frontier) {
                    frontier += 1;
                }
            }
            if step.set.len() < MAX_ANCHORED_DIM {
                for &j in &singles {
                    if step.set.contains(&j) {
                        continue;
                    }
                    let mut w = step.set.clone();
                    w.push(j);
                    w.sort_unstable();
                    let admissible = (0..w.len()).all(|i| {
                        let mut sub = w.clone();
                        sub.remove(i);
                        active.contains_key(&sub)
                    });
                    if admissible && !active.contains_key(&w) {
                        candidates.insert(w);
                    }
                }
            }
        }
    }
    assemble(&active, &mut cache, model, options.anchor_dedup)
}

fn assemble(active: &BTreeMap<Vec<usize>, usize>, cache: &mut ComponentCache, model: &CostModel, dedup: bool) -> Result<MdmPlan> {
    let mut sets: Vec<(&Vec<usize>, &usize)> = active.iter().collect();
    sets.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(b.0)));
    let dim = sets.iter().map(|(u, _)| u.last().unwrap() + 1).max().unwrap_or(1);
    let mut data = vec![0.0; dim];
    let mut weights = vec![1.0];
    let mut budgets = Vec::with_capacity(sets.len());
    let mut levels = Vec::with_capacity(sets.len());
    let mut point = vec![0.0; dim];
    for (u, &q) in &sets {
        let k = u.len();
        let (comp, _) = cache.get(k, q).ok_or_else(|| Error::Budget(format!("component {u:?} at level {q} cannot be built")))?;
        budgets.push(comp.rule.len());
        levels.push(q);
        let (local, w) = &comp.expansion;
        for (i, &wi) in w.iter().enumerate() {
            let x = &local[i * k..(i + 1) * k];
            if dedup && x.iter().all(|v| *v == 0.0) {
                weights[0] += wi;
                continue;
            }
            point.iter_mut().for_each(|v| *v = 0.0);
            for (t, &j) in u.iter().enumerate() {
                point[j] = x[t];
            }
            data.extend_from_slice(&point);
            weights.push(wi);
        }
    }
    let flattened = QuadratureRule::new(Nodes::new(dim, data)?, weights)?;
    let cost = rule_cost(&flattened, model)?;
    Ok(MdmPlan {
        active_sets: sets.iter().map(|(u, _)| (*u).clone()).collect(),
        budgets,
        levels,
        flattened,
        cost,
        anchor_dedup: dedup,
    })
}

/// Applies the flattened rule.
pub fn mdm_apply<F: FnMut(&[f64]) -> f64>(plan: &MdmPlan, f: F) -> Result<f64> {
    plan.flattened.apply(f)
}

/// `f(0) + sum_u B_u(f_u)` evaluated component by component.
pub fn mdm_apply_components<F: FnMut(&[f64]) -> f64>(plan: &MdmPlan, mut f: F) -> Result<f64> {
    let dim = plan.dimension();
    let zero = vec![0.0; dim];
    let base = f(&zero);
    if !base.is_finite() {
        return Err(Error::Evaluation("integrand is not finite at the anchor".into()));
    }
    let mut total = base;
    let mut cache = RuleCache::new();
    let mut point = vec![0.0; dim];
    for (u, &q) in plan.active_sets.iter().zip(&plan.levels) {
        let comp = Component::build(u.len(), q, &mut cache)?;
        let mut part = 0.0;
        for (y, &w) in comp.rule.nodes().rows().zip(comp.rule.weights()) {
            point.iter_mut().for_each(|v| *v = 0.0);
            for (t, &j) in u.iter().enumerate() {
                point[j] = y[t];
            }
            part += w * anchored_component_eval(&mut f, u, &point)?;
        }
        total += part;
    }
    Ok(total)
}

/// Worst-case integration error of a plan against the infinite-variate
/// kernel, with the products over coordinates `>= trunc` replaced by 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdmError {
    /// Error of the truncated problem.
    pub value: f64,
    /// Rigorous bound on `|exact - value|` caused by the truncation.
    pub tail_bound: f64,
    /// Estimate of floating-point error in `value`.
    pub rounding: f64,
}

/// Per-coordinate inner products between the functionals `delta_0`, the
/// integral, and `D_m = Q_m - delta_0`, each divided by the matching
/// background factor.
struct CoordinateTable {
    sizes: Vec<usize>,
    /// `<D_a, D_b> / k(0,0)`.
    dd: Vec<Vec<f64>>,
    /// `<D_a, delta_0> / k(0,0)`.
    d0: Vec<f64>,
    /// `<D_a, I> / m(0)`.
    di: Vec<f64>,
}

impl CoordinateTable {
    fn new(spec: &KernelSpec, sizes: Vec<usize>) -> Result<Self> {
        let k00 = spec.factor_kernel(0, 0.0, 0.0);
        let m0 = spec.factor_embedding(0, 0.0);
        let rules = sizes.iter().map(|&m| gauss_hermite_rule(m)).collect::<Result<Vec<_>>>()?;
        let to_zero: Vec<f64> = rules
            .iter()
            .map(|r| compensated_sum(r.nodes().iter().zip(r.weights()).map(|(&x, w)| w * spec.factor_kernel(0, x, 0.0))))
            .collect();
        let d0 = to_zero.iter().map(|v| (v - k00) / k00).collect();
        let di = rules
            .iter()
            .map(|r| (compensated_sum(r.nodes().iter().zip(r.weights()).map(|(&x, w)| w * spec.factor_embedding(0, x))) - m0) / m0)
            .collect();
        let n = sizes.len();
        let mut dd = vec![vec![0.0; n]; n];
        for a in 0..n {
            for b in a..n {
                let (ra, rb) = (&rules[a], &rules[b]);
                let cross = compensated_sum(ra.nodes().iter().zip(ra.weights()).flat_map(|(&x, &wx)| {
                    rb.nodes().iter().zip(rb.weights()).map(move |(&y, &wy)| wx * wy * spec.factor_kernel(0, x, y))
                }));
                let v = compensated_sum([cross, -to_zero[a], -to_zero[b], k00]) / k00;
                dd[a][b] = v;
                dd[b][a] = v;
            }
        }
        Ok(Self { sizes, dd, d0, di })
    }

    fn slot(&self, m: usize) -> usize {
        self.sizes.binary_search(&m).expect("size registered")
    }
}

struct Term {
    /// `(coordinate, slot)` sorted by coordinate.
    factors: Vec<(usize, usize)>,
    coeff: f64,
}

/// Exact worst-case integration error of the plan on the infinite-variate
/// space, truncated to the first `trunc` coordinates.
///
/// Uses the product structure `B = delta_0 + sum_u sum_i c_i (x)_{j in u}
/// (Q_{m_{i_j}} - delta_0)`, so every inner product factorizes into univariate
/// pieces and the node Gram matrix of the flattened rule is never formed.
pub fn mdm_wce(plan: &MdmPlan, space: &MdmSpace, trunc: usize) -> Result<MdmError> {
    space.validate()?;
    if let Some(u) = plan.active_sets.iter().find(|u| u.last().is_some_and(|&j| j >= trunc)) {
        return Err(shape(format!("active set {u:?} reaches beyond the truncation {trunc}")));
    }
    // products over j < trunc of k_j(0,0), m_j(0), and the double integral
    let (ln_kk, ln_ki, ln_ii): (Vec<f64>, Vec<f64>, Vec<f64>) = match space {
        MdmSpace::Gaussian(r) => {
            let s2: Vec<f64> = (0..trunc).map(|j| r.sigma(j).powi(2)).collect();
            (vec![0.0], s2.iter().map(|s| -0.5 * (2.0 * s).ln_1p()).collect(), s2.iter().map(|s| -0.5 * (4.0 * s).ln_1p()).collect())
        }
        MdmSpace::Hermite(r) => ((0..trunc).map(|j| -0.5 * (-r.sigma(j).powi(2)).ln_1p()).collect(), vec![0.0], vec![0.0]),
    };
    let p_kk = compensated_sum(ln_kk).exp();
    let p_ki = compensated_sum(ln_ki).exp();
    let p_ii = compensated_sum(ln_ii).exp();

    let mut sizes_at: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    let mut raw_terms: Vec<(Vec<usize>, Vec<usize>, f64)> = Vec::new();
    for (u, &q) in plan.active_sets.iter().zip(&plan.levels) {
        let levels = SmolyakLevels::linear(q);
        for t in smolyak_terms(u.len(), &levels)? {
            let ms: Vec<usize> = t.index.iter().map(|&i| levels.size(i)).collect();
            // Q_1 is delta_0, so its difference factor vanishes
            if ms.contains(&1) {
                continue;
            }
            for (&j, &m) in u.iter().zip(&ms) {
                sizes_at.entry(j).or_default().insert(m);
            }
            raw_terms.push((u.clone(), ms, t.coeff));
        }
    }
    let tables: BTreeMap<usize, CoordinateTable> = sizes_at
        .into_par_iter()
        .map(|(j, s)| {
            let spec = space.prefix_spec(j + 1)?.restrict(&[j])?;
            Ok((j, CoordinateTable::new(&spec, s.into_iter().collect())?))
        })
        .collect::<Result<_>>()?;
    let terms: Vec<Term> = raw_terms
        .into_iter()
        .map(|(u, ms, coeff)| Term { factors: u.iter().zip(&ms).map(|(&j, &m)| (j, tables[&j].slot(m))).collect(), coeff })
        .collect();

    let integral_pairing = |t: &Term| -> f64 { p_ki * t.factors.iter().map(|&(j, s)| tables[&j].di[s]).product::<f64>() };
    let pairing = |a: &Term, b: &Term| -> f64 {
        let (mut i, mut k) = (0, 0);
        let mut v = 1.0;
        while i < a.factors.len() || k < b.factors.len() {
            let ja = a.factors.get(i).map_or(usize::MAX, |f| f.0);
            let jb = b.factors.get(k).map_or(usize::MAX, |f| f.0);
            if ja == jb {
                v *= tables[&ja].dd[a.factors[i].1][b.factors[k].1];
                i += 1;
                k += 1;
            } else if ja < jb {
                v *= tables[&ja].d0[a.factors[i].1];
                i += 1;
            } else {
                v *= tables[&jb].d0[b.factors[k].1];
                k += 1;
            }
        }
        v
    };

    // anchor term: <I, delta> = p_ki, <delta, delta> = p_kk, <delta, T> = p_kk prod d0
    let anchor = Term { factors: Vec::new(), coeff: 1.0 };
    let all: Vec<&Term> = std::iter::once(&anchor).chain(terms.iter()).collect();
    let cross: Vec<f64> = all.iter().map(|t| t.coeff * integral_pairing(t)).collect();
    let rows: Vec<(f64, f64)> = (0..all.len())
        .into_par_iter()
        .map(|s| {
            let a = all[s];
            let vals = (s..all.len()).map(|t| {
                let v = a.coeff * all[t].coeff * pairing(a, all[t]);
                if t == s {
                    v
                } else {
                    2.0 * v
                }
            });
            let collected: Vec<f64> = vals.collect();
            let mag = collected.iter().map(|v| v.abs()).sum::<f64>();
            (compensated_sum(collected), mag)
        })
        .collect();
    let gram = p_kk * compensated_sum(rows.iter().map(|r| r.0));
    let gram_mag = p_kk * rows.iter().map(|r| r.1).sum::<f64>();
    let x = compensated_sum(cross.iter().copied());
    let x_mag: f64 = cross.iter().map(|v| v.abs()).sum();
    let e2 = compensated_sum([p_ii, -2.0 * x, gram]);
    let depth = all.iter().map(|t| t.factors.len()).max().unwrap_or(0) as f64;
    let rounding_sq = 4.0 * f64::EPSILON * (depth + 8.0) * (p_ii + 2.0 * x_mag + gram_mag);
    if e2 < -rounding_sq.max(crate::worst_case::NEGATIVE_SQUARE_TOLERANCE) {
        return Err(Error::NegativeSquaredError { value: e2 });
    }
    let value = e2.max(0.0).sqrt();

    let delta = match space {
        MdmSpace::Gaussian(r) => {
            let s = r.tail_square_sum(trunc);
            -(-2.0 * s).exp_m1() * p_ii + 2.0 * -(-s).exp_m1() * x.abs()
        }
        MdmSpace::Hermite(r) => {
            let s = r.tail_square_sum(trunc);
            let b = r.sigma(trunc);
            (s / (2.0 * (1.0 - b * b))).exp_m1() * gram.abs()
        }
    };
    let bound = |d: f64| if value > 0.0 { d.sqrt().min(d / value) } else { d.sqrt() };
    Ok(MdmError { value, tail_bound: bound(delta), rounding: bound(rounding_sq) })
}
