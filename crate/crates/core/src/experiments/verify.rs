//! Randomized and grid batteries checking the library against independent
//! oracles. Each battery returns one [`Check`].

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::algorithms::gh_rule_on_space;
use crate::error::{Error, Result};
use crate::hermite_basis::{gauss_hermite_rule, normal_moment, QuadratureRule1D};
use crate::kernels::{hermite_kernel, hermite_kernel_series, initial_error, KernelSpec, Problem, ShapeSeq};
use crate::linalg::symmetric_max_eigenvalue;
use crate::transference::{q_c_apply, sigma_from_beta, transfer_quadrature_to_hermite, transfer_sampling_to_hermite, TransferConstants};
use crate::worst_case::{
    rule_cost, spectral_system, spline_method, wce_approximation, wce_integration, wce_integration_spectral, CostModel, MultiIndexSet, Nodes, QuadratureRule,
};

use super::linear_fit;
use super::studies::{gh_hermite_error, spectral_degree};

/// Outcome of one battery.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }

    fn from_result(name: &'static str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((passed, detail)) => Self::new(name, passed, detail),
            Err(e) => Self::new(name, false, format!("error: {e}")),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Transference,
    Spectral,
    Mehler,
    All,
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "transference" => Ok(Suite::Transference),
            "spectral" => Ok(Suite::Spectral),
            "mehler" => Ok(Suite::Mehler),
            "all" => Ok(Suite::All),
            other => Err(Error::Parse(format!("unknown suite '{other}' (expected transference, spectral, mehler or all)"))),
        }
    }
}

const SEED: u64 = 0x5eed;

pub fn run_suite(suite: Suite) -> Vec<Check> {
    let mut out = Vec::new();
    if matches!(suite, Suite::Transference | Suite::All) {
        out.push(integration_transference(100, SEED));
        out.push(approximation_transference(12, SEED));
        out.push(cost_invariance(50, SEED));
        out.push(q_c_isometry(20, SEED));
        out.push(dilated_integral_identity(20, SEED));
    }
    if matches!(suite, Suite::Spectral | Suite::All) {
        out.push(initial_errors(20, SEED));
        out.push(gh_moments(64));
        out.push(gh_sandwich());
    }
    if matches!(suite, Suite::Mehler | Suite::All) {
        out.push(mehler_series(None));
    }
    out
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn log_uniform(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + r.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

fn normal(r: &mut ChaCha8Rng) -> f64 {
    r.sample(StandardNormal)
}

/// Terms needed so that `sum_{nu >= N} beta^nu 1.1² e^{(x² + y²)/4}` stays
/// below `1e-17` relative to the Cauchy–Schwarz scale on `[-4, 4]²`.
fn mehler_terms(beta: f64) -> usize {
    let budget = 1e-17 * (1.0 - beta) / (1.21 * 8f64.exp());
    (budget.ln() / beta.ln()).ceil() as usize
}

/// Closed Mehler form against the truncated series on `x, y ∈ [-4, 4]`
/// (step 1/2), `beta ∈ {0.1, 0.5, 0.9}`, relative `1e-12` against
/// `sqrt(k(x,x) k(y,y))`. `None` picks the term count from the tail bound.
pub fn mehler_series(terms: Option<usize>) -> Check {
    let mut worst: f64 = 0.0;
    let mut used = Vec::new();
    for &beta in &[0.1, 0.5, 0.9] {
        let n = terms.unwrap_or_else(|| mehler_terms(beta).max(80));
        used.push(n);
        for i in 0..=16 {
            for j in 0..=16 {
                let (x, y) = (-4.0 + 0.5 * i as f64, -4.0 + 0.5 * j as f64);
                let scale = (hermite_kernel(beta, x, x) * hermite_kernel(beta, y, y)).sqrt();
                let r = (hermite_kernel(beta, x, y) - hermite_kernel_series(beta, x, y, n)).abs() / scale;
                worst = worst.max(r);
            }
        }
    }
    Check::new("mehler vs series", worst <= 1e-12, format!("max relative deviation {worst:.3e} with terms {used:?}"))
}

/// Gauss–Hermite rules with `n <= n_max` integrate `x^p` exactly for
/// `p <= 2n - 1` (relative `1e-10`, odd moments against `E|x|^p`).
pub fn gh_moments(n_max: usize) -> Check {
    let r = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let rule = gauss_hermite_rule(n)?;
            let mut worst: f64 = 0.0;
            for p in 0..2 * n as u32 {
                let got = rule.apply(|x| x.powi(p as i32))?;
                let scale = if p % 2 == 0 { normal_moment(p) } else { normal_moment(2 * p).sqrt() };
                worst = worst.max((got - normal_moment(p)).abs() / scale);
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()
        .map(|v| {
            let worst = v.into_iter().fold(0.0, f64::max);
            (worst <= 1e-10, format!("max relative moment error {worst:.3e} for n <= {n_max}"))
        });
    Check::from_result("gauss-hermite moment exactness", r)
}

fn random_rule(r: &mut ChaCha8Rng, d: usize, n: usize, sparse: bool) -> Result<QuadratureRule> {
    let rows = (0..n)
        .map(|_| (0..d).map(|_| if sparse && r.random::<bool>() { 0.0 } else { normal(r) }).collect())
        .collect();
    let weights = (0..n).map(|_| r.random::<f64>() * 2.0 / n as f64).collect();
    QuadratureRule::from_rows(rows, weights)
}

/// `e(A, L_sigma) = prod (1 + 4 sigma_j²)^{-1/4} e(B, K_beta)` over random
/// rules, relative residual `1e-10`.
pub fn integration_transference(count: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    let mut cases = Vec::with_capacity(count);
    for _ in 0..count {
        let d = r.random_range(1..=4);
        let n = r.random_range(1..=16);
        let sigma: Vec<f64> = (0..d).map(|_| log_uniform(&mut r, 0.05, 3.0)).collect();
        cases.push((sigma, random_rule(&mut r, d, n, false)));
    }
    let res = cases
        .par_iter()
        .map(|(sigma, rule)| {
            let rule = rule.as_ref().map_err(Clone::clone)?;
            let s = ShapeSeq::new(sigma.clone())?;
            let k = TransferConstants::new(Problem::Integration, &s)?;
            let twin = transfer_quadrature_to_hermite(rule, &s)?;
            let ea = wce_integration(rule, &k.gaussian_spec())?;
            let eb = wce_integration(&twin, &k.hermite_spec())?;
            Ok((ea - k.gauss_prefactor * eb).abs() / ea)
        })
        .collect::<Result<Vec<f64>>>()
        .map(|v| {
            let worst = v.into_iter().fold(0.0, f64::max);
            (worst <= 1e-10, format!("max relative residual {worst:.3e} over {count} rules"))
        });
    Check::from_result("integration transference identity", res)
}

/// Approximation transference for spline methods with `n <= 6`, `d <= 2`:
/// the residual is bounded by the reported tails, which stay below `1e-6`.
pub fn approximation_transference(count: usize, seed: u64) -> Check {
    let mut r = rng(seed ^ 0xa);
    let mut cases = Vec::with_capacity(count);
    for _ in 0..count {
        let d = r.random_range(1..=2);
        let n = r.random_range(1..=6);
        let (lo, hi) = if d == 1 { (0.4, 0.8) } else { (0.3, 0.5) };
        let sigma: Vec<f64> = (0..d).map(|_| log_uniform(&mut r, lo, hi)).collect();
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| normal(&mut r)).collect()).collect();
        cases.push((sigma, rows));
    }
    let res = cases
        .par_iter()
        .map(|(sigma, rows)| {
            let d = sigma.len();
            let degree = if d == 1 { 40 } else { 30 };
            let s = ShapeSeq::new(sigma.clone())?;
            let k = TransferConstants::new(Problem::Approximation, &s)?;
            let lam = MultiIndexSet::box_set(&vec![degree; d])?;
            let gsys = spectral_system(&k.gaussian_spec(), lam.clone())?;
            let hsys = spectral_system(&k.hermite_spec(), lam)?;
            let a = spline_method(&Nodes::from_rows(rows.clone())?, &gsys)?;
            let b = transfer_sampling_to_hermite(&a, &s)?;
            let ea = wce_approximation(&a, &gsys)?;
            let eb = wce_approximation(&b, &hsys)?;
            let residual = (ea.value - k.gauss_prefactor * eb.value).abs();
            let tails = ea.tail_bound + k.gauss_prefactor * eb.tail_bound;
            Ok((residual, tails, ea.tail_bound.max(eb.tail_bound)))
        })
        .collect::<Result<Vec<_>>>()
        .map(|v| {
            let ok = v.iter().all(|(res, tails, t)| res <= tails && *t <= 1e-6);
            let worst_res = v.iter().map(|x| x.0).fold(0.0, f64::max);
            let worst_tail = v.iter().map(|x| x.2).fold(0.0, f64::max);
            (ok, format!("max residual {worst_res:.3e}, max tail bound {worst_tail:.3e} over {count} spline methods"))
        });
    Check::from_result("approximation transference identity", res)
}

/// Transference keeps zero coordinates at zero, so the cost under
/// `$(m) = 2^m` is unchanged, exactly.
pub fn cost_invariance(count: usize, seed: u64) -> Check {
    let res = (|| {
        let mut r = rng(seed ^ 0xc);
        let model = CostModel::exponential(2.0)?;
        for _ in 0..count {
            let d = r.random_range(1..=6);
            let n = r.random_range(1..=16);
            let sigma = ShapeSeq::new((0..d).map(|_| log_uniform(&mut r, 0.05, 3.0)).collect())?;
            let rule = random_rule(&mut r, d, n, true)?;
            let twin = transfer_quadrature_to_hermite(&rule, &sigma)?;
            let (ca, cb) = (rule_cost(&rule, &model)?, rule_cost(&twin, &model)?);
            if ca != cb {
                return Ok((false, format!("cost {ca} became {cb}")));
            }
        }
        Ok((true, format!("{count} sparse rules, costs identical")))
    })();
    Check::from_result("cost invariance under transference", res)
}

/// Random polynomial of total degree `<= 6` in `d` variables.
struct Poly {
    terms: Vec<(Vec<i32>, f64)>,
}

impl Poly {
    fn random(r: &mut ChaCha8Rng, d: usize) -> Self {
        let mut terms = Vec::new();
        let mut push = |alpha: Vec<i32>, r: &mut ChaCha8Rng| terms.push((alpha, r.random::<f64>() * 2.0 - 1.0));
        for a in 0..=6 {
            if d == 1 {
                push(vec![a], r);
            } else {
                for b in 0..=6 - a {
                    push(vec![a, b], r);
                }
            }
        }
        Self { terms }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(alpha, c)| c * alpha.iter().zip(x).map(|(&k, v)| v.powi(k)).product::<f64>()).sum()
    }
}

fn tensor_apply(rule: &QuadratureRule1D, d: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
    let (x, w) = (rule.nodes(), rule.weights());
    match d {
        1 => x.iter().zip(w).map(|(a, wa)| wa * f(&[*a])).sum(),
        _ => x.iter().zip(w).map(|(a, wa)| wa * x.iter().zip(w).map(|(b, wb)| wb * f(&[*a, *b])).sum::<f64>()).sum(),
    }
}

/// `||Q_c f||_{L²(mu)} = ||f||_{L²(mu)}` for random polynomials, relative `1e-8`.
pub fn q_c_isometry(count: usize, seed: u64) -> Check {
    let res = (|| {
        let mut r = rng(seed ^ 0x9c);
        let exact = gauss_hermite_rule(8)?;
        let fine = gauss_hermite_rule(200)?;
        let mut worst: f64 = 0.0;
        for _ in 0..count {
            let d = r.random_range(1..=2);
            let c: Vec<f64> = (0..d).map(|_| 1.0 + 2.0 * r.random::<f64>()).collect();
            let f = Poly::random(&mut r, d);
            let lhs = tensor_apply(&fine, d, |x| q_c_apply(&c, |y| f.eval(y), x).unwrap().powi(2));
            let rhs = tensor_apply(&exact, d, |x| f.eval(x).powi(2));
            worst = worst.max((lhs.sqrt() - rhs.sqrt()).abs() / rhs.sqrt());
        }
        Ok((worst <= 1e-8, format!("max relative norm deviation {worst:.3e} over {count} polynomials")))
    })();
    Check::from_result("Q_c isometry", res)
}

/// `I(Q_c f ∘ t_tau) = tau_* / c_*^{1/2} I(f)` with `tau_j² = (c_j² + 1) / 2`
/// and `t_tau(x) = x / tau`, relative `1e-8`.
pub fn dilated_integral_identity(count: usize, seed: u64) -> Check {
    let res = (|| {
        let mut r = rng(seed ^ 0x13);
        let exact = gauss_hermite_rule(8)?;
        let fine = gauss_hermite_rule(160)?;
        let mut worst: f64 = 0.0;
        for _ in 0..count {
            let d = r.random_range(1..=2);
            let c: Vec<f64> = (0..d).map(|_| 1.0 + 2.0 * r.random::<f64>()).collect();
            let tau: Vec<f64> = c.iter().map(|v| ((v * v + 1.0) / 2.0).sqrt()).collect();
            let f = Poly::random(&mut r, d);
            let lhs = tensor_apply(&fine, d, |x| {
                let t: Vec<f64> = x.iter().zip(&tau).map(|(a, b)| a / b).collect();
                q_c_apply(&c, |y| f.eval(y), &t).unwrap()
            });
            let factor = tau.iter().product::<f64>() / c.iter().product::<f64>().sqrt();
            let i_f = tensor_apply(&exact, d, |x| f.eval(x));
            let scale = tensor_apply(&exact, d, |x| f.eval(x).abs()).max(i_f.abs());
            worst = worst.max((lhs - factor * i_f).abs() / (factor * scale));
        }
        Ok((worst <= 1e-8, format!("max relative deviation {worst:.3e} over {count} polynomials")))
    })();
    Check::from_result("dilated integral identity", res)
}

/// Largest eigenvalue of the integral operator of `k` by Nyström
/// discretization on the `n`-point Gauss–Hermite rule.
fn nystrom_top(k: impl Fn(f64, f64) -> f64, n: usize) -> Result<f64> {
    let rule = gauss_hermite_rule(n)?;
    let (x, w) = (rule.nodes(), rule.weights());
    let m = DMatrix::from_fn(n, n, |i, j| (w[i] * w[j]).sqrt() * k(x[i], x[j]));
    symmetric_max_eigenvalue(&m)
}

/// `E exp(-2 sigma² Z²)`, the double integral of the Gaussian kernel.
fn gaussian_double_oracle(sigma: f64) -> Result<f64> {
    gauss_hermite_rule(256)?.apply(|z| (-2.0 * sigma * sigma * z * z).exp())
}

/// Closed-form initial errors against quadrature and Nyström oracles on
/// random parameters, relative `1e-9`.
pub fn initial_errors(count: usize, seed: u64) -> Check {
    let mut r = rng(seed ^ 0xe0);
    let draws: Vec<(Vec<f64>, Vec<f64>)> = (0..count)
        .map(|_| {
            let d = r.random_range(1..=3);
            let sigma = (0..d).map(|_| log_uniform(&mut r, 0.1, 2.0)).collect();
            let beta = (0..d).map(|_| 0.05 + 0.75 * r.random::<f64>()).collect();
            (sigma, beta)
        })
        .collect();
    let res = (|| {
        let devs = draws
            .par_iter()
            .map(|(sigma, beta)| {
                let g = KernelSpec::gaussian(sigma.clone())?;
                let h = KernelSpec::hermite(beta.clone())?;
                let mut int_g = 1.0;
                let mut app_g = 1.0;
                for &s in sigma {
                    int_g *= gaussian_double_oracle(s)?;
                    app_g *= nystrom_top(|x, y| (-s * s * (x - y) * (x - y)).exp(), 200)?;
                }
                let mut int_h = 1.0;
                let mut app_h = 1.0;
                for &b in beta {
                    let rule = gauss_hermite_rule(128)?;
                    let (x, w) = (rule.nodes(), rule.weights());
                    int_h *= x.iter().zip(w).map(|(a, wa)| wa * x.iter().zip(w).map(|(c, wc)| wc * hermite_kernel(b, *a, *c)).sum::<f64>()).sum::<f64>();
                    app_h *= nystrom_top(|x, y| hermite_kernel(b, x, y), 200)?;
                }
                let rel = |a: f64, b: f64| (a - b).abs() / b;
                Ok([
                    rel(initial_error(&g, Problem::Integration), int_g.sqrt()),
                    rel(initial_error(&g, Problem::Approximation), app_g.sqrt()),
                    rel(initial_error(&h, Problem::Integration), int_h.sqrt()),
                    rel(initial_error(&h, Problem::Approximation), app_h.sqrt()),
                ])
            })
            .collect::<Result<Vec<[f64; 4]>>>()?;
        let worst = devs.iter().flatten().fold(0.0f64, |a, b| a.max(*b));
        Ok((worst <= 1e-9, format!("max relative deviation {worst:.3e} over {count} draws")))
    })();
    Check::from_result("initial error closed forms", res)
}

/// Gauss–Hermite rule errors for `beta ∈ {0.2, 0.5, 0.8}`, `n <= 20`: above
/// `(1/2)(beta/2)^{2n}(n+1)^{-2}`, fitted slope of `ln e` at most
/// `ln beta + 0.05`, and the Gaussian mirror obeys the same with the
/// `(1 + 4 sigma²)^{-1/4}` prefactor.
pub fn gh_sandwich() -> Check {
    let res = (|| {
        let mut notes = Vec::new();
        let mut ok = true;
        for &beta in &[0.2, 0.5, 0.8] {
            let sigma = sigma_from_beta(Problem::Integration, beta)?;
            let pref = (1.0 + 4.0 * sigma * sigma).powf(-0.25);
            let gspec = KernelSpec::gaussian(vec![sigma])?;
            let rows = (1..=20usize)
                .into_par_iter()
                .map(|n| {
                    let eh = gh_hermite_error(n, beta)?.value;
                    let rule = gh_rule_on_space(n, &gspec)?;
                    let eg = wce_integration_spectral(&rule, &gspec, spectral_degree(n, beta))?.value;
                    Ok((n, eh, eg))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut side = |label: &str, pick: fn(&(usize, f64, f64)) -> f64, scale: f64| {
                let lower_ok = rows.iter().all(|row| {
                    let n = row.0 as i32;
                    pick(row) >= scale * 0.5 * (beta / 2.0).powi(2 * n) / ((n + 1) as f64).powi(2)
                });
                let x: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
                let y: Vec<f64> = rows.iter().map(|r| pick(r).ln()).collect();
                let slope = linear_fit(&x, &y).map_or(f64::NAN, |f| f.1);
                let good = lower_ok && slope <= beta.ln() + 0.05;
                ok &= good;
                notes.push(format!("{label} beta={beta}: slope {slope:.4} vs ln beta {:.4}{}", beta.ln(), if lower_ok { "" } else { " (lower bound violated)" }));
            };
            side("hermite", |r| r.1, 1.0);
            side("gauss", |r| r.2, pref);
        }
        Ok((ok, notes.join("; ")))
    })();
    Check::from_result("gauss-hermite error sandwich", res)
}
