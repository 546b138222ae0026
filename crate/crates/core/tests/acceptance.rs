//! Acceptance criteria, one line each. Exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rkhs_core::algorithms::{mdm_build, tensor_rule_for_eps, MdmOptions, MdmSpace, Space};
use rkhs_core::experiments::verify::{
    approximation_transference, cost_invariance, dilated_integral_identity, gh_moments, gh_sandwich, initial_errors, integration_transference,
    mehler_series, q_c_isometry, Check,
};
use rkhs_core::experiments::{decay_estimate, fit_stretched_exponential, mdm_study, tensor_optimal_decay};
use rkhs_core::kernels::{ShapeRule, ShapeSeq};
use rkhs_core::worst_case::CostModel;

const SEED: u64 = 20_241_019;

struct Outcome {
    passed: bool,
    detail: String,
}

impl From<Check> for Outcome {
    fn from(c: Check) -> Self {
        Outcome { passed: c.passed, detail: c.detail }
    }
}

fn all(checks: Vec<Check>) -> Outcome {
    let passed = checks.iter().all(|c| c.passed);
    let detail = checks.iter().map(|c| format!("[{c}]")).collect::<Vec<_>>().join(" ");
    Outcome { passed, detail }
}

fn tensor_smoke() -> Outcome {
    let sigma = ShapeSeq::new(vec![1.0, 1.0]).unwrap();
    let curve = match tensor_optimal_decay(&sigma, 14) {
        Ok(c) => c,
        Err(e) => return Outcome { passed: false, detail: format!("error: {e}") },
    };
    let pts: Vec<(f64, f64)> = curve.iter().map(|&(n, e)| (n as f64, e)).collect();
    let fit = fit_stretched_exponential(&pts).unwrap();
    let fit_ok = (0.4..=0.6).contains(&fit.power);

    let mut bounds_ok = true;
    let mut worst: f64 = 0.0;
    for s in [vec![1.0, 1.0], vec![0.5, 2.0, 1.0], vec![3.0]] {
        let sigma = ShapeSeq::new(s).unwrap();
        for eps in [1e-1, 1e-2, 1e-3] {
            match tensor_rule_for_eps(eps, &sigma, Space::Gaussian) {
                Ok(c) => {
                    bounds_ok &= c.bound <= eps;
                    worst = worst.max(c.bound / eps);
                }
                Err(_) => bounds_ok = false,
            }
        }
    }
    Outcome {
        passed: fit_ok && bounds_ok,
        detail: format!("fitted power {:.3} (r² {:.4}); max guaranteed bound / eps {worst:.3}", fit.power, fit.r_squared),
    }
}

fn infinite_variate_decay() -> Outcome {
    let space = MdmSpace::Gaussian(ShapeRule::new_power(1.5).unwrap());
    let budgets: Vec<f64> = (0..=16).map(|k| 10f64.powf(1.0 + 0.25 * k as f64)).collect();
    let rows = match mdm_study(&space, &budgets, &CostModel::linear(), MdmOptions::default(), 10_000) {
        Ok(r) => r,
        Err(e) => return Outcome { passed: false, detail: format!("error: {e}") },
    };
    let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.cost, r.error)).collect();
    let d = decay_estimate(&pairs).unwrap();
    let largest = mdm_build(&space, budgets[budgets.len() - 1], &CostModel::linear(), MdmOptions::default()).unwrap();
    Outcome {
        passed: d.exponent >= 0.65 && d.r_squared >= 0.9,
        detail: format!(
            "exponent {:.4}, r² {:.4} over {} points; final error {:.3e} at cost {} with {} active sets",
            d.exponent,
            d.r_squared,
            d.points_used,
            rows[rows.len() - 1].error,
            rows[rows.len() - 1].cost,
            largest.active_sets().len()
        ),
    }
}

fn main() -> ExitCode {
    type Criterion = (u32, &'static str, Duration, Box<dyn Fn() -> Outcome>);
    let criteria: Vec<Criterion> = vec![
        (1, "integration transference identity", Duration::from_secs(10), Box::new(|| integration_transference(100, SEED).into())),
        (2, "approximation transference identity", Duration::from_secs(60), Box::new(|| approximation_transference(20, SEED).into())),
        (3, "initial error closed forms", Duration::from_secs(5), Box::new(|| initial_errors(20, SEED).into())),
        (4, "univariate error sandwich", Duration::from_secs(10), Box::new(|| gh_sandwich().into())),
        (5, "exponential convergence smoke test", Duration::from_secs(30), Box::new(tensor_smoke)),
        (6, "infinite-variate decay", Duration::from_secs(300), Box::new(infinite_variate_decay)),
        (
            7,
            "oracle batteries",
            Duration::from_secs(30),
            Box::new(|| all(vec![mehler_series(Some(80)), gh_moments(64), q_c_isometry(20, SEED), dilated_integral_identity(20, SEED)])),
        ),
        (8, "cost invariance under transference", Duration::from_secs(10), Box::new(|| cost_invariance(50, SEED).into())),
    ];
    let mut failures = 0;
    for (id, name, limit, run) in criteria {
        let t = Instant::now();
        let out = run();
        let elapsed = t.elapsed();
        let in_time = elapsed <= limit;
        let passed = out.passed && in_time;
        failures += usize::from(!passed);
        let time_note = if in_time { String::new() } else { format!(" (over the {}s limit)", limit.as_secs()) };
        println!(
            "acceptance {id} {}: {name} [{:.2}s{time_note}] {}",
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            out.detail
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
