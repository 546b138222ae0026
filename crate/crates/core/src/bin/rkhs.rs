use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use rkhs_core::algorithms::{MdmOptions, MdmSpace, Space};
use rkhs_core::experiments::verify::{run_suite, Suite};
use rkhs_core::experiments::{decay_estimate, mdm_study, tensor_decay, univariate_decay};
use rkhs_core::kernels::{initial_error, KernelSpec, Problem, ShapeRule, ShapeSeq};
use rkhs_core::transference::{
    transfer_quadrature_to_gaussian, transfer_quadrature_to_hermite, transfer_sampling_to_gaussian, transfer_sampling_to_hermite,
    TransferConstants,
};
use rkhs_core::worst_case::{spectral_system, wce_approximation, wce_integration, CostModel, QuadratureRule, SamplingMethod};

/// Worst-case errors, transference and convergence studies on Gaussian and
/// Hermite kernel spaces.
#[derive(Parser)]
#[command(name = "rkhs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the initial error of a kernel read from JSON.
    E0 {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        problem: Problem,
    },
    /// Map a rule (integration) or sampling method (approximation) to its
    /// twin and report both errors.
    Transfer {
        #[arg(long)]
        rule: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        sigma: Vec<f64>,
        #[arg(long)]
        problem: Problem,
        #[arg(long, value_enum, default_value_t = Direction::ToHermite)]
        direction: Direction,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gauss–Hermite rule errors for n = 1..=n_max as CSV.
    UnivariateDecay {
        #[arg(long)]
        space: Space,
        #[arg(long)]
        param: f64,
        #[arg(long)]
        n_max: usize,
    },
    /// Tensor Gauss–Hermite rules sized for each eps as CSV.
    TensorDecay {
        #[arg(long, value_delimiter = ',', required = true)]
        sigma: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        eps_list: Vec<f64>,
    },
    /// Decomposition-method errors over a list of budgets as CSV; the fitted
    /// decay goes to stderr as JSON.
    MdmRun {
        #[arg(long)]
        sigma_rule: ShapeRule,
        #[arg(long, default_value = "gauss")]
        space: Space,
        #[arg(long, value_delimiter = ',', required = true)]
        budgets: Vec<f64>,
        /// `$(0), $(1), ...`
        #[arg(long, value_delimiter = ',', conflicts_with = "dollar")]
        dollar_table: Option<Vec<f64>>,
        /// `unit`, `linear` (1 + m) or `exp:B` (B^m).
        #[arg(long, default_value = "linear")]
        dollar: String,
        #[arg(long, default_value_t = 10_000)]
        trunc: usize,
        #[arg(long)]
        anchor_dedup: bool,
    },
    /// Run verification batteries; exit status 0 iff all pass.
    Verify {
        #[arg(long, default_value = "all")]
        suite: Suite,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    ToHermite,
    ToGaussian,
}

/// Bad input rather than a numerical failure.
#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("malformed JSON in {}: {e}", path.display())))
}

fn write_csv<T: Serialize>(rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("RKHS_THREADS") else { return Ok(()) };
    let n: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| usage(format!("RKHS_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")
}

fn parse_cost(table: Option<Vec<f64>>, dollar: &str) -> Result<CostModel> {
    if let Some(t) = table {
        return Ok(CostModel::dollar_table(t)?);
    }
    match dollar {
        "unit" => Ok(CostModel::Unit),
        "linear" => Ok(CostModel::linear()),
        other => match other.strip_prefix("exp:") {
            Some(b) => {
                let base: f64 = b.parse().map_err(|_| usage(format!("bad base in '{other}'")))?;
                Ok(CostModel::exponential(base)?)
            }
            None => Err(usage(format!("unknown dollar model '{other}' (expected unit, linear or exp:B)"))),
        },
    }
}

fn transfer(rule: &Path, sigma: Vec<f64>, problem: Problem, direction: Direction) -> Result<serde_json::Value> {
    let s = ShapeSeq::new(sigma)?;
    let k = TransferConstants::new(problem, &s)?;
    let (gspec, hspec) = (k.gaussian_spec(), k.hermite_spec());
    let report = match problem {
        Problem::Integration => {
            let a: QuadratureRule = read_json(rule)?;
            let (twin, eg, eh) = match direction {
                Direction::ToHermite => {
                    let b = transfer_quadrature_to_hermite(&a, &s)?;
                    let (eg, eh) = (wce_integration(&a, &gspec)?, wce_integration(&b, &hspec)?);
                    (serde_json::to_value(&b)?, eg, eh)
                }
                Direction::ToGaussian => {
                    let b = transfer_quadrature_to_gaussian(&a, &s)?;
                    let (eg, eh) = (wce_integration(&b, &gspec)?, wce_integration(&a, &hspec)?);
                    (serde_json::to_value(&b)?, eg, eh)
                }
            };
            json!({
                "twin": twin,
                "error_gaussian": eg,
                "error_hermite": eh,
                "prefactor": k.gauss_prefactor,
                "identity_residual": (eg - k.gauss_prefactor * eh).abs() / eg,
            })
        }
        Problem::Approximation => {
            let a: SamplingMethod = read_json(rule)?;
            let b = match direction {
                Direction::ToHermite => transfer_sampling_to_hermite(&a, &s)?,
                Direction::ToGaussian => transfer_sampling_to_gaussian(&a, &s)?,
            };
            let (g, h) = match direction {
                Direction::ToHermite => (&a, &b),
                Direction::ToGaussian => (&b, &a),
            };
            let eg = wce_approximation(g, &spectral_system(&gspec, g.index_set().clone())?)?;
            let eh = wce_approximation(h, &spectral_system(&hspec, h.index_set().clone())?)?;
            json!({
                "twin": serde_json::to_value(&b)?,
                "error_gaussian": eg.value,
                "error_gaussian_tail_bound": eg.tail_bound,
                "error_hermite": eh.value,
                "error_hermite_tail_bound": eh.tail_bound,
                "prefactor": k.gauss_prefactor,
                "identity_residual": (eg.value - k.gauss_prefactor * eh.value).abs() / eg.value,
            })
        }
    };
    Ok(report)
}

fn run(cli: Cli) -> Result<ExitCode> {
    configure_threads()?;
    match cli.command {
        Command::E0 { kernel, problem } => {
            let spec: KernelSpec = read_json(&kernel)?;
            println!("{}", initial_error(&spec, problem));
        }
        Command::Transfer { rule, sigma, problem, direction, out } => {
            let report = serde_json::to_string_pretty(&transfer(&rule, sigma, problem, direction)?)?;
            match out {
                Some(p) => fs::write(&p, report + "\n").with_context(|| format!("writing {}", p.display()))?,
                None => println!("{report}"),
            }
        }
        Command::UnivariateDecay { space, param, n_max } => write_csv(&univariate_decay(space, param, n_max)?)?,
        Command::TensorDecay { sigma, eps_list } => write_csv(&tensor_decay(&ShapeSeq::new(sigma)?, &eps_list)?)?,
        Command::MdmRun { sigma_rule, space, budgets, dollar_table, dollar, trunc, anchor_dedup } => {
            let model = parse_cost(dollar_table, &dollar)?;
            let space = match space {
                Space::Gaussian => MdmSpace::Gaussian(sigma_rule),
                Space::Hermite => MdmSpace::Hermite(sigma_rule),
            };
            let rows = mdm_study(&space, &budgets, &model, MdmOptions { anchor_dedup }, trunc)?;
            write_csv(&rows)?;
            let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.cost, r.error)).collect();
            let mut err = io::stderr().lock();
            match decay_estimate(&pairs) {
                Ok(d) => writeln!(err, "{}", serde_json::to_string(&d)?)?,
                Err(e) => writeln!(err, "no decay estimate: {e}")?,
            }
        }
        Command::Verify { suite } => {
            let checks = run_suite(suite);
            for c in &checks {
                println!("{c}");
            }
            if !checks.iter().all(|c| c.passed) {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<Usage>() || matches!(e.downcast_ref::<rkhs_core::Error>(), Some(rkhs_core::Error::Parse(_))) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
