//! Small dense linear-algebra kernels: a symmetric tridiagonal eigensolver
//! (implicit-shift QL) and Cholesky-based SPD solves that report conditioning
//! instead of regularizing.

use nalgebra::linalg::SymmetricTridiagonal;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Gram systems with an estimated condition number above this are rejected.
pub const CONDITION_LIMIT: f64 = 1e14;

const MAX_QL_SWEEPS: usize = 60;

/// Eigen-decomposition of a symmetric tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct TridiagonalEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// First component of each normalized eigenvector, aligned with `values`
    /// (only when requested).
    pub first_components: Option<Vec<f64>>,
}

/// Implicit-shift QL on the matrix with diagonal `diag` and off-diagonal
/// `off` (`off[i]` couples rows `i` and `i + 1`).
///
/// When `want_first` is set the first row of the eigenvector matrix is
/// carried through the rotations, which is all Golub–Welsch needs.
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64], want_first: bool) -> Result<TridiagonalEigen> {
    let n = diag.len();
    if n == 0 {
        return Ok(TridiagonalEigen { values: Vec::new(), first_components: want_first.then(Vec::new) });
    }
    if off.len() + 1 != n {
        return Err(Error::Shape(format!(
            "tridiagonal matrix of order {n} needs {} off-diagonal entries, got {}",
            n - 1,
            off.len()
        )));
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    let norm = (0..n).map(|i| d[i].abs() + e[i].abs() + if i > 0 { e[i - 1].abs() } else { 0.0 }).fold(0.0, f64::max);

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= f64::EPSILON * norm {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_QL_SWEEPS {
                return Err(Error::Numerical(format!(
                    "QL iteration did not converge for eigenvalue {l} of {n} after {MAX_QL_SWEEPS} sweeps \
                     (residual off-diagonal {:.3e})",
                    e[l]
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&k| d[k]).collect();
    let first_components = want_first.then(|| order.iter().map(|&k| z[k]).collect());
    Ok(TridiagonalEigen { values, first_components })
}

/// All eigenvalues (ascending) of a dense symmetric matrix: Householder
/// reduction followed by [`tridiagonal_eigen`].
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::Shape(format!("matrix is {}x{}, expected square", m.nrows(), m.ncols())));
    }
    match m.nrows() {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![m[(0, 0)]]),
        _ => {}
    }
    let (diag, off) = SymmetricTridiagonal::new(m.clone()).unpack_tridiagonal();
    Ok(tridiagonal_eigen(diag.as_slice(), off.as_slice(), false)?.values)
}

/// Largest eigenvalue of a dense symmetric matrix.
pub fn symmetric_max_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    symmetric_eigenvalues(m)?
        .last()
        .copied()
        .ok_or_else(|| Error::Shape("empty matrix has no eigenvalues".into()))
}

/// Spectral condition number of a symmetric matrix, `+inf` when it is not
/// numerically positive definite.
pub fn spd_condition(m: &DMatrix<f64>) -> Result<f64> {
    let ev = symmetric_eigenvalues(m)?;
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    Ok(if lo <= 0.0 { f64::INFINITY } else { hi / lo })
}

/// A factorized symmetric positive-definite Gram matrix.
pub struct SpdFactor {
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    pub condition: f64,
}

impl SpdFactor {
    /// Factorizes `gram`, refusing systems whose condition estimate exceeds
    /// [`CONDITION_LIMIT`]. No jitter is ever added.
    pub fn new(gram: DMatrix<f64>) -> Result<Self> {
        let condition = spd_condition(&gram)?;
        if !(condition < CONDITION_LIMIT) {
            return Err(Error::Conditioning { condition });
        }
        let chol = gram.cholesky().ok_or(Error::Conditioning { condition: f64::INFINITY })?;
        Ok(Self { chol, condition })
    }

    pub fn solve_vec(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(rhs)
    }

    pub fn solve_mat(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol.solve(rhs)
    }
}

/// Neumaier-compensated summation in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
