//! Fisher information for independent Gaussian observations and the bound it implies.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOLERANCE: f64 = 1e-9;
/// Information matrices at or above this condition number are not inverted.
pub const MAX_CONDITION: f64 = 1e12;

/// `F = Jᵀ W J` with `W = diag(1/σ²)`.
///
/// Observations with zero variance carry unbounded information. They are kept
/// apart as exact linear constraints on the parameters rather than being
/// folded into `F` with an infinite weight.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherMatrix {
    pub matrix: DMatrix<f64>,
    /// Jacobian rows of noise-free observations.
    pub constraints: DMatrix<f64>,
}

impl FisherMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let m = &self.matrix;
        let scale = m.amax().max(f64::MIN_POSITIVE);
        (m - m.transpose()).amax() <= tol * scale
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.matrix.clone()).eigenvalues.min()
    }
}

/// Assembles the Fisher information. Rows with infinite variance are dropped.
pub fn fisher(jacobian: &DMatrix<f64>, variances: &[f64]) -> Result<FisherMatrix> {
    if variances.len() != jacobian.nrows() {
        return Err(Error::DimensionMismatch {
            expected: jacobian.nrows(),
            actual: variances.len(),
        });
    }
    if let Some(v) = variances.iter().find(|v| v.is_nan() || **v < 0.0) {
        return Err(Error::Domain(format!("observation variance must be ≥ 0, got {v}")));
    }
    let n = jacobian.ncols();
    let mut matrix = DMatrix::zeros(n, n);
    let mut exact = Vec::new();
    for (h, &var) in variances.iter().enumerate() {
        if var.is_infinite() {
            continue;
        }
        let row = jacobian.row(h);
        if var == 0.0 {
            exact.push(row.clone_owned());
            continue;
        }
        matrix += row.transpose() * row / var;
    }
    // Exact symmetry regardless of summation order.
    matrix = (&matrix + matrix.transpose()) * 0.5;
    let constraints = if exact.is_empty() {
        DMatrix::zeros(0, n)
    } else {
        DMatrix::from_rows(&exact)
    };
    Ok(FisherMatrix { matrix, constraints })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrlbStatus {
    FullRank,
    RankDeficient { rank: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrlbResult {
    pub status: CrlbStatus,
    /// Numerical rank of the information, constraints included, counting
    /// singular values above `RANK_TOLERANCE` of the largest.
    pub rank: usize,
    pub dim: usize,
    /// Ratio of the extreme singular values of the inverted block.
    pub condition_number: f64,
    /// Lower bounds on each coordinate's estimation variance, m².
    /// `None` when the information is rank deficient.
    pub variances: Option<Vec<f64>>,
}

impl CrlbResult {
    pub fn std_devs(&self) -> Option<Vec<f64>> {
        self.variances.as_ref().map(|v| v.iter().map(|x| x.sqrt()).collect())
    }

    pub fn is_full_rank(&self) -> bool {
        self.status == CrlbStatus::FullRank
    }
}

fn numerical_rank(singular: &[f64]) -> usize {
    let max = singular.iter().cloned().fold(0.0, f64::max);
    if max <= 0.0 {
        return 0;
    }
    singular.iter().filter(|&&s| s > RANK_TOLERANCE * max).count()
}

fn condition(singular: &[f64]) -> f64 {
    let max = singular.iter().cloned().fold(0.0, f64::max);
    let min = singular.iter().cloned().fold(f64::INFINITY, f64::min);
    if singular.is_empty() {
        1.0
    } else if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Orthonormal basis (as columns) of the null space of `a`, and the rank of `a`.
fn null_space(a: &DMatrix<f64>, n: usize) -> (DMatrix<f64>, usize) {
    if a.nrows() == 0 {
        return (DMatrix::identity(n, n), 0);
    }
    // Right singular vectors of the padded square matrix cover all of ℝⁿ.
    let mut padded = DMatrix::zeros(a.nrows().max(n), n);
    padded.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let s: Vec<f64> = svd.singular_values.iter().cloned().collect();
    let max = s.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..s.len()).filter(|&k| !(s[k] > RANK_TOLERANCE * max)).collect();
    let rank = s.len() - keep.len();
    let mut basis = DMatrix::zeros(n, keep.len());
    for (c, &k) in keep.iter().enumerate() {
        basis.set_column(c, &v_t.row(k).transpose());
    }
    (basis, rank)
}

/// Diagonal of the inverse information, or the rank when it is not invertible.
///
/// With exact constraints `C·δ = 0` the bound is `N (Nᵀ F N)⁻¹ Nᵀ` where the
/// columns of `N` span the null space of `C`.
pub fn crlb(f: &FisherMatrix) -> CrlbResult {
    let n = f.dim();
    let (basis, constraint_rank) = null_space(&f.constraints, n);
    let free = basis.ncols();
    if free == 0 {
        return CrlbResult {
            status: CrlbStatus::FullRank,
            rank: n,
            dim: n,
            condition_number: 1.0,
            variances: Some(vec![0.0; n]),
        };
    }
    let reduced = basis.transpose() * &f.matrix * &basis;
    let singular: Vec<f64> = reduced.clone().svd(false, false).singular_values.iter().cloned().collect();
    let rank = numerical_rank(&singular);
    let cond = condition(&singular);
    let total_rank = (rank + constraint_rank).min(n);
    // Invertibility is judged by conditioning; the rank is reported alongside.
    if !(cond < MAX_CONDITION) {
        return CrlbResult {
            status: CrlbStatus::RankDeficient { rank: total_rank },
            rank: total_rank,
            dim: n,
            condition_number: cond,
            variances: None,
        };
    }
    let inv = match reduced.clone().cholesky() {
        Some(c) => c.inverse(),
        None => reduced.try_inverse().expect("full rank"),
    };
    let cov = &basis * inv * basis.transpose();
    CrlbResult {
        status: CrlbStatus::FullRank,
        rank: total_rank,
        dim: n,
        condition_number: cond,
        variances: Some(cov.diagonal().iter().map(|v| v.max(0.0)).collect()),
    }
}
