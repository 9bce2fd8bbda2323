//! Small dense linear-algebra helpers shared by the estimators.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative pivot threshold below which a regressor is treated as a linear
/// combination of the columns before it.
const COLLINEARITY_TOL: f64 = 1e-10;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Variance with denominator `n` (centered on the sample mean).
pub fn population_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
}

/// Variance with denominator `n - 1`.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Covariance matrix (denominator `n`) of the rows of a `T x N` matrix.
pub fn population_covariance(data: &DMatrix<f64>) -> DMatrix<f64> {
    let t = data.nrows() as f64;
    let means = data.row_mean();
    let mut centered = data.clone();
    for mut row in centered.row_iter_mut() {
        row -= &means;
    }
    centered.transpose() * &centered / t
}

/// Correlation matrix of the columns of a `T x N` matrix.
pub fn correlation(data: &DMatrix<f64>) -> DMatrix<f64> {
    let cov = population_covariance(data);
    let n = cov.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            cov[(i, j)] / (cov[(i, i)] * cov[(j, j)]).sqrt()
        }
    })
}

/// In-place Cholesky of a row-major `n x n` symmetric matrix. Returns the log
/// determinant, or `None` if the matrix is not positive definite. Only the
/// lower triangle of `a` is meaningful afterwards.
pub(crate) fn cholesky_in_place(a: &mut [f64], n: usize) -> Option<f64> {
    let mut log_det = 0.0;
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        log_det += 2.0 * d.ln();
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    Some(log_det)
}

/// Given the Cholesky factor produced by [`cholesky_in_place`], returns
/// `xᵀ A⁻¹ x`.
pub(crate) fn cholesky_quad_form(l: &[f64], n: usize, x: &[f64], work: &mut [f64]) -> f64 {
    // forward solve L y = x; the quadratic form is |y|²
    let mut acc = 0.0;
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s -= l[i * n + k] * work[k];
        }
        let y = s / l[i * n + i];
        work[i] = y;
        acc += y * y;
    }
    acc
}

/// Least-squares fit of `y` on `x`.
#[derive(Debug, Clone)]
pub struct OlsFit {
    /// `k x m` coefficient matrix, one column per dependent variable.
    pub coefficients: DMatrix<f64>,
    /// `n x m` residual matrix.
    pub residuals: DMatrix<f64>,
    /// `(XᵀX)⁻¹`, used for coefficient standard errors.
    pub xtx_inverse: DMatrix<f64>,
}

/// Ordinary least squares via Householder QR, after screening the regressors
/// for exact collinearity. `names` labels the columns of `x` for error
/// messages.
pub fn ols(x: &DMatrix<f64>, y: &DMatrix<f64>, names: &[String]) -> Result<OlsFit> {
    let (n, k) = x.shape();
    if y.nrows() != n {
        return Err(Error::InvalidInput(format!(
            "regressand has {} rows but regressor matrix has {n}",
            y.nrows()
        )));
    }
    if n < k {
        return Err(Error::InsufficientData(format!(
            "{n} observations for {k} regressors"
        )));
    }
    check_collinearity(x, names)?;

    let qr = x.clone().qr();
    let q = qr.q();
    let r = qr.r();
    let qty = q.transpose() * y;
    let coefficients = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Collinear {
            column: names.last().cloned().unwrap_or_default(),
        })?;
    let residuals = y - x * &coefficients;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| Error::Collinear {
            column: names.last().cloned().unwrap_or_default(),
        })?;
    let xtx_inverse = &r_inv * r_inv.transpose();
    Ok(OlsFit {
        coefficients,
        residuals,
        xtx_inverse,
    })
}

/// Incremental Cholesky on the correlation-scaled cross-product matrix; the
/// first pivot that collapses identifies the offending column.
fn check_collinearity(x: &DMatrix<f64>, names: &[String]) -> Result<()> {
    let k = x.ncols();
    let xtx = x.transpose() * x;
    let label = |j: usize| names.get(j).cloned().unwrap_or_else(|| format!("x{j}"));
    let mut scaled = vec![0.0; k * k];
    for j in 0..k {
        if !(xtx[(j, j)] > 0.0) {
            return Err(Error::Collinear { column: label(j) });
        }
    }
    for i in 0..k {
        for j in 0..k {
            scaled[i * k + j] = xtx[(i, j)] / (xtx[(i, i)] * xtx[(j, j)]).sqrt();
        }
    }
    for j in 0..k {
        let mut d = scaled[j * k + j];
        for p in 0..j {
            d -= scaled[j * k + p] * scaled[j * k + p];
        }
        if d <= COLLINEARITY_TOL {
            return Err(Error::Collinear { column: label(j) });
        }
        let d = d.sqrt();
        scaled[j * k + j] = d;
        for i in (j + 1)..k {
            let mut s = scaled[i * k + j];
            for p in 0..j {
                s -= scaled[i * k + p] * scaled[j * k + p];
            }
            scaled[i * k + j] = s / d;
        }
    }
    Ok(())
}

/// Lower Cholesky factor of a symmetric matrix, `None` if not positive
/// definite.
pub fn cholesky_lower(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    a.clone().cholesky().map(|c| c.l())
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn eigen_range(a: &DMatrix<f64>) -> (f64, f64) {
    let eig = a.clone().symmetric_eigen().eigenvalues;
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

pub fn column(data: &DMatrix<f64>, j: usize) -> Vec<f64> {
    data.column(j).iter().copied().collect()
}

pub fn dvector(xs: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(xs)
}
