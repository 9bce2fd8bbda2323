//! VAR estimation, generalized forecast error variance decomposition and
//! the total / directional / net / pairwise spillover measures.

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ols;
use crate::panel::VolatilityPanel;

/// Denominator of the residual covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaDenominator {
    /// `T − p`.
    #[default]
    MaximumLikelihood,
    /// `T − p − (Np + 1)`.
    DegreesOfFreedom,
}

#[derive(Debug, Clone)]
pub struct VarFit {
    pub names: Vec<String>,
    pub lag_order: usize,
    pub intercept: DVector<f64>,
    /// `Φ_1 .. Φ_p`; `Φ_k[(i, j)]` is the effect of `y_j,t−k` on `y_i,t`.
    pub coefficients: Vec<DMatrix<f64>>,
    pub sigma: DMatrix<f64>,
    /// `(T − p) × N`.
    pub residuals: DMatrix<f64>,
    /// First and last dates of the estimation sample, when known.
    pub span: Option<(NaiveDate, NaiveDate)>,
    pub warnings: Vec<String>,
}

impl VarFit {
    pub fn n_series(&self) -> usize {
        self.intercept.len()
    }

    pub fn n_obs(&self) -> usize {
        self.residuals.nrows()
    }
}

fn lagged_design(y: &DMatrix<f64>, p: usize, first: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let (t_len, n) = y.shape();
    let rows = t_len - first;
    let x = DMatrix::from_fn(rows, 1 + n * p, |r, c| {
        if c == 0 {
            1.0
        } else {
            let k = (c - 1) / n + 1;
            let j = (c - 1) % n;
            y[(first + r - k, j)]
        }
    });
    let target = y.rows(first, rows).into_owned();
    (x, target)
}

fn regressor_names(names: &[String], p: usize) -> Vec<String> {
    let mut out = vec!["const".to_string()];
    for k in 1..=p {
        out.extend(names.iter().map(|n| format!("{n}.l{k}")));
    }
    out
}

/// OLS over rows `first..T` (so that different lag orders can share a
/// sample); `first ≥ p`.
fn fit_var_rows(
    y: &DMatrix<f64>,
    names: &[String],
    p: usize,
    first: usize,
    denominator: SigmaDenominator,
) -> Result<VarFit> {
    let (t_len, n) = y.shape();
    if p == 0 {
        return Err(Error::InvalidInput("VAR lag order must be at least 1".into()));
    }
    let k = 1 + n * p;
    let rows = t_len.saturating_sub(first);
    let dof = match denominator {
        SigmaDenominator::MaximumLikelihood => rows,
        SigmaDenominator::DegreesOfFreedom => rows.saturating_sub(k),
    };
    if first >= t_len || rows <= k || dof == 0 {
        return Err(Error::InsufficientData(format!(
            "VAR({p}) on {n} series needs more than {k} usable rows, got {rows}"
        )));
    }
    let mut warnings = Vec::new();
    if rows < 10 * n * p {
        warnings.push(format!("VAR({p}) has {rows} usable rows for {n} series (recommended ≥ {})", 10 * n * p));
    }
    let (x, target) = lagged_design(y, p, first);
    let fit = ols(&x, &target, &regressor_names(names, p))?;
    let b = &fit.coefficients;
    let intercept = DVector::from_fn(n, |i, _| b[(0, i)]);
    let coefficients = (0..p)
        .map(|lag| DMatrix::from_fn(n, n, |i, j| b[(1 + lag * n + j, i)]))
        .collect();
    let sigma = fit.residuals.transpose() * &fit.residuals / dof as f64;
    let sigma = (&sigma + sigma.transpose()) * 0.5;
    Ok(VarFit {
        names: names.to_vec(),
        lag_order: p,
        intercept,
        coefficients,
        sigma,
        residuals: fit.residuals,
        span: None,
        warnings,
    })
}

/// Equation-by-equation OLS with intercept on a `T × N` matrix.
pub fn fit_var_matrix(
    y: &DMatrix<f64>,
    names: &[String],
    p: usize,
    denominator: SigmaDenominator,
) -> Result<VarFit> {
    fit_var_rows(y, names, p, p, denominator)
}

pub fn fit_var(panel: &VolatilityPanel, p: usize) -> Result<VarFit> {
    fit_var_with(panel, p, SigmaDenominator::default())
}

pub fn fit_var_with(panel: &VolatilityPanel, p: usize, denominator: SigmaDenominator) -> Result<VarFit> {
    let mut fit = fit_var_matrix(panel.values(), panel.names(), p, denominator)?;
    let dates = panel.dates();
    if !dates.is_empty() {
        fit.span = Some((dates[p], dates[dates.len() - 1]));
    }
    Ok(fit)
}

fn aic(fit: &VarFit) -> Option<f64> {
    let n = fit.n_series();
    let t = fit.n_obs() as f64;
    let log_det = crate::linalg::cholesky_lower(&fit.sigma)?
        .diagonal()
        .iter()
        .map(|d| 2.0 * d.ln())
        .sum::<f64>();
    Some(log_det + 2.0 * (fit.lag_order * n * n) as f64 / t)
}

/// AIC-minimizing lag in `1..=p_max`, every candidate estimated on the
/// rows left after dropping the first `p_max`. Ties go to the smaller lag.
pub fn select_lag_matrix(y: &DMatrix<f64>, names: &[String], p_max: usize) -> Result<usize> {
    if p_max == 0 {
        return Err(Error::InvalidInput("p_max must be at least 1".into()));
    }
    if p_max == 1 {
        return Ok(1);
    }
    let mut best: Option<(usize, f64)> = None;
    for p in 1..=p_max {
        let Ok(fit) = fit_var_rows(y, names, p, p_max, SigmaDenominator::MaximumLikelihood) else {
            continue;
        };
        if let Some(score) = aic(&fit) {
            if best.is_none_or(|(_, b)| score < b) {
                best = Some((p, score));
            }
        }
    }
    best.map(|(p, _)| p)
        .ok_or_else(|| Error::InsufficientData(format!("no VAR order in 1..={p_max} could be estimated")))
}

pub fn select_lag(panel: &VolatilityPanel, p_max: usize) -> Result<usize> {
    select_lag_matrix(panel.values(), panel.names(), p_max)
}

/// `A_0 .. A_{H−1}` with `A_0 = I` and `A_h = Σ_{k=1..min(h,p)} Φ_k A_{h−k}`.
pub fn ma_coefficients(fit: &VarFit, horizon: usize) -> Vec<DMatrix<f64>> {
    let n = fit.n_series();
    let mut out: Vec<DMatrix<f64>> = Vec::with_capacity(horizon);
    for h in 0..horizon {
        if h == 0 {
            out.push(DMatrix::identity(n, n));
            continue;
        }
        let mut a = DMatrix::zeros(n, n);
        for k in 1..=h.min(fit.lag_order) {
            a += &fit.coefficients[k - 1] * &out[h - k];
        }
        out.push(a);
    }
    out
}

/// Whose variance scales the shock in the generalized decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShockScaling {
    /// `σ_jj⁻¹`, the variance of the shocked (source) variable.
    #[default]
    Source,
    /// `σ_ii⁻¹`, the variance of the receiving variable.
    Receiver,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FevdMatrix {
    pub horizon: usize,
    pub raw: DMatrix<f64>,
    /// Rows sum to one.
    pub normalized: DMatrix<f64>,
}

/// Generalized FEVD from MA coefficients and the innovation covariance.
pub fn gfevd_from_ma(ma: &[DMatrix<f64>], sigma: &DMatrix<f64>, scaling: ShockScaling) -> Result<FevdMatrix> {
    let n = sigma.nrows();
    if ma.is_empty() {
        return Err(Error::InvalidInput("forecast horizon must be at least 1".into()));
    }
    if let Some(j) = (0..n).find(|&j| !(sigma[(j, j)] > 0.0)) {
        return Err(Error::InvalidParameters(format!(
            "innovation variance of series {j} is {} (must be > 0)",
            sigma[(j, j)]
        )));
    }
    let mut num = DMatrix::<f64>::zeros(n, n);
    let mut mse = DVector::<f64>::zeros(n);
    for a in ma {
        let a_sigma = a * sigma;
        for i in 0..n {
            for j in 0..n {
                num[(i, j)] += a_sigma[(i, j)] * a_sigma[(i, j)];
            }
            mse[i] += a_sigma.row(i).dot(&a.row(i));
        }
    }
    let raw = DMatrix::from_fn(n, n, |i, j| {
        let s = match scaling {
            ShockScaling::Source => sigma[(j, j)],
            ShockScaling::Receiver => sigma[(i, i)],
        };
        num[(i, j)] / s / mse[i]
    });
    let mut normalized = raw.clone();
    for mut row in normalized.row_iter_mut() {
        let total = row.sum();
        row /= total;
    }
    Ok(FevdMatrix {
        horizon: ma.len(),
        raw,
        normalized,
    })
}

pub fn gfevd(fit: &VarFit, horizon: usize) -> Result<FevdMatrix> {
    gfevd_with(fit, horizon, ShockScaling::default())
}

pub fn gfevd_with(fit: &VarFit, horizon: usize, scaling: ShockScaling) -> Result<FevdMatrix> {
    if horizon == 0 {
        return Err(Error::InvalidInput("forecast horizon must be at least 1".into()));
    }
    gfevd_from_ma(&ma_coefficients(fit, horizon), &fit.sigma, scaling)
}

/// Order of the difference in the pairwise net measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairwiseSign {
    /// `[i][j]` = transmitted from `i` to `j` minus received by `i` from `j`.
    #[default]
    TransmittedMinusReceived,
    /// The opposite difference.
    ReceivedMinusTransmitted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpilloverTable {
    pub names: Vec<String>,
    /// Percent contributions; row = receiving market, column = source.
    #[serde(skip)]
    pub matrix_percent: DMatrix<f64>,
    pub directional_from: Vec<f64>,
    pub directional_to: Vec<f64>,
    /// Column sums including the diagonal.
    pub including_own: Vec<f64>,
    pub net: Vec<f64>,
    pub total_index: f64,
    #[serde(skip)]
    pub net_pairwise: DMatrix<f64>,
}

impl SpilloverTable {
    /// Builds every margin from a percent matrix as given (no
    /// renormalization), e.g. a reported interior.
    pub fn from_percent(matrix: DMatrix<f64>, names: Vec<String>, sign: PairwiseSign) -> Result<Self> {
        let n = matrix.nrows();
        if !matrix.is_square() || names.len() != n {
            return Err(Error::InvalidInput(format!(
                "spillover matrix is {}x{} with {} names",
                matrix.nrows(),
                matrix.ncols(),
                names.len()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("spillover matrix has non-finite entries".into()));
        }
        let directional_from: Vec<f64> = (0..n)
            .map(|i| (0..n).filter(|&j| j != i).map(|j| matrix[(i, j)]).sum())
            .collect();
        let directional_to: Vec<f64> = (0..n)
            .map(|j| (0..n).filter(|&i| i != j).map(|i| matrix[(i, j)]).sum())
            .collect();
        let including_own = (0..n).map(|j| directional_to[j] + matrix[(j, j)]).collect();
        let net = (0..n).map(|i| directional_to[i] - directional_from[i]).collect();
        let total_index = directional_from.iter().sum::<f64>() / n as f64;
        let mut net_pairwise = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = match sign {
                    PairwiseSign::TransmittedMinusReceived => matrix[(j, i)] - matrix[(i, j)],
                    PairwiseSign::ReceivedMinusTransmitted => matrix[(i, j)] - matrix[(j, i)],
                };
                net_pairwise[(i, j)] = v;
                net_pairwise[(j, i)] = -v;
            }
        }
        Ok(Self {
            names,
            matrix_percent: matrix,
            directional_from,
            directional_to,
            including_own,
            net,
            total_index,
            net_pairwise,
        })
    }

    pub fn n_series(&self) -> usize {
        self.names.len()
    }

    /// Rows in the standard spillover table layout: the percent matrix
    /// with a "Directional From Others" column, then the "Directional To
    /// Others" and "Directional Including Own" rows. The lower right cells
    /// hold the off-diagonal grand sum and the total index.
    pub fn table_rows(&self, fmt: &dyn Fn(f64) -> String) -> Vec<Vec<String>> {
        let n = self.n_series();
        let mut rows = Vec::with_capacity(n + 3);
        let mut header = vec![String::new()];
        header.extend(self.names.iter().cloned());
        header.push("Directional From Others".into());
        rows.push(header);
        for i in 0..n {
            let mut row = vec![self.names[i].clone()];
            row.extend((0..n).map(|j| fmt(self.matrix_percent[(i, j)])));
            row.push(fmt(self.directional_from[i]));
            rows.push(row);
        }
        let mut to = vec!["Directional To Others".to_string()];
        to.extend(self.directional_to.iter().map(|&v| fmt(v)));
        to.push(fmt(self.directional_from.iter().sum()));
        rows.push(to);
        let mut own = vec!["Directional Including Own".to_string()];
        own.extend(self.including_own.iter().map(|&v| fmt(v)));
        own.push(fmt(self.total_index));
        rows.push(own);
        rows
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W, fmt: &dyn Fn(f64) -> String) -> Result<()> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        for row in self.table_rows(fmt) {
            w.write_record(&row).map_err(|e| Error::InvalidInput(format!("csv write failed: {e}")))?;
        }
        w.flush().map_err(|e| Error::InvalidInput(format!("csv write failed: {e}")))?;
        Ok(())
    }
}

pub fn build_spillover_table(fevd: &FevdMatrix, names: &[String]) -> Result<SpilloverTable> {
    build_spillover_table_with(fevd, names, PairwiseSign::default())
}

pub fn build_spillover_table_with(fevd: &FevdMatrix, names: &[String], sign: PairwiseSign) -> Result<SpilloverTable> {
    SpilloverTable::from_percent(&fevd.normalized * 100.0, names.to_vec(), sign)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::simulate_var;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("v{i}")).collect()
    }

    fn fit_from(coefficients: Vec<DMatrix<f64>>, sigma: DMatrix<f64>) -> VarFit {
        let n = sigma.nrows();
        VarFit {
            names: names(n),
            lag_order: coefficients.len(),
            intercept: DVector::zeros(n),
            coefficients,
            sigma,
            residuals: DMatrix::zeros(0, n),
            span: None,
            warnings: vec![],
        }
    }

    #[test]
    fn ma_recursion() {
        let phi1 = DMatrix::from_row_slice(2, 2, &[0.5, 0.2, 0.1, 0.4]);
        let phi2 = DMatrix::from_row_slice(2, 2, &[0.1, 0.0, -0.2, 0.05]);
        let fit = fit_from(vec![phi1.clone()], DMatrix::identity(2, 2));
        let ma = ma_coefficients(&fit, 6);
        let mut power = DMatrix::identity(2, 2);
        for a in &ma {
            assert!((a - &power).amax() < 1e-12);
            power = &phi1 * power;
        }
        let fit2 = fit_from(vec![phi1.clone(), phi2.clone()], DMatrix::identity(2, 2));
        let ma2 = ma_coefficients(&fit2, 3);
        assert!((&ma2[2] - (&phi1 * &phi1 + &phi2)).amax() < 1e-15);
        let zero = fit_from(vec![DMatrix::zeros(2, 2)], DMatrix::identity(2, 2));
        assert!(ma_coefficients(&zero, 4)[1..].iter().all(|a| a.amax() == 0.0));
    }

    #[test]
    fn diagonal_sigma_without_dynamics_is_identity() {
        let fit = fit_from(vec![DMatrix::zeros(3, 3)], DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0, 0.5])));
        for h in [1, 5, 12] {
            let f = gfevd(&fit, h).unwrap();
            assert!((f.normalized.clone() - DMatrix::identity(3, 3)).amax() < 1e-15);
        }
    }

    #[test]
    fn receiver_scaling_differs_only_with_unequal_variances() {
        let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 4.0]);
        let fit = fit_from(vec![DMatrix::from_row_slice(2, 2, &[0.3, 0.1, 0.0, 0.2])], sigma);
        let a = gfevd_with(&fit, 5, ShockScaling::Source).unwrap();
        let b = gfevd_with(&fit, 5, ShockScaling::Receiver).unwrap();
        assert!((a.raw[(0, 1)] * 4.0 - b.raw[(0, 1)] * 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_zero_variance() {
        let fit = fit_from(vec![DMatrix::zeros(2, 2)], DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        assert!(gfevd(&fit, 3).is_err());
        assert!(gfevd(&fit_from(vec![DMatrix::zeros(2, 2)], DMatrix::identity(2, 2)), 0).is_err());
    }

    #[test]
    fn identity_table_has_no_spillover() {
        let t = SpilloverTable::from_percent(DMatrix::identity(3, 3) * 100.0, names(3), PairwiseSign::default()).unwrap();
        assert_eq!(t.total_index, 0.0);
        assert!(t.net.iter().chain(&t.directional_to).all(|v| *v == 0.0));
        assert_eq!(t.net_pairwise.amax(), 0.0);
    }

    #[test]
    fn pairwise_sign_flag() {
        let m = DMatrix::from_row_slice(2, 2, &[90.0, 10.0, 30.0, 70.0]);
        let a = SpilloverTable::from_percent(m.clone(), names(2), PairwiseSign::TransmittedMinusReceived).unwrap();
        let b = SpilloverTable::from_percent(m, names(2), PairwiseSign::ReceivedMinusTransmitted).unwrap();
        // market 0 sends 30 to market 1 and receives 10
        assert_eq!(a.net_pairwise[(0, 1)], 20.0);
        assert_eq!(b.net_pairwise[(0, 1)], -20.0);
        assert_eq!(a.net[0], 20.0);
    }

    #[test]
    fn csv_layout() {
        let m = DMatrix::from_row_slice(2, 2, &[90.0, 10.0, 30.0, 70.0]);
        let t = SpilloverTable::from_percent(m, names(2), PairwiseSign::default()).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf, &|v| format!("{v:.2}")).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], ",v0,v1,Directional From Others");
        assert_eq!(lines[1], "v0,90.00,10.00,10.00");
        assert_eq!(lines[3], "Directional To Others,30.00,10.00,40.00");
        assert_eq!(lines[4], "Directional Including Own,120.00,80.00,20.00");
    }

    #[test]
    fn var_recovers_coefficients() {
        let phi = DMatrix::from_row_slice(2, 2, &[0.5, 0.2, 0.0, 0.4]);
        let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.0]);
        let y = simulate_var(&[1.0, -0.5], &[phi.clone()], &sigma, 2000, 200, 5).unwrap();
        let fit = fit_var_matrix(&y, &names(2), 1, SigmaDenominator::MaximumLikelihood).unwrap();
        assert!((&fit.coefficients[0] - &phi).amax() < 0.05);
        assert!((&fit.sigma - &sigma).amax() < 0.1);
        // residuals are orthogonal to every regressor
        let (x, _) = lagged_design(&y, 1, 1);
        assert!((x.transpose() * &fit.residuals).amax() < 1e-8 * y.nrows() as f64);
    }

    #[test]
    fn aic_picks_true_order_of_var1() {
        let phi = DMatrix::from_row_slice(2, 2, &[0.5, 0.2, 0.0, 0.4]);
        let sigma = DMatrix::identity(2, 2);
        let hits = (0..20)
            .filter(|&s| {
                let y = simulate_var(&[0.0, 0.0], &[phi.clone()], &sigma, 1000, 200, 100 + s).unwrap();
                select_lag_matrix(&y, &names(2), 4).unwrap() == 1
            })
            .count();
        assert!(hits >= 16, "{hits}/20");
        let y = simulate_var(&[0.0, 0.0], &[phi], &sigma, 100, 10, 1).unwrap();
        assert_eq!(select_lag_matrix(&y, &names(2), 1).unwrap(), 1);
    }

    #[test]
    fn white_noise_coefficients_near_zero() {
        let t = 1000;
        let mut maxes = Vec::new();
        for s in 0..20 {
            let y = simulate_var(&[0.0; 3], &[], &DMatrix::identity(3, 3), t, 0, s).unwrap();
            let fit = fit_var_matrix(&y, &names(3), 1, SigmaDenominator::MaximumLikelihood).unwrap();
            maxes.push(fit.coefficients[0].amax());
        }
        maxes.sort_by(f64::total_cmp);
        assert!(maxes[10] < 3.0 / (t as f64).sqrt());
    }

    #[test]
    fn too_many_lags_is_an_error() {
        let y = DMatrix::from_fn(20, 3, |t, i| ((t * 7 + i * 3) % 11) as f64);
        assert!(matches!(
            fit_var_matrix(&y, &names(3), 7, SigmaDenominator::MaximumLikelihood),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn collinear_columns_are_named() {
        let y = DMatrix::from_fn(60, 2, |t, _| ((t * 7) % 11) as f64);
        let err = fit_var_matrix(&y, &["a".into(), "b".into()], 1, SigmaDenominator::MaximumLikelihood).unwrap_err();
        assert!(err.to_string().contains("b.l1"), "{err}");
    }
}
