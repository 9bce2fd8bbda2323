//! Two-step DCC-GARCH(1,1).
//!
//! Step one fits a GARCH(1,1) to every series. Step two fixes `Q̄` at the
//! sample correlation of the standardized residuals and maximizes the
//! correlation part of the likelihood over `(θ, η)`:
//!
//! ```text
//! Q_t = Q̄ (1 − θ − η) + θ z_{t−1} z_{t−1}ᵀ + η Q_{t−1},   Q_1 = Q̄
//! R_t = diag(Q_t)^{-1/2} Q_t diag(Q_t)^{-1/2}
//! H_t = D_t R_t D_t
//! ```

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::garch::{fit_garch11, GarchConfig, GarchFit};
use crate::linalg::{cholesky_in_place, cholesky_quad_form, correlation, eigen_range};
use crate::optim::{minimize_multistart, standard_errors, Block, InferenceResult, OptimResult, ParamTransform, Tolerances};
use crate::panel::ReturnPanel;

/// Upper bound on `θ + η` used by the estimator.
pub const DCC_PERSISTENCE_BOUND: f64 = 0.9999;

#[derive(Debug, Clone, PartialEq)]
pub struct DccParams {
    pub theta: f64,
    pub eta: f64,
    pub q_bar: DMatrix<f64>,
}

impl DccParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta >= 0.0 && self.eta >= 0.0) {
            return Err(Error::InvalidParameters(format!(
                "theta = {} and eta = {} must be >= 0",
                self.theta, self.eta
            )));
        }
        if self.theta + self.eta >= 1.0 {
            return Err(Error::InvalidParameters(format!(
                "theta + eta = {} must be < 1",
                self.theta + self.eta
            )));
        }
        let q = &self.q_bar;
        if !q.is_square() {
            return Err(Error::InvalidParameters("q_bar must be square".into()));
        }
        let n = q.nrows();
        for i in 0..n {
            if (q[(i, i)] - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidParameters("q_bar must have a unit diagonal".into()));
            }
            for j in 0..i {
                if (q[(i, j)] - q[(j, i)]).abs() > 1e-12 {
                    return Err(Error::InvalidParameters("q_bar must be symmetric".into()));
                }
            }
        }
        if eigen_range(q).0 < -1e-10 {
            return Err(Error::InvalidParameters("q_bar must be positive semidefinite".into()));
        }
        Ok(())
    }
}

/// Dynamic correlation matrices `R_t`, one per row of `std_resid`.
pub fn dcc_filter(params: &DccParams, std_resid: &DMatrix<f64>) -> Result<Vec<DMatrix<f64>>> {
    params.validate()?;
    let n = params.q_bar.nrows();
    if std_resid.ncols() != n {
        return Err(Error::InvalidInput(format!(
            "residual matrix has {} columns, q_bar is {n}x{n}",
            std_resid.ncols()
        )));
    }
    if std_resid.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("standardized residuals contain a non-finite value".into()));
    }
    let (theta, eta) = (params.theta, params.eta);
    let q_bar = &params.q_bar;
    let mut q = q_bar.clone();
    let mut path = Vec::with_capacity(std_resid.nrows());
    for t in 0..std_resid.nrows() {
        if t > 0 {
            let z = std_resid.row(t - 1);
            q = q_bar * (1.0 - theta - eta) + z.transpose() * z * theta + &q * eta;
        }
        let d: Vec<f64> = (0..n).map(|i| q[(i, i)]).collect();
        assert!(d.iter().all(|v| *v > 0.0), "q_ii must stay positive under valid parameters");
        path.push(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                1.0
            } else {
                q[(i, j)] / (d[i] * d[j]).sqrt()
            }
        }));
    }
    Ok(path)
}

/// Correlation part of the negative log-likelihood,
/// `½ Σ_t [ln|R_t| + z_tᵀ R_t⁻¹ z_t − z_tᵀ z_t]`, evaluated without
/// parameter validation (`∞` when some `R_t` is not positive definite).
pub fn correlation_nll(theta: f64, eta: f64, q_bar: &DMatrix<f64>, z: &DMatrix<f64>) -> f64 {
    let n = q_bar.nrows();
    let mut q: Vec<f64> = (0..n * n).map(|k| q_bar[(k / n, k % n)]).collect();
    let qb = q.clone();
    let mut r = vec![0.0; n * n];
    let mut zt = vec![0.0; n];
    let mut work = vec![0.0; n];
    let mut total = 0.0;
    for t in 0..z.nrows() {
        if t > 0 {
            for i in 0..n {
                zt[i] = z[(t - 1, i)];
            }
            for k in 0..n * n {
                q[k] = qb[k] * (1.0 - theta - eta) + theta * zt[k / n] * zt[k % n] + eta * q[k];
            }
        }
        for i in 0..n {
            if !(q[i * n + i] > 0.0) {
                return f64::INFINITY;
            }
        }
        for i in 0..n {
            for j in 0..n {
                r[i * n + j] = q[i * n + j] / (q[i * n + i] * q[j * n + j]).sqrt();
            }
        }
        let Some(log_det) = cholesky_in_place(&mut r, n) else {
            return f64::INFINITY;
        };
        let mut zz = 0.0;
        for i in 0..n {
            zt[i] = z[(t, i)];
            zz += zt[i] * zt[i];
        }
        let quad = cholesky_quad_form(&r, n, &zt, &mut work);
        total += 0.5 * (log_det + quad - zz);
    }
    if total.is_finite() {
        total
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DccMode {
    /// One `(θ, η)` for the whole N-variable system.
    #[default]
    Joint,
    /// A separate bivariate DCC for each pair of series.
    Pairwise,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DccConfig {
    pub garch: GarchConfig,
    pub mode: DccMode,
    #[serde(skip)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone)]
pub struct DccFit {
    pub names: Vec<String>,
    /// Column indices of the fitted series in the source panel.
    pub series: Vec<usize>,
    pub garch_fits: Vec<GarchFit>,
    pub params: DccParams,
    pub corr_path: Vec<DMatrix<f64>>,
    pub cov_path: Vec<DMatrix<f64>>,
    /// Joint Gaussian log-likelihood (univariate parts plus correlation part).
    pub loglik: f64,
    pub corr_loglik: f64,
    /// For `(θ, η)`; step-one estimation error is not propagated.
    pub inference: Option<InferenceResult>,
    pub optim: OptimResult,
    pub warnings: Vec<String>,
}

fn std_residual_matrix(fits: &[GarchFit]) -> DMatrix<f64> {
    let t = fits[0].std_residuals.len();
    DMatrix::from_fn(t, fits.len(), |r, i| fits[i].std_residuals[r])
}

/// Step one for every column of the panel, in parallel.
pub fn fit_univariate(returns: &ReturnPanel, config: &GarchConfig) -> Result<Vec<GarchFit>> {
    (0..returns.n_series())
        .into_par_iter()
        .map(|i| {
            fit_garch11(&returns.series(i), config).map_err(|e| match e {
                Error::NonConvergence(m) => {
                    Error::NonConvergence(format!("series '{}': {m}", returns.names[i]))
                }
                other => other,
            })
        })
        .collect()
}

/// Step two given step-one fits.
pub fn fit_dcc_from_garch(
    names: Vec<String>,
    series: Vec<usize>,
    garch_fits: Vec<GarchFit>,
    config: &DccConfig,
) -> Result<DccFit> {
    let n = garch_fits.len();
    if n < 2 {
        return Err(Error::InvalidInput("DCC needs at least two series".into()));
    }
    let z = std_residual_matrix(&garch_fits);
    let q_bar = correlation(&z);
    let t = z.nrows() as f64;
    let transform = ParamTransform::new(vec![Block::SimplexPair {
        bound: DCC_PERSISTENCE_BOUND,
    }]);
    let objective = |x: &[f64]| correlation_nll(x[0], x[1], &q_bar, &z) / t;
    let starts = vec![vec![0.02, 0.95], vec![0.05, 0.90], vec![0.01, 0.98]];
    let (best, runs) = minimize_multistart(objective, &starts, &transform, &config.tolerances)?;

    let mut warnings = Vec::new();
    for f in &garch_fits {
        warnings.extend(f.warnings.iter().cloned());
    }
    if !best.converged {
        if best.gradient_norm.is_finite() && best.gradient_norm <= 1e-3 {
            warnings.push(format!(
                "DCC step two stopped ({:?}) with gradient norm {:.2e}",
                best.termination, best.gradient_norm
            ));
        } else {
            let attempts: Vec<String> = runs
                .iter()
                .map(|r| match r {
                    Ok(r) => format!("{:?} |g|={:.2e} at {:?}", r.termination, r.gradient_norm, r.point),
                    Err(e) => e.to_string(),
                })
                .collect();
            return Err(Error::NonConvergence(format!(
                "DCC correlation step did not converge: [{}]",
                attempts.join("; ")
            )));
        }
    }
    let (theta, eta) = (best.point[0], best.point[1]);
    if theta + eta >= DCC_PERSISTENCE_BOUND - 1e-3 {
        warnings.push(format!("theta + eta = {:.6} is at the boundary", theta + eta));
    }
    let inference = match standard_errors(|x: &[f64]| correlation_nll(x[0], x[1], &q_bar, &z), &best.point) {
        Ok(inf) => Some(inf),
        Err(e) => {
            warnings.push(format!("DCC standard errors unavailable: {e}"));
            None
        }
    };
    let corr_loglik = -correlation_nll(theta, eta, &q_bar, &z);
    let params = DccParams { theta, eta, q_bar };
    let corr_path = dcc_filter(&params, &z)?;
    let cov_path = corr_path
        .iter()
        .enumerate()
        .map(|(r, corr)| {
            let sd: Vec<f64> = garch_fits.iter().map(|f| f.cond_variance[r].sqrt()).collect();
            DMatrix::from_fn(n, n, |i, j| corr[(i, j)] * sd[i] * sd[j])
        })
        .collect();
    let loglik = garch_fits.iter().map(|f| f.loglik).sum::<f64>() + corr_loglik;
    Ok(DccFit {
        names,
        series,
        garch_fits,
        params,
        corr_path,
        cov_path,
        loglik,
        corr_loglik,
        inference,
        optim: best,
        warnings,
    })
}

/// Joint N-variable DCC.
pub fn fit_dcc(returns: &ReturnPanel, config: &DccConfig) -> Result<DccFit> {
    if returns.n_series() < 2 {
        return Err(Error::InvalidInput("DCC needs at least two series".into()));
    }
    let fits = fit_univariate(returns, &config.garch)?;
    fit_dcc_from_garch(
        returns.names.clone(),
        (0..returns.n_series()).collect(),
        fits,
        config,
    )
}

/// One bivariate DCC per pair `(i, j)`, `i < j`, sharing step one.
pub fn fit_dcc_pairwise(returns: &ReturnPanel, config: &DccConfig) -> Result<Vec<DccFit>> {
    if returns.n_series() < 2 {
        return Err(Error::InvalidInput("DCC needs at least two series".into()));
    }
    let fits = fit_univariate(returns, &config.garch)?;
    let n = returns.n_series();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    pairs
        .into_par_iter()
        .map(|(i, j)| {
            fit_dcc_from_garch(
                vec![returns.names[i].clone(), returns.names[j].clone()],
                vec![i, j],
                vec![fits[i].clone(), fits[j].clone()],
                config,
            )
        })
        .collect()
}

/// Time average of `ρ_ij,t` and its z-statistic `mean / (sd / √T)`.
pub fn mean_dynamic_correlation(fit: &DccFit, i: usize, j: usize) -> Result<(f64, f64)> {
    let n = fit.params.q_bar.nrows();
    if i == j || i >= n || j >= n {
        return Err(Error::InvalidInput(format!(
            "invalid series pair ({i}, {j}) for a {n}-series fit"
        )));
    }
    let path: Vec<f64> = fit.corr_path.iter().map(|r| r[(i, j)]).collect();
    let t = path.len() as f64;
    let mean = crate::linalg::mean(&path);
    let sd = crate::linalg::sample_variance(&path).sqrt();
    Ok((mean, mean / (sd / t.sqrt())))
}
