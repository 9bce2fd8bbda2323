//! Seeded simulators built on the same recursions as the estimators.

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bekk::BekkParams;
use crate::dcc::DccParams;
use crate::error::{Error, Result};
use crate::garch::{GarchParams, IGARCH_BOUND};
use crate::panel::{PricePanel, RangeVolatilityOptions, ReturnPanel};

/// First date of every simulated panel.
pub fn start_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2017, 3, 1).expect("valid date")
}

/// `n` consecutive weekdays starting at `start` (or the next weekday).
pub fn business_days(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

fn default_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("s{i}")).collect()
}

fn normals(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Wraps a `T×N` return matrix with simulated business-day dates.
pub fn return_panel(returns: DMatrix<f64>, names: Option<Vec<String>>) -> ReturnPanel {
    let n = returns.ncols();
    // the first return is dated one business day after the base price
    let dates = business_days(start_date(), returns.nrows() + 1)[1..].to_vec();
    ReturnPanel {
        dates,
        names: names.unwrap_or_else(|| default_names(n)),
        returns,
    }
}

#[derive(Debug, Clone)]
pub struct GarchSimulation {
    pub returns: Vec<f64>,
    pub variance: Vec<f64>,
}

/// GARCH(1,1) path with an optional AR mean, started at the unconditional
/// variance (or `ω` when the process has no finite one).
pub fn simulate_garch(params: &GarchParams, t_len: usize, seed: u64) -> Result<GarchSimulation> {
    params.validate(IGARCH_BOUND)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = params.phi.len();
    let persistence = params.persistence();
    let mut var = if persistence < 1.0 {
        params.omega / (1.0 - persistence)
    } else {
        params.omega
    };
    let mut returns = Vec::with_capacity(t_len);
    let mut variance = Vec::with_capacity(t_len);
    let mut prev_eps = 0.0;
    for t in 0..t_len {
        if t > 0 {
            var = params.omega + params.alpha * prev_eps * prev_eps + params.beta * var;
        }
        let eps = var.sqrt() * rng.sample::<f64, _>(StandardNormal);
        let mut r = params.phi0 + eps;
        for k in 0..p.min(t) {
            r += params.phi[k] * returns[t - 1 - k];
        }
        returns.push(r);
        variance.push(var);
        prev_eps = eps;
    }
    Ok(GarchSimulation { returns, variance })
}

#[derive(Debug, Clone)]
pub struct DccSimulation {
    pub returns: DMatrix<f64>,
    pub std_residuals: DMatrix<f64>,
    pub correlations: Vec<DMatrix<f64>>,
    pub variance: DMatrix<f64>,
}

impl DccSimulation {
    pub fn to_return_panel(&self) -> ReturnPanel {
        return_panel(self.returns.clone(), None)
    }
}

/// DCC path with GARCH(1,1) margins; `Q_1 = Q̄`.
pub fn simulate_dcc(
    garch: &[GarchParams],
    theta: f64,
    eta: f64,
    q_bar: &DMatrix<f64>,
    t_len: usize,
    seed: u64,
) -> Result<DccSimulation> {
    let n = garch.len();
    let dcc = DccParams {
        theta,
        eta,
        q_bar: q_bar.clone(),
    };
    dcc.validate()?;
    if q_bar.nrows() != n {
        return Err(Error::InvalidParameters(format!(
            "q_bar is {}x{}, expected {n}x{n}",
            q_bar.nrows(),
            q_bar.ncols()
        )));
    }
    for g in garch {
        g.validate(IGARCH_BOUND)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut returns = DMatrix::zeros(t_len, n);
    let mut std_residuals = DMatrix::zeros(t_len, n);
    let mut variance = DMatrix::zeros(t_len, n);
    let mut correlations = Vec::with_capacity(t_len);
    let mut q = q_bar.clone();
    let mut var: Vec<f64> = garch
        .iter()
        .map(|g| {
            let p = g.persistence();
            if p < 1.0 {
                g.omega / (1.0 - p)
            } else {
                g.omega
            }
        })
        .collect();
    let mut prev_eps = vec![0.0; n];
    for t in 0..t_len {
        if t > 0 {
            let z = std_residuals.row(t - 1).transpose();
            q = q_bar * (1.0 - theta - eta) + theta * &z * z.transpose() + eta * &q;
            for i in 0..n {
                let g = &garch[i];
                var[i] = g.omega + g.alpha * prev_eps[i] * prev_eps[i] + g.beta * var[i];
            }
        }
        let d = DVector::from_fn(n, |i, _| 1.0 / q[(i, i)].sqrt());
        let mut r = DMatrix::from_fn(n, n, |i, j| q[(i, j)] * d[i] * d[j]);
        for i in 0..n {
            r[(i, i)] = 1.0;
        }
        let chol = r
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NonFinite(format!("correlation matrix not positive definite at t={t}")))?;
        let z = chol.l() * normals(&mut rng, n);
        for i in 0..n {
            let eps = var[i].sqrt() * z[i];
            std_residuals[(t, i)] = z[i];
            variance[(t, i)] = var[i];
            returns[(t, i)] = garch[i].phi0 + eps;
            prev_eps[i] = eps;
        }
        correlations.push(r);
    }
    Ok(DccSimulation {
        returns,
        std_residuals,
        correlations,
        variance,
    })
}

#[derive(Debug, Clone)]
pub struct BekkSimulation {
    pub residuals: DMatrix<f64>,
    pub covariance: Vec<DMatrix<f64>>,
}

impl BekkSimulation {
    pub fn to_return_panel(&self) -> ReturnPanel {
        return_panel(self.residuals.clone(), None)
    }
}

/// BEKK(1,1) path started at the unconditional covariance when it exists,
/// otherwise at `CCᵀ`.
pub fn simulate_bekk(params: &BekkParams, t_len: usize, seed: u64) -> Result<BekkSimulation> {
    params.validate()?;
    let n = params.dim();
    let cc = &params.c * params.c.transpose();
    let mut h = params
        .unconditional_covariance()
        .filter(|h| h.clone().cholesky().is_some())
        .unwrap_or_else(|| cc.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut residuals = DMatrix::zeros(t_len, n);
    let mut covariance = Vec::with_capacity(t_len);
    for t in 0..t_len {
        if t > 0 {
            let e = residuals.row(t - 1).transpose();
            let v = params.a.transpose() * e;
            h = &cc + &v * v.transpose() + params.b.transpose() * &h * &params.b;
        }
        let chol = h
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NonFinite(format!("covariance not positive definite at t={t}")))?;
        let e = chol.l() * normals(&mut rng, n);
        residuals.row_mut(t).copy_from(&e.transpose());
        covariance.push(h.clone());
    }
    Ok(BekkSimulation { residuals, covariance })
}

/// Gaussian VAR(p) `y_t = c + Σ Φ_k y_{t−k} + u_t`, `u_t ~ N(0, Σ)`, after
/// discarding `burn_in` draws started at zero.
pub fn simulate_var(
    intercept: &[f64],
    coefficients: &[DMatrix<f64>],
    sigma: &DMatrix<f64>,
    t_len: usize,
    burn_in: usize,
    seed: u64,
) -> Result<DMatrix<f64>> {
    let n = intercept.len();
    if coefficients.iter().any(|phi| phi.shape() != (n, n)) || sigma.shape() != (n, n) {
        return Err(Error::InvalidParameters(format!("VAR matrices must be {n}x{n}")));
    }
    let chol = sigma
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidParameters("innovation covariance must be positive definite".into()))?;
    let l = chol.l();
    let c = DVector::from_column_slice(intercept);
    let p = coefficients.len();
    let total = t_len + burn_in;
    let mut y: Vec<DVector<f64>> = Vec::with_capacity(total);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 0..total {
        let mut v = &c + &l * normals(&mut rng, n);
        for k in 0..p.min(t) {
            v += &coefficients[k] * &y[t - 1 - k];
        }
        y.push(v);
    }
    Ok(DMatrix::from_fn(t_len, n, |t, i| y[burn_in + t][i]))
}

/// Close prices cumulated from a base of 100, one row longer than the
/// returns and dated one business day earlier.
pub fn prices_from_returns(returns: &ReturnPanel) -> Result<PricePanel> {
    let (t_len, n) = returns.returns.shape();
    let mut close = DMatrix::from_element(t_len + 1, n, 100.0);
    for t in 0..t_len {
        for i in 0..n {
            close[(t + 1, i)] = close[(t, i)] * returns.returns[(t, i)].exp();
        }
    }
    let dates = business_days(start_date(), t_len + 1);
    PricePanel::new(dates, returns.names.clone(), close, None, None)
}

/// Adds synthetic high/low prices: `close·exp(|d₁|)` and `close·exp(−|d₂|)`
/// with `d ~ N(0, s_i²/4)`, `s_i` the standard deviation of series `i`'s
/// log returns.
pub fn with_synthetic_range(prices: &PricePanel, seed: u64) -> Result<PricePanel> {
    let close = prices.close();
    let (t_len, n) = close.shape();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut high = DMatrix::zeros(t_len, n);
    let mut low = DMatrix::zeros(t_len, n);
    for i in 0..n {
        let r: Vec<f64> = (1..t_len).map(|t| (close[(t, i)] / close[(t - 1, i)]).ln()).collect();
        let s = if r.len() > 1 { crate::linalg::sample_variance(&r).sqrt() } else { 0.0 };
        let s = if s > 0.0 { s } else { 0.01 };
        for t in 0..t_len {
            let d1: f64 = rng.sample(StandardNormal);
            let d2: f64 = rng.sample(StandardNormal);
            high[(t, i)] = close[(t, i)] * (0.5 * s * d1.abs()).exp();
            low[(t, i)] = close[(t, i)] * (-0.5 * s * d2.abs()).exp();
        }
    }
    PricePanel::new(prices.dates().to_vec(), prices.names().to_vec(), close.clone(), Some(high), Some(low))
}

/// Price panel whose range volatility reproduces `vol` exactly: the log
/// range is set from each volatility and the close sits at a random point
/// inside the day's range. Closes follow a Gaussian walk scaled by the
/// same daily volatility.
pub fn prices_from_volatility(
    vol: &DMatrix<f64>,
    names: Vec<String>,
    options: &RangeVolatilityOptions,
    seed: u64,
) -> Result<PricePanel> {
    let (t_len, n) = vol.shape();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut close = DMatrix::zeros(t_len, n);
    let mut high = DMatrix::zeros(t_len, n);
    let mut low = DMatrix::zeros(t_len, n);
    let daily = |v: f64| v / 100.0 / (options.annualization_days as f64).sqrt();
    for i in 0..n {
        let mut log_close = 100f64.ln();
        for t in 0..t_len {
            if t > 0 {
                log_close += daily(vol[(t, i)]) * rng.sample::<f64, _>(StandardNormal);
            }
            let range = options.log_range_for(vol[(t, i)]);
            let u: f64 = rng.random();
            let log_high = log_close + u * range;
            close[(t, i)] = log_close.exp();
            high[(t, i)] = log_high.exp();
            low[(t, i)] = (log_high - range).exp();
        }
    }
    let dates = business_days(start_date(), t_len);
    PricePanel::new(dates, names, close, Some(high), Some(low))
}

/// Positive volatility panel from a stationary VAR(1) in log volatility.
/// `shock_scale[t]` multiplies the off-diagonal innovation covariance at
/// row `t`, which lets a panel switch to a more connected regime.
pub fn synthetic_volatility(n: usize, t_len: usize, seed: u64, shock_scale: impl Fn(usize) -> f64) -> Result<DMatrix<f64>> {
    let burn_in = 200;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut phi = DMatrix::zeros(n, n);
    for i in 0..n {
        phi[(i, i)] = rng.random_range(0.4..0.7);
        for j in 0..n {
            if j != i {
                phi[(i, j)] = rng.random_range(0.0..0.15) / n as f64;
            }
        }
    }
    let level = DVector::from_fn(n, |_, _| rng.random_range(3.0..3.8));
    let mut y = DVector::zeros(n);
    let mut out = DMatrix::zeros(t_len, n);
    for t in 0..burn_in + t_len {
        let k = if t < burn_in { shock_scale(0) } else { shock_scale(t - burn_in) };
        let sigma = DMatrix::from_fn(n, n, |i, j| if i == j { 0.04 } else { 0.012 * k.min(3.0) });
        let l = sigma
            .cholesky()
            .ok_or_else(|| Error::InvalidParameters("shock scale gives a non-PD covariance".into()))?
            .l();
        y = &phi * &y + &l * normals(&mut rng, n);
        if t >= burn_in {
            for i in 0..n {
                out[(t - burn_in, i)] = (level[i] + y[i]).exp();
            }
        }
    }
    Ok(out)
}
