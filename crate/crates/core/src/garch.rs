//! Univariate GARCH(1,1) with an autoregressive mean equation, fitted by
//! Gaussian quasi-maximum likelihood.
//!
//! Mean:      `ε_t = r_t − φ₀ − Σᵢ φᵢ r_{t−i}`
//! Variance:  `σ²_t = ω + α ε²_{t−1} + β σ²_{t−1}`, with `σ²` at the first
//! residual set to the sample variance of the residuals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{mean, population_variance, sample_variance};
use crate::optim::{
    minimize_multistart, sandwich_standard_errors, standard_errors, Block, InferenceResult, OptimResult,
    ParamTransform, Tolerances,
};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Default upper bound on `α + β`.
pub const STATIONARITY_BOUND: f64 = 0.9999;
/// Bound used when integrated or mildly explosive fits are allowed.
pub const IGARCH_BOUND: f64 = 1.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchParams {
    pub phi0: f64,
    pub phi: Vec<f64>,
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl GarchParams {
    pub fn new(omega: f64, alpha: f64, beta: f64) -> Self {
        Self {
            phi0: 0.0,
            phi: Vec::new(),
            omega,
            alpha,
            beta,
        }
    }

    pub fn with_mean(mut self, phi0: f64, phi: Vec<f64>) -> Self {
        self.phi0 = phi0;
        self.phi = phi;
        self
    }

    pub fn persistence(&self) -> f64 {
        self.alpha + self.beta
    }

    /// Checks positivity and `α + β < bound`.
    pub fn validate(&self, bound: f64) -> Result<()> {
        let all = [self.phi0, self.omega, self.alpha, self.beta];
        if all.iter().chain(&self.phi).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameters("GARCH parameters must be finite".into()));
        }
        if !(self.omega > 0.0) {
            return Err(Error::InvalidParameters(format!("omega = {} must be > 0", self.omega)));
        }
        if self.alpha < 0.0 || self.beta < 0.0 {
            return Err(Error::InvalidParameters(format!(
                "alpha = {} and beta = {} must be >= 0",
                self.alpha, self.beta
            )));
        }
        if self.persistence() >= bound {
            return Err(Error::InvalidParameters(format!(
                "alpha + beta = {} must be < {bound}",
                self.persistence()
            )));
        }
        Ok(())
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = vec![self.phi0];
        v.extend_from_slice(&self.phi);
        v.extend_from_slice(&[self.omega, self.alpha, self.beta]);
        v
    }

    pub fn from_slice(x: &[f64]) -> Self {
        let p = x.len() - 4;
        Self {
            phi0: x[0],
            phi: x[1..=p].to_vec(),
            omega: x[p + 1],
            alpha: x[p + 2],
            beta: x[p + 3],
        }
    }

    /// Labels matching [`Self::to_vec`].
    pub fn labels(mean_lags: usize) -> Vec<String> {
        let mut v = vec!["phi0".to_string()];
        v.extend((1..=mean_lags).map(|i| format!("phi{i}")));
        v.extend(["omega", "alpha", "beta"].map(String::from));
        v
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GarchConfig {
    /// AR order of the mean equation.
    pub mean_lags: usize,
    /// Minimum series length.
    pub min_obs: usize,
    /// Relax the `α + β` bound from 0.9999 to 1.2.
    pub allow_igarch: bool,
    /// Jittered starts in addition to the default start.
    pub restarts: usize,
    pub seed: u64,
    /// QML sandwich standard errors instead of inverse information.
    pub robust_se: bool,
    #[serde(skip)]
    pub tolerances: Tolerances,
}

impl Default for GarchConfig {
    fn default() -> Self {
        Self {
            mean_lags: 0,
            min_obs: 250,
            allow_igarch: false,
            restarts: 4,
            seed: 20_210_121,
            robust_se: false,
            tolerances: Tolerances::default(),
        }
    }
}

impl GarchConfig {
    pub fn stationarity_bound(&self) -> f64 {
        if self.allow_igarch {
            IGARCH_BOUND
        } else {
            STATIONARITY_BOUND
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GarchFit {
    pub params: GarchParams,
    /// Aligned with `residuals`; the first `mean_lags` returns have none.
    pub cond_variance: Vec<f64>,
    pub residuals: Vec<f64>,
    pub std_residuals: Vec<f64>,
    pub loglik: f64,
    /// In the order of [`GarchParams::to_vec`]; `None` when the information
    /// matrix could not be inverted (reason in `warnings`).
    pub inference: Option<InferenceResult>,
    pub optim: OptimResult,
    pub warnings: Vec<String>,
}

impl GarchFit {
    pub fn mean_lags(&self) -> usize {
        self.params.phi.len()
    }
}

fn mean_residuals(phi0: f64, phi: &[f64], returns: &[f64]) -> Vec<f64> {
    let p = phi.len();
    (p..returns.len())
        .map(|t| {
            let ar: f64 = phi.iter().enumerate().map(|(i, c)| c * returns[t - 1 - i]).sum();
            returns[t] - phi0 - ar
        })
        .collect()
}

fn variance_path(omega: f64, alpha: f64, beta: f64, resid: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(resid.len());
    let mut prev = population_variance(resid);
    out.push(prev);
    for e in &resid[..resid.len() - 1] {
        prev = omega + alpha * e * e + beta * prev;
        out.push(prev);
    }
    out
}

/// Mean-equation residuals and conditional variances.
pub fn garch_filter(params: &GarchParams, returns: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    params.validate(f64::INFINITY)?;
    if returns.iter().any(|r| !r.is_finite()) {
        return Err(Error::NonFinite("returns contain a non-finite value".into()));
    }
    if returns.len() <= params.phi.len() {
        return Err(Error::InsufficientData(format!(
            "{} returns for a mean equation with {} lags",
            returns.len(),
            params.phi.len()
        )));
    }
    let resid = mean_residuals(params.phi0, &params.phi, returns);
    let var = variance_path(params.omega, params.alpha, params.beta, &resid);
    Ok((resid, var))
}

/// Per-observation negative log-likelihood terms for the packed parameter
/// vector (no validation; `None` if any variance is not positive).
fn nll_terms(x: &[f64], returns: &[f64]) -> Option<Vec<f64>> {
    let p = x.len() - 4;
    let resid = mean_residuals(x[0], &x[1..=p], returns);
    let var = variance_path(x[p + 1], x[p + 2], x[p + 3], &resid);
    let mut terms = Vec::with_capacity(resid.len());
    for (e, s2) in resid.iter().zip(&var) {
        if !(*s2 > 0.0) || !s2.is_finite() {
            return None;
        }
        terms.push(0.5 * (LN_2PI + s2.ln() + e * e / s2));
    }
    Some(terms)
}

fn nll_total(x: &[f64], returns: &[f64]) -> f64 {
    nll_terms(x, returns).map_or(f64::INFINITY, |t| t.iter().sum())
}

/// Gaussian negative log-likelihood `½ Σ [ln 2π + ln σ²_t + ε²_t/σ²_t]`.
pub fn garch_nll(params: &GarchParams, returns: &[f64]) -> f64 {
    nll_total(&params.to_vec(), returns)
}

fn transform(mean_lags: usize, bound: f64) -> ParamTransform {
    ParamTransform::new(vec![
        Block::Free(mean_lags + 1),
        Block::Positive,
        Block::SimplexPair { bound },
    ])
}

/// Starting vectors in the standardized scale (unit variance data).
fn starting_points(config: &GarchConfig, y: &[f64]) -> Vec<Vec<f64>> {
    let p = config.mean_lags;
    let bound = config.stationarity_bound();
    let var = population_variance(y);
    let mut base = vec![mean(y)];
    base.extend(std::iter::repeat(0.0).take(p));
    let point = |alpha: f64, beta: f64, omega: f64| {
        let mut v = base.clone();
        v.extend_from_slice(&[omega, alpha, beta]);
        v
    };
    let mut starts = vec![point(0.05, 0.90, 0.05 * var)];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    while starts.len() < config.restarts + 1 {
        let alpha: f64 = rng.random_range(0.02..0.20);
        let beta: f64 = rng.random_range(0.50..0.95);
        if alpha + beta >= 0.99 * bound.min(1.0) {
            continue;
        }
        starts.push(point(alpha, beta, (1.0 - alpha - beta) * var));
    }
    starts
}

/// Fits GARCH(1,1) by QML. The optimization runs on returns divided by their
/// sample standard deviation; estimates and standard errors are mapped back
/// to the original scale.
pub fn fit_garch11(returns: &[f64], config: &GarchConfig) -> Result<GarchFit> {
    let n = returns.len();
    let p = config.mean_lags;
    if n < config.min_obs.max(p + 10) {
        return Err(Error::InsufficientData(format!(
            "GARCH fit needs at least {} observations, got {n}",
            config.min_obs.max(p + 10)
        )));
    }
    if returns.iter().any(|r| !r.is_finite()) {
        return Err(Error::NonFinite("returns contain a non-finite value".into()));
    }
    let scale = sample_variance(returns).sqrt();
    if !(scale > 0.0) {
        return Err(Error::InvalidInput("return series is constant".into()));
    }
    let y: Vec<f64> = returns.iter().map(|r| r / scale).collect();
    let bound = config.stationarity_bound();
    let transform = transform(p, bound);
    let nobs = (n - p) as f64;
    let objective = |x: &[f64]| nll_total(x, &y) / nobs;
    let starts = starting_points(config, &y);
    let (best, runs) = minimize_multistart(objective, &starts, &transform, &config.tolerances)?;

    let mut warnings = Vec::new();
    if !best.converged {
        if best.gradient_norm.is_finite() && best.gradient_norm <= 1e-3 {
            warnings.push(format!(
                "optimizer stopped ({:?}) with gradient norm {:.2e}",
                best.termination, best.gradient_norm
            ));
        } else {
            let attempts: Vec<String> = runs
                .iter()
                .map(|r| match r {
                    Ok(r) => format!("{:?} nll={:.6} |g|={:.2e}", r.termination, r.objective_value, r.gradient_norm),
                    Err(e) => e.to_string(),
                })
                .collect();
            return Err(Error::NonConvergence(format!(
                "GARCH(1,1) fit failed from all {} starts; best point {:?}; attempts: [{}]",
                starts.len(),
                best.point,
                attempts.join("; ")
            )));
        }
    }

    let xs = &best.point;
    // x_orig = x_scaled * factor, elementwise
    let mut factor = vec![scale];
    factor.extend(std::iter::repeat(1.0).take(p));
    factor.extend_from_slice(&[scale * scale, 1.0, 1.0]);
    let x_orig: Vec<f64> = xs.iter().zip(&factor).map(|(a, b)| a * b).collect();
    let params = GarchParams::from_slice(&x_orig);
    if params.persistence() >= bound - 1e-3 {
        warnings.push(format!(
            "alpha + beta = {:.6} is at the stationarity boundary {bound}",
            params.persistence()
        ));
    }

    let inference = if config.robust_se {
        sandwich_standard_errors(|x: &[f64]| nll_terms(x, &y).unwrap_or_else(|| vec![f64::NAN]), xs)
    } else {
        standard_errors(|x: &[f64]| nll_total(x, &y), xs)
    };
    let inference = match inference {
        Ok(inf) => Some(inf.rescaled(x_orig.clone(), &factor)),
        Err(e) => {
            warnings.push(format!("standard errors unavailable: {e}"));
            None
        }
    };

    let (residuals, cond_variance) = garch_filter(&params, returns)?;
    let std_residuals = residuals
        .iter()
        .zip(&cond_variance)
        .map(|(e, v)| e / v.sqrt())
        .collect();
    let loglik = -garch_nll(&params, returns);
    Ok(GarchFit {
        params,
        cond_variance,
        residuals,
        std_residuals,
        loglik,
        inference,
        optim: best,
        warnings,
    })
}
