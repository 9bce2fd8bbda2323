//! Descriptive statistics, Jarque-Bera normality and augmented Dickey-Fuller
//! unit-root diagnostics for return panels.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ols;
use crate::panel::ReturnPanel;

pub const MIN_OBSERVATIONS: usize = 30;

/// Lag-order rule for the ADF regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdfLags {
    Fixed(usize),
    /// Minimize BIC over `0..=max`; `None` uses `⌊12·(n/100)^{1/4}⌋`.
    Bic { max: Option<usize> },
}

/// ADF regression with an intercept and no trend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdfConfig {
    pub lags: AdfLags,
}

impl Default for AdfConfig {
    fn default() -> Self {
        Self {
            lags: AdfLags::Bic { max: None },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdfResult {
    pub statistic: f64,
    pub p_value: f64,
    pub lags: usize,
    pub nobs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesStats {
    pub name: String,
    pub mean: f64,
    pub max: f64,
    pub min: f64,
    pub std_dev: f64,
    pub skewness: f64,
    /// Non-excess kurtosis (3 for a normal distribution).
    pub kurtosis: f64,
    pub n: usize,
    pub jarque_bera: f64,
    pub jarque_bera_p: f64,
    pub adf: AdfResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub series: Vec<SeriesStats>,
}

/// `JB = n/6 · (S² + (K − 3)²/4)` with its χ²(2) p-value.
pub fn jarque_bera(n: usize, skewness: f64, kurtosis: f64) -> (f64, f64) {
    let excess = kurtosis - 3.0;
    let stat = n as f64 / 6.0 * (skewness * skewness + excess * excess / 4.0);
    // χ²(2) survival function
    (stat, (-stat / 2.0).exp())
}

/// Moment-based skewness and non-excess kurtosis (population normalization).
pub fn skewness_kurtosis(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for x in xs {
        let d = x - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    (m3 / m2.powf(1.5), m4 / (m2 * m2))
}

// MacKinnon (1994) response-surface coefficients for the constant-only,
// single-series Dickey-Fuller distribution.
const TAU_MAX_C: f64 = 2.74;
const TAU_MIN_C: f64 = -18.83;
const TAU_STAR_C: f64 = -1.61;
const TAU_SMALLP_C: [f64; 3] = [2.1659, 1.4412, 0.038269];
const TAU_LARGEP_C: [f64; 4] = [1.7339, 0.93202, -0.12745, -0.0010368];

/// Approximate asymptotic p-value of an ADF t-statistic (intercept, no
/// trend).
pub fn mackinnon_p_value(stat: f64) -> f64 {
    if stat > TAU_MAX_C {
        return 1.0;
    }
    if stat < TAU_MIN_C {
        return 0.0;
    }
    let coefs: &[f64] = if stat <= TAU_STAR_C {
        &TAU_SMALLP_C
    } else {
        &TAU_LARGEP_C
    };
    let poly = coefs.iter().rev().fold(0.0, |acc, c| acc * stat + c);
    crate::optim::normal_cdf(poly)
}

struct AdfFit {
    statistic: f64,
    ssr: f64,
    nobs: usize,
    params: usize,
}

/// Regresses `Δy_t` on `[1, y_{t−1}, Δy_{t−1}, …, Δy_{t−lags}]` for
/// `t ≥ start` (indices into `Δy`).
fn adf_regression(y: &[f64], lags: usize, start: usize) -> Result<AdfFit> {
    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let rows: Vec<usize> = (start..dy.len()).collect();
    let k = 2 + lags;
    if rows.len() <= k {
        return Err(Error::InsufficientData(format!(
            "ADF regression with {lags} lags has only {} observations",
            rows.len()
        )));
    }
    let x = DMatrix::from_fn(rows.len(), k, |r, c| {
        let t = rows[r];
        match c {
            0 => 1.0,
            1 => y[t],
            _ => dy[t - (c - 1)],
        }
    });
    let target = DMatrix::from_fn(rows.len(), 1, |r, _| dy[rows[r]]);
    let mut names = vec!["const".to_string(), "level_lag".to_string()];
    names.extend((1..=lags).map(|l| format!("diff_lag{l}")));
    let fit = ols(&x, &target, &names)?;
    let ssr: f64 = fit.residuals.iter().map(|e| e * e).sum();
    let s2 = ssr / (rows.len() - k) as f64;
    let se = (s2 * fit.xtx_inverse[(1, 1)]).sqrt();
    Ok(AdfFit {
        statistic: fit.coefficients[(1, 0)] / se,
        ssr,
        nobs: rows.len(),
        params: k,
    })
}

pub fn adf_test(series: &[f64], config: &AdfConfig) -> Result<AdfResult> {
    let n = series.len();
    if n < MIN_OBSERVATIONS {
        return Err(Error::InsufficientData(format!(
            "ADF test needs at least {MIN_OBSERVATIONS} observations, got {n}"
        )));
    }
    let lags = match config.lags {
        AdfLags::Fixed(k) => k,
        AdfLags::Bic { max } => {
            let max = max
                .unwrap_or_else(|| (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize)
                .min(n / 2 - 2);
            let mut best = (f64::INFINITY, 0);
            for k in 0..=max {
                // common sample: skip the first `max` differences for every k
                let fit = adf_regression(series, k, max)?;
                let nobs = fit.nobs as f64;
                let bic = nobs * (fit.ssr / nobs).ln() + fit.params as f64 * nobs.ln();
                if bic < best.0 {
                    best = (bic, k);
                }
            }
            best.1
        }
    };
    let fit = adf_regression(series, lags, lags)?;
    Ok(AdfResult {
        statistic: fit.statistic,
        p_value: mackinnon_p_value(fit.statistic),
        lags,
        nobs: fit.nobs,
    })
}

pub fn series_stats(name: &str, xs: &[f64], adf: &AdfConfig) -> Result<SeriesStats> {
    let n = xs.len();
    if n < MIN_OBSERVATIONS {
        return Err(Error::InsufficientData(format!(
            "'{name}' has {n} observations, at least {MIN_OBSERVATIONS} required"
        )));
    }
    let mean = crate::linalg::mean(xs);
    let std_dev = crate::linalg::sample_variance(xs).sqrt();
    let (skewness, kurtosis) = skewness_kurtosis(xs);
    let (jb, jb_p) = jarque_bera(n, skewness, kurtosis);
    Ok(SeriesStats {
        name: name.to_string(),
        mean,
        max: xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        min: xs.iter().cloned().fold(f64::INFINITY, f64::min),
        std_dev,
        skewness,
        kurtosis,
        n,
        jarque_bera: jb,
        jarque_bera_p: jb_p,
        adf: adf_test(xs, adf)?,
    })
}

pub fn descriptive_stats(returns: &ReturnPanel, adf: &AdfConfig) -> Result<StatsReport> {
    let series = (0..returns.n_series())
        .map(|i| series_stats(&returns.names[i], &returns.series(i), adf))
        .collect::<Result<Vec<_>>>()?;
    Ok(StatsReport { series })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn jarque_bera_reported_moments() {
        let (jb, p) = jarque_bera(2877, -0.0028, 6.1062);
        assert!((jb / 1156.61 - 1.0).abs() < 0.005, "{jb}");
        assert!(p < 1e-100);
    }

    #[test]
    fn jarque_bera_normal_moments() {
        assert_eq!(jarque_bera(500, 0.0, 3.0).0, 0.0);
    }

    #[test]
    fn mackinnon_critical_values() {
        // tabulated asymptotic critical values for the constant case
        assert!((mackinnon_p_value(-3.43) - 0.01).abs() < 0.002);
        assert!((mackinnon_p_value(-2.86) - 0.05).abs() < 0.003);
        assert!((mackinnon_p_value(-2.57) - 0.10).abs() < 0.005);
        assert_eq!(mackinnon_p_value(-50.0), 0.0);
        assert_eq!(mackinnon_p_value(3.0), 1.0);
    }

    #[test]
    fn adf_white_noise_vs_random_walk() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut walk_not_rejected = 0;
        for _ in 0..20 {
            let noise: Vec<f64> = (0..2000).map(|_| StandardNormal.sample(&mut rng)).collect();
            let res = adf_test(&noise, &AdfConfig::default()).unwrap();
            assert!(res.p_value < 0.01, "{res:?}");
            let mut level = 0.0;
            let walk: Vec<f64> = noise
                .iter()
                .map(|e| {
                    level += e;
                    level
                })
                .collect();
            let res = adf_test(&walk, &AdfConfig::default()).unwrap();
            if res.p_value > 0.10 {
                walk_not_rejected += 1;
            }
        }
        assert!(walk_not_rejected >= 16, "{walk_not_rejected}");
    }

    #[test]
    fn too_short_series() {
        let xs = vec![0.1; 10];
        assert!(series_stats("x", &xs, &AdfConfig::default()).is_err());
    }

    #[test]
    fn stats_ordering_and_affine_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<f64> = (0..300)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * z * z
            })
            .collect();
        let s = series_stats("x", &xs, &AdfConfig { lags: AdfLags::Fixed(1) }).unwrap();
        assert!(s.max >= s.mean && s.mean >= s.min);
        assert!(s.std_dev >= 0.0 && s.jarque_bera >= 0.0);
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 7.0).collect();
        let t = series_stats("y", &ys, &AdfConfig { lags: AdfLags::Fixed(1) }).unwrap();
        assert!((s.jarque_bera / t.jarque_bera - 1.0).abs() < 1e-9);
    }
}
