//! Rolling-window spillover indices.
//!
//! Every window is an independent call to [`spillover_pipeline`] on the
//! window's slice of the panel, so a rolling result can always be checked
//! against a standalone run.

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::VolatilityPanel;
use crate::spillover::{
    build_spillover_table_with, fit_var_with, gfevd_with, select_lag, PairwiseSign, ShockScaling,
    SigmaDenominator, SpilloverTable,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RollingConfig {
    /// Observations per window.
    pub window: usize,
    pub horizon: usize,
    pub lag: usize,
    pub step: usize,
    /// Re-select the lag in each window by AIC up to this order.
    pub select_lag_max: Option<usize>,
    pub sigma_denominator: SigmaDenominator,
    pub shock_scaling: ShockScaling,
    pub pairwise_sign: PairwiseSign,
    pub parallel: bool,
}

impl Default for RollingConfig {
    fn default() -> Self {
        Self {
            window: 104,
            horizon: 10,
            lag: 4,
            step: 1,
            select_lag_max: None,
            sigma_denominator: SigmaDenominator::default(),
            shock_scaling: ShockScaling::default(),
            pairwise_sign: PairwiseSign::default(),
            parallel: true,
        }
    }
}

impl RollingConfig {
    pub fn validate(&self, n_series: usize) -> Result<()> {
        if self.step == 0 {
            return Err(Error::InvalidInput("rolling step must be at least 1".into()));
        }
        if self.horizon == 0 || self.lag == 0 {
            return Err(Error::InvalidInput("horizon and lag must be at least 1".into()));
        }
        let lag = self.select_lag_max.unwrap_or(self.lag).max(self.lag);
        if self.window <= n_series * lag + 10 {
            return Err(Error::InvalidInput(format!(
                "window of {} is too short for {n_series} series at lag {lag} (needs > {})",
                self.window,
                n_series * lag + 10
            )));
        }
        Ok(())
    }
}

/// VAR fit, generalized FEVD and spillover table for one panel.
pub fn spillover_pipeline(panel: &VolatilityPanel, config: &RollingConfig) -> Result<SpilloverTable> {
    let lag = match config.select_lag_max {
        Some(p_max) => select_lag(panel, p_max)?,
        None => config.lag,
    };
    let fit = fit_var_with(panel, lag, config.sigma_denominator)?;
    let fevd = gfevd_with(&fit, config.horizon, config.shock_scaling)?;
    build_spillover_table_with(&fevd, panel.names(), config.pairwise_sign)
}

pub fn window_count(t_len: usize, window: usize, step: usize) -> usize {
    if t_len < window || step == 0 {
        0
    } else {
        (t_len - window) / step + 1
    }
}

/// One entry per window; `None` marks a window whose estimation failed.
#[derive(Debug, Clone)]
pub struct RollingSeries {
    pub names: Vec<String>,
    /// Window end dates.
    pub dates: Vec<NaiveDate>,
    pub total: Vec<Option<f64>>,
    /// `to[i][k]`: spillover from market `i` to others in window `k`.
    pub to: Vec<Vec<Option<f64>>>,
    pub from: Vec<Vec<Option<f64>>>,
    pub net: Vec<Vec<Option<f64>>>,
    /// `pairwise[i][j][k]`.
    pub pairwise: Vec<Vec<Vec<Option<f64>>>>,
    /// Index and error message of each failed window.
    pub failures: Vec<(usize, String)>,
}

impl RollingSeries {
    fn from_tables(names: Vec<String>, dates: Vec<NaiveDate>, results: Vec<Result<SpilloverTable>>) -> Self {
        let n = names.len();
        let windows = results.len();
        let mut s = Self {
            names,
            dates,
            total: Vec::with_capacity(windows),
            to: vec![Vec::with_capacity(windows); n],
            from: vec![Vec::with_capacity(windows); n],
            net: vec![Vec::with_capacity(windows); n],
            pairwise: vec![vec![Vec::with_capacity(windows); n]; n],
            failures: Vec::new(),
        };
        for (k, r) in results.into_iter().enumerate() {
            let table = match r {
                Ok(t) => Some(t),
                Err(e) => {
                    s.failures.push((k, e.to_string()));
                    None
                }
            };
            let t = table.as_ref();
            s.total.push(t.map(|t| t.total_index));
            for i in 0..n {
                s.to[i].push(t.map(|t| t.directional_to[i]));
                s.from[i].push(t.map(|t| t.directional_from[i]));
                s.net[i].push(t.map(|t| t.net[i]));
                for j in 0..n {
                    s.pairwise[i][j].push(t.map(|t| t.net_pairwise[(i, j)]));
                }
            }
        }
        s
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Long form `date,measure,market_i,market_j,value`; failed windows
    /// keep their rows with an empty value.
    pub fn long_rows(&self, fmt: &dyn Fn(f64) -> String) -> Vec<[String; 5]> {
        let n = self.names.len();
        let cell = |v: Option<f64>| v.map(fmt).unwrap_or_default();
        let mut rows = Vec::new();
        for (k, date) in self.dates.iter().enumerate() {
            let d = date.format("%Y-%m-%d").to_string();
            rows.push([d.clone(), "total".into(), String::new(), String::new(), cell(self.total[k])]);
            for (measure, series) in [("to", &self.to), ("from", &self.from), ("net", &self.net)] {
                for i in 0..n {
                    rows.push([d.clone(), measure.into(), self.names[i].clone(), String::new(), cell(series[i][k])]);
                }
            }
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        rows.push([
                            d.clone(),
                            "pairwise".into(),
                            self.names[i].clone(),
                            self.names[j].clone(),
                            cell(self.pairwise[i][j][k]),
                        ]);
                    }
                }
            }
        }
        rows
    }

    pub fn write_long_csv<W: std::io::Write>(&self, out: W, fmt: &dyn Fn(f64) -> String) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let wrap = |e: csv::Error| Error::InvalidInput(format!("csv write failed: {e}"));
        w.write_record(["date", "measure", "market_i", "market_j", "value"]).map_err(wrap)?;
        for row in self.long_rows(fmt) {
            w.write_record(&row).map_err(wrap)?;
        }
        w.flush().map_err(|e| Error::InvalidInput(format!("csv write failed: {e}")))?;
        Ok(())
    }
}

pub fn rolling_spillover(panel: &VolatilityPanel, config: &RollingConfig) -> Result<RollingSeries> {
    config.validate(panel.n_series())?;
    let t_len = panel.n_obs();
    if t_len < config.window {
        return Err(Error::InsufficientData(format!(
            "{t_len} observations is shorter than the {}-day window",
            config.window
        )));
    }
    let count = window_count(t_len, config.window, config.step);
    let run = |k: usize| {
        let start = k * config.step;
        spillover_pipeline(&panel.slice(start, start + config.window), config)
    };
    let results: Vec<Result<SpilloverTable>> = if config.parallel {
        (0..count).into_par_iter().map(run).collect()
    } else {
        (0..count).map(run).collect()
    };
    let dates = (0..count)
        .map(|k| panel.dates()[k * config.step + config.window - 1])
        .collect();
    let series = RollingSeries::from_tables(panel.names().to_vec(), dates, results);
    if series.failures.len() == count {
        return Err(Error::InsufficientData(format!(
            "all {count} rolling windows failed; first error: {}",
            series.failures[0].1
        )));
    }
    Ok(series)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeSummary {
    pub measure: String,
    pub min: f64,
    pub min_date: NaiveDate,
    pub max: f64,
    pub max_date: NaiveDate,
    pub mean: f64,
    /// Windows that contributed (gaps excluded).
    pub windows: usize,
}

fn summarize(measure: String, dates: &[NaiveDate], values: &[Option<f64>]) -> Option<RangeSummary> {
    let mut it = dates.iter().zip(values).filter_map(|(d, v)| v.map(|v| (*d, v)));
    let (d0, v0) = it.next()?;
    let mut s = RangeSummary {
        measure,
        min: v0,
        min_date: d0,
        max: v0,
        max_date: d0,
        mean: v0,
        windows: 1,
    };
    let mut sum = v0;
    for (d, v) in it {
        if v < s.min {
            s.min = v;
            s.min_date = d;
        }
        if v > s.max {
            s.max = v;
            s.max_date = d;
        }
        sum += v;
        s.windows += 1;
    }
    s.mean = sum / s.windows as f64;
    Some(s)
}

/// Min, max (with the first date attaining each) and mean of the total,
/// to, from and net series.
pub fn summarize_range(series: &RollingSeries) -> Result<Vec<RangeSummary>> {
    let mut out = Vec::new();
    let dates = &series.dates;
    out.extend(summarize("total".into(), dates, &series.total));
    for (measure, values) in [("to", &series.to), ("from", &series.from), ("net", &series.net)] {
        for (name, v) in series.names.iter().zip(values) {
            out.extend(summarize(format!("{measure}:{name}"), dates, v));
        }
    }
    if out.is_empty() {
        return Err(Error::InsufficientData("rolling series has no successful windows".into()));
    }
    Ok(out)
}
