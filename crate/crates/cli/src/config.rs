//! Command-line flags, the optional TOML config file and the resolved
//! [`RunConfig`].

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use volspill_core::bekk::BekkConfig;
use volspill_core::dcc::DccMode;
use volspill_core::garch::GarchConfig;
use volspill_core::panel::{PanelSchema, RangeVolatilityOptions};
use volspill_core::rolling::RollingConfig;
use volspill_core::spillover::{PairwiseSign, ShockScaling, SigmaDenominator};
use volspill_core::stats::{AdfConfig, AdfLags};

#[derive(Debug, Parser)]
#[command(name = "volspill", version, about = "Volatility spillover analysis for price panels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Analysis,
    /// TOML file whose keys are flag names; command-line flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    /// Descriptive statistics, Jarque-Bera and ADF tests of log returns.
    Stats,
    /// Univariate GARCH(1,1) per series.
    Garch,
    /// DCC-GARCH dynamic correlations.
    Dcc,
    /// BEKK-GARCH(1,1) and spillover directions.
    Bekk,
    /// Full-sample spillover table from range volatility.
    Spillover,
    /// Rolling-window spillover indices and plots.
    Rolling,
    /// Write a seeded synthetic price panel.
    Simulate,
    /// Every analysis on one panel.
    All,
}

fn parse_enum<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimModel {
    Garch,
    Dcc,
    Bekk,
    /// Range-volatility panel from a VAR in log volatility.
    #[default]
    Var,
}

/// Every flag, all optional so that file and command line can be layered.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Options {
    /// Input price CSV.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// close | companion | wide.
    #[arg(long, global = true, value_parser = parse_enum::<PanelSchema>)]
    pub schema: Option<PanelSchema>,
    #[arg(long, global = true)]
    pub min_rows: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Also write `<name>.full.csv` at full precision.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub full_precision: Option<bool>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Fixed ADF lag order (default: BIC selection).
    #[arg(long, global = true)]
    pub adf_lags: Option<usize>,
    /// Upper bound for BIC lag selection.
    #[arg(long, global = true)]
    pub adf_max_lag: Option<usize>,

    /// AR order of the GARCH mean equation.
    #[arg(long, global = true)]
    pub mean_lags: Option<usize>,
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub allow_igarch: Option<bool>,
    /// Sandwich standard errors for GARCH.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub robust_se: Option<bool>,
    #[arg(long, global = true)]
    pub garch_restarts: Option<usize>,

    /// joint | pairwise.
    #[arg(long, global = true, value_parser = parse_enum::<DccMode>)]
    pub dcc_mode: Option<DccMode>,

    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub bekk_diagonal: Option<bool>,
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub variance_targeting: Option<bool>,
    #[arg(long, global = true)]
    pub bekk_restarts: Option<usize>,
    /// Fit BEKK with more than six series.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub force: Option<bool>,
    /// Significance level for spillover directions.
    #[arg(long, global = true)]
    pub significance: Option<f64>,

    /// VAR lag order.
    #[arg(long, global = true)]
    pub lag: Option<usize>,
    /// Choose the VAR lag by AIC up to this order.
    #[arg(long, global = true)]
    pub select_lag_max: Option<usize>,
    /// Re-select the lag in every rolling window.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub select_lag_per_window: Option<bool>,
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    /// maximum-likelihood | degrees-of-freedom.
    #[arg(long, global = true, value_parser = parse_enum::<SigmaDenominator>)]
    pub sigma_denominator: Option<SigmaDenominator>,
    /// source | receiver.
    #[arg(long, global = true, value_parser = parse_enum::<ShockScaling>)]
    pub shock_scaling: Option<ShockScaling>,
    /// transmitted-minus-received | received-minus-transmitted.
    #[arg(long, global = true, value_parser = parse_enum::<PairwiseSign>)]
    pub pairwise_sign: Option<PairwiseSign>,
    #[arg(long, global = true)]
    pub range_constant: Option<f64>,
    #[arg(long, global = true)]
    pub annualization_days: Option<u32>,
    #[arg(long, global = true)]
    pub window: Option<usize>,
    #[arg(long, global = true)]
    pub step: Option<usize>,

    /// garch | dcc | bekk | var.
    #[arg(long, global = true, value_parser = parse_enum::<SimModel>)]
    pub model: Option<SimModel>,
    /// Simulated observations.
    #[arg(long, global = true)]
    pub n_obs: Option<usize>,
    #[arg(long, global = true)]
    pub n_series: Option<usize>,
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    /// Constant correlation target for simulated DCC panels.
    #[arg(long, global = true)]
    pub rho: Option<f64>,
}

impl Options {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Fields set in `self` replace those in `base`.
    pub fn over(self, base: Options) -> Options {
        let mut merged = serde_json::to_value(base).expect("options serialize");
        let top = serde_json::to_value(self).expect("options serialize");
        if let (Some(m), serde_json::Value::Object(t)) = (merged.as_object_mut(), top) {
            for (k, v) in t {
                if !v.is_null() {
                    m.insert(k, v);
                }
            }
        }
        serde_json::from_value(merged).expect("merged options deserialize")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationSpec {
    pub model: SimModel,
    pub n_obs: usize,
    pub n_series: usize,
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    pub eta: f64,
    pub rho: f64,
}

/// Fully resolved settings; written to the manifest of every run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub analysis: Analysis,
    pub input: Option<PathBuf>,
    pub schema: PanelSchema,
    pub min_rows: usize,
    pub output: PathBuf,
    pub full_precision: bool,
    pub seed: u64,
    pub adf: AdfConfig,
    pub garch: GarchConfig,
    pub dcc_mode: DccMode,
    pub bekk: BekkConfig,
    pub significance: f64,
    pub range: RangeVolatilityOptions,
    /// Lag order for the full-sample table (`None`: AIC selection).
    pub lag: Option<usize>,
    pub select_lag_max: usize,
    pub rolling: RollingConfig,
    pub simulation: SimulationSpec,
}

impl RunConfig {
    pub fn resolve(analysis: Analysis, o: Options) -> anyhow::Result<Self> {
        let seed = o.seed.unwrap_or(20_210_121);
        let adf = AdfConfig {
            lags: match o.adf_lags {
                Some(p) => AdfLags::Fixed(p),
                None => AdfLags::Bic { max: o.adf_max_lag },
            },
        };
        let garch = GarchConfig {
            mean_lags: o.mean_lags.unwrap_or(0),
            allow_igarch: o.allow_igarch.unwrap_or(false),
            robust_se: o.robust_se.unwrap_or(false),
            restarts: o.garch_restarts.unwrap_or(GarchConfig::default().restarts),
            seed,
            ..GarchConfig::default()
        };
        let bekk = BekkConfig {
            diagonal: o.bekk_diagonal.unwrap_or(false),
            variance_targeting: o.variance_targeting.unwrap_or(false),
            restarts: o.bekk_restarts.unwrap_or(BekkConfig::default().restarts),
            force: o.force.unwrap_or(false),
            seed,
            ..BekkConfig::default()
        };
        let range = RangeVolatilityOptions {
            constant: o.range_constant.unwrap_or(RangeVolatilityOptions::default().constant),
            annualization_days: o.annualization_days.unwrap_or(365),
        };
        let select_lag_max = o.select_lag_max.unwrap_or(8);
        // an explicit AIC bound without an explicit lag asks for selection
        let lag = match (o.lag, o.select_lag_max) {
            (Some(p), _) => Some(p),
            (None, Some(_)) => None,
            (None, None) => Some(4),
        };
        let rolling = RollingConfig {
            window: o.window.unwrap_or(104),
            horizon: o.horizon.unwrap_or(10),
            lag: lag.unwrap_or(4),
            step: o.step.unwrap_or(1),
            select_lag_max: o.select_lag_per_window.unwrap_or(false).then_some(select_lag_max),
            sigma_denominator: o.sigma_denominator.unwrap_or_default(),
            shock_scaling: o.shock_scaling.unwrap_or_default(),
            pairwise_sign: o.pairwise_sign.unwrap_or_default(),
            parallel: true,
        };
        let simulation = SimulationSpec {
            model: o.model.unwrap_or_default(),
            n_obs: o.n_obs.unwrap_or(952),
            n_series: o.n_series.unwrap_or(5),
            omega: o.omega.unwrap_or(1e-6),
            alpha: o.alpha.unwrap_or(0.05),
            beta: o.beta.unwrap_or(0.90),
            theta: o.theta.unwrap_or(0.02),
            eta: o.eta.unwrap_or(0.97),
            rho: o.rho.unwrap_or(0.4),
        };
        let config = RunConfig {
            analysis,
            input: o.input,
            schema: o.schema.unwrap_or_default(),
            min_rows: o.min_rows.unwrap_or(30),
            output: o.output.unwrap_or_else(|| PathBuf::from("volspill-out")),
            full_precision: o.full_precision.unwrap_or(false),
            seed,
            adf,
            garch,
            dcc_mode: o.dcc_mode.unwrap_or_default(),
            bekk,
            significance: o.significance.unwrap_or(0.05),
            range,
            lag,
            select_lag_max,
            rolling,
            simulation,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> anyhow::Result<()> {
        if self.analysis != Analysis::Simulate && self.input.is_none() {
            bail!("--input is required for the {:?} analysis", self.analysis);
        }
        if !(self.significance > 0.0 && self.significance < 1.0) {
            bail!("significance must lie in (0, 1), got {}", self.significance);
        }
        let needs_range = matches!(self.analysis, Analysis::Spillover | Analysis::Rolling | Analysis::All);
        if needs_range && self.schema == PanelSchema::Close {
            bail!("spillover and rolling analyses need high/low prices: use --schema wide or companion");
        }
        if self.rolling.step == 0 || self.rolling.horizon == 0 || self.rolling.lag == 0 {
            bail!("step, horizon and lag must be at least 1");
        }
        let s = &self.simulation;
        if s.n_series == 0 || s.n_obs < 2 {
            bail!("simulation needs at least one series and two observations");
        }
        if !(-1.0 < s.rho && s.rho < 1.0) {
            bail!("rho must lie in (-1, 1), got {}", s.rho);
        }
        Ok(())
    }
}

/// Parses arguments, layers the config file under them and resolves.
pub fn from_args<I, T>(args: I) -> anyhow::Result<(Analysis, RunConfig)>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    let options = match &cli.config {
        Some(path) => cli.options.over(Options::from_file(path)?),
        None => cli.options,
    };
    Ok((cli.command, RunConfig::resolve(cli.command, options)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_line_overrides_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "horizon = 5\nwindow = 80\nschema = \"wide\"\ninput = \"p.csv\"\n").unwrap();
        let (_, c) = from_args(["volspill", "rolling", "--config", path.to_str().unwrap(), "--horizon", "8"]).unwrap();
        assert_eq!(c.rolling.horizon, 8);
        assert_eq!(c.rolling.window, 80);
        assert_eq!(c.schema, PanelSchema::Wide);
    }

    #[test]
    fn unknown_file_key_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "horizn = 5\n").unwrap();
        assert!(from_args(["volspill", "stats", "--config", path.to_str().unwrap()]).is_err());
    }

    #[test]
    fn boolean_and_enum_flags() {
        let (_, c) = from_args([
            "volspill",
            "bekk",
            "--input",
            "p.csv",
            "--bekk-diagonal",
            "--shock-scaling",
            "receiver",
            "--force",
            "false",
        ])
        .unwrap();
        assert!(c.bekk.diagonal);
        assert!(!c.bekk.force);
        assert_eq!(c.rolling.shock_scaling, ShockScaling::Receiver);
        assert!(from_args(["volspill", "stats", "--input", "p.csv", "--schema", "tall"]).is_err());
    }

    #[test]
    fn range_analyses_need_range_data() {
        assert!(from_args(["volspill", "rolling", "--input", "p.csv"]).is_err());
        assert!(from_args(["volspill", "stats"]).is_err());
        assert!(from_args(["volspill", "simulate"]).is_ok());
    }

    #[test]
    fn lag_selection_defaults() {
        let (_, c) = from_args(["volspill", "stats", "--input", "p.csv"]).unwrap();
        assert_eq!(c.lag, Some(4));
        let (_, c) = from_args(["volspill", "stats", "--input", "p.csv", "--select-lag-max", "6"]).unwrap();
        assert_eq!((c.lag, c.select_lag_max), (None, 6));
    }
}
