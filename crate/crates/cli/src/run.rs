//! Runs the selected analyses and writes the report bundle.

use std::path::PathBuf;

use anyhow::{Context, Result};
use chrono::NaiveDate;
use nalgebra::DMatrix;
use serde::Serialize;
use sha2::{Digest, Sha256};

use volspill_core::bekk::{classify_direction, fit_bekk, BekkParams, Direction};
use volspill_core::dcc::{fit_dcc, fit_dcc_pairwise, mean_dynamic_correlation, DccConfig, DccFit, DccMode};
use volspill_core::garch::{fit_garch11, GarchParams};
use volspill_core::optim::{two_sided_p, InferenceResult};
use volspill_core::panel::{
    load_price_panel, log_returns, range_volatility, write_price_panel, LoadOptions, PanelSchema, PricePanel,
    ReturnPanel, VolatilityPanel,
};
use volspill_core::rolling::{rolling_spillover, summarize_range, RollingSeries};
use volspill_core::simulate::{
    prices_from_returns, prices_from_volatility, return_panel, simulate_bekk, simulate_dcc, simulate_garch,
    synthetic_volatility, with_synthetic_range,
};
use volspill_core::spillover::{build_spillover_table_with, fit_var_with, gfevd_with, select_lag};
use volspill_core::stats::descriptive_stats;

use crate::config::{Analysis, RunConfig, SimModel};
use crate::format::{coefficient_cell, full, sig6, stars};
use crate::svg::{line_chart, small_multiples, Series};

type Fmt<'a> = &'a dyn Fn(f64) -> String;

#[derive(Debug, Serialize)]
struct Artifact {
    file: String,
    bytes: usize,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    inputs: Vec<Artifact>,
    artifacts: Vec<Artifact>,
    warnings: &'a [String],
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects artifacts in the output directory.
struct Report {
    dir: PathBuf,
    full_precision: bool,
    artifacts: Vec<Artifact>,
    warnings: Vec<String>,
}

impl Report {
    fn write(&mut self, name: &str, bytes: Vec<u8>) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, &bytes).with_context(|| format!("writing {}", path.display()))?;
        self.artifacts.push(Artifact {
            file: name.to_string(),
            bytes: bytes.len(),
            sha256: digest(&bytes),
        });
        Ok(())
    }

    /// Writes `name` at six significant digits and, if requested, a
    /// full-precision sidecar.
    fn csv(&mut self, name: &str, rows: impl Fn(Fmt) -> Vec<Vec<String>>) -> Result<()> {
        self.write(name, encode(&rows(&sig6))?)?;
        if self.full_precision {
            let sidecar = name.replace(".csv", ".full.csv");
            self.write(&sidecar, encode(&rows(&full))?)?;
        }
        Ok(())
    }

    fn warn(&mut self, context: &str, messages: &[String]) {
        self.warnings.extend(messages.iter().map(|m| format!("{context}: {m}")));
    }
}

fn encode(rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    for row in rows {
        w.write_record(row)?;
    }
    Ok(w.into_inner().map_err(|e| anyhow::anyhow!("csv buffer: {e}"))?)
}

fn s(v: impl ToString) -> String {
    v.to_string()
}

fn date(d: &NaiveDate) -> String {
    d.format("%Y-%m-%d").to_string()
}

fn coefficient_header() -> Vec<String> {
    ["estimate", "std_error", "t_stat", "p_value", "stars", "cell"].map(s).to_vec()
}

/// Estimate, SE, t, p, stars and the formatted cell; blanks without inference.
fn coefficient_columns(estimate: f64, inference: Option<(f64, f64)>, fmt: Fmt) -> Vec<String> {
    match inference {
        Some((se, t)) => {
            let p = two_sided_p(t);
            vec![fmt(estimate), fmt(se), fmt(t), fmt(p), s(stars(p)), coefficient_cell(estimate, t, p)]
        }
        None => vec![fmt(estimate), String::new(), String::new(), String::new(), String::new(), String::new()],
    }
}

fn inference_at(inf: Option<&InferenceResult>, k: usize) -> Option<(f64, f64)> {
    inf.map(|i| (i.standard_errors[k], i.t_statistics[k]))
}

fn load(config: &RunConfig) -> Result<(PricePanel, Vec<Artifact>)> {
    let input = config.input.as_ref().context("no input file")?;
    let options = LoadOptions {
        schema: config.schema,
        min_rows: config.min_rows,
    };
    let panel = load_price_panel(input, &options).with_context(|| format!("loading {}", input.display()))?;
    let mut files = vec![input.clone()];
    if config.schema == PanelSchema::Companion {
        let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        for kind in ["high", "low"] {
            files.push(input.with_file_name(format!("{stem}.{kind}.csv")));
        }
    }
    let inputs = files
        .iter()
        .map(|f| {
            let bytes = std::fs::read(f).with_context(|| format!("reading {}", f.display()))?;
            Ok(Artifact {
                file: f.display().to_string(),
                bytes: bytes.len(),
                sha256: digest(&bytes),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((panel, inputs))
}

fn stats(report: &mut Report, returns: &ReturnPanel, config: &RunConfig) -> Result<()> {
    let stats = descriptive_stats(returns, &config.adf).context("descriptive statistics")?;
    report.csv("stats.csv", |fmt| {
        let mut rows = vec![std::iter::once(s("statistic")).chain(returns.names.iter().cloned()).collect()];
        let mut row = |label: &str, f: &dyn Fn(&volspill_core::stats::SeriesStats) -> String| {
            rows.push(std::iter::once(s(label)).chain(stats.series.iter().map(f)).collect());
        };
        row("mean", &|x| fmt(x.mean));
        row("max", &|x| fmt(x.max));
        row("min", &|x| fmt(x.min));
        row("std_dev", &|x| fmt(x.std_dev));
        row("skewness", &|x| fmt(x.skewness));
        row("kurtosis", &|x| fmt(x.kurtosis));
        row("n", &|x| s(x.n));
        row("jarque_bera", &|x| fmt(x.jarque_bera));
        row("jarque_bera_p", &|x| fmt(x.jarque_bera_p));
        row("adf_statistic", &|x| fmt(x.adf.statistic));
        row("adf_p", &|x| fmt(x.adf.p_value));
        row("adf_lags", &|x| s(x.adf.lags));
        rows
    })
}

fn garch(report: &mut Report, returns: &ReturnPanel, config: &RunConfig) -> Result<()> {
    let fits = (0..returns.n_series())
        .map(|i| {
            fit_garch11(&returns.series(i), &config.garch)
                .with_context(|| format!("GARCH fit for {}", returns.names[i]))
        })
        .collect::<Result<Vec<_>>>()?;
    for (name, fit) in returns.names.iter().zip(&fits) {
        report.warn(&format!("garch {name}"), &fit.warnings);
    }
    let labels = GarchParams::labels(config.garch.mean_lags);
    report.csv("garch_coefficients.csv", |fmt| {
        let mut rows = vec![[s("series"), s("parameter")].into_iter().chain(coefficient_header()).collect()];
        for (name, fit) in returns.names.iter().zip(&fits) {
            for (k, (label, est)) in labels.iter().zip(fit.params.to_vec()).enumerate() {
                let cols = coefficient_columns(est, inference_at(fit.inference.as_ref(), k), fmt);
                rows.push([name.clone(), label.clone()].into_iter().chain(cols).collect());
            }
        }
        rows
    })?;
    report.csv("garch_fit.csv", |fmt| {
        let mut rows = vec![["series", "loglik", "persistence", "converged", "iterations", "gradient_norm"]
            .map(s)
            .to_vec()];
        for (name, fit) in returns.names.iter().zip(&fits) {
            rows.push(vec![
                name.clone(),
                fmt(fit.loglik),
                fmt(fit.params.persistence()),
                s(fit.optim.converged),
                s(fit.optim.iterations),
                fmt(fit.optim.gradient_norm),
            ]);
        }
        rows
    })
}

fn dcc(report: &mut Report, returns: &ReturnPanel, config: &RunConfig) -> Result<()> {
    let dcc_config = DccConfig {
        garch: config.garch.clone(),
        mode: config.dcc_mode,
        ..DccConfig::default()
    };
    let fits: Vec<DccFit> = match config.dcc_mode {
        DccMode::Joint => vec![fit_dcc(returns, &dcc_config).context("DCC fit")?],
        DccMode::Pairwise => fit_dcc_pairwise(returns, &dcc_config).context("pairwise DCC fit")?,
    };
    let model_name = |f: &DccFit| f.names.join(":");
    for f in &fits {
        report.warn(&format!("dcc {}", model_name(f)), &f.warnings);
    }
    report.csv("dcc_coefficients.csv", |fmt| {
        let mut rows = vec![[s("model"), s("parameter")].into_iter().chain(coefficient_header()).collect()];
        for f in &fits {
            for (k, (label, est)) in [("theta", f.params.theta), ("eta", f.params.eta)].into_iter().enumerate() {
                let cols = coefficient_columns(est, inference_at(f.inference.as_ref(), k), fmt);
                rows.push([model_name(f), s(label)].into_iter().chain(cols).collect());
            }
            rows.push(vec![model_name(f), s("loglik"), fmt(f.loglik)]);
        }
        rows
    })?;
    // (fit, i, j, label) for every pair
    let mut pairs = Vec::new();
    for (k, f) in fits.iter().enumerate() {
        let n = f.names.len();
        for i in 0..n {
            for j in (i + 1)..n {
                pairs.push((k, i, j, format!("{}:{}", f.names[i], f.names[j])));
            }
        }
    }
    let means = pairs
        .iter()
        .map(|(k, i, j, _)| mean_dynamic_correlation(&fits[*k], *i, *j).context("mean dynamic correlation"))
        .collect::<Result<Vec<_>>>()?;
    report.csv("dcc_mean_correlation.csv", |fmt| {
        let mut rows = vec![["pair", "mean", "z_stat", "p_value", "stars"].map(s).to_vec()];
        for ((_, _, _, label), (mean, z)) in pairs.iter().zip(&means) {
            let p = two_sided_p(*z);
            rows.push(vec![label.clone(), fmt(*mean), fmt(*z), fmt(p), s(stars(p))]);
        }
        rows
    })?;
    report.csv("dcc_correlation_path.csv", |fmt| {
        let mut rows = vec![std::iter::once(s("date")).chain(pairs.iter().map(|p| p.3.clone())).collect::<Vec<_>>()];
        let len = fits[0].corr_path.len();
        let offset = returns.n_obs() - len;
        for t in 0..len {
            let mut row = vec![date(&returns.dates[offset + t])];
            row.extend(pairs.iter().map(|(k, i, j, _)| fmt(fits[*k].corr_path[t][(*i, *j)])));
            rows.push(row);
        }
        rows
    })
}

fn direction_label(d: Direction, a: &str, b: &str) -> String {
    match d {
        Direction::None => s("none"),
        Direction::IToJ => format!("{a}->{b}"),
        Direction::JToI => format!("{b}->{a}"),
        Direction::Bidirectional => s("bidirectional"),
    }
}

fn bekk(report: &mut Report, returns: &ReturnPanel, config: &RunConfig) -> Result<()> {
    let fit = fit_bekk(returns, &config.bekk).context("BEKK fit")?;
    report.warn("bekk", &fit.warnings);
    report.csv("bekk_coefficients.csv", |fmt| {
        let mut rows = vec![std::iter::once(s("parameter")).chain(coefficient_header()).collect()];
        for label in bekk_labels(fit.params.dim()) {
            let est = fit.estimate(&label).unwrap_or(f64::NAN);
            let inf = fit.coefficient(&label).map(|(_, se, t)| (se, t));
            rows.push(std::iter::once(label).chain(coefficient_columns(est, inf, fmt)).collect());
        }
        rows.push(vec![s("loglik"), fmt(fit.loglik)]);
        rows.push(vec![s("persistence_radius"), fmt(fit.params.persistence_radius())]);
        rows.push(vec![s("converged"), s(fit.optim.converged)]);
        rows
    })?;
    let n = fit.params.dim();
    let mut verdicts = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            verdicts.push(classify_direction(&fit, i, j, config.significance)?);
        }
    }
    report.csv("bekk_directions.csv", |_| {
        let mut rows = vec![["market_i", "market_j", "direction", "i_to_j", "j_to_i"].map(s).to_vec()];
        for v in &verdicts {
            let (a, b) = (&returns.names[v.i], &returns.names[v.j]);
            rows.push(vec![
                a.clone(),
                b.clone(),
                direction_label(v.classification, a, b),
                s(v.i_to_j.describe()),
                s(v.j_to_i.describe()),
            ]);
        }
        rows
    })
}

/// Every `C`, `A`, `B` entry in layout order; entries a restricted fit
/// holds at zero appear without inference.
fn bekk_labels(n: usize) -> Vec<String> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..=i {
            out.push(format!("C({},{})", i + 1, j + 1));
        }
    }
    for m in ["A", "B"] {
        for i in 0..n {
            for j in 0..n {
                out.push(format!("{m}({},{})", i + 1, j + 1));
            }
        }
    }
    out
}

fn volatility(prices: &PricePanel, config: &RunConfig) -> Result<VolatilityPanel> {
    range_volatility(prices, &config.range).context("range volatility")
}

fn resolve_lag(vol: &VolatilityPanel, config: &RunConfig, report: &mut Report) -> Result<usize> {
    match config.lag {
        Some(p) => Ok(p),
        None => {
            let p = select_lag(vol, config.select_lag_max).context("VAR lag selection")?;
            report.warnings.push(format!("spillover: AIC selected VAR lag {p}"));
            Ok(p)
        }
    }
}

fn spillover(report: &mut Report, vol: &VolatilityPanel, config: &RunConfig) -> Result<()> {
    let lag = resolve_lag(vol, config, report)?;
    let fit = fit_var_with(vol, lag, config.rolling.sigma_denominator).context("VAR fit")?;
    report.warn("spillover", &fit.warnings);
    let fevd = gfevd_with(&fit, config.rolling.horizon, config.rolling.shock_scaling).context("GFEVD")?;
    let table = build_spillover_table_with(&fevd, vol.names(), config.rolling.pairwise_sign)?;
    report.csv("spillover_table.csv", |fmt| table.table_rows(fmt))?;
    report.csv("spillover_net_pairwise.csv", |fmt| {
        let mut rows = vec![std::iter::once(String::new()).chain(table.names.iter().cloned()).collect::<Vec<_>>()];
        for i in 0..table.n_series() {
            let mut row = vec![table.names[i].clone()];
            row.extend((0..table.n_series()).map(|j| fmt(table.net_pairwise[(i, j)])));
            rows.push(row);
        }
        rows
    })?;
    report.csv("spillover_summary.csv", |fmt| {
        let mut rows = vec![["market", "from_others", "to_others", "including_own", "net"].map(s).to_vec()];
        for i in 0..table.n_series() {
            rows.push(vec![
                table.names[i].clone(),
                fmt(table.directional_from[i]),
                fmt(table.directional_to[i]),
                fmt(table.including_own[i]),
                fmt(table.net[i]),
            ]);
        }
        rows.push(vec![s("total_index"), fmt(table.total_index)]);
        rows.push(vec![s("var_lag"), s(lag)]);
        rows.push(vec![s("horizon"), s(config.rolling.horizon)]);
        rows
    })
}

fn per_market<'a>(names: &[String], values: &'a [Vec<Option<f64>>]) -> Vec<Series<'a>> {
    names
        .iter()
        .zip(values)
        .map(|(n, v)| Series {
            label: n.clone(),
            values: v,
        })
        .collect()
}

fn rolling(report: &mut Report, vol: &VolatilityPanel, config: &RunConfig) -> Result<()> {
    let mut rc = config.rolling.clone();
    rc.lag = resolve_lag(vol, config, report)?;
    let series: RollingSeries = rolling_spillover(vol, &rc).context("rolling spillover")?;
    for (k, msg) in &series.failures {
        report.warnings.push(format!("rolling window ending {}: {msg}", date(&series.dates[*k])));
    }
    report.csv("rolling_spillover.csv", |fmt| {
        let mut rows = vec![["date", "measure", "market_i", "market_j", "value"].map(s).to_vec()];
        rows.extend(series.long_rows(fmt).into_iter().map(|r| r.to_vec()));
        rows
    })?;
    report.csv("rolling_total.csv", |fmt| {
        let mut rows = vec![vec![s("date"), s("total")]];
        for (d, v) in series.dates.iter().zip(&series.total) {
            rows.push(vec![date(d), v.map(fmt).unwrap_or_default()]);
        }
        rows
    })?;
    let summary = summarize_range(&series)?;
    report.csv("rolling_summary.csv", |fmt| {
        let mut rows = vec![["measure", "min", "min_date", "max", "max_date", "mean", "windows"].map(s).to_vec()];
        for r in &summary {
            rows.push(vec![
                r.measure.clone(),
                fmt(r.min),
                date(&r.min_date),
                fmt(r.max),
                date(&r.max_date),
                fmt(r.mean),
                s(r.windows),
            ]);
        }
        rows
    })?;
    let dates = &series.dates;
    let total = [Series {
        label: s("total"),
        values: &series.total,
    }];
    let svg = line_chart("Total volatility spillover (%)", dates, &total);
    report.write("total_spillover.svg", svg.into_bytes())?;
    let svg = line_chart("Directional spillovers to others (%)", dates, &per_market(&series.names, &series.to));
    report.write("directional_to.svg", svg.into_bytes())?;
    let svg = line_chart("Directional spillovers from others (%)", dates, &per_market(&series.names, &series.from));
    report.write("directional_from.svg", svg.into_bytes())?;
    let svg = line_chart("Net volatility spillovers (%)", dates, &per_market(&series.names, &series.net));
    report.write("net_spillover.svg", svg.into_bytes())?;
    let n = series.names.len();
    let mut panels = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            panels.push(Series {
                label: format!("{} - {}", series.names[i], series.names[j]),
                values: &series.pairwise[i][j],
            });
        }
    }
    let svg = small_multiples("Net pairwise volatility spillovers (%)", dates, &panels, 3);
    report.write("pairwise_spillover.svg", svg.into_bytes())
}

fn simulate(report: &mut Report, config: &RunConfig) -> Result<()> {
    let spec = &config.simulation;
    let (n, t_len, seed) = (spec.n_series, spec.n_obs, config.seed);
    let names: Vec<String> = (1..=n).map(|i| format!("s{i}")).collect();
    let garch = GarchParams::new(spec.omega, spec.alpha, spec.beta);
    let corr = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { spec.rho });
    let prices = match spec.model {
        SimModel::Var => {
            let vol = synthetic_volatility(n, t_len, seed, |_| 1.0)?;
            prices_from_volatility(&vol, names, &config.range, seed.wrapping_add(1))?
        }
        model => {
            let returns = match model {
                SimModel::Garch => {
                    let mut r = DMatrix::zeros(t_len - 1, n);
                    for i in 0..n {
                        let sim = simulate_garch(&garch, t_len - 1, seed.wrapping_add(i as u64))?;
                        r.set_column(i, &nalgebra::DVector::from_vec(sim.returns));
                    }
                    r
                }
                SimModel::Dcc => {
                    simulate_dcc(&vec![garch.clone(); n], spec.theta, spec.eta, &corr, t_len - 1, seed)?.returns
                }
                _ => {
                    let c = (corr * spec.omega)
                        .cholesky()
                        .context("simulation correlation is not positive definite")?
                        .l();
                    let params = BekkParams {
                        c,
                        a: DMatrix::from_diagonal_element(n, n, spec.alpha.sqrt()),
                        b: DMatrix::from_diagonal_element(n, n, spec.beta.sqrt()),
                    };
                    simulate_bekk(&params, t_len - 1, seed)?.residuals
                }
            };
            let prices = prices_from_returns(&return_panel(returns, Some(names)))?;
            with_synthetic_range(&prices, seed.wrapping_add(1))?
        }
    };
    let path = report.dir.join("simulated_prices.csv");
    write_price_panel(&prices, &path)?;
    let bytes = std::fs::read(&path)?;
    report.artifacts.push(Artifact {
        file: s("simulated_prices.csv"),
        bytes: bytes.len(),
        sha256: digest(&bytes),
    });
    Ok(())
}

/// Runs `config.analysis`, writes every artifact plus `manifest.json` and
/// returns the artifact paths.
pub fn run(config: &RunConfig) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(&config.output)
        .with_context(|| format!("creating output directory {}", config.output.display()))?;
    let mut report = Report {
        dir: config.output.clone(),
        full_precision: config.full_precision,
        artifacts: Vec::new(),
        warnings: Vec::new(),
    };
    let mut inputs = Vec::new();
    if config.analysis == Analysis::Simulate {
        simulate(&mut report, config)?;
    } else {
        let (prices, files) = load(config)?;
        inputs = files;
        let returns = log_returns(&prices)?;
        let a = config.analysis;
        let wants = |x: Analysis| a == x || a == Analysis::All;
        if wants(Analysis::Stats) {
            stats(&mut report, &returns, config)?;
        }
        if wants(Analysis::Garch) {
            garch(&mut report, &returns, config)?;
        }
        if wants(Analysis::Dcc) {
            dcc(&mut report, &returns, config)?;
        }
        if wants(Analysis::Bekk) {
            bekk(&mut report, &returns, config)?;
        }
        if wants(Analysis::Spillover) || wants(Analysis::Rolling) {
            let vol = volatility(&prices, config)?;
            if wants(Analysis::Spillover) {
                spillover(&mut report, &vol, config)?;
            }
            if wants(Analysis::Rolling) {
                rolling(&mut report, &vol, config)?;
            }
        }
    }
    let manifest = Manifest {
        tool: "volspill",
        version: env!("CARGO_PKG_VERSION"),
        config,
        inputs,
        artifacts: std::mem::take(&mut report.artifacts),
        warnings: &report.warnings,
    };
    let json = serde_json::to_string_pretty(&manifest)? + "\n";
    let mut paths: Vec<PathBuf> = manifest.artifacts.iter().map(|a| report.dir.join(&a.file)).collect();
    std::fs::write(report.dir.join("manifest.json"), json)
        .with_context(|| format!("writing manifest in {}", report.dir.display()))?;
    paths.push(report.dir.join("manifest.json"));
    Ok(paths)
}
