//! Price panels, log returns and range-based volatility.
//!
//! All panels store observations as `T x N` matrices: one row per date, one
//! column per series.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default range-volatility constant for the daily variance estimator.
pub const RANGE_CONSTANT: f64 = 0.361;

/// Exact Parkinson constant `1 / (4 ln 2)`.
pub fn parkinson_constant() -> f64 {
    1.0 / (4.0 * std::f64::consts::LN_2)
}

/// Column layout of an input CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PanelSchema {
    /// `date,<name1>,<name2>,...` close prices only.
    #[default]
    Close,
    /// Close file plus `<stem>.high.csv` and `<stem>.low.csv` with the same
    /// header.
    Companion,
    /// `date,<name>_close,<name>_high,<name>_low,...`; high/low columns may be
    /// omitted for every series at once.
    Wide,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadOptions {
    pub schema: PanelSchema,
    /// Minimum number of aligned rows.
    pub min_rows: usize,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            schema: PanelSchema::Close,
            min_rows: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    dates: Vec<NaiveDate>,
    names: Vec<String>,
    close: DMatrix<f64>,
    high: Option<DMatrix<f64>>,
    low: Option<DMatrix<f64>>,
}

fn check_dates(dates: &[NaiveDate]) -> Result<()> {
    if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(format!(
            "dates must be strictly increasing ({} followed by {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

impl PricePanel {
    /// Builds a panel, checking shapes, date order and positivity. The
    /// `high ≥ low` ordering is checked where it matters, in
    /// [`range_volatility`].
    pub fn new(
        dates: Vec<NaiveDate>,
        names: Vec<String>,
        close: DMatrix<f64>,
        high: Option<DMatrix<f64>>,
        low: Option<DMatrix<f64>>,
    ) -> Result<Self> {
        let shape = (dates.len(), names.len());
        if close.shape() != shape {
            return Err(Error::InvalidInput(format!(
                "close matrix is {:?}, expected {shape:?}",
                close.shape()
            )));
        }
        if high.is_some() != low.is_some() {
            return Err(Error::InvalidInput("high and low must be supplied together".into()));
        }
        for (label, m) in [("close", Some(&close)), ("high", high.as_ref()), ("low", low.as_ref())] {
            let Some(m) = m else { continue };
            if m.shape() != shape {
                return Err(Error::InvalidInput(format!(
                    "{label} matrix is {:?}, expected {shape:?}",
                    m.shape()
                )));
            }
            for t in 0..shape.0 {
                for i in 0..shape.1 {
                    let v = m[(t, i)];
                    if !(v > 0.0) || !v.is_finite() {
                        return Err(Error::InvalidInput(format!(
                            "{label} price {v} for '{}' on {} is not positive",
                            names[i], dates[t]
                        )));
                    }
                }
            }
        }
        check_dates(&dates)?;
        Ok(Self {
            dates,
            names,
            close,
            high,
            low,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn close(&self) -> &DMatrix<f64> {
        &self.close
    }

    pub fn high(&self) -> Option<&DMatrix<f64>> {
        self.high.as_ref()
    }

    pub fn low(&self) -> Option<&DMatrix<f64>> {
        self.low.as_ref()
    }

    pub fn has_range(&self) -> bool {
        self.high.is_some()
    }

    pub fn n_obs(&self) -> usize {
        self.dates.len()
    }

    pub fn n_series(&self) -> usize {
        self.names.len()
    }

    /// Multiplies every price by `k`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(
            self.dates.clone(),
            self.names.clone(),
            &self.close * k,
            self.high.as_ref().map(|m| m * k),
            self.low.as_ref().map(|m| m * k),
        )
    }
}

/// Inner join of several panels on their dates. Series names must be unique
/// across panels; high/low are kept only if every panel has them.
pub fn inner_join(panels: &[PricePanel]) -> Result<PricePanel> {
    let first = panels
        .first()
        .ok_or_else(|| Error::InvalidInput("no panels to join".into()))?;
    let mut common: Vec<NaiveDate> = first.dates.clone();
    for p in &panels[1..] {
        common.retain(|d| p.dates.binary_search(d).is_ok());
    }
    let mut names = Vec::new();
    for p in panels {
        for n in &p.names {
            if names.contains(n) {
                return Err(Error::InvalidInput(format!("duplicate series name '{n}'")));
            }
            names.push(n.clone());
        }
    }
    let with_range = panels.iter().all(PricePanel::has_range);
    let t = common.len();
    let n = names.len();
    let mut close = DMatrix::zeros(t, n);
    let mut high = DMatrix::zeros(t, n);
    let mut low = DMatrix::zeros(t, n);
    let mut col = 0;
    for p in panels {
        let rows: Vec<usize> = common
            .iter()
            .map(|d| p.dates.binary_search(d).expect("date in intersection"))
            .collect();
        for i in 0..p.n_series() {
            for (r, &src) in rows.iter().enumerate() {
                close[(r, col)] = p.close[(src, i)];
                if with_range {
                    high[(r, col)] = p.high.as_ref().unwrap()[(src, i)];
                    low[(r, col)] = p.low.as_ref().unwrap()[(src, i)];
                }
            }
            col += 1;
        }
    }
    PricePanel::new(
        common,
        names,
        close,
        with_range.then_some(high),
        with_range.then_some(low),
    )
}

/// A CSV read into date-keyed rows; `None` marks an empty cell.
struct RawTable {
    path: PathBuf,
    columns: Vec<String>,
    rows: BTreeMap<NaiveDate, Vec<Option<f64>>>,
}

fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").ok()
}

fn read_table(path: &Path) -> Result<RawTable> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err)?;
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "{}: expected a date column followed by at least one series",
            path.display()
        )));
    }
    let columns: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut rows = BTreeMap::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(csv_err)?;
        let parse_err = |column: &str, message: String| Error::Parse {
            path: path.to_path_buf(),
            row,
            column: column.to_string(),
            message,
        };
        let raw_date = record.get(0).unwrap_or("");
        let date = parse_date(raw_date).ok_or_else(|| {
            parse_err(&header[0], format!("'{raw_date}' is not an ISO-8601 date"))
        })?;
        let mut values = Vec::with_capacity(columns.len());
        for (j, name) in columns.iter().enumerate() {
            let cell = record.get(j + 1).unwrap_or("");
            if cell.is_empty() {
                values.push(None);
                continue;
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(name, format!("'{cell}' is not a decimal number")))?;
            if !(v > 0.0) || !v.is_finite() {
                return Err(parse_err(name, format!("price {cell} must be positive")));
            }
            values.push(Some(v));
        }
        if rows.insert(date, values).is_some() {
            return Err(parse_err(&header[0], format!("duplicate date {date}")));
        }
    }
    Ok(RawTable {
        path: path.to_path_buf(),
        columns,
        rows,
    })
}

fn companion_path(path: &Path, kind: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{kind}.csv"))
}

/// Loads a price panel, aligning all series on their common dates and
/// dropping any row that has a missing cell.
pub fn load_price_panel(path: impl AsRef<Path>, options: &LoadOptions) -> Result<PricePanel> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
        ));
    }
    let panel = match options.schema {
        PanelSchema::Close => {
            let table = read_table(path)?;
            let names = table.columns.clone();
            assemble(names, &table, None)?
        }
        PanelSchema::Companion => {
            let close = read_table(path)?;
            let high = read_table(&companion_path(path, "high"))?;
            let low = read_table(&companion_path(path, "low"))?;
            for t in [&high, &low] {
                if t.columns != close.columns {
                    return Err(Error::InvalidInput(format!(
                        "{}: header does not match {}",
                        t.path.display(),
                        close.path.display()
                    )));
                }
            }
            let names = close.columns.clone();
            assemble(names, &close, Some((&high, &low)))?
        }
        PanelSchema::Wide => load_wide(path)?,
    };
    if panel.n_obs() < options.min_rows {
        return Err(Error::InsufficientData(format!(
            "{} rows survive alignment, at least {} required",
            panel.n_obs(),
            options.min_rows
        )));
    }
    Ok(panel)
}

fn load_wide(path: &Path) -> Result<PricePanel> {
    let table = read_table(path)?;
    let mut names: Vec<String> = Vec::new();
    let mut index: BTreeMap<(String, &'static str), usize> = BTreeMap::new();
    for (j, col) in table.columns.iter().enumerate() {
        let (name, kind) = ["close", "high", "low"]
            .iter()
            .find_map(|k| col.strip_suffix(&format!("_{k}")).map(|n| (n.to_string(), *k)))
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "{}: column '{col}' does not end in _close, _high or _low",
                    path.display()
                ))
            })?;
        if !names.contains(&name) {
            names.push(name.clone());
        }
        index.insert((name, kind), j);
    }
    let has = |kind| names.iter().all(|n| index.contains_key(&(n.clone(), kind)));
    let any = |kind| names.iter().any(|n| index.contains_key(&(n.clone(), kind)));
    if !has("close") {
        return Err(Error::InvalidInput(format!(
            "{}: every series needs a _close column",
            path.display()
        )));
    }
    let with_range = has("high") && has("low");
    if !with_range && (any("high") || any("low")) {
        return Err(Error::InvalidInput(format!(
            "{}: _high and _low columns must be present for every series or for none",
            path.display()
        )));
    }
    let pick = |kind: &'static str| -> Vec<usize> {
        names.iter().map(|n| index[&(n.clone(), kind)]).collect()
    };
    let close_cols = pick("close");
    let range_cols = with_range.then(|| (pick("high"), pick("low")));
    let mut dates = Vec::new();
    let mut close = Vec::new();
    let mut high = Vec::new();
    let mut low = Vec::new();
    'rows: for (date, row) in &table.rows {
        let mut c = Vec::with_capacity(names.len());
        let mut h = Vec::new();
        let mut l = Vec::new();
        for (i, &j) in close_cols.iter().enumerate() {
            let Some(v) = row[j] else { continue 'rows };
            c.push(v);
            if let Some((hc, lc)) = &range_cols {
                let (Some(hv), Some(lv)) = (row[hc[i]], row[lc[i]]) else {
                    continue 'rows;
                };
                h.push(hv);
                l.push(lv);
            }
        }
        dates.push(*date);
        close.push(c);
        high.push(h);
        low.push(l);
    }
    let n = names.len();
    let to_matrix = |rows: &[Vec<f64>]| DMatrix::from_fn(rows.len(), n, |t, i| rows[t][i]);
    PricePanel::new(
        dates,
        names,
        to_matrix(&close),
        with_range.then(|| to_matrix(&high)),
        with_range.then(|| to_matrix(&low)),
    )
}

/// Joins close (and optionally high/low) tables on dates.
fn assemble(
    names: Vec<String>,
    close: &RawTable,
    range: Option<(&RawTable, &RawTable)>,
) -> Result<PricePanel> {
    let mut dates = Vec::new();
    let mut c_rows = Vec::new();
    let mut h_rows = Vec::new();
    let mut l_rows = Vec::new();
    for (date, row) in &close.rows {
        let Some(c) = row.iter().copied().collect::<Option<Vec<f64>>>() else {
            continue;
        };
        if let Some((high, low)) = range {
            let h = high.rows.get(date).and_then(|r| r.iter().copied().collect::<Option<Vec<f64>>>());
            let l = low.rows.get(date).and_then(|r| r.iter().copied().collect::<Option<Vec<f64>>>());
            let (Some(h), Some(l)) = (h, l) else { continue };
            h_rows.push(h);
            l_rows.push(l);
        }
        dates.push(*date);
        c_rows.push(c);
    }
    let n = names.len();
    let to_matrix = |rows: &[Vec<f64>]| DMatrix::from_fn(rows.len(), n, |t, i| rows[t][i]);
    let with_range = range.is_some();
    PricePanel::new(
        dates,
        names,
        to_matrix(&c_rows),
        with_range.then(|| to_matrix(&h_rows)),
        with_range.then(|| to_matrix(&l_rows)),
    )
}

/// Log returns; row `t` is dated at the later of the two prices.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    pub dates: Vec<NaiveDate>,
    pub names: Vec<String>,
    pub returns: DMatrix<f64>,
}

impl ReturnPanel {
    pub fn n_obs(&self) -> usize {
        self.returns.nrows()
    }

    pub fn n_series(&self) -> usize {
        self.returns.ncols()
    }

    pub fn series(&self, i: usize) -> Vec<f64> {
        crate::linalg::column(&self.returns, i)
    }

    /// Keeps only the listed columns.
    pub fn select(&self, columns: &[usize]) -> Self {
        Self {
            dates: self.dates.clone(),
            names: columns.iter().map(|&i| self.names[i].clone()).collect(),
            returns: self.returns.select_columns(columns),
        }
    }
}

pub fn log_returns(panel: &PricePanel) -> Result<ReturnPanel> {
    let t = panel.n_obs();
    if t < 2 {
        return Err(Error::InsufficientData(format!(
            "log returns need at least 2 prices, got {t}"
        )));
    }
    let close = &panel.close;
    let returns = DMatrix::from_fn(t - 1, panel.n_series(), |r, i| {
        close[(r + 1, i)].ln() - close[(r, i)].ln()
    });
    Ok(ReturnPanel {
        dates: panel.dates[1..].to_vec(),
        names: panel.names.clone(),
        returns,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeVolatilityOptions {
    /// Multiplier of the squared log range.
    pub constant: f64,
    /// Days per year used to annualize the daily variance.
    pub annualization_days: u32,
}

impl Default for RangeVolatilityOptions {
    fn default() -> Self {
        Self {
            constant: RANGE_CONSTANT,
            annualization_days: 365,
        }
    }
}

impl RangeVolatilityOptions {
    /// Annualized percent volatility for one day's range.
    pub fn annualized(&self, high: f64, low: f64) -> f64 {
        let range = high.ln() - low.ln();
        let daily_variance = self.constant * range * range;
        100.0 * (self.annualization_days as f64 * daily_variance).sqrt()
    }

    /// Inverse of [`Self::annualized`]: the log range that produces `vol`.
    pub fn log_range_for(&self, vol: f64) -> f64 {
        vol.abs() / (100.0 * (self.annualization_days as f64 * self.constant).sqrt())
    }
}

/// Annualized daily percent volatilities, one row per date.
#[derive(Debug, Clone, PartialEq)]
pub struct VolatilityPanel {
    dates: Vec<NaiveDate>,
    names: Vec<String>,
    vol: DMatrix<f64>,
}

impl VolatilityPanel {
    pub fn new(dates: Vec<NaiveDate>, names: Vec<String>, vol: DMatrix<f64>) -> Result<Self> {
        if vol.shape() != (dates.len(), names.len()) {
            return Err(Error::InvalidInput(format!(
                "volatility matrix is {:?}, expected {:?}",
                vol.shape(),
                (dates.len(), names.len())
            )));
        }
        if let Some(v) = vol.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidInput(format!(
                "volatility {v} is negative or not finite"
            )));
        }
        check_dates(&dates)?;
        Ok(Self { dates, names, vol })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.vol
    }

    pub fn n_obs(&self) -> usize {
        self.dates.len()
    }

    pub fn n_series(&self) -> usize {
        self.names.len()
    }

    /// Rows `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        Self {
            dates: self.dates[start..end].to_vec(),
            names: self.names.clone(),
            vol: self.vol.rows(start, end - start).into_owned(),
        }
    }

    /// Reorders the series.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            dates: self.dates.clone(),
            names: order.iter().map(|&i| self.names[i].clone()).collect(),
            vol: self.vol.select_columns(order),
        }
    }
}

pub fn range_volatility(panel: &PricePanel, options: &RangeVolatilityOptions) -> Result<VolatilityPanel> {
    let (Some(high), Some(low)) = (&panel.high, &panel.low) else {
        return Err(Error::InvalidInput(
            "range volatility needs high and low prices".into(),
        ));
    };
    let (t, n) = high.shape();
    let mut vol = DMatrix::zeros(t, n);
    for r in 0..t {
        for i in 0..n {
            let (h, l) = (high[(r, i)], low[(r, i)]);
            if h < l {
                return Err(Error::InvalidInput(format!(
                    "high {h} below low {l} for '{}' on {}",
                    panel.names[i], panel.dates[r]
                )));
            }
            vol[(r, i)] = options.annualized(h, l);
        }
    }
    VolatilityPanel::new(panel.dates.clone(), panel.names.clone(), vol)
}

/// Writes a panel in the wide schema when it carries high/low, otherwise in
/// the close schema. Values use the shortest round-trip representation.
pub fn write_price_panel(panel: &PricePanel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    out.push_str("date");
    for name in &panel.names {
        if panel.has_range() {
            out.push_str(&format!(",{name}_close,{name}_high,{name}_low"));
        } else {
            out.push_str(&format!(",{name}"));
        }
    }
    out.push('\n');
    for (t, date) in panel.dates.iter().enumerate() {
        out.push_str(&date.to_string());
        for i in 0..panel.n_series() {
            out.push_str(&format!(",{}", panel.close[(t, i)]));
            if let (Some(h), Some(l)) = (&panel.high, &panel.low) {
                out.push_str(&format!(",{},{}", h[(t, i)], l[(t, i)]));
            }
        }
        out.push('\n');
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, body).unwrap();
        p
    }

    fn opts(schema: PanelSchema, min_rows: usize) -> LoadOptions {
        LoadOptions { schema, min_rows }
    }

    #[test]
    fn loads_fully_shared_dates() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "p.csv", "date,a,b\n2020-01-01,1,2\n2020-01-02,1.5,2.5\n2020-01-03,2,3\n");
        let panel = load_price_panel(&p, &opts(PanelSchema::Close, 1)).unwrap();
        assert_eq!((panel.n_obs(), panel.n_series()), (3, 2));
        assert_eq!(panel.close()[(1, 1)], 2.5);
    }

    #[test]
    fn drops_row_missing_in_one_series() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "p.csv", "date,a,b\n2020-01-01,1,2\n2020-01-02,,2.5\n2020-01-03,2,3\n");
        let panel = load_price_panel(&p, &opts(PanelSchema::Close, 1)).unwrap();
        assert_eq!(panel.n_obs(), 2);
        assert_eq!(panel.dates()[1], NaiveDate::from_ymd_opt(2020, 1, 3).unwrap());
    }

    #[test]
    fn bad_cell_names_location() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "p.csv", "date,a,b\n2020-01-01,1,2\n2020-01-02,1.1,abc\n");
        let err = load_price_panel(&p, &opts(PanelSchema::Close, 1)).unwrap_err();
        match err {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "b");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn too_few_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "p.csv", "date,a\n2020-01-01,1\n2020-01-02,2\n");
        let err = load_price_panel(&p, &LoadOptions::default()).unwrap_err();
        assert!(err.to_string().contains("insufficient data"));
    }

    #[test]
    fn companion_and_wide_schemas_agree() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "px.csv", "date,a,b\n2020-01-01,10,20\n2020-01-02,11,21\n2020-01-03,12,22\n");
        write(dir.path(), "px.high.csv", "date,a,b\n2020-01-01,11,21\n2020-01-02,12,22\n2020-01-03,13,23\n");
        write(dir.path(), "px.low.csv", "date,a,b\n2020-01-01,9,19\n2020-01-03,11,21\n");
        let comp = load_price_panel(&p, &opts(PanelSchema::Companion, 1)).unwrap();
        assert_eq!(comp.n_obs(), 2);
        let w = write(
            dir.path(),
            "wide.csv",
            "date,a_close,a_high,a_low,b_close,b_high,b_low\n\
             2020-01-01,10,11,9,20,21,19\n2020-01-02,11,12,,21,22,20\n2020-01-03,12,13,11,22,23,21\n",
        );
        let wide = load_price_panel(&w, &opts(PanelSchema::Wide, 1)).unwrap();
        assert_eq!(wide, comp);

        let out = dir.path().join("round.csv");
        write_price_panel(&wide, &out).unwrap();
        let back = load_price_panel(&out, &opts(PanelSchema::Wide, 1)).unwrap();
        assert_eq!(back, wide);
    }

    #[test]
    fn log_return_values() {
        let d = |k| NaiveDate::from_ymd_opt(2020, 1, k).unwrap();
        let flat = PricePanel::new(
            vec![d(1), d(2), d(3)],
            vec!["a".into()],
            DMatrix::from_element(3, 1, 100.0),
            None,
            None,
        )
        .unwrap();
        let r = log_returns(&flat).unwrap();
        assert_eq!(r.returns.as_slice(), &[0.0, 0.0]);

        let two = PricePanel::new(vec![d(1), d(2)], vec!["a".into()], DMatrix::from_column_slice(2, 1, &[100.0, 200.0]), None, None).unwrap();
        let r = log_returns(&two).unwrap();
        assert!((r.returns[(0, 0)] - 0.693147).abs() < 1e-6);

        let one = PricePanel::new(vec![d(1)], vec!["a".into()], DMatrix::from_element(1, 1, 1.0), None, None).unwrap();
        assert!(log_returns(&one).is_err());
    }

    #[test]
    fn range_volatility_values() {
        let d = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        let panel = PricePanel::new(
            vec![d],
            vec!["a".into(), "b".into()],
            DMatrix::from_row_slice(1, 2, &[105.0, 50.0]),
            Some(DMatrix::from_row_slice(1, 2, &[110.0, 50.0])),
            Some(DMatrix::from_row_slice(1, 2, &[100.0, 50.0])),
        )
        .unwrap();
        let v = range_volatility(&panel, &RangeVolatilityOptions::default()).unwrap();
        // 0.361 * ln(1.1)^2 = 0.00327933; 100 * sqrt(365 * that) = 109.41
        assert!((v.values()[(0, 0)] - 109.41).abs() < 0.01, "{}", v.values()[(0, 0)]);
        assert_eq!(v.values()[(0, 1)], 0.0);
        let exact = RangeVolatilityOptions {
            constant: parkinson_constant(),
            ..Default::default()
        };
        let v = range_volatility(&panel, &exact).unwrap();
        assert!((v.values()[(0, 0)] - 109.36).abs() < 0.01);
    }

    #[test]
    fn range_volatility_errors() {
        let d = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        let no_range = PricePanel::new(vec![d], vec!["a".into()], DMatrix::from_element(1, 1, 1.0), None, None).unwrap();
        assert!(range_volatility(&no_range, &Default::default()).is_err());
        let inverted = PricePanel::new(
            vec![d],
            vec!["a".into()],
            DMatrix::from_element(1, 1, 1.0),
            Some(DMatrix::from_element(1, 1, 0.9)),
            Some(DMatrix::from_element(1, 1, 1.1)),
        )
        .unwrap();
        let err = range_volatility(&inverted, &Default::default()).unwrap_err();
        assert!(err.to_string().contains("'a' on 2020-01-01"));
    }
}
