//! Minimal SVG line charts. Missing values break a line into separate
//! polylines instead of being interpolated.

use std::fmt::Write;

use chrono::NaiveDate;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

pub struct Series<'a> {
    pub label: String,
    pub values: &'a [Option<f64>],
}

struct Frame {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn value_range<'a>(series: impl Iterator<Item = &'a Series<'a>>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for v in s.values.iter().flatten() {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 1.0, hi + 1.0);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Contiguous runs of present values as `(index, value)` lists.
fn segments(values: &[Option<f64>]) -> Vec<Vec<(usize, f64)>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    for (k, v) in values.iter().enumerate() {
        match v {
            Some(v) => current.push((k, *v)),
            None if !current.is_empty() => out.push(std::mem::take(&mut current)),
            None => {}
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

fn draw(out: &mut String, frame: &Frame, title: &str, dates: &[NaiveDate], series: &[Series], legend: bool) {
    let (lo, hi) = value_range(series.iter());
    let n = dates.len().max(2);
    let px = |k: usize| frame.x + frame.w * k as f64 / (n - 1) as f64;
    let py = |v: f64| frame.y + frame.h * (hi - v) / (hi - lo);
    let _ = writeln!(
        out,
        r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444" stroke-width="0.8"/>"##,
        frame.x, frame.y, frame.w, frame.h
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"#,
        frame.x + frame.w / 2.0,
        frame.y - 8.0,
        escape(title)
    );
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let y = py(v);
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd" stroke-width="0.5"/>"##,
            frame.x,
            frame.x + frame.w
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="9" text-anchor="end">{v:.1}</text>"#,
            frame.x - 4.0,
            y + 3.0
        );
    }
    if !dates.is_empty() {
        for k in [0, dates.len() / 2, dates.len() - 1] {
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" font-size="9" text-anchor="middle">{}</text>"#,
                px(k),
                frame.y + frame.h + 14.0,
                dates[k].format("%Y-%m-%d")
            );
        }
    }
    if lo < 0.0 && hi > 0.0 {
        let y = py(0.0);
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#888" stroke-width="0.8"/>"##,
            frame.x,
            frame.x + frame.w
        );
    }
    for (s_idx, s) in series.iter().enumerate() {
        let color = PALETTE[s_idx % PALETTE.len()];
        for seg in segments(s.values) {
            let points: Vec<String> = seg.iter().map(|&(k, v)| format!("{:.2},{:.2}", px(k), py(v))).collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#,
                points.join(" ")
            );
        }
        if legend {
            let y = frame.y + 12.0 + 14.0 * s_idx as f64;
            let x = frame.x + frame.w + 10.0;
            let _ = writeln!(
                out,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/>"#,
                y - 3.0,
                x + 14.0,
                y - 3.0
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{y:.2}" font-size="10">{}</text>"#,
                x + 18.0,
                escape(&s.label)
            );
        }
    }
}

fn document(width: f64, height: f64, body: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n"
    )
}

/// One chart with every series overlaid.
pub fn line_chart(title: &str, dates: &[NaiveDate], series: &[Series]) -> String {
    let mut body = String::new();
    let legend = series.len() > 1;
    let frame = Frame {
        x: 60.0,
        y: 30.0,
        w: 720.0,
        h: 320.0,
    };
    draw(&mut body, &frame, title, dates, series, legend);
    document(if legend { 960.0 } else { 820.0 }, 390.0, &body)
}

/// One small chart per series on a grid with `columns` columns.
pub fn small_multiples(title: &str, dates: &[NaiveDate], panels: &[Series], columns: usize) -> String {
    let columns = columns.max(1);
    let rows = panels.len().div_ceil(columns).max(1);
    let (cell_w, cell_h) = (300.0, 190.0);
    let mut body = String::new();
    let width = cell_w * columns as f64 + 20.0;
    let _ = writeln!(
        body,
        r#"<text x="{:.2}" y="20" font-size="14" text-anchor="middle">{}</text>"#,
        width / 2.0,
        escape(title)
    );
    for (k, p) in panels.iter().enumerate() {
        let (r, c) = (k / columns, k % columns);
        let frame = Frame {
            x: 50.0 + cell_w * c as f64,
            y: 50.0 + cell_h * r as f64,
            w: cell_w - 70.0,
            h: cell_h - 60.0,
        };
        let single = [Series {
            label: p.label.clone(),
            values: p.values,
        }];
        draw(&mut body, &frame, &p.label, dates, &single, false);
    }
    document(width, 40.0 + cell_h * rows as f64, &body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaps_split_polylines() {
        let v = [Some(1.0), Some(2.0), None, Some(3.0), None, None, Some(1.0)];
        assert_eq!(segments(&v).len(), 3);
        let dates: Vec<NaiveDate> = (0..7).map(|d| NaiveDate::from_ymd_opt(2020, 1, 1 + d).unwrap()).collect();
        let svg = line_chart("t", &dates, &[Series { label: "x".into(), values: &v }]);
        assert_eq!(svg.matches("<polyline").count(), 3);
        let full = [Some(1.0); 7];
        let svg = line_chart("t", &dates, &[Series { label: "x".into(), values: &full }]);
        assert_eq!(svg.matches("<polyline").count(), 1);
    }

    #[test]
    fn small_multiples_have_one_frame_per_panel() {
        let v = [Some(1.0), Some(-1.0)];
        let dates: Vec<NaiveDate> = (0..2).map(|d| NaiveDate::from_ymd_opt(2020, 1, 1 + d).unwrap()).collect();
        let panels: Vec<Series> = (0..5).map(|i| Series { label: format!("p{i}"), values: &v }).collect();
        let svg = small_multiples("pairs", &dates, &panels, 3);
        assert_eq!(svg.matches("<polyline").count(), 5);
        assert!(svg.contains("height=\"420\""));
    }
}
