//! Self-contained SVG line charts of seed-averaged sweep results.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::scenario::ResultRow;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlotError {
    #[error("column `{0}` is not numeric or does not exist")]
    NotNumeric(String),
    #[error("column `{0}` does not exist")]
    UnknownColumn(String),
    #[error("no rows with a defined `{y}` to plot")]
    Empty { y: String },
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

/// One curve: `(x, mean y)` points sorted by x.
pub type Series = Vec<(f64, f64)>;

/// Groups rows by `series`, then averages `y` over rows sharing an `x`.
pub fn aggregate(
    rows: &[ResultRow],
    x: &str,
    y: &str,
    series: &str,
) -> Result<BTreeMap<String, Series>, PlotError> {
    let probe = rows.first();
    for col in [x, y] {
        if probe.is_some_and(|r| r.text(col).is_none()) || !is_numeric_column(col) {
            return Err(PlotError::NotNumeric(col.into()));
        }
    }
    if probe.is_some_and(|r| r.text(series).is_none())
        || !super::csv_io::CSV_COLUMNS.contains(&series)
    {
        return Err(PlotError::UnknownColumn(series.into()));
    }
    let mut acc: BTreeMap<String, Vec<(f64, f64, usize)>> = BTreeMap::new();
    for r in rows {
        let (Some(xv), Some(yv)) = (r.numeric(x), r.numeric(y)) else {
            continue;
        };
        let key = r.text(series).expect("checked above");
        let pts = acc.entry(key).or_default();
        match pts.iter_mut().find(|p| p.0 == xv) {
            Some(p) => {
                p.1 += yv;
                p.2 += 1;
            }
            None => pts.push((xv, yv, 1)),
        }
    }
    if acc.is_empty() {
        return Err(PlotError::Empty { y: y.into() });
    }
    Ok(acc
        .into_iter()
        .map(|(k, mut pts)| {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            (
                k,
                pts.into_iter().map(|(x, s, n)| (x, s / n as f64)).collect(),
            )
        })
        .collect())
}

fn is_numeric_column(col: &str) -> bool {
    super::csv_io::CSV_COLUMNS.contains(&col) && !matches!(col, "scenario" | "protocol")
}

/// Tick positions covering `[lo, hi]` at a 1/2/5 step.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(f64::EPSILON);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if (hi - lo).abs() < 1e-12 {
        let pad = if lo.abs() > 0.0 { lo.abs() * 0.1 } else { 1.0 };
        (lo - pad, hi + pad)
    } else {
        (lo, hi)
    }
}

fn label(v: f64) -> String {
    if v.abs() >= 1e4 {
        format!("{:.0}k", v / 1e3)
    } else if v.fract().abs() < 1e-9 {
        format!("{v:.0}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Line chart of `y` against `x`, one polyline per distinct `series` value.
pub fn emit_plot(rows: &[ResultRow], x: &str, y: &str, series: &str) -> Result<String, PlotError> {
    if rows.is_empty() {
        return Err(PlotError::Empty { y: y.into() });
    }
    let data = aggregate(rows, x, y, series)?;
    let all = data.values().flatten();
    let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) = (f64::MAX, f64::MIN, 0.0f64, f64::MIN);
    for &(px, py) in all {
        x_lo = x_lo.min(px);
        x_hi = x_hi.max(px);
        y_lo = y_lo.min(py);
        y_hi = y_hi.max(py);
    }
    let (x_lo, x_hi) = padded(x_lo, x_hi);
    let (y_lo, y_hi) = padded(y_lo, y_hi);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |v: f64| LEFT + (v - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |v: f64| TOP + plot_h - (v - y_lo) / (y_hi - y_lo) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for t in ticks(x_lo, x_hi) {
        let px = sx(t);
        let _ = writeln!(
            s,
            r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 20.0,
            label(t)
        );
    }
    for t in ticks(y_lo, y_hi) {
        let py = sy(t);
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/><line x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT - 5.0,
            LEFT + plot_w,
            LEFT - 8.0,
            py + 4.0,
            label(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0,
        escape(x)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(y)
    );
    for (i, (name, pts)) in data.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = pts
            .iter()
            .map(|(px, py)| format!("{:.2},{:.2}", sx(*px), sy(*py)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline class="series" data-series="{}" fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            escape(name),
            coords.join(" ")
        );
        for (px, py) in pts {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                sx(*px),
                sy(*py)
            );
        }
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Protocol;

    fn row(p: Protocol, lp: f64, seed: u64, tp: f64) -> ResultRow {
        ResultRow {
            scenario: "fig5".into(),
            protocol: p,
            seed,
            num_channels: 10,
            num_pairs: 10,
            lambda_p: lp,
            lambda_s: 500.0,
            throughput_bps: tp,
            avg_service_time_s: None,
            pu_su_collision_slots: 0,
            su_su_collision_slots: 0,
            handoffs: 0,
        }
    }

    fn fig5_rows() -> Vec<ResultRow> {
        let mut rows = Vec::new();
        for p in Protocol::ALL {
            for lp in 1..=3 {
                for seed in 1..=2 {
                    rows.push(row(
                        p,
                        lp as f64,
                        seed,
                        1e5 * (10 - lp) as f64 + seed as f64,
                    ));
                }
            }
        }
        rows
    }

    #[test]
    fn one_polyline_per_protocol() {
        let svg = emit_plot(&fig5_rows(), "lambda_p", "throughput_bps", "protocol").unwrap();
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("throughput_bps") && svg.contains("lambda_p"));
    }

    #[test]
    fn points_are_seed_means() {
        let agg = aggregate(&fig5_rows(), "lambda_p", "throughput_bps", "protocol").unwrap();
        assert_eq!(
            agg["random"],
            vec![(1.0, 900_001.5), (2.0, 800_001.5), (3.0, 700_001.5)]
        );
    }

    #[test]
    fn single_point_does_not_crash() {
        let svg = emit_plot(
            &[row(Protocol::GcsSrv, 1.0, 1, 5.0)],
            "lambda_p",
            "throughput_bps",
            "protocol",
        )
        .unwrap();
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn deterministic_bytes() {
        let a = emit_plot(&fig5_rows(), "lambda_p", "throughput_bps", "protocol").unwrap();
        let b = emit_plot(&fig5_rows(), "lambda_p", "throughput_bps", "protocol").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn errors() {
        assert!(emit_plot(&[], "lambda_p", "throughput_bps", "protocol").is_err());
        assert_eq!(
            emit_plot(&fig5_rows(), "lambda_p", "protocol", "protocol"),
            Err(PlotError::NotNumeric("protocol".into()))
        );
        assert_eq!(
            emit_plot(&fig5_rows(), "lambda_p", "avg_service_time_s", "protocol"),
            Err(PlotError::Empty {
                y: "avg_service_time_s".into()
            })
        );
        assert!(emit_plot(&fig5_rows(), "lambda_p", "throughput_bps", "colour").is_err());
    }
}
