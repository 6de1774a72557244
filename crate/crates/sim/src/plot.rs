//! Minimal SVG line charts re-rendered from the CSV artifacts, so a plot can
//! always be regenerated byte-for-byte from the data next to it.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{SimError, SimResult};
use crate::output::{read_csv, CDF_CSV, SWEEP_CSV, TIMINGS_CSV};

pub const CDF_SVG: &str = "fig4a_cdf.svg";
pub const RUNTIME_SVG: &str = "fig4b_runtime.svg";

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    /// Draw right-continuous steps instead of straight segments.
    pub steps: bool,
    pub series: Vec<Series>,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Option<Self> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if !lo.is_finite() {
            return None;
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        Some(Self { lo, hi, log })
    }

    fn frac(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn tick_label(&self, frac: f64) -> String {
        let v = self.lo + frac * (self.hi - self.lo);
        if self.log {
            format!("{:.2e}", 10f64.powf(v))
        } else {
            format!("{v:.3}")
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn usable(p: &(f64, f64), chart: &Chart) -> bool {
    p.0.is_finite() && p.1.is_finite() && (!chart.log_x || p.0 > 0.0) && (!chart.log_y || p.1 > 0.0)
}

pub fn render_svg(chart: &Chart) -> SimResult<String> {
    let points = || {
        chart
            .series
            .iter()
            .flat_map(|s| s.points.iter())
            .filter(|p| usable(p, chart))
    };
    let (Some(x), Some(y)) = (
        Axis::fit(points().map(|p| p.0), chart.log_x),
        Axis::fit(points().map(|p| p.1), chart.log_y),
    ) else {
        return Err(SimError::Empty(format!("chart '{}' has no data", chart.title)));
    };
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |v: f64| LEFT + x.frac(v) * pw;
    let py = |v: f64| TOP + (1.0 - y.frac(v)) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + pw / 2.0,
        escape(&chart.title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let gx = LEFT + f * pw;
        let gy = TOP + (1.0 - f) * ph;
        let _ = writeln!(
            svg,
            r##"<line x1="{gx:.1}" y1="{TOP}" x2="{gx:.1}" y2="{:.1}" stroke="#dddddd"/>"##,
            TOP + ph
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{gy:.1}" x2="{:.1}" y2="{gy:.1}" stroke="#dddddd"/>"##,
            LEFT + pw
        );
        let _ = writeln!(
            svg,
            r#"<text x="{gx:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            TOP + ph + 16.0,
            x.tick_label(f)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            gy + 4.0,
            y.tick_label(f)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0,
        escape(&chart.x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&chart.y_label)
    );

    for (i, s) in chart.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut coords: Vec<(f64, f64)> = Vec::new();
        for p in s.points.iter().filter(|p| usable(p, chart)) {
            if chart.steps {
                if let Some(&(_, prev_y)) = coords.last() {
                    coords.push((px(p.0), prev_y));
                }
            }
            coords.push((px(p.0), py(p.1)));
        }
        let path: Vec<String> = coords.iter().map(|(a, b)| format!("{a:.2},{b:.2}")).collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        let ly = TOP + 14.0 + 18.0 * i as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn field<'a>(r: &'a csv::StringRecord, i: usize, path: &Path) -> SimResult<&'a str> {
    r.get(i).ok_or_else(|| SimError::Csv {
        path: path.to_path_buf(),
        message: format!("missing column {i}"),
    })
}

fn number(r: &csv::StringRecord, i: usize, path: &Path) -> SimResult<f64> {
    let raw = field(r, i, path)?;
    raw.parse().map_err(|_| SimError::Csv {
        path: path.to_path_buf(),
        message: format!("'{raw}' is not a number"),
    })
}

/// Groups `(series, x, y)` triples into series, keeping first-seen order.
fn group(triples: Vec<(String, f64, f64)>) -> Vec<Series> {
    let mut out: Vec<Series> = Vec::new();
    for (label, x, y) in triples {
        match out.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.push((x, y)),
            None => out.push(Series {
                label,
                points: vec![(x, y)],
            }),
        }
    }
    out
}

pub fn cdf_chart(path: &Path) -> SimResult<Chart> {
    let triples = read_csv(path)?
        .iter()
        .map(|r| Ok((field(r, 0, path)?.to_string(), number(r, 1, path)?, number(r, 2, path)?)))
        .collect::<SimResult<_>>()?;
    Ok(Chart {
        title: "Edge-UE spectral efficiency CDF".into(),
        x_label: "spectral efficiency (bit/s/Hz)".into(),
        y_label: "CDF".into(),
        log_x: false,
        log_y: false,
        steps: true,
        series: group(triples),
    })
}

pub fn runtime_chart(path: &Path) -> SimResult<Chart> {
    let triples = read_csv(path)?
        .iter()
        .map(|r| Ok((field(r, 0, path)?.to_string(), number(r, 1, path)?, number(r, 2, path)?)))
        .collect::<SimResult<_>>()?;
    Ok(Chart {
        title: "Clustering run time".into(),
        x_label: "number of RRHs".into(),
        y_label: "wall time (s)".into(),
        log_x: true,
        log_y: true,
        steps: false,
        series: group(triples),
    })
}

/// One chart per metric; x is the swept value (its position when the values
/// are not numeric), y the replication mean.
pub fn sweep_charts(path: &Path) -> SimResult<Vec<(String, Chart)>> {
    let records = read_csv(path)?;
    let mut values: Vec<String> = Vec::new();
    let mut metrics: Vec<String> = Vec::new();
    let mut param = String::new();
    for r in &records {
        param = field(r, 0, path)?.to_string();
        let v = field(r, 1, path)?.to_string();
        if !values.contains(&v) {
            values.push(v);
        }
        let m = field(r, 3, path)?.to_string();
        if !metrics.contains(&m) {
            metrics.push(m);
        }
    }
    let numeric = values.iter().all(|v| v.parse::<f64>().is_ok());
    let mut charts = Vec::new();
    for metric in metrics {
        let mut triples = Vec::new();
        for r in &records {
            if field(r, 3, path)? != metric {
                continue;
            }
            let raw = field(r, 1, path)?;
            let x = if numeric {
                raw.parse().unwrap_or(f64::NAN)
            } else {
                values.iter().position(|v| v == raw).unwrap_or(0) as f64
            };
            triples.push((field(r, 2, path)?.to_string(), x, number(r, 4, path)?));
        }
        charts.push((
            format!("sweep_{metric}.svg"),
            Chart {
                title: format!("{metric} vs {param}"),
                x_label: param.clone(),
                y_label: metric.clone(),
                log_x: false,
                log_y: false,
                steps: false,
                series: group(triples),
            },
        ));
    }
    Ok(charts)
}

/// Renders every chart whose CSV exists in `dir`. All SVGs are rendered
/// before any is written; with nothing to plot, nothing is written.
pub fn render_dir(dir: &Path) -> SimResult<Vec<PathBuf>> {
    let mut charts: Vec<(String, Chart)> = Vec::new();
    let cdf = dir.join(CDF_CSV);
    if cdf.exists() {
        charts.push((CDF_SVG.into(), cdf_chart(&cdf)?));
    }
    let timings = dir.join(TIMINGS_CSV);
    if timings.exists() {
        charts.push((RUNTIME_SVG.into(), runtime_chart(&timings)?));
    }
    let sweep = dir.join(SWEEP_CSV);
    if sweep.exists() {
        charts.extend(sweep_charts(&sweep)?);
    }
    charts.retain(|(_, c)| c.series.iter().any(|s| !s.points.is_empty()));
    if charts.is_empty() {
        return Err(SimError::Empty(format!("no plottable CSV in {}", dir.display())));
    }
    let rendered: Vec<(PathBuf, String)> = charts
        .iter()
        .map(|(name, c)| Ok((dir.join(name), render_svg(c)?)))
        .collect::<SimResult<_>>()?;
    let mut written = Vec::new();
    for (path, svg) in rendered {
        fs::write(&path, svg).map_err(SimError::io(&path))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart(points: Vec<(f64, f64)>) -> Chart {
        Chart {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            log_x: false,
            log_y: false,
            steps: true,
            series: vec![Series {
                label: "a".into(),
                points,
            }],
        }
    }

    #[test]
    fn empty_chart_is_an_error() {
        assert!(matches!(render_svg(&chart(vec![])), Err(SimError::Empty(_))));
    }

    #[test]
    fn x_axis_spans_the_samples() {
        let svg = render_svg(&chart(vec![(1.5, 0.25), (4.0, 1.0)])).unwrap();
        assert!(svg.contains(">1.500<"));
        assert!(svg.contains(">4.000<"));
        assert_eq!(svg, render_svg(&chart(vec![(1.5, 0.25), (4.0, 1.0)])).unwrap());
    }
}
