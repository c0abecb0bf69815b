//! Hand-emitted SVG scatter/line plots of CSV tables.

use std::fmt::Write as _;

use crate::config::PlotKind;
use crate::CliError;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn from_csv(text: &str) -> Result<Self, CliError> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let columns = r
            .headers()
            .map_err(|e| CliError::Usage(format!("table: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        let rows = r
            .records()
            .map(|rec| {
                rec.map(|rec| rec.iter().map(str::to_string).collect())
                    .map_err(|e| CliError::Usage(format!("table: {e}")))
            })
            .collect::<Result<_, _>>()?;
        Ok(Table { columns, rows })
    }

    fn column(&self, name: &str) -> Result<usize, CliError> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| CliError::Usage(format!("table has no column '{name}'")))
    }

    fn number(&self, row: usize, col: usize) -> Result<f64, CliError> {
        let cell = &self.rows[row][col];
        cell.parse()
            .map_err(|_| CliError::Usage(format!("row {}: '{cell}' is not a number", row + 1)))
    }
}

struct Layout {
    x: &'static str,
    ys: &'static [&'static str],
    group: Option<&'static str>,
    log_x: bool,
    log_y: bool,
    title: &'static str,
    x_label: &'static str,
    y_label: &'static str,
}

fn layout(kind: PlotKind) -> Layout {
    match kind {
        PlotKind::RatioVsLogk => Layout {
            x: "k_xx",
            ys: &["ratio_a", "ratio_c", "ratio_d"],
            group: Some("p"),
            log_x: true,
            log_y: false,
            title: "ratio vs k(x,x)",
            x_label: "k(x,x)",
            y_label: "ratio",
        },
        PlotKind::Decay => Layout {
            x: "j",
            ys: &["ratio"],
            group: None,
            log_x: false,
            log_y: true,
            title: "decay",
            x_label: "j",
            y_label: "ratio",
        },
        PlotKind::Spectrum => Layout {
            x: "index",
            ys: &["eigenvalue"],
            group: None,
            log_x: false,
            log_y: true,
            title: "spectrum",
            x_label: "index",
            y_label: "eigenvalue",
        },
    }
}

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

#[derive(Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (lo, hi) = values
            .map(|v| if log { v.log10() } else { v })
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
        Axis {
            lo: lo - pad,
            hi: hi + pad,
            log,
        }
    }

    fn unit(&self, v: f64) -> f64 {
        let t = if self.log { v.log10() } else { v };
        (t - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let (a, b) = (self.lo.ceil() as i32, self.hi.floor() as i32);
            let step = ((b - a) / 6 + 1).max(1);
            let decades: Vec<f64> = (a..=b).step_by(step as usize).map(|e| 10f64.powi(e)).collect();
            if !decades.is_empty() {
                return decades;
            }
            return vec![10f64.powf(0.5 * (self.lo + self.hi))];
        }
        let raw = (self.hi - self.lo) / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|s| *s >= raw)
            .unwrap_or(10.0 * mag);
        let first = (self.lo / step).ceil() as i64;
        let last = (self.hi / step).floor() as i64;
        (first..=last).map(|k| k as f64 * step).collect()
    }
}

fn label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if (1e-3..1e4).contains(&v.abs()) {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn collect_series(table: &Table, l: &Layout) -> Result<Vec<Series>, CliError> {
    let xc = table.column(l.x)?;
    let gc = match l.group {
        Some(g) => table.column(g).ok(),
        None => None,
    };
    let mut out: Vec<Series> = Vec::new();
    for y in l.ys {
        let Ok(yc) = table.column(y) else { continue };
        let mut groups: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
        for r in 0..table.rows.len() {
            let key = gc.map(|g| table.rows[r][g].clone()).unwrap_or_default();
            let (x, v) = (table.number(r, xc)?, table.number(r, yc)?);
            if !x.is_finite() || !v.is_finite() || (l.log_x && x <= 0.0) || (l.log_y && v <= 0.0) {
                continue;
            }
            match groups.iter_mut().find(|(k, _)| *k == key) {
                Some((_, pts)) => pts.push((x, v)),
                None => groups.push((key, vec![(x, v)])),
            }
        }
        for (_, pts) in groups.iter_mut() {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        if groups.windows(2).all(|w| w[0].1 == w[1].1) {
            groups.truncate(1);
            if let Some(g) = groups.first_mut() {
                g.0.clear();
            }
        }
        for (key, points) in groups {
            let label = match key.parse::<f64>() {
                Ok(p) => format!("{y} (p={})", label(p)),
                Err(_) => y.to_string(),
            };
            match out.iter_mut().find(|s| s.points == points) {
                Some(prev) => prev.label = format!("{} = {label}", prev.label),
                None => out.push(Series { label, points }),
            }
        }
    }
    Ok(out)
}

/// SVG document for a table of the given kind.
pub fn plot(table: &Table, kind: PlotKind) -> Result<String, CliError> {
    if table.rows.is_empty() {
        return Err(CliError::Usage("cannot plot an empty table".into()));
    }
    let l = layout(kind);
    let series = collect_series(table, &l)?;
    let all = || series.iter().flat_map(|s| s.points.iter().copied());
    if all().next().is_none() {
        return Err(CliError::Usage("no plottable values in the table".into()));
    }
    let xa = Axis::fit(all().map(|p| p.0), l.log_x);
    let ya = Axis::fit(all().map(|p| p.1), l.log_y);
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let sx = |v: f64| LEFT + pw * xa.unit(v);
    let sy = |v: f64| TOP + ph * (1.0 - ya.unit(v));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + pw / 2.0,
        escape(l.title)
    );
    let _ = writeln!(
        s,
        r#"<g stroke="black" fill="none"><line x1="{LEFT}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/><line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{:.2}"/></g>"#,
        TOP + ph,
        LEFT + pw,
        TOP + ph,
        TOP + ph
    );
    for t in xa.ticks() {
        let x = sx(t);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 19.0,
            label(t)
        );
    }
    for t in ya.ticks() {
        let y = sy(t);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0,
            label(t)
        );
    }
    let scale = |log: bool| if log { " (log)" } else { "" };
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 14.0,
        escape(l.x_label),
        scale(l.log_x)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(l.y_label),
        scale(l.log_y)
    );
    for (k, ser) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        if ser.points.len() > 1 {
            let pts: Vec<String> = ser
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                pts.join(" ")
            );
        }
        for &(x, y) in &ser.points {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                sx(x),
                sy(y)
            );
        }
        let ly = TOP + 12.0 + 18.0 * k as f64;
        let lx = WIDTH - RIGHT + 14.0;
        let _ = writeln!(
            s,
            r#"<circle cx="{lx:.2}" cy="{:.2}" r="4" fill="{color}"/><text x="{:.2}" y="{ly:.2}">{}</text>"#,
            ly - 4.0,
            lx + 10.0,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
