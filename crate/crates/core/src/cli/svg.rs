//! Minimal SVG line plots of table columns.

use std::fmt::Write as _;
use std::path::Path;

use super::table::Table;
use super::CliError;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, Default)]
pub struct PlotOptions {
    pub log_y: bool,
    pub abs: bool,
}

/// Plots `y_columns` against `x_column`. Points that cannot be drawn (NaN, or
/// non-positive on a log axis) break the line.
pub fn render_svg(table: &Table, x_column: &str, y_columns: &[String], opts: &PlotOptions, path: &Path) -> Result<(), CliError> {
    let svg = svg_document(table, x_column, y_columns, opts)?;
    std::fs::write(path, svg).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn svg_document(table: &Table, x_column: &str, y_columns: &[String], opts: &PlotOptions) -> Result<String, CliError> {
    if y_columns.is_empty() {
        return Err(CliError::Config("svg: no y columns to plot".into()));
    }
    let xs = table.numeric_column(x_column)?;
    let series: Vec<(String, Vec<Option<f64>>)> = y_columns
        .iter()
        .map(|name| {
            let ys = table.numeric_column(name)?;
            let mapped = ys
                .into_iter()
                .map(|y| {
                    let y = if opts.abs { y.abs() } else { y };
                    match (y.is_finite(), opts.log_y) {
                        (false, _) => None,
                        (true, true) if y <= 0.0 => None,
                        (true, true) => Some(y.log10()),
                        (true, false) => Some(y),
                    }
                })
                .collect();
            Ok((if opts.abs { format!("|{name}|") } else { name.clone() }, mapped))
        })
        .collect::<Result<_, CliError>>()?;

    let finite_x: Vec<f64> = xs.iter().copied().filter(|x| x.is_finite()).collect();
    let (x_lo, x_hi) = padded_range(&finite_x);
    let all_y: Vec<f64> = series.iter().flat_map(|(_, ys)| ys.iter().flatten().copied()).collect();
    let (y_lo, y_hi) = padded_range(&all_y);

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let py = |y: f64| TOP + (y_hi - y) / (y_hi - y_lo) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );

    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let x = x_lo + f * (x_hi - x_lo);
        let y = y_lo + f * (y_hi - y_lo);
        let (cx, cy) = (px(x), py(y));
        let ylabel = if opts.log_y { format!("1e{:.2}", y) } else { tick(y) };
        let _ = writeln!(s, r#"<line x1="{cx:.2}" y1="{}" x2="{cx:.2}" y2="{}" stroke="black"/>"#, TOP + plot_h, TOP + plot_h + 4.0);
        let _ = writeln!(s, r#"<text x="{cx:.2}" y="{}" text-anchor="middle">{}</text>"#, TOP + plot_h + 16.0, tick(x));
        let _ = writeln!(s, r#"<line x1="{}" y1="{cy:.2}" x2="{LEFT}" y2="{cy:.2}" stroke="black"/>"#, LEFT - 4.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{ylabel}</text>"#, LEFT - 6.0, cy + 4.0);
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 10.0,
        escape(x_column)
    );

    for (i, (name, ys)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<Option<(f64, f64)>> =
            xs.iter().zip(ys).map(|(&x, &y)| y.filter(|_| x.is_finite()).map(|y| (px(x), py(y)))).collect();
        if points.len() == 1 {
            if let Some((cx, cy)) = points[0] {
                let _ = writeln!(s, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="3" fill="{color}"/>"#);
            }
        } else {
            for run in points.split(Option::is_none).filter(|r| !r.is_empty()) {
                let coords: Vec<String> = run.iter().flatten().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    coords.join(" ")
                );
            }
        }
        let ly = TOP + 14.0 + 16.0 * i as f64;
        let lx = WIDTH - RIGHT + 10.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 18.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 24.0, ly + 4.0, escape(name));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn padded_range(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e5).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{v:.4}").trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
