use std::fmt::Write as _;
use std::path::Path;

use super::stats::StatsSummary;
use crate::error::{Error, Result};

/// Values at or below this are drawn at `log10(LOG_FLOOR)`.
pub const LOG_FLOOR: f64 = 1e-12;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

fn log(v: f64) -> f64 {
    v.max(LOG_FLOOR).log10()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Mean best-so-far per summary on a log10 axis, with the p10-p90 band shaded.
pub fn render_convergence_svg(summaries: &[StatsSummary]) -> Result<String> {
    if summaries.is_empty() {
        return Err(Error::EmptyInput("summaries to plot"));
    }
    let n_max = summaries.iter().map(StatsSummary::len).max().unwrap_or(0);
    if n_max == 0 {
        return Err(Error::EmptyInput("summary trace"));
    }
    let all = summaries.iter().flat_map(|s| s.p10.iter().chain(&s.p90).chain(&s.mean)).map(|&v| log(v));
    let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (y_lo, mut y_hi) = (lo.floor(), hi.ceil());
    if y_hi <= y_lo {
        y_hi = y_lo + 1.0;
    }
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x_span = (n_max.max(2) - 1) as f64;
    let px = |i: usize| LEFT + plot_w * i as f64 / x_span;
    let py = |v: f64| TOP + plot_h * (y_hi - log(v)) / (y_hi - y_lo);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    let mut d = y_lo;
    while d <= y_hi {
        let y = TOP + plot_h * (y_hi - d) / (y_hi - y_lo);
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"##,
            LEFT + plot_w,
            LEFT - 6.0,
            y + 4.0
        );
        d += 1.0;
    }
    for k in 0..=4 {
        let i = ((n_max - 1) as f64 * k as f64 / 4.0).round() as usize;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            px(i),
            TOP + plot_h + 18.0,
            i + 1
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">evaluations</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">best-so-far error (log10)</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    for (k, s) in summaries.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut band = String::new();
        for (i, &v) in s.p90.iter().enumerate() {
            let _ = write!(band, "{:.2},{:.2} ", px(i), py(v));
        }
        for (i, &v) in s.p10.iter().enumerate().rev() {
            let _ = write!(band, "{:.2},{:.2} ", px(i), py(v));
        }
        let _ = writeln!(
            svg,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
            band.trim_end()
        );
        let line: Vec<String> = s.mean.iter().enumerate().map(|(i, &v)| format!("{:.2},{:.2}", px(i), py(v))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2.5"/>"#,
            line.join(" ")
        );
        let ly = TOP + 10.0 + 20.0 * k as f64;
        let lx = LEFT + plot_w + 15.0;
        let _ = writeln!(
            svg,
            r#"<g class="legend-entry"><line x1="{lx}" y1="{ly}" x2="{:.2}" y2="{ly}" stroke="{color}" stroke-width="2.5"/><text x="{:.2}" y="{:.2}">{}</text></g>"#,
            lx + 25.0,
            lx + 32.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn plot_convergence(summaries: &[StatsSummary], path: &Path) -> Result<()> {
    let svg = render_convergence_svg(summaries)?;
    std::fs::write(path, svg)?;
    Ok(())
}
