//! Log-log plots of scale studies as standalone SVG 1.1 documents.

use std::fmt::Write;

use latticehull::experiments::Fit;
use latticehull::Estimate;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;

pub struct Plot<'a> {
    pub title: &'a str,
    pub y_label: &'a str,
    pub rows: &'a [(f64, Estimate)],
    pub fit: Option<&'a Fit>,
    /// Slope drawn through the middle of the data for comparison.
    pub reference_slope: Option<f64>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Axis {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    /// `v` is already a log10 value.
    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    let span = (hi - lo).max(0.2);
    let mid = 0.5 * (lo + hi);
    (mid - 0.55 * span, mid + 0.55 * span)
}

/// Tick values (not logs) for a log axis: decades, or 1-2-5 steps when the
/// range spans less than two decades.
fn log_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let mut ticks = Vec::new();
    let mantissas: &[f64] = if hi - lo >= 2.0 { &[1.0] } else { &[1.0, 2.0, 5.0] };
    for k in (lo.floor() as i32)..=(hi.ceil() as i32) {
        for m in mantissas {
            let v = m * 10f64.powi(k);
            if (lo..=hi).contains(&v.log10()) {
                ticks.push(v);
            }
        }
    }
    ticks
}

fn label(v: f64) -> String {
    if (1e-3..1e4).contains(&v.abs()) {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.0e}")
    }
}

pub fn render(plot: &Plot<'_>) -> String {
    let pts: Vec<(f64, f64, f64)> =
        plot.rows.iter().filter(|(l, e)| *l > 0.0 && e.value > 0.0).map(|(l, e)| (*l, e.value, e.std_error)).collect();
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#,
        W / 2.0,
        escape(plot.title)
    );

    let x_axis;
    let y_axis;
    if pts.is_empty() {
        x_axis = Axis { lo: 0.0, hi: 1.0, px_lo: LEFT, px_hi: W - RIGHT };
        y_axis = Axis { lo: 0.0, hi: 1.0, px_lo: H - BOTTOM, px_hi: TOP };
    } else {
        let xs = pts.iter().map(|p| p.0.log10());
        let (xl, xh) = xs.clone().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        let low = |p: &(f64, f64, f64)| (p.1 - p.2).max(p.1 * 0.5).log10();
        let high = |p: &(f64, f64, f64)| (p.1 + p.2).log10();
        let yl = pts.iter().map(low).fold(f64::INFINITY, f64::min);
        let yh = pts.iter().map(high).fold(f64::NEG_INFINITY, f64::max);
        let (xl, xh) = padded(xl, xh);
        let (yl, yh) = padded(yl, yh);
        x_axis = Axis { lo: xl, hi: xh, px_lo: LEFT, px_hi: W - RIGHT };
        y_axis = Axis { lo: yl, hi: yh, px_lo: H - BOTTOM, px_hi: TOP };
    }

    // Frame and ticks.
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
    let _ = writeln!(s, r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" fill="none" stroke="black" stroke-width="1"/>"#);
    for v in log_ticks(x_axis.lo, x_axis.hi) {
        let px = x_axis.map(v.log10());
        let _ = writeln!(s, r#"<path d="M{px:.2},{y0} L{px:.2},{:.2}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(
            s,
            r#"<text x="{px:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            y0 + 18.0,
            label(v)
        );
    }
    for v in log_ticks(y_axis.lo, y_axis.hi) {
        let py = y_axis.map(v.log10());
        let _ = writeln!(s, r#"<path d="M{:.2},{py:.2} L{x0},{py:.2}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            x0 - 8.0,
            py + 4.0,
            label(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">lambda</text>"#,
        (x0 + x1) / 2.0,
        H - 14.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(plot.y_label)
    );

    // Data with error bars.
    for &(l, v, se) in &pts {
        let px = x_axis.map(l.log10());
        let lo = y_axis.map((v - se).max(v * 0.5).log10());
        let hi = y_axis.map((v + se).log10());
        let _ = writeln!(
            s,
            r#"<path d="M{px:.2},{lo:.2} L{px:.2},{hi:.2} M{:.2},{lo:.2} L{:.2},{lo:.2} M{:.2},{hi:.2} L{:.2},{hi:.2}" stroke="steelblue" stroke-width="1.2" fill="none"/>"#,
            px - 4.0,
            px + 4.0,
            px - 4.0,
            px + 4.0
        );
        let _ = writeln!(
            s,
            r#"<circle cx="{px:.2}" cy="{:.2}" r="3.5" fill="steelblue"/>"#,
            y_axis.map(v.log10())
        );
    }

    let line = |slope: f64, intercept_log10: f64| {
        let (a, b) = (x_axis.lo, x_axis.hi);
        let ya = intercept_log10 + slope * a;
        let yb = intercept_log10 + slope * b;
        format!("M{:.2},{:.2} L{:.2},{:.2}", x_axis.map(a), y_axis.map(ya), x_axis.map(b), y_axis.map(yb))
    };
    let mut legend_y = TOP + 14.0;
    let _ = writeln!(s, r#"<clipPath id="plot-area"><rect x="{x0}" y="{y1}" width="{}" height="{}"/></clipPath>"#, x1 - x0, y0 - y1);
    if let Some(fit) = plot.fit {
        // ln v = c + k ln l  <=>  log10 v = c / ln 10 + k log10 l
        let _ = writeln!(
            s,
            r#"<path d="{}" stroke="firebrick" stroke-width="1.5" fill="none" clip-path="url(#plot-area)"/>"#,
            line(fit.slope, fit.intercept / std::f64::consts::LN_10)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{legend_y:.2}" font-family="sans-serif" font-size="12" fill="firebrick" text-anchor="end">fit slope {:.4} [{:.4}, {:.4}], r² {:.3}</text>"#,
            x1 - 6.0,
            fit.slope,
            fit.ci.0,
            fit.ci.1,
            fit.r_squared
        );
        legend_y += 16.0;
    }
    if let (Some(k), false) = (plot.reference_slope, pts.is_empty()) {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0.log10()).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1.log10()).sum::<f64>() / n;
        let _ = writeln!(
            s,
            r#"<path d="{}" stroke="gray" stroke-width="1" stroke-dasharray="6,4" fill="none" clip-path="url(#plot-area)"/>"#,
            line(k, my - k * mx)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{legend_y:.2}" font-family="sans-serif" font-size="12" fill="gray" text-anchor="end">reference slope {}</text>"#,
            x1 - 6.0,
            label(k)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn est(value: f64, se: f64) -> Estimate {
        Estimate { value, std_error: se, n_samples: 100, seed: 0, flags: Default::default() }
    }

    #[test]
    fn renders_well_formed_document() {
        let rows = vec![(8.0, est(0.5, 0.01)), (16.0, est(0.4, 0.01)), (32.0, est(0.31, 0.01))];
        let fit = latticehull::experiments::fit_exponent(&rows).unwrap();
        let svg = render(&Plot { title: "disk <width>", y_label: "loss", rows: &rows, fit: Some(&fit), reference_slope: Some(-1.0 / 3.0) });
        let doc = roxmltree::Document::parse(&svg).unwrap();
        let root = doc.root_element();
        assert_eq!(root.tag_name().name(), "svg");
        assert_eq!(root.attribute("version"), Some("1.1"));
        let paths: Vec<_> = root.descendants().filter(|n| n.has_tag_name("path")).collect();
        assert!(paths.len() >= 5);
        assert!(paths.iter().all(|p| !p.attribute("d").unwrap_or("").is_empty()));
        assert!(svg.contains("disk &lt;width&gt;"));
    }

    #[test]
    fn empty_data_still_renders() {
        let svg = render(&Plot { title: "none", y_label: "", rows: &[], fit: None, reference_slope: Some(0.0) });
        roxmltree::Document::parse(&svg).unwrap();
    }

    #[test]
    fn tick_choice() {
        assert_eq!(log_ticks(0.0, 2.5), vec![1.0, 10.0, 100.0]);
        assert_eq!(log_ticks(0.5, 1.5), vec![5.0, 10.0, 20.0]);
    }
}
