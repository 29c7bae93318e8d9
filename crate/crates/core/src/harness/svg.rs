//! Hand-rolled SVG 1.1 log-log plots: polylines, decade ticks, legend.

use crate::harness::runner::ConvergenceCurve;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 520.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 180.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Renders the curves on log-log axes (x: n, y: mean divergence); points with
/// nonpositive means are dropped.
pub fn render_loglog(curves: &[ConvergenceCurve], title: &str) -> String {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for c in curves {
        for (&n, &m) in c.ns.iter().zip(&c.means) {
            if m > 0.0 {
                xs.push((n as f64).log10());
                ys.push(m.log10());
            }
        }
    }
    let (x_lo, x_hi) = padded_range(&xs);
    let (y_lo, y_hi) = padded_range(&ys);
    let x_px = |x: f64| MARGIN_L + (x - x_lo) / (x_hi - x_lo) * (WIDTH - MARGIN_L - MARGIN_R);
    let y_px = |y: f64| HEIGHT - MARGIN_B - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - MARGIN_T - MARGIN_B);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        escape(title)
    ));
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        MARGIN_L,
        HEIGHT - MARGIN_B,
        WIDTH - MARGIN_R,
        HEIGHT - MARGIN_B
    ));
    svg.push_str(&format!(
        "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        MARGIN_L, MARGIN_T, MARGIN_L,
        HEIGHT - MARGIN_B
    ));
    // Log ticks: powers of 10 plus 2·10^k and 5·10^k minor marks.
    for (value, major) in log_ticks(x_lo, x_hi) {
        let px = x_px(value.log10());
        let len = if major { 7.0 } else { 4.0 };
        svg.push_str(&format!(
            "<line x1=\"{px:.1}\" y1=\"{:.1}\" x2=\"{px:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
            HEIGHT - MARGIN_B,
            HEIGHT - MARGIN_B + len
        ));
        if major {
            svg.push_str(&format!(
                "<text x=\"{px:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
                HEIGHT - MARGIN_B + 20.0,
                format_tick(value)
            ));
        }
    }
    for (value, major) in log_ticks(y_lo, y_hi) {
        let py = y_px(value.log10());
        let len = if major { 7.0 } else { 4.0 };
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{py:.1}\" x2=\"{:.1}\" y2=\"{py:.1}\" stroke=\"black\"/>\n",
            MARGIN_L - len,
            MARGIN_L
        ));
        if major {
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
                MARGIN_L - 10.0,
                py + 4.0,
                format_tick(value)
            ));
        }
    }
    // Axis labels.
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">n (log scale)</text>\n",
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 12.0
    ));
    svg.push_str(&format!(
        "<text x=\"18\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">mean divergence (log scale)</text>\n",
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0
    ));
    // Curves.
    for (ci, c) in curves.iter().enumerate() {
        let color = PALETTE[ci % PALETTE.len()];
        let mut points = String::new();
        for (&n, &m) in c.ns.iter().zip(&c.means) {
            if m > 0.0 {
                points.push_str(&format!(
                    "{:.2},{:.2} ",
                    x_px((n as f64).log10()),
                    y_px(m.log10())
                ));
            }
        }
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\" points=\"{}\"/>\n",
            points.trim_end()
        ));
        for (&n, &m) in c.ns.iter().zip(&c.means) {
            if m > 0.0 {
                svg.push_str(&format!(
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.6\" fill=\"{color}\"/>\n",
                    x_px((n as f64).log10()),
                    y_px(m.log10())
                ));
            }
        }
    }
    // Legend.
    let lx = WIDTH - MARGIN_R + 14.0;
    for (ci, c) in curves.iter().enumerate() {
        let color = PALETTE[ci % PALETTE.len()];
        let ly = MARGIN_T + 14.0 + ci as f64 * 22.0;
        svg.push_str(&format!(
            "<line x1=\"{lx:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            lx + 24.0
        ));
        let label = if c.slope.is_finite() {
            format!("{} (slope {:.3})", c.estimator.label(), c.slope)
        } else {
            c.estimator.label().to_string()
        };
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            lx + 30.0,
            ly + 4.0,
            escape(&label)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn padded_range(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    let span = (hi - lo).max(0.5);
    (lo - 0.06 * span, hi + 0.06 * span)
}

/// Tick positions in value space: major at 10^k, minor at 2·10^k and 5·10^k.
fn log_ticks(lo: f64, hi: f64) -> Vec<(f64, bool)> {
    let mut ticks = Vec::new();
    let k_lo = lo.floor() as i32 - 1;
    let k_hi = hi.ceil() as i32 + 1;
    for k in k_lo..=k_hi {
        for (mult, major) in [(1.0, true), (2.0, false), (5.0, false)] {
            let value: f64 = mult * 10f64.powi(k);
            let position = value.log10();
            if position >= lo && position <= hi {
                ticks.push((value, major));
            }
        }
    }
    ticks.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    ticks
}

fn format_tick(value: f64) -> String {
    if value >= 1.0 {
        format!("{value}")
    } else {
        format!("{value:.0e}")
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
