//! Minimal single-series SVG line charts, linear or log-log. No plotting
//! dependency; the output is deterministic text.

use crate::numeric::fmt_f64;

pub struct ChartSpec<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub log_x: bool,
    pub log_y: bool,
}

const W: f64 = 640.0;
const H: f64 = 440.0;
const MARGIN: f64 = 60.0;

/// Render a polyline chart of one series. Non-positive values are skipped
/// on logarithmic axes.
pub fn line_chart(spec: &ChartSpec, points: &[(f64, f64)]) -> String {
    let tx = |x: f64| if spec.log_x { x.log10() } else { x };
    let ty = |y: f64| if spec.log_y { y.log10() } else { y };
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| {
            (!spec.log_x || *x > 0.0)
                && (!spec.log_y || *y > 0.0)
                && x.is_finite()
                && y.is_finite()
        })
        .map(|&(x, y)| (tx(x), ty(y)))
        .collect();

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
        W / 2.0,
        xml_escape(spec.title)
    ));

    if usable.is_empty() {
        svg.push_str("<text x=\"320\" y=\"220\" text-anchor=\"middle\">no plottable points</text>\n</svg>\n");
        return svg;
    }

    let (mut x_min, mut x_max) = (f64::MAX, f64::MIN);
    let (mut y_min, mut y_max) = (f64::MAX, f64::MIN);
    for &(x, y) in &usable {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    if x_max - x_min < 1e-12 {
        x_max = x_min + 1.0;
    }
    if y_max - y_min < 1e-12 {
        y_max = y_min + 1.0;
    }

    let px = |x: f64| MARGIN + (x - x_min) / (x_max - x_min) * (W - 2.0 * MARGIN);
    let py = |y: f64| H - MARGIN - (y - y_min) / (y_max - y_min) * (H - 2.0 * MARGIN);

    // axes box
    svg.push_str(&format!(
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    ));
    // extents as tick labels
    let axis_fmt = |v: f64, log: bool| {
        let value = if log { 10f64.powf(v) } else { v };
        format!("{value:.3e}")
    };
    svg.push_str(&format!(
        "<text x=\"{MARGIN}\" y=\"{}\" font-size=\"11\">{}</text>\n",
        H - MARGIN + 16.0,
        axis_fmt(x_min, spec.log_x)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"11\">{}</text>\n",
        W - MARGIN,
        H - MARGIN + 16.0,
        axis_fmt(x_max, spec.log_x)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"11\">{}</text>\n",
        MARGIN - 4.0,
        H - MARGIN,
        axis_fmt(y_min, spec.log_y)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"11\">{}</text>\n",
        MARGIN - 4.0,
        MARGIN + 10.0,
        axis_fmt(y_max, spec.log_y)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\">{}</text>\n",
        W / 2.0,
        H - 12.0,
        xml_escape(spec.x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        H / 2.0,
        H / 2.0,
        xml_escape(spec.y_label)
    ));

    let coords: Vec<String> = usable
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
        .collect();
    svg.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n",
        coords.join(" ")
    ));
    for &(x, y) in &usable {
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"#1f77b4\"/>\n",
            px(x),
            py(y)
        ));
    }
    // raw extents in a comment for exact inspection
    svg.push_str(&format!(
        "<!-- x:[{},{}] y:[{},{}] -->\n",
        fmt_f64(x_min),
        fmt_f64(x_max),
        fmt_f64(y_min),
        fmt_f64(y_max)
    ));
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
