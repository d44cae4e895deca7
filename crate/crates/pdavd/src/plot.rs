//! Dependency-free log-log SVG plots.
//!
//! Output is a self-contained `<svg>` string with decade gridlines, one
//! polyline per series and dashed reference guides of slope −1 and −2.
//! Formatting is fixed-precision, so identical inputs give identical bytes.

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 540.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// One curve: positive values only are drawn (log axes).
pub struct Series<'a> {
    pub label: &'a str,
    pub times: &'a [f64],
    pub values: &'a [f64],
}

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

/// Renders the series on log-log axes. Values ≤ 1e-300 and nonfinite points
/// break the polyline rather than distorting the range.
pub fn log_log_svg(title: &str, series: &[Series]) -> String {
    let mut tmin = f64::INFINITY;
    let mut tmax = f64::NEG_INFINITY;
    let mut vmin = f64::INFINITY;
    let mut vmax = f64::NEG_INFINITY;
    for s in series {
        for (&t, &v) in s.times.iter().zip(s.values) {
            if t > 0.0 && t.is_finite() {
                tmin = tmin.min(t);
                tmax = tmax.max(t);
            }
            if v > 1e-300 && v.is_finite() {
                vmin = vmin.min(v);
                vmax = vmax.max(v);
            }
        }
    }
    if !tmin.is_finite() || !vmin.is_finite() {
        tmin = 1.0;
        tmax = 10.0;
        vmin = 0.1;
        vmax = 1.0;
    }
    // clamp the value range to 16 decades below the peak
    vmin = vmin.max(vmax * 1e-16);
    let lx0 = tmin.log10().floor();
    let lx1 = tmax.log10().ceil().max(lx0 + 1.0);
    let ly0 = vmin.log10().floor();
    let ly1 = vmax.log10().ceil().max(ly0 + 1.0);

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let to_x = |t: f64| MARGIN_L + (t.log10() - lx0) / (lx1 - lx0) * plot_w;
    let to_y = |v: f64| MARGIN_T + (ly1 - v.log10()) / (ly1 - ly0) * plot_h;

    let mut out = String::with_capacity(16 * 1024);
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
        fmt(WIDTH / 2.0),
        xml_escape(title)
    ));

    // decade gridlines and tick labels
    let mut dx = lx0;
    while dx <= lx1 + 0.5 {
        let x = to_x(10f64.powf(dx));
        out.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
            fmt(x),
            fmt(MARGIN_T),
            fmt(HEIGHT - MARGIN_B)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">1e{}</text>\n",
            fmt(x),
            fmt(HEIGHT - MARGIN_B + 16.0),
            dx as i64
        ));
        dx += 1.0;
    }
    let mut dy = ly0;
    while dy <= ly1 + 0.5 {
        let y = to_y(10f64.powf(dy));
        out.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
            fmt(MARGIN_L),
            fmt(WIDTH - MARGIN_R),
            fmt(y)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">1e{}</text>\n",
            fmt(MARGIN_L - 6.0),
            fmt(y + 4.0),
            dy as i64
        ));
        dy += 1.0;
    }

    // axes frame
    out.push_str(&format!(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333333\"/>\n",
        fmt(MARGIN_L),
        fmt(MARGIN_T),
        fmt(plot_w),
        fmt(plot_h)
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">t</text>\n",
        fmt(MARGIN_L + plot_w / 2.0),
        fmt(HEIGHT - 12.0)
    ));

    // reference guides of slope −1 and −2, anchored near the top-left and
    // clipped at the frame floor
    for (slope, dash, label) in [(-1.0, "6 3", "slope -1"), (-2.0, "2 3", "slope -2")] {
        let t_lo = 10f64.powf(lx0);
        let t_hi = 10f64.powf(lx1);
        let v_anchor = 10f64.powf(ly1 - 0.3);
        let v_floor = 10f64.powf(ly0);
        let v_at = |t: f64| v_anchor * (t / t_lo).powf(slope);
        let (t_b, v_b) = if v_at(t_hi) < v_floor {
            (t_lo * (v_floor / v_anchor).powf(1.0 / slope), v_floor)
        } else {
            (t_hi, v_at(t_hi))
        };
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#999999\" stroke-width=\"1\" stroke-dasharray=\"{}\"/>\n",
            fmt(to_x(t_lo)),
            fmt(to_y(v_anchor)),
            fmt(to_x(t_b)),
            fmt(to_y(v_b)),
            dash
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#999999\">{}</text>\n",
            fmt(to_x(t_b).min(WIDTH - MARGIN_R - 50.0)),
            fmt(to_y(v_b) - 4.0),
            label
        ));
    }

    // series
    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let mut path = String::new();
        let mut pen_down = false;
        for (&t, &v) in s.times.iter().zip(s.values) {
            if t > 0.0 && v > 1e-300 && t.is_finite() && v.is_finite() {
                let cmd = if pen_down { 'L' } else { 'M' };
                path.push_str(&format!("{cmd}{} {} ", fmt(to_x(t)), fmt(to_y(v))));
                pen_down = true;
            } else {
                pen_down = false;
            }
        }
        if !path.is_empty() {
            out.push_str(&format!(
                "<path d=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
                path.trim_end()
            ));
        }
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"{color}\">{}</text>\n",
            fmt(MARGIN_L + 10.0),
            fmt(MARGIN_T + 18.0 + 16.0 * idx as f64),
            xml_escape(s.label)
        ));
    }

    out.push_str("</svg>\n");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
