//! Minimal SVG line plots, scatter plots and heatmaps.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 48.0;
/// Points kept per series; longer series are strided.
const MAX_POINTS: usize = 2000;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn bounds(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn header(out: &mut String, title: &str, xlabel: &str, ylabel: &str) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"14\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">{}</text>\n",
        W / 2.0,
        escape(title),
        W / 2.0,
        H - 8.0,
        escape(xlabel),
        H / 2.0,
        H / 2.0,
        escape(ylabel),
    );
}

fn axes(out: &mut String, (x0, x1): (f64, f64), (y0, y1): (f64, f64)) {
    let _ = writeln!(
        out,
        "<rect x=\"{PAD}\" y=\"{PAD}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let label = |v: f64| format!("{:.3}", v);
    let _ = writeln!(out, "<text x=\"{PAD}\" y=\"{}\" font-size=\"10\">{}</text>", H - PAD + 14.0, label(x0));
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{}</text>",
        W - PAD,
        H - PAD + 14.0,
        label(x1)
    );
    let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{}</text>", PAD - 4.0, H - PAD, label(y0));
    let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{}</text>", PAD - 4.0, PAD + 8.0, label(y1));
}

fn project(v: f64, (lo, hi): (f64, f64), a: f64, b: f64) -> f64 {
    a + (v - lo) / (hi - lo) * (b - a)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let xr = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let yr = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let mut out = String::new();
    header(&mut out, title, xlabel, ylabel);
    axes(&mut out, xr, yr);
    for (k, s) in series.iter().enumerate() {
        let stride = s.points.len().div_ceil(MAX_POINTS).max(1);
        let mut path = String::new();
        for (idx, &(x, y)) in s.points.iter().enumerate() {
            if idx % stride != 0 && idx + 1 != s.points.len() {
                continue;
            }
            let px = project(x, xr, PAD, W - PAD);
            let py = project(y, yr, H - PAD, PAD);
            let _ = write!(path, "{}{px:.2},{py:.2}", if path.is_empty() { "M" } else { " L" });
        }
        let _ = writeln!(
            out,
            "<path d=\"{path}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1\"><title>{}</title></path>",
            PALETTE[k % PALETTE.len()],
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn scatter(title: &str, xlabel: &str, ylabel: &str, points: &[(f64, f64)]) -> String {
    let xr = bounds(points.iter().map(|p| p.0));
    let yr = bounds(points.iter().map(|p| p.1));
    let mut out = String::new();
    header(&mut out, title, xlabel, ylabel);
    axes(&mut out, xr, yr);
    for &(x, y) in points {
        let _ = writeln!(
            out,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2\" fill=\"{}\" fill-opacity=\"0.5\"/>",
            project(x, xr, PAD, W - PAD),
            project(y, yr, H - PAD, PAD),
            PALETTE[0]
        );
    }
    out.push_str("</svg>\n");
    out
}

/// `values[row][col]` in `[0, 1]`, rows drawn top to bottom.
pub fn heatmap(title: &str, xlabel: &str, ylabel: &str, values: &[Vec<f64>]) -> String {
    let rows = values.len().max(1);
    let cols = values.iter().map(Vec::len).max().unwrap_or(0).max(1);
    let row_stride = rows.div_ceil(400).max(1);
    let col_stride = cols.div_ceil(400).max(1);
    let cw = (W - 2.0 * PAD) / cols.div_ceil(col_stride) as f64;
    let ch = (H - 2.0 * PAD) / rows.div_ceil(row_stride) as f64;
    let mut out = String::new();
    header(&mut out, title, xlabel, ylabel);
    for (ri, row) in values.iter().enumerate().step_by(row_stride) {
        for (ci, &v) in row.iter().enumerate().step_by(col_stride) {
            let shade = (255.0 * (1.0 - v.clamp(0.0, 1.0))).round() as u8;
            if shade == 255 {
                continue;
            }
            let _ = writeln!(
                out,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"rgb({shade},{shade},255)\"/>",
                PAD + (ci / col_stride) as f64 * cw,
                PAD + (ri / row_stride) as f64 * ch,
                cw,
                ch
            );
        }
    }
    let _ = writeln!(
        out,
        "<rect x=\"{PAD}\" y=\"{PAD}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documents_are_closed() {
        let s = Series { label: "a<b".into(), points: vec![(0.0, 1.0), (1.0, 0.5)] };
        let doc = line_plot("t", "x", "y", &[s]);
        assert!(doc.starts_with("<svg") && doc.ends_with("</svg>\n"));
        assert!(doc.contains("a&lt;b"));
        assert!(heatmap("h", "t", "v", &[vec![0.0, 1.0]]).contains("rgb(0,0,255)"));
        assert!(scatter("s", "x", "y", &[]).ends_with("</svg>\n"));
    }
}
