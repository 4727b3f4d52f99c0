//! Minimal SVG line plots and heatmaps for the command-line outputs.

use std::fmt::Write as _;

const W: f64 = 720.0;
const H: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = ["#c0392b", "#2471a3", "#229954", "#7d3c98", "#d68910", "#17202a"];

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn frame(s: &mut String, title: &str, xlabel: &str, ylabel: &str, x: (f64, f64), y: (f64, f64)) {
    let _ = write!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>
<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="black"/>
<text x="{}" y="{}" text-anchor="middle">{}</text>
<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>
"#,
        (LEFT + W - RIGHT) / 2.0,
        escape(title),
        W - LEFT - RIGHT,
        H - TOP - BOTTOM,
        (LEFT + W - RIGHT) / 2.0,
        H - 12.0,
        escape(xlabel),
        (TOP + H - BOTTOM) / 2.0,
        (TOP + H - BOTTOM) / 2.0,
        escape(ylabel),
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let px = LEFT + f * (W - LEFT - RIGHT);
        let py = H - BOTTOM - f * (H - TOP - BOTTOM);
        let _ = writeln!(
            s,
            r#"<text x="{px}" y="{}" text-anchor="middle">{:.3}</text><text x="{}" y="{}" text-anchor="end">{:.3}</text>"#,
            H - BOTTOM + 16.0,
            x.0 + f * (x.1 - x.0),
            LEFT - 6.0,
            py + 4.0,
            y.0 + f * (y.1 - y.0),
        );
    }
}

/// Named series sharing one pair of axes.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[(&str, &[f64], &[f64])]) -> String {
    let x = range(series.iter().flat_map(|s| s.1.iter().copied()));
    let y = range(series.iter().flat_map(|s| s.2.iter().copied()));
    let mut s = String::new();
    frame(&mut s, title, xlabel, ylabel, x, y);
    let sx = |v: f64| LEFT + (v - x.0) / (x.1 - x.0) * (W - LEFT - RIGHT);
    let sy = |v: f64| H - BOTTOM - (v - y.0) / (y.1 - y.0) * (H - TOP - BOTTOM);
    for (k, (name, xs, ys)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let points: Vec<String> = xs
            .iter()
            .zip(ys.iter())
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .map(|(a, b)| format!("{:.2},{:.2}", sx(*a), sy(*b)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
            points.join(" ")
        );
        let ly = TOP + 14.0 + 18.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            W - RIGHT + 10.0,
            W - RIGHT + 30.0,
            W - RIGHT + 36.0,
            ly + 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn viridis_like(f: f64) -> String {
    // dark blue → teal → yellow
    let f = f.clamp(0.0, 1.0);
    let stops = [(68.0, 1.0, 84.0), (33.0, 145.0, 140.0), (253.0, 231.0, 37.0)];
    let (a, b, t) = if f < 0.5 { (stops[0], stops[1], 2.0 * f) } else { (stops[1], stops[2], 2.0 * f - 1.0) };
    format!(
        "rgb({:.0},{:.0},{:.0})",
        a.0 + t * (b.0 - a.0),
        a.1 + t * (b.1 - a.1),
        a.2 + t * (b.2 - a.2)
    )
}

/// Cells `values[iy * xs.len() + ix]` on the grid `xs × ys`; non-finite cells
/// are left grey.
pub fn heatmap(title: &str, xlabel: &str, ylabel: &str, xs: &[f64], ys: &[f64], values: &[f64]) -> String {
    let x = range(xs.iter().copied());
    let y = range(ys.iter().copied());
    let v = range(values.iter().copied());
    let mut s = String::new();
    frame(&mut s, title, xlabel, ylabel, x, y);
    let cw = (W - LEFT - RIGHT) / xs.len() as f64;
    let ch = (H - TOP - BOTTOM) / ys.len() as f64;
    for iy in 0..ys.len() {
        for ix in 0..xs.len() {
            let val = values[iy * xs.len() + ix];
            let fill = if val.is_finite() {
                viridis_like((val - v.0) / (v.1 - v.0))
            } else {
                "#bbbbbb".to_string()
            };
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                LEFT + ix as f64 * cw,
                H - BOTTOM - (iy + 1) as f64 * ch,
                cw + 0.3,
                ch + 0.3
            );
        }
    }
    for k in 0..=10 {
        let f = k as f64 / 10.0;
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{:.2}" width="16" height="{:.2}" fill="{}"/>"#,
            W - RIGHT + 20.0,
            H - BOTTOM - (k + 1) as f64 * (H - TOP - BOTTOM) / 11.0,
            (H - TOP - BOTTOM) / 11.0 + 0.3,
            viridis_like(f)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}">{:.3}</text><text x="{}" y="{}">{:.3}</text>"#,
        W - RIGHT + 40.0,
        H - BOTTOM,
        v.0,
        W - RIGHT + 40.0,
        TOP + 10.0,
        v.1
    );
    s.push_str("</svg>\n");
    s
}
