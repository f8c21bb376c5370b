//! Minimal SVG line plots and heatmaps.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 110.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
/// Largest heatmap raster before max-pooling.
const MAX_CELLS: usize = 160;

/// Perceptually ordered dark-blue to yellow ramp, lightness increasing.
const RAMP: [(f64, f64, f64); 9] = [
    (68.0, 1.0, 84.0),
    (72.0, 40.0, 120.0),
    (62.0, 74.0, 137.0),
    (49.0, 104.0, 142.0),
    (38.0, 130.0, 142.0),
    (31.0, 158.0, 137.0),
    (53.0, 183.0, 121.0),
    (109.0, 205.0, 89.0),
    (253.0, 231.0, 37.0),
];

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

/// Color for `x` in `[0, 1]`.
pub fn ramp(x: f64) -> String {
    let x = if x.is_finite() { x.clamp(0.0, 1.0) } else { 0.0 };
    let pos = x * (RAMP.len() - 1) as f64;
    let i = (pos.floor() as usize).min(RAMP.len() - 2);
    let f = pos - i as f64;
    let (a, b) = (RAMP[i], RAMP[i + 1]);
    let mix = |p: f64, q: f64| (p + (q - p) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn num(x: f64) -> String {
    let s = format!("{x:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn tick_label(x: f64) -> String {
    if x != 0.0 && (x.abs() >= 1e4 || x.abs() < 1e-2) {
        format!("{x:.1e}")
    } else {
        let s = format!("{x:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.').to_string();
        if s == "-0" { "0".into() } else { s }
    }
}

/// About five round tick positions covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let mut out = Vec::new();
    let mut t = (lo / step).ceil() * step;
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }

    fn axes(&self, out: &mut String, title: &str, xlabel: &str, ylabel: &str) {
        let (x0, x1) = (LEFT, WIDTH - RIGHT);
        let (y0, y1) = (HEIGHT - BOTTOM, TOP);
        let _ = writeln!(
            out,
            r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#000"/>"##,
            num(x0),
            num(y1),
            num(x1 - x0),
            num(y0 - y1)
        );
        for t in ticks(self.x.0, self.x.1) {
            let x = self.px(t);
            let _ = writeln!(
                out,
                r##"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="#000"/><text x="{0}" y="{3}" text-anchor="middle">{4}</text>"##,
                num(x),
                num(y0),
                num(y0 + 5.0),
                num(y0 + 18.0),
                tick_label(t)
            );
        }
        for t in ticks(self.y.0, self.y.1) {
            let y = self.py(t);
            let _ = writeln!(
                out,
                r##"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="#000"/><text x="{3}" y="{4}" text-anchor="end">{5}</text>"##,
                num(x0 - 5.0),
                num(y),
                num(x0),
                num(x0 - 8.0),
                num(y + 4.0),
                tick_label(t)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="18" text-anchor="middle">{}</text>"#,
            num((x0 + x1) / 2.0),
            escape(title)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            num((x0 + x1) / 2.0),
            num(HEIGHT - 12.0),
            escape(xlabel)
        );
        let _ = writeln!(
            out,
            r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
            num((y0 + y1) / 2.0),
            escape(ylabel)
        );
    }
}

fn header() -> String {
    format!(
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">
<rect width="{w}" height="{h}" fill="#fff"/>
"##,
        w = WIDTH,
        h = HEIGHT
    )
}

fn finite_range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values
        .filter(|v| v.is_finite())
        .fold(None, |acc, v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 1.0, hi + 1.0)
    }
}

/// One polyline per `(label, ys)` against the shared `xs`.
pub fn line_plot(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    xs: &[f64],
    lines: &[(String, Vec<f64>)],
) -> String {
    let x = finite_range(xs.iter().copied()).unwrap_or((0.0, 1.0));
    let y = finite_range(lines.iter().flat_map(|(_, ys)| ys.iter().copied())).unwrap_or((0.0, 1.0));
    let frame = Frame {
        x: padded(x.0, x.1),
        y: padded(y.0, y.1),
    };
    let mut out = header();
    frame.axes(&mut out, title, xlabel, ylabel);
    for (k, (label, ys)) in lines.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let points: Vec<String> = xs
            .iter()
            .zip(ys)
            .filter(|(_, y)| y.is_finite())
            .map(|(x, y)| format!("{},{}", num(frame.px(*x)), num(frame.py(*y))))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let ly = TOP + 14.0 + 16.0 * k as f64;
        let lx = WIDTH - RIGHT + 10.0;
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{1}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            num(lx),
            num(ly),
            num(lx + 18.0),
            num(lx + 22.0),
            num(ly + 4.0),
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Max-pools `n` samples into at most `MAX_CELLS` bins; returns bin edges
/// as index ranges.
fn bins(n: usize) -> Vec<(usize, usize)> {
    let count = n.min(MAX_CELLS).max(1);
    (0..count)
        .map(|b| (b * n / count, ((b + 1) * n / count).max(b * n / count + 1)))
        .collect()
}

/// Heatmap of `values[row][col]` with rows along the vertical axis. With
/// `log_scale`, colors follow `log10` of values floored at `max * 1e-6`.
#[allow(clippy::too_many_arguments)]
pub fn heatmap(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    xs: &[f64],
    ys: &[f64],
    values: &[Vec<f64>],
    log_scale: bool,
    color_label: &str,
) -> String {
    let x = padded(
        xs.first().copied().unwrap_or(0.0),
        xs.last().copied().unwrap_or(1.0),
    );
    let y = padded(
        ys.first().copied().unwrap_or(0.0),
        ys.last().copied().unwrap_or(1.0),
    );
    let frame = Frame { x, y };
    let (lo, hi) = finite_range(values.iter().flatten().copied()).unwrap_or((0.0, 1.0));
    let transform = |v: f64| -> f64 {
        if log_scale {
            let floor = (hi * 1e-6).max(f64::MIN_POSITIVE);
            v.max(floor).log10()
        } else {
            v
        }
    };
    let (tlo, thi) = padded(transform(lo.max(if log_scale { hi * 1e-6 } else { lo })), transform(hi));
    let mut out = header();
    let xb = bins(xs.len());
    let yb = bins(ys.len());
    let edge = |grid: &[f64], i: usize| -> f64 {
        if grid.len() < 2 {
            return grid.first().copied().unwrap_or(0.0);
        }
        if i == 0 {
            grid[0]
        } else if i >= grid.len() {
            grid[grid.len() - 1]
        } else {
            0.5 * (grid[i - 1] + grid[i])
        }
    };
    for &(r0, r1) in &yb {
        for &(c0, c1) in &xb {
            let mut v = f64::NEG_INFINITY;
            for row in &values[r0..r1] {
                for val in &row[c0..c1] {
                    if val.is_finite() {
                        v = v.max(*val);
                    }
                }
            }
            let color = ramp((transform(v) - tlo) / (thi - tlo));
            let (px0, px1) = (frame.px(edge(xs, c0)), frame.px(edge(xs, c1)));
            let (py0, py1) = (frame.py(edge(ys, r1)), frame.py(edge(ys, r0)));
            let _ = writeln!(
                out,
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{color}"/>"#,
                num(px0),
                num(py0),
                num((px1 - px0).max(0.5)),
                num((py1 - py0).max(0.5))
            );
        }
    }
    frame.axes(&mut out, title, xlabel, ylabel);
    let bar_x = WIDTH - RIGHT + 20.0;
    let steps = 64;
    let span = HEIGHT - TOP - BOTTOM;
    for k in 0..steps {
        let f = k as f64 / (steps - 1) as f64;
        let yk = HEIGHT - BOTTOM - (k + 1) as f64 * span / steps as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="16" height="{}" fill="{}"/>"#,
            num(bar_x),
            num(yk),
            num(span / steps as f64 + 0.5),
            ramp(f)
        );
    }
    for (f, v) in [(0.0, tlo), (1.0, thi)] {
        let label = if log_scale { format!("1e{v:.1}") } else { tick_label(v) };
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}">{}</text>"#,
            num(bar_x + 20.0),
            num(HEIGHT - BOTTOM - f * span + 4.0),
            label
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        num(bar_x + 8.0),
        num(TOP - 6.0),
        escape(color_label)
    );
    out.push_str("</svg>\n");
    out
}
