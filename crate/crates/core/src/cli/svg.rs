//! Minimal SVG line plots for bundle reports.

use std::fmt::Write as _;

use crate::kinematics::{finite_diff_accel, finite_diff_speed, Curve, KinematicLimits};

const W: f64 = 640.0;
const H: f64 = 300.0;
const PAD: f64 = 48.0;
const MAX_POINTS: usize = 4000;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Series<'a> {
    pub label: &'a str,
    pub xy: Vec<(f64, f64)>,
}

/// Keeps at most `MAX_POINTS` evenly strided samples, always including the last.
fn decimate(xy: &[(f64, f64)]) -> Vec<(f64, f64)> {
    if xy.len() <= MAX_POINTS {
        return xy.to_vec();
    }
    let step = xy.len().div_ceil(MAX_POINTS);
    let mut out: Vec<_> = xy.iter().step_by(step).copied().collect();
    if let Some(&last) = xy.last() {
        out.push(last);
    }
    out
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    top: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * PAD)
    }
    fn py(&self, y: f64) -> f64 {
        self.top + H - PAD - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * PAD)
    }
}

fn bounds(series: &[Series], hlines: &[(f64, &str)], equal: bool) -> (f64, f64, f64, f64) {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for &(x, y) in &s.xy {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
    }
    for &(h, _) in hlines {
        y0 = y0.min(h);
        y1 = y1.max(h * 1.05);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 <= 0.0 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 <= 0.0 {
        y1 = y0 + 1.0;
    }
    if equal {
        let half = 0.5 * (x1 - x0).max(y1 - y0);
        let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
        return (cx - half, cx + half, cy - half, cy + half);
    }
    (x0, x1, y0, y1)
}

fn panel(svg: &mut String, top: f64, title: &str, xlabel: &str, series: &[Series], hlines: &[(f64, &str)], equal: bool) {
    let (x0, x1, y0, y1) = bounds(series, hlines, equal);
    let f = Frame { x0, x1, y0, y1, top };
    let _ = writeln!(
        svg,
        r##"<rect x="{PAD}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#888"/>"##,
        top + PAD,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let _ = writeln!(svg, r##"<text x="{:.1}" y="{:.1}" font-size="14" text-anchor="middle">{title}</text>"##, W / 2.0, top + 20.0);
    let _ = writeln!(svg, r##"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{xlabel}</text>"##, W / 2.0, top + H - 12.0);
    let _ = writeln!(svg, r##"<text x="4" y="{:.1}" font-size="10">{y1:.3e}</text>"##, top + PAD + 4.0);
    let _ = writeln!(svg, r##"<text x="4" y="{:.1}" font-size="10">{y0:.3e}</text>"##, top + H - PAD);
    let _ = writeln!(svg, r##"<text x="{PAD}" y="{:.1}" font-size="10">{x0:.3e}</text>"##, top + H - PAD + 14.0);
    let _ = writeln!(svg, r##"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{x1:.3e}</text>"##, W - PAD, top + H - PAD + 14.0);
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut pts = String::new();
        for &(x, y) in &decimate(&s.xy) {
            let _ = write!(pts, "{:.2},{:.2} ", f.px(x), f.py(y));
        }
        let _ = writeln!(svg, r##"<polyline class="series" fill="none" stroke="{color}" stroke-width="1" points="{}"/>"##, pts.trim_end());
        let _ = writeln!(
            svg,
            r##"<text x="{:.1}" y="{:.1}" font-size="10" fill="{color}">{}</text>"##,
            PAD + 6.0,
            top + PAD + 14.0 + 12.0 * i as f64,
            s.label
        );
    }
    for &(h, label) in hlines {
        let y = f.py(h);
        let _ = writeln!(
            svg,
            r##"<line class="limit" x1="{PAD}" y1="{y:.2}" x2="{:.1}" y2="{y:.2}" stroke="#000" stroke-dasharray="6,4"/>"##,
            W - PAD
        );
        let _ = writeln!(svg, r##"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{label} = {h:.4e}</text>"##, W - PAD - 4.0, y - 4.0);
    }
}

fn document(height: f64, body: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{height}\" viewBox=\"0 0 {W} {height}\">\n{body}</svg>\n"
    )
}

/// Overlay of the first two k-space axes of each curve, m⁻¹.
pub fn trajectory_svg(curves: &[(&str, &Curve)]) -> String {
    let series: Vec<Series> = curves
        .iter()
        .map(|(label, c)| Series {
            label,
            xy: c.points().map(|p| (p[0], if p.len() > 1 { p[1] } else { 0.0 })).collect(),
        })
        .collect();
    let mut body = String::new();
    panel(&mut body, 0.0, "trajectories", "k₀ (m⁻¹) vs k₁ (m⁻¹)", &series, &[], true);
    document(H, &body)
}

fn norms(flat: &[f64], d: usize, lim: &KinematicLimits) -> Vec<f64> {
    flat.chunks(d).map(|v| lim.norm_mode.norm(v)).collect()
}

/// Speed and acceleration profiles with the limits `α` and `β` drawn as
/// horizontal lines.
pub fn profile_svg(label: &str, c: &Curve, lim: &KinematicLimits) -> String {
    let d = c.dim();
    let dt = c.dt();
    let mut body = String::new();
    let speed = if c.len() >= 2 { norms(&finite_diff_speed(c), d, lim) } else { vec![] };
    let accel = if c.len() >= 3 { norms(&finite_diff_accel(c), d, lim) } else { vec![] };
    let sp = Series {
        label,
        xy: speed.iter().enumerate().map(|(i, &v)| ((i as f64 + 0.5) * dt * 1e3, v)).collect(),
    };
    let ac = Series {
        label,
        xy: accel.iter().enumerate().map(|(i, &v)| ((i + 1) as f64 * dt * 1e3, v)).collect(),
    };
    panel(&mut body, 0.0, "speed (m⁻¹ s⁻¹)", "t (ms)", &[sp], &[(lim.alpha, "α")], false);
    panel(&mut body, H, "acceleration (m⁻¹ s⁻²)", "t (ms)", &[ac], &[(lim.beta, "β")], false);
    document(2.0 * H, &body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::NormMode;

    #[test]
    fn profile_has_both_limit_lines() {
        let c = Curve::from_points(&[[0.0, 0.0], [1.0, 0.0], [3.0, 0.0], [6.0, 1.0]], 1e-3).unwrap();
        let lim = KinematicLimits::new(4000.0, 2e6, NormMode::RotationInvariant).unwrap();
        let s = profile_svg("x", &c, &lim);
        assert_eq!(s.matches("class=\"limit\"").count(), 2);
        assert!(s.contains("α = 4.0000e3"));
        assert!(s.contains("β = 2.0000e6"));
        let t = trajectory_svg(&[("a", &c), ("b", &c)]);
        assert_eq!(t.matches("class=\"series\"").count(), 2);
    }

    #[test]
    fn decimation_keeps_endpoints() {
        let xy: Vec<_> = (0..10_001).map(|i| (i as f64, 0.0)).collect();
        let d = decimate(&xy);
        assert!(d.len() <= MAX_POINTS + 1);
        assert_eq!(d[0].0, 0.0);
        assert_eq!(d.last().unwrap().0, 10_000.0);
    }
}
