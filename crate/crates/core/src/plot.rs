//! Minimal static SVG figures. Output is deterministic text.

use std::fmt::Write;

use crate::adversarial::SweepTable;
use crate::bench::ClassificationResult;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 300.0;
const MARGIN: f64 = 50.0;

struct Axes {
    x0: f64,
    y0: f64,
    xr: (f64, f64),
    yr: (f64, f64),
}

impl Axes {
    fn px(&self, x: f64) -> f64 {
        self.x0 + MARGIN + (x - self.xr.0) / span(self.xr) * (PANEL_W - 1.5 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        self.y0 + PANEL_H - MARGIN - (y - self.yr.0) / span(self.yr) * (PANEL_H - 1.5 * MARGIN)
    }

    fn frame(&self, out: &mut String, title: &str, xlabel: &str, ylabel: &str) {
        let (l, r) = (self.px(self.xr.0), self.px(self.xr.1));
        let (b, t) = (self.py(self.yr.0), self.py(self.yr.1));
        let _ = writeln!(
            out,
            r#"<rect x="{l:.2}" y="{t:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            r - l,
            b - t
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13">{}</text>"#,
            (l + r) / 2.0,
            t - 8.0,
            escape(title)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="11">{}</text>"#,
            (l + r) / 2.0,
            b + 32.0,
            escape(xlabel)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" transform="rotate(-90 {:.2} {:.2})" text-anchor="middle">{}</text>"#,
            l - 36.0,
            (t + b) / 2.0,
            l - 36.0,
            (t + b) / 2.0,
            escape(ylabel)
        );
    }

    fn ticks(&self, out: &mut String, xs: &[(f64, String)], ys: &[(f64, String)]) {
        let b = self.py(self.yr.0);
        let l = self.px(self.xr.0);
        for (x, label) in xs {
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="9">{}</text>"#,
                self.px(*x),
                b + 13.0,
                escape(label)
            );
        }
        for (y, label) in ys {
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="9">{}</text>"#,
                l - 4.0,
                self.py(*y) + 3.0,
                escape(label)
            );
        }
    }

    fn polyline(&self, out: &mut String, pts: &[(f64, f64)], color: &str, extra: &str) {
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y))).collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{extra}/>"#,
            coords.join(" ")
        );
    }
}

fn span(r: (f64, f64)) -> f64 {
    if r.1 > r.0 {
        r.1 - r.0
    } else {
        1.0
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

fn legend(out: &mut String, x: f64, y: f64, labels: &[String]) {
    for (k, label) in labels.iter().enumerate() {
        let yy = y + 14.0 * k as f64;
        let color = PALETTE[k % PALETTE.len()];
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{yy:.2}" x2="{:.2}" y2="{yy:.2}" stroke="{color}" stroke-width="2"/>"#,
            x + 16.0
        );
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="10">{}</text>"#, x + 20.0, yy + 3.0, escape(label));
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Log-log plot of regret against `T`, one curve per learner.
pub fn sweep_svg(table: &SweepTable, title: &str) -> String {
    let positive: Vec<_> = table.rows.iter().filter(|r| r.regret > 0.0).collect();
    let xr = range(positive.iter().map(|r| (r.horizon as f64).log2()));
    let yr = range(positive.iter().map(|r| r.regret.log2()));
    let axes = Axes { x0: 0.0, y0: 0.0, xr: (xr.0.floor(), xr.1.ceil()), yr: (yr.0.floor(), yr.1.ceil()) };
    let mut out = header(PANEL_W + 160.0, PANEL_H);
    axes.frame(&mut out, title, "T (log2)", "dynamic regret (log2)");
    let xs: Vec<(f64, String)> = (axes.xr.0 as i64..=axes.xr.1 as i64).map(|k| (k as f64, format!("2^{k}"))).collect();
    let ys: Vec<(f64, String)> = (axes.yr.0 as i64..=axes.yr.1 as i64)
        .step_by(2)
        .map(|k| (k as f64, format!("2^{k}")))
        .collect();
    axes.ticks(&mut out, &xs, &ys);
    let mut labels = Vec::new();
    for (k, (name, slope)) in table.slopes.iter().enumerate() {
        let pts: Vec<(f64, f64)> = positive
            .iter()
            .filter(|r| &r.learner == name)
            .map(|r| ((r.horizon as f64).log2(), r.regret.log2()))
            .collect();
        if pts.is_empty() {
            continue;
        }
        let color = PALETTE[k % PALETTE.len()];
        axes.polyline(&mut out, &pts, color, "");
        for &(x, y) in &pts {
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, axes.px(x), axes.py(y));
        }
        labels.push(match slope {
            Some(s) => format!("{name} (slope {s:.3})"),
            None => name.clone(),
        });
    }
    legend(&mut out, PANEL_W + 5.0, 40.0, &labels);
    out.push_str("</svg>\n");
    out
}

/// Side-by-side panels of `F(w_t)`: mean curve per learner, a min/max band
/// when there is more than one seed, and the optimum as a dotted line.
pub fn traces_svg(panels: &[(&str, &ClassificationResult)]) -> String {
    let mut out = header(PANEL_W * panels.len() as f64 + 170.0, PANEL_H);
    let mut labels = Vec::new();
    for (p, (title, res)) in panels.iter().enumerate() {
        let xr = (0.0, *res.steps.last().unwrap_or(&1) as f64);
        let ymax = res.arms.iter().flat_map(|a| a.max()).fold(1.0_f64, f64::max);
        let axes = Axes { x0: PANEL_W * p as f64, y0: 0.0, xr, yr: (0.0, ymax.max(res.f_star) * 1.05) };
        axes.frame(&mut out, title, "step", "F(w)");
        let xs: Vec<(f64, String)> = (0..=4).map(|k| (xr.1 * k as f64 / 4.0, format!("{}", (xr.1 * k as f64 / 4.0) as u64))).collect();
        let ys: Vec<(f64, String)> = (0..=4).map(|k| (axes.yr.1 * k as f64 / 4.0, format!("{:.2}", axes.yr.1 * k as f64 / 4.0))).collect();
        axes.ticks(&mut out, &xs, &ys);
        let steps: Vec<f64> = res.steps.iter().map(|&s| s as f64).collect();
        for (k, arm) in res.arms.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            if arm.runs.len() > 1 {
                let (lo, hi) = (arm.min(), arm.max());
                let mut pts: Vec<String> =
                    steps.iter().zip(&hi).map(|(&x, &y)| format!("{:.2},{:.2}", axes.px(x), axes.py(y))).collect();
                pts.extend(steps.iter().zip(&lo).rev().map(|(&x, &y)| format!("{:.2},{:.2}", axes.px(x), axes.py(y))));
                let _ = writeln!(out, r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#, pts.join(" "));
            }
            let mean: Vec<(f64, f64)> = steps.iter().copied().zip(arm.mean()).collect();
            axes.polyline(&mut out, &mean, color, "");
            if p == 0 {
                labels.push(arm.label.clone());
            }
        }
        axes.polyline(&mut out, &[(xr.0, res.f_star), (xr.1, res.f_star)], "black", r#" stroke-dasharray="2,3""#);
    }
    labels.push("optimum".into());
    legend(&mut out, PANEL_W * panels.len() as f64 + 5.0, 40.0, &labels);
    out.push_str("</svg>\n");
    out
}
