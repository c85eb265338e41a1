//! Standalone SVG plot of √CRLB against time on a logarithmic axis.

use std::fmt::Write;

use crate::channel::NoiseLevel;
use crate::method::Method;
use crate::scenarios::ScenarioId;

use super::ResultRow;

const WIDTH: f64 = 900.0;
const PANEL_H: f64 = 300.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 50.0;
const GAP: f64 = 60.0;

fn color(m: Method) -> &'static str {
    match m {
        Method::PDoA => "#1f77b4",
        Method::RToF => "#d62728",
        Method::AoA2 => "#2ca02c",
        Method::AoA1 => "#9467bd",
    }
}

/// Two stacked panels, x11 above y11, one line per method.
pub fn render_svg(rows: &[ResultRow], scenario: ScenarioId, condition: NoiseLevel) -> String {
    let sel: Vec<&ResultRow> = rows.iter().filter(|r| r.condition == condition).collect();
    let height = TOP + 2.0 * PANEL_H + GAP + 50.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{} / {}</text>"#,
        WIDTH / 2.0,
        scenario.name(),
        condition.name()
    );
    let (t0, t1) = sel
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r.time), b.max(r.time)));
    let t1 = if t1 > t0 { t1 } else { t0 + 1.0 };
    for (k, param) in ["x11", "y11"].iter().enumerate() {
        let top = TOP + k as f64 * (PANEL_H + GAP);
        panel(&mut s, &sel, param, top, (t0, t1));
    }
    let mut methods: Vec<Method> = Vec::new();
    for r in &sel {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    for (k, m) in methods.iter().enumerate() {
        let y = TOP + 20.0 + 20.0 * k as f64;
        let x = WIDTH - RIGHT + 20.0;
        let _ = writeln!(
            s,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            x + 25.0,
            color(*m),
            x + 32.0,
            y + 4.0,
            m.name()
        );
    }
    s.push_str("</svg>\n");
    s
}

fn panel(s: &mut String, rows: &[&ResultRow], param: &str, top: f64, (t0, t1): (f64, f64)) {
    let w = WIDTH - LEFT - RIGHT;
    let vals: Vec<f64> = rows
        .iter()
        .filter_map(|r| r.sqrt_crlb(param))
        .filter(|v| *v > 0.0 && v.is_finite())
        .collect();
    let (mut lo, mut hi) = vals
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v.log10()), b.max(v.log10())));
    if !lo.is_finite() {
        (lo, hi) = (-3.0, 0.0);
    }
    let (lo, hi) = (lo.floor(), hi.ceil().max(lo.floor() + 1.0));
    let px = |t: f64| LEFT + (t - t0) / (t1 - t0) * w;
    let py = |v: f64| top + PANEL_H - (v.log10() - lo) / (hi - lo) * PANEL_H;

    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{top}" width="{w}" height="{PANEL_H}" fill="none" stroke="black"/>"#
    );
    for d in lo as i32..=hi as i32 {
        let y = py(10f64.powi(d));
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.1}" x2="{}" y2="{y:.1}" stroke="#ddd"/><text x="{}" y="{:.1}" text-anchor="end">1e{d}</text>"##,
            LEFT + w,
            LEFT - 6.0,
            y + 4.0
        );
    }
    for k in 0..=5 {
        let t = t0 + (t1 - t0) * k as f64 / 5.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{t:.2}</text>"#,
            px(t),
            top + PANEL_H + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">time (s)</text>"#,
        LEFT + w / 2.0,
        top + PANEL_H + 34.0
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(20,{}) rotate(-90)" text-anchor="middle">sqrt CRLB {param} (m)</text>"#,
        top + PANEL_H / 2.0
    );

    let mut methods: Vec<Method> = Vec::new();
    for r in rows {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    for m in methods {
        // Missing bounds break the line.
        let mut segment: Vec<String> = Vec::new();
        let flush = |seg: &mut Vec<String>, s: &mut String| {
            if seg.len() > 1 {
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                    color(m),
                    seg.join(" ")
                );
            }
            seg.clear();
        };
        for r in rows.iter().filter(|r| r.method == m) {
            match r.sqrt_crlb(param).filter(|v| *v > 0.0 && v.is_finite()) {
                Some(v) => segment.push(format!("{:.1},{:.1}", px(r.time), py(v))),
                None => flush(&mut segment, s),
            }
        }
        flush(&mut segment, s);
    }
}
