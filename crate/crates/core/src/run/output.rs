//! CSV and text summaries of a run.

use std::io::Write;

use crate::channel::NoiseLevel;
use crate::error::{Error, Result};
use crate::method::Method;

use super::{ResultRow, RunConfig};

pub const RESULT_COLUMNS: [&str; 21] = [
    "method",
    "condition",
    "time_s",
    "x11",
    "y11",
    "x12",
    "y12",
    "sigma_w_1",
    "sigma_w_2",
    "sigma_w_3",
    "sigma_w_4",
    "sigma_w_5",
    "sigma_w_6",
    "sqrt_crlb_x11",
    "sqrt_crlb_y11",
    "sqrt_crlb_x12",
    "sqrt_crlb_y12",
    "sqrt_crlb_x11_dt",
    "sqrt_crlb_y11_dt",
    "fim_rank",
    "fim_cond",
];

const BOUND_PARAMS: [&str; 6] = ["x11", "y11", "x12", "y12", "x11_dt", "y11_dt"];

pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.8e}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

pub fn write_results_csv<W: Write>(w: W, rows: &[ResultRow]) -> Result<()> {
    let err = |e: csv::Error| Error::Config(e.to_string());
    let mut out = csv::Writer::from_writer(w);
    out.write_record(RESULT_COLUMNS).map_err(err)?;
    for r in rows {
        let mut rec = vec![r.method.name().to_string(), r.condition.name().to_string(), fmt_float(r.time)];
        rec.extend(r.truth.iter().map(|&v| fmt_float(v)));
        rec.extend((0..6).map(|k| opt(r.sigma_w.get(k).copied())));
        rec.extend(BOUND_PARAMS.iter().map(|p| opt(r.sqrt_crlb(p))));
        rec.push(r.bound.rank.to_string());
        rec.push(fmt_float(r.bound.condition_number));
        out.write_record(&rec).map_err(err)?;
    }
    out.flush().map_err(|e| Error::Config(e.to_string()))
}

/// Frame statistics of one method under one condition.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: Method,
    pub condition: NoiseLevel,
    pub frames: usize,
    pub rank_deficient: usize,
    /// `(median, p95)` of √CRLB for x11 and y11 over full-rank frames.
    pub x11: Option<(f64, f64)>,
    pub y11: Option<(f64, f64)>,
}

/// Linear-interpolated percentile of sorted data, `q` in [0, 1].
pub fn percentile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64))
}

fn stats(rows: &[&ResultRow], p: &str) -> Option<(f64, f64)> {
    let mut v: Vec<f64> = rows.iter().filter_map(|r| r.sqrt_crlb(p)).collect();
    v.sort_by(f64::total_cmp);
    Some((percentile(&v, 0.5)?, percentile(&v, 0.95)?))
}

pub fn summarize(rows: &[ResultRow]) -> Vec<MethodSummary> {
    let mut keys: Vec<(Method, NoiseLevel)> = Vec::new();
    for r in rows {
        if !keys.contains(&(r.method, r.condition)) {
            keys.push((r.method, r.condition));
        }
    }
    keys.into_iter()
        .map(|(method, condition)| {
            let sel: Vec<&ResultRow> = rows.iter().filter(|r| r.method == method && r.condition == condition).collect();
            MethodSummary {
                method,
                condition,
                frames: sel.len(),
                rank_deficient: sel.iter().filter(|r| !r.bound.is_full_rank()).count(),
                x11: stats(&sel, "x11"),
                y11: stats(&sel, "y11"),
            }
        })
        .collect()
}

pub fn write_summary<W: Write>(mut w: W, config: &RunConfig, summaries: &[MethodSummary]) -> std::io::Result<()> {
    writeln!(w, "scenario: {}", config.scenario.id)?;
    writeln!(w, "frames: {} at {} Hz", config.scenario.frame_count(), config.scenario.rate)?;
    writeln!(w, "trials per frame: {}", config.trials)?;
    writeln!(w, "seed: {}", config.seed)?;
    writeln!(w)?;
    writeln!(
        w,
        "{:<6} {:<10} {:>7} {:>9} {:>14} {:>14} {:>14} {:>14}",
        "method", "condition", "frames", "deficient", "x11 median", "x11 p95", "y11 median", "y11 p95"
    )?;
    let cell = |v: Option<(f64, f64)>, second: bool| match v {
        Some((a, b)) => format!("{:.4e}", if second { b } else { a }),
        None => "-".into(),
    };
    for s in summaries {
        writeln!(
            w,
            "{:<6} {:<10} {:>7} {:>9} {:>14} {:>14} {:>14} {:>14}",
            s.method.name(),
            s.condition.name(),
            s.frames,
            s.rank_deficient,
            cell(s.x11, false),
            cell(s.x11, true),
            cell(s.y11, false),
            cell(s.y11, true)
        )?;
    }
    writeln!(w)?;
    writeln!(w, "values are sqrt(CRLB) in meters over full-rank frames")?;
    Ok(())
}
