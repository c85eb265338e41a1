//! Sweeps a scenario over methods and channel conditions and writes the results.

pub mod config;
pub mod output;
pub mod plot;

pub use config::{RunConfig, RunOverrides};
pub use output::{write_results_csv, write_summary, MethodSummary, RESULT_COLUMNS};

use std::fs;
use std::path::PathBuf;

use rayon::prelude::*;

use crate::channel::{ChannelCondition, NoiseLevel};
use crate::crlb::{check_applicable, crlb_pipeline, CrlbResult};
use crate::error::{Error, Result};
use crate::geometry::relative_tx_positions;
use crate::method::Method;
use crate::scenarios::{generate_scenario, Trajectory};

/// One CSV row: a method under one condition at one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub method: Method,
    pub condition: NoiseLevel,
    pub time: f64,
    /// True `[x11, y11, x12, y12]` in the ego frame.
    pub truth: [f64; 4],
    /// Per-observation standard deviations, `inf` where a link dropped out.
    pub sigma_w: Vec<f64>,
    pub bound: CrlbResult,
}

impl ResultRow {
    /// Square root of the bound for a named parameter, `None` when the
    /// method does not estimate it or the information is rank deficient.
    pub fn sqrt_crlb(&self, param: &str) -> Option<f64> {
        let k = self.method.parameter_names().iter().position(|p| *p == param)?;
        self.bound.variances.as_ref().map(|v| v[k].sqrt())
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub summaries: Vec<MethodSummary>,
    pub files: Vec<PathBuf>,
}

/// Lists every reason the configuration cannot run. Empty means runnable.
pub fn validate(config: &RunConfig) -> Vec<String> {
    let mut problems = Vec::new();
    if config.methods.is_empty() {
        problems.push("no methods selected".to_string());
    }
    if config.conditions.is_empty() {
        problems.push("no channel conditions selected".to_string());
    }
    if config.trials < 2 {
        problems.push(format!("trials must be at least 2, got {}", config.trials));
    }
    if config.aoa1_interval_frames == 0 && config.methods.contains(&Method::AoA1) {
        problems.push("aoa1_interval_frames must be at least 1".to_string());
    }
    let trajectory = match generate_scenario(&config.scenario) {
        Ok(t) => t,
        Err(e) => {
            problems.push(e.to_string());
            return problems;
        }
    };
    for &m in &config.methods {
        if let Some(e) = first_violation(m, &trajectory, config.aoa1_interval_frames) {
            problems.push(format!("scenario {}: {e}", config.scenario.id));
        }
    }
    problems
}

fn first_violation(method: Method, t: &Trajectory, interval: usize) -> Option<Error> {
    (0..t.len()).find_map(|i| check_applicable(method, &t.snapshot(i, interval)).err())
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one (method, condition, frame) cell, independent of scheduling.
pub fn cell_seed(seed: u64, method: Method, condition: NoiseLevel, frame: usize) -> u64 {
    let m = Method::ALL.iter().position(|&x| x == method).unwrap_or(0) as u64;
    let c = condition as u64;
    splitmix64(splitmix64(splitmix64(seed) ^ m) ^ (c << 32 | frame as u64))
}

/// Computes every row in (method, condition, time) order without touching disk.
pub fn compute_rows(config: &RunConfig) -> Result<Vec<ResultRow>> {
    let problems = validate(config);
    if !problems.is_empty() {
        return Err(Error::Config(problems.join("; ")));
    }
    let trajectory = generate_scenario(&config.scenario)?;
    let n = trajectory.len();
    let cells: Vec<(Method, NoiseLevel, usize)> = config
        .methods
        .iter()
        .flat_map(|&m| {
            config
                .conditions
                .iter()
                .flat_map(move |&c| (0..n).map(move |i| (m, c, i)))
        })
        .collect();
    cells
        .into_par_iter()
        .map(|(method, condition, i)| {
            let frame = trajectory.snapshot(i, config.aoa1_interval_frames);
            let cond = ChannelCondition::from_level(condition);
            let seed = cell_seed(config.seed, method, condition, i);
            let (v, bound) = crlb_pipeline(method, &frame, &config.setup, &cond, config.trials, seed)?;
            let [p1, p2] = relative_tx_positions(&frame.now.ego, &frame.now.target, &config.setup.layout);
            Ok(ResultRow {
                method,
                condition,
                time: frame.time,
                truth: [p1.x, p1.y, p2.x, p2.y],
                sigma_w: v.variances.iter().map(|s| s.sqrt()).collect(),
                bound,
            })
        })
        .collect()
}

/// Runs the sweep and writes `results.csv`, `summary.txt`, `trajectory.csv`
/// and, when enabled, one plot per channel condition.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    let rows = compute_rows(config)?;
    let io = |e: std::io::Error| Error::Config(format!("{}: {e}", config.out_dir.display()));
    fs::create_dir_all(&config.out_dir).map_err(io)?;
    let mut files = Vec::new();

    let path = config.out_dir.join("results.csv");
    write_results_csv(fs::File::create(&path).map_err(io)?, &rows)?;
    files.push(path);

    let summaries = output::summarize(&rows);
    let path = config.out_dir.join("summary.txt");
    write_summary(fs::File::create(&path).map_err(io)?, config, &summaries).map_err(io)?;
    files.push(path);

    let path = config.out_dir.join("trajectory.csv");
    generate_scenario(&config.scenario)?.write_csv(fs::File::create(&path).map_err(io)?)?;
    files.push(path);

    if config.emit_plots {
        for &c in &config.conditions {
            let path = config.out_dir.join(format!("{}_{}.svg", config.scenario.id.name(), c.name()));
            let svg = plot::render_svg(&rows, config.scenario.id, c);
            fs::write(&path, svg).map_err(io)?;
            files.push(path);
        }
    }
    Ok(RunOutput { rows, summaries, files })
}
