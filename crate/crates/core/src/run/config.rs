//! Run configuration: defaults, a flat key-value file, command-line overrides.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::channel::NoiseLevel;
use crate::error::{Error, Result};
use crate::geometry::VehicleLayout;
use crate::measurement::sampler::{FrontEndMode, SimSetup};
use crate::method::Method;
use crate::scenarios::{ScenarioId, ScenarioSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioSpec,
    pub methods: Vec<Method>,
    pub conditions: Vec<NoiseLevel>,
    pub trials: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub emit_plots: bool,
    /// AoA1 interval in frames.
    pub aoa1_interval_frames: usize,
    pub setup: SimSetup,
}

impl RunConfig {
    pub fn new(id: ScenarioId) -> Self {
        Self {
            scenario: ScenarioSpec::defaults(id),
            methods: Method::ALL.to_vec(),
            conditions: vec![NoiseLevel::LowNoise, NoiseLevel::HighNoise],
            trials: 1000,
            seed: 0,
            out_dir: PathBuf::from("out"),
            emit_plots: false,
            aoa1_interval_frames: 1,
            setup: SimSetup::default(),
        }
    }
}

/// Every key a run file may contain. Unknown keys are rejected.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunOverrides {
    pub scenario: Option<String>,
    pub methods: Option<Vec<String>>,
    pub conditions: Option<Vec<String>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub plots: Option<bool>,
    pub aoa1_interval_frames: Option<usize>,
    /// `correlator` or `waveform`.
    pub front_end: Option<String>,
    pub odometry_sigma: Option<f64>,
    pub heading_sigma_deg: Option<f64>,
    pub tau_up: Option<f64>,
    pub relay_offset: Option<f64>,
    // Scenario kinematics.
    pub duration: Option<f64>,
    pub rate: Option<f64>,
    pub lane_width: Option<f64>,
    pub vehicle_length: Option<f64>,
    pub wheelbase: Option<f64>,
    pub ego_speed: Option<f64>,
    pub target_speed: Option<f64>,
    pub target_accel: Option<f64>,
    pub initial_gap: Option<f64>,
    pub initial_lateral: Option<f64>,
    pub final_lateral: Option<f64>,
    pub peak_heading_deg: Option<f64>,
    pub peak_time: Option<f64>,
}

impl RunOverrides {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_str(&text)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn from_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Fields set here replace those in `base`.
    pub fn merge(self, base: RunOverrides) -> RunOverrides {
        macro_rules! pick {
            ($($f:ident),*) => { RunOverrides { $( $f: self.$f.or(base.$f), )* } };
        }
        pick!(
            scenario, methods, conditions, trials, seed, out, plots, aoa1_interval_frames, front_end,
            odometry_sigma, heading_sigma_deg, tau_up, relay_offset, duration, rate, lane_width,
            vehicle_length, wheelbase, ego_speed, target_speed, target_accel, initial_gap,
            initial_lateral, final_lateral, peak_heading_deg, peak_time
        )
    }

    /// Builds a configuration on top of the defaults.
    pub fn resolve(self) -> Result<RunConfig> {
        let id: ScenarioId = self
            .scenario
            .as_deref()
            .ok_or_else(|| Error::Config("no scenario given".into()))?
            .parse()?;
        let mut c = RunConfig::new(id);
        if let Some(m) = &self.methods {
            c.methods = parse_list(m)?;
        }
        if let Some(m) = &self.conditions {
            c.conditions = parse_list(m)?;
        }
        macro_rules! set {
            ($dst:expr, $src:ident) => {
                if let Some(v) = self.$src.clone() {
                    $dst = v;
                }
            };
        }
        set!(c.trials, trials);
        set!(c.seed, seed);
        set!(c.out_dir, out);
        set!(c.emit_plots, plots);
        set!(c.aoa1_interval_frames, aoa1_interval_frames);
        set!(c.setup.sensor.odometry_sigma, odometry_sigma);
        set!(c.setup.tau_up, tau_up);
        set!(c.setup.relay_offset, relay_offset);
        if let Some(h) = self.heading_sigma_deg {
            c.setup.sensor.heading_sigma = h.to_radians();
        }
        if let Some(f) = &self.front_end {
            c.setup.mode = match f.trim().to_ascii_lowercase().as_str() {
                "correlator" => FrontEndMode::Correlator,
                "waveform" => FrontEndMode::Waveform,
                other => return Err(Error::Config(format!("unknown front_end '{other}'"))),
            };
        }
        let s = &mut c.scenario;
        set!(s.duration, duration);
        set!(s.rate, rate);
        set!(s.lane_width, lane_width);
        set!(s.vehicle_length, vehicle_length);
        set!(s.wheelbase, wheelbase);
        set!(s.ego_speed, ego_speed);
        set!(s.target_speed, target_speed);
        set!(s.target_accel, target_accel);
        set!(s.initial_gap, initial_gap);
        set!(s.initial_lateral, initial_lateral);
        set!(s.final_lateral, final_lateral);
        if let Some(h) = self.peak_heading_deg {
            s.peak_heading = h.to_radians();
        }
        set!(s.peak_time, peak_time);
        s.lookahead_frames = c.aoa1_interval_frames;
        c.setup.estimation_interval = 1.0 / s.rate;
        s.validate()?;
        let l = c.setup.layout;
        c.setup.layout = VehicleLayout::new(l.rx_separation_l, l.tx_separation_d, s.vehicle_length)?;
        Ok(c)
    }
}

/// Parses names, accepting comma-separated entries inside each item.
pub fn parse_list<T: std::str::FromStr<Err = Error>>(items: &[String]) -> Result<Vec<T>> {
    items
        .iter()
        .flat_map(|s| s.split(','))
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}
