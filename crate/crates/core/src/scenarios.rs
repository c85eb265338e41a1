//! Driving scenarios as ego/target pose trajectories.
//!
//! World frame: the road runs along +y, lanes are centered at multiples of the
//! lane width along x (ego lane at 0, left lane negative). Headings are
//! counterclockwise from +x, so driving straight is π/2. Gaps are bumper to
//! bumper, i.e. from the ego's front lamps to the target's rear lamps.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::Pose2D;
use crate::measurement::sampler::{FrameSnapshot, PosePair};

/// Largest steering angle the bicycle model accepts.
pub const MAX_STEERING: f64 = FRAC_PI_2 / 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScenarioId {
    /// Same lane, parallel, target pulling away.
    PlatoonStraight,
    /// Target cuts in diagonally from the left lane.
    PlatoonJoin,
    /// Target brakes hard while changing two lanes to the right across the ego lane.
    LaneChangeBraking,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 3] = [
        ScenarioId::PlatoonStraight,
        ScenarioId::PlatoonJoin,
        ScenarioId::LaneChangeBraking,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioId::PlatoonStraight => "platoon-straight",
            ScenarioId::PlatoonJoin => "platoon-join",
            ScenarioId::LaneChangeBraking => "lane-change-braking",
        }
    }

    pub fn number(self) -> u8 {
        self as u8 + 1
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        ScenarioId::ALL
            .into_iter()
            .find(|id| {
                let n = id.number().to_string();
                s == id.name() || s == n || s == format!("s{n}") || s == format!("scenario{n}")
            })
            .ok_or_else(|| Error::Config(format!("unknown scenario '{s}'")))
    }
}

/// Kinematic parameters of a scenario. None of the defaults are measured data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioSpec {
    pub id: ScenarioId,
    pub duration: f64,
    pub rate: f64,
    pub lane_width: f64,
    pub vehicle_length: f64,
    pub wheelbase: f64,
    pub ego_speed: f64,
    /// Initial target speed along its own heading.
    pub target_speed: f64,
    /// Target acceleration along its heading (negative brakes).
    pub target_accel: f64,
    /// Initial bumper-to-bumper gap.
    pub initial_gap: f64,
    /// Initial lateral offset of the target center from the ego center.
    pub initial_lateral: f64,
    /// Lateral offset reached at the end of the cut-in.
    pub final_lateral: f64,
    /// Peak clockwise heading offset during the lane change, rad.
    pub peak_heading: f64,
    /// Time of the peak heading offset, s.
    pub peak_time: f64,
    /// Extra frames generated past the end for interval-based front-ends.
    pub lookahead_frames: usize,
}

impl ScenarioSpec {
    pub fn defaults(id: ScenarioId) -> Self {
        let base = ScenarioSpec {
            id,
            duration: 6.5,
            rate: 200.0,
            lane_width: 3.5,
            vehicle_length: 5.0,
            wheelbase: 2.8,
            ego_speed: 25.0,
            target_speed: 27.0,
            target_accel: 0.0,
            initial_gap: 5.0,
            initial_lateral: 0.0,
            final_lateral: 0.0,
            peak_heading: 0.0,
            peak_time: 0.2,
            lookahead_frames: 1,
        };
        match id {
            ScenarioId::PlatoonStraight => base,
            ScenarioId::PlatoonJoin => ScenarioSpec {
                duration: 8.0,
                target_speed: 25.5,
                initial_gap: 4.0,
                initial_lateral: -3.5,
                final_lateral: 0.0,
                ..base
            },
            ScenarioId::LaneChangeBraking => ScenarioSpec {
                duration: 1.5,
                ego_speed: 20.0,
                target_speed: 25.0,
                target_accel: -6.0,
                initial_gap: 2.0,
                initial_lateral: -3.5,
                peak_heading: 0.6,
                peak_time: 0.2,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("duration", self.duration),
            ("rate", self.rate),
            ("lane_width", self.lane_width),
            ("vehicle_length", self.vehicle_length),
            ("wheelbase", self.wheelbase),
            ("peak_time", self.peak_time),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.ego_speed >= 0.0 && self.target_speed >= 0.0) {
            return Err(Error::Config("speeds must be non-negative".into()));
        }
        let frames = self.duration * self.rate;
        if (frames - frames.round()).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "duration·rate must be an integer, got {frames}"
            )));
        }
        Ok(())
    }

    /// Number of frames excluding lookahead.
    pub fn frame_count(&self) -> usize {
        (self.duration * self.rate).round() as usize + 1
    }

    /// Reads a flat `key = value` file. `scenario` selects the defaults that
    /// the remaining keys override.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_kv_str(&text)
    }

    pub fn from_kv_str(text: &str) -> Result<Self> {
        let raw: RawSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let id = raw
            .scenario
            .as_deref()
            .ok_or_else(|| Error::Config("missing key 'scenario'".into()))?
            .parse()?;
        let spec = raw.apply(Self::defaults(id));
        spec.validate()?;
        Ok(spec)
    }
}

/// Optional overrides read from a key-value file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    scenario: Option<String>,
    duration: Option<f64>,
    rate: Option<f64>,
    lane_width: Option<f64>,
    vehicle_length: Option<f64>,
    wheelbase: Option<f64>,
    ego_speed: Option<f64>,
    target_speed: Option<f64>,
    target_accel: Option<f64>,
    initial_gap: Option<f64>,
    initial_lateral: Option<f64>,
    final_lateral: Option<f64>,
    /// Degrees.
    peak_heading_deg: Option<f64>,
    peak_time: Option<f64>,
    lookahead_frames: Option<usize>,
}

impl RawSpec {
    fn apply(self, mut s: ScenarioSpec) -> ScenarioSpec {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { s.$f = v; } )* };
        }
        set!(
            duration, rate, lane_width, vehicle_length, wheelbase, ego_speed, target_speed, target_accel,
            initial_gap, initial_lateral, final_lateral, peak_time, lookahead_frames
        );
        if let Some(h) = self.peak_heading_deg {
            s.peak_heading = h.to_radians();
        }
        s
    }
}

/// Pose plus forward speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub pose: Pose2D,
    pub speed: f64,
}

/// Kinematic bicycle update without lateral slip.
pub fn ackermann_step(state: VehicleState, steering: f64, wheelbase: f64, dt: f64) -> Result<VehicleState> {
    if !(steering.abs() < MAX_STEERING) {
        return Err(Error::Domain(format!(
            "steering {:.3}° outside ±45°",
            steering.to_degrees()
        )));
    }
    if !(dt > 0.0) || !(wheelbase > 0.0) {
        return Err(Error::Domain(format!("need dt > 0 and wheelbase > 0, got {dt}, {wheelbase}")));
    }
    let p = state.pose;
    let yaw_rate = state.speed / wheelbase * steering.tan();
    let pose = if yaw_rate.abs() < 1e-12 {
        Pose2D::new(
            p.x + state.speed * dt * p.heading.cos(),
            p.y + state.speed * dt * p.heading.sin(),
            p.heading,
        )
    } else {
        // Exact arc of radius v/ω.
        let h1 = p.heading + yaw_rate * dt;
        let r = state.speed / yaw_rate;
        Pose2D::new(
            p.x + r * (h1.sin() - p.heading.sin()),
            p.y - r * (h1.cos() - p.heading.cos()),
            h1,
        )
    };
    Ok(VehicleState {
        pose,
        speed: state.speed,
    })
}

/// Steering angle that produces `yaw_rate` at `speed`.
fn steering_for(yaw_rate: f64, speed: f64, wheelbase: f64) -> f64 {
    if speed <= 0.0 {
        0.0
    } else {
        (yaw_rate * wheelbase / speed).atan()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryFrame {
    pub time: f64,
    pub ego: Pose2D,
    pub target: Pose2D,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub spec: ScenarioSpec,
    frames: Vec<TrajectoryFrame>,
    main: usize,
}

impl Trajectory {
    /// Frames inside the scenario duration.
    pub fn frames(&self) -> &[TrajectoryFrame] {
        &self.frames[..self.main]
    }

    /// All frames, lookahead included.
    pub fn all_frames(&self) -> &[TrajectoryFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.main
    }

    pub fn is_empty(&self) -> bool {
        self.main == 0
    }

    /// Frame `i` with the poses `interval_frames` later attached when available.
    pub fn snapshot(&self, i: usize, interval_frames: usize) -> FrameSnapshot {
        let f = &self.frames[i];
        let later = (interval_frames > 0)
            .then(|| self.frames.get(i + interval_frames))
            .flatten()
            .map(|g| PosePair {
                ego: g.ego,
                target: g.target,
            });
        FrameSnapshot {
            time: f.time,
            now: PosePair {
                ego: f.ego,
                target: f.target,
            },
            later,
        }
    }

    /// Bumper gap along the ego heading and lateral offset to the right.
    pub fn gaps(&self, i: usize) -> (f64, f64) {
        let f = &self.frames[i];
        let d = f.target.position() - f.ego.position();
        let fwd = f.ego.forward();
        let right = f.ego.right();
        (
            d.x * fwd.x + d.y * fwd.y - self.spec.vehicle_length,
            d.x * right.x + d.y * right.y,
        )
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Config(e.to_string());
        out.write_record(["time_s", "ego_x", "ego_y", "ego_heading", "target_x", "target_y", "target_heading"])
            .map_err(io)?;
        for f in self.frames() {
            let row = [f.time, f.ego.x, f.ego.y, f.ego.heading, f.target.x, f.target.y, f.target.heading];
            out.write_record(row.iter().map(|v| format!("{v:.8e}"))).map_err(io)?;
        }
        out.flush().map_err(|e| Error::Config(e.to_string()))
    }
}

/// Clockwise heading offset of the lane-changing target at time `t`.
fn lane_change_offset(spec: &ScenarioSpec, t: f64) -> f64 {
    let s = t / spec.peak_time;
    spec.peak_heading * s * (1.0 - s).exp()
}

pub fn generate_scenario(spec: &ScenarioSpec) -> Result<Trajectory> {
    spec.validate()?;
    let main = spec.frame_count();
    let total = main + spec.lookahead_frames;
    let dt = 1.0 / spec.rate;
    let len = spec.vehicle_length;

    let mut ego = VehicleState {
        pose: Pose2D::new(0.0, 0.0, FRAC_PI_2),
        speed: spec.ego_speed,
    };
    let start_y = spec.initial_gap + len;
    let mut target = match spec.id {
        ScenarioId::PlatoonJoin => {
            // Straight diagonal at a fixed heading so the relative heading stays constant.
            let lateral_speed = (spec.final_lateral - spec.initial_lateral) / spec.duration;
            let heading = spec.target_speed.atan2(lateral_speed);
            VehicleState {
                pose: Pose2D::new(spec.initial_lateral, start_y, heading),
                speed: spec.target_speed.hypot(lateral_speed),
            }
        }
        _ => VehicleState {
            pose: Pose2D::new(spec.initial_lateral, start_y, FRAC_PI_2),
            speed: spec.target_speed,
        },
    };

    let mut frames = Vec::with_capacity(total);
    for k in 0..total {
        let t = k as f64 / spec.rate;
        frames.push(TrajectoryFrame {
            time: t,
            ego: ego.pose,
            target: target.pose,
        });
        ego = ackermann_step(ego, 0.0, spec.wheelbase, dt)?;
        let steering = match spec.id {
            ScenarioId::LaneChangeBraking => {
                // The heading offset follows a smooth pulse; steer to track it.
                let yaw_rate = -(lane_change_offset(spec, t + dt) - lane_change_offset(spec, t)) / dt;
                steering_for(yaw_rate, target.speed, spec.wheelbase)
            }
            _ => 0.0,
        };
        target = ackermann_step(target, steering, spec.wheelbase, dt)?;
        target.speed = (target.speed + spec.target_accel * dt).max(0.0);
    }
    Ok(Trajectory {
        spec: *spec,
        frames,
        main,
    })
}
