//! Monte-Carlo sampling of the measured-parameter variances at one frame.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::pdoa::{check_tones, distance_difference};
use super::phasor::{CorrelatorSource, PhasorSource, WaveformSource};
use super::qrx::{qrx_trial, QrxLut, QrxTone};
use super::rtof::{rtof_trial, RtofLink, RtofParams};
use super::sensor::{ego_sensor_measurement, relative_motion, SensorNoise};
use crate::channel::{
    channel_gain, link_budget, summed_cells_noise_variance, ChannelCondition, QrxConfig,
    ToneComponent, TxConfig,
};
use crate::error::{Error, Result};
use crate::geometry::{pair_links, wrap_angle, LinkGeometry, Pose2D, VehicleLayout};
use crate::method::Method;

/// Measured-parameter variances of one method at one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVariances {
    pub method: Method,
    /// Unbiased sample variances in observation order; `+∞` marks an
    /// observation whose link is clipped.
    pub variances: Vec<f64>,
    pub means: Vec<f64>,
    pub trial_count: usize,
}

impl ParamVariances {
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            variances: self.variances.iter().map(|v| v * k).collect(),
            ..self.clone()
        }
    }
}

/// How correlator outputs are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrontEndMode {
    /// Draw correlator outputs from their exact Gaussian distribution.
    #[default]
    Correlator,
    /// Synthesise every waveform sample and correlate.
    Waveform,
}

/// Hardware, layout and processing parameters shared by all front-ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSetup {
    pub layout: VehicleLayout,
    /// Target TX 1 (left) and TX 2 (right).
    pub tx: [TxConfig; 2],
    pub rx: QrxConfig,
    pub sensor: SensorNoise,
    /// Waveform length per measurement, s.
    pub estimation_interval: f64,
    pub sample_rate: f64,
    /// RToF processing offset assumed by the ego, s.
    pub tau_up: f64,
    /// RToF processing offset of the relay, s.
    pub relay_offset: f64,
    /// Multiplies every channel noise standard deviation.
    pub noise_scale: f64,
    pub mode: FrontEndMode,
}

impl Default for SimSetup {
    fn default() -> Self {
        Self {
            layout: VehicleLayout::default(),
            tx: [TxConfig::tail_light(1.0e6), TxConfig::tail_light(0.9e6)],
            rx: QrxConfig::default(),
            sensor: SensorNoise::default(),
            estimation_interval: 1.0 / 200.0,
            sample_rate: 10e6,
            tau_up: 0.0,
            relay_offset: 0.0,
            noise_scale: 1.0,
            mode: FrontEndMode::Correlator,
        }
    }
}

impl SimSetup {
    /// Setup with every noise source switched off.
    pub fn noiseless(mut self) -> Self {
        self.noise_scale = 0.0;
        self.sensor = SensorNoise::NONE;
        self
    }
}

/// Ego and target poses at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosePair {
    pub ego: Pose2D,
    pub target: Pose2D,
}

/// Everything a front-end needs about one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSnapshot {
    pub time: f64,
    pub now: PosePair,
    /// Poses one AoA1 interval later.
    pub later: Option<PosePair>,
}

/// Heading of the target measured clockwise from the ego's forward axis.
pub fn relative_heading_cw(pair: &PosePair) -> f64 {
    wrap_angle(pair.ego.heading - pair.target.heading)
}

fn displacement(a: &Pose2D, b: &Pose2D) -> f64 {
    (b.position() - a.position()).norm()
}

/// Sensor inputs `(d_tt, d_rr, ψ)` between two pose pairs.
pub fn sensor_inputs(now: &PosePair, later: &PosePair) -> (f64, f64, f64) {
    (
        displacement(&now.target, &later.target),
        displacement(&now.ego, &later.ego),
        relative_heading_cw(now),
    )
}

fn bearing(link: &LinkGeometry) -> f64 {
    link.aoa_theta
}

/// Noise-free values of the parameters each front-end measures.
pub fn true_parameters(method: Method, frame: &FrameSnapshot, setup: &SimSetup) -> Result<Vec<f64>> {
    let links = pair_links(&frame.now.ego, &frame.now.target, &setup.layout)?;
    Ok(match method {
        Method::PDoA => (0..2)
            .map(|j| links[0][j].distance_d - links[1][j].distance_d)
            .collect(),
        Method::RToF => vec![
            links[0][0].distance_d,
            links[0][1].distance_d,
            links[1][0].distance_d,
            links[1][1].distance_d,
        ],
        Method::AoA2 => vec![
            bearing(&links[0][0]),
            bearing(&links[0][1]),
            bearing(&links[1][0]),
            bearing(&links[1][1]),
        ],
        Method::AoA1 => {
            let later = aoa1_later(frame)?;
            let next = pair_links(&later.ego, &later.target, &setup.layout)?;
            let (d_tt, d_rr, psi) = sensor_inputs(&frame.now, &later);
            let motion = relative_motion(d_tt, d_rr, psi)?;
            vec![
                bearing(&links[0][0]),
                bearing(&next[0][0]),
                bearing(&links[0][1]),
                bearing(&next[0][1]),
                motion.alpha,
                motion.d_tr,
            ]
        }
    })
}

fn aoa1_later(frame: &FrameSnapshot) -> Result<PosePair> {
    frame.later.ok_or_else(|| Error::MethodInapplicable {
        method: "AoA1".into(),
        assumption: "needs a second frame one interval later".into(),
    })
}

/// Per-frame state computed once and reused by every trial.
enum Prepared {
    Pdoa {
        /// `[rx][tone]`
        tones: [[ToneComponent; 2]; 2],
        sigma: [f64; 2],
        live: [bool; 2],
    },
    Rtof {
        links: Vec<(RtofLink, RtofParams)>,
    },
    Aoa2 {
        tones: [[QrxTone; 2]; 2],
        lut: QrxLut,
    },
    Aoa1 {
        now: [QrxTone; 2],
        later: [QrxTone; 2],
        sensor: (f64, f64, f64),
        lut: QrxLut,
    },
}

fn qrx_tones(links: &[[LinkGeometry; 2]; 2], rx_index: usize, setup: &SimSetup) -> [QrxTone; 2] {
    [0, 1].map(|j| {
        let link = &links[rx_index][j];
        QrxTone {
            frequency: setup.tx[j].tone_frequency,
            optical_power: channel_gain(link, &setup.tx[j], &setup.rx) * setup.tx[j].optical_power_peak,
            delay: link.delay_tau,
            incidence: link.incidence,
        }
    })
}

fn prepare(method: Method, frame: &FrameSnapshot, setup: &SimSetup, cond: &ChannelCondition) -> Result<Prepared> {
    let links = pair_links(&frame.now.ego, &frame.now.target, &setup.layout)?;
    let rx = &setup.rx;
    Ok(match method {
        Method::PDoA => {
            check_tones(setup.tx[0].tone_frequency, setup.tx[1].tone_frequency, setup.estimation_interval)?;
            let power = |i: usize, j: usize| {
                channel_gain(&links[i][j], &setup.tx[j], rx) * setup.tx[j].optical_power_peak
            };
            let tones = [0, 1].map(|i| {
                [0, 1].map(|j| {
                    ToneComponent::new(setup.tx[j].tone_frequency, rx.responsivity * power(i, j), 1.0, links[i][j].delay_tau)
                })
            });
            let sigma = [
                summed_cells_noise_variance(rx, cond, power(0, 0) + power(0, 1))?.sqrt() * setup.noise_scale,
                summed_cells_noise_variance(rx, cond, power(1, 0) + power(1, 1))?.sqrt() * setup.noise_scale,
            ];
            let live = [0, 1].map(|j| power(0, j) > 0.0 && power(1, j) > 0.0);
            Prepared::Pdoa { tones, sigma, live }
        }
        Method::RToF => {
            let mut out = Vec::with_capacity(4);
            for i in 0..2 {
                for j in 0..2 {
                    let geo = &links[i][j];
                    // The ego unit transmits on the tone assigned to target unit j.
                    let ego_tx = setup.tx[j];
                    let mut there = link_budget(&geo.reversed(), &ego_tx, rx, cond, 0.0)?;
                    let mut back = link_budget(geo, &setup.tx[j], rx, cond, 0.0)?;
                    let s2 = setup.noise_scale * setup.noise_scale;
                    for leg in [&mut there, &mut back] {
                        leg.noise_variance *= s2;
                        leg.snr /= s2;
                    }
                    let params = RtofParams {
                        frequency: setup.tx[j].tone_frequency,
                        tau_up: setup.tau_up,
                        relay_offset: setup.relay_offset,
                        sample_rate: setup.sample_rate,
                    };
                    out.push((
                        RtofLink {
                            delay_tau: geo.delay_tau,
                            out: there,
                            back,
                        },
                        params,
                    ));
                }
            }
            Prepared::Rtof { links: out }
        }
        Method::AoA2 => Prepared::Aoa2 {
            tones: [qrx_tones(&links, 0, setup), qrx_tones(&links, 1, setup)],
            lut: QrxLut::new(rx)?,
        },
        Method::AoA1 => {
            let later = aoa1_later(frame)?;
            let next = pair_links(&later.ego, &later.target, &setup.layout)?;
            Prepared::Aoa1 {
                now: qrx_tones(&links, 0, setup),
                later: qrx_tones(&next, 0, setup),
                sensor: sensor_inputs(&frame.now, &later),
                lut: QrxLut::new(rx)?,
            }
        }
    })
}

/// Bearing in the ego frame from an incidence angle at a forward-looking QRX.
fn qrx_bearing(incidence: f64) -> f64 {
    wrap_angle(PI / 2.0 + incidence)
}

fn run_trial<R: Rng>(
    prepared: &Prepared,
    setup: &SimSetup,
    cond: &ChannelCondition,
    rng: &mut R,
) -> Result<Vec<f64>> {
    match setup.mode {
        FrontEndMode::Correlator => {
            let mut src = CorrelatorSource::new(rng, setup.estimation_interval, setup.sample_rate);
            trial_with(prepared, setup, cond, &mut src)
        }
        FrontEndMode::Waveform => {
            let mut src = WaveformSource {
                rng,
                duration: setup.estimation_interval,
                sample_rate: setup.sample_rate,
            };
            trial_with(prepared, setup, cond, &mut src)
        }
    }
}

trait SourceRng: PhasorSource {
    fn rng(&mut self) -> &mut dyn rand::RngCore;
}

impl<R: Rng> SourceRng for CorrelatorSource<'_, R> {
    fn rng(&mut self) -> &mut dyn rand::RngCore {
        self.rng
    }
}

impl<R: Rng> SourceRng for WaveformSource<'_, R> {
    fn rng(&mut self) -> &mut dyn rand::RngCore {
        self.rng
    }
}

fn trial_with<S: SourceRng>(
    prepared: &Prepared,
    setup: &SimSetup,
    cond: &ChannelCondition,
    src: &mut S,
) -> Result<Vec<f64>> {
    let angle = |est: Option<super::qrx::AoaEstimate>| est.map_or(f64::NAN, |e| qrx_bearing(e.theta));
    match prepared {
        Prepared::Pdoa { tones, sigma, live } => {
            let c1 = src.observe(&tones[0], sigma[0])?;
            let c2 = src.observe(&tones[1], sigma[1])?;
            Ok((0..2)
                .map(|j| {
                    if live[j] {
                        distance_difference(c1[j], c2[j], tones[0][j].frequency)
                    } else {
                        f64::NAN
                    }
                })
                .collect())
        }
        Prepared::Rtof { links } => links
            .iter()
            .map(|(link, params)| match rtof_trial(src, link, &setup.rx, params) {
                Ok(d) => Ok(d),
                Err(Error::NoSignal(_)) => Ok(f64::NAN),
                Err(e) => Err(e),
            })
            .collect(),
        Prepared::Aoa2 { tones, lut } => {
            let mut out = Vec::with_capacity(4);
            for rx_tones in tones {
                let est = qrx_trial(src, rx_tones, &setup.rx, cond, lut, setup.noise_scale)?;
                out.extend(est.into_iter().map(angle));
            }
            Ok(out)
        }
        Prepared::Aoa1 {
            now,
            later,
            sensor,
            lut,
        } => {
            let a = qrx_trial(src, now, &setup.rx, cond, lut, setup.noise_scale)?;
            let b = qrx_trial(src, later, &setup.rx, cond, lut, setup.noise_scale)?;
            let (d_tt, d_rr, psi) = *sensor;
            let motion = ego_sensor_measurement(d_tt, d_rr, psi, &setup.sensor, src.rng())?;
            Ok(vec![
                angle(a[0]),
                angle(b[0]),
                angle(a[1]),
                angle(b[1]),
                motion.alpha,
                motion.d_tr,
            ])
        }
    }
}

fn is_angle(method: Method, index: usize) -> bool {
    match method {
        Method::AoA2 => true,
        Method::AoA1 => index < 5,
        _ => false,
    }
}

/// Generator for one trial; independent of execution order.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Runs the method's front-end `trials` times and returns every measurement
/// (`NaN` where a link carries no signal). Angles are unwrapped around the truth.
pub fn sample_parameters(
    method: Method,
    frame: &FrameSnapshot,
    setup: &SimSetup,
    cond: &ChannelCondition,
    trials: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let prepared = prepare(method, frame, setup, cond)?;
    let truth = true_parameters(method, frame, setup)?;
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let mut v = run_trial(&prepared, setup, cond, &mut rng)?;
            for (k, x) in v.iter_mut().enumerate() {
                if is_angle(method, k) && x.is_finite() {
                    *x = truth[k] + wrap_angle(*x - truth[k]);
                }
            }
            Ok(v)
        })
        .collect()
}

/// Unbiased sample variance of every observation over `trials` runs.
pub fn sample_parameter_variances(
    method: Method,
    frame: &FrameSnapshot,
    setup: &SimSetup,
    cond: &ChannelCondition,
    trials: usize,
    seed: u64,
) -> Result<ParamVariances> {
    if trials < 2 {
        return Err(Error::Domain(format!("need at least 2 trials, got {trials}")));
    }
    let samples = sample_parameters(method, frame, setup, cond, trials, seed)?;
    let dim = method.observation_dim();
    let mut variances = Vec::with_capacity(dim);
    let mut means = Vec::with_capacity(dim);
    for k in 0..dim {
        if samples.iter().any(|s| s[k].is_nan()) {
            variances.push(f64::INFINITY);
            means.push(f64::NAN);
            continue;
        }
        let n = samples.len() as f64;
        let mean = samples.iter().map(|s| s[k]).sum::<f64>() / n;
        let var = samples.iter().map(|s| (s[k] - mean).powi(2)).sum::<f64>() / (n - 1.0);
        means.push(mean);
        variances.push(var);
    }
    Ok(ParamVariances {
        method,
        variances,
        means,
        trial_count: trials,
    })
}
