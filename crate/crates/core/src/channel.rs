//! Line-of-sight vehicular VLC channel: Lambertian gain, photodiode/TIA noise
//! and sampled received-waveform synthesis.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geometry::LinkGeometry;

/// Elementary charge, C.
pub const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Number of cells in a quadrant receiver.
pub const QRX_CELLS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TxConfig {
    /// Peak optical power, W.
    pub optical_power_peak: f64,
    pub lambertian_order_m: u32,
    /// Tone frequency, Hz.
    pub tone_frequency: f64,
}

impl TxConfig {
    /// Tail light at 1 W, 20° half-power angle, 1 MHz tone.
    pub fn tail_light(tone_frequency: f64) -> Self {
        Self {
            optical_power_peak: 1.0,
            lambertian_order_m: lambertian_order(20f64.to_radians()).expect("20° is valid"),
            tone_frequency,
        }
    }
}

impl Default for TxConfig {
    fn default() -> Self {
        Self::tail_light(1.0e6)
    }
}

/// Quadrant-photodiode receiver and its transimpedance front-end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QrxConfig {
    /// A/W.
    pub responsivity: f64,
    /// Total active area of the four cells, m².
    pub total_active_area: f64,
    pub bandwidth_b: f64,
    pub input_capacitance_ct: f64,
    pub open_loop_gain_g: f64,
    pub transconductance_gm: f64,
    pub gamma_factor: f64,
    pub ib2: f64,
    pub ib3: f64,
    pub fov_half_angle: f64,
    /// Effective lens-to-detector distance; the spot moves by `f·tan θ`.
    pub lens_focal_f: f64,
    pub spot_radius: f64,
}

impl Default for QrxConfig {
    fn default() -> Self {
        let fov = 80f64.to_radians();
        let spot_radius = 1.5e-3;
        Self {
            responsivity: 0.5,
            total_active_area: 50e-6,
            bandwidth_b: 10e6,
            input_capacitance_ct: 56e-12,
            open_loop_gain_g: 10.0,
            transconductance_gm: 0.03,
            gamma_factor: 1.5,
            ib2: 0.562,
            ib3: 0.0868,
            fov_half_angle: fov,
            // The spot edge reaches 95 % of its radius past the cell split at the FoV edge,
            // which keeps the angle → imbalance map strictly monotone over ±FoV.
            lens_focal_f: 0.95 * spot_radius / fov.tan(),
            spot_radius,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NoiseLevel {
    LowNoise,
    HighNoise,
}

impl NoiseLevel {
    pub fn name(self) -> &'static str {
        match self {
            NoiseLevel::LowNoise => "LowNoise",
            NoiseLevel::HighNoise => "HighNoise",
        }
    }
}

impl std::str::FromStr for NoiseLevel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lownoise" | "low" => Ok(NoiseLevel::LowNoise),
            "highnoise" | "high" => Ok(NoiseLevel::HighNoise),
            other => Err(Error::Config(format!("unknown channel condition '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelCondition {
    /// Background photocurrent of the whole receiver, A.
    pub background_current_ibg: f64,
    pub temperature_t: f64,
    pub label: NoiseLevel,
}

impl ChannelCondition {
    /// Night, low ambient light.
    pub const LOW_NOISE: ChannelCondition = ChannelCondition {
        background_current_ibg: 10e-6,
        temperature_t: 273.0,
        label: NoiseLevel::LowNoise,
    };
    /// Daytime sunlight, moderate temperature.
    pub const HIGH_NOISE: ChannelCondition = ChannelCondition {
        background_current_ibg: 750e-6,
        temperature_t: 298.0,
        label: NoiseLevel::HighNoise,
    };

    pub fn from_level(level: NoiseLevel) -> Self {
        match level {
            NoiseLevel::LowNoise => Self::LOW_NOISE,
            NoiseLevel::HighNoise => Self::HIGH_NOISE,
        }
    }
}

/// Received power and noise of one link at the summed four-cell receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    /// Optical channel gain `P_r / P_t`.
    pub gain_h: f64,
    pub received_optical_power: f64,
    /// Noise variance of the summed cell photocurrents, A².
    pub noise_variance: f64,
    /// Per-sample SNR of the received tone, `a² / (2σ²)` with `a` the photocurrent amplitude.
    pub snr: f64,
}

impl LinkBudget {
    /// Peak photocurrent of the received tone, A.
    pub fn signal_amplitude(&self, rx: &QrxConfig) -> f64 {
        rx.responsivity * self.received_optical_power
    }

    pub fn is_clipped(&self) -> bool {
        self.gain_h == 0.0
    }
}

/// Lambertian order for a given half-power semi-angle: `floor(-ln 2 / ln cos θ½)`.
pub fn lambertian_order(half_power_angle: f64) -> Result<u32> {
    if !(half_power_angle > 0.0 && half_power_angle < PI / 2.0) {
        return Err(Error::Domain(format!(
            "half-power angle {half_power_angle} rad outside (0, π/2)"
        )));
    }
    let m = (-(2f64.ln()) / half_power_angle.cos().ln()).floor();
    Ok(m.max(0.0) as u32)
}

/// Optical gain of a point-source Lambertian link onto the whole receiver area.
///
/// Zero outside the TX half-space or the RX field of view.
pub fn channel_gain(link: &LinkGeometry, tx: &TxConfig, rx: &QrxConfig) -> f64 {
    if link.irradiance_phi.abs() >= PI / 2.0 || link.incidence.abs() > rx.fov_half_angle {
        return 0.0;
    }
    let m = tx.lambertian_order_m as f64;
    (m + 1.0) / (2.0 * PI) * link.irradiance_phi.cos().powf(m) * rx.total_active_area
        * link.incidence.cos()
        / (link.distance_d * link.distance_d)
}

/// TIA feedback resistance `G / (2π B C_T)`.
pub fn feedback_resistance(open_loop_gain: f64, bandwidth: f64, capacitance: f64) -> Result<f64> {
    if !(open_loop_gain > 0.0 && bandwidth > 0.0 && capacitance > 0.0) {
        return Err(Error::Domain(format!(
            "feedback resistance needs positive inputs (G={open_loop_gain}, B={bandwidth}, C_T={capacitance})"
        )));
    }
    Ok(open_loop_gain / (2.0 * PI * bandwidth * capacitance))
}

/// Thermal noise variance of one front-end, A².
pub fn thermal_noise_variance(rx: &QrxConfig, cond: &ChannelCondition) -> Result<f64> {
    let rf = feedback_resistance(rx.open_loop_gain_g, rx.bandwidth_b, rx.input_capacitance_ct)?;
    let b = rx.bandwidth_b;
    let ct = 2.0 * PI * rx.input_capacitance_ct;
    Ok(4.0
        * BOLTZMANN
        * cond.temperature_t
        * (rx.ib2 * b / rf + ct * ct / rx.transconductance_gm * rx.gamma_factor * rx.ib3 * b.powi(3)))
}

/// Shot noise variance for a given received optical power and background current, A².
pub fn shot_noise_variance(rx: &QrxConfig, background_current: f64, received_optical_power: f64) -> f64 {
    let b = rx.bandwidth_b;
    2.0 * ELECTRON_CHARGE * rx.responsivity * received_optical_power * b
        + 2.0 * ELECTRON_CHARGE * background_current * rx.ib2 * b
}

/// Shot plus thermal noise variance of a single front-end receiving `received_optical_power`.
pub fn noise_variance(
    rx: &QrxConfig,
    cond: &ChannelCondition,
    received_optical_power: f64,
) -> Result<f64> {
    if !(received_optical_power >= 0.0) {
        return Err(Error::Domain(format!(
            "received optical power must be non-negative, got {received_optical_power}"
        )));
    }
    Ok(shot_noise_variance(rx, cond.background_current_ibg, received_optical_power)
        + thermal_noise_variance(rx, cond)?)
}

/// Noise variance of one quadrant cell: its own signal shot noise, a quarter of
/// the background current and a full front-end thermal term.
pub fn cell_noise_variance(
    rx: &QrxConfig,
    cond: &ChannelCondition,
    cell_optical_power: f64,
) -> Result<f64> {
    if !(cell_optical_power >= 0.0) {
        return Err(Error::Domain(format!(
            "cell optical power must be non-negative, got {cell_optical_power}"
        )));
    }
    let bg = cond.background_current_ibg / QRX_CELLS as f64;
    Ok(shot_noise_variance(rx, bg, cell_optical_power) + thermal_noise_variance(rx, cond)?)
}

/// Noise of the four cell currents added together, for a total received power.
pub fn summed_cells_noise_variance(
    rx: &QrxConfig,
    cond: &ChannelCondition,
    received_optical_power: f64,
) -> Result<f64> {
    Ok(noise_variance(rx, cond, received_optical_power)?
        + (QRX_CELLS as f64 - 1.0) * thermal_noise_variance(rx, cond)?)
}

/// Link budget at the summed four-cell receiver. `extra_power` is optical power
/// from other transmitters that lands on the same receiver and only adds shot noise.
pub fn link_budget(
    link: &LinkGeometry,
    tx: &TxConfig,
    rx: &QrxConfig,
    cond: &ChannelCondition,
    extra_power: f64,
) -> Result<LinkBudget> {
    let gain_h = channel_gain(link, tx, rx);
    let received_optical_power = gain_h * tx.optical_power_peak;
    let noise = summed_cells_noise_variance(rx, cond, received_optical_power + extra_power)?;
    let amplitude = rx.responsivity * received_optical_power;
    Ok(LinkBudget {
        gain_h,
        received_optical_power,
        noise_variance: noise,
        snr: amplitude * amplitude / (2.0 * noise),
    })
}

/// One tone component of a received waveform:
/// `gain · amplitude · cos(2π f (t − delay) + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneComponent {
    pub frequency: f64,
    pub amplitude: f64,
    pub gain: f64,
    pub delay: f64,
    pub phase: f64,
}

impl ToneComponent {
    pub fn new(frequency: f64, amplitude: f64, gain: f64, delay: f64) -> Self {
        Self {
            frequency,
            amplitude,
            gain,
            delay,
            phase: 0.0,
        }
    }
}

/// Number of samples covering `duration` at `sample_rate`.
pub fn sample_count(duration: f64, sample_rate: f64) -> usize {
    (duration * sample_rate).round() as usize
}

/// Samples a received photocurrent: the sum of delayed tones plus white Gaussian noise.
pub fn synthesize_rx(
    tones: &[ToneComponent],
    noise_sigma: f64,
    duration: f64,
    sample_rate: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    synthesize_rx_with(tones, noise_sigma, duration, sample_rate, &mut rng)
}

/// [`synthesize_rx`] drawing its noise from a caller-owned generator.
pub fn synthesize_rx_with<R: rand::Rng + ?Sized>(
    tones: &[ToneComponent],
    noise_sigma: f64,
    duration: f64,
    sample_rate: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(duration > 0.0 && sample_rate > 0.0) {
        return Err(Error::Domain(format!(
            "duration and sample rate must be positive (duration={duration}, rate={sample_rate})"
        )));
    }
    if !(noise_sigma >= 0.0) {
        return Err(Error::Domain(format!("noise sigma must be non-negative, got {noise_sigma}")));
    }
    if let Some(t) = tones.iter().find(|t| sample_rate < 2.0 * t.frequency) {
        return Err(Error::Aliasing {
            frequency: t.frequency,
            sample_rate,
        });
    }
    let n = sample_count(duration, sample_rate);
    let noise = Normal::new(0.0, noise_sigma).map_err(|e| Error::Domain(e.to_string()))?;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 / sample_rate;
        let clean: f64 = tones
            .iter()
            .map(|c| {
                c.gain * c.amplitude * (2.0 * PI * c.frequency * (t - c.delay) + c.phase).cos()
            })
            .sum();
        let w = if noise_sigma > 0.0 { noise.sample(rng) } else { 0.0 };
        out.push(clean + w);
    }
    Ok(out)
}
