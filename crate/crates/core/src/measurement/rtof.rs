//! Roundtrip time-of-flight front-end.
//!
//! The ego unit sends a tone; the target unit detects its phase, regenerates
//! the tone at nominal power and sends it back. The ego reads the roundtrip
//! phase `φ̂` and converts it with `τ̂ = φ̂ / (4π f_e) − τ_µP`, `d̂ = c·τ̂`.
//! Phase errors of the two legs add.

use std::f64::consts::{PI, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::phasor::{PhasorSource, WaveformSource};
use crate::channel::{LinkBudget, QrxConfig, ToneComponent};
use crate::error::{Error, Result};
use crate::geometry::SPEED_OF_LIGHT;

/// Highest tone frequency current automotive LEDs sustain.
pub const MAX_LED_TONE: f64 = 1.0e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RtofParams {
    /// Tone frequency `f_e`, Hz.
    pub frequency: f64,
    /// Processing offset subtracted by the ego, s.
    pub tau_up: f64,
    /// Processing offset actually introduced by the relay, expressed as the
    /// equivalent one-way delay, s.
    pub relay_offset: f64,
    /// Sampling clock, Hz.
    pub sample_rate: f64,
}

impl RtofParams {
    pub fn new(frequency: f64) -> Self {
        Self {
            frequency,
            tau_up: 0.0,
            relay_offset: 0.0,
            sample_rate: 10e6,
        }
    }
}

/// One ego ↔ target unit pair: one-way delay and both legs' budgets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RtofLink {
    pub delay_tau: f64,
    pub out: LinkBudget,
    pub back: LinkBudget,
}

/// Roundtrip distance from a phase in `[0, 2π)`.
pub fn distance_from_roundtrip_phase(phase: f64, params: &RtofParams) -> f64 {
    let tau = phase / (4.0 * PI * params.frequency) - params.tau_up;
    SPEED_OF_LIGHT * tau
}

/// One roundtrip measurement using correlator outputs from `source`.
pub fn rtof_trial<S: PhasorSource>(
    source: &mut S,
    link: &RtofLink,
    rx: &QrxConfig,
    params: &RtofParams,
) -> Result<f64> {
    if link.out.is_clipped() || link.back.is_clipped() {
        return Err(Error::NoSignal("roundtrip leg".into()));
    }
    let w = 2.0 * PI * params.frequency;
    let out_tone = ToneComponent::new(params.frequency, link.out.signal_amplitude(rx), 1.0, link.delay_tau);
    let detected = source.observe(&[out_tone], link.out.noise_variance.sqrt())?[0].arg();
    let back_tone = ToneComponent {
        phase: detected - 2.0 * w * params.relay_offset,
        ..ToneComponent::new(params.frequency, link.back.signal_amplitude(rx), 1.0, link.delay_tau)
    };
    let returned = source.observe(&[back_tone], link.back.noise_variance.sqrt())?[0].arg();
    Ok(distance_from_roundtrip_phase((-returned).rem_euclid(TAU), params))
}

/// Simulates one roundtrip over `duration` seconds of sampled waveform per leg.
pub fn measure_rtof(
    link: &RtofLink,
    rx: &QrxConfig,
    params: &RtofParams,
    duration: f64,
    seed: u64,
) -> Result<f64> {
    if !(params.frequency > 0.0 && params.frequency <= MAX_LED_TONE) {
        return Err(Error::Domain(format!(
            "RToF tone {} Hz outside (0, 1 MHz]",
            params.frequency
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut source = WaveformSource {
        rng: &mut rng,
        duration,
        sample_rate: params.sample_rate,
    };
    rtof_trial(&mut source, link, rx, params)
}
