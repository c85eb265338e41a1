//! Per-tone complex correlators and the two ways of producing their outputs.
//!
//! A correlator over `N` samples returns `c = (2/N) Σ r[n] e^{-j2πf n/fs}`; a tone
//! `a·cos(2πf(t−τ) + φ₀)` maps to `a·e^{j(φ₀ − 2πfτ)}`. With white Gaussian noise
//! of variance `σ²` and an integer number of cycles per tone in the window, the
//! noise on `c` is circular Gaussian with variance `2σ²/N` per component, so the
//! correlator output can be drawn directly instead of synthesising every sample.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::channel::{sample_count, synthesize_rx_with, ToneComponent};
use crate::error::Result;

/// Complex correlation coefficient of `waveform` against a tone at `frequency`.
pub fn correlate(waveform: &[f64], frequency: f64, sample_rate: f64) -> Complex64 {
    let n = waveform.len();
    if n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let step = 2.0 * PI * frequency / sample_rate;
    let (mut re, mut im) = (0.0, 0.0);
    for (k, v) in waveform.iter().enumerate() {
        let (s, c) = (step * k as f64).sin_cos();
        re += v * c;
        im -= v * s;
    }
    Complex64::new(re, im) * (2.0 / n as f64)
}

/// Noise-free correlator output of a tone component.
pub fn ideal_phasor(tone: &ToneComponent) -> Complex64 {
    Complex64::from_polar(
        tone.gain * tone.amplitude,
        tone.phase - 2.0 * PI * tone.frequency * tone.delay,
    )
}

/// Produces correlator outputs for one front-end observing a set of tones.
pub trait PhasorSource {
    fn observe(&mut self, tones: &[ToneComponent], noise_sigma: f64) -> Result<Vec<Complex64>>;
}

/// Synthesises the sampled waveform and runs the correlators on it.
pub struct WaveformSource<'a, R: Rng> {
    pub rng: &'a mut R,
    pub duration: f64,
    pub sample_rate: f64,
}

impl<R: Rng> PhasorSource for WaveformSource<'_, R> {
    fn observe(&mut self, tones: &[ToneComponent], noise_sigma: f64) -> Result<Vec<Complex64>> {
        let r = synthesize_rx_with(tones, noise_sigma, self.duration, self.sample_rate, self.rng)?;
        Ok(tones
            .iter()
            .map(|t| correlate(&r, t.frequency, self.sample_rate))
            .collect())
    }
}

/// Draws correlator outputs from their exact distribution.
pub struct CorrelatorSource<'a, R: Rng> {
    pub rng: &'a mut R,
    pub samples: usize,
}

impl<'a, R: Rng> CorrelatorSource<'a, R> {
    pub fn new(rng: &'a mut R, duration: f64, sample_rate: f64) -> Self {
        Self {
            rng,
            samples: sample_count(duration, sample_rate).max(1),
        }
    }
}

impl<R: Rng> PhasorSource for CorrelatorSource<'_, R> {
    fn observe(&mut self, tones: &[ToneComponent], noise_sigma: f64) -> Result<Vec<Complex64>> {
        let s = noise_sigma * (2.0 / self.samples as f64).sqrt();
        Ok(tones
            .iter()
            .map(|t| {
                let re: f64 = StandardNormal.sample(self.rng);
                let im: f64 = StandardNormal.sample(self.rng);
                ideal_phasor(t) + Complex64::new(re * s, im * s)
            })
            .collect())
    }
}
