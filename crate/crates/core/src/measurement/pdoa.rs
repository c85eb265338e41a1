//! Phase-difference-of-arrival front-end: two tones, two receivers, one
//! propagation-distance difference per tone.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::phasor::correlate;
use crate::error::{Error, Result};
use crate::geometry::SPEED_OF_LIGHT;

/// Fraction of the unambiguous range beyond which a measurement is flagged.
const AMBIGUITY_FRACTION: f64 = 0.9;
/// Minimum number of beat cycles between the tones over the window.
const MIN_BEAT_CYCLES: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdoaMeasurement {
    /// `d(TX_A, RX 1) − d(TX_A, RX 2)`, meters.
    pub delta_d_a: f64,
    /// `d(TX_B, RX 1) − d(TX_B, RX 2)`, meters.
    pub delta_d_b: f64,
    /// Set when either difference is close to the `±c/(2f)` wrap point.
    pub ambiguity_warning: bool,
}

/// Distance difference from the RX 1 and RX 2 correlator outputs of one tone.
pub fn distance_difference(c1: Complex64, c2: Complex64, frequency: f64) -> f64 {
    // c1·conj(c2) carries exp(-j2πf(τ1 − τ2)); arg is already in (-π, π].
    let dphi = (c1 * c2.conj()).arg();
    -dphi / (2.0 * PI * frequency) * SPEED_OF_LIGHT
}

pub fn unambiguous_range(frequency: f64) -> f64 {
    SPEED_OF_LIGHT / (2.0 * frequency)
}

pub(crate) fn check_tones(f_a: f64, f_b: f64, duration: f64) -> Result<()> {
    if !(f_a > 0.0 && f_b > 0.0) || (f_a - f_b).abs() * duration < MIN_BEAT_CYCLES {
        return Err(Error::ToneCollision { f_a, f_b, duration });
    }
    Ok(())
}

/// Builds the measurement from per-receiver, per-tone correlator outputs
/// `[rx][tone]`.
pub fn pdoa_from_phasors(phasors: [[Complex64; 2]; 2], f_a: f64, f_b: f64) -> PdoaMeasurement {
    let delta_d_a = distance_difference(phasors[0][0], phasors[1][0], f_a);
    let delta_d_b = distance_difference(phasors[0][1], phasors[1][1], f_b);
    let ambiguity_warning = delta_d_a.abs() > AMBIGUITY_FRACTION * unambiguous_range(f_a)
        || delta_d_b.abs() > AMBIGUITY_FRACTION * unambiguous_range(f_b);
    PdoaMeasurement {
        delta_d_a,
        delta_d_b,
        ambiguity_warning,
    }
}

/// Measures both distance differences from the two sampled receiver waveforms.
pub fn measure_pdoa(
    r1: &[f64],
    r2: &[f64],
    f_a: f64,
    f_b: f64,
    sample_rate: f64,
) -> Result<PdoaMeasurement> {
    if r1.len() != r2.len() {
        return Err(Error::DimensionMismatch {
            expected: r1.len(),
            actual: r2.len(),
        });
    }
    check_tones(f_a, f_b, r1.len() as f64 / sample_rate)?;
    let phasors = [r1, r2].map(|r| [correlate(r, f_a, sample_rate), correlate(r, f_b, sample_rate)]);
    Ok(pdoa_from_phasors(phasors, f_a, f_b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{synthesize_rx, ToneComponent};

    const FS: f64 = 1e7;
    const T: f64 = 1e-4;

    fn rx(delays: (f64, f64), sigma: f64, seed: u64) -> Vec<f64> {
        synthesize_rx(
            &[
                ToneComponent::new(1.0e6, 1e-6, 1.0, delays.0),
                ToneComponent::new(0.9e6, 1e-6, 1.0, delays.1),
            ],
            sigma,
            T,
            FS,
            seed,
        )
        .unwrap()
    }

    #[test]
    fn equidistant_receivers_give_zero() {
        let m = measure_pdoa(&rx((2e-8, 3e-8), 0.0, 0), &rx((2e-8, 3e-8), 0.0, 0), 1e6, 0.9e6, FS).unwrap();
        assert!(m.delta_d_a.abs() < 1e-6 && m.delta_d_b.abs() < 1e-6);
        assert!(!m.ambiguity_warning);
    }

    #[test]
    fn one_nanosecond_difference() {
        let m = measure_pdoa(&rx((11e-9, 0.0), 0.0, 0), &rx((10e-9, 0.0), 0.0, 0), 1e6, 0.9e6, FS).unwrap();
        assert!((m.delta_d_a - 0.299_792_458).abs() < 1e-6, "{}", m.delta_d_a);
        assert!(m.delta_d_b.abs() < 1e-6);
    }

    #[test]
    fn common_delay_is_invisible() {
        let base = measure_pdoa(&rx((5e-9, 9e-9), 0.0, 0), &rx((7e-9, 4e-9), 0.0, 0), 1e6, 0.9e6, FS).unwrap();
        let shift = 37e-9;
        let moved = measure_pdoa(
            &rx((5e-9 + shift, 9e-9 + shift), 0.0, 0),
            &rx((7e-9 + shift, 4e-9 + shift), 0.0, 0),
            1e6,
            0.9e6,
            FS,
        )
        .unwrap();
        assert!((base.delta_d_a - moved.delta_d_a).abs() < 1e-6);
        assert!((base.delta_d_b - moved.delta_d_b).abs() < 1e-6);
    }

    #[test]
    fn near_wrap_is_flagged() {
        // 140 m of path difference at 1 MHz is close to the 150 m wrap point.
        let dt = 140.0 / SPEED_OF_LIGHT;
        let m = measure_pdoa(&rx((dt, 0.0), 0.0, 0), &rx((0.0, 0.0), 0.0, 0), 1e6, 0.9e6, FS).unwrap();
        assert!(m.ambiguity_warning);
    }

    #[test]
    fn colliding_tones_rejected() {
        let r = rx((0.0, 0.0), 0.0, 0);
        assert!(matches!(
            measure_pdoa(&r, &r, 1e6, 1e6 + 1e3, FS),
            Err(Error::ToneCollision { .. })
        ));
        assert!(matches!(
            measure_pdoa(&r, &r[..10], 1e6, 0.9e6, FS),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
