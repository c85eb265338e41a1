//! Relative heading and displacement from on-board odometry and heading sensors.
//!
//! The target moves `d_tt` along its heading, the ego moves `d_rr` forward, and
//! `ψ` is the target heading measured clockwise from the ego's forward axis.
//! In the ego frame the relative displacement is
//! `(d_x, d_y) = (d_tt·sin ψ, d_tt·cos ψ − d_rr)`, giving
//! `α = π/2 − arctan((d_tt cos ψ − d_rr) / (d_tt sin ψ))` (evaluated as
//! `atan2(d_x, d_y)`) and `d_tr = √(d_x² + d_y²)`.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Relative displacements below this leave `α` undefined.
const MIN_DISPLACEMENT: f64 = 1e-3;

/// Standard deviations of the sensor readings over one measurement interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorNoise {
    pub odometry_sigma: f64,
    pub heading_sigma: f64,
}

impl SensorNoise {
    pub const NONE: SensorNoise = SensorNoise {
        odometry_sigma: 0.0,
        heading_sigma: 0.0,
    };

    pub fn scaled(self, k: f64) -> Self {
        Self {
            odometry_sigma: self.odometry_sigma * k,
            heading_sigma: self.heading_sigma * k,
        }
    }
}

impl Default for SensorNoise {
    fn default() -> Self {
        Self {
            odometry_sigma: 1e-4,
            heading_sigma: 0.1f64.to_radians(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionMeasurement {
    pub alpha: f64,
    pub d_tr: f64,
}

/// Exact relative heading and distance for noise-free sensor readings.
pub fn relative_motion(d_tt: f64, d_rr: f64, psi: f64) -> Result<MotionMeasurement> {
    let d_x = d_tt * psi.sin();
    let d_y = d_tt * psi.cos() - d_rr;
    let d_tr = d_x.hypot(d_y);
    if !(d_tr >= MIN_DISPLACEMENT) {
        return Err(Error::DegenerateMotion(d_tr));
    }
    Ok(MotionMeasurement {
        alpha: d_x.atan2(d_y),
        d_tr,
    })
}

/// Perturbs the sensor readings with independent Gaussian noise and evaluates
/// the relative heading and distance.
pub fn ego_sensor_measurement<R: Rng + ?Sized>(
    d_tt: f64,
    d_rr: f64,
    psi: f64,
    noise: &SensorNoise,
    rng: &mut R,
) -> Result<MotionMeasurement> {
    if !(d_tt >= 0.0 && d_rr >= 0.0) {
        return Err(Error::Domain(format!(
            "travelled distances must be non-negative (d_tt={d_tt}, d_rr={d_rr})"
        )));
    }
    let odo = Normal::new(0.0, noise.odometry_sigma).map_err(|e| Error::Domain(e.to_string()))?;
    let head = Normal::new(0.0, noise.heading_sigma).map_err(|e| Error::Domain(e.to_string()))?;
    let d_tt = d_tt + odo.sample(rng);
    let d_rr = d_rr + odo.sample(rng);
    let psi = psi + head.sample(rng);
    relative_motion(d_tt, d_rr, psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(3)
    }

    #[test]
    fn sideways_target() {
        let m = ego_sensor_measurement(1.0, 1.0, PI / 2.0, &SensorNoise::NONE, &mut rng()).unwrap();
        assert!((m.alpha - 3.0 * PI / 4.0).abs() < 1e-15);
        assert!((m.d_tr - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn matches_arctangent_form() {
        // π/2 − arctan((d_tt cos ψ − d_rr)/(d_tt sin ψ)) for d_tt·sin ψ > 0.
        for (d_tt, d_rr, psi) in [(0.135, 0.125, 0.02), (1.0, 0.3, 1.2), (0.5, 0.9, 0.4)] {
            let m = relative_motion(d_tt, d_rr, psi).unwrap();
            let direct = PI / 2.0 - ((d_tt * f64::cos(psi) - d_rr) / (d_tt * f64::sin(psi))).atan();
            assert!((m.alpha - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn parallel_equal_motion_is_degenerate() {
        assert!(matches!(
            ego_sensor_measurement(1.0, 1.0, 0.0, &SensorNoise::NONE, &mut rng()),
            Err(Error::DegenerateMotion(_))
        ));
        assert!(ego_sensor_measurement(-1.0, 1.0, 0.0, &SensorNoise::NONE, &mut rng()).is_err());
    }

    #[test]
    fn noiseless_is_pass_through() {
        let m = ego_sensor_measurement(0.135, 0.125, 0.0, &SensorNoise::NONE, &mut rng()).unwrap();
        assert!(m.alpha.abs() < 1e-15);
        assert!((m.d_tr - 0.01).abs() < 1e-15);
    }
}
