//! Quadrant-photodiode angle-of-arrival optics and its inversion.
//!
//! The lens focuses a transmitter into a uniform circular spot of radius
//! `spot_radius` whose center sits `lens_focal_f · tan θ` from the cell split
//! along the azimuth axis. The horizontal imbalance `(right − left) / total`
//! is a strictly increasing function of `θ` over the field of view and is
//! inverted through a lookup table.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::phasor::PhasorSource;
use crate::channel::{cell_noise_variance, ChannelCondition, QrxConfig, ToneComponent, QRX_CELLS};
use crate::error::{Error, Result};

/// Knots in the inversion table.
pub const LUT_KNOTS: usize = 1024;

/// Cell order: upper-left, upper-right, lower-left, lower-right.
pub type CellFractions = [f64; QRX_CELLS];

/// Area of a unit disc beyond a chord at distance `u` from its center.
fn segment_area(u: f64) -> f64 {
    if u >= 1.0 {
        0.0
    } else if u <= -1.0 {
        PI
    } else {
        u.acos() - u * (1.0 - u * u).sqrt()
    }
}

/// Fraction of the spot power landing on each of the four cells.
pub fn qrx_spot_fractions(aoa_theta: f64, rx: &QrxConfig) -> Result<CellFractions> {
    if !(aoa_theta.abs() <= rx.fov_half_angle) {
        return Err(Error::OutOfFov {
            angle_deg: aoa_theta.to_degrees(),
        });
    }
    let u = rx.lens_focal_f * aoa_theta.tan() / rx.spot_radius;
    // The spot moves toward +x; the left cells keep the segment past the split.
    let left = segment_area(u) / PI;
    let right = 1.0 - left;
    Ok([left / 2.0, right / 2.0, left / 2.0, right / 2.0])
}

/// `(right − left) / total` for four cell values.
pub fn horizontal_imbalance(cells: &[f64; QRX_CELLS]) -> f64 {
    let total: f64 = cells.iter().sum();
    (cells[1] + cells[3] - cells[0] - cells[2]) / total
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoaEstimate {
    pub theta: f64,
    /// The imbalance fell outside the table and `theta` was clamped to ±FoV.
    pub saturated: bool,
}

/// Monotone θ ↦ imbalance table over ±FoV.
#[derive(Debug, Clone)]
pub struct QrxLut {
    angles: Vec<f64>,
    imbalance: Vec<f64>,
}

impl QrxLut {
    pub fn new(rx: &QrxConfig) -> Result<Self> {
        let fov = rx.fov_half_angle;
        let step = 2.0 * fov / (LUT_KNOTS - 1) as f64;
        let angles: Vec<f64> = (0..LUT_KNOTS)
            .map(|k| (-fov + k as f64 * step).clamp(-fov, fov))
            .collect();
        let imbalance = angles
            .iter()
            .map(|&a| qrx_spot_fractions(a, rx).map(|f| horizontal_imbalance(&f)))
            .collect::<Result<Vec<_>>>()?;
        if imbalance.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain(
                "QRX optics do not give a strictly monotone imbalance over the FoV".into(),
            ));
        }
        Ok(Self { angles, imbalance })
    }

    pub fn invert(&self, imbalance: f64) -> AoaEstimate {
        let (first, last) = (self.imbalance[0], self.imbalance[LUT_KNOTS - 1]);
        if !(imbalance >= first) {
            return AoaEstimate {
                theta: self.angles[0],
                saturated: true,
            };
        }
        if imbalance > last {
            return AoaEstimate {
                theta: self.angles[LUT_KNOTS - 1],
                saturated: true,
            };
        }
        let hi = self
            .imbalance
            .partition_point(|&g| g < imbalance)
            .clamp(1, LUT_KNOTS - 1);
        let lo = hi - 1;
        let t = (imbalance - self.imbalance[lo]) / (self.imbalance[hi] - self.imbalance[lo]);
        AoaEstimate {
            theta: self.angles[lo] + t * (self.angles[hi] - self.angles[lo]),
            saturated: false,
        }
    }

    pub fn aoa(&self, cells: &[f64; QRX_CELLS]) -> Result<AoaEstimate> {
        let total: f64 = cells.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Domain(format!(
                "QRX cell currents must sum to a positive value, got {total}"
            )));
        }
        Ok(self.invert(horizontal_imbalance(cells)))
    }
}

/// Angle of arrival (relative to the receiver boresight) from four cell currents.
pub fn qrx_aoa(cell_currents: &[f64; QRX_CELLS], rx: &QrxConfig) -> Result<AoaEstimate> {
    QrxLut::new(rx)?.aoa(cell_currents)
}

/// A tone arriving at a QRX.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QrxTone {
    pub frequency: f64,
    /// Received optical power on the whole QRX, W.
    pub optical_power: f64,
    pub delay: f64,
    /// Angle between the QRX boresight and the ray to the transmitter.
    pub incidence: f64,
}

/// One QRX observation of several simultaneous tones. Returns the estimated
/// incidence angle per tone, or `None` for tones that carry no power.
pub fn qrx_trial<S: PhasorSource>(
    source: &mut S,
    tones: &[QrxTone],
    rx: &QrxConfig,
    cond: &ChannelCondition,
    lut: &QrxLut,
    noise_scale: f64,
) -> Result<Vec<Option<AoaEstimate>>> {
    let fractions = tones
        .iter()
        .map(|t| {
            if t.optical_power > 0.0 {
                qrx_spot_fractions(t.incidence, rx)
            } else {
                Ok([0.0; QRX_CELLS])
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut cells: Vec<Vec<Complex64>> = Vec::with_capacity(QRX_CELLS);
    for k in 0..QRX_CELLS {
        let components: Vec<ToneComponent> = tones
            .iter()
            .zip(&fractions)
            .map(|(t, f)| {
                ToneComponent::new(t.frequency, rx.responsivity * t.optical_power * f[k], 1.0, t.delay)
            })
            .collect();
        let cell_power: f64 = tones.iter().zip(&fractions).map(|(t, f)| t.optical_power * f[k]).sum();
        let sigma = cell_noise_variance(rx, cond, cell_power)?.sqrt() * noise_scale;
        cells.push(source.observe(&components, sigma)?);
    }

    Ok((0..tones.len())
        .map(|j| {
            if tones[j].optical_power <= 0.0 {
                return None;
            }
            // Cells share one propagation delay: project each onto the summed phasor.
            let sum: Complex64 = cells.iter().map(|c| c[j]).sum();
            let reference = sum / sum.norm();
            let amps = [0, 1, 2, 3].map(|k| (cells[k][j] * reference.conj()).re);
            let total: f64 = amps.iter().sum();
            if !(total > 0.0) {
                return Some(AoaEstimate {
                    theta: 0.0,
                    saturated: true,
                });
            }
            Some(lut.invert(horizontal_imbalance(&amps)))
        })
        .collect())
}
