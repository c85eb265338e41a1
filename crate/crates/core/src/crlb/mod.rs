//! Observation models, Fisher information and the Cramér-Rao bound.

pub mod fisher;
pub mod model;

pub use fisher::{crlb, fisher, CrlbResult, CrlbStatus, FisherMatrix, MAX_CONDITION, RANK_TOLERANCE};
pub use model::{ObservationModel, Parameterization};

use crate::channel::ChannelCondition;
use crate::error::{Error, Result};
use crate::geometry::wrap_angle;
use crate::measurement::sampler::{relative_heading_cw, sample_parameter_variances, FrameSnapshot, ParamVariances, PosePair, SimSetup};
use crate::method::Method;

/// Heading differences below this count as equal.
pub const HEADING_TOLERANCE: f64 = 1e-9;
/// Largest change of relative heading over an AoA1 interval that still counts as constant.
pub const CONSTANT_HEADING_TOLERANCE: f64 = 0.1 * std::f64::consts::PI / 180.0;

pub const PARALLEL_ASSUMPTION: &str = "longitudinally parallel vehicles";
pub const CONSTANT_HEADING_ASSUMPTION: &str = "constant relative heading over the interval";

/// Both vehicles point the same way, so the TX pair is parallel to the RX pair.
pub fn is_longitudinally_parallel(pair: &PosePair) -> bool {
    relative_heading_cw(pair).abs() <= HEADING_TOLERANCE
}

/// The relative heading does not change between the two halves of an AoA1 pair,
/// and the ego itself does not turn.
pub fn has_constant_relative_heading(frame: &FrameSnapshot) -> bool {
    match frame.later {
        Some(later) => {
            wrap_angle(relative_heading_cw(&later) - relative_heading_cw(&frame.now)).abs() <= CONSTANT_HEADING_TOLERANCE
                && wrap_angle(later.ego.heading - frame.now.ego.heading).abs() <= CONSTANT_HEADING_TOLERANCE
        }
        None => false,
    }
}

/// Rejects methods whose motion assumption the frame violates.
pub fn check_applicable(method: Method, frame: &FrameSnapshot) -> Result<()> {
    let fail = |assumption: &str| {
        Err(Error::MethodInapplicable {
            method: method.name().into(),
            assumption: assumption.into(),
        })
    };
    match method {
        Method::PDoA if !is_longitudinally_parallel(&frame.now) => fail(PARALLEL_ASSUMPTION),
        Method::AoA1 if !has_constant_relative_heading(frame) => fail(CONSTANT_HEADING_ASSUMPTION),
        _ => Ok(()),
    }
}

/// Bound from already-sampled variances at the frame's true geometry.
pub fn crlb_from_variances(frame: &FrameSnapshot, setup: &SimSetup, variances: &ParamVariances) -> Result<CrlbResult> {
    let model = ObservationModel::from_frame(variances.method, frame, &setup.layout, Parameterization::Standard)?;
    let j = model.jacobian_analytic()?;
    Ok(crlb(&fisher(&j, &variances.variances)?))
}

/// Samples the front-end variances at a frame and turns them into a bound.
pub fn crlb_pipeline(
    method: Method,
    frame: &FrameSnapshot,
    setup: &SimSetup,
    cond: &ChannelCondition,
    trials: usize,
    seed: u64,
) -> Result<(ParamVariances, CrlbResult)> {
    check_applicable(method, frame)?;
    let v = sample_parameter_variances(method, frame, setup, cond, trials, seed)?;
    let r = crlb_from_variances(frame, setup, &v)?;
    Ok((v, r))
}
