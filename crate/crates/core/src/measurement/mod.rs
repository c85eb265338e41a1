//! Front-ends that turn received waveforms into measured parameters.

pub mod pdoa;
pub mod phasor;
pub mod qrx;
pub mod rtof;
pub mod sampler;
pub mod sensor;

pub use pdoa::{measure_pdoa, pdoa_from_phasors, PdoaMeasurement};
pub use phasor::{CorrelatorSource, PhasorSource, WaveformSource};
pub use qrx::{qrx_aoa, qrx_spot_fractions, AoaEstimate, QrxLut};
pub use rtof::{measure_rtof, RtofLink, RtofParams};
pub use sampler::{
    sample_parameter_variances, true_parameters, FrameSnapshot, FrontEndMode, ParamVariances, PosePair, SimSetup,
};
pub use sensor::{ego_sensor_measurement, relative_motion, MotionMeasurement, SensorNoise};
