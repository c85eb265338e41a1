use thiserror::Error;

/// Errors raised across the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("transmitter and receiver are coincident (distance {distance:.3e} m)")]
    CoincidentEndpoints { distance: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("sample rate {sample_rate} Hz cannot represent a {frequency} Hz tone")]
    Aliasing { frequency: f64, sample_rate: f64 },

    #[error("tones at {f_a} Hz and {f_b} Hz are not resolvable over {duration} s")]
    ToneCollision { f_a: f64, f_b: f64, duration: f64 },

    #[error("no signal: link {0} is outside the transmitter beam or receiver field of view")]
    NoSignal(String),

    #[error("angle {angle_deg:.3} deg is outside the receiver field of view")]
    OutOfFov { angle_deg: f64 },

    #[error("degenerate motion: relative displacement {0:.3e} m is below 1 mm")]
    DegenerateMotion(f64),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("{method} is inapplicable: {assumption}")]
    MethodInapplicable { method: String, assumption: String },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
