use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// The four localization methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Phase difference of arrival, parallel vehicles only.
    PDoA,
    /// Roundtrip time of flight.
    RToF,
    /// Angle of arrival at two quadrant receivers.
    AoA2,
    /// Angle of arrival at one quadrant receiver plus vehicle motion sensors.
    AoA1,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::PDoA, Method::RToF, Method::AoA2, Method::AoA1];

    /// Number of measured parameters (observations).
    pub fn observation_dim(self) -> usize {
        match self {
            Method::PDoA => 2,
            Method::RToF | Method::AoA2 => 4,
            Method::AoA1 => 6,
        }
    }

    /// Number of estimated coordinates.
    pub fn parameter_dim(self) -> usize {
        self.observation_dim()
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::PDoA => "PDoA",
            Method::RToF => "RToF",
            Method::AoA2 => "AoA2",
            Method::AoA1 => "AoA1",
        }
    }

    /// Names of the observations, in order.
    pub fn observation_names(self) -> &'static [&'static str] {
        match self {
            Method::PDoA => &["delta_d_a", "delta_d_b"],
            Method::RToF => &["d11", "d12", "d21", "d22"],
            Method::AoA2 => &["theta11", "theta12", "theta21", "theta22"],
            Method::AoA1 => &["theta11_t", "theta11_t_dt", "theta12_t", "theta12_t_dt", "alpha", "d_tr"],
        }
    }

    /// Names of the estimated coordinates, in order.
    pub fn parameter_names(self) -> &'static [&'static str] {
        match self {
            Method::PDoA => &["x11", "y11"],
            Method::RToF | Method::AoA2 => &["x11", "y11", "x12", "y12"],
            Method::AoA1 => &["x11", "y11", "x11_dt", "y11_dt", "x12", "y12"],
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pdoa" => Ok(Method::PDoA),
            "rtof" => Ok(Method::RToF),
            "aoa2" => Ok(Method::AoA2),
            "aoa1" => Ok(Method::AoA1),
            other => Err(Error::Config(format!("unknown method '{other}'"))),
        }
    }
}
