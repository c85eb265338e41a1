pub mod channel;
pub mod crlb;
pub mod error;
pub mod geometry;
pub mod measurement;
pub mod method;
pub mod run;
pub mod scenarios;

pub use error::{Error, Result};
pub use method::Method;
