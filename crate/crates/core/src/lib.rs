//! Dual-band rat-race couplers and Gysel power dividers with arbitrary
//! division ratios: design equations, shifter synthesis, circuit simulation,
//! design-space sweeps and feed polarization.

pub mod error;
pub mod fmt;
pub mod io;
pub mod polarization;
pub mod report;
pub mod shifter;
pub mod sim;
pub mod solver;
pub mod space;
pub mod types;

pub use error::{Error, Result};
pub use types::*;
