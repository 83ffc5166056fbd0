//! Circuit simulation: element matrices, nodal assembly, sweeps and export.

pub mod build;
pub mod isolation;
pub mod nodal;
pub mod sweep;
pub mod touchstone;
pub mod twoport;

pub use build::{build_gpd_network, build_network, build_rrc_network, build_shifter_network};
pub use nodal::{assemble_sparams, SMatrix};
pub use sweep::{
    design_frequency_error, extract_metrics, sweep, MetricChannels, RoleMap, SweepResult,
};
pub use touchstone::{parse_touchstone, write_touchstone};
pub use twoport::TwoPortMatrix;
