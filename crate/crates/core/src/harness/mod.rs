//! Scenario sweeps, CSV persistence and SVG plots.

pub mod csv_io;
pub mod plot;
pub mod scenario;
