//! Degeneration sweeps: evaluate a quantity along a decreasing grid of
//! pinching lengths, fit the power law and write the reports.

pub mod config;
pub mod fit;
pub mod report;
pub mod sweep;
