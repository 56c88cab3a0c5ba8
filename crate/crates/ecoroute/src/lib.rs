//! File formats, reports and the command-line driver for `ecoroute-core`.

pub mod batch;
pub mod cli;
pub mod format;
pub mod report;
pub mod verify;
