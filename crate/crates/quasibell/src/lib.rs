//! Command line, file formats and parallel drivers for `quasibell-core`.

pub mod acceptance;
pub mod cli;
pub mod error;
pub mod format;
pub mod input;
pub mod parallel;
pub mod properties;
