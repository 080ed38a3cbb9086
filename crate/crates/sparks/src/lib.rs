//! Command-line driver for `sparks-core`: file IO, the external solver
//! bridge, threaded verification and the `sparks` binary.

pub mod check;
pub mod cli;
pub mod files;
pub mod pipeline;
pub mod solver;

pub use sparks_core;
