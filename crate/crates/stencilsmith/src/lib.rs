//! Host-side companion to `stencilsmith-core`: grid files, a threaded tiled
//! executor, configuration and CSV reports used by the `stencilsmith` binary.

pub mod cli;
pub mod cmd;
pub mod config;
pub mod exec;
pub mod io;
pub mod report;

pub use stencilsmith_core as core;
