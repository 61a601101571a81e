//! File formats, configuration, the parallel batch runner and the
//! command-line front end around `crater-nav-core`.

pub mod config;
pub mod io;
pub mod runner;

pub use config::RunConfig;
