//! Configuration, checked runs, sweeps, curves, and verification suites for
//! the `cupgame` command line tool.

pub mod config;
pub mod csvout;
pub mod curve;
pub mod registry;
pub mod run;
pub mod suites;
pub mod sweep;
