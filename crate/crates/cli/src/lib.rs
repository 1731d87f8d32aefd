//! Configuration, experiment sweeps, result bundles and plot tables for the
//! `neorl` command-line tool.

pub mod config;
pub mod csvio;
pub mod experiment;
pub mod plotdata;
pub mod verify;
