//! Configuration, initial conditions, snapshots and subcommands behind the
//! `dampflow` binary.

pub mod app;
pub mod config;
pub mod scenario;
pub mod snapshot;
