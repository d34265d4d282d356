//! Experiment harness: built-in games, file formats, seeded batches and the
//! acceptance suite behind the `mpg-lab` command.

pub mod acceptance;
pub mod catalog;
pub mod config;
pub mod experiment;
pub mod format;
