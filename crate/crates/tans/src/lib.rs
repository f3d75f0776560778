//! Experiment harness, file formats and command-line front end for
//! [`tans_core`].

pub mod cli;
pub mod harness;
pub mod output;
pub mod spec;
pub mod trace_io;

pub use harness::{run_experiment, ExperimentOutput, RdPoint};
pub use spec::ExperimentSpec;
