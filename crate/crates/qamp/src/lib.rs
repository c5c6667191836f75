//! File formats, index persistence, evaluation runs and synthetic data for
//! [`qamp_core`].

pub mod dataset;
pub mod harness;
pub mod io;
pub mod synth;

pub use qamp_core as core;
