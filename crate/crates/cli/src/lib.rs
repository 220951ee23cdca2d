//! Command-line front end for coherent-state quantization: operator
//! matrices, spectra, symbol grids and the oracle verification suite.

pub mod config;
pub mod output;
pub mod run;
pub mod verify;

pub use config::{parse, RunConfig};
pub use run::{compute, execute, Outcome, Product};
