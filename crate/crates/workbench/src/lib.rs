//! Instance files, generators, benchmarks and the `stackelberg` command line
//! around the core learner.

pub mod cli;
pub mod generate;
pub mod io;
pub mod run;
