//! Front end for `fuhp-core`: argument parsing, command dispatch and the
//! JSON / CSV document formats.

pub mod args;
pub mod commands;
pub mod output;

pub use args::Cli;
pub use commands::{run, Status};
