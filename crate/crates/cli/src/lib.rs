//! Command-line front end and benchmark harness for the
//! searchable-encryption toolkit in `spchs-core`.

pub mod bench;
pub mod commands;

pub use commands::{run_command, run_with_output};
