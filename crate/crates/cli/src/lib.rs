//! Command-line front end: sample spec files, trace CSV I/O, bundled
//! reference samples and the `qoct` subcommands.

pub mod commands;
pub mod error;
pub mod reference;
pub mod spec;
pub mod trace;

pub use commands::{run, Cli, Command};
pub use error::{CliError, CliResult, EXIT_NUMERICAL, EXIT_VALIDATION};
pub use spec::{load_sample, save_sample, SampleSpecFile};
pub use trace::{read_trace, write_trace};
