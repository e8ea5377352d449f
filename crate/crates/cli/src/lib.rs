//! Batch front end for `subexp-core`: JSON experiment configs in, CSV and
//! JSON reports out.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::Config;
pub use error::{CliError, ErrorReport};
pub use output::Report;
pub use run::{run, Command, RunOptions};
