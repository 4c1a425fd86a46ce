//! File formats, parallel drivers and the `rectiscan` command line on top
//! of `rectiscan-core`.

pub mod cli;
pub mod error;
pub mod io;
pub mod parallel;
pub mod report;
pub mod schema;

pub use error::{CliError, CliResult};
