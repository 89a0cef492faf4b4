//! Match-log ingestion, run configuration and the pipelines behind the
//! `gelo` command-line tool.

pub mod config;
pub mod csv_io;
pub mod error;
pub mod pipeline;
pub mod studies;

pub use error::{AppError, Result};
