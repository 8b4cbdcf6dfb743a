//! Batch runner for the catsim experiments and the acceptance verifier.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod targets;
pub mod verify;

pub use config::{Experiment, ExperimentConfig, Format, Settings};
pub use error::{CliError, Result};

use std::fs::File;
use std::io::{BufWriter, Write};

/// Runs one experiment and writes its table where the configuration says.
pub fn run(config: &ExperimentConfig) -> Result<output::Table> {
    let table = experiments::run(config)?;
    match &config.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            output::write(&table, config, &mut w)?;
            w.flush()?;
        }
        None => output::write(&table, config, &mut std::io::stdout().lock())?,
    }
    Ok(table)
}
