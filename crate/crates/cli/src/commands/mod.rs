pub mod eval_worker;
pub mod evolve;
pub mod export;
pub mod ingest;
pub mod mock;
pub mod process;
pub mod report;

use std::path::Path;
use std::process::ExitCode;

use quadforge::config::GlobalConfig;
use quadforge::error::{Error, Result};

/// Loads the TOML config, or defaults when no file is given.
pub fn load_config(path: Option<&Path>) -> Result<GlobalConfig> {
    match path {
        None => Ok(GlobalConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            toml::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", p.display())))
        }
    }
}

pub fn ok() -> Result<ExitCode> {
    Ok(ExitCode::SUCCESS)
}
