//! Experiment configuration, scenario execution and output writing behind the
//! `cqed` binary.

mod config;
mod output;
mod presets;
mod scenarios;

use std::fmt;
use std::path::Path;

pub use config::{
    design_coupling_ghz, design_kappa_mhz, parse_config, ExperimentConfig, MapConfig, Params, Scenario,
    SweepAxis, SweepParam, SweepPoint, TimeConfig,
};
pub use output::{sha256_hex, summary_csv, write_outputs, MANIFEST_VERSION, SUMMARY_VERSION_LINE};
pub use presets::{defaults, preset, Defaults, DesignDefaults, DEFAULTS_TOML};
pub use scenarios::{execute, map_positions, run_name, ExperimentOutput, SummaryRow};

/// Every problem found in a configuration, one message per entry.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            f.write_str(e)?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, crate::Error> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text).map_err(crate::Error::Config)
}
