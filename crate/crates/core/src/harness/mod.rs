//! Reproduction harness: parameter sweeps, figure data and CSV emission.

pub mod config;
pub mod figures;
pub mod sweep;

pub use config::{ConfigError, SweepConfig, SweepType};
pub use figures::{emit_figure3_data, emit_scatter, figure3_panel, Figure3Panel};
pub use sweep::{cell_seed, run_sweep, write_sweep_csv, SweepCell};

use crate::error::XosError;

pub const DEFAULT_SEED: u64 = 20_200_101;

/// Environment variable that overrides [`DEFAULT_SEED`].
pub const SEED_ENV: &str = "XOS_SEED";

/// Seed from `XOS_SEED` if set, else [`DEFAULT_SEED`].
pub fn default_seed() -> Result<u64, ConfigError> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s.trim().parse().map_err(|_| ConfigError {
            line: None,
            message: format!("{SEED_ENV} must be an unsigned integer, got `{s}`"),
        }),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] XosError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Float formatting used in every CSV: shortest round-trip representation.
pub(crate) fn num(x: f64) -> String {
    format!("{x}")
}
