//! Command-line front end and benchmark harness for the `gf-flush` attack.

pub mod campaign;
pub mod config;
pub mod report;

pub use campaign::{gen_random_spec, run_campaign, run_simulation, Campaign, CampaignError, Summary};
pub use config::{parse_config, ConfigError, ExperimentConfig, Mode, RawConfig};
pub use report::{emit_results, parse_records, BenchRecord, Format, SimulationRecord};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const INVALID_CONFIG: i32 = 1;
    pub const MODEL_MISMATCH: i32 = 2;
    pub const ALL_TIMED_OUT: i32 = 3;
}
