//! Configuration, experiment presets and file output.

pub mod config;
pub mod csv_out;
pub mod experiment;

pub use config::{parse_config, parse_config_text, preset, preset_with_overrides, SimConfig};
pub use csv_out::{read_energy_csv, write_energy_csv, write_field_csv, write_profile_csv};
pub use experiment::{build, run_experiment, snapshot_name, RunReport};
