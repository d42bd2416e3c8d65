//! Configuration, built-in scenarios and run orchestration for the
//! radiation hydrodynamics laboratory.

pub mod config;
pub mod error;
pub mod run;
pub mod scenario;

pub use config::{parse_config, to_ini, RunConfig};
pub use error::LabError;
