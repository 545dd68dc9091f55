//! Library surface of the `rppg` CLI: configuration handling and the stage
//! commands, exposed so integration tests can drive them without spawning
//! processes.

pub mod commands;
pub mod config;

pub use commands::RunReport;
pub use config::{MaskProvider, MethodSel, PipelineConfig};
