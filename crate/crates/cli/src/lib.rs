//! Config-driven pipeline around `drqa-core`: CSV ingestion and export,
//! reductions, agreement profiles, score tables and plots.

pub mod config;
mod error;
pub mod io;
pub mod pipeline;
pub mod plot;

pub use config::PipelineConfig;
pub use error::{CliError, Result};
pub use pipeline::{run_pipeline, Manifest, ManifestEntry, RunOutput, ScoreRow};
