//! Library side of the pipeline CLI: configuration, stage orchestration with
//! a reproducibility manifest, and the cross-platform comparison report.
//! The binary in `main.rs` is a thin argument-parsing layer over this.

pub mod config;
pub mod http;
pub mod manifest;
pub mod pipeline;
pub mod report;
pub mod tables;

pub use config::{RunConfig, ValidatedConfig};
pub use manifest::RunManifest;
pub use pipeline::run_pipeline;
pub use report::cross_platform_report;
