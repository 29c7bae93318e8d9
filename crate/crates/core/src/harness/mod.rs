//! Experiment harness: TOML-configured convergence studies, CSV/SVG output,
//! and the packaged figure reproduction.

pub mod config;
pub mod csvio;
pub mod fig1;
pub mod runner;
pub mod svg;
