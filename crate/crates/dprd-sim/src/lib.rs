//! Scenario-driven simulator around `dprd-core`: JSON configuration,
//! slot-loop driver, parameter sweeps, fit plumbing, and CSV/JSON artifact
//! emission. The binary in `main.rs` is a thin CLI over these modules.

pub mod config;
pub mod fitio;
pub mod sim;
pub mod sweep;
