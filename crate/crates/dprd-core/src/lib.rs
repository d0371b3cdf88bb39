//! Delay-power-rate-distortion (d-P-R-D) models and a Lyapunov repeated
//! iteration optimizer for UAV video coding and transmission.
//!
//! The crate is split along the system model:
//!
//! - [`atg`]: air-to-ground channel geometry, LoS probability, path loss
//! - [`source`]: the video-coding side (residual statistics, quantized
//!   Laplacian entropy bitrate, hyperbolic distortion, motion-estimation
//!   delay, encoding power)
//! - [`fit`]: nonlinear regression of the sigma and delay-coefficient models
//! - [`channel`]: the transmission side (SNR, achievable rate, BER
//!   distortion, sending delay, power accounting)
//! - [`conic`]: SCA linearizations and the exponential/rotated-quadratic
//!   cone subproblem builders
//! - [`solve`]: the reference conic-program solver (slack elimination plus
//!   bounded 1-D/2-D minimization)
//! - [`lyari`]: the virtual queue, drift-plus-penalty surrogate, and the
//!   per-slot two-stage iterative algorithm
//! - [`oracle`]: independent brute-force grid reference for validation
//!
//! The crate is `no_std` (with `alloc`); all IO, file formats, and the CLI
//! live in the companion `dprd-sim` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

pub mod atg;
pub mod channel;
pub mod conic;
pub mod fit;
pub mod lyari;
pub mod math;
pub mod oracle;
pub mod slot;
pub mod solve;
pub mod source;

pub use atg::{ChannelEnvironment, PathLoss, TrajectoryConfig};
pub use channel::{PowerBudget, TransmissionModel};
pub use conic::{ConeConstraint, ConicProgram, LinearizationPoint};
pub use lyari::{OptimizerConfig, SlotResult, VirtualQueue};
pub use oracle::GridSpec;
pub use slot::SlotContext;
pub use source::{DecisionTriple, DelayModel, PowerModel, RateDistortionModel, SigmaModel};
