//! Scalar math helpers for `no_std` builds.
//!
//! Transcendental functions go through [`libm`] so the crate works without
//! `std`. The error function is a local rational approximation rather than
//! `libm::erf` because the transmission-distortion model pins its accuracy
//! contract (<= 1.5e-7 absolute) to this specific form.

pub use libm::{atan, exp, expm1, fabs, floor, hypot, log, log2, pow, round, sqrt};

pub const LN_2: f64 = core::f64::consts::LN_2;
pub const PI: f64 = core::f64::consts::PI;

/// Base-2 logarithm of Euler's number.
pub const LOG2_E: f64 = core::f64::consts::LOG2_E;

/// Error function via the Abramowitz-Stegun 7.1.26 rational approximation.
///
/// Maximum absolute error 1.5e-7 over the real line.
pub fn erf(x: f64) -> f64 {
    const A1: f64 = 0.254_829_592;
    const A2: f64 = -0.284_496_736;
    const A3: f64 = 1.421_413_741;
    const A4: f64 = -1.453_152_027;
    const A5: f64 = 1.061_405_429;
    const P: f64 = 0.327_591_1;

    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = fabs(x);
    let t = 1.0 / (1.0 + P * x);
    let poly = ((((A5 * t + A4) * t + A3) * t + A2) * t + A1) * t;
    sign * (1.0 - poly * exp(-x * x))
}

/// Relative difference against a reference value, guarded near zero.
pub fn rel_diff(value: f64, reference: f64) -> f64 {
    fabs(value - reference) / fabs(reference).max(1e-12)
}
