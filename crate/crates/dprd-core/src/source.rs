//! Video-coding side of the d-P-R-D model: residual standard deviation,
//! quantized-Laplacian entropy bitrate, hyperbolic distortion,
//! motion-estimation delay, and encoding power.

use serde::{Deserialize, Serialize};

use crate::math;

/// Residual standard deviation model `sigma = a1*exp(-a2*lambda) + a3 + a4*Q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaModel {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
}

impl SigmaModel {
    pub fn validate(&self) -> Result<(), &'static str> {
        if !(self.a1 >= 0.0 && self.a2 > 0.0 && self.a3 > 0.0 && self.a4 >= 0.0) {
            return Err("sigma model requires a1 >= 0, a2 > 0, a3 > 0, a4 >= 0");
        }
        Ok(())
    }
}

/// Hyperbolic rate-distortion model `D = C * R^-K` with rounding offset `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateDistortionModel {
    pub c: f64,
    pub k: f64,
    pub mu: f64,
}

impl RateDistortionModel {
    pub fn validate(&self) -> Result<(), &'static str> {
        if !(self.c > 0.0 && self.k > 0.0) {
            return Err("rate-distortion model requires C > 0 and K > 0");
        }
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err("rounding-offset fraction mu must lie in (0,1)");
        }
        Ok(())
    }
}

/// Motion-estimation delay coefficient `d_coe(Q) = d1*(d2*exp(-d3*Q) + d4)`.
///
/// The per-frame delay is `(2*lambda+1)^2 * d_coe(Q)`; `frames_per_slot`
/// scales it to the per-data-unit delay checked against the total budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayModel {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
    pub frames_per_slot: f64,
}

impl DelayModel {
    pub fn validate(&self) -> Result<(), &'static str> {
        if !(self.frames_per_slot > 0.0) {
            return Err("frames_per_slot must be positive");
        }
        // d_coe must stay positive over any Q >= 0
        if !(self.d1 * (self.d2 + self.d4) > 0.0) || !(self.d1 * self.d4 >= 0.0) {
            return Err("delay coefficient model must be positive over the Q box");
        }
        Ok(())
    }

    /// `d_coe(Q)` in seconds per frame per SAD grid point.
    pub fn dcoe(&self, q: f64) -> f64 {
        self.d1 * (self.d2 * math::exp(-self.d3 * q) + self.d4)
    }
}

/// Dynamic power-scaling model `P_e = k * F_clk^3` plus circuit power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    /// Dynamic power scaling constant (mW/Hz^3).
    pub k: f64,
    /// CPU clock frequency (Hz).
    pub f_clk_hz: f64,
    /// Circuit power (mW).
    pub circuit_mw: f64,
}

impl PowerModel {
    pub fn validate(&self) -> Result<(), &'static str> {
        if !(self.k > 0.0) {
            return Err("power scaling constant k must be positive");
        }
        if !(self.circuit_mw >= 0.0) {
            return Err("circuit power must be non-negative");
        }
        Ok(())
    }
}

/// One per-slot decision: search range, quantization step, transmit power.
///
/// `lambda` is an integer in encoder terms but is relaxed to a real during
/// optimization and rounded only at final convergence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionTriple {
    pub lambda: f64,
    pub q: f64,
    pub pt_mw: f64,
}

/// Residual standard deviation at `(lambda, Q)`.
pub fn sigma(model: &SigmaModel, lambda: f64, q: f64) -> f64 {
    model.a1 * math::exp(-model.a2 * lambda) + model.a3 + model.a4 * q
}

/// Probability of the quantized residual falling in the zero bin,
/// `P0 = 1 - exp(delta*Q*(mu-1))` with `delta = sqrt(2)/sigma`.
pub fn laplace_p0(delta: f64, q: f64, mu: f64) -> f64 {
    1.0 - math::exp(delta * q * (mu - 1.0))
}

/// Probability of the n-th quantization bin (n >= 1),
/// `P_n = 0.5*(1 - exp(-delta*Q)) * exp(delta*Q*(mu - n))`.
pub fn laplace_pn(delta: f64, q: f64, mu: f64, n: u32) -> f64 {
    debug_assert!(n >= 1);
    0.5 * (-math::expm1(-delta * q)) * math::exp(delta * q * (mu - f64::from(n)))
}

/// Closed-form entropy of the quantized Laplacian residual distribution,
/// in bits per source symbol:
///
/// `R_e = 1 - P0*log2(2*P0)
///        + (1-P0) * [ dq*log2(e)/(1-exp(-dq)) - log2(exp(mu*dq) - exp((mu-1)*dq)) ]`
///
/// with `dq = delta*Q`. Extreme `dq` is handled by its limits: 0 as
/// `dq -> inf` (deterministic symbol).
pub fn entropy_bits(delta: f64, q: f64, mu: f64) -> f64 {
    let dq = delta * q;
    // beyond ~700 the exponentials overflow/underflow; the entropy is
    // already below 1e-300 there
    if dq > 690.0 {
        return 0.0;
    }
    let p0 = laplace_p0(delta, q, mu);
    let tail = 1.0 - p0; // = exp(dq*(mu-1))
    let p0_term = if p0 > 0.0 { -p0 * math::log2(2.0 * p0) } else { 0.0 };
    // log2(exp(mu*dq) - exp((mu-1)*dq)) = mu*dq*log2(e) + log2(1 - exp(-dq))
    let log_gap = mu * dq * math::LOG2_E + math::log2(-math::expm1(-dq));
    let bracket = dq * math::LOG2_E / (-math::expm1(-dq)) - log_gap;
    (1.0 + p0_term + tail * bracket).max(0.0)
}

/// Coding bitrate `R_e(lambda, Q)` in bits per source symbol.
pub fn coding_bitrate(model: &SigmaModel, rd: &RateDistortionModel, lambda: f64, q: f64) -> f64 {
    let s = sigma(model, lambda, q);
    debug_assert!(s > 0.0);
    let delta = math::sqrt(2.0) / s;
    entropy_bits(delta, q, rd.mu)
}

/// Errors from the video-coding model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceError {
    /// `D_e` requested at zero bitrate (infinite distortion).
    ZeroBitrate,
    /// QP outside the standard 0..=51 range.
    QpOutOfRange(i32),
}

impl core::fmt::Display for SourceError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SourceError::ZeroBitrate => write!(f, "coding distortion undefined at R_e = 0"),
            SourceError::QpOutOfRange(qp) => write!(f, "QP {qp} outside [0, 51]"),
        }
    }
}

/// Hyperbolic coding distortion `D_e = C * R_e^-K`.
pub fn coding_distortion(rd: &RateDistortionModel, re: f64) -> Result<f64, SourceError> {
    if re <= 0.0 {
        return Err(SourceError::ZeroBitrate);
    }
    Ok(rd.c * math::pow(re, -rd.k))
}

/// Per-slot coding delay `(2*lambda+1)^2 * d_coe(Q) * frames_per_slot` (s).
pub fn coding_delay(model: &DelayModel, lambda: f64, q: f64) -> f64 {
    let w = 2.0 * lambda + 1.0;
    w * w * model.dcoe(q) * model.frames_per_slot
}

/// Raw per-frame motion-estimation delay of the untfitted form,
/// `N*(2*lambda+1)^2 * r(Q) * Cs / F_clk` (s).
pub fn coding_delay_raw(n_units: f64, lambda: f64, r_q: f64, cycles_per_sad: f64, f_clk_hz: f64) -> f64 {
    let w = 2.0 * lambda + 1.0;
    n_units * w * w * r_q * cycles_per_sad / f_clk_hz
}

/// Encoding power `P_e = k * F_clk^3` (mW).
pub fn coding_power(model: &PowerModel) -> f64 {
    model.k * model.f_clk_hz * model.f_clk_hz * model.f_clk_hz
}

/// HEVC quantization step for an integer QP: `Q = 2^((QP-4)/6)`.
pub fn qp_to_qstep(qp: i32) -> Result<f64, SourceError> {
    if !(0..=51).contains(&qp) {
        return Err(SourceError::QpOutOfRange(qp));
    }
    Ok(math::pow(2.0, f64::from(qp - 4) / 6.0))
}

/// Nearest integer QP for a quantization step (clamped to 0..=51).
pub fn qstep_to_qp(q: f64) -> i32 {
    let qp = math::round(6.0 * math::log2(q) + 4.0) as i32;
    qp.clamp(0, 51)
}

/// Direct series summation of the quantized-residual entropy
/// (`-P0 log2 P0 - 2 sum Pn log2 Pn`), truncated so the geometric tail is
/// below 1e-12. Independent oracle for [`entropy_bits`].
pub fn entropy_bits_series(delta: f64, q: f64, mu: f64) -> f64 {
    let dq = delta * q;
    if dq > 690.0 {
        return 0.0;
    }
    let p0 = laplace_p0(delta, q, mu);
    let mut h = if p0 > 0.0 { -p0 * math::log2(p0) } else { 0.0 };
    let n_star = (math::floor(40.0 / dq) as u32).saturating_add(8);
    for n in 1..=n_star {
        let pn = laplace_pn(delta, q, mu, n);
        if pn <= 0.0 {
            break;
        }
        h -= 2.0 * pn * math::log2(pn);
    }
    h
}
