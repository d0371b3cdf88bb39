//! Transmission side of the d-P-R-D model: SNR, achievable rate, BER
//! distortion, sending delay, and total power accounting.

use serde::{Deserialize, Serialize};

use crate::math;

/// Radio parameters of the UAV downlink.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmissionModel {
    /// Network bandwidth (Hz).
    pub bandwidth_hz: f64,
    /// Noise power (mW).
    pub noise_mw: f64,
    /// Length of one sending data unit (bits).
    pub unit_bits: f64,
}

impl TransmissionModel {
    pub fn validate(&self) -> Result<(), &'static str> {
        if !(self.bandwidth_hz > 0.0 && self.noise_mw > 0.0 && self.unit_bits > 0.0) {
            return Err("bandwidth, noise power, and data unit length must be positive");
        }
        Ok(())
    }
}

/// Per-slot power budget split into fixed and decision parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerBudget {
    /// Maximum total UAV power (mW).
    pub p_max_mw: f64,
    /// Circuit power (mW).
    pub p_circuit_mw: f64,
    /// Encoding power (mW), `k * F_clk^3` from the source model.
    pub p_encode_mw: f64,
}

impl PowerBudget {
    pub fn validate(&self) -> Result<(), &'static str> {
        if self.p_circuit_mw + self.p_encode_mw > self.p_max_mw {
            return Err("circuit plus encoding power already exceeds the power budget");
        }
        Ok(())
    }

    /// Power left for transmission, `Pmax - Pc - Pe`.
    pub fn pt_headroom_mw(&self) -> f64 {
        self.p_max_mw - self.p_circuit_mw - self.p_encode_mw
    }
}

/// Received SNR `Pt / (L_atg * Pn)` (dimensionless, linear scale).
pub fn snr(pt_mw: f64, l_atg_linear: f64, noise_mw: f64) -> f64 {
    pt_mw / (l_atg_linear * noise_mw)
}

/// Achievable data rate `log2(1 + snr)` in bps/Hz.
pub fn data_rate(snr: f64) -> f64 {
    math::log2(1.0 + snr)
}

/// Bit error distortion `0.5 * (1 - erf(sqrt(snr)))`.
pub fn channel_distortion(pt_mw: f64, l_atg_linear: f64, noise_mw: f64) -> f64 {
    let s = snr(pt_mw, l_atg_linear, noise_mw);
    0.5 * (1.0 - math::erf(math::sqrt(s)))
}

/// Errors from the transmission model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChannelError {
    /// Sending delay requested at zero rate.
    ZeroRate,
}

impl core::fmt::Display for ChannelError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ChannelError::ZeroRate => write!(f, "sending delay undefined at R_c = 0"),
        }
    }
}

/// Sending delay `L / (B * R_c)` in seconds.
pub fn sending_delay(unit_bits: f64, bandwidth_hz: f64, rc: f64) -> Result<f64, ChannelError> {
    if rc <= 0.0 {
        if unit_bits == 0.0 {
            return Ok(0.0);
        }
        return Err(ChannelError::ZeroRate);
    }
    Ok(unit_bits / (bandwidth_hz * rc))
}

/// Total power `Pc + Pe + Pt` and its feasibility against `Pmax`.
pub fn total_power(budget: &PowerBudget, pt_mw: f64) -> (f64, bool) {
    let total = budget.p_circuit_mw + budget.p_encode_mw + pt_mw;
    (total, total <= budget.p_max_mw)
}
