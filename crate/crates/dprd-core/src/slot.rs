//! Shared per-slot evaluation context.
//!
//! A [`SlotContext`] bundles the model handles, weights, budgets, and the
//! channel state of one time slot, and evaluates the true per-slot
//! drift-plus-penalty objective and constraints directly from the raw
//! models. Both the iterative optimizer and the brute-force oracle consume
//! it; only the optimizer additionally goes through the conic layer.

use serde::{Deserialize, Serialize};

use crate::channel::{self, PowerBudget, TransmissionModel};
use crate::source::{self, DecisionTriple, DelayModel, RateDistortionModel, SigmaModel};

/// Constraint-feasibility tolerance used when re-checking solutions.
pub const FEAS_TOL: f64 = 1e-9;

/// Everything needed to evaluate one slot's objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotContext {
    /// Hinge of the virtual queue, `[X(t)]^+`.
    pub queue_plus: f64,
    /// Linear-scale path loss of the slot.
    pub l_atg_linear: f64,
    pub sigma: SigmaModel,
    pub rd: RateDistortionModel,
    pub delay: DelayModel,
    pub transmission: TransmissionModel,
    pub budget: PowerBudget,
    /// Lyapunov trade-off weight V.
    pub v: f64,
    /// Channel-distortion weight.
    pub rho1: f64,
    /// Power weight.
    pub rho2: f64,
    /// Total end-to-end delay budget (s).
    pub d_max_s: f64,
    /// Tolerable transmission delay (s).
    pub d_max_trans_s: f64,
    /// Source symbols per second; converts R_e (bits/symbol) to bps.
    pub symbol_rate: f64,
    /// Admissible search-range interval.
    pub lambda_box: (f64, f64),
    /// Admissible quantization-step interval.
    pub q_box: (f64, f64),
    /// Admissible transmit-power interval (mW).
    pub pt_box: (f64, f64),
}

/// Per-constraint feasibility flags (rate, delay, power).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintFlags {
    /// `L/(B*d_max_trans) <= R_c`.
    pub rate_ok: bool,
    /// `d(lambda,Q) + t_send <= d_max`.
    pub delay_ok: bool,
    /// `P_tot <= P_max`.
    pub power_ok: bool,
}

impl ConstraintFlags {
    pub fn all_ok(&self) -> bool {
        self.rate_ok && self.delay_ok && self.power_ok
    }
}

/// Full evaluation of a decision triple against the slot's models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotEvaluation {
    /// Coding bitrate, bits per source symbol.
    pub re_bits: f64,
    /// Coding bitrate in bps after symbol-rate scaling.
    pub re_bps: f64,
    /// Channel rate (bps/Hz).
    pub rc: f64,
    /// Channel throughput `B*R_c` (bps).
    pub b_rc_bps: f64,
    /// Coding distortion.
    pub de: f64,
    /// Channel bit error distortion.
    pub dc: f64,
    /// Total power (mW).
    pub ptot: f64,
    /// Sending delay (s).
    pub t_send: f64,
    /// Coding delay (s).
    pub d_code: f64,
    /// The per-slot drift-plus-penalty objective value.
    pub objective: f64,
    pub flags: ConstraintFlags,
}

impl SlotContext {
    /// Evaluate the true objective
    /// `[X]^+ (R_e - B R_c) + V (D_e + rho1 D_c + rho2 P_tot)`
    /// and all per-slot constraints at a decision triple, using only the
    /// raw models.
    pub fn evaluate(&self, d: &DecisionTriple) -> SlotEvaluation {
        let re_bits = source::coding_bitrate(&self.sigma, &self.rd, d.lambda, d.q);
        let re_bps = re_bits * self.symbol_rate;
        let snr = channel::snr(d.pt_mw, self.l_atg_linear, self.transmission.noise_mw);
        let rc = channel::data_rate(snr);
        let b_rc_bps = self.transmission.bandwidth_hz * rc;
        let de = match source::coding_distortion(&self.rd, re_bits) {
            Ok(v) => v,
            Err(_) => f64::INFINITY,
        };
        let dc = channel::channel_distortion(d.pt_mw, self.l_atg_linear, self.transmission.noise_mw);
        let (ptot, power_ok) = channel::total_power(&self.budget, d.pt_mw);
        let t_send = if rc > 0.0 {
            self.transmission.unit_bits / (self.transmission.bandwidth_hz * rc)
        } else {
            f64::INFINITY
        };
        let d_code = source::coding_delay(&self.delay, d.lambda, d.q);

        let rc_floor = self.transmission.unit_bits / (self.transmission.bandwidth_hz * self.d_max_trans_s);
        let flags = ConstraintFlags {
            rate_ok: rc + FEAS_TOL >= rc_floor,
            delay_ok: d_code + t_send <= self.d_max_s + FEAS_TOL,
            power_ok,
        };
        let objective = self.queue_plus * (re_bps - b_rc_bps)
            + self.v * (de + self.rho1 * dc + self.rho2 * ptot);
        SlotEvaluation {
            re_bits,
            re_bps,
            rc,
            b_rc_bps,
            de,
            dc,
            ptot,
            t_send,
            d_code,
            objective,
            flags,
        }
    }

    /// True whether the triple lies inside the decision boxes.
    pub fn in_box(&self, d: &DecisionTriple) -> bool {
        d.lambda >= self.lambda_box.0 - FEAS_TOL
            && d.lambda <= self.lambda_box.1 + FEAS_TOL
            && d.q >= self.q_box.0 - FEAS_TOL
            && d.q <= self.q_box.1 + FEAS_TOL
            && d.pt_mw >= self.pt_box.0 - FEAS_TOL
            && d.pt_mw <= self.pt_box.1 + FEAS_TOL
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::math::fabs;

    pub(crate) fn test_context() -> SlotContext {
        SlotContext {
            queue_plus: 0.0,
            l_atg_linear: 5e9,
            sigma: SigmaModel { a1: 5.0, a2: 0.1, a3: 2.0, a4: 0.05 },
            rd: RateDistortionModel { c: 0.0015, k: 0.55, mu: 0.1 },
            delay: DelayModel { d1: 0.02, d2: 50.0, d3: 0.08, d4: 0.5, frames_per_slot: 1.0 },
            transmission: TransmissionModel { bandwidth_hz: 1e7, noise_mw: 1e-10, unit_bits: 1e6 },
            budget: PowerBudget { p_max_mw: 2000.0, p_circuit_mw: 100.0, p_encode_mw: 1300.0 },
            v: 4.0,
            rho1: 2.0,
            rho2: 0.01,
            d_max_s: 3.0,
            d_max_trans_s: 0.02,
            symbol_rate: 3_041_280.0,
            lambda_box: (1.0, 32.0),
            q_box: (5.04, 228.0),
            pt_box: (1.0, 600.0),
        }
    }

    #[test]
    fn objective_composes_raw_models() {
        let ctx = SlotContext { queue_plus: 2.0, ..test_context() };
        let d = DecisionTriple { lambda: 2.0, q: 60.0, pt_mw: 50.0 };
        let ev = ctx.evaluate(&d);
        let manual = 2.0 * (ev.re_bps - ev.b_rc_bps)
            + 4.0 * (ev.de + 2.0 * ev.dc + 0.01 * ev.ptot);
        assert!(fabs(ev.objective - manual) < 1e-9);
        assert!(ev.flags.all_ok());
    }

    #[test]
    fn constraint_flags_trip() {
        let ctx = test_context();
        // power: Pt beyond headroom
        let ev = ctx.evaluate(&DecisionTriple { lambda: 1.0, q: 20.0, pt_mw: 601.0 });
        assert!(!ev.flags.power_ok);
        // rate: tiny Pt cannot reach the d_max_trans rate floor
        let ev = ctx.evaluate(&DecisionTriple { lambda: 1.0, q: 20.0, pt_mw: 0.01 });
        assert!(!ev.flags.rate_ok);
        // delay: small Q blows up the coding delay at large lambda
        let ev = ctx.evaluate(&DecisionTriple { lambda: 32.0, q: 5.04, pt_mw: 50.0 });
        assert!(!ev.flags.delay_ok);
    }
}
