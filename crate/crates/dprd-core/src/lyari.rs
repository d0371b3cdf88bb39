//! Lyapunov-guided repeated iteration over the per-slot subproblems.
//!
//! Each slot alternates the quantization-step subproblem with the joint
//! transmit-power/search-range subproblem, re-linearizing at every round,
//! until the true objective stops improving. A virtual queue tracks the
//! coding-vs-transmission rate backlog across slots and feeds the next
//! slot's drift weight.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::conic::{self, LinearizationPoint};
use crate::math;
use crate::slot::{ConstraintFlags, SlotContext, SlotEvaluation};
use crate::solve::{self, SolveError};
use crate::source::DecisionTriple;

/// Tunables of the repeated-iteration optimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Maximum alternation rounds per slot.
    pub r_max: usize,
    /// Relative improvement threshold that stops the alternation.
    pub conv_tol: f64,
    /// Starting triple of the first slot; later slots warm-start from the
    /// previous slot's decision.
    pub initial: DecisionTriple,
    /// Initial virtual-queue level (bps backlog).
    pub x_init: f64,
    /// Round the final search range to an integer.
    pub integer_lambda: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            r_max: 30,
            conv_tol: 1e-5,
            initial: DecisionTriple { lambda: 2.0, q: 60.0, pt_mw: 100.0 },
            x_init: 0.0,
            integer_lambda: true,
        }
    }
}

/// The virtual queue of the rate backlog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirtualQueue {
    /// Current level X(t) (bps; may go negative).
    pub x: f64,
    /// Running maximum of `[X]^+` over past slots.
    pub peak_plus: f64,
    /// Number of updates applied.
    pub slots: u64,
}

impl VirtualQueue {
    pub fn new(x_init: f64) -> Self {
        VirtualQueue { x: x_init, peak_plus: x_init.max(0.0), slots: 0 }
    }

    /// `[X]^+`, the drift weight of the current slot.
    pub fn plus(&self) -> f64 {
        self.x.max(0.0)
    }

    /// Apply `X <- X + Re_bps - B*Rc` and update the running peak.
    pub fn update(&mut self, re_bps: f64, b_rc_bps: f64) {
        self.x += re_bps - b_rc_bps;
        self.slots += 1;
        self.peak_plus = self.peak_plus.max(self.x.max(0.0));
    }

    /// Stability metric: running peak of `[X]^+` divided by elapsed slots.
    pub fn stability_metric(&self) -> f64 {
        if self.slots == 0 {
            return self.peak_plus;
        }
        self.peak_plus / self.slots as f64
    }
}

/// One-slot Lyapunov drift `0.5*(([X']^+)^2 - ([X]^+)^2)` under the queue
/// update `X' = X + Re_bps - B*Rc_bps`.
pub fn lyapunov_drift(x: f64, re_bps: f64, b_rc_bps: f64) -> f64 {
    let x_next = (x + re_bps - b_rc_bps).max(0.0);
    let x_plus = x.max(0.0);
    0.5 * (x_next * x_next - x_plus * x_plus)
}

/// Upper bound of one slot's drift-plus-penalty,
/// `[X]^+ (Re - B*Rc) + 0.5*(B*Rc_max)^2 + V*(De + rho1*Dc + rho2*Ptot)`,
/// where `Rc_max` is the rate at full transmit headroom.
pub fn drift_penalty_upper_bound(ctx: &SlotContext, ev: &SlotEvaluation) -> f64 {
    let pt_hi = ctx.pt_box.1.min(ctx.budget.pt_headroom_mw());
    let snr_max = pt_hi / (ctx.l_atg_linear * ctx.transmission.noise_mw);
    let b_rc_max = ctx.transmission.bandwidth_hz * math::log2(1.0 + snr_max);
    ctx.queue_plus * (ev.re_bps - ev.b_rc_bps)
        + 0.5 * b_rc_max * b_rc_max
        + ctx.v * (ev.de + ctx.rho1 * ev.dc + ctx.rho2 * ev.ptot)
}

/// One round of the alternation trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub round: usize,
    pub lambda: f64,
    pub q: f64,
    pub pt_mw: f64,
    /// True objective at the round's accepted iterate.
    pub objective: f64,
}

/// Result of optimizing one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotResult {
    /// 1-based slot index.
    pub slot: u64,
    pub triple: DecisionTriple,
    pub evaluation: SlotEvaluation,
    /// Queue level before and after the slot's update.
    pub x_before: f64,
    pub x_after: f64,
    /// Running stability metric after the update.
    pub stability: f64,
    pub iterations: Vec<IterationRecord>,
    /// True when the alternation stopped on the improvement threshold
    /// rather than the round cap.
    pub converged: bool,
}

/// Errors from the slot optimizer.
#[derive(Debug, Clone, PartialEq)]
pub enum LyariError {
    /// No feasible decision exists for the slot; carries the blocking
    /// constraints.
    Infeasible { slot: u64, constraints: Vec<String> },
}

impl core::fmt::Display for LyariError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LyariError::Infeasible { slot, constraints } => {
                write!(f, "slot {slot}: no feasible decision ({constraints:?})")
            }
        }
    }
}

fn feasible(ctx: &SlotContext, d: &DecisionTriple) -> bool {
    ctx.in_box(d) && ctx.evaluate(d).flags.all_ok()
}

/// Scan the decision box for any feasible starting triple. The alternation
/// needs a feasible iterate; the warm start may violate the slot's delay
/// or rate constraints after the channel moved.
fn repair_start(ctx: &SlotContext, start: &DecisionTriple) -> Option<DecisionTriple> {
    if feasible(ctx, start) {
        return Some(*start);
    }
    let pt_hi = ctx.pt_box.1.min(ctx.budget.pt_headroom_mw());
    // out-of-box starts often just need projecting (e.g. transmit power
    // above the headroom)
    let clamped = DecisionTriple {
        lambda: start.lambda.clamp(ctx.lambda_box.0, ctx.lambda_box.1),
        q: start.q.clamp(ctx.q_box.0, ctx.q_box.1),
        pt_mw: start.pt_mw.clamp(ctx.pt_box.0, pt_hi),
    };
    if feasible(ctx, &clamped) {
        return Some(clamped);
    }
    for li in 0..8 {
        let lambda = ctx.lambda_box.0
            + (ctx.lambda_box.1 - ctx.lambda_box.0) * li as f64 / 7.0;
        for qi in 0..12 {
            let q = ctx.q_box.0 + (ctx.q_box.1 - ctx.q_box.0) * qi as f64 / 11.0;
            for pi in 0..12 {
                let t = pi as f64 / 11.0;
                let pt = ctx.pt_box.0 * math::pow(pt_hi / ctx.pt_box.0, t);
                let cand = DecisionTriple { lambda, q, pt_mw: pt };
                if feasible(ctx, &cand) {
                    return Some(cand);
                }
            }
        }
    }
    None
}

/// Round the search range to an admissible integer without violating the
/// delay constraint: prefer rounding down (shorter coding delay), fall
/// back to the other neighbor.
fn round_lambda(ctx: &SlotContext, d: &DecisionTriple) -> DecisionTriple {
    let down = DecisionTriple { lambda: math::floor(d.lambda).max(ctx.lambda_box.0), ..*d };
    if feasible(ctx, &down) {
        return down;
    }
    let up = DecisionTriple { lambda: (down.lambda + 1.0).min(ctx.lambda_box.1), ..*d };
    if feasible(ctx, &up) {
        return up;
    }
    down
}

/// Accept a subproblem candidate if some point on the segment from the
/// current iterate to the candidate is feasible and improves the true
/// objective. Subproblem optima often sit exactly on a constraint
/// boundary (the delay or rate floor is active), where the strict
/// feasibility recheck can fail by rounding alone; backing off slightly
/// toward the interior recovers the step.
fn accept_step(
    ctx: &SlotContext,
    current: &DecisionTriple,
    best_obj: f64,
    cand: &DecisionTriple,
) -> Option<(DecisionTriple, f64)> {
    for alpha in [1.0, 1.0 - 1e-9, 1.0 - 1e-6, 0.999, 0.99, 0.9, 0.5] {
        let step = DecisionTriple {
            lambda: current.lambda + alpha * (cand.lambda - current.lambda),
            q: current.q + alpha * (cand.q - current.q),
            pt_mw: current.pt_mw + alpha * (cand.pt_mw - current.pt_mw),
        };
        if feasible(ctx, &step) {
            let obj = ctx.evaluate(&step).objective;
            if obj <= best_obj {
                return Some((step, obj));
            }
        }
    }
    None
}

/// Optimize one slot by repeated convex approximation.
///
/// Alternates the Q subproblem and the (lambda, Pt) subproblem, each
/// linearized at the current iterate. A candidate round is accepted only
/// if it does not increase the true objective, so the objective trace is
/// non-increasing by construction.
pub fn lyari_slot(
    ctx: &SlotContext,
    config: &OptimizerConfig,
    slot: u64,
    warm: &DecisionTriple,
) -> Result<SlotResult, LyariError> {
    let start = repair_start(ctx, warm).ok_or_else(|| {
        // collect the warm start's violated constraints for the report
        let ev = ctx.evaluate(warm);
        let mut constraints = Vec::new();
        if !ev.flags.rate_ok {
            constraints.push(String::from("rate"));
        }
        if !ev.flags.delay_ok {
            constraints.push(String::from("delay"));
        }
        if !ev.flags.power_ok {
            constraints.push(String::from("power"));
        }
        if constraints.is_empty() {
            constraints.push(String::from("box"));
        }
        LyariError::Infeasible { slot, constraints }
    })?;

    let mut current = start;
    let mut best_obj = ctx.evaluate(&current).objective;
    let mut iterations = Vec::new();
    iterations.push(IterationRecord {
        round: 0,
        lambda: current.lambda,
        q: current.q,
        pt_mw: current.pt_mw,
        objective: best_obj,
    });
    let mut converged = false;

    for round in 1..=config.r_max {
        let prev_obj = best_obj;

        // stage 1: quantization step at fixed (lambda, Pt)
        let point = LinearizationPoint { ctx, triple: current };
        if let Ok(prog) = conic::build_q_subproblem(&point) {
            match solve::solve_conic(&prog) {
                Ok(sol) => {
                    let cand = DecisionTriple { q: sol.decisions[0], ..current };
                    if let Some((step, obj)) = accept_step(ctx, &current, best_obj, &cand) {
                        current = step;
                        best_obj = obj;
                    }
                }
                Err(SolveError::Infeasible { .. }) => {}
            }
        }

        // stage 2: transmit power and search range at the new Q
        let point = LinearizationPoint { ctx, triple: current };
        if let Ok(prog) = conic::build_power_lambda_subproblem(&point) {
            match solve::solve_conic(&prog) {
                Ok(sol) => {
                    let cand = DecisionTriple {
                        lambda: sol.decisions[0],
                        pt_mw: sol.decisions[1],
                        ..current
                    };
                    if let Some((step, obj)) = accept_step(ctx, &current, best_obj, &cand) {
                        current = step;
                        best_obj = obj;
                    }
                }
                Err(SolveError::Infeasible { .. }) => {}
            }
        }

        iterations.push(IterationRecord {
            round,
            lambda: current.lambda,
            q: current.q,
            pt_mw: current.pt_mw,
            objective: best_obj,
        });

        let scale = math::fabs(prev_obj).max(1.0);
        if prev_obj - best_obj <= config.conv_tol * scale {
            converged = true;
            break;
        }
    }

    if config.integer_lambda {
        let rounded = round_lambda(ctx, &current);
        if feasible(ctx, &rounded) {
            current = rounded;
        }
    }

    let evaluation = ctx.evaluate(&current);
    Ok(SlotResult {
        slot,
        triple: current,
        evaluation,
        x_before: 0.0,
        x_after: 0.0,
        stability: 0.0,
        iterations,
        converged,
    })
}

/// Per-slot channel state of a horizon run.
pub trait SlotChannel {
    /// Linear-scale path loss of slot `t` (1-based).
    fn path_loss_linear(&self, t: u64) -> f64;
}

impl<F: Fn(u64) -> f64> SlotChannel for F {
    fn path_loss_linear(&self, t: u64) -> f64 {
        self(t)
    }
}

/// Run the optimizer over a horizon of `t_max` slots, updating the virtual
/// queue between slots. The context template supplies everything except
/// `queue_plus` and `l_atg_linear`, which are filled per slot.
pub fn run_horizon(
    template: &SlotContext,
    config: &OptimizerConfig,
    channel: &dyn SlotChannel,
    t_max: u64,
) -> Result<Vec<SlotResult>, LyariError> {
    let mut queue = VirtualQueue::new(config.x_init);
    let mut warm = config.initial;
    let mut out = Vec::with_capacity(t_max as usize);
    for t in 1..=t_max {
        let mut ctx = template.clone();
        ctx.queue_plus = queue.plus();
        ctx.l_atg_linear = channel.path_loss_linear(t);
        let mut result = lyari_slot(&ctx, config, t, &warm)?;
        result.x_before = queue.x;
        queue.update(result.evaluation.re_bps, result.evaluation.b_rc_bps);
        result.x_after = queue.x;
        result.stability = queue.stability_metric();
        warm = result.triple;
        out.push(result);
    }
    Ok(out)
}

/// Recompute constraint flags of a result against a context (diagnostic).
pub fn recheck(ctx: &SlotContext, result: &SlotResult) -> ConstraintFlags {
    ctx.evaluate(&result.triple).flags
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slot::tests::test_context;

    fn idle_warm() -> DecisionTriple {
        DecisionTriple { lambda: 2.0, q: 60.0, pt_mw: 100.0 }
    }

    #[test]
    fn queue_update_and_hinge() {
        let mut q = VirtualQueue::new(0.0);
        assert_eq!(q.plus(), 0.0);
        q.update(5e6, 2e6);
        assert_eq!(q.x, 3e6);
        q.update(1e6, 6e6);
        assert_eq!(q.x, -2e6);
        assert_eq!(q.plus(), 0.0);
        q.update(1e6, 1e6);
        assert_eq!(q.x, -2e6);
        assert_eq!(q.peak_plus, 3e6);
        assert!(math::fabs(q.stability_metric() - 1e6) < 1e-9);
    }

    #[test]
    fn slot_trace_non_increasing_and_feasible() {
        let mut ctx = test_context();
        ctx.queue_plus = 2.0;
        let config = OptimizerConfig::default();
        let result = lyari_slot(&ctx, &config, 1, &idle_warm()).unwrap();
        assert!(result.evaluation.flags.all_ok());
        assert!(ctx.in_box(&result.triple));
        for w in result.iterations.windows(2) {
            assert!(w[1].objective <= w[0].objective + 1e-12);
        }
        // integer search range
        assert_eq!(result.triple.lambda, math::floor(result.triple.lambda));
    }

    #[test]
    fn improves_on_warm_start() {
        let mut ctx = test_context();
        ctx.queue_plus = 2.0;
        let config = OptimizerConfig::default();
        let warm = idle_warm();
        let start_obj = ctx.evaluate(&warm).objective;
        let result = lyari_slot(&ctx, &config, 1, &warm).unwrap();
        assert!(result.evaluation.objective <= start_obj + 1e-12);
        assert!(result.converged);
    }

    #[test]
    fn infeasible_slot_reports_constraints() {
        let mut ctx = test_context();
        ctx.d_max_trans_s = 1e-9;
        let config = OptimizerConfig::default();
        match lyari_slot(&ctx, &config, 3, &idle_warm()) {
            Err(LyariError::Infeasible { slot, constraints }) => {
                assert_eq!(slot, 3);
                assert!(constraints.contains(&String::from("rate")));
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn horizon_updates_queue_and_warm_start() {
        let template = test_context();
        let config = OptimizerConfig { x_init: 1e6, ..OptimizerConfig::default() };
        let channel = |_t: u64| 5e9;
        let results = run_horizon(&template, &config, &channel, 5).unwrap();
        assert_eq!(results.len(), 5);
        assert_eq!(results[0].x_before, 1e6);
        for w in results.windows(2) {
            assert_eq!(w[0].x_after, w[1].x_before);
        }
        for r in &results {
            assert!(r.evaluation.flags.all_ok());
            let expect = r.x_before + r.evaluation.re_bps - r.evaluation.b_rc_bps;
            assert!(math::fabs(r.x_after - expect) < 1e-6);
        }
    }

    #[test]
    fn drift_bound_dominates_true_drift_plus_penalty() {
        let mut ctx = test_context();
        ctx.queue_plus = 2.5;
        for (lam, q, pt) in [(1.0, 20.0, 10.0), (4.0, 40.0, 100.0), (8.0, 60.0, 400.0)] {
            let ev = ctx.evaluate(&DecisionTriple { lambda: lam, q, pt_mw: pt });
            let bound = drift_penalty_upper_bound(&ctx, &ev);
            assert!(bound >= ev.objective, "bound {bound} < objective {}", ev.objective);
        }
    }
}
