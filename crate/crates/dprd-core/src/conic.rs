//! Constraint-transformation layer: SCA linearizations and the standard-form
//! convex cone programs of the two per-slot subproblems.
//!
//! A [`ConicProgram`] is a declarative value: named variables with bounds, a
//! linear objective, and a list of linear rows plus exponential and rotated
//! quadratic cones. Next to that standard form each program carries a
//! reduction recipe — an evaluation order that expresses every slack
//! variable as a closed-form function of the 1-2 true decision variables
//! (all slacks are tight at the optimum). The reference solver minimizes
//! the reduced objective over the decision box; the standard form stays
//! available for JSON inspection and for cross-checking with an external
//! conic solver.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math;
use crate::slot::SlotContext;
use crate::source::{self, DecisionTriple};

/// Relative tolerance when checking constraint rows and cone membership.
pub const CONE_TOL: f64 = 1e-7;

/// Role of a variable in the reduction recipe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarRole {
    Decision,
    Slack,
}

/// One program variable with box bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub role: VarRole,
}

/// Affine expression `sum coeff_i * var_i + constant` over the variables.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Affine {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl Affine {
    pub fn constant(c: f64) -> Self {
        Affine { terms: Vec::new(), constant: c }
    }

    pub fn var(id: usize) -> Self {
        Affine { terms: vec![(id, 1.0)], constant: 0.0 }
    }

    pub fn term(id: usize, coeff: f64) -> Self {
        Affine { terms: vec![(id, coeff)], constant: 0.0 }
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|(id, c)| c * values[*id]).sum::<f64>() + self.constant
    }

    /// Magnitude scale of the row at an assignment, for relative tolerances.
    fn scale(&self, values: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(id, c)| math::fabs(c * values[*id]))
            .fold(math::fabs(self.constant), f64::max)
            .max(1.0)
    }
}

/// One constraint of the standard form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConeConstraint {
    /// `expr <= 0`.
    LinearLe(Affine),
    /// `expr = 0`.
    LinearEq(Affine),
    /// `(x1, x2, x3) in K_exp`: `x1 >= x2 * exp(x3/x2)`, `x1, x2 >= 0`.
    Exponential([Affine; 3]),
    /// `(x1, x2, x3) in Q_r^3`: `2*x1*x2 >= x3^2`, `x1, x2 >= 0`.
    RotatedQuadratic([Affine; 3]),
}

impl ConeConstraint {
    /// Membership/feasibility check with a relative tolerance.
    pub fn satisfied(&self, values: &[f64], tol: f64) -> bool {
        match self {
            ConeConstraint::LinearLe(row) => row.eval(values) <= tol * row.scale(values),
            ConeConstraint::LinearEq(row) => {
                math::fabs(row.eval(values)) <= tol * row.scale(values)
            }
            ConeConstraint::Exponential(x) => {
                let (x1, x2, x3) = (x[0].eval(values), x[1].eval(values), x[2].eval(values));
                if !(x2 > 0.0) {
                    return x2 >= -tol && x1 >= -tol && x3 <= tol;
                }
                let rhs = x2 * math::exp(x3 / x2);
                x1 >= -tol && x1 - rhs >= -tol * math::fabs(rhs).max(1.0)
            }
            ConeConstraint::RotatedQuadratic(x) => {
                let (x1, x2, x3) = (x[0].eval(values), x[1].eval(values), x[2].eval(values));
                let scale = (x3 * x3).max(1.0);
                x1 >= -tol && x2 >= -tol && 2.0 * x1 * x2 - x3 * x3 >= -tol * scale
            }
        }
    }
}

/// Labeled constraint row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub label: String,
    pub kind: ConeConstraint,
}

/// Closed-form scalar expression used by the slack-elimination recipe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ScalarExpr {
    Const(f64),
    Var(usize),
    Sum(Vec<ScalarExpr>),
    Prod(Vec<ScalarExpr>),
    /// `base ^ exponent` with a constant exponent.
    Pow(Box<ScalarExpr>, f64),
    Exp(Box<ScalarExpr>),
    Ln(Box<ScalarExpr>),
}

impl ScalarExpr {
    pub fn eval(&self, values: &[f64]) -> f64 {
        match self {
            ScalarExpr::Const(c) => *c,
            ScalarExpr::Var(id) => values[*id],
            ScalarExpr::Sum(parts) => parts.iter().map(|p| p.eval(values)).sum(),
            ScalarExpr::Prod(parts) => parts.iter().map(|p| p.eval(values)).product(),
            ScalarExpr::Pow(base, e) => math::pow(base.eval(values), *e),
            ScalarExpr::Exp(inner) => math::exp(inner.eval(values)),
            ScalarExpr::Ln(inner) => math::log(inner.eval(values)),
        }
    }

    fn affine(terms: Vec<(usize, f64)>, constant: f64) -> Self {
        let mut parts = vec![ScalarExpr::Const(constant)];
        for (id, c) in terms {
            parts.push(ScalarExpr::Prod(vec![ScalarExpr::Const(c), ScalarExpr::Var(id)]));
        }
        ScalarExpr::Sum(parts)
    }
}

/// Tight-value recipe for one slack variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlackRule {
    pub var: usize,
    pub expr: ScalarExpr,
}

/// A standard-form convex cone program plus its reduction recipe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConicProgram {
    pub vars: Vec<Variable>,
    /// Linear objective to minimize.
    pub objective: Affine,
    pub constraints: Vec<Constraint>,
    /// Decision variable ids, in solver order.
    pub decisions: Vec<usize>,
    /// Slack rules in evaluation order.
    pub rules: Vec<SlackRule>,
}

impl ConicProgram {
    /// Assemble the full assignment for given decision values (slacks at
    /// their tight values). Returns `None` when a rule produces a
    /// non-finite value.
    pub fn assemble(&self, decisions: &[f64]) -> Option<Vec<f64>> {
        debug_assert_eq!(decisions.len(), self.decisions.len());
        let mut values = vec![0.0; self.vars.len()];
        for (id, v) in self.decisions.iter().zip(decisions) {
            values[*id] = *v;
        }
        for rule in &self.rules {
            let v = rule.expr.eval(&values);
            if !v.is_finite() {
                return None;
            }
            values[rule.var] = v;
        }
        Some(values)
    }

    /// Labels of all constraints or bounds violated at an assignment.
    pub fn violations(&self, values: &[f64]) -> Vec<String> {
        let mut out = Vec::new();
        for (id, var) in self.vars.iter().enumerate() {
            let scale = math::fabs(values[id]).max(1.0);
            if values[id] < var.lower - CONE_TOL * scale
                || values[id] > var.upper + CONE_TOL * scale
            {
                out.push(format!("bound:{}", var.name));
            }
        }
        for c in &self.constraints {
            if !c.kind.satisfied(values, CONE_TOL) {
                out.push(c.label.clone());
            }
        }
        out
    }

    /// Objective value at an assignment.
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.eval(values)
    }

    /// Total scaled constraint residual at an assignment; zero when
    /// feasible. Used as a penalty by the reference solver.
    pub fn infeasibility(&self, values: &[f64]) -> f64 {
        let mut total = 0.0;
        for (id, var) in self.vars.iter().enumerate() {
            let scale = math::fabs(values[id]).max(1.0);
            total += ((var.lower - values[id]) / scale).max(0.0);
            if var.upper.is_finite() {
                total += ((values[id] - var.upper) / scale).max(0.0);
            }
        }
        for c in &self.constraints {
            total += match &c.kind {
                ConeConstraint::LinearLe(row) => (row.eval(values) / row.scale(values)).max(0.0),
                ConeConstraint::LinearEq(row) => {
                    math::fabs(row.eval(values)) / row.scale(values)
                }
                ConeConstraint::Exponential(x) => {
                    let (x1, x2, x3) =
                        (x[0].eval(values), x[1].eval(values), x[2].eval(values));
                    if x2 > 0.0 {
                        let rhs = x2 * math::exp(x3 / x2);
                        ((rhs - x1) / math::fabs(rhs).max(1.0)).max(0.0) + (-x1).max(0.0)
                    } else {
                        (-x2).max(0.0) + (-x1).max(0.0) + x3.max(0.0)
                    }
                }
                ConeConstraint::RotatedQuadratic(x) => {
                    let (x1, x2, x3) =
                        (x[0].eval(values), x[1].eval(values), x[2].eval(values));
                    let scale = (x3 * x3).max(1.0);
                    ((x3 * x3 - 2.0 * x1 * x2) / scale).max(0.0)
                        + (-x1).max(0.0)
                        + (-x2).max(0.0)
                }
            };
        }
        total
    }

    /// Reduced objective at a decision vector; `None` when infeasible.
    pub fn reduced_objective(&self, decisions: &[f64]) -> Option<f64> {
        let values = self.assemble(decisions)?;
        if self.violations(&values).is_empty() {
            Some(self.objective_value(&values))
        } else {
            None
        }
    }
}

/// The current SCA iterate with its per-slot context.
#[derive(Debug, Clone)]
pub struct LinearizationPoint<'a> {
    pub ctx: &'a SlotContext,
    pub triple: DecisionTriple,
}

/// Errors while building a subproblem.
#[derive(Debug, Clone, PartialEq)]
pub enum ConicError {
    /// A constraint is unsatisfiable over the decision box.
    Infeasible { constraint: String },
}

impl core::fmt::Display for ConicError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ConicError::Infeasible { constraint } => {
                write!(f, "subproblem infeasible: {constraint}")
            }
        }
    }
}

/// Tangent line `(value, slope)` of a univariate function at `x0` by
/// central finite differences with a magnitude-scaled step.
fn fd_tangent(f: impl Fn(f64) -> f64, x0: f64) -> (f64, f64) {
    let h = 1e-5 * math::fabs(x0).max(1.0);
    let slope = (f(x0 + h) - f(x0 - h)) / (2.0 * h);
    (f(x0), slope)
}

/// Linearize `R_e` in Q at the iterate: returns `(value, slope)` of the
/// tangent at `Q0` with lambda held at the current iterate.
pub fn linearize_re_in_q(point: &LinearizationPoint<'_>) -> (f64, f64) {
    let ctx = point.ctx;
    let lambda = point.triple.lambda;
    fd_tangent(
        |q| source::coding_bitrate(&ctx.sigma, &ctx.rd, lambda, q),
        point.triple.q,
    )
}

/// Linearize `R_e` in lambda at the iterate with Q held fixed.
pub fn linearize_re_in_lambda(point: &LinearizationPoint<'_>) -> (f64, f64) {
    let ctx = point.ctx;
    let q = point.triple.q;
    fd_tangent(
        |lam| source::coding_bitrate(&ctx.sigma, &ctx.rd, lam, q),
        point.triple.lambda,
    )
}

/// Linearize the BER distortion in `P_t` at the iterate, using the
/// closed-form derivative of `0.5*(1 - erf(sqrt(snr)))`:
///
/// `dD_c/dP_t = -exp(-snr) / (2*sqrt(pi*snr) * L_atg * P_n)`
///
/// The iterate is clamped to the transmit-power floor first; the
/// derivative is singular at `P_t = 0`.
pub fn linearize_dc_in_pt(point: &LinearizationPoint<'_>) -> (f64, f64) {
    let ctx = point.ctx;
    let pt0 = point.triple.pt_mw.max(ctx.pt_box.0);
    let noise_scale = ctx.l_atg_linear * ctx.transmission.noise_mw;
    let snr0 = pt0 / noise_scale;
    let value = 0.5 * (1.0 - math::erf(math::sqrt(snr0)));
    let slope = -math::exp(-snr0) / (2.0 * math::sqrt(math::PI * snr0) * noise_scale);
    (value, slope)
}

/// Lower bound on Q implied by the delay constraint at a fixed search
/// range and sending delay: solves
/// `(2*lambda+1)^2 * fps * d1*(d2*exp(-d3*Q) + d4) + t_send <= d_max`.
///
/// Returns `None` when the constraint holds for every Q, an error when it
/// can hold for none.
fn delay_q_lower_bound(
    ctx: &SlotContext,
    lambda: f64,
    t_send: f64,
) -> Result<Option<f64>, ConicError> {
    let w = 2.0 * lambda + 1.0;
    let weight = w * w * ctx.delay.frames_per_slot * ctx.delay.d1;
    let budget = ctx.d_max_s - t_send - weight * ctx.delay.d4;
    let amp = weight * ctx.delay.d2;
    if budget <= 0.0 {
        return Err(ConicError::Infeasible {
            constraint: format!("delay: floor {:.6} s exceeds budget", weight * ctx.delay.d4 + t_send),
        });
    }
    if amp <= 0.0 || ctx.delay.d3 <= 0.0 {
        // the exponential part vanishes; constraint reduces to the floor test
        return Ok(None);
    }
    if amp <= budget {
        return Ok(None); // satisfied at Q = 0 already
    }
    let q_lb = math::log(amp / budget) / ctx.delay.d3;
    if q_lb > ctx.q_box.1 {
        return Err(ConicError::Infeasible {
            constraint: format!("delay: requires Q >= {q_lb:.3} beyond the box"),
        });
    }
    Ok(Some(q_lb))
}

/// Build the quantization-step subproblem at the current iterate.
///
/// Variables `{Q, omega, delta, eps, xi}`; minimizes
/// `[X]^+ * omega + V * delta` subject to the tangent rows, the two
/// exponential cones tying `delta` to the linearized bitrate, and the
/// delay constraint with lambda and the sending delay frozen at the
/// iterate.
pub fn build_q_subproblem(point: &LinearizationPoint<'_>) -> Result<ConicProgram, ConicError> {
    let ctx = point.ctx;
    let (re0, slope) = linearize_re_in_q(point);
    let q0 = point.triple.q;

    // Sending-delay allowance reserved for the transmission stage: the
    // larger of the cap and the iterate's actual sending delay. Reserving
    // the full cap (rather than the iterate's delay alone) keeps the next
    // power step free to trade transmit power against sending delay;
    // otherwise the Q step can absorb all delay slack and pin the
    // alternation at the current power.
    let snr = point.triple.pt_mw / (ctx.l_atg_linear * ctx.transmission.noise_mw);
    let rc = math::log2(1.0 + snr);
    let t_send = if rc > 0.0 {
        ctx.transmission.unit_bits / (ctx.transmission.bandwidth_hz * rc)
    } else {
        f64::INFINITY
    };
    let q_lb = delay_q_lower_bound(ctx, point.triple.lambda, t_send.max(ctx.d_max_trans_s))?;

    let c = ctx.rd.c;
    let k = ctx.rd.k;

    let q = 0usize;
    let omega = 1usize;
    let delta = 2usize;
    let eps = 3usize;
    let xi = 4usize;
    let vars = vec![
        Variable { name: "q".into(), lower: ctx.q_box.0, upper: ctx.q_box.1, role: VarRole::Decision },
        Variable { name: "omega".into(), lower: f64::NEG_INFINITY, upper: f64::INFINITY, role: VarRole::Slack },
        Variable { name: "delta".into(), lower: 0.0, upper: f64::INFINITY, role: VarRole::Slack },
        Variable { name: "eps".into(), lower: 1e-12, upper: f64::INFINITY, role: VarRole::Slack },
        Variable { name: "xi".into(), lower: f64::NEG_INFINITY, upper: f64::INFINITY, role: VarRole::Slack },
    ];

    // tangent of R_e in Q: re0 + slope*(Q - q0)
    let tangent = |sign: f64, slack: usize, slack_sign: f64| Affine {
        terms: vec![(q, sign * slope), (slack, slack_sign)],
        constant: sign * (re0 - slope * q0),
    };

    let mut constraints = vec![
        Constraint { label: "re_tangent_le_omega".into(), kind: ConeConstraint::LinearLe(tangent(1.0, omega, -1.0)) },
        Constraint { label: "re_tangent_ge_eps".into(), kind: ConeConstraint::LinearLe(tangent(-1.0, eps, 1.0)) },
        Constraint {
            label: "exp_cone_eps_xi".into(),
            kind: ConeConstraint::Exponential([Affine::var(eps), Affine::constant(1.0), Affine::var(xi)]),
        },
        Constraint {
            label: "exp_cone_delta_xi".into(),
            kind: ConeConstraint::Exponential([
                Affine::var(delta),
                Affine::constant(c),
                Affine::term(xi, -c * k),
            ]),
        },
    ];
    if let Some(lb) = q_lb {
        constraints.push(Constraint {
            label: "delay".into(),
            kind: ConeConstraint::LinearLe(Affine { terms: vec![(q, -1.0)], constant: lb }),
        });
    }

    let rules = vec![
        SlackRule { var: omega, expr: ScalarExpr::affine(vec![(q, slope)], re0 - slope * q0) },
        SlackRule { var: eps, expr: ScalarExpr::affine(vec![(q, slope)], re0 - slope * q0) },
        SlackRule { var: xi, expr: ScalarExpr::Ln(Box::new(ScalarExpr::Var(eps))) },
        SlackRule {
            var: delta,
            expr: ScalarExpr::Prod(vec![
                ScalarExpr::Const(c),
                ScalarExpr::Exp(Box::new(ScalarExpr::Prod(vec![
                    ScalarExpr::Const(-k),
                    ScalarExpr::Var(xi),
                ]))),
            ]),
        },
    ];

    Ok(ConicProgram {
        vars,
        // omega is in bits/symbol; the queue lives in bps, so the drift
        // weight carries the symbol rate
        objective: Affine {
            terms: vec![(omega, ctx.queue_plus * ctx.symbol_rate), (delta, ctx.v)],
            constant: 0.0,
        },
        constraints,
        decisions: vec![q],
        rules,
    })
}

/// Build the transmit-power and search-range subproblem at the current
/// iterate, with Q frozen at the iterate's value.
///
/// Variables `{lambda, pt, omega, delta, eps, xi, zeta, phi, tau, z1, z2,
/// z3, ptot}`; minimizes `[X]^+ (omega - B*phi) + V (delta + rho1*zeta +
/// rho2*ptot)` under the full cone set of the transformed problem.
pub fn build_power_lambda_subproblem(
    point: &LinearizationPoint<'_>,
) -> Result<ConicProgram, ConicError> {
    let ctx = point.ctx;
    let (re0, re_slope) = linearize_re_in_lambda(point);
    let lambda0 = point.triple.lambda;
    let (dc0, dc_slope) = linearize_dc_in_pt(point);
    let pt0 = point.triple.pt_mw.max(ctx.pt_box.0);

    let dcoe = ctx.delay.dcoe(point.triple.q) * ctx.delay.frames_per_slot;
    let noise_scale = ctx.l_atg_linear * ctx.transmission.noise_mw;
    let bandwidth = ctx.transmission.bandwidth_hz;
    let unit = ctx.transmission.unit_bits;
    let c = ctx.rd.c;
    let k = ctx.rd.k;
    let fixed_power = ctx.budget.p_circuit_mw + ctx.budget.p_encode_mw;
    let pt_upper = ctx.pt_box.1.min(ctx.budget.pt_headroom_mw());
    if pt_upper < ctx.pt_box.0 {
        return Err(ConicError::Infeasible { constraint: "power: no transmit headroom".into() });
    }

    let lambda = 0usize;
    let pt = 1usize;
    let omega = 2usize;
    let delta = 3usize;
    let eps = 4usize;
    let xi = 5usize;
    let zeta = 6usize;
    let phi = 7usize;
    let tau = 8usize;
    let z1 = 9usize;
    let z2 = 10usize;
    let z3 = 11usize;
    let ptot = 12usize;

    let vars = vec![
        Variable { name: "lambda".into(), lower: ctx.lambda_box.0, upper: ctx.lambda_box.1, role: VarRole::Decision },
        Variable { name: "pt".into(), lower: ctx.pt_box.0, upper: pt_upper, role: VarRole::Decision },
        Variable { name: "omega".into(), lower: f64::NEG_INFINITY, upper: f64::INFINITY, role: VarRole::Slack },
        Variable { name: "delta".into(), lower: 0.0, upper: f64::INFINITY, role: VarRole::Slack },
        Variable { name: "eps".into(), lower: 1e-12, upper: f64::INFINITY, role: VarRole::Slack },
        Variable { name: "xi".into(), lower: f64::NEG_INFINITY, upper: f64::INFINITY, role: VarRole::Slack },
        Variable { name: "zeta".into(), lower: f64::NEG_INFINITY, upper: f64::INFINITY, role: VarRole::Slack },
        Variable { name: "phi".into(), lower: 1e-12, upper: f64::INFINITY, role: VarRole::Slack },
        Variable { name: "tau".into(), lower: 0.0, upper: f64::INFINITY, role: VarRole::Slack },
        Variable { name: "z1".into(), lower: 1.0, upper: f64::INFINITY, role: VarRole::Slack },
        Variable { name: "z2".into(), lower: 0.0, upper: f64::INFINITY, role: VarRole::Slack },
        Variable { name: "z3".into(), lower: 0.0, upper: f64::INFINITY, role: VarRole::Slack },
        Variable { name: "ptot".into(), lower: 0.0, upper: f64::INFINITY, role: VarRole::Slack },
    ];

    // tangent of R_e in lambda
    let re_tangent_const = re0 - re_slope * lambda0;
    // tangent of D_c in P_t
    let dc_tangent_const = dc0 - dc_slope * pt0;

    let constraints = vec![
        Constraint {
            label: "re_tangent_le_omega".into(),
            kind: ConeConstraint::LinearLe(Affine {
                terms: vec![(lambda, re_slope), (omega, -1.0)],
                constant: re_tangent_const,
            }),
        },
        Constraint {
            label: "re_tangent_ge_eps".into(),
            kind: ConeConstraint::LinearLe(Affine {
                terms: vec![(lambda, -re_slope), (eps, 1.0)],
                constant: -re_tangent_const,
            }),
        },
        Constraint {
            label: "dc_tangent_le_zeta".into(),
            kind: ConeConstraint::LinearLe(Affine {
                terms: vec![(pt, dc_slope), (zeta, -1.0)],
                constant: dc_tangent_const,
            }),
        },
        Constraint {
            label: "power_total_def".into(),
            kind: ConeConstraint::LinearEq(Affine {
                terms: vec![(ptot, 1.0), (pt, -1.0)],
                constant: -fixed_power,
            }),
        },
        Constraint {
            label: "power_budget".into(),
            kind: ConeConstraint::LinearLe(Affine {
                terms: vec![(ptot, 1.0)],
                constant: -ctx.budget.p_max_mw,
            }),
        },
        // -Z1 + Pt/(L*Pn) = -1
        Constraint {
            label: "z1_def".into(),
            kind: ConeConstraint::LinearEq(Affine {
                terms: vec![(z1, -1.0), (pt, 1.0 / noise_scale)],
                constant: 1.0,
            }),
        },
        Constraint {
            label: "z2_def".into(),
            kind: ConeConstraint::LinearEq(Affine {
                terms: vec![(z2, 1.0), (lambda, -2.0)],
                constant: -1.0,
            }),
        },
        // d_coe*Z3 + tau = d_max
        Constraint {
            label: "z3_def".into(),
            kind: ConeConstraint::LinearEq(Affine {
                terms: vec![(z3, dcoe), (tau, 1.0)],
                constant: -ctx.d_max_s,
            }),
        },
        Constraint {
            label: "tau_le_dmax_trans".into(),
            kind: ConeConstraint::LinearLe(Affine {
                terms: vec![(tau, 1.0)],
                constant: -ctx.d_max_trans_s,
            }),
        },
        Constraint {
            label: "exp_cone_rate".into(),
            kind: ConeConstraint::Exponential([
                Affine::var(z1),
                Affine::constant(1.0),
                Affine::term(phi, math::LN_2),
            ]),
        },
        Constraint {
            label: "rquad_cone_send_delay".into(),
            kind: ConeConstraint::RotatedQuadratic([
                Affine::var(phi),
                Affine::var(tau),
                Affine::constant(math::sqrt(2.0 * unit / bandwidth)),
            ]),
        },
        Constraint {
            label: "rquad_cone_code_delay".into(),
            kind: ConeConstraint::RotatedQuadratic([
                Affine::constant(0.5),
                Affine::var(z3),
                Affine::var(z2),
            ]),
        },
        Constraint {
            label: "exp_cone_eps_xi".into(),
            kind: ConeConstraint::Exponential([
                Affine::var(eps),
                Affine::constant(1.0),
                Affine::var(xi),
            ]),
        },
        Constraint {
            label: "exp_cone_delta_xi".into(),
            kind: ConeConstraint::Exponential([
                Affine::var(delta),
                Affine::constant(c),
                Affine::term(xi, -c * k),
            ]),
        },
    ];

    let rules = vec![
        SlackRule {
            var: z1,
            expr: ScalarExpr::affine(vec![(pt, 1.0 / noise_scale)], 1.0),
        },
        SlackRule {
            var: phi,
            expr: ScalarExpr::Prod(vec![
                ScalarExpr::Const(1.0 / math::LN_2),
                ScalarExpr::Ln(Box::new(ScalarExpr::Var(z1))),
            ]),
        },
        SlackRule {
            var: tau,
            expr: ScalarExpr::Prod(vec![
                ScalarExpr::Const(unit / bandwidth),
                ScalarExpr::Pow(Box::new(ScalarExpr::Var(phi)), -1.0),
            ]),
        },
        SlackRule { var: z2, expr: ScalarExpr::affine(vec![(lambda, 2.0)], 1.0) },
        SlackRule {
            var: z3,
            expr: ScalarExpr::Prod(vec![
                ScalarExpr::Const(1.0 / dcoe),
                ScalarExpr::Sum(vec![
                    ScalarExpr::Const(ctx.d_max_s),
                    ScalarExpr::Prod(vec![ScalarExpr::Const(-1.0), ScalarExpr::Var(tau)]),
                ]),
            ]),
        },
        SlackRule { var: omega, expr: ScalarExpr::affine(vec![(lambda, re_slope)], re_tangent_const) },
        SlackRule { var: eps, expr: ScalarExpr::affine(vec![(lambda, re_slope)], re_tangent_const) },
        SlackRule { var: xi, expr: ScalarExpr::Ln(Box::new(ScalarExpr::Var(eps))) },
        SlackRule {
            var: delta,
            expr: ScalarExpr::Prod(vec![
                ScalarExpr::Const(c),
                ScalarExpr::Exp(Box::new(ScalarExpr::Prod(vec![
                    ScalarExpr::Const(-k),
                    ScalarExpr::Var(xi),
                ]))),
            ]),
        },
        SlackRule { var: zeta, expr: ScalarExpr::affine(vec![(pt, dc_slope)], dc_tangent_const) },
        SlackRule { var: ptot, expr: ScalarExpr::affine(vec![(pt, 1.0)], fixed_power) },
    ];

    Ok(ConicProgram {
        vars,
        objective: Affine {
            terms: vec![
                (omega, ctx.queue_plus * ctx.symbol_rate),
                (phi, -ctx.queue_plus * bandwidth),
                (delta, ctx.v),
                (zeta, ctx.v * ctx.rho1),
                (ptot, ctx.v * ctx.rho2),
            ],
            constant: 0.0,
        },
        constraints,
        decisions: vec![lambda, pt],
        rules,
    })
}
