//! Reference solver for the reduced conic subproblems.
//!
//! Every subproblem built in this crate has one or two true decision
//! variables; the rest are slacks with closed-form tight values. The
//! solver therefore scans the decision box on a coarse grid and refines:
//! golden-section search in one dimension, Nelder-Mead with an
//! infeasibility penalty in two.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::conic::ConicProgram;
use crate::math;

/// Solver output: decision values, the full tight assignment, and the
/// objective.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub decisions: Vec<f64>,
    pub values: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveError {
    /// No feasible point found; carries the violations of the least
    /// infeasible scanned point.
    Infeasible { violations: Vec<String> },
}

impl core::fmt::Display for SolveError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SolveError::Infeasible { violations } => {
                write!(f, "no feasible point; closest violates {violations:?}")
            }
        }
    }
}

const GOLDEN_INV: f64 = 0.618_033_988_749_894_9;
const SCAN_1D: usize = 257;
const GRID_2D: usize = 41;
const PENALTY: f64 = 1e9;

/// Penalized reduced objective: the true objective when feasible, a large
/// residual-driven penalty otherwise.
fn penalized(prog: &ConicProgram, decisions: &[f64]) -> f64 {
    match prog.assemble(decisions) {
        Some(values) => {
            // small slack so boundary-tight reductions (tau exactly at the
            // cone surface) don't get penalized over rounding residue
            let infeas = prog.infeasibility(&values);
            if infeas <= 1e-9 {
                prog.objective_value(&values)
            } else {
                PENALTY * (1.0 + infeas)
            }
        }
        None => PENALTY * PENALTY,
    }
}

/// Minimize the reduced program over its decision box.
pub fn solve_conic(prog: &ConicProgram) -> Result<Solution, SolveError> {
    match prog.decisions.len() {
        1 => solve_1d(prog),
        2 => solve_2d(prog),
        n => panic!("reference solver supports 1 or 2 decision variables, got {n}"),
    }
}

fn finish(prog: &ConicProgram, decisions: Vec<f64>) -> Result<Solution, SolveError> {
    match prog.assemble(&decisions) {
        Some(values) => {
            let violations = prog.violations(&values);
            if violations.is_empty() {
                let objective = prog.objective_value(&values);
                Ok(Solution { decisions, values, objective })
            } else {
                Err(SolveError::Infeasible { violations })
            }
        }
        None => Err(SolveError::Infeasible { violations: vec!["non-finite reduction".into()] }),
    }
}

fn solve_1d(prog: &ConicProgram) -> Result<Solution, SolveError> {
    let id = prog.decisions[0];
    let (lo, hi) = (prog.vars[id].lower, prog.vars[id].upper);
    if !(hi > lo) {
        return finish(prog, vec![lo]);
    }

    // coarse scan for the best feasible point
    let mut best_x = f64::NAN;
    let mut best_f = f64::INFINITY;
    let mut best_i = 0usize;
    let step = (hi - lo) / (SCAN_1D - 1) as f64;
    for i in 0..SCAN_1D {
        let x = lo + step * i as f64;
        let f = penalized(prog, &[x]);
        if f < best_f {
            best_f = f;
            best_x = x;
            best_i = i;
        }
    }
    if best_f >= PENALTY {
        // report the least infeasible point's violations
        return finish(prog, vec![best_x]);
    }

    // golden-section refinement on the bracket around the best sample
    let mut a = lo + step * best_i.saturating_sub(1) as f64;
    let mut b = (lo + step * (best_i + 1) as f64).min(hi);
    let mut x1 = b - GOLDEN_INV * (b - a);
    let mut x2 = a + GOLDEN_INV * (b - a);
    let mut f1 = penalized(prog, &[x1]);
    let mut f2 = penalized(prog, &[x2]);
    for _ in 0..120 {
        if b - a < 1e-11 * (1.0 + math::fabs(best_x)) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN_INV * (b - a);
            f1 = penalized(prog, &[x1]);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN_INV * (b - a);
            f2 = penalized(prog, &[x2]);
        }
    }
    for (x, f) in [(x1, f1), (x2, f2)] {
        if f < best_f {
            best_f = f;
            best_x = x;
        }
    }
    finish(prog, vec![best_x])
}

fn solve_2d(prog: &ConicProgram) -> Result<Solution, SolveError> {
    let (id0, id1) = (prog.decisions[0], prog.decisions[1]);
    let (lo0, hi0) = (prog.vars[id0].lower, prog.vars[id0].upper);
    let (lo1, hi1) = (prog.vars[id1].lower, prog.vars[id1].upper);
    let step0 = (hi0 - lo0).max(0.0) / (GRID_2D - 1) as f64;
    let step1 = (hi1 - lo1).max(0.0) / (GRID_2D - 1) as f64;

    let mut best = [lo0, lo1];
    let mut best_f = f64::INFINITY;
    for i in 0..GRID_2D {
        let x = lo0 + step0 * i as f64;
        for j in 0..GRID_2D {
            let y = lo1 + step1 * j as f64;
            let f = penalized(prog, &[x, y]);
            if f < best_f {
                best_f = f;
                best = [x, y];
            }
        }
    }
    if best_f >= PENALTY {
        return finish(prog, vec![best[0], best[1]]);
    }

    let clamp = |p: [f64; 2]| [p[0].clamp(lo0, hi0), p[1].clamp(lo1, hi1)];
    let eval = |p: [f64; 2]| penalized(prog, &p);
    let refined = nelder_mead(
        eval,
        clamp,
        best,
        [step0.max(1e-6 * (1.0 + math::fabs(best[0]))), step1.max(1e-6 * (1.0 + math::fabs(best[1])))],
    );
    let refined_f = penalized(prog, &refined);
    if refined_f < best_f {
        best = refined;
    }
    finish(prog, vec![best[0], best[1]])
}

/// Plain Nelder-Mead on a clamped 2-D domain.
fn nelder_mead(
    f: impl Fn([f64; 2]) -> f64,
    clamp: impl Fn([f64; 2]) -> [f64; 2],
    start: [f64; 2],
    steps: [f64; 2],
) -> [f64; 2] {
    let mut simplex = [
        start,
        clamp([start[0] + steps[0], start[1]]),
        clamp([start[0], start[1] + steps[1]]),
    ];
    let mut fv = [f(simplex[0]), f(simplex[1]), f(simplex[2])];

    for _ in 0..400 {
        // order ascending
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| fv[a].partial_cmp(&fv[b]).unwrap_or(core::cmp::Ordering::Equal));
        let (b, m, w) = (idx[0], idx[1], idx[2]);

        let spread = math::fabs(simplex[b][0] - simplex[w][0])
            + math::fabs(simplex[b][1] - simplex[w][1]);
        if spread < 1e-12 * (1.0 + math::fabs(simplex[b][0]) + math::fabs(simplex[b][1])) {
            break;
        }

        let centroid = [
            0.5 * (simplex[b][0] + simplex[m][0]),
            0.5 * (simplex[b][1] + simplex[m][1]),
        ];
        let reflect = clamp([
            centroid[0] + (centroid[0] - simplex[w][0]),
            centroid[1] + (centroid[1] - simplex[w][1]),
        ]);
        let fr = f(reflect);

        if fr < fv[b] {
            let expand = clamp([
                centroid[0] + 2.0 * (centroid[0] - simplex[w][0]),
                centroid[1] + 2.0 * (centroid[1] - simplex[w][1]),
            ]);
            let fe = f(expand);
            if fe < fr {
                simplex[w] = expand;
                fv[w] = fe;
            } else {
                simplex[w] = reflect;
                fv[w] = fr;
            }
        } else if fr < fv[m] {
            simplex[w] = reflect;
            fv[w] = fr;
        } else {
            let contract = clamp([
                centroid[0] + 0.5 * (simplex[w][0] - centroid[0]),
                centroid[1] + 0.5 * (simplex[w][1] - centroid[1]),
            ]);
            let fc = f(contract);
            if fc < fv[w] {
                simplex[w] = contract;
                fv[w] = fc;
            } else {
                // shrink toward the best vertex
                for i in 0..3 {
                    if i == b {
                        continue;
                    }
                    simplex[i] = clamp([
                        simplex[b][0] + 0.5 * (simplex[i][0] - simplex[b][0]),
                        simplex[b][1] + 0.5 * (simplex[i][1] - simplex[b][1]),
                    ]);
                    fv[i] = f(simplex[i]);
                }
            }
        }
    }

    let mut best = simplex[0];
    let mut best_f = fv[0];
    for i in 1..3 {
        if fv[i] < best_f {
            best_f = fv[i];
            best = simplex[i];
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::{build_power_lambda_subproblem, build_q_subproblem, LinearizationPoint};
    use crate::math::rel_diff;
    use crate::slot::tests::test_context;
    use crate::source::DecisionTriple;

    #[test]
    fn q_subproblem_matches_dense_grid_oracle() {
        let mut ctx = test_context();
        ctx.queue_plus = 1.5;
        let point = LinearizationPoint {
            ctx: &ctx,
            triple: DecisionTriple { lambda: 2.0, q: 60.0, pt_mw: 50.0 },
        };
        let prog = build_q_subproblem(&point).unwrap();
        let sol = solve_conic(&prog).unwrap();

        // independent dense scan of the reduced objective
        let (lo, hi) = (ctx.q_box.0, ctx.q_box.1);
        let mut oracle_f = f64::INFINITY;
        let mut oracle_q = lo;
        for i in 0..=100_000 {
            let q = lo + (hi - lo) * i as f64 / 100_000.0;
            if let Some(f) = prog.reduced_objective(&[q]) {
                if f < oracle_f {
                    oracle_f = f;
                    oracle_q = q;
                }
            }
        }
        assert!(
            sol.objective <= oracle_f + 1e-4 * oracle_f.abs().max(1.0),
            "solver {} at {}, oracle {} at {}",
            sol.objective,
            sol.decisions[0],
            oracle_f,
            oracle_q
        );
        // and it is a local minimum: perturbing the decision cannot improve
        let q_star = sol.decisions[0];
        for dq in [-1e-3, -1e-5, 1e-5, 1e-3] {
            let q = (q_star + dq).clamp(lo, hi);
            if let Some(f) = prog.reduced_objective(&[q]) {
                assert!(
                    f >= sol.objective - 1e-6 * sol.objective.abs().max(1.0),
                    "better point {f} at {q} than {} at {q_star}",
                    sol.objective
                );
            }
        }
    }

    #[test]
    fn q_subproblem_hits_delay_bound_when_queue_idle() {
        // with no queue pressure the objective rewards large Q (less rate,
        // less distortion weight dominates; check solution is feasible and
        // no worse than iterate)
        let ctx = test_context();
        let point = LinearizationPoint {
            ctx: &ctx,
            triple: DecisionTriple { lambda: 2.0, q: 60.0, pt_mw: 50.0 },
        };
        let prog = build_q_subproblem(&point).unwrap();
        let sol = solve_conic(&prog).unwrap();
        let at_iterate = prog.reduced_objective(&[60.0]).unwrap();
        assert!(sol.objective <= at_iterate + 1e-12);
    }

    #[test]
    fn power_lambda_subproblem_matches_dense_grid_oracle() {
        let mut ctx = test_context();
        ctx.queue_plus = 0.8;
        let point = LinearizationPoint {
            ctx: &ctx,
            triple: DecisionTriple { lambda: 2.0, q: 60.0, pt_mw: 50.0 },
        };
        let prog = build_power_lambda_subproblem(&point).unwrap();
        let sol = solve_conic(&prog).unwrap();

        let (l_lo, l_hi) = ctx.lambda_box;
        let p_lo = ctx.pt_box.0;
        let p_hi = ctx.pt_box.1.min(ctx.budget.pt_headroom_mw());
        let mut oracle_f = f64::INFINITY;
        let mut oracle = (l_lo, p_lo);
        for i in 0..=300 {
            let lam = l_lo + (l_hi - l_lo) * i as f64 / 300.0;
            for j in 0..=300 {
                let pt = p_lo + (p_hi - p_lo) * j as f64 / 300.0;
                if let Some(f) = prog.reduced_objective(&[lam, pt]) {
                    if f < oracle_f {
                        oracle_f = f;
                        oracle = (lam, pt);
                    }
                }
            }
        }
        assert!(
            sol.objective <= oracle_f + 1e-3 * oracle_f.abs().max(1.0),
            "solver {} at {:?}, oracle {} at {:?}",
            sol.objective,
            sol.decisions,
            oracle_f,
            oracle
        );
        assert!(rel_diff(sol.objective, oracle_f) < 1e-3);
    }

    #[test]
    fn degenerate_single_point_box() {
        let mut ctx = test_context();
        ctx.q_box = (60.0, 60.0);
        let point = LinearizationPoint {
            ctx: &ctx,
            triple: DecisionTriple { lambda: 2.0, q: 60.0, pt_mw: 50.0 },
        };
        let prog = build_q_subproblem(&point).unwrap();
        let sol = solve_conic(&prog).unwrap();
        assert_eq!(sol.decisions, vec![60.0]);
    }

    #[test]
    fn infeasible_program_reports_violations() {
        let mut ctx = test_context();
        // transmission delay bound impossible at any admissible power
        ctx.d_max_trans_s = 1e-9;
        let point = LinearizationPoint {
            ctx: &ctx,
            triple: DecisionTriple { lambda: 4.0, q: 30.0, pt_mw: 50.0 },
        };
        let prog = build_power_lambda_subproblem(&point).unwrap();
        match solve_conic(&prog) {
            Err(SolveError::Infeasible { violations }) => {
                assert!(violations.iter().any(|v| v.contains("tau")), "{violations:?}");
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }
}
