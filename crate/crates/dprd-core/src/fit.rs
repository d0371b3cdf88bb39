//! Nonlinear regression of the sigma and delay-coefficient models.
//!
//! Both fits use a damped Gauss-Newton (Levenberg-style) loop seeded by a
//! multi-start over 8 log-spaced decay rates; for each candidate decay rate
//! the remaining coefficients enter linearly and are solved in closed form,
//! which makes the multi-start cheap and robust.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math;
use crate::source::SigmaModel;

const MAX_ITERS: usize = 200;
const STEP_TOL: f64 = 1e-10;

/// Decay-rate seeds for the multi-start, log-spaced over [1e-3, 3].
fn decay_seeds() -> [f64; 8] {
    let mut seeds = [0.0; 8];
    let lo = math::log(1e-3);
    let hi = math::log(3.0);
    for (i, s) in seeds.iter_mut().enumerate() {
        *s = math::exp(lo + (hi - lo) * i as f64 / 7.0);
    }
    seeds
}

/// Fitting failures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FitError {
    /// Too few samples, or samples that do not span the model's directions.
    RankDeficient,
    /// The damped Gauss-Newton loop did not meet the step tolerance.
    NoConvergence,
}

impl core::fmt::Display for FitError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FitError::RankDeficient => write!(f, "sample set is rank-deficient for this model"),
            FitError::NoConvergence => write!(f, "regression did not converge"),
        }
    }
}

/// A fitted sigma model plus the residual RMS of the fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaFit {
    pub model: SigmaModel,
    pub rms: f64,
}

/// A fitted delay-coefficient model `d1*(d2*exp(-d3*Q) + d4)`.
///
/// The triple `(d1*d2, d3, d1*d4)` is what the data determines; `d1` is
/// reported as 1 so the remaining coefficients carry the full scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcoeFit {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
    pub rms: f64,
    /// Set when the samples are (near-)constant and the exponential part is
    /// not identifiable; the returned member of the degenerate family has
    /// `d2 = 0`.
    pub degenerate: bool,
}

fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if math::fabs(a[row][col]) > math::fabs(a[pivot][col]) {
                pivot = row;
            }
        }
        if math::fabs(a[pivot][col]) < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col][k] * x[k];
        }
        x[col] = s / a[col][col];
    }
    Some(x)
}

/// Linear least squares for `y ~ sum_j c_j * basis_j(x)` via normal equations.
fn linear_lsq(basis: &[Vec<f64>], y: &[f64]) -> Option<Vec<f64>> {
    let p = basis.len();
    let n = y.len();
    let mut ata = vec![vec![0.0; p]; p];
    let mut aty = vec![0.0; p];
    for i in 0..n {
        for j in 0..p {
            aty[j] += basis[j][i] * y[i];
            for k in 0..p {
                ata[j][k] += basis[j][i] * basis[k][i];
            }
        }
    }
    solve_linear(ata, aty)
}

fn rms(residuals: &[f64]) -> f64 {
    let ss: f64 = residuals.iter().map(|r| r * r).sum();
    math::sqrt(ss / residuals.len() as f64)
}

/// Damped Gauss-Newton on a residual function with analytic Jacobian.
///
/// `eval(params, residuals, jacobian)` fills `residuals[i]` and
/// `jacobian[i][j] = d residual_i / d param_j`.
fn gauss_newton<F>(params: &mut [f64], n_res: usize, eval: F) -> Result<f64, FitError>
where
    F: Fn(&[f64], &mut [f64], &mut [Vec<f64>]),
{
    let p = params.len();
    let mut res = vec![0.0; n_res];
    let mut jac = vec![vec![0.0; p]; n_res];
    let mut damping = 1e-6;
    eval(params, &mut res, &mut jac);
    let mut cost: f64 = res.iter().map(|r| r * r).sum();

    for _ in 0..MAX_ITERS {
        // normal equations (J^T J + damping I) step = -J^T r
        let mut jtj = vec![vec![0.0; p]; p];
        let mut jtr = vec![0.0; p];
        for i in 0..n_res {
            for j in 0..p {
                jtr[j] += jac[i][j] * res[i];
                for k in 0..p {
                    jtj[j][k] += jac[i][j] * jac[i][k];
                }
            }
        }
        let mut stepped = false;
        for _ in 0..30 {
            let mut lhs = jtj.clone();
            for j in 0..p {
                lhs[j][j] += damping * (1.0 + jtj[j][j]);
            }
            let rhs: Vec<f64> = jtr.iter().map(|v| -v).collect();
            let Some(step) = solve_linear(lhs, rhs) else {
                damping *= 10.0;
                continue;
            };
            let trial: Vec<f64> = params.iter().zip(&step).map(|(v, s)| v + s).collect();
            let mut trial_res = vec![0.0; n_res];
            let mut trial_jac = vec![vec![0.0; p]; n_res];
            eval(&trial, &mut trial_res, &mut trial_jac);
            let trial_cost: f64 = trial_res.iter().map(|r| r * r).sum();
            if trial_cost.is_finite() && trial_cost <= cost {
                let rel_step = step
                    .iter()
                    .zip(trial.iter())
                    .map(|(s, v)| math::fabs(*s) / math::fabs(*v).max(1.0))
                    .fold(0.0f64, f64::max);
                params.copy_from_slice(&trial);
                res = trial_res;
                jac = trial_jac;
                cost = trial_cost;
                damping = (damping * 0.3).max(1e-14);
                stepped = true;
                if rel_step < STEP_TOL {
                    return Ok(rms(&res));
                }
                break;
            }
            damping *= 10.0;
        }
        if !stepped {
            // no further progress possible; accept if the gradient is flat
            let grad_norm = jtr.iter().map(|g| g * g).sum::<f64>();
            if grad_norm < 1e-16 * (1.0 + cost) {
                return Ok(rms(&res));
            }
            return Err(FitError::NoConvergence);
        }
    }
    Ok(rms(&res))
}

fn count_distinct(values: impl Iterator<Item = f64>) -> usize {
    let mut seen: Vec<f64> = Vec::new();
    for v in values {
        if !seen.iter().any(|s| math::fabs(s - v) < 1e-9) {
            seen.push(v);
        }
    }
    seen.len()
}

/// Fit the sigma model to `(lambda, Q, sigma)` samples.
///
/// Needs at least 4 samples spanning at least 2 distinct lambda and 2
/// distinct Q values. Samples carry the quantization step directly; map QP
/// through [`crate::source::qp_to_qstep`] beforehand when starting from
/// encoder data.
pub fn fit_sigma_model(samples: &[(f64, f64, f64)]) -> Result<SigmaFit, FitError> {
    if samples.len() < 4
        || count_distinct(samples.iter().map(|s| s.0)) < 2
        || count_distinct(samples.iter().map(|s| s.1)) < 2
    {
        return Err(FitError::RankDeficient);
    }
    let n = samples.len();
    let y: Vec<f64> = samples.iter().map(|s| s.2).collect();

    let mut best: Option<(Vec<f64>, f64)> = None;
    for a2 in decay_seeds() {
        // linear solve for (a1, a3, a4) at this decay rate
        let basis = vec![
            samples.iter().map(|s| math::exp(-a2 * s.0)).collect::<Vec<_>>(),
            vec![1.0; n],
            samples.iter().map(|s| s.1).collect::<Vec<_>>(),
        ];
        let Some(lin) = linear_lsq(&basis, &y) else { continue };
        let mut params = vec![lin[0], a2, lin[1], lin[2]];
        let result = gauss_newton(&mut params, n, |p, res, jac| {
            for (i, (lam, q, sig)) in samples.iter().enumerate() {
                let e = math::exp(-p[1] * lam);
                res[i] = p[0] * e + p[2] + p[3] * q - sig;
                jac[i][0] = e;
                jac[i][1] = -p[0] * lam * e;
                jac[i][2] = 1.0;
                jac[i][3] = *q;
            }
        });
        if let Ok(r) = result {
            if best.as_ref().map_or(true, |(_, br)| r < *br) {
                best = Some((params, r));
            }
        }
    }
    let (p, rms) = best.ok_or(FitError::NoConvergence)?;
    Ok(SigmaFit {
        model: SigmaModel { a1: p[0], a2: p[1], a3: p[2], a4: p[3] },
        rms,
    })
}

/// Fit the delay-coefficient model to `(Q, d_coe)` samples.
///
/// Needs at least 4 samples with at least 4 distinct Q values. Constant
/// samples are non-identifiable and come back flagged with `d2 = 0`.
pub fn fit_dcoe_model(samples: &[(f64, f64)]) -> Result<DcoeFit, FitError> {
    if samples.len() < 4 || count_distinct(samples.iter().map(|s| s.0)) < 4 {
        return Err(FitError::RankDeficient);
    }
    let n = samples.len();
    let y: Vec<f64> = samples.iter().map(|s| s.1).collect();

    let mean = y.iter().sum::<f64>() / n as f64;
    let spread = y
        .iter()
        .map(|v| math::fabs(v - mean))
        .fold(0.0f64, f64::max);
    if spread <= 1e-12 * math::fabs(mean).max(1.0) {
        return Ok(DcoeFit { d1: 1.0, d2: 0.0, d3: 0.0, d4: mean, rms: rms(&y.iter().map(|v| v - mean).collect::<Vec<_>>()), degenerate: true });
    }

    let mut best: Option<(Vec<f64>, f64)> = None;
    for d3 in decay_seeds() {
        let basis = vec![
            samples.iter().map(|s| math::exp(-d3 * s.0)).collect::<Vec<_>>(),
            vec![1.0; n],
        ];
        let Some(lin) = linear_lsq(&basis, &y) else { continue };
        let mut params = vec![lin[0], d3, lin[1]]; // (d2, d3, d4) with d1 = 1
        let result = gauss_newton(&mut params, n, |p, res, jac| {
            for (i, (q, d)) in samples.iter().enumerate() {
                let e = math::exp(-p[1] * q);
                res[i] = p[0] * e + p[2] - d;
                jac[i][0] = e;
                jac[i][1] = -p[0] * q * e;
                jac[i][2] = 1.0;
            }
        });
        if let Ok(r) = result {
            if best.as_ref().map_or(true, |(_, br)| r < *br) {
                best = Some((params, r));
            }
        }
    }
    let (p, rms) = best.ok_or(FitError::NoConvergence)?;
    Ok(DcoeFit { d1: 1.0, d2: p[0], d3: p[1], d4: p[2], rms, degenerate: false })
}
