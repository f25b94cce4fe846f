use serde::Serialize;

use super::linalg::solve;
use super::record::{thin, NonConvergence, Origin, SolutionRecord};
use super::SolveConfig;
use crate::energy::EnergyFunctional;
use crate::error::{Error, Result};
use crate::matrix::{euclidean_norm, sup_norm};

const ARMIJO: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MAX_HALVINGS: usize = 60;
/// A run stops as stagnated when its best ‖∇J_λ‖ has not dropped by
/// `STALL_FACTOR` within `STALL_WINDOW` iterations.
const STALL_WINDOW: usize = 2000;
const STALL_FACTOR: f64 = 0.99;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum MinimizeOutcome {
    Converged(SolutionRecord),
    NotConverged(NonConvergence),
}

impl MinimizeOutcome {
    pub fn record(&self) -> Option<&SolutionRecord> {
        match self {
            MinimizeOutcome::Converged(r) => Some(r),
            MinimizeOutcome::NotConverged(_) => None,
        }
    }
}

/// Caps ‖step‖_∞ at `fraction · max(‖u‖_∞, floor)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct StepCap {
    pub fraction: f64,
    pub floor: f64,
}

impl StepCap {
    pub(crate) fn apply(&self, u: &[f64], d: &mut [f64]) {
        let limit = self.fraction * sup_norm(u).max(self.floor);
        let len = sup_norm(d);
        if len > limit {
            let s = limit / len;
            d.iter_mut().for_each(|x| *x *= s);
        }
    }
}

pub(crate) enum NewtonEnd {
    Converged { u: Vec<f64>, iterations: usize },
    Failed(NonConvergence),
}

fn axpy(u: &[f64], alpha: f64, d: &[f64]) -> Vec<f64> {
    u.iter().zip(d).map(|(x, y)| x + alpha * y).collect()
}

/// Newton iteration on ∇J_λ = 0 with a backtracking line search on ½‖∇J_λ‖².
/// When the Newton system is singular or no Newton step reduces the merit,
/// a gradient-descent step with Armijo backtracking on J_λ is taken instead.
/// Converges to any critical point, not only minima.
pub(crate) fn newton_on_gradient(
    energy: &EnergyFunctional,
    start: &[f64],
    tol: f64,
    max_iters: usize,
    cap: Option<StepCap>,
) -> Result<NewtonEnd> {
    let n = energy.order();
    if start.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: start.len() });
    }
    let mut u = start.to_vec();
    let mut g = energy.gradient(&u)?;
    let mut gn = euclidean_norm(&g);
    let mut trace = Vec::new();
    let (mut anchor, mut anchor_iter) = (gn, 0);
    for iter in 0..max_iters {
        trace.push(gn);
        if gn <= tol {
            let (u, _) = polish(energy, u, gn)?;
            return Ok(NewtonEnd::Converged { u, iterations: iter });
        }
        if !gn.is_finite() {
            break;
        }
        if gn < STALL_FACTOR * anchor {
            (anchor, anchor_iter) = (gn, iter);
        } else if iter - anchor_iter >= STALL_WINDOW {
            return Ok(NewtonEnd::Failed(NonConvergence {
                u,
                gradient_norm: gn,
                iterations: iter,
                trace: thin(trace),
                reason: format!("stagnated: residual not reduced by 1% in {STALL_WINDOW} iterations"),
            }));
        }
        let hess = energy.hessian(&u)?;
        let merit = 0.5 * gn * gn;
        let mut moved = false;

        let neg_g: Vec<f64> = g.iter().map(|x| -x).collect();
        if let Some(mut d) = solve(&hess, n, &neg_g) {
            if let Some(c) = cap {
                c.apply(&u, &mut d);
            }
            let mut alpha = 1.0;
            for _ in 0..MAX_HALVINGS {
                let trial = axpy(&u, alpha, &d);
                let tg = energy.gradient(&trial)?;
                let tn = euclidean_norm(&tg);
                if 0.5 * tn * tn <= merit * (1.0 - 2.0 * ARMIJO * alpha) {
                    u = trial;
                    g = tg;
                    gn = tn;
                    moved = true;
                    break;
                }
                alpha *= BACKTRACK;
            }
        }

        if !moved {
            let j0 = energy.j_lambda(&u)?;
            let curvature = hess.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            let mut d = neg_g;
            if let Some(c) = cap {
                c.apply(&u, &mut d);
            }
            let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
            let mut alpha = 1.0 / curvature;
            for _ in 0..MAX_HALVINGS {
                let trial = axpy(&u, alpha, &d);
                if energy.j_lambda(&trial)? <= j0 + ARMIJO * alpha * slope {
                    u = trial;
                    g = energy.gradient(&u)?;
                    gn = euclidean_norm(&g);
                    moved = true;
                    break;
                }
                alpha *= BACKTRACK;
            }
        }

        if !moved {
            trace.push(gn);
            return Ok(NewtonEnd::Failed(NonConvergence {
                u,
                gradient_norm: gn,
                iterations: iter + 1,
                trace: thin(trace),
                reason: "line search stalled".into(),
            }));
        }
    }
    if gn <= tol {
        return Ok(NewtonEnd::Converged { u, iterations: max_iters });
    }
    trace.push(gn);
    Ok(NewtonEnd::Failed(NonConvergence {
        u,
        gradient_norm: gn,
        iterations: max_iters,
        trace: thin(trace),
        reason: "iteration cap reached".into(),
    }))
}

/// Up to three full Newton steps past convergence, each kept only if it
/// lowers ‖∇J_λ‖; pushes the residual toward the rounding floor.
fn polish(energy: &EnergyFunctional, mut u: Vec<f64>, mut gn: f64) -> Result<(Vec<f64>, f64)> {
    let n = u.len();
    for _ in 0..3 {
        if gn == 0.0 {
            break;
        }
        let g = energy.gradient(&u)?;
        let neg: Vec<f64> = g.iter().map(|x| -x).collect();
        let Some(d) = solve(&energy.hessian(&u)?, n, &neg) else { break };
        let trial = axpy(&u, 1.0, &d);
        let tn = euclidean_norm(&energy.gradient(&trial)?);
        if !(tn < gn) {
            break;
        }
        u = trial;
        gn = tn;
    }
    Ok((u, gn))
}

pub(crate) fn minimize_from(
    energy: &EnergyFunctional,
    start: &[f64],
    cfg: &SolveConfig,
    origin: Origin,
) -> Result<MinimizeOutcome> {
    match newton_on_gradient(energy, start, cfg.residual_tol, cfg.max_iters, None)? {
        NewtonEnd::Converged { u, iterations } => {
            Ok(MinimizeOutcome::Converged(SolutionRecord::certify(energy, u, origin, iterations, cfg.residual_tol)?))
        }
        NewtonEnd::Failed(nc) => Ok(MinimizeOutcome::NotConverged(nc)),
    }
}

/// Drives ‖Au − λf(u) − h(u)‖ below `cfg.residual_tol` from `start`.
/// Hitting the iteration cap is reported as data, not as an error.
pub fn local_minimize(energy: &EnergyFunctional, start: &[f64], cfg: &SolveConfig) -> Result<MinimizeOutcome> {
    cfg.validate()?;
    minimize_from(energy, start, cfg, Origin::Multistart { start: 0 })
}
