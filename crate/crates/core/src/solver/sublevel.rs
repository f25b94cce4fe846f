use serde::Serialize;

use super::linalg::solve_shifted_spd;
use super::newton::{newton_on_gradient, NewtonEnd, StepCap};
use super::record::{NonConvergence, Origin, SolutionRecord};
use super::SolveConfig;
use crate::energy::EnergyFunctional;
use crate::error::{Error, Result};
use crate::matrix::euclidean_norm;

/// Barrier weights μ, applied as μ·r so that the barrier scales with the level.
const BARRIER_WEIGHTS: [f64; 9] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10];
const INNER_ITERS: usize = 200;
const POLISH_ITERS: usize = 200;
/// A minimizer with Φ(u) ≤ r − INTERIOR_MARGIN·r counts as interior.
pub const INTERIOR_MARGIN: f64 = 1e-6;
const ARMIJO: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SublevelOutcome {
    /// An interior minimizer, certified as a solution by its residual.
    Interior(SolutionRecord),
    /// The constrained minimizer sits on {Φ = r}; not a solution.
    Boundary {
        u: Vec<f64>,
        phi: f64,
        j_value: f64,
    },
    NotConverged(NonConvergence),
}

impl SublevelOutcome {
    pub fn record(&self) -> Option<&SolutionRecord> {
        match self {
            SublevelOutcome::Interior(r) => Some(r),
            _ => None,
        }
    }
}

struct Barrier<'a> {
    energy: &'a EnergyFunctional,
    r: f64,
    weight: f64,
}

impl Barrier<'_> {
    fn value(&self, u: &[f64]) -> Result<f64> {
        let phi = self.energy.phi(u)?;
        if !(phi < self.r) {
            return Ok(f64::INFINITY);
        }
        Ok(self.energy.j_lambda(u)? - self.weight * (self.r - phi).ln())
    }

    /// (gradient, Hessian) of J − w·ln(r − Φ).
    fn derivatives(&self, u: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = u.len();
        let slack = self.r - self.energy.phi(u)?;
        let w = self.weight / slack;
        let gphi = self.energy.phi_gradient(u)?;
        let mut g = self.energy.gradient(u)?;
        for (gk, pk) in g.iter_mut().zip(&gphi) {
            *gk += w * pk;
        }
        let mut h = self.energy.hessian(u)?;
        let hphi = self.energy.phi_hessian(u)?;
        for i in 0..n {
            for j in 0..n {
                h[i * n + j] += w * hphi[i * n + j] + (w / slack) * gphi[i] * gphi[j];
            }
        }
        Ok((g, h))
    }
}

/// Pulls `start` toward 0 until Φ(start) < r/2. Φ(0) = 0, so this ends.
fn interior_start(energy: &EnergyFunctional, r: f64, start: &[f64]) -> Result<Vec<f64>> {
    let mut u = start.to_vec();
    for _ in 0..200 {
        if energy.phi(&u)? < 0.5 * r {
            return Ok(u);
        }
        u.iter_mut().for_each(|x| *x *= 0.5);
    }
    Ok(vec![0.0; u.len()])
}

pub(crate) fn sublevel_from(
    energy: &EnergyFunctional,
    r: f64,
    start: &[f64],
    cfg: &SolveConfig,
    origin: Origin,
) -> Result<SublevelOutcome> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::OutOfRange(format!("sublevel r must be positive and finite, got {r}")));
    }
    let n = energy.order();
    if start.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: start.len() });
    }
    let gap = 2.0 * energy.problem().lipschitz().coercivity;
    // {Φ < r} lies in this sup-norm box when L < λ₁
    let radius = if gap > 0.0 { (2.0 * r / gap).sqrt() } else { energy.problem().matrix().sup_norm_radius(r)? };
    let cap = StepCap { fraction: 0.25, floor: 1e-3 * radius };

    let mut u = interior_start(energy, r, start)?;
    let mut budget = cfg.max_iters;
    for mu in BARRIER_WEIGHTS {
        let b = Barrier { energy, r, weight: mu * r };
        let mut value = b.value(&u)?;
        for _ in 0..INNER_ITERS.min(budget) {
            budget -= 1;
            let (g, h) = b.derivatives(&u)?;
            if euclidean_norm(&g) <= cfg.residual_tol {
                break;
            }
            let neg: Vec<f64> = g.iter().map(|x| -x).collect();
            let mut d = solve_shifted_spd(&h, n, &neg);
            cap.apply(&u, &mut d);
            let slope: f64 = g.iter().zip(&d).map(|(a, c)| a * c).sum();
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let trial: Vec<f64> = u.iter().zip(&d).map(|(x, y)| x + alpha * y).collect();
                let tv = b.value(&trial)?;
                if tv <= value + ARMIJO * alpha * slope && tv < value {
                    accepted = true;
                    u = trial;
                    value = tv;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if budget == 0 {
            break;
        }
    }

    let phi = energy.phi(&u)?;
    if phi > r * (1.0 - INTERIOR_MARGIN) {
        return Ok(SublevelOutcome::Boundary { j_value: energy.j_lambda(&u)?, u, phi });
    }
    let polish_cap = StepCap { fraction: 0.1, floor: 1e-3 * radius };
    match newton_on_gradient(energy, &u, cfg.residual_tol, POLISH_ITERS, Some(polish_cap))? {
        NewtonEnd::Converged { u: polished, iterations } => {
            let phi = energy.phi(&polished)?;
            if phi > r * (1.0 - INTERIOR_MARGIN) {
                return Ok(SublevelOutcome::Boundary { j_value: energy.j_lambda(&polished)?, u: polished, phi });
            }
            let used = cfg.max_iters - budget + iterations;
            Ok(SublevelOutcome::Interior(SolutionRecord::certify(energy, polished, origin, used, cfg.residual_tol)?))
        }
        NewtonEnd::Failed(nc) => Ok(SublevelOutcome::NotConverged(nc)),
    }
}

/// Minimizes J_λ over {Φ < r} with the barrier −μr·log(r − Φ), μ from 1e-2
/// down to 1e-10, starting from `start` pulled into the set if needed.
/// An interior minimizer is polished by Newton and certified by residual.
pub fn minimize_on_sublevel(
    energy: &EnergyFunctional,
    r: f64,
    start: &[f64],
    cfg: &SolveConfig,
) -> Result<SublevelOutcome> {
    cfg.validate()?;
    sublevel_from(energy, r, start, cfg, Origin::Cascade { level: 0, r })
}
