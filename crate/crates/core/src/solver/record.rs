use serde::Serialize;

use crate::energy::EnergyFunctional;
use crate::error::{Error, Result};
use crate::matrix::{euclidean_norm, jacobi_eigen, sup_norm};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Origin {
    Multistart { start: usize },
    Cascade { level: usize, r: f64 },
}

/// Sign of the smallest Hessian eigenvalue at a solution. Diagnostic only:
/// saddles and maxima are still solutions of the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Minimum,
    Saddle,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionRecord {
    pub u: Vec<f64>,
    pub phi: f64,
    pub j_value: f64,
    /// ‖Au − λf(u) − h(u)‖
    pub residual: f64,
    pub norm2: f64,
    pub norm_inf: f64,
    pub origin: Origin,
    pub min_hessian_eigenvalue: f64,
    pub stability: Stability,
    pub iterations: usize,
}

impl SolutionRecord {
    /// Evaluates every field from `energy`; errors when the residual exceeds
    /// `tol`.
    pub fn certify(
        energy: &EnergyFunctional,
        u: Vec<f64>,
        origin: Origin,
        iterations: usize,
        tol: f64,
    ) -> Result<Self> {
        let residual = energy.residual(&u)?;
        if !(residual <= tol) {
            return Err(Error::OutOfRange(format!("residual {residual:e} exceeds tolerance {tol:e}")));
        }
        let phi = energy.phi(&u)?;
        let j_value = energy.j_lambda(&u)?;
        let n = u.len();
        let hess = energy.hessian(&u)?;
        let scale = hess.iter().map(|x| x * x).sum::<f64>().sqrt();
        let min_hessian_eigenvalue = jacobi_eigen(&hess, n, false).map(|e| e.values[0]).unwrap_or(f64::NAN);
        let stability = if min_hessian_eigenvalue > 1e-10 * scale {
            Stability::Minimum
        } else if min_hessian_eigenvalue < -1e-10 * scale {
            Stability::Saddle
        } else {
            Stability::Degenerate
        };
        Ok(Self {
            norm2: euclidean_norm(&u),
            norm_inf: sup_norm(&u),
            u,
            phi,
            j_value,
            residual,
            origin,
            min_hessian_eigenvalue,
            stability,
            iterations,
        })
    }

    /// Re-evaluates Φ, J_λ and the residual; true when they agree with the
    /// stored values to `rel` relative accuracy and the residual is within
    /// `tol`.
    pub fn verify(&self, energy: &EnergyFunctional, rel: f64, tol: f64) -> Result<bool> {
        let close = |a: f64, b: f64| (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        Ok(close(energy.phi(&self.u)?, self.phi)
            && close(energy.j_lambda(&self.u)?, self.j_value)
            && energy.residual(&self.u)? <= tol)
    }
}

/// Last iterate of a run that hit its iteration cap or stalled.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonConvergence {
    pub u: Vec<f64>,
    pub gradient_norm: f64,
    pub iterations: usize,
    /// ‖∇J_λ‖ per iteration, thinned to at most 256 entries.
    pub trace: Vec<f64>,
    pub reason: String,
}

/// False when ‖u − v‖ ≤ radius · max(‖u‖, ‖v‖) or ‖u − v‖ ≤ floor. The
/// absolute floor merges iterates that stopped at different points of the
/// residual ball around the same solution, e.g. near u = 0.
pub fn distinct(u: &[f64], v: &[f64], radius: f64, floor: f64) -> bool {
    let d = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    d > radius * euclidean_norm(u).max(euclidean_norm(v)) && d > floor
}

/// Keeps the first of every cluster of coincident records, then sorts by Φ.
pub fn dedupe(records: Vec<SolutionRecord>, radius: f64, floor: f64) -> Vec<SolutionRecord> {
    let mut kept: Vec<SolutionRecord> = Vec::with_capacity(records.len());
    for r in records {
        if kept.iter().all(|k| distinct(&k.u, &r.u, radius, floor)) {
            kept.push(r);
        }
    }
    kept.sort_by(|a, b| a.phi.total_cmp(&b.phi));
    kept
}

pub(crate) fn thin(trace: Vec<f64>) -> Vec<f64> {
    const KEEP: usize = 256;
    if trace.len() <= KEEP {
        return trace;
    }
    let step = trace.len().div_ceil(KEEP);
    let last = *trace.last().unwrap();
    let mut out: Vec<f64> = trace.into_iter().step_by(step).collect();
    out.push(last);
    out
}
