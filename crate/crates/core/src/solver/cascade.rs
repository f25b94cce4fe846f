use rayon::prelude::*;
use serde::Serialize;

use super::multistart::random_starts;
use super::record::{distinct, Origin, SolutionRecord};
use super::sublevel::{sublevel_from, SublevelOutcome};
use super::{check_schedule, ScheduleRecipe, SolveConfig};
use crate::asymptotics::interval_constant;
use crate::energy::EnergyFunctional;
use crate::error::{Error, Result};
use crate::nonlinearity::Regime;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepStatus {
    Kept,
    /// Interior solution already seen at an earlier level.
    Duplicate,
    /// Only the zero solution was found (zero regime wants nontrivial ones).
    Trivial,
    /// Every start ended on {Φ = r} or failed to converge.
    NoInterior,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CascadeStep {
    pub level: usize,
    pub r: f64,
    pub status: StepStatus,
    /// Interior record with the lowest J_λ at this level.
    pub best: Option<SolutionRecord>,
    pub interior: usize,
    pub boundary: usize,
    pub not_converged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CascadeReport {
    pub regime: Regime,
    pub levels: Vec<f64>,
    pub steps: Vec<CascadeStep>,
    /// Kept records in schedule order.
    pub records: Vec<SolutionRecord>,
    /// Φ strictly increasing (infinity) or ‖·‖_∞ strictly decreasing (zero)
    /// along `records`.
    pub monotone: bool,
    pub summary: String,
}

/// rₘ = ((λ₁ − L)/2)·cₘ².
pub fn schedule_from_plateau_ends(energy: &EnergyFunctional, ends: &[f64]) -> Vec<f64> {
    let k = energy.problem().lipschitz().coercivity;
    ends.iter().map(|c| k * c * c).collect()
}

fn resolve_levels(energy: &EnergyFunctional, cfg: &SolveConfig, plateau_ends: Option<&[f64]>) -> Result<Vec<f64>> {
    match &cfg.schedule {
        ScheduleRecipe::Explicit { levels } => Ok(levels.clone()),
        ScheduleRecipe::Witness => match plateau_ends {
            Some(ends) if !ends.is_empty() => Ok(schedule_from_plateau_ends(energy, ends)),
            _ => Err(Error::Config("witness schedule needs plateau ends".into())),
        },
        ScheduleRecipe::Geometric { first, ratio, count } => {
            let anchor = match (first, plateau_ends.and_then(|e| e.first())) {
                (Some(r), _) => *r,
                (None, Some(c)) => schedule_from_plateau_ends(energy, &[*c])[0],
                (None, None) => 1.0,
            };
            Ok((0..*count).map(|k| anchor * ratio.powi(k as i32)).collect())
        }
    }
}

/// Minimizes J_λ over each sublevel set {Φ < rₘ} of the schedule and keeps
/// the interior minimizers that differ from all earlier ones. Each level
/// tries ±ρ·1 and `cfg.starts_per_level` random points of the box
/// ‖u‖_∞ ≤ ρ = sup_norm_radius(rₘ), and takes the interior record with the
/// lowest J_λ. Levels run in parallel; results are merged in schedule order.
///
/// The output is a finite prefix. An empty yield means either J_λ attains a
/// global minimum, or Φ attains one that is a local minimum of J_λ, or the
/// tolerances are too tight; the report does not decide between these.
pub fn cascade(
    energy: &EnergyFunctional,
    cfg: &SolveConfig,
    regime: Regime,
    plateau_ends: Option<&[f64]>,
) -> Result<CascadeReport> {
    cfg.validate()?;
    let levels = resolve_levels(energy, cfg, plateau_ends)?;
    check_schedule(&levels, regime)?;
    let n = energy.order();
    let matrix = energy.problem().matrix();

    let mut jobs = Vec::new();
    for (level, &r) in levels.iter().enumerate() {
        let rho = matrix.sup_norm_radius(r)?;
        jobs.push((level, r, vec![rho; n]));
        jobs.push((level, r, vec![-rho; n]));
        let seed = cfg.seed.wrapping_add(level as u64);
        for s in random_starts(n, cfg.starts_per_level, rho, seed) {
            jobs.push((level, r, s));
        }
    }
    let outcomes: Vec<Result<(usize, SublevelOutcome)>> = jobs
        .par_iter()
        .map(|(level, r, s)| {
            Ok((*level, sublevel_from(energy, *r, s, cfg, Origin::Cascade { level: *level + 1, r: *r })?))
        })
        .collect();

    let mut steps: Vec<CascadeStep> = levels
        .iter()
        .enumerate()
        .map(|(level, &r)| CascadeStep {
            level: level + 1,
            r,
            status: StepStatus::NoInterior,
            best: None,
            interior: 0,
            boundary: 0,
            not_converged: 0,
        })
        .collect();
    for out in outcomes {
        let (level, outcome) = out?;
        let step = &mut steps[level];
        match outcome {
            SublevelOutcome::Interior(rec) => {
                step.interior += 1;
                // strict comparison keeps the earliest start on ties
                if step.best.as_ref().is_none_or(|b| rec.j_value < b.j_value) {
                    step.best = Some(rec);
                }
            }
            SublevelOutcome::Boundary { .. } => step.boundary += 1,
            SublevelOutcome::NotConverged(_) => step.not_converged += 1,
        }
    }

    let mut records: Vec<SolutionRecord> = Vec::new();
    for step in &mut steps {
        let Some(best) = &step.best else { continue };
        step.status = if regime == Regime::Zero && best.norm2 <= cfg.residual_tol {
            StepStatus::Trivial
        } else if records.iter().any(|k| !distinct(&k.u, &best.u, cfg.dedupe_radius, cfg.residual_tol)) {
            StepStatus::Duplicate
        } else {
            records.push(best.clone());
            StepStatus::Kept
        };
    }
    let monotone = match regime {
        Regime::Infinity => records.windows(2).all(|w| w[1].phi > w[0].phi),
        Regime::Zero => records.windows(2).all(|w| w[1].norm_inf < w[0].norm_inf),
    };
    let summary = if records.is_empty() {
        "no multiplicity evidence: J_lambda may attain a global minimum (or Phi one that is a local minimum of \
         J_lambda), or the tolerances are too tight"
            .to_string()
    } else {
        format!("{} distinct solutions over {} levels (finite prefix)", records.len(), levels.len())
    };
    Ok(CascadeReport { regime, levels, steps, records, monotone, summary })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessPoint {
    pub b: f64,
    /// J_λ(b·1)
    pub j_value: f64,
    /// (T/2)b² − λΣFₖ(b)
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub points: Vec<WitnessPoint>,
    pub inequality_holds: bool,
    pub decreasing: bool,
    /// 1-based index from which every value is negative.
    pub negative_from: Option<usize>,
    pub unbounded_evidence: bool,
}

impl WitnessReport {
    /// True when J_λ(bₘ·1) is strictly decreasing and negative for m ≥ `from`
    /// (1-based).
    pub fn decreasing_negative_from(&self, from: usize) -> bool {
        let tail = &self.points[from.saturating_sub(1).min(self.points.len())..];
        tail.iter().all(|p| p.j_value < 0.0) && tail.windows(2).all(|w| w[1].j_value < w[0].j_value)
    }
}

/// Evaluates J_λ(bₘ·1) along increasing `peaks` and checks it against
/// (T/2)bₘ² − λΣFₖ(bₘ), T = 1ᵗA1 + nL.
pub fn unboundedness_witness(energy: &EnergyFunctional, peaks: &[f64]) -> Result<WitnessReport> {
    if peaks.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidSequence("peaks must be strictly increasing".into()));
    }
    let p = energy.problem();
    let n = p.order();
    let t = interval_constant(p.matrix(), p.h().max_lipschitz());
    let lambda = p.lambda();
    let mut points = Vec::with_capacity(peaks.len());
    for &b in peaks {
        let u = vec![b; n];
        let j_value = energy.j_lambda(&u)?;
        let psi = p.f().primitive_sum_at(b)?;
        let quad = 0.5 * t * b * b;
        let bound = quad - lambda * psi;
        let slack = 1e-12 * (quad.abs() + (lambda * psi).abs() + j_value.abs());
        points.push(WitnessPoint { b, j_value, bound, holds: j_value <= bound + slack });
    }
    let decreasing = points.windows(2).all(|w| w[1].j_value < w[0].j_value);
    let negative_from = match points.iter().rposition(|p| p.j_value >= 0.0) {
        None if !points.is_empty() => Some(1),
        Some(i) if i + 1 < points.len() => Some(i + 2),
        _ => None,
    };
    let unbounded_evidence = negative_from.is_some_and(|m| {
        let tail = &points[m - 1..];
        tail.len() >= 2 && tail.windows(2).all(|w| w[1].j_value < w[0].j_value)
    });
    Ok(WitnessReport {
        inequality_holds: points.iter().all(|p| p.holds),
        points,
        decreasing,
        negative_from,
        unbounded_evidence,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::energy::ProblemInstance;
    use crate::matrix::assemble_second_difference;
    use crate::nonlinearity::{ComponentFunction, Nonlinearity, Perturbation, Polynomial};

    fn problem(f: ComponentFunction, n: usize, lambda: f64) -> EnergyFunctional {
        let a = Arc::new(assemble_second_difference(n).unwrap());
        let f = Nonlinearity::broadcast(f, n).unwrap();
        EnergyFunctional::new(Arc::new(ProblemInstance::new(a, f, Perturbation::zero(n).unwrap(), lambda).unwrap()))
    }

    #[test]
    fn zero_data_is_bounded_below() {
        let e = problem(ComponentFunction::zero(), 3, 1.0);
        let rep = unboundedness_witness(&e, &[1.0, 2.0, 4.0]).unwrap();
        for p in &rep.points {
            assert_eq!(p.j_value, p.b * p.b);
        }
        assert!(rep.inequality_holds && !rep.unbounded_evidence && rep.negative_from.is_none());
        assert!(unboundedness_witness(&e, &[2.0, 1.0]).is_err());
    }

    #[test]
    fn superquadratic_is_unbounded() {
        let e = problem(ComponentFunction::new(Polynomial::monomial(3, 1.0)), 2, 1.0);
        let rep = unboundedness_witness(&e, &[0.5, 1.0, 2.0, 4.0, 8.0]).unwrap();
        assert!(rep.inequality_holds && rep.unbounded_evidence);
        assert!(rep.decreasing_negative_from(3));
    }

    #[test]
    fn nonresonant_linear_gives_trivial_record() {
        let e = problem(ComponentFunction::new(Polynomial::new(vec![0.0, 1.0])), 3, 0.1);
        let cfg = SolveConfig {
            schedule: ScheduleRecipe::Geometric { first: Some(1.0), ratio: 10.0, count: 4 },
            ..SolveConfig::default()
        };
        let rep = cascade(&e, &cfg, Regime::Infinity, None).unwrap();
        assert_eq!(rep.records.len(), 1);
        assert!(rep.records[0].norm_inf < 1e-8);
        assert!(rep.steps[1..].iter().all(|s| s.status == StepStatus::Duplicate));
    }

    #[test]
    fn schedule_must_match_regime() {
        let e = problem(ComponentFunction::zero(), 2, 1.0);
        let cfg = SolveConfig::default();
        assert!(cascade(&e, &cfg, Regime::Zero, None).is_err());
        let cfg = SolveConfig { schedule: ScheduleRecipe::Witness, ..SolveConfig::default() };
        assert!(cascade(&e, &cfg, Regime::Infinity, None).is_err());
    }
}
