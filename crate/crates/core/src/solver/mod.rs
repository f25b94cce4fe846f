//! Multiple-solution search for Au = λf(u) + h(u).
//!
//! Solutions are critical points of J_λ. [`local_minimize`] drives the
//! gradient to zero from one start, [`multistart_solve`] collects distinct
//! solutions from many, and [`cascade`] minimizes J_λ over a family of
//! sublevel sets {Φ < rₘ} to produce a sequence of solutions whose energy
//! grows (or whose norm shrinks) along the schedule.

mod cascade;
mod linalg;
mod multistart;
mod newton;
mod record;
mod sublevel;

use serde::{Deserialize, Serialize};

pub use cascade::{
    cascade, schedule_from_plateau_ends, unboundedness_witness, CascadeReport, CascadeStep, StepStatus, WitnessPoint,
    WitnessReport,
};
pub use multistart::{multistart_solve, random_starts, MultistartReport};
pub use newton::{local_minimize, MinimizeOutcome};
pub use record::{dedupe, distinct, NonConvergence, Origin, SolutionRecord, Stability};
pub use sublevel::{minimize_on_sublevel, SublevelOutcome};

use crate::error::{Error, Result};
use crate::nonlinearity::Regime;

/// Random draws are uniform in the sup-norm box of this radius unless the
/// caller supplies one.
pub const DEFAULT_START_BOX: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StartRecipe {
    pub explicit: Vec<Vec<f64>>,
    pub random: usize,
    /// Sup-norm radius for random draws; `None` uses [`DEFAULT_START_BOX`].
    pub box_radius: Option<f64>,
}

impl Default for StartRecipe {
    fn default() -> Self {
        Self { explicit: Vec::new(), random: 16, box_radius: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleRecipe {
    Explicit {
        levels: Vec<f64>,
    },
    /// r₁, r₁ρ, r₁ρ², … ; `first = None` anchors r₁ at ((λ₁−L)/2)c₁² when
    /// plateau ends are known, else at 1.
    Geometric {
        first: Option<f64>,
        ratio: f64,
        count: usize,
    },
    /// rₘ = ((λ₁−L)/2)·cₘ² from the plateau ends cₘ passed to the cascade.
    Witness,
}

impl Default for ScheduleRecipe {
    fn default() -> Self {
        ScheduleRecipe::Geometric { first: None, ratio: 10.0, count: 6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub residual_tol: f64,
    pub max_iters: usize,
    /// Relative Euclidean distance under which two solutions coincide.
    pub dedupe_radius: f64,
    pub starts: StartRecipe,
    pub schedule: ScheduleRecipe,
    /// Starts tried on each sublevel set of a cascade.
    pub starts_per_level: usize,
    pub seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            residual_tol: 1e-8,
            max_iters: 100_000,
            dedupe_radius: 1e-6,
            starts: StartRecipe::default(),
            schedule: ScheduleRecipe::default(),
            starts_per_level: 12,
            seed: 0,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.residual_tol > 0.0) {
            return Err(Error::Config(format!("residual_tol must be positive, got {}", self.residual_tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if !(self.dedupe_radius > 0.0) {
            return Err(Error::Config(format!("dedupe_radius must be positive, got {}", self.dedupe_radius)));
        }
        if let Some(b) = self.starts.box_radius {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::Config(format!("start box radius must be positive, got {b}")));
            }
        }
        match &self.schedule {
            ScheduleRecipe::Explicit { levels } if levels.iter().any(|r| !(*r > 0.0 && r.is_finite())) => {
                Err(Error::Config("schedule levels must be positive and finite".into()))
            }
            ScheduleRecipe::Geometric { first, ratio, count } => {
                if first.is_some_and(|r| !(r > 0.0)) || !(*ratio > 0.0) || *ratio == 1.0 || *count == 0 {
                    return Err(Error::Config(
                        "geometric schedule needs first > 0, ratio > 0 and != 1, count >= 1".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Checks the ordering a regime requires of a level list.
pub fn check_schedule(levels: &[f64], regime: Regime) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::InvalidSequence("empty radius schedule".into()));
    }
    if levels.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidSequence("schedule levels must be positive and finite".into()));
    }
    let ok = match regime {
        Regime::Infinity => levels.windows(2).all(|w| w[1] > w[0]),
        Regime::Zero => levels.windows(2).all(|w| w[1] < w[0]),
    };
    if !ok {
        let need = if regime == Regime::Infinity { "increasing" } else { "decreasing" };
        return Err(Error::InvalidSequence(format!("radius schedule must be strictly {need}")));
    }
    Ok(())
}
