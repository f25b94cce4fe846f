use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::newton::{minimize_from, MinimizeOutcome};
use super::record::{dedupe, NonConvergence, Origin, SolutionRecord};
use super::{SolveConfig, DEFAULT_START_BOX};
use crate::energy::EnergyFunctional;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultistartReport {
    /// Distinct solutions sorted by Φ ascending.
    pub records: Vec<SolutionRecord>,
    /// (start index, last iterate) for every start that did not converge.
    pub failures: Vec<(usize, NonConvergence)>,
    pub starts: usize,
}

impl MultistartReport {
    pub fn distinct_count(&self) -> usize {
        self.records.len()
    }
}

/// `count` points uniform in [−radius, radius]ⁿ from a ChaCha8 stream.
pub fn random_starts(n: usize, count: usize, radius: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..n).map(|_| rng.gen_range(-radius..=radius)).collect()).collect()
}

/// Runs [`super::local_minimize`] from every explicit start followed by the
/// seeded random starts, in parallel, and merges the results in start order
/// so the output does not depend on scheduling.
pub fn multistart_solve(energy: &EnergyFunctional, cfg: &SolveConfig) -> Result<MultistartReport> {
    cfg.validate()?;
    let n = energy.order();
    let radius = cfg.starts.box_radius.unwrap_or(DEFAULT_START_BOX);
    let mut starts = cfg.starts.explicit.clone();
    if let Some(bad) = starts.iter().find(|s| s.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: bad.len() });
    }
    starts.extend(random_starts(n, cfg.starts.random, radius, cfg.seed));
    if starts.is_empty() {
        return Err(Error::Config("multistart needs at least one start".into()));
    }
    let outcomes: Vec<Result<MinimizeOutcome>> = starts
        .par_iter()
        .enumerate()
        .map(|(i, s)| minimize_from(energy, s, cfg, Origin::Multistart { start: i }))
        .collect();
    let mut found = Vec::new();
    let mut failures = Vec::new();
    for (i, out) in outcomes.into_iter().enumerate() {
        match out? {
            MinimizeOutcome::Converged(r) => found.push(r),
            MinimizeOutcome::NotConverged(nc) => failures.push((i, nc)),
        }
    }
    Ok(MultistartReport { records: dedupe(found, cfg.dedupe_radius, cfg.residual_tol), failures, starts: starts.len() })
}
