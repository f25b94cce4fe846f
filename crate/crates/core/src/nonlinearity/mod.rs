//! Component functions fₖ and perturbations hₖ, their primitives Fₖ, Hₖ,
//! and the Lipschitz hypothesis L = maxₖ Lₖ < λ₁.

pub mod catalog;
pub mod quadrature;
pub mod spike;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

pub use catalog::{Cosine, FnScalar, PiecewiseLinear, Polynomial, ScalarFunction, Sine, Zero};
pub use quadrature::{adaptive_simpson, golden_section_max, QUAD_MAX_DEPTH, QUAD_TOL};
pub use spike::{Regime, SpikeTrain, SpikeTrainParams};

/// Resolution of the dense scan used for max_{|ξ|≤t} F(ξ): t / BOX_SCAN_CELLS.
pub const BOX_SCAN_CELLS: usize = 10_000;

/// A continuous fₖ together with its primitive Fₖ(t) = ∫₀ᵗ fₖ.
#[derive(Clone)]
pub struct ComponentFunction {
    inner: Arc<dyn ScalarFunction>,
}

impl fmt::Debug for ComponentFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComponentFunction({})", self.inner.describe())
    }
}

impl ComponentFunction {
    pub fn new(f: impl ScalarFunction + 'static) -> Self {
        Self { inner: Arc::new(f) }
    }

    pub fn from_arc(inner: Arc<dyn ScalarFunction>) -> Self {
        Self { inner }
    }

    pub fn zero() -> Self {
        Self::new(Zero)
    }

    pub fn from_fn(label: &str, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(FnScalar::new(label, f))
    }

    pub fn value(&self, t: f64) -> f64 {
        self.inner.value(t)
    }

    pub fn has_closed_primitive(&self) -> bool {
        self.inner.primitive(0.0).is_some()
    }

    pub fn describe(&self) -> String {
        self.inner.describe()
    }

    pub fn known_lipschitz(&self) -> Option<f64> {
        self.inner.lipschitz()
    }

    /// ∫₀ᵗ f: closed form when available, otherwise adaptive Simpson.
    pub fn primitive_value(&self, t: f64) -> Result<f64> {
        if let Some(v) = self.inner.primitive(t) {
            return Ok(v);
        }
        adaptive_simpson(|x| self.inner.value(x), 0.0, t, QUAD_TOL, QUAD_MAX_DEPTH)
    }

    /// f′(t): closed form when available, otherwise a central difference.
    pub fn derivative(&self, t: f64) -> f64 {
        if let Some(d) = self.inner.derivative(t) {
            return d;
        }
        let h = 1e-6 * t.abs().max(1.0);
        (self.inner.value(t + h) - self.inner.value(t - h)) / (2.0 * h)
    }

    /// max_{|ξ|≤t} F(ξ) by a dense scan of 2·[`BOX_SCAN_CELLS`] cells followed
    /// by golden-section refinement around the best sample. This is a lower
    /// bound on the true maximum.
    pub fn boxed_max_primitive(&self, t: f64) -> Result<f64> {
        let t = t.abs();
        if t == 0.0 {
            return Ok(0.0);
        }
        let cells = BOX_SCAN_CELLS;
        let dx = t / cells as f64;
        let closed = self.has_closed_primitive();
        let mut best = (0.0, 0.0);
        for sign in [1.0, -1.0] {
            let mut acc = 0.0;
            for i in 1..=cells {
                let x = sign * (i as f64) * dx;
                let fx = if closed {
                    self.primitive_value(x)?
                } else {
                    let prev = sign * ((i - 1) as f64) * dx;
                    acc += adaptive_simpson(|s| self.inner.value(s), prev, x, QUAD_TOL, QUAD_MAX_DEPTH)?;
                    acc
                };
                if fx > best.1 {
                    best = (x, fx);
                }
            }
        }
        let (x0, _) = best;
        let lo = (x0 - dx).max(-t);
        let hi = (x0 + dx).min(t);
        let base = if closed { 0.0 } else { self.primitive_value(lo)? };
        let local = |x: f64| {
            if closed {
                self.primitive_value(x).unwrap_or(f64::NEG_INFINITY)
            } else {
                base + adaptive_simpson(|s| self.inner.value(s), lo, x, QUAD_TOL, QUAD_MAX_DEPTH)
                    .unwrap_or(f64::NEG_INFINITY)
            }
        };
        let (_, refined) = golden_section_max(local, lo, hi, 80);
        Ok(best.1.max(refined))
    }
}

/// The vector field u ↦ (f₁(u₁), …, fₙ(uₙ)).
#[derive(Debug, Clone)]
pub struct Nonlinearity {
    components: Vec<ComponentFunction>,
}

impl Nonlinearity {
    pub fn new(components: Vec<ComponentFunction>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidDimension("nonlinearity needs at least one component".into()));
        }
        Ok(Self { components })
    }

    /// The same scalar function in every component.
    pub fn broadcast(f: ComponentFunction, n: usize) -> Result<Self> {
        Self::new(vec![f; n])
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[ComponentFunction] {
        &self.components
    }

    pub fn component(&self, k: usize) -> &ComponentFunction {
        &self.components[k]
    }

    pub fn eval(&self, u: &[f64]) -> Vec<f64> {
        self.components.iter().zip(u).map(|(c, x)| c.value(*x)).collect()
    }

    pub fn derivatives(&self, u: &[f64]) -> Vec<f64> {
        self.components.iter().zip(u).map(|(c, x)| c.derivative(*x)).collect()
    }

    /// Σₖ Fₖ(uₖ).
    pub fn primitive_sum(&self, u: &[f64]) -> Result<f64> {
        self.components.iter().zip(u).map(|(c, x)| c.primitive_value(*x)).sum()
    }

    /// Σₖ Fₖ(t), the pointwise quotient numerator.
    pub fn primitive_sum_at(&self, t: f64) -> Result<f64> {
        self.components.iter().map(|c| c.primitive_value(t)).sum()
    }

    /// Σₖ max_{|ξ|≤t} Fₖ(ξ), the boxed quotient numerator.
    pub fn boxed_max_sum(&self, t: f64) -> Result<f64> {
        self.components.iter().map(|c| c.boxed_max_primitive(t)).sum()
    }
}

/// Lipschitz perturbation h with hₖ(0) = 0 and declared constants Lₖ.
#[derive(Debug, Clone)]
pub struct Perturbation {
    components: Vec<ComponentFunction>,
    lipschitz: Vec<f64>,
}

impl Perturbation {
    pub fn new(components: Vec<ComponentFunction>, lipschitz: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidDimension("perturbation needs at least one component".into()));
        }
        if components.len() != lipschitz.len() {
            return Err(Error::DimensionMismatch { expected: components.len(), got: lipschitz.len() });
        }
        if let Some(l) = lipschitz.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
            return Err(Error::OutOfRange(format!("Lipschitz constants must be finite and >= 0, got {l}")));
        }
        for (k, h) in components.iter().enumerate() {
            let h0 = h.value(0.0);
            if h0 != 0.0 {
                return Err(Error::OutOfRange(format!("perturbation component {} has h(0) = {h0}, expected 0", k + 1)));
            }
        }
        Ok(Self { components, lipschitz })
    }

    pub fn broadcast(h: ComponentFunction, lipschitz: f64, n: usize) -> Result<Self> {
        Self::new(vec![h; n], vec![lipschitz; n])
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::broadcast(ComponentFunction::zero(), 0.0, n)
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[ComponentFunction] {
        &self.components
    }

    pub fn lipschitz_constants(&self) -> &[f64] {
        &self.lipschitz
    }

    /// L = maxₖ Lₖ.
    pub fn max_lipschitz(&self) -> f64 {
        self.lipschitz.iter().copied().fold(0.0, f64::max)
    }

    pub fn eval(&self, u: &[f64]) -> Vec<f64> {
        self.components.iter().zip(u).map(|(c, x)| c.value(*x)).collect()
    }

    pub fn derivatives(&self, u: &[f64]) -> Vec<f64> {
        self.components.iter().zip(u).map(|(c, x)| c.derivative(*x)).collect()
    }

    /// Σₖ Hₖ(uₖ).
    pub fn primitive_sum(&self, u: &[f64]) -> Result<f64> {
        self.components.iter().zip(u).map(|(c, x)| c.primitive_value(*x)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzEstimate {
    /// Largest sampled difference quotient per component; a lower bound on Lₖ.
    pub estimates: Vec<f64>,
    /// True where the estimate exceeds the declared Lₖ by more than 1e-9.
    pub falsified: Vec<bool>,
}

impl LipschitzEstimate {
    pub fn any_falsified(&self) -> bool {
        self.falsified.iter().any(|f| *f)
    }
}

/// Sample points on [−R, R]: both endpoints, then a dyadic refinement
/// interleaved with seeded uniform draws. Every prefix is a subset of every
/// longer prefix.
fn sample_stream(radius: f64, samples: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::with_capacity(samples);
    pts.push(-radius);
    if samples > 1 {
        pts.push(radius);
    }
    let mut dyadic = 1u64;
    while pts.len() < samples {
        // van der Corput base 2
        let mut x = 0.0;
        let mut denom = 1.0;
        let mut k = dyadic;
        while k > 0 {
            denom *= 2.0;
            x += (k & 1) as f64 / denom;
            k >>= 1;
        }
        dyadic += 1;
        pts.push(-radius + 2.0 * radius * x);
        if pts.len() < samples {
            pts.push(rng.gen_range(-radius..=radius));
        }
    }
    pts
}

/// Empirical Lipschitz constants on [−R, R] from `samples` points.
///
/// The largest difference quotient over all pairs of a point set is attained
/// by neighbours in sorted order, so points are inserted one at a time and
/// only new neighbour pairs are examined. Adding samples never lowers the
/// estimate.
pub fn estimate_lipschitz(p: &Perturbation, radius: f64, samples: usize, seed: u64) -> Result<LipschitzEstimate> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::OutOfRange(format!("degenerate sampling box radius {radius}")));
    }
    if samples < 2 {
        return Err(Error::OutOfRange(format!("need at least 2 samples, got {samples}")));
    }
    let pts = sample_stream(radius, samples, seed);
    let mut estimates = Vec::with_capacity(p.len());
    for h in p.components() {
        let mut sorted: Vec<(f64, f64)> = Vec::with_capacity(samples);
        let mut best = 0.0_f64;
        let slope = |a: (f64, f64), b: (f64, f64)| ((b.1 - a.1) / (b.0 - a.0)).abs();
        for &x in &pts {
            let pos = sorted.partition_point(|q| q.0 < x);
            if sorted.get(pos).is_some_and(|q| q.0 == x) {
                continue;
            }
            let new = (x, h.value(x));
            if pos > 0 {
                best = best.max(slope(sorted[pos - 1], new));
            }
            if pos < sorted.len() {
                best = best.max(slope(new, sorted[pos]));
            }
            sorted.insert(pos, new);
        }
        estimates.push(best);
    }
    let falsified = estimates.iter().zip(p.lipschitz_constants()).map(|(e, l)| *e > l + 1e-9).collect();
    Ok(LipschitzEstimate { estimates, falsified })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipschitzDecision {
    pub lipschitz: f64,
    pub lambda1: f64,
    pub passed: bool,
    /// (λ₁ − L)/2, the coercivity coefficient of Φ.
    pub coercivity: f64,
}

/// The strict inequality L < λ₁.
pub fn check_lipschitz_condition(lipschitz: f64, lambda1: f64) -> LipschitzDecision {
    LipschitzDecision { lipschitz, lambda1, passed: lipschitz < lambda1, coercivity: 0.5 * (lambda1 - lipschitz) }
}
