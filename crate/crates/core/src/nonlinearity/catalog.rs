//! Built-in scalar functions with closed-form primitives and derivatives.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A continuous scalar function t ↦ f(t). Implementations must be pure.
pub trait ScalarFunction: Send + Sync + fmt::Debug {
    fn value(&self, t: f64) -> f64;

    /// ∫₀ᵗ f, when known in closed form.
    fn primitive(&self, _t: f64) -> Option<f64> {
        None
    }

    /// f′(t) (one-sided at kinks), when known in closed form.
    fn derivative(&self, _t: f64) -> Option<f64> {
        None
    }

    /// A global Lipschitz constant, when one is known exactly.
    fn lipschitz(&self) -> Option<f64> {
        None
    }

    fn describe(&self) -> String;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Zero;

impl ScalarFunction for Zero {
    fn value(&self, _t: f64) -> f64 {
        0.0
    }
    fn primitive(&self, _t: f64) -> Option<f64> {
        Some(0.0)
    }
    fn derivative(&self, _t: f64) -> Option<f64> {
        Some(0.0)
    }
    fn lipschitz(&self) -> Option<f64> {
        Some(0.0)
    }
    fn describe(&self) -> String {
        "zero".into()
    }
}

/// c₀ + c₁t + c₂t² + …
#[derive(Debug, Clone)]
pub struct Polynomial {
    coefficients: Vec<f64>,
}

impl Polynomial {
    pub fn new(coefficients: Vec<f64>) -> Self {
        Self { coefficients }
    }

    pub fn monomial(degree: usize, scale: f64) -> Self {
        let mut c = vec![0.0; degree + 1];
        c[degree] = scale;
        Self::new(c)
    }

    fn horner(coefficients: impl DoubleEndedIterator<Item = f64>, t: f64) -> f64 {
        coefficients.rev().fold(0.0, |acc, c| acc * t + c)
    }
}

impl ScalarFunction for Polynomial {
    fn value(&self, t: f64) -> f64 {
        Self::horner(self.coefficients.iter().copied(), t)
    }
    fn primitive(&self, t: f64) -> Option<f64> {
        let lifted = self.coefficients.iter().enumerate().map(|(i, c)| c / (i + 1) as f64);
        Some(t * Self::horner(lifted, t))
    }
    fn derivative(&self, t: f64) -> Option<f64> {
        let lowered = self.coefficients.iter().enumerate().skip(1).map(|(i, c)| c * i as f64);
        Some(Self::horner(lowered, t))
    }
    fn lipschitz(&self) -> Option<f64> {
        let nonzero_high = self.coefficients.iter().skip(2).any(|c| *c != 0.0);
        if nonzero_high {
            None
        } else {
            Some(self.coefficients.get(1).copied().unwrap_or(0.0).abs())
        }
    }
    fn describe(&self) -> String {
        format!("polynomial{:?}", self.coefficients)
    }
}

/// a·sin(ωt + φ)
#[derive(Debug, Clone, Copy)]
pub struct Sine {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

impl ScalarFunction for Sine {
    fn value(&self, t: f64) -> f64 {
        self.amplitude * (self.frequency * t + self.phase).sin()
    }
    fn primitive(&self, t: f64) -> Option<f64> {
        if self.frequency == 0.0 {
            return Some(self.amplitude * self.phase.sin() * t);
        }
        Some(-self.amplitude / self.frequency * ((self.frequency * t + self.phase).cos() - self.phase.cos()))
    }
    fn derivative(&self, t: f64) -> Option<f64> {
        Some(self.amplitude * self.frequency * (self.frequency * t + self.phase).cos())
    }
    fn lipschitz(&self) -> Option<f64> {
        Some((self.amplitude * self.frequency).abs())
    }
    fn describe(&self) -> String {
        format!("{}*sin({}*t + {})", self.amplitude, self.frequency, self.phase)
    }
}

/// a·cos(ωt + φ)
#[derive(Debug, Clone, Copy)]
pub struct Cosine {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

impl ScalarFunction for Cosine {
    fn value(&self, t: f64) -> f64 {
        self.amplitude * (self.frequency * t + self.phase).cos()
    }
    fn primitive(&self, t: f64) -> Option<f64> {
        if self.frequency == 0.0 {
            return Some(self.amplitude * self.phase.cos() * t);
        }
        Some(self.amplitude / self.frequency * ((self.frequency * t + self.phase).sin() - self.phase.sin()))
    }
    fn derivative(&self, t: f64) -> Option<f64> {
        Some(-self.amplitude * self.frequency * (self.frequency * t + self.phase).sin())
    }
    fn lipschitz(&self) -> Option<f64> {
        Some((self.amplitude * self.frequency).abs())
    }
    fn describe(&self) -> String {
        format!("{}*cos({}*t + {})", self.amplitude, self.frequency, self.phase)
    }
}

/// Linear interpolation through breakpoints (tᵢ, yᵢ), constant beyond the
/// first and last breakpoint. Also serves user-supplied value tables.
#[derive(Debug, Clone)]
pub struct PiecewiseLinear {
    ts: Vec<f64>,
    ys: Vec<f64>,
    // ∫ from ts[0] to ts[i]
    cumulative: Vec<f64>,
    offset: f64,
}

impl PiecewiseLinear {
    pub fn new(breakpoints: &[(f64, f64)]) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::Config("piecewise-linear function needs at least one breakpoint".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::Config("breakpoints must be strictly increasing in t".into()));
        }
        if breakpoints.iter().any(|(t, y)| !t.is_finite() || !y.is_finite()) {
            return Err(Error::Config("breakpoints must be finite".into()));
        }
        let ts: Vec<f64> = breakpoints.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = breakpoints.iter().map(|p| p.1).collect();
        let mut cumulative = vec![0.0; ts.len()];
        for i in 1..ts.len() {
            cumulative[i] = cumulative[i - 1] + 0.5 * (ys[i] + ys[i - 1]) * (ts[i] - ts[i - 1]);
        }
        let mut s = Self { ts, ys, cumulative, offset: 0.0 };
        s.offset = s.integral_from_first(0.0);
        Ok(s)
    }

    fn segment(&self, t: f64) -> usize {
        // index i with ts[i] <= t < ts[i+1]
        self.ts.partition_point(|&x| x <= t).saturating_sub(1)
    }

    fn integral_from_first(&self, t: f64) -> f64 {
        let n = self.ts.len();
        if t <= self.ts[0] {
            return self.ys[0] * (t - self.ts[0]);
        }
        if t >= self.ts[n - 1] {
            return self.cumulative[n - 1] + self.ys[n - 1] * (t - self.ts[n - 1]);
        }
        let i = self.segment(t);
        let y = self.value(t);
        self.cumulative[i] + 0.5 * (self.ys[i] + y) * (t - self.ts[i])
    }
}

impl ScalarFunction for PiecewiseLinear {
    fn value(&self, t: f64) -> f64 {
        let n = self.ts.len();
        if t <= self.ts[0] {
            return self.ys[0];
        }
        if t >= self.ts[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.segment(t);
        let w = (t - self.ts[i]) / (self.ts[i + 1] - self.ts[i]);
        self.ys[i] + w * (self.ys[i + 1] - self.ys[i])
    }
    fn primitive(&self, t: f64) -> Option<f64> {
        Some(self.integral_from_first(t) - self.offset)
    }
    fn derivative(&self, t: f64) -> Option<f64> {
        let n = self.ts.len();
        if t < self.ts[0] || t >= self.ts[n - 1] {
            return Some(0.0);
        }
        let i = self.segment(t);
        Some((self.ys[i + 1] - self.ys[i]) / (self.ts[i + 1] - self.ts[i]))
    }
    fn lipschitz(&self) -> Option<f64> {
        Some(
            self.ts
                .windows(2)
                .zip(self.ys.windows(2))
                .map(|(t, y)| ((y[1] - y[0]) / (t[1] - t[0])).abs())
                .fold(0.0, f64::max),
        )
    }
    fn describe(&self) -> String {
        format!("piecewise-linear({} breakpoints)", self.ts.len())
    }
}

/// Wraps a plain closure. No primitive or derivative: quadrature and finite
/// differences fill in.
#[derive(Clone)]
pub struct FnScalar {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    label: String,
}

impl FnScalar {
    pub fn new(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f), label: label.into() }
    }
}

impl fmt::Debug for FnScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnScalar").field("label", &self.label).finish()
    }
}

impl ScalarFunction for FnScalar {
    fn value(&self, t: f64) -> f64 {
        (self.f)(t)
    }
    fn describe(&self) -> String {
        self.label.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_pieces() {
        let p = Polynomial::new(vec![1.0, -2.0, 0.0, 3.0]);
        assert_eq!(p.value(2.0), 1.0 - 4.0 + 24.0);
        assert_eq!(p.primitive(2.0).unwrap(), 2.0 - 4.0 + 12.0);
        assert_eq!(p.derivative(2.0).unwrap(), -2.0 + 36.0);
        assert_eq!(p.lipschitz(), None);
        assert_eq!(Polynomial::new(vec![0.0, -0.5]).lipschitz(), Some(0.5));
    }

    #[test]
    fn trig_primitives_vanish_at_zero() {
        let s = Sine { amplitude: 0.3, frequency: 2.0, phase: 0.4 };
        let c = Cosine { amplitude: -1.5, frequency: 0.5, phase: 1.0 };
        assert_eq!(s.primitive(0.0).unwrap(), 0.0);
        assert!(c.primitive(0.0).unwrap().abs() < 1e-16);
        assert_eq!(s.lipschitz(), Some(0.6));
    }

    #[test]
    fn piecewise_linear_table() {
        let p = PiecewiseLinear::new(&[(-1.0, 2.0), (0.0, 0.0), (2.0, 4.0)]).unwrap();
        assert_eq!(p.value(1.0), 2.0);
        assert_eq!(p.value(-5.0), 2.0);
        assert_eq!(p.value(10.0), 4.0);
        assert_eq!(p.primitive(0.0).unwrap(), 0.0);
        assert_eq!(p.primitive(2.0).unwrap(), 4.0);
        assert_eq!(p.primitive(3.0).unwrap(), 8.0);
        assert_eq!(p.primitive(-1.0).unwrap(), -1.0);
        assert_eq!(p.lipschitz(), Some(2.0));
        assert!(PiecewiseLinear::new(&[(1.0, 0.0), (1.0, 2.0)]).is_err());
    }
}
