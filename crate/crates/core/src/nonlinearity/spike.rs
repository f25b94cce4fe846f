//! Nonnegative, even, piecewise-linear "spike train" nonlinearities.
//!
//! The primitive F alternates flat plateaus with steep rises. Stage m has a
//! peak bₘ with F(bₘ) = βₘ·bₘ² and a plateau [bₘ, Kₘ·bₘ] on which F stays at
//! that level, so
//!
//! ```text
//! F(bₘ)/bₘ²          = βₘ            → ∞
//! F(Kₘbₘ)/(Kₘbₘ)²    = 1/(κ²·βₘ)     → 0
//! ```
//!
//! with gain βₘ = β₀ + m and stretch Kₘ = κ·βₘ. Each rise is a triangular
//! bump of f supported on [(1−ε)bₘ, bₘ], so f′ is bounded by 4βₘ/ε² and the
//! train is self-similar enough to keep Newton residuals near machine
//! precision at every stage. Stages run either outward (peaks → ∞) or
//! inward (peaks → 0⁺).

use serde::{Deserialize, Serialize};

use super::catalog::ScalarFunction;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Infinity,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpikeTrainParams {
    pub regime: Regime,
    /// b₁, the first peak in regime order.
    pub first_peak: f64,
    /// ε: relative width of each bump.
    pub width: f64,
    /// β₀ in βₘ = β₀ + m.
    pub gain_offset: f64,
    /// κ in Kₘ = κ·βₘ.
    pub stretch: f64,
}

impl SpikeTrainParams {
    pub fn infinity() -> Self {
        Self { regime: Regime::Infinity, first_peak: 1e-4, width: 0.5, gain_offset: 2.0, stretch: 4.0 }
    }

    pub fn zero() -> Self {
        Self { regime: Regime::Zero, first_peak: 0.05, width: 0.5, gain_offset: 2.0, stretch: 4.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Stage {
    start: f64,
    peak: f64,
    prev_level: f64,
    level: f64,
}

#[derive(Debug, Clone)]
pub struct SpikeTrain {
    params: SpikeTrainParams,
    // ascending in t
    stages: Vec<Stage>,
}

const T_MAX: f64 = 1e300;
const T_MIN: f64 = 1e-300;

impl SpikeTrain {
    pub fn new(params: SpikeTrainParams) -> Result<Self> {
        let SpikeTrainParams { first_peak, width, gain_offset, stretch, .. } = params;
        if !(first_peak > 0.0 && first_peak.is_finite()) {
            return Err(Error::Config(format!("spike train first_peak must be positive, got {first_peak}")));
        }
        if !(width > 0.0 && width < 1.0) {
            return Err(Error::Config(format!("spike train width must lie in (0,1), got {width}")));
        }
        if !(gain_offset >= 0.0) || !(stretch > 0.0) {
            return Err(Error::Config("spike train gain_offset must be >= 0 and stretch > 0".into()));
        }
        let gain = |m: usize| gain_offset + m as f64;
        let widen = |m: usize| stretch * gain(m);
        if widen(1) <= 1.0 {
            return Err(Error::Config("spike train plateaus would overlap the next bump; raise stretch".into()));
        }

        // (peak, level) in regime order
        let mut peaks = Vec::new();
        let mut b = first_peak;
        let mut m = 1;
        match params.regime {
            Regime::Infinity => {
                while b < T_MAX {
                    peaks.push((b, gain(m) * b * b));
                    b = widen(m) * b / (1.0 - width);
                    m += 1;
                }
            }
            Regime::Zero => {
                while b > T_MIN {
                    peaks.push((b, gain(m) * b * b));
                    m += 1;
                    b = b * (1.0 - width) / widen(m);
                }
                peaks.reverse();
            }
        }
        let mut stages = Vec::with_capacity(peaks.len());
        let mut prev_level = 0.0;
        for (peak, level) in peaks {
            stages.push(Stage { start: (1.0 - width) * peak, peak, prev_level, level });
            prev_level = level;
        }
        Ok(Self { params, stages })
    }

    pub fn params(&self) -> SpikeTrainParams {
        self.params
    }

    pub fn gain(&self, m: usize) -> f64 {
        self.params.gain_offset + m as f64
    }

    pub fn stretch_factor(&self, m: usize) -> f64 {
        self.params.stretch * self.gain(m)
    }

    fn stage_in_regime_order(&self, m: usize) -> Option<&Stage> {
        if m == 0 || m > self.stages.len() {
            return None;
        }
        match self.params.regime {
            Regime::Infinity => self.stages.get(m - 1),
            Regime::Zero => self.stages.get(self.stages.len() - m),
        }
    }

    /// b₁, b₂, … in regime order (increasing for Infinity, decreasing for Zero).
    pub fn peaks(&self, count: usize) -> Vec<f64> {
        (1..=count).filter_map(|m| self.stage_in_regime_order(m)).map(|s| s.peak).collect()
    }

    /// c₁, c₂, … with cₘ = Kₘ·bₘ, the far end of the plateau after peak m.
    pub fn plateau_ends(&self, count: usize) -> Vec<f64> {
        (1..=count).filter_map(|m| self.stage_in_regime_order(m).map(|s| self.stretch_factor(m) * s.peak)).collect()
    }

    fn eval(&self, t: f64) -> (f64, f64, f64) {
        // (f, F, f′) for t >= 0
        let idx = self.stages.partition_point(|s| s.start <= t);
        if idx == 0 {
            return (0.0, 0.0, 0.0);
        }
        let s = &self.stages[idx - 1];
        if t >= s.peak {
            return (0.0, s.level, 0.0);
        }
        let w = s.peak - s.start;
        let area = s.level - s.prev_level;
        let height = 2.0 * area / w;
        let slope = 2.0 * height / w;
        let mid = s.start + 0.5 * w;
        if t <= mid {
            let d = t - s.start;
            (slope * d, s.prev_level + height * d * d / w, slope)
        } else {
            let d = s.peak - t;
            (slope * d, s.level - height * d * d / w, -slope)
        }
    }
}

impl ScalarFunction for SpikeTrain {
    fn value(&self, t: f64) -> f64 {
        self.eval(t.abs()).0
    }
    fn primitive(&self, t: f64) -> Option<f64> {
        let big_f = self.eval(t.abs()).1;
        Some(if t < 0.0 { -big_f } else { big_f })
    }
    fn derivative(&self, t: f64) -> Option<f64> {
        let d = self.eval(t.abs()).2;
        Some(if t < 0.0 { -d } else { d })
    }
    fn describe(&self) -> String {
        format!(
            "spike-train({:?}, first_peak={}, width={}, gain=({}+m), stretch={})",
            self.params.regime, self.params.first_peak, self.params.width, self.params.gain_offset, self.params.stretch
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::quadrature::{adaptive_simpson, QUAD_MAX_DEPTH};

    fn train(regime: Regime) -> SpikeTrain {
        let p = match regime {
            Regime::Infinity => SpikeTrainParams::infinity(),
            Regime::Zero => SpikeTrainParams::zero(),
        };
        SpikeTrain::new(p).unwrap()
    }

    #[test]
    fn peak_and_plateau_levels() {
        for regime in [Regime::Infinity, Regime::Zero] {
            let s = train(regime);
            let peaks = s.peaks(6);
            let ends = s.plateau_ends(6);
            for m in 1..=6 {
                let (b, c) = (peaks[m - 1], ends[m - 1]);
                let fb = s.primitive(b).unwrap();
                let fc = s.primitive(c).unwrap();
                assert!((fb / (b * b) - s.gain(m)).abs() < 1e-12 * s.gain(m));
                assert!((fc / (c * c) - 1.0 / (16.0 * s.gain(m))).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn regime_orders() {
        let inf = train(Regime::Infinity).peaks(4);
        assert!(inf.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(inf[0], 1e-4);
        let zero = train(Regime::Zero).peaks(4);
        assert!(zero.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(zero[0], 0.05);
    }

    #[test]
    fn even_nonnegative_continuous() {
        let s = train(Regime::Infinity);
        for &t in &[0.0, 3e-5, 7e-5, 1e-4, 0.013, 0.5, 2.0, 30.0, 1000.0] {
            assert!(s.value(t) >= 0.0);
            assert_eq!(s.value(t), s.value(-t));
            assert_eq!(s.primitive(-t).unwrap(), -s.primitive(t).unwrap());
        }
        // continuity across every stage boundary
        for st in s.stages.iter().take(8) {
            for x in [st.start, st.peak, 0.5 * (st.start + st.peak)] {
                let h = 1e-9 * x;
                let max_slope = 4.0 * st.level / ((st.peak - st.start) * (st.peak - st.start));
                assert!((s.value(x + h) - s.value(x - h)).abs() <= 2.5 * h * max_slope);
            }
        }
    }

    #[test]
    fn primitive_matches_quadrature() {
        let s = train(Regime::Infinity);
        for &t in &[5e-5, 1e-4, 0.02, 0.5, 3.0, 100.0] {
            // geometric panels resolve every stage below t
            let mut edges: Vec<f64> = (0..60).map(|k| t * 0.5f64.powi(k)).collect();
            edges.push(0.0);
            edges.reverse();
            let q: f64 = edges
                .windows(2)
                .map(|w| adaptive_simpson(|x| s.value(x), w[0], w[1], 1e-14, QUAD_MAX_DEPTH).unwrap())
                .sum();
            let c = s.primitive(t).unwrap();
            assert!((q - c).abs() <= 1e-9 * (1.0 + c.abs()), "t={t} {q} {c}");
        }
    }

    #[test]
    fn zero_regime_is_flat_above_first_peak() {
        let s = train(Regime::Zero);
        assert_eq!(s.value(1.0), 0.0);
        assert_eq!(s.primitive(10.0).unwrap(), 3.0 * 0.05 * 0.05);
        assert_eq!(s.value(0.0), 0.0);
        assert_eq!(s.primitive(0.0).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut p = SpikeTrainParams::infinity();
        p.width = 1.0;
        assert!(SpikeTrain::new(p).is_err());
        let mut p = SpikeTrainParams::infinity();
        p.first_peak = 0.0;
        assert!(SpikeTrain::new(p).is_err());
        let mut p = SpikeTrainParams::infinity();
        p.stretch = 0.1;
        assert!(SpikeTrain::new(p).is_err());
    }
}
