//! Oscillation coefficients of ΣFₖ against t² and the admissible parameter
//! intervals they open.
//!
//! ```text
//! A_∞ = liminf_{t→∞} Σₖ max_{|ξ|≤t} Fₖ(ξ) / t²      B^∞ = limsup_{t→∞} Σₖ Fₖ(t) / t²
//! A_0, B^0: the same with t → 0⁺
//!
//! T = 1ᵗA1 + nL,    λ ∈ ] T / (2B),  (λ₁ − L) / (2A) [
//! ```
//!
//! Extended reals are plain `f64` infinities. A zero denominator reads as
//! +∞, so A = 0 opens the interval upward and B = +∞ closes it at 0.
//!
//! Lim-inf/sup values are not finitely computable. Analytic values are taken
//! on trust; empirical values are tail estimates and are labelled as such.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::SpdMatrix;
use crate::nonlinearity::{Nonlinearity, Regime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuotientMode {
    /// Σₖ max_{|ξ|≤t} Fₖ(ξ) / t², feeding A-coefficients.
    MaxOverBox,
    /// Σₖ Fₖ(t) / t², feeding B-coefficients.
    Pointwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Analytic,
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coefficient {
    pub value: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientTail {
    pub mode: QuotientMode,
    pub direction: Regime,
    pub points: Vec<f64>,
    pub quotients: Vec<f64>,
    pub running_inf: Vec<f64>,
    pub running_sup: Vec<f64>,
}

impl QuotientTail {
    pub fn final_inf(&self) -> f64 {
        *self.running_inf.last().expect("tail has >= 3 points")
    }

    pub fn final_sup(&self) -> f64 {
        *self.running_sup.last().expect("tail has >= 3 points")
    }
}

/// Evaluates the chosen quotient along a monotone sequence and tracks its
/// running extremes. The result is an estimate, never a certificate.
pub fn estimate_quotient_tail(
    f: &Nonlinearity,
    sequence: &[f64],
    mode: QuotientMode,
    direction: Regime,
) -> Result<QuotientTail> {
    if sequence.len() < 3 {
        return Err(Error::InvalidSequence(format!("need at least 3 points, got {}", sequence.len())));
    }
    if let Some(t) = sequence.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidSequence(format!("points must be positive and finite, got {t}")));
    }
    let monotone = match direction {
        Regime::Infinity => sequence.windows(2).all(|w| w[1] > w[0]),
        Regime::Zero => sequence.windows(2).all(|w| w[1] < w[0]),
    };
    if !monotone {
        let need = if direction == Regime::Infinity { "increasing" } else { "decreasing" };
        return Err(Error::InvalidSequence(format!("sequence must be strictly {need}")));
    }
    let mut quotients = Vec::with_capacity(sequence.len());
    for &t in sequence {
        let num = match mode {
            QuotientMode::MaxOverBox => f.boxed_max_sum(t)?,
            QuotientMode::Pointwise => f.primitive_sum_at(t)?,
        };
        quotients.push(num / (t * t));
    }
    let mut running_inf = Vec::with_capacity(quotients.len());
    let mut running_sup = Vec::with_capacity(quotients.len());
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for q in &quotients {
        lo = lo.min(*q);
        hi = hi.max(*q);
        running_inf.push(lo);
        running_sup.push(hi);
    }
    Ok(QuotientTail { mode, direction, points: sequence.to_vec(), quotients, running_inf, running_sup })
}

/// t₀, t₀·ρ, t₀·ρ², … (`count` terms).
pub fn geometric_sequence(start: f64, ratio: f64, count: usize) -> Result<Vec<f64>> {
    if !(start > 0.0) || !(ratio > 0.0) || ratio == 1.0 {
        return Err(Error::InvalidSequence(format!(
            "geometric({start}, {ratio}) is not strictly monotone and positive"
        )));
    }
    Ok((0..count).map(|k| start * ratio.powi(k as i32)).collect())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AsymptoticProfile {
    pub a_inf: Option<Coefficient>,
    pub b_sup: Option<Coefficient>,
    pub a_zero: Option<Coefficient>,
    pub b_zero: Option<Coefficient>,
    /// Peaks bₘ at which ΣFₖ(bₘ)/bₘ² is large.
    pub witness_peaks: Vec<f64>,
    /// Points cₘ at which the boxed quotient is small.
    pub witness_plateau_ends: Vec<f64>,
    /// Tail evidence backing empirical fields.
    pub tails: Vec<QuotientTail>,
}

impl AsymptoticProfile {
    pub fn analytic(regime: Regime, a: f64, b: f64) -> Self {
        let mut p = Self::default();
        p.set(
            regime,
            Coefficient { value: a, provenance: Provenance::Analytic },
            Coefficient { value: b, provenance: Provenance::Analytic },
        );
        p
    }

    /// Estimates A from the running infimum of the boxed quotient and B from
    /// the running supremum of the pointwise quotient along `sequence`.
    pub fn empirical(f: &Nonlinearity, regime: Regime, sequence: &[f64]) -> Result<Self> {
        let boxed = estimate_quotient_tail(f, sequence, QuotientMode::MaxOverBox, regime)?;
        let point = estimate_quotient_tail(f, sequence, QuotientMode::Pointwise, regime)?;
        let mut p = Self::default();
        p.set(
            regime,
            Coefficient { value: boxed.final_inf(), provenance: Provenance::Empirical },
            Coefficient { value: point.final_sup(), provenance: Provenance::Empirical },
        );
        p.tails = vec![boxed, point];
        Ok(p)
    }

    pub fn with_witnesses(mut self, peaks: Vec<f64>, plateau_ends: Vec<f64>) -> Self {
        self.witness_peaks = peaks;
        self.witness_plateau_ends = plateau_ends;
        self
    }

    fn set(&mut self, regime: Regime, a: Coefficient, b: Coefficient) {
        match regime {
            Regime::Infinity => {
                self.a_inf = Some(a);
                self.b_sup = Some(b);
            }
            Regime::Zero => {
                self.a_zero = Some(a);
                self.b_zero = Some(b);
            }
        }
    }

    /// (A, B) for the regime.
    pub fn coefficients(&self, regime: Regime) -> Result<(Coefficient, Coefficient)> {
        match regime {
            Regime::Infinity => {
                Ok((self.a_inf.ok_or(Error::UnsetProfile("a_inf"))?, self.b_sup.ok_or(Error::UnsetProfile("b_sup"))?))
            }
            Regime::Zero => Ok((
                self.a_zero.ok_or(Error::UnsetProfile("a_zero"))?,
                self.b_zero.ok_or(Error::UnsetProfile("b_zero"))?,
            )),
        }
    }
}

/// T = trace(A) + 2Σ_{i<j} aᵢⱼ + nL.
pub fn interval_constant(matrix: &SpdMatrix, lipschitz: f64) -> f64 {
    matrix.ones_form() + matrix.order() as f64 * lipschitz
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillationDecision {
    pub regime: Regime,
    pub a: f64,
    pub b: f64,
    /// (λ₁ − L) / T
    pub factor: f64,
    /// factor · B
    pub rhs: f64,
    pub passed: bool,
    pub provenance: Provenance,
}

/// The strict inequality A < ((λ₁ − L)/T)·B for the chosen regime.
pub fn oscillation_condition(
    profile: &AsymptoticProfile,
    matrix: &SpdMatrix,
    lipschitz: f64,
    regime: Regime,
) -> Result<OscillationDecision> {
    let (a, b) = profile.coefficients(regime)?;
    let lambda1 = matrix.lambda_min()?;
    let t = interval_constant(matrix, lipschitz);
    let gap = lambda1 - lipschitz;
    let factor = gap / t;
    // a closed gap or an empty right side can never be beaten by A >= 0
    let rhs = if gap > 0.0 && t > 0.0 && b.value > 0.0 { factor * b.value } else { 0.0 };
    let passed = rhs > 0.0 && a.value < rhs;
    let provenance = if a.provenance == Provenance::Analytic && b.provenance == Provenance::Analytic {
        Provenance::Analytic
    } else {
        Provenance::Empirical
    };
    Ok(OscillationDecision { regime, a: a.value, b: b.value, factor, rhs, passed, provenance })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaInterval {
    pub regime: Regime,
    pub lower: f64,
    pub upper: f64,
    pub empty: bool,
    pub constant_t: f64,
}

impl LambdaInterval {
    pub fn contains(&self, lambda: f64) -> bool {
        !self.empty && lambda > self.lower && lambda < self.upper
    }
}

/// ] T/(2B), (λ₁−L)/(2A) [ with the conventions 1/0 = +∞ and 1/∞ = 0.
pub fn lambda_interval(
    profile: &AsymptoticProfile,
    matrix: &SpdMatrix,
    lipschitz: f64,
    regime: Regime,
) -> Result<LambdaInterval> {
    let (a, b) = profile.coefficients(regime)?;
    let lambda1 = matrix.lambda_min()?;
    let t = interval_constant(matrix, lipschitz);
    let gap = lambda1 - lipschitz;
    let lower = if b.value > 0.0 { t / (2.0 * b.value) } else { f64::INFINITY };
    let upper = if !(gap > 0.0) {
        0.0
    } else if a.value <= 0.0 {
        f64::INFINITY
    } else {
        gap / (2.0 * a.value)
    };
    Ok(LambdaInterval { regime, lower, upper, empty: !(lower < upper), constant_t: t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::assemble_second_difference;
    use crate::nonlinearity::{ComponentFunction, Polynomial};

    fn identity_f(n: usize) -> Nonlinearity {
        Nonlinearity::broadcast(ComponentFunction::new(Polynomial::new(vec![0.0, 1.0])), n).unwrap()
    }

    #[test]
    fn linear_quotients_are_constant() {
        let f = identity_f(2);
        let seq = [1.0, 2.0, 5.0, 9.0];
        for mode in [QuotientMode::MaxOverBox, QuotientMode::Pointwise] {
            let tail = estimate_quotient_tail(&f, &seq, mode, Regime::Infinity).unwrap();
            for q in &tail.quotients {
                assert!((q - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn plateau_dilution() {
        // f = 1 on [0,1], 0 beyond (continuous ramp down on [1, 1.5]):
        // F is constant for t >= 1.5
        let f = Nonlinearity::new(vec![ComponentFunction::new(
            crate::nonlinearity::PiecewiseLinear::new(&[(-1.5, 0.0), (-1.0, 1.0), (1.0, 1.0), (1.5, 0.0)]).unwrap(),
        )])
        .unwrap();
        let fp = 1.0 + 0.25;
        let tail = estimate_quotient_tail(&f, &[2.0, 4.0, 8.0], QuotientMode::Pointwise, Regime::Infinity).unwrap();
        assert!((tail.quotients[2] - fp / 64.0).abs() < 1e-15);
        assert!(tail.running_inf.windows(2).all(|w| w[1] <= w[0]));
        assert!(tail.running_sup.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn sequence_validation() {
        let f = identity_f(1);
        let pw = QuotientMode::Pointwise;
        assert!(estimate_quotient_tail(&f, &[1.0, 2.0], pw, Regime::Infinity).is_err());
        assert!(estimate_quotient_tail(&f, &[1.0, 3.0, 2.0], pw, Regime::Infinity).is_err());
        assert!(estimate_quotient_tail(&f, &[1.0, 0.5, 0.0], pw, Regime::Zero).is_err());
        assert!(estimate_quotient_tail(&f, &[1.0, 0.5, 0.25], pw, Regime::Zero).is_ok());
        assert!(estimate_quotient_tail(&f, &[0.25, 0.5, 1.0], pw, Regime::Zero).is_err());
    }

    #[test]
    fn oscillation_examples() {
        let a = assemble_second_difference(4).unwrap();
        let p = AsymptoticProfile::analytic(Regime::Infinity, 0.0, f64::INFINITY);
        assert!(oscillation_condition(&p, &a, 0.0, Regime::Infinity).unwrap().passed);
        assert!(oscillation_condition(&p, &a, 0.1, Regime::Infinity).unwrap().passed);

        let lin = AsymptoticProfile::analytic(Regime::Infinity, 1.0, 1.0);
        for n in 2..8 {
            let a = assemble_second_difference(n).unwrap();
            assert!(!oscillation_condition(&lin, &a, 0.0, Regime::Infinity).unwrap().passed);
        }

        let flat = AsymptoticProfile::analytic(Regime::Zero, 0.0, 0.0);
        assert!(!oscillation_condition(&flat, &a, 0.0, Regime::Zero).unwrap().passed);

        let inf_both = AsymptoticProfile::analytic(Regime::Infinity, f64::INFINITY, f64::INFINITY);
        assert!(!oscillation_condition(&inf_both, &a, 0.0, Regime::Infinity).unwrap().passed);

        // L beyond λ₁ can never pass
        assert!(!oscillation_condition(&p, &a, 5.0, Regime::Infinity).unwrap().passed);
        assert!(matches!(oscillation_condition(&p, &a, 0.0, Regime::Zero), Err(Error::UnsetProfile("a_zero"))));
    }

    #[test]
    fn interval_examples() {
        let a = assemble_second_difference(4).unwrap();
        let p = AsymptoticProfile::analytic(Regime::Infinity, 0.0, f64::INFINITY);
        let iv = lambda_interval(&p, &a, 0.1, Regime::Infinity).unwrap();
        assert_eq!((iv.lower, iv.upper, iv.empty), (0.0, f64::INFINITY, false));

        let a1 = assemble_second_difference(1).unwrap();
        let p = AsymptoticProfile::analytic(Regime::Infinity, 0.125, 2.0);
        let iv = lambda_interval(&p, &a1, 0.0, Regime::Infinity).unwrap();
        assert_eq!(iv.constant_t, 2.0);
        assert!((iv.lower - 0.5).abs() < 1e-15 && (iv.upper - 8.0).abs() < 1e-15);
        assert!(iv.contains(1.0) && !iv.contains(0.5) && !iv.contains(8.0));

        // L → λ₁ empties the interval
        let iv = lambda_interval(&p, &a1, 2.0 - 1e-13, Regime::Infinity).unwrap();
        assert!(iv.upper < 1e-12 && iv.empty);
        let iv = lambda_interval(&p, &a1, 2.0, Regime::Infinity).unwrap();
        assert!(iv.empty && iv.upper == 0.0);
    }

    #[test]
    fn empirical_profile_labels() {
        let f = identity_f(3);
        let seq = geometric_sequence(1.0, 2.0, 5).unwrap();
        let p = AsymptoticProfile::empirical(&f, Regime::Infinity, &seq).unwrap();
        let (a, b) = p.coefficients(Regime::Infinity).unwrap();
        assert_eq!(a.provenance, Provenance::Empirical);
        assert!((a.value - 1.5).abs() < 1e-12 && (b.value - 1.5).abs() < 1e-12);
        assert_eq!(p.tails.len(), 2);
        assert!(geometric_sequence(1.0, 1.0, 3).is_err());
    }
}
