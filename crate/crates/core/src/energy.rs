//! Φ, Ψ and J_λ for Au = λf(u) + h(u).
//!
//! ```text
//! Φ(u) = uᵗAu/2 − Σₖ Hₖ(uₖ)     Ψ(u) = Σₖ Fₖ(uₖ)     J_λ = Φ − λΨ
//! ∇J_λ(u) = Au − λf(u) − h(u)
//! ```

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{euclidean_norm, SpdMatrix};
use crate::nonlinearity::{check_lipschitz_condition, LipschitzDecision, Nonlinearity, Perturbation};

#[derive(Debug, Clone)]
pub struct ProblemInstance {
    matrix: Arc<SpdMatrix>,
    f: Nonlinearity,
    h: Perturbation,
    lambda: f64,
    lipschitz: LipschitzDecision,
}

impl ProblemInstance {
    pub fn new(matrix: Arc<SpdMatrix>, f: Nonlinearity, h: Perturbation, lambda: f64) -> Result<Self> {
        let n = matrix.order();
        if f.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: f.len() });
        }
        if h.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: h.len() });
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::OutOfRange(format!("lambda must be positive and finite, got {lambda}")));
        }
        let lambda1 = matrix.check_positive_definite()?;
        let lipschitz = check_lipschitz_condition(h.max_lipschitz(), lambda1);
        Ok(Self { matrix, f, h, lambda, lipschitz })
    }

    /// Same system at a different λ.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.matrix.clone(), self.f.clone(), self.h.clone(), lambda)
    }

    pub fn order(&self) -> usize {
        self.matrix.order()
    }

    pub fn matrix(&self) -> &SpdMatrix {
        &self.matrix
    }

    pub fn shared_matrix(&self) -> Arc<SpdMatrix> {
        self.matrix.clone()
    }

    pub fn f(&self) -> &Nonlinearity {
        &self.f
    }

    pub fn h(&self) -> &Perturbation {
        &self.h
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn lipschitz(&self) -> LipschitzDecision {
        self.lipschitz
    }
}

#[derive(Debug, Default)]
struct Counters {
    phi: AtomicU64,
    psi: AtomicU64,
    gradient: AtomicU64,
    hessian: AtomicU64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EvaluationCounts {
    pub phi: u64,
    pub psi: u64,
    pub gradient: u64,
    pub hessian: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoercivityReport {
    pub phi: f64,
    /// ((λ₁ − L)/2)‖u‖²
    pub lower: f64,
    /// uᵗAu/2 + (L/2)‖u‖²
    pub upper: f64,
    pub lower_holds: bool,
    pub upper_holds: bool,
}

impl CoercivityReport {
    pub fn holds(&self) -> bool {
        self.lower_holds && self.upper_holds
    }
}

/// Energy evaluation over a shared problem. Counters are diagnostics only.
#[derive(Debug)]
pub struct EnergyFunctional {
    problem: Arc<ProblemInstance>,
    counters: Counters,
}

impl EnergyFunctional {
    pub fn new(problem: Arc<ProblemInstance>) -> Self {
        Self { problem, counters: Counters::default() }
    }

    pub fn problem(&self) -> &ProblemInstance {
        &self.problem
    }

    pub fn order(&self) -> usize {
        self.problem.order()
    }

    pub fn counts(&self) -> EvaluationCounts {
        let c = &self.counters;
        EvaluationCounts {
            phi: c.phi.load(Ordering::Relaxed),
            psi: c.psi.load(Ordering::Relaxed),
            gradient: c.gradient.load(Ordering::Relaxed),
            hessian: c.hessian.load(Ordering::Relaxed),
        }
    }

    fn check(&self, u: &[f64]) -> Result<()> {
        let n = self.order();
        if u.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: u.len() });
        }
        Ok(())
    }

    pub fn phi(&self, u: &[f64]) -> Result<f64> {
        self.check(u)?;
        self.counters.phi.fetch_add(1, Ordering::Relaxed);
        let q = self.problem.matrix.quadratic_form(u)?;
        Ok(0.5 * q - self.problem.h.primitive_sum(u)?)
    }

    pub fn psi(&self, u: &[f64]) -> Result<f64> {
        self.check(u)?;
        self.counters.psi.fetch_add(1, Ordering::Relaxed);
        self.problem.f.primitive_sum(u)
    }

    pub fn j_lambda(&self, u: &[f64]) -> Result<f64> {
        Ok(self.phi(u)? - self.problem.lambda * self.psi(u)?)
    }

    /// Au − h(u).
    pub fn phi_gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check(u)?;
        let mut g = self.problem.matrix.apply(u)?;
        for (gk, hk) in g.iter_mut().zip(self.problem.h.eval(u)) {
            *gk -= hk;
        }
        Ok(g)
    }

    /// Au − λf(u) − h(u); zeros are exactly the solutions of the system.
    pub fn gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.counters.gradient.fetch_add(1, Ordering::Relaxed);
        let mut g = self.phi_gradient(u)?;
        let lambda = self.problem.lambda;
        for (gk, fk) in g.iter_mut().zip(self.problem.f.eval(u)) {
            *gk -= lambda * fk;
        }
        Ok(g)
    }

    /// ‖Au − λf(u) − h(u)‖.
    pub fn residual(&self, u: &[f64]) -> Result<f64> {
        Ok(euclidean_norm(&self.gradient(u)?))
    }

    /// A − diag(h′(u)), row-major.
    pub fn phi_hessian(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check(u)?;
        let n = self.order();
        let mut m = self.problem.matrix.entries().to_vec();
        for (k, d) in self.problem.h.derivatives(u).into_iter().enumerate() {
            m[k * n + k] -= d;
        }
        Ok(m)
    }

    /// A − λ·diag(f′(u)) − diag(h′(u)), row-major.
    pub fn hessian(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.counters.hessian.fetch_add(1, Ordering::Relaxed);
        let n = self.order();
        let mut m = self.phi_hessian(u)?;
        let lambda = self.problem.lambda;
        for (k, d) in self.problem.f.derivatives(u).into_iter().enumerate() {
            m[k * n + k] -= lambda * d;
        }
        Ok(m)
    }

    /// Checks ((λ₁−L)/2)‖u‖² − tol ≤ Φ(u) ≤ uᵗAu/2 + (L/2)‖u‖² + tol.
    pub fn coercivity_certificate(&self, u: &[f64], tol: f64) -> Result<CoercivityReport> {
        let d = self.problem.lipschitz;
        if !d.passed {
            return Err(Error::OutOfRange(format!(
                "coercivity needs L < lambda_1, got L = {} and lambda_1 = {}",
                d.lipschitz, d.lambda1
            )));
        }
        let phi = self.phi(u)?;
        let norm2: f64 = u.iter().map(|x| x * x).sum();
        let lower = d.coercivity * norm2;
        let upper = 0.5 * self.problem.matrix.quadratic_form(u)? + 0.5 * d.lipschitz * norm2;
        Ok(CoercivityReport { phi, lower, upper, lower_holds: phi >= lower - tol, upper_holds: phi <= upper + tol })
    }

    /// Σₖ max_{|t|≤c} Fₖ(t) / r with c = √(2r/(λ₁−L)). Bounds φ(r) from
    /// above; it is not the infimum itself.
    pub fn varphi_upper_bound(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::OutOfRange(format!("level r must be positive, got {r}")));
        }
        let gap = 2.0 * self.problem.lipschitz.coercivity;
        if !(gap > 0.0) {
            return Err(Error::OutOfRange("bound needs L < lambda_1".into()));
        }
        let c = (2.0 * r / gap).sqrt();
        Ok(self.problem.f.boxed_max_sum(c)? / r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::assemble_second_difference;
    use crate::nonlinearity::{ComponentFunction, Polynomial, Sine};

    fn linear(n: usize) -> Nonlinearity {
        Nonlinearity::broadcast(ComponentFunction::new(Polynomial::new(vec![0.0, 1.0])), n).unwrap()
    }

    fn energy(a: SpdMatrix, f: Nonlinearity, h: Perturbation, lambda: f64) -> EnergyFunctional {
        EnergyFunctional::new(Arc::new(ProblemInstance::new(Arc::new(a), f, h, lambda).unwrap()))
    }

    #[test]
    fn phi_and_j_examples() {
        let e = energy(assemble_second_difference(2).unwrap(), linear(2), Perturbation::zero(2).unwrap(), 1.0);
        assert_eq!(e.phi(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(e.phi(&[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(e.j_lambda(&[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(e.j_lambda(&[0.0, 0.0]).unwrap(), 0.0);

        let half = Perturbation::broadcast(ComponentFunction::new(Polynomial::new(vec![0.0, 0.5])), 0.5, 2).unwrap();
        let e = energy(assemble_second_difference(2).unwrap(), linear(2), half, 1.0);
        assert_eq!(e.phi(&[1.0, 1.0]).unwrap(), 0.5);
    }

    #[test]
    fn linear_gradient_is_shifted_operator() {
        let a = assemble_second_difference(3).unwrap();
        let e = energy(a.clone(), linear(3), Perturbation::zero(3).unwrap(), 1.0);
        let u = [0.3, -1.2, 2.0];
        let g = e.gradient(&u).unwrap();
        let au = a.apply(&u).unwrap();
        for k in 0..3 {
            assert!((g[k] - (au[k] - u[k])).abs() < 1e-15);
        }
        assert_eq!(e.gradient(&[0.0; 3]).unwrap(), vec![0.0; 3]);
        assert!(matches!(e.gradient(&[0.0; 2]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn hessian_diagonal_shift() {
        let a = assemble_second_difference(2).unwrap();
        let cubic = Nonlinearity::broadcast(ComponentFunction::new(Polynomial::monomial(3, 1.0)), 2).unwrap();
        let e = energy(a, cubic, Perturbation::zero(2).unwrap(), 2.0);
        let h = e.hessian(&[1.0, 0.0]).unwrap();
        assert_eq!(h, vec![2.0 - 6.0, -1.0, -1.0, 2.0]);
    }

    #[test]
    fn coercivity_reduces_to_rayleigh_bounds() {
        let a = assemble_second_difference(4).unwrap();
        let e = energy(a.clone(), linear(4), Perturbation::zero(4).unwrap(), 1.0);
        let u = [1.0, -2.0, 0.5, 3.0];
        let rep = e.coercivity_certificate(&u, 1e-12).unwrap();
        let norm2: f64 = u.iter().map(|x| x * x).sum();
        assert!((rep.lower - 0.5 * a.lambda_min().unwrap() * norm2).abs() < 1e-12);
        assert!(rep.holds());
        let zero = e.coercivity_certificate(&[0.0; 4], 0.0).unwrap();
        assert_eq!((zero.phi, zero.lower, zero.upper), (0.0, 0.0, 0.0));
    }

    #[test]
    fn coercivity_refused_when_lipschitz_too_large() {
        let a = assemble_second_difference(2).unwrap();
        let h = Perturbation::broadcast(
            ComponentFunction::new(Sine { amplitude: 2.0, frequency: 1.0, phase: 0.0 }),
            2.0,
            2,
        )
        .unwrap();
        let e = energy(a, linear(2), h, 1.0);
        assert!(!e.problem().lipschitz().passed);
        assert!(e.coercivity_certificate(&[1.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn varphi_examples() {
        let a = SpdMatrix::from_rows(&[vec![2.0]]).unwrap();
        let e = energy(a.clone(), linear(1), Perturbation::zero(1).unwrap(), 1.0);
        assert!((e.varphi_upper_bound(1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(e.varphi_upper_bound(0.0).is_err());
        let z = Nonlinearity::broadcast(ComponentFunction::zero(), 1).unwrap();
        let e = energy(a, z, Perturbation::zero(1).unwrap(), 1.0);
        for r in [1e-3, 1.0, 1e6] {
            assert_eq!(e.varphi_upper_bound(r).unwrap(), 0.0);
        }
    }

    #[test]
    fn counters_advance() {
        let e = energy(assemble_second_difference(2).unwrap(), linear(2), Perturbation::zero(2).unwrap(), 1.0);
        e.j_lambda(&[1.0, 0.0]).unwrap();
        e.gradient(&[1.0, 0.0]).unwrap();
        let c = e.counts();
        assert_eq!((c.phi, c.psi, c.gradient, c.hessian), (1, 1, 1, 0));
    }

    #[test]
    fn rejects_bad_instances() {
        let a = Arc::new(assemble_second_difference(3).unwrap());
        assert!(ProblemInstance::new(a.clone(), linear(2), Perturbation::zero(3).unwrap(), 1.0).is_err());
        assert!(ProblemInstance::new(a.clone(), linear(3), Perturbation::zero(2).unwrap(), 1.0).is_err());
        assert!(ProblemInstance::new(a, linear(3), Perturbation::zero(3).unwrap(), 0.0).is_err());
    }
}
