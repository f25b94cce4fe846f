use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::config::{MatrixSpec, RunConfig};
use super::AppError;
use crate::asymptotics::{
    interval_constant, lambda_interval, oscillation_condition, AsymptoticProfile, LambdaInterval, OscillationDecision,
};
use crate::matrix::StructuralTag;
use crate::nonlinearity::{check_lipschitz_condition, estimate_lipschitz, LipschitzDecision, Regime};

/// Box and sample count of the empirical Lipschitz check on h.
const LIPSCHITZ_BOX: f64 = 10.0;
const LIPSCHITZ_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzSampling {
    pub radius: f64,
    pub samples: usize,
    /// Largest sampled difference quotient over all components.
    pub estimate: f64,
    /// The sample contradicts the declared L.
    pub refuted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaVerdict {
    pub lambda: f64,
    pub inside: Option<bool>,
}

/// Everything `analyze` reports. Deterministic for a given config.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analysis {
    pub seed: u64,
    pub matrix: String,
    pub order: usize,
    pub spectrum: Vec<f64>,
    pub lambda1: f64,
    /// Closed-form smallest eigenvalue for second-difference and grid matrices.
    pub lambda1_closed_form: Option<f64>,
    pub lipschitz: LipschitzDecision,
    pub sampling: LipschitzSampling,
    /// T = 1ᵗA1 + nL.
    pub constant_t: f64,
    /// (2 + L)(m + n), printed next to T for grids.
    pub grid_variant_t: Option<f64>,
    pub regime: Regime,
    pub profile: Option<AsymptoticProfile>,
    pub oscillation: Option<OscillationDecision>,
    pub interval: Option<LambdaInterval>,
    pub lambdas: Vec<LambdaVerdict>,
}

fn closed_form(tag: StructuralTag, order: usize) -> Option<f64> {
    let s = |k: usize| {
        let x = (std::f64::consts::PI / (2.0 * (k as f64 + 1.0))).sin();
        4.0 * x * x
    };
    match tag {
        StructuralTag::General => None,
        StructuralTag::SecondDifference => Some(s(order)),
        StructuralTag::GridLaplacian { m, n } => Some(s(m) + s(n)),
    }
}

pub fn analyze(cfg: &RunConfig, base: &Path) -> Result<Analysis, AppError> {
    let matrix = cfg.build_matrix(base)?;
    let order = matrix.order();
    let spectrum = matrix.spectrum()?.to_vec();
    let lambda1 = spectrum[0];
    let f = cfg.build_nonlinearity(order, base)?;
    let h = cfg.build_perturbation(order, base)?;
    let l = h.max_lipschitz();
    let lipschitz = check_lipschitz_condition(l, lambda1);
    let est = estimate_lipschitz(&h, LIPSCHITZ_BOX, LIPSCHITZ_SAMPLES, cfg.solver.seed)?;
    let sampling = LipschitzSampling {
        radius: LIPSCHITZ_BOX,
        samples: LIPSCHITZ_SAMPLES,
        estimate: est.estimates.iter().copied().fold(0.0, f64::max),
        refuted: est.any_falsified(),
    };
    let constant_t = interval_constant(&matrix, l);
    let grid_variant_t = match cfg.matrix {
        MatrixSpec::Grid { m, n } => Some((2.0 + l) * (m + n) as f64),
        _ => None,
    };
    let regime = cfg.regime();
    let profile = cfg.build_profile(&f)?;
    let (oscillation, interval) = match &profile {
        Some(p) => (Some(oscillation_condition(p, &matrix, l, regime)?), Some(lambda_interval(p, &matrix, l, regime)?)),
        None => (None, None),
    };
    let lambdas = cfg
        .lambda
        .values()
        .into_iter()
        .map(|lambda| LambdaVerdict { lambda, inside: interval.map(|i| i.contains(lambda)) })
        .collect();
    Ok(Analysis {
        seed: cfg.solver.seed,
        matrix: cfg.describe_matrix(),
        order,
        lambda1_closed_form: closed_form(matrix.tag(), order),
        spectrum,
        lambda1,
        lipschitz,
        sampling,
        constant_t,
        grid_variant_t,
        regime,
        profile,
        oscillation,
        interval,
        lambdas,
    })
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x > 0.0 {
        "+inf".into()
    } else if x < 0.0 {
        "-inf".into()
    } else {
        "nan".into()
    }
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Infinity => "infinity",
        Regime::Zero => "zero",
    }
}

impl Analysis {
    /// Failed hypotheses, in the order they are checked. The profile-based
    /// ones are included only when `with_profile` is set.
    pub fn failures(&self, with_profile: bool) -> Vec<String> {
        let mut out = Vec::new();
        if !self.lipschitz.passed {
            out.push(format!(
                "L < lambda_1 fails: L = {} >= lambda_1 = {}",
                num(self.lipschitz.lipschitz),
                num(self.lambda1)
            ));
        }
        if self.sampling.refuted {
            out.push(format!(
                "declared L = {} is refuted by sampling on [-{}, {}] (estimate {})",
                num(self.lipschitz.lipschitz),
                self.sampling.radius,
                self.sampling.radius,
                num(self.sampling.estimate)
            ));
        }
        if !with_profile {
            return out;
        }
        match (&self.oscillation, &self.interval) {
            (Some(osc), Some(interval)) => {
                if !osc.passed {
                    out.push(format!(
                        "oscillation condition fails ({}): A = {} is not < {}",
                        regime_name(self.regime),
                        num(osc.a),
                        num(osc.rhs)
                    ));
                }
                for v in &self.lambdas {
                    if !interval.contains(v.lambda) {
                        out.push(format!(
                            "lambda = {} is outside ]{}, {}[",
                            num(v.lambda),
                            num(interval.lower),
                            num(interval.upper)
                        ));
                    }
                }
            }
            _ => out.push("no asymptotic profile: give \"profile\" or use a spike_train nonlinearity".into()),
        }
        out
    }

    /// Plain-text report; numbers carry 17 significant digits.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "seed: {}", self.seed);
        let _ = writeln!(s, "matrix: {} (order {})", self.matrix, self.order);
        let _ = writeln!(s, "spectrum:");
        for v in &self.spectrum {
            let _ = writeln!(s, "  {}", num(*v));
        }
        let _ = writeln!(s, "lambda_1: {}", num(self.lambda1));
        if let Some(c) = self.lambda1_closed_form {
            let _ = writeln!(s, "lambda_1 closed form: {} (difference {})", num(c), num(self.lambda1 - c));
        }
        let _ = writeln!(s, "L: {}", num(self.lipschitz.lipschitz));
        let _ = writeln!(s, "L < lambda_1: {}", if self.lipschitz.passed { "pass" } else { "FAIL" });
        if self.lipschitz.passed {
            let _ = writeln!(s, "coercivity: Phi(u) >= {} |u|^2", num(self.lipschitz.coercivity));
        } else {
            let _ = writeln!(s, "coercivity: not established");
        }
        let _ = writeln!(
            s,
            "sampled Lipschitz constant of h on [-{r}, {r}] ({} samples): {} ({})",
            self.sampling.samples,
            num(self.sampling.estimate),
            if self.sampling.refuted { "declared L REFUTED" } else { "consistent with declared L" },
            r = self.sampling.radius
        );
        let _ = writeln!(s, "T = 1'A1 + nL: {}", num(self.constant_t));
        if let Some(v) = self.grid_variant_t {
            let _ = writeln!(s, "T variant (2 + L)(m + n): {} (not used)", num(v));
        }
        let _ = writeln!(s, "regime: {}", regime_name(self.regime));
        match (&self.profile, &self.oscillation, &self.interval) {
            (Some(p), Some(osc), Some(interval)) => {
                let (a, b) = match self.regime {
                    Regime::Infinity => (p.a_inf, p.b_sup),
                    Regime::Zero => (p.a_zero, p.b_zero),
                };
                let label = |c: Option<crate::asymptotics::Coefficient>| match c {
                    Some(c) => format!(
                        "{} ({})",
                        num(c.value),
                        match c.provenance {
                            crate::asymptotics::Provenance::Analytic => "analytic",
                            crate::asymptotics::Provenance::Empirical => "estimate, not certificate",
                        }
                    ),
                    None => "unset".into(),
                };
                let _ = writeln!(s, "A: {}", label(a));
                let _ = writeln!(s, "B: {}", label(b));
                let _ = writeln!(
                    s,
                    "oscillation condition A < ((lambda_1 - L)/T) B: {} < {}: {}",
                    num(osc.a),
                    num(osc.rhs),
                    if osc.passed { "pass" } else { "FAIL" }
                );
                let _ = writeln!(
                    s,
                    "lambda interval: ]{}, {}[{}",
                    num(interval.lower),
                    num(interval.upper),
                    if interval.empty { " (empty)" } else { "" }
                );
                if !p.witness_peaks.is_empty() {
                    let _ = writeln!(s, "witness peaks: {}", join(&p.witness_peaks));
                    let _ = writeln!(s, "witness plateau ends: {}", join(&p.witness_plateau_ends));
                }
            }
            _ => {
                let _ = writeln!(s, "profile: none (oscillation condition and lambda interval not evaluated)");
            }
        }
        for v in &self.lambdas {
            let where_ = match v.inside {
                Some(true) => "inside interval",
                Some(false) => "OUTSIDE interval",
                None => "no interval",
            };
            let _ = writeln!(s, "lambda {}: {}", num(v.lambda), where_);
        }
        s
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(" ")
}
