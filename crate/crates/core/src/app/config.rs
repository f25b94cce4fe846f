//! JSON run configuration.
//!
//! ```json
//! {
//!   "matrix": { "kind": "second_difference", "n": 4 },
//!   "nonlinearity": { "function": { "kind": "spike_train", "regime": "infinity" } },
//!   "perturbation": { "function": { "kind": "sine", "amplitude": 0.1 }, "lipschitz": 0.1 },
//!   "lambda": 1.0,
//!   "solver": { "schedule": { "kind": "witness" } },
//!   "output": { "dir": "out" }
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use crate::asymptotics::{geometric_sequence, AsymptoticProfile};
use crate::error::{Error, Result};
use crate::matrix::{assemble_grid_laplacian, assemble_second_difference, parse_dense_text, GridIndexMap, SpdMatrix};
use crate::nonlinearity::{
    ComponentFunction, Cosine, Nonlinearity, Perturbation, PiecewiseLinear, Polynomial, Regime, Sine, SpikeTrain,
    SpikeTrainParams,
};
use crate::solver::SolveConfig;

/// Number of spike-train stages used for default witnesses and schedules.
pub const DEFAULT_STAGES: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MatrixSpec {
    SecondDifference {
        n: usize,
    },
    Grid {
        m: usize,
        n: usize,
    },
    Entries {
        rows: Vec<Vec<f64>>,
    },
    /// Whitespace-separated rows; relative paths resolve against the config.
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Zero,
    Polynomial {
        coefficients: Vec<f64>,
    },
    Sine {
        amplitude: f64,
        #[serde(default = "one")]
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    Cosine {
        amplitude: f64,
        #[serde(default = "one")]
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    PiecewiseLinear {
        points: Vec<(f64, f64)>,
    },
    /// Two columns `t y` per line, interpolated linearly.
    Table {
        path: PathBuf,
    },
    SpikeTrain {
        regime: Regime,
        first_peak: Option<f64>,
        width: Option<f64>,
        gain_offset: Option<f64>,
        stretch: Option<f64>,
    },
}

fn one() -> f64 {
    1.0
}

impl FunctionSpec {
    pub fn spike_params(&self) -> Option<SpikeTrainParams> {
        match self {
            FunctionSpec::SpikeTrain { regime, first_peak, width, gain_offset, stretch } => {
                let base = match regime {
                    Regime::Infinity => SpikeTrainParams::infinity(),
                    Regime::Zero => SpikeTrainParams::zero(),
                };
                Some(SpikeTrainParams {
                    regime: *regime,
                    first_peak: first_peak.unwrap_or(base.first_peak),
                    width: width.unwrap_or(base.width),
                    gain_offset: gain_offset.unwrap_or(base.gain_offset),
                    stretch: stretch.unwrap_or(base.stretch),
                })
            }
            _ => None,
        }
    }

    pub fn build(&self, base_dir: &Path) -> Result<ComponentFunction> {
        Ok(match self {
            FunctionSpec::Zero => ComponentFunction::zero(),
            FunctionSpec::Polynomial { coefficients } => ComponentFunction::new(Polynomial::new(coefficients.clone())),
            FunctionSpec::Sine { amplitude, frequency, phase } => {
                ComponentFunction::new(Sine { amplitude: *amplitude, frequency: *frequency, phase: *phase })
            }
            FunctionSpec::Cosine { amplitude, frequency, phase } => {
                ComponentFunction::new(Cosine { amplitude: *amplitude, frequency: *frequency, phase: *phase })
            }
            FunctionSpec::PiecewiseLinear { points } => ComponentFunction::new(PiecewiseLinear::new(points)?),
            FunctionSpec::Table { path } => {
                let path = base_dir.join(path);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::Config(format!("table {}: {e}", path.display())))?;
                ComponentFunction::new(PiecewiseLinear::new(&parse_table(&text)?)?)
            }
            FunctionSpec::SpikeTrain { .. } => ComponentFunction::new(SpikeTrain::new(self.spike_params().unwrap())?),
        })
    }
}

fn parse_table(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|_| Error::Config(format!("table line {}: cannot parse '{s}'", lineno + 1)))
        };
        match cols.as_slice() {
            [t, y] => out.push((parse(t)?, parse(y)?)),
            _ => return Err(Error::Config(format!("table line {}: expected two columns", lineno + 1))),
        }
    }
    Ok(out)
}

/// Per-node override on a grid, 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub i: usize,
    pub j: usize,
    pub function: FunctionSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearitySpec {
    /// Shared fₖ, used where no component or node override applies.
    pub function: Option<FunctionSpec>,
    /// One function per component, in index order.
    #[serde(default)]
    pub components: Vec<FunctionSpec>,
    #[serde(default)]
    pub nodes: Vec<NodeSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub function: FunctionSpec,
    /// Declared Lipschitz constant of the shared hₖ.
    pub lipschitz: f64,
}

/// Extended real: a number, or "inf", "+inf", "-inf", "zero".
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extended(pub f64);

impl<'de> Deserialize<'de> for Extended {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Extended(v)),
            Raw::Text(s) => match s.trim().to_ascii_lowercase().as_str() {
                "inf" | "+inf" | "infinity" | "+infinity" => Ok(Extended(f64::INFINITY)),
                "-inf" | "-infinity" => Ok(Extended(f64::NEG_INFINITY)),
                "zero" | "0" => Ok(Extended(0.0)),
                other => {
                    Err(serde::de::Error::custom(format!("expected a number, \"inf\" or \"zero\", got \"{other}\"")))
                }
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricSpec {
    pub start: f64,
    pub ratio: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub regime: Regime,
    /// Analytic A and B; both must be given together.
    pub a: Option<Extended>,
    pub b: Option<Extended>,
    /// Tail estimate along a geometric sequence instead of analytic values.
    pub empirical: Option<GeometricSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    One(f64),
    Many(Vec<f64>),
}

impl LambdaSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            LambdaSpec::One(v) => vec![*v],
            LambdaSpec::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: PathBuf::from("varcrit-out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub matrix: MatrixSpec,
    pub nonlinearity: NonlinearitySpec,
    pub perturbation: Option<PerturbationSpec>,
    pub lambda: LambdaSpec,
    pub profile: Option<ProfileSpec>,
    /// Spike-train stages used for witnesses and the default schedule.
    #[serde(default = "default_stages")]
    pub stages: usize,
    #[serde(default)]
    pub solver: SolveConfig,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_stages() -> usize {
    DEFAULT_STAGES
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let lambdas = self.lambda.values();
        if lambdas.is_empty() {
            return Err(Error::Config("lambda: at least one value is required".into()));
        }
        if let Some(bad) = lambdas.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return Err(Error::Config(format!("lambda: values must be positive and finite, got {bad}")));
        }
        if let Some(p) = &self.perturbation {
            if !(p.lipschitz >= 0.0 && p.lipschitz.is_finite()) {
                return Err(Error::Config(format!(
                    "perturbation.lipschitz must be finite and >= 0, got {}",
                    p.lipschitz
                )));
            }
        }
        if let Some(p) = &self.profile {
            match (p.a, p.b, p.empirical) {
                (Some(_), Some(_), None) | (None, None, Some(_)) => {}
                _ => {
                    return Err(Error::Config(
                        "profile: give either both \"a\" and \"b\" or an \"empirical\" sequence".into(),
                    ))
                }
            }
        }
        let nl = &self.nonlinearity;
        if nl.function.is_none() && nl.components.is_empty() {
            return Err(Error::Config("nonlinearity: need \"function\" or \"components\"".into()));
        }
        if !nl.nodes.is_empty() && !matches!(self.matrix, MatrixSpec::Grid { .. }) {
            return Err(Error::Config("nonlinearity.nodes is only valid with a grid matrix".into()));
        }
        if self.stages == 0 {
            return Err(Error::Config("stages must be at least 1".into()));
        }
        self.solver.validate()
    }

    pub fn grid_map(&self) -> Option<GridIndexMap> {
        match self.matrix {
            MatrixSpec::Grid { m, n } => GridIndexMap::new(m, n).ok(),
            _ => None,
        }
    }

    pub fn describe_matrix(&self) -> String {
        match &self.matrix {
            MatrixSpec::SecondDifference { n } => format!("second_difference n={n}"),
            MatrixSpec::Grid { m, n } => format!("grid m={m} n={n}"),
            MatrixSpec::Entries { rows } => format!("entries order={}", rows.len()),
            MatrixSpec::File { path } => format!("file {}", path.display()),
        }
    }

    pub fn build_matrix(&self, base_dir: &Path) -> Result<SpdMatrix> {
        match &self.matrix {
            MatrixSpec::SecondDifference { n } => assemble_second_difference(*n),
            MatrixSpec::Grid { m, n } => Ok(assemble_grid_laplacian(*m, *n)?.0),
            MatrixSpec::Entries { rows } => SpdMatrix::from_rows(rows),
            MatrixSpec::File { path } => {
                let path = base_dir.join(path);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::Config(format!("matrix file {}: {e}", path.display())))?;
                parse_dense_text(&text)
            }
        }
    }

    pub fn build_nonlinearity(&self, order: usize, base_dir: &Path) -> Result<Nonlinearity> {
        let nl = &self.nonlinearity;
        let mut comps: Vec<Option<ComponentFunction>> = vec![None; order];
        if !nl.components.is_empty() {
            if nl.components.len() != order {
                return Err(Error::Config(format!(
                    "nonlinearity.components: expected {order} entries, got {}",
                    nl.components.len()
                )));
            }
            for (slot, spec) in comps.iter_mut().zip(&nl.components) {
                *slot = Some(spec.build(base_dir)?);
            }
        }
        if let Some(map) = self.grid_map() {
            for node in &nl.nodes {
                let k = map.forward(node.i, node.j).map_err(|e| Error::Config(format!("nonlinearity.nodes: {e}")))?;
                comps[k - 1] = Some(node.function.build(base_dir)?);
            }
        }
        let shared = nl.function.as_ref().map(|f| f.build(base_dir)).transpose()?;
        let comps = comps
            .into_iter()
            .enumerate()
            .map(|(k, c)| {
                c.or_else(|| shared.clone())
                    .ok_or_else(|| Error::Config(format!("nonlinearity: no function for component {}", k + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        Nonlinearity::new(comps)
    }

    pub fn build_perturbation(&self, order: usize, base_dir: &Path) -> Result<Perturbation> {
        match &self.perturbation {
            None => Perturbation::zero(order),
            Some(p) => Perturbation::broadcast(p.function.build(base_dir)?, p.lipschitz, order)
                .map_err(|e| Error::Config(format!("perturbation: {e}"))),
        }
    }

    /// The spike train shared by every component, if that is what f is.
    pub fn uniform_spike(&self) -> Option<SpikeTrainParams> {
        let nl = &self.nonlinearity;
        if !nl.components.is_empty() || !nl.nodes.is_empty() {
            return None;
        }
        nl.function.as_ref().and_then(|f| f.spike_params())
    }

    /// Regime from the profile, else from a spike-train f, else infinity.
    pub fn regime(&self) -> Regime {
        if let Some(p) = &self.profile {
            return p.regime;
        }
        self.uniform_spike().map(|p| p.regime).unwrap_or(Regime::Infinity)
    }

    /// The profile to test: explicit, empirical, or the analytic one of a
    /// spike-train f (A = 0, B = +∞ with its peaks and plateau ends).
    pub fn build_profile(&self, f: &Nonlinearity) -> Result<Option<AsymptoticProfile>> {
        let witnesses = match self.uniform_spike() {
            Some(params) => {
                let train = SpikeTrain::new(params)?;
                Some((train.peaks(self.stages), train.plateau_ends(self.stages)))
            }
            None => None,
        };
        let profile = match &self.profile {
            Some(ProfileSpec { regime, a: Some(a), b: Some(b), .. }) => {
                Some(AsymptoticProfile::analytic(*regime, a.0, b.0))
            }
            Some(ProfileSpec { regime, empirical: Some(g), .. }) => {
                let seq = geometric_sequence(g.start, g.ratio, g.count)?;
                Some(AsymptoticProfile::empirical(f, *regime, &seq)?)
            }
            Some(_) => None,
            None => witnesses.as_ref().map(|_| AsymptoticProfile::analytic(self.regime(), 0.0, f64::INFINITY)),
        };
        Ok(match (profile, witnesses) {
            (Some(p), Some((peaks, ends))) => Some(p.with_witnesses(peaks, ends)),
            (p, _) => p,
        })
    }
}

/// Reads and validates a config file.
pub fn load_config(path: &Path) -> Result<(RunConfig, PathBuf)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let cfg = RunConfig::from_json(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((cfg, base))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPIKE: &str = r#"{
        "matrix": {"kind": "second_difference", "n": 4},
        "nonlinearity": {"function": {"kind": "spike_train", "regime": "infinity"}},
        "perturbation": {"function": {"kind": "sine", "amplitude": 0.1}, "lipschitz": 0.1},
        "lambda": 1.0
    }"#;

    #[test]
    fn parses_spike_config_with_defaults() {
        let cfg = RunConfig::from_json(SPIKE).unwrap();
        assert_eq!(cfg.stages, DEFAULT_STAGES);
        assert_eq!(cfg.regime(), Regime::Infinity);
        let f = cfg.build_nonlinearity(4, Path::new(".")).unwrap();
        let p = cfg.build_profile(&f).unwrap().unwrap();
        assert_eq!(p.a_inf.unwrap().value, 0.0);
        assert_eq!(p.b_sup.unwrap().value, f64::INFINITY);
        assert_eq!(p.witness_peaks.len(), DEFAULT_STAGES);
    }

    #[test]
    fn extended_reals() {
        let p: ProfileSpec = serde_json::from_str(r#"{"regime":"zero","a":"zero","b":"inf"}"#).unwrap();
        assert_eq!((p.a.unwrap().0, p.b.unwrap().0), (0.0, f64::INFINITY));
        assert!(serde_json::from_str::<ProfileSpec>(r#"{"regime":"zero","a":"lots","b":1}"#).is_err());
    }

    #[test]
    fn errors_carry_position() {
        let err = RunConfig::from_json("{\n  \"matrix\": {\"kind\": \"nope\"}\n}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = RunConfig::from_json(&SPIKE.replace("1.0\n", "-1.0\n")).unwrap_err();
        assert!(err.to_string().contains("lambda"), "{err}");
    }

    #[test]
    fn grid_node_overrides() {
        let text = r#"{
            "matrix": {"kind": "grid", "m": 2, "n": 3},
            "nonlinearity": {"function": {"kind": "zero"},
                             "nodes": [{"i": 2, "j": 3, "function": {"kind": "polynomial", "coefficients": [0, 1]}}]},
            "lambda": 1
        }"#;
        let cfg = RunConfig::from_json(text).unwrap();
        let f = cfg.build_nonlinearity(6, Path::new(".")).unwrap();
        // k = i + m(j-1) = 2 + 2·2 = 6
        assert_eq!(f.component(5).value(3.0), 3.0);
        assert_eq!(f.component(0).value(3.0), 0.0);
        assert!(cfg.build_profile(&f).unwrap().is_none());
    }

    #[test]
    fn profile_needs_both_or_empirical() {
        let bad =
            SPIKE.replace("\"lambda\": 1.0", "\"lambda\": 1.0, \"profile\": {\"regime\": \"infinity\", \"a\": 0}");
        assert!(RunConfig::from_json(&bad).is_err());
    }

    #[test]
    fn table_parsing() {
        assert_eq!(parse_table("# t y\n0 0\n1, 2\n").unwrap(), vec![(0.0, 0.0), (1.0, 2.0)]);
        assert!(parse_table("1 2 3\n").is_err());
    }
}
