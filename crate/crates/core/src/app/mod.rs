//! Batch runs driven by a JSON [`RunConfig`]: hypothesis analysis, multistart
//! solves, cascades, and the grid problem with grid-shaped export.

mod config;
mod export;
mod grid;
mod report;

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub use config::{
    load_config, Extended, FunctionSpec, GeometricSpec, LambdaSpec, MatrixSpec, NodeSpec, NonlinearitySpec, OutputSpec,
    PerturbationSpec, ProfileSpec, RunConfig, DEFAULT_STAGES,
};
pub use export::{emit_plot_data, write_grid_csv, write_solutions_csv, Watermark};
pub use grid::{check_grid, framed, grid_form_residual, GridCheck};
pub use report::{analyze, Analysis, LambdaVerdict, LipschitzSampling};

use crate::energy::{EnergyFunctional, ProblemInstance};
use crate::error::Error;
use crate::nonlinearity::Regime;
use crate::solver::{cascade, multistart_solve, unboundedness_witness, ScheduleRecipe, SolveConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Analyze,
    Solve,
    Cascade,
    Grid,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Analyze => "analyze",
            Mode::Solve => "solve",
            Mode::Cascade => "cascade",
            Mode::Grid => "grid",
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub override_hypotheses: bool,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AppError {
    /// Bad or inconsistent configuration, including I/O on inputs and outputs.
    Config(String),
    /// A hypothesis failed and no override was given.
    Hypothesis(Vec<String>),
    /// The numerics failed: eigensolver, quadrature, or no converged solution.
    Numerical(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Hypothesis(_) => 2,
            AppError::Config(_) => 3,
            AppError::Numerical(_) => 4,
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Config(m) => write!(f, "configuration error: {m}"),
            AppError::Hypothesis(list) => {
                write!(f, "hypotheses not satisfied (rerun with --override-hypotheses to proceed without guarantee):")?;
                for item in list {
                    write!(f, "\n  - {item}")?;
                }
                Ok(())
            }
            AppError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for AppError {}

impl From<Error> for AppError {
    fn from(e: Error) -> Self {
        match e {
            Error::EigenNonConvergence { .. } | Error::Quadrature { .. } => AppError::Numerical(e.to_string()),
            Error::Config(msg) => AppError::Config(msg),
            other => AppError::Config(other.to_string()),
        }
    }
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    /// Text printed to stdout.
    pub text: String,
    pub files: Vec<PathBuf>,
    pub watermark: Option<Watermark>,
}

/// Loads `config_path` and runs `mode`.
pub fn run_file(mode: Mode, config_path: &Path, opts: &RunOptions) -> Result<RunSummary, AppError> {
    let (cfg, base) = load_config(config_path)?;
    run(mode, &cfg, &base, opts)
}

pub fn run(mode: Mode, cfg: &RunConfig, base: &Path, opts: &RunOptions) -> Result<RunSummary, AppError> {
    let mut cfg = cfg.clone();
    if let Some(seed) = opts.seed {
        cfg.solver.seed = seed;
    }
    let out_dir = opts.out.clone().unwrap_or_else(|| base.join(&cfg.output.dir));
    std::fs::create_dir_all(&out_dir).map_err(|e| AppError::Config(format!("{}: {e}", out_dir.display())))?;

    let analysis = analyze(&cfg, base)?;
    if mode == Mode::Analyze {
        let text = analysis.render();
        let path = out_dir.join("analysis.txt");
        export::write_text(&path, &text)?;
        let json = out_dir.join("analysis.json");
        export::write_json(&json, &analysis, None)?;
        return Ok(RunSummary { text, files: vec![path, json], watermark: None });
    }
    if mode == Mode::Grid && cfg.grid_map().is_none() {
        return Err(AppError::Config("the grid subcommand needs a \"grid\" matrix".into()));
    }

    let needs_profile = match mode {
        Mode::Cascade => true,
        Mode::Grid => analysis.profile.is_some(),
        _ => false,
    };
    let failures = analysis.failures(needs_profile);
    let watermark = match (failures.is_empty(), opts.override_hypotheses) {
        (true, _) => None,
        (false, true) => Some(Watermark::new(&failures)),
        (false, false) => return Err(AppError::Hypothesis(failures)),
    };

    let matrix = Arc::new(cfg.build_matrix(base)?);
    let n = matrix.order();
    let f = cfg.build_nonlinearity(n, base)?;
    let h = cfg.build_perturbation(n, base)?;
    let regime = cfg.regime();
    let profile = cfg.build_profile(&f)?;
    let plateau_ends = profile.as_ref().map(|p| p.witness_plateau_ends.clone()).filter(|e| !e.is_empty());
    let peaks = profile.as_ref().map(|p| p.witness_peaks.clone()).filter(|e| !e.is_empty());

    let mut solver_cfg = cfg.solver.clone();
    if solver_cfg.schedule == ScheduleRecipe::default() && plateau_ends.is_some() {
        solver_cfg.schedule = ScheduleRecipe::Witness;
    }

    let lambdas = cfg.lambda.values();
    let mut text = String::new();
    let mut files = Vec::new();
    if let Some(w) = &watermark {
        text.push_str(&format!("{}\n", w.line()));
    }
    for (idx, &lambda) in lambdas.iter().enumerate() {
        let dir = if lambdas.len() == 1 { out_dir.clone() } else { out_dir.join(format!("lambda_{}", idx + 1)) };
        std::fs::create_dir_all(&dir).map_err(|e| AppError::Config(format!("{}: {e}", dir.display())))?;
        let problem = Arc::new(ProblemInstance::new(matrix.clone(), f.clone(), h.clone(), lambda)?);
        let energy = EnergyFunctional::new(problem);
        text.push_str(&format!("lambda = {lambda:.16e} (seed {})\n", solver_cfg.seed));
        let use_cascade = matches!(mode, Mode::Cascade) || (mode == Mode::Grid && profile.is_some());
        let records = if use_cascade {
            run_cascade(
                &energy,
                &solver_cfg,
                regime,
                plateau_ends.as_deref(),
                peaks.as_deref(),
                &dir,
                &watermark,
                &mut text,
                &mut files,
            )?
        } else {
            run_multistart(&energy, &solver_cfg, &dir, &watermark, &mut text, &mut files)?
        };
        if mode == Mode::Grid {
            let map = cfg.grid_map().expect("checked above");
            grid::export_grid_solutions(&energy, map, &records, &dir, &watermark, &mut text, &mut files)?;
        }
    }
    Ok(RunSummary { text, files, watermark })
}

fn run_multistart(
    energy: &EnergyFunctional,
    cfg: &SolveConfig,
    dir: &Path,
    watermark: &Option<Watermark>,
    text: &mut String,
    files: &mut Vec<PathBuf>,
) -> Result<Vec<crate::solver::SolutionRecord>, AppError> {
    let rep = multistart_solve(energy, cfg)?;
    text.push_str(&format!(
        "multistart: {} starts, {} distinct solutions, {} did not converge\n",
        rep.starts,
        rep.records.len(),
        rep.failures.len()
    ));
    let path = dir.join("solutions.csv");
    write_solutions_csv(&path, &rep.records, watermark.as_ref())?;
    files.push(path);
    let path = dir.join("solutions.json");
    export::write_json(&path, &rep.records, watermark.as_ref())?;
    files.push(path);
    if !rep.failures.is_empty() {
        let path = dir.join("nonconvergence.json");
        export::write_json(&path, &rep.failures, watermark.as_ref())?;
        files.push(path);
    }
    if rep.records.is_empty() {
        return Err(AppError::Numerical(format!("no start converged (first failure: {})", rep.failures[0].1.reason)));
    }
    Ok(rep.records)
}

#[allow(clippy::too_many_arguments)]
fn run_cascade(
    energy: &EnergyFunctional,
    cfg: &SolveConfig,
    regime: Regime,
    plateau_ends: Option<&[f64]>,
    peaks: Option<&[f64]>,
    dir: &Path,
    watermark: &Option<Watermark>,
    text: &mut String,
    files: &mut Vec<PathBuf>,
) -> Result<Vec<crate::solver::SolutionRecord>, AppError> {
    let rep = cascade(energy, cfg, regime, plateau_ends)?;
    text.push_str(&format!("cascade ({regime:?}): {}\n", rep.summary));
    for step in &rep.steps {
        let detail = step
            .best
            .as_ref()
            .map(|b| format!(" phi={:.6e} norm_inf={:.6e} residual={:.3e}", b.phi, b.norm_inf, b.residual))
            .unwrap_or_default();
        text.push_str(&format!("  level {} r={:.6e} {:?}{detail}\n", step.level, step.r, step.status));
    }
    let mono = match regime {
        Regime::Infinity => "phi strictly increasing",
        Regime::Zero => "norm_inf strictly decreasing",
    };
    text.push_str(&format!("  {mono}: {}\n", if rep.monotone { "yes" } else { "NO" }));

    let path = dir.join("solutions.csv");
    write_solutions_csv(&path, &rep.records, watermark.as_ref())?;
    files.push(path);
    let path = dir.join("cascade.json");
    export::write_json(&path, &rep, watermark.as_ref())?;
    files.push(path);
    files.extend(emit_plot_data(&rep.records, dir, watermark.as_ref())?);

    if regime == Regime::Infinity {
        if let Some(peaks) = peaks {
            let w = unboundedness_witness(energy, peaks)?;
            text.push_str(&format!(
                "  witness J(b_m*1): inequality {}, decreasing {}, negative from m = {}\n",
                if w.inequality_holds { "holds" } else { "FAILS" },
                if w.decreasing { "yes" } else { "no" },
                w.negative_from.map(|m| m.to_string()).unwrap_or_else(|| "-".into())
            ));
            let path = dir.join("witness.json");
            export::write_json(&path, &w, watermark.as_ref())?;
            files.push(path);
        }
    }
    Ok(rep.records)
}
