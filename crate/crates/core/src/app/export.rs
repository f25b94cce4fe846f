use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::AppError;
use crate::solver::SolutionRecord;

/// Marks outputs produced past a failed hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Watermark {
    pub failed: Vec<String>,
}

impl Watermark {
    pub fn new(failed: &[String]) -> Self {
        Self { failed: failed.to_vec() }
    }

    pub fn line(&self) -> String {
        format!("NO GUARANTEE: hypotheses overridden ({})", self.failed.join("; "))
    }
}

fn io(path: &Path, e: std::io::Error) -> AppError {
    AppError::Config(format!("{}: {e}", path.display()))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), AppError> {
    std::fs::write(path, text).map_err(|e| io(path, e))
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    watermark: Option<String>,
    data: &'a T,
}

/// Writes `{"watermark": ..., "data": ...}`.
pub(crate) fn write_json<T: Serialize>(path: &Path, data: &T, watermark: Option<&Watermark>) -> Result<(), AppError> {
    let env = Envelope { watermark: watermark.map(Watermark::line), data };
    let text = serde_json::to_string_pretty(&env).map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?;
    write_text(path, &(text + "\n"))
}

fn header(s: &mut String, watermark: Option<&Watermark>) {
    if let Some(w) = watermark {
        let _ = writeln!(s, "# {}", w.line());
    }
}

/// One line per record: index, phi, j_lambda, residual, norm2, norm_inf, u1..un.
pub fn write_solutions_csv(
    path: &Path,
    records: &[SolutionRecord],
    watermark: Option<&Watermark>,
) -> Result<(), AppError> {
    let mut s = String::new();
    header(&mut s, watermark);
    let n = records.first().map_or(0, |r| r.u.len());
    s.push_str("index,phi,j_lambda,residual,norm2,norm_inf");
    for k in 1..=n {
        let _ = write!(s, ",u{k}");
    }
    s.push('\n');
    for (i, r) in records.iter().enumerate() {
        let _ = write!(
            s,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            i + 1,
            r.phi,
            r.j_value,
            r.residual,
            r.norm2,
            r.norm_inf
        );
        for x in &r.u {
            let _ = write!(s, ",{x:.16e}");
        }
        s.push('\n');
    }
    write_text(path, &s)
}

/// Writes `cascade_phi.csv` (m, Φ(uₘ)) and `cascade_norm_inf.csv`
/// (m, ‖uₘ‖_∞) into `dir`. Headers are written even with no records.
pub fn emit_plot_data(
    records: &[SolutionRecord],
    dir: &Path,
    watermark: Option<&Watermark>,
) -> Result<Vec<PathBuf>, AppError> {
    type Series = (&'static str, &'static str, fn(&SolutionRecord) -> f64);
    let series: [Series; 2] =
        [("cascade_phi.csv", "phi", |r| r.phi), ("cascade_norm_inf.csv", "norm_inf", |r| r.norm_inf)];
    let mut files = Vec::new();
    for (name, col, get) in series {
        let mut s = String::new();
        header(&mut s, watermark);
        let _ = writeln!(s, "m,{col}");
        for (m, r) in records.iter().enumerate() {
            let _ = writeln!(s, "{},{:.16e}", m + 1, get(r));
        }
        let path = dir.join(name);
        write_text(&path, &s)?;
        files.push(path);
    }
    Ok(files)
}

/// Row-major matrix, one CSV line per row.
pub fn write_grid_csv(path: &Path, rows: &[Vec<f64>], watermark: Option<&Watermark>) -> Result<(), AppError> {
    let mut s = String::new();
    header(&mut s, watermark);
    for row in rows {
        let line: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    write_text(path, &s)
}
