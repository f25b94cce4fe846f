use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::export::{write_grid_csv, write_json, Watermark};
use super::AppError;
use crate::energy::{EnergyFunctional, ProblemInstance};
use crate::error::{Error, Result};
use crate::matrix::{euclidean_norm, GridIndexMap};
use crate::solver::SolutionRecord;

/// Agreement between the difference equation on the grid and ∇J_λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridCheck {
    /// max over nodes of |grid residual + ∇J_λ|
    pub max_node_gap: f64,
    pub grid_norm: f64,
    pub algebraic_norm: f64,
    pub agrees: bool,
}

/// Left side of
/// Δ₁u(i,j) + Δ₂u(i,j) + λf((i,j), u(i,j)) + h(u(i,j)) = 0
/// at every interior node, with u = 0 on the frame, listed in index order
/// k = i + m(j − 1). Built from the stencil alone, not from the assembled
/// matrix.
pub fn grid_form_residual(problem: &ProblemInstance, map: GridIndexMap, w: &[f64]) -> Result<Vec<f64>> {
    let (m, n) = (map.m, map.n);
    if w.len() != m * n || problem.order() != m * n {
        return Err(Error::DimensionMismatch { expected: m * n, got: w.len() });
    }
    let u = |i: usize, j: usize| -> f64 {
        if i == 0 || j == 0 || i > m || j > n {
            0.0
        } else {
            w[i - 1 + m * (j - 1)]
        }
    };
    let f = problem.f();
    let h = problem.h();
    let lambda = problem.lambda();
    let mut out = vec![0.0; m * n];
    for j in 1..=n {
        for i in 1..=m {
            let k = map.forward(i, j)?;
            let c = u(i, j);
            let d1 = u(i + 1, j) - 2.0 * c + u(i - 1, j);
            let d2 = u(i, j + 1) - 2.0 * c + u(i, j - 1);
            out[k - 1] = d1 + d2 + lambda * f.component(k - 1).value(c) + h.components()[k - 1].value(c);
        }
    }
    Ok(out)
}

pub fn check_grid(energy: &EnergyFunctional, map: GridIndexMap, w: &[f64], tol: f64) -> Result<GridCheck> {
    let grid = grid_form_residual(energy.problem(), map, w)?;
    let grad = energy.gradient(w)?;
    let max_node_gap = grid.iter().zip(&grad).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
    let grid_norm = euclidean_norm(&grid);
    let algebraic_norm = euclidean_norm(&grad);
    Ok(GridCheck {
        max_node_gap,
        grid_norm,
        algebraic_norm,
        agrees: max_node_gap <= tol && (grid_norm - algebraic_norm).abs() <= tol,
    })
}

/// Grid with the zero Dirichlet frame: m + 2 rows of n + 2 values.
pub fn framed(map: GridIndexMap, w: &[f64]) -> Result<Vec<Vec<f64>>> {
    let inner = map.to_grid(w)?;
    let mut rows = vec![vec![0.0; map.n + 2]];
    for row in inner {
        let mut r = Vec::with_capacity(map.n + 2);
        r.push(0.0);
        r.extend(row);
        r.push(0.0);
        rows.push(r);
    }
    rows.push(vec![0.0; map.n + 2]);
    Ok(rows)
}

const GRID_TOL: f64 = 1e-10;

pub(super) fn export_grid_solutions(
    energy: &EnergyFunctional,
    map: GridIndexMap,
    records: &[SolutionRecord],
    dir: &Path,
    watermark: &Option<Watermark>,
    text: &mut String,
    files: &mut Vec<PathBuf>,
) -> std::result::Result<(), AppError> {
    let mut checks = Vec::with_capacity(records.len());
    for (idx, rec) in records.iter().enumerate() {
        let check = check_grid(energy, map, &rec.u, GRID_TOL)?;
        let _ = writeln!(
            text,
            "  grid solution {}: norm_inf={:.6e} grid residual={:.3e} algebraic residual={:.3e} node gap={:.3e} {}",
            idx + 1,
            rec.norm_inf,
            check.grid_norm,
            check.algebraic_norm,
            check.max_node_gap,
            if check.agrees { "ok" } else { "MISMATCH" }
        );
        let path = dir.join(format!("solution_{}.csv", idx + 1));
        write_grid_csv(&path, &framed(map, &rec.u)?, watermark.as_ref())?;
        files.push(path);
        checks.push(check);
    }
    let path = dir.join("grid_check.json");
    write_json(&path, &checks, watermark.as_ref())?;
    files.push(path);
    if let Some(bad) = checks.iter().position(|c| !c.agrees) {
        return Err(AppError::Numerical(format!("grid solution {} fails the grid-form round trip", bad + 1)));
    }
    Ok(())
}
