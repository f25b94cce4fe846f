//! Symmetric positive-definite matrices, the two model operators
//! (second-difference and grid Dirichlet Laplacian) and the norm bounds
//!
//! ```text
//! λ₁‖u‖² ≤ uᵗAu ≤ λₙ‖u‖²,        ‖u‖_∞ ≤ (uᵗAu)^{1/2} / √λ₁
//! ```
//!
//! that every downstream estimate relies on.

mod grid;
mod io;
pub mod jacobi;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use grid::{assemble_grid_laplacian, GridIndexMap};
pub use io::{format_spectrum, parse_dense_text};
pub use jacobi::{jacobi_eigen, SymmetricEigen};

/// Smallest eigenvalue accepted as "positive" when checking definiteness.
pub const POSITIVE_DEFINITE_FLOOR: f64 = 1e-10;

/// Relative asymmetry tolerated on user input before it is rejected.
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum StructuralTag {
    General,
    SecondDifference,
    GridLaplacian { m: usize, n: usize },
}

/// Dense symmetric matrix with a lazily computed, cached ascending spectrum.
///
/// The spectrum is computed at most once even under concurrent first access.
#[derive(Debug, Clone)]
pub struct SpdMatrix {
    order: usize,
    entries: Vec<f64>,
    tag: StructuralTag,
    spectrum: OnceLock<Result<Vec<f64>>>,
}

impl SpdMatrix {
    /// Builds a matrix from row-major entries, rejecting asymmetric input.
    ///
    /// Entries that differ from their transpose by rounding noise (relative
    /// 1e-12) are symmetrized by averaging.
    pub fn from_row_major(order: usize, entries: Vec<f64>) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidDimension("matrix order must be positive".into()));
        }
        if entries.len() != order * order {
            return Err(Error::DimensionMismatch { expected: order * order, got: entries.len() });
        }
        if let Some(bad) = entries.iter().position(|x| !x.is_finite()) {
            return Err(Error::OutOfRange(format!("non-finite matrix entry at position {bad}")));
        }
        let scale = entries.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        let mut entries = entries;
        for i in 0..order {
            for j in (i + 1)..order {
                let (a, b) = (entries[i * order + j], entries[j * order + i]);
                let gap = (a - b).abs();
                if gap > SYMMETRY_TOL * scale {
                    return Err(Error::NotSymmetric { row: i + 1, col: j + 1, gap });
                }
                let mean = 0.5 * (a + b);
                entries[i * order + j] = mean;
                entries[j * order + i] = mean;
            }
        }
        Ok(Self::with_tag(order, entries, StructuralTag::General))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let order = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != order) {
            return Err(Error::DimensionMismatch { expected: order, got: r.len() });
        }
        Self::from_row_major(order, rows.concat())
    }

    pub fn identity(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidDimension("matrix order must be positive".into()));
        }
        let mut e = vec![0.0; order * order];
        for i in 0..order {
            e[i * order + i] = 1.0;
        }
        Ok(Self::with_tag(order, e, StructuralTag::General))
    }

    pub(crate) fn with_tag(order: usize, entries: Vec<f64>, tag: StructuralTag) -> Self {
        Self { order, entries, tag, spectrum: OnceLock::new() }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn tag(&self) -> StructuralTag {
        self.tag
    }

    /// Entry at 0-based position (i, j).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.order + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.order).map(|r| r.to_vec()).collect()
    }

    /// Ascending spectrum λ₁ ≤ … ≤ λₙ, computed once by cyclic Jacobi.
    pub fn spectrum(&self) -> Result<&[f64]> {
        self.spectrum
            .get_or_init(|| jacobi_eigen(&self.entries, self.order, false).map(|e| e.values))
            .as_ref()
            .map(|v| v.as_slice())
            .map_err(Clone::clone)
    }

    pub fn lambda_min(&self) -> Result<f64> {
        Ok(self.spectrum()?[0])
    }

    pub fn lambda_max(&self) -> Result<f64> {
        Ok(*self.spectrum()?.last().expect("order >= 1"))
    }

    /// Returns λ₁ if it clears [`POSITIVE_DEFINITE_FLOOR`].
    pub fn check_positive_definite(&self) -> Result<f64> {
        let lambda_min = self.lambda_min()?;
        if lambda_min > POSITIVE_DEFINITE_FLOOR {
            Ok(lambda_min)
        } else {
            Err(Error::NotPositiveDefinite { lambda_min, floor: POSITIVE_DEFINITE_FLOOR })
        }
    }

    pub fn eigen(&self) -> Result<SymmetricEigen> {
        jacobi_eigen(&self.entries, self.order, true)
    }

    pub fn trace(&self) -> f64 {
        (0..self.order).map(|i| self.get(i, i)).sum()
    }

    /// Σ_{i<j} a_ij.
    pub fn upper_sum(&self) -> f64 {
        let n = self.order;
        (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).map(|(i, j)| self.get(i, j)).sum()
    }

    /// 1ᵗA1 = trace(A) + 2 Σ_{i<j} a_ij.
    pub fn ones_form(&self) -> f64 {
        self.trace() + 2.0 * self.upper_sum()
    }

    fn check_len(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.order {
            return Err(Error::DimensionMismatch { expected: self.order, got: u.len() });
        }
        Ok(())
    }

    /// Au, using the stencil for tagged operators and a dense product otherwise.
    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u)?;
        let n = self.order;
        let out = match self.tag {
            StructuralTag::SecondDifference => (0..n)
                .map(|k| {
                    let left = if k > 0 { u[k - 1] } else { 0.0 };
                    let right = if k + 1 < n { u[k + 1] } else { 0.0 };
                    2.0 * u[k] - left - right
                })
                .collect(),
            StructuralTag::GridLaplacian { m, n: cols } => {
                let mut out = vec![0.0; n];
                for j in 0..cols {
                    for i in 0..m {
                        let k = i + m * j;
                        let mut acc = 4.0 * u[k];
                        if i > 0 {
                            acc -= u[k - 1];
                        }
                        if i + 1 < m {
                            acc -= u[k + 1];
                        }
                        if j > 0 {
                            acc -= u[k - m];
                        }
                        if j + 1 < cols {
                            acc -= u[k + m];
                        }
                        out[k] = acc;
                    }
                }
                out
            }
            StructuralTag::General => {
                self.entries.chunks(n).map(|row| row.iter().zip(u).map(|(a, x)| a * x).sum()).collect()
            }
        };
        Ok(out)
    }

    /// uᵗAu.
    pub fn quadratic_form(&self, u: &[f64]) -> Result<f64> {
        let au = self.apply(u)?;
        Ok(au.iter().zip(u).map(|(a, x)| a * x).sum())
    }

    /// c = √(2r/λ₁): every u with uᵗAu < 2r satisfies ‖u‖_∞ ≤ c.
    pub fn sup_norm_radius(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::OutOfRange(format!("radius level must be positive, got {r}")));
        }
        let lambda1 = self.check_positive_definite()?;
        Ok((2.0 * r / lambda1).sqrt())
    }
}

/// n×n tridiagonal matrix with 2 on the diagonal and −1 beside it.
pub fn assemble_second_difference(n: usize) -> Result<SpdMatrix> {
    if n == 0 {
        return Err(Error::InvalidDimension("second-difference order must be >= 1".into()));
    }
    let mut e = vec![0.0; n * n];
    for k in 0..n {
        e[k * n + k] = 2.0;
        if k + 1 < n {
            e[k * n + k + 1] = -1.0;
            e[(k + 1) * n + k] = -1.0;
        }
    }
    Ok(SpdMatrix::with_tag(n, e, StructuralTag::SecondDifference))
}

pub fn euclidean_norm(u: &[f64]) -> f64 {
    u.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn sup_norm(u: &[f64]) -> f64 {
    u.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}
