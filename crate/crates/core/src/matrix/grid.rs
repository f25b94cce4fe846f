use serde::{Deserialize, Serialize};

use super::{SpdMatrix, StructuralTag};
use crate::error::{Error, Result};

/// The bijection k = i + m(j − 1) between the m×n interior grid nodes and
/// 1..=mn. Both sides are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridIndexMap {
    pub m: usize,
    pub n: usize,
}

impl GridIndexMap {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidDimension(format!("grid dimensions must be positive, got {m}x{n}")));
        }
        Ok(Self { m, n })
    }

    pub fn len(&self) -> usize {
        self.m * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn forward(&self, i: usize, j: usize) -> Result<usize> {
        if !(1..=self.m).contains(&i) || !(1..=self.n).contains(&j) {
            return Err(Error::OutOfRange(format!("node ({i},{j}) outside [1,{}]x[1,{}]", self.m, self.n)));
        }
        Ok(i + self.m * (j - 1))
    }

    pub fn inverse(&self, k: usize) -> Result<(usize, usize)> {
        if !(1..=self.len()).contains(&k) {
            return Err(Error::OutOfRange(format!("index {k} outside [1,{}]", self.len())));
        }
        Ok(((k - 1) % self.m + 1, (k - 1) / self.m + 1))
    }

    /// Lays out a vector w (indexed by k) as rows i = 1..m of columns j = 1..n.
    pub fn to_grid(&self, w: &[f64]) -> Result<Vec<Vec<f64>>> {
        if w.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: w.len() });
        }
        Ok((0..self.m).map(|i| (0..self.n).map(|j| w[i + self.m * j]).collect()).collect())
    }
}

/// Block-tridiagonal mn×mn Dirichlet Laplacian: diagonal blocks D (m×m,
/// 4 on the diagonal, −1 beside it), off-diagonal blocks −I_m.
pub fn assemble_grid_laplacian(m: usize, n: usize) -> Result<(SpdMatrix, GridIndexMap)> {
    let map = GridIndexMap::new(m, n)?;
    let size = m * n;
    let mut e = vec![0.0; size * size];
    for block in 0..n {
        for i in 0..m {
            let k = block * m + i;
            e[k * size + k] = 4.0;
            if i + 1 < m {
                e[k * size + k + 1] = -1.0;
                e[(k + 1) * size + k] = -1.0;
            }
            if block + 1 < n {
                e[k * size + k + m] = -1.0;
                e[(k + m) * size + k] = -1.0;
            }
        }
    }
    Ok((SpdMatrix::with_tag(size, e, StructuralTag::GridLaplacian { m, n }), map))
}
