use nalgebra::{DMatrix, DVector};

/// Solves M x = b by partial-pivot LU; `None` when M is singular or the
/// solution is not finite.
pub(crate) fn solve(m: &[f64], n: usize, b: &[f64]) -> Option<Vec<f64>> {
    let x = DMatrix::from_row_slice(n, n, m).lu().solve(&DVector::from_column_slice(b))?;
    x.iter().all(|v| v.is_finite()).then(|| x.as_slice().to_vec())
}

/// Solves (M + τI) x = b with the smallest τ in {0, τ₀, 2τ₀, 4τ₀, …} that
/// makes the shifted matrix positive definite. The result is a descent
/// direction for −b whenever b ≠ 0.
pub(crate) fn solve_shifted_spd(m: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let scale = m.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let rhs = DVector::from_column_slice(b);
    let mut tau = 0.0;
    loop {
        let mut shifted = DMatrix::from_row_slice(n, n, m);
        for k in 0..n {
            shifted[(k, k)] += tau;
        }
        if let Some(ch) = shifted.cholesky() {
            let x = ch.solve(&rhs);
            if x.iter().all(|v| v.is_finite()) {
                return x.as_slice().to_vec();
            }
        }
        tau = if tau == 0.0 { 1e-8 * scale } else { 2.0 * tau };
        if tau > 1e12 * scale {
            // gradient direction scaled by the matrix size
            return b.iter().map(|v| v / scale).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_and_shifted() {
        let m = [4.0, 1.0, 1.0, 3.0];
        let x = solve(&m, 2, &[1.0, 2.0]).unwrap();
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-14);
        assert!(solve(&[1.0, 1.0, 1.0, 1.0], 2, &[1.0, 0.0]).is_none());

        let y = solve_shifted_spd(&m, 2, &[1.0, 2.0]);
        assert_eq!(x, y);
        // indefinite: still a descent direction
        let ind = [1.0, 0.0, 0.0, -1.0];
        let d = solve_shifted_spd(&ind, 2, &[1.0, 1.0]);
        assert!(d[0] + d[1] > 0.0);
    }
}
