//! Sturm-sequence bisection for the low end of a symmetric tridiagonal
//! spectrum.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Absolute width at which a bisection bracket is considered resolved.
pub const BISECTION_RESOLUTION: f64 = 1e-10;

/// Symmetric tridiagonal matrix stored as its diagonal and off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalMatrix {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl TridiagonalMatrix {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidArgument("tridiagonal matrix must be non-empty".into()));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::InvalidArgument(format!(
                "off-diagonal length {} does not match dimension {}",
                offdiag.len(),
                diag.len()
            )));
        }
        if let Some(index) = diag.iter().chain(offdiag.iter()).position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { diag, offdiag })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// Number of eigenvalues strictly below `x`: the count of negative
    /// pivots in the LDLᵀ factorisation of `M - x I`.
    pub fn sturm_count(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.diag.len() {
            let e = self.offdiag[i - 1];
            let pivot = if q == 0.0 { f64::EPSILON * e.abs().max(f64::MIN_POSITIVE) } else { q };
            q = (self.diag[i] - x) - e * e / pivot;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Interval containing the whole spectrum.
    pub fn gershgorin_bounds(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.offdiag[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        let pad = 1e-12 * (hi - lo).abs().max(1.0);
        (lo - pad, hi + pad)
    }
}

/// Bracket `[lower, upper]` around the j-th smallest eigenvalue (0-based).
///
/// `sturm_count(lower) <= j < sturm_count(upper)` holds on return.
pub fn eigenvalue_bracket(matrix: &TridiagonalMatrix, index: usize) -> Result<(f64, f64)> {
    if index >= matrix.dim() {
        return Err(Error::InvalidArgument(format!(
            "eigenvalue index {index} out of range for dimension {}",
            matrix.dim()
        )));
    }
    let (mut lo, mut hi) = matrix.gershgorin_bounds();
    loop {
        let mid = 0.5 * (lo + hi);
        let resolved = hi - lo <= BISECTION_RESOLUTION || mid <= lo || mid >= hi;
        if resolved {
            return Ok((lo, hi));
        }
        if matrix.sturm_count(mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// The `count` smallest eigenvalues in ascending order.
pub fn tridiag_smallest_eigenvalues(matrix: &TridiagonalMatrix, count: usize) -> Result<Vec<f64>> {
    if count > matrix.dim() {
        return Err(Error::InvalidArgument(format!(
            "requested {count} eigenvalues from a {}-dimensional matrix",
            matrix.dim()
        )));
    }
    (0..count).into_par_iter().map(|j| eigenvalue_bracket(matrix, j).map(|(lo, hi)| 0.5 * (lo + hi))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn three_by_three_laplacian() {
        let m = TridiagonalMatrix::new(vec![2.0; 3], vec![-1.0; 2]).unwrap();
        let ev = tridiag_smallest_eigenvalues(&m, 3).unwrap();
        let want = [2.0 - 2f64.sqrt(), 2.0, 2.0 + 2f64.sqrt()];
        for (got, want) in ev.iter().zip(want) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn dirichlet_laplacian_closed_form() {
        // -u'' on (0, L) with n interior points: (2/h²)(1 - cos(jπh/L)).
        let n = 100;
        let length = 1.0;
        let h = length / (n + 1) as f64;
        let m = TridiagonalMatrix::new(vec![2.0 / (h * h); n], vec![-1.0 / (h * h); n - 1]).unwrap();
        let ev = tridiag_smallest_eigenvalues(&m, n).unwrap();
        for (j, got) in ev.iter().enumerate() {
            let jf = (j + 1) as f64;
            let want = 2.0 / (h * h) * (1.0 - (jf * PI * h / length).cos());
            assert!((got - want).abs() < 1e-9 * want.max(1.0), "j = {j}");
        }
    }

    #[test]
    fn count_exceeding_dimension_is_an_error() {
        let m = TridiagonalMatrix::new(vec![1.0; 4], vec![0.5; 3]).unwrap();
        assert!(matches!(tridiag_smallest_eigenvalues(&m, 5), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn inconsistent_shapes_rejected() {
        assert!(TridiagonalMatrix::new(vec![1.0; 4], vec![0.5; 4]).is_err());
        assert!(TridiagonalMatrix::new(vec![], vec![]).is_err());
        assert!(TridiagonalMatrix::new(vec![1.0, f64::NAN], vec![0.5]).is_err());
    }

    #[test]
    fn brackets_isolate_one_eigenvalue() {
        let n = 60;
        let diag: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin() * 3.0 + i as f64 * 0.1).collect();
        let off: Vec<f64> = (0..n - 1).map(|i| 0.5 + 0.2 * (i as f64).cos()).collect();
        let m = TridiagonalMatrix::new(diag, off).unwrap();
        for j in 0..10 {
            let (lo, hi) = eigenvalue_bracket(&m, j).unwrap();
            assert!(hi - lo <= BISECTION_RESOLUTION);
            assert_eq!(m.sturm_count(hi) - m.sturm_count(lo), 1, "j = {j}");
            assert_eq!(m.sturm_count(lo), j);
        }
        // Sturm property: the number of eigenvalues below the largest returned
        // value equals its index.
        let ev = tridiag_smallest_eigenvalues(&m, 10).unwrap();
        assert!(ev.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(m.sturm_count(ev[9] + BISECTION_RESOLUTION), 10);
    }
}
