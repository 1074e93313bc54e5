//! Small dense linear-algebra helpers.
//!
//! Matrices are `nalgebra` types throughout. Singular value decompositions
//! go through `faer`: nalgebra's bidiagonal SVD returns inaccurate singular
//! vectors on a few percent of rank-deficient inputs, which breaks TT-SVD.

use nalgebra::{DMatrix, DVector};

/// Default relative singular-value threshold.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Singular values in descending order. Empty matrices have none.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s = to_faer(m)
        .singular_values()
        .unwrap_or_else(|_| m.singular_values().iter().copied().collect());
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Thin SVD `m = U diag(s) Vᵀ` with `s` in descending order.
///
/// Returns `None` if the iteration fails to converge.
pub fn thin_svd(m: &DMatrix<f64>) -> Option<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Some((DMatrix::zeros(rows, 0), Vec::new(), DMatrix::zeros(0, cols)));
    }
    let svd = to_faer(m).thin_svd().ok()?;
    let (u, v, s) = (svd.U(), svd.V(), svd.S().column_vector());
    let u = DMatrix::from_fn(rows, k, |i, j| u[(i, j)]);
    let v_t = DMatrix::from_fn(k, cols, |i, j| v[(j, i)]);
    Some((u, (0..k).map(|j| s[j]).collect(), v_t))
}

fn to_faer(m: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Number of singular values strictly above `tolerance * σ_1`.
///
/// A matrix whose largest singular value is zero (or not finite) has rank 0.
pub fn numerical_rank(m: &DMatrix<f64>, tolerance: f64) -> usize {
    rank_from_singular_values(&singular_values(m), tolerance)
}

pub fn rank_from_singular_values(s: &[f64], tolerance: f64) -> usize {
    match s.first() {
        Some(&top) if top > 0.0 && top.is_finite() => {
            s.iter().take_while(|&&v| v > tolerance * top).count()
        }
        _ => 0,
    }
}

/// σ_min / σ_max of a square matrix; 0 for a zero matrix.
pub fn inverse_condition(m: &DMatrix<f64>) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        _ => 0.0,
    }
}

/// Solves `a x = b` with LU, returning `None` when `a` is singular or the
/// ratio σ_min/σ_max falls below `tolerance`.
pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>, tolerance: f64) -> Option<DVector<f64>> {
    if inverse_condition(a) < tolerance {
        return None;
    }
    a.clone().lu().solve(b)
}

/// Inverse with the same guard as [`solve`].
pub fn try_inverse(a: &DMatrix<f64>, tolerance: f64) -> Option<DMatrix<f64>> {
    if inverse_condition(a) < tolerance {
        return None;
    }
    a.clone().try_inverse()
}

pub fn frobenius(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// ‖a − b‖ / max(‖a‖, ‖b‖), or the absolute distance if both are zero.
pub fn relative_distance(a: &[f64], b: &[f64]) -> f64 {
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let scale = frobenius(a).max(frobenius(b));
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}
