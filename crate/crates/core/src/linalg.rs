//! Small dense linear-algebra helpers for d ≤ 3 (with general fallbacks).
//!
//! Symmetric eigenvalues of 2×2 and 3×3 matrices use closed forms: the
//! quadratic formula and the trigonometric solution of the characteristic
//! cubic. Larger matrices fall back to `nalgebra`'s iterative solver.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

/// Eigenvalues of a symmetric matrix, sorted in descending order.
///
/// Only the upper triangle is read.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    assert!(m.is_square(), "eigenvalues of a non-square matrix");
    let mut vals = match m.nrows() {
        0 => Vec::new(),
        1 => vec![m[(0, 0)]],
        2 => eigenvalues_2x2(m[(0, 0)], m[(0, 1)], m[(1, 1)]).to_vec(),
        3 => eigenvalues_3x3(m).to_vec(),
        _ => {
            let sym = (m + m.transpose()) * 0.5;
            sym.symmetric_eigenvalues().iter().copied().collect()
        }
    };
    vals.sort_by(|a, b| b.total_cmp(a));
    vals
}

fn eigenvalues_2x2(a: f64, b: f64, c: f64) -> [f64; 2] {
    let mean = 0.5 * (a + c);
    let radius = (0.5 * (a - c)).hypot(b);
    [mean + radius, mean - radius]
}

fn eigenvalues_3x3(m: &DMatrix<f64>) -> [f64; 3] {
    let (a00, a01, a02) = (m[(0, 0)], m[(0, 1)], m[(0, 2)]);
    let (a11, a12, a22) = (m[(1, 1)], m[(1, 2)], m[(2, 2)]);

    let off = a01 * a01 + a02 * a02 + a12 * a12;
    let q = (a00 + a11 + a22) / 3.0;
    let (d0, d1, d2) = (a00 - q, a11 - q, a22 - q);
    let p2 = d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * off;
    if p2 == 0.0 {
        return [q, q, q];
    }
    if off == 0.0 {
        return [a00, a11, a22];
    }
    let p = (p2 / 6.0).sqrt();
    // B = (A - qI) / p; r = det(B) / 2 lies in [-1, 1] up to round-off.
    let (b00, b01, b02) = (d0 / p, a01 / p, a02 / p);
    let (b11, b12, b22) = (d1 / p, a12 / p, d2 / p);
    let det_b = b00 * (b11 * b22 - b12 * b12) - b01 * (b01 * b22 - b12 * b02)
        + b02 * (b01 * b12 - b11 * b02);
    let r = (0.5 * det_b).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let largest = q + 2.0 * p * phi.cos();
    let smallest = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let middle = 3.0 * q - largest - smallest;
    [largest, middle, smallest]
}

/// Squared Frobenius norm.
pub fn frobenius_sq(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x * x).sum()
}

/// Flips `v` so that its first entry with magnitude above `1e-12` is positive.
pub fn canonical_sign(mut v: DVector<f64>) -> DVector<f64> {
    if let Some(first) = v.iter().copied().find(|x| x.abs() > 1e-12) {
        if first < 0.0 {
            v.neg_mut();
        }
    }
    v
}

/// Orthonormalizes `seed` (dropping vectors that are numerically dependent)
/// and completes it to an orthonormal basis of R^dim.
///
/// Completion is Gram–Schmidt with column pivoting over the canonical axes:
/// at every step the axis with the largest residual after projecting out the
/// current basis is taken next. The returned basis starts with the
/// orthonormalized seed vectors in order.
pub fn complete_orthonormal_basis(seed: &[DVector<f64>], dim: usize) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(dim);
    for v in seed {
        assert_eq!(v.len(), dim, "seed vector has the wrong dimension");
        if let Some(u) = orthogonalize(v, &basis) {
            basis.push(u);
        }
    }
    while basis.len() < dim {
        let best = (0..dim)
            .map(|k| {
                let axis = DVector::from_fn(dim, |i, _| if i == k { 1.0 } else { 0.0 });
                residual(&axis, &basis)
            })
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .expect("dim > 0");
        let n = best.norm();
        basis.push(best / n);
    }
    basis
}

fn residual(v: &DVector<f64>, basis: &[DVector<f64>]) -> DVector<f64> {
    let mut r = v.clone();
    // Two passes keep the result orthogonal to working precision.
    for _ in 0..2 {
        for b in basis {
            let proj = b.dot(&r);
            r.axpy(-proj, b, 1.0);
        }
    }
    r
}

fn orthogonalize(v: &DVector<f64>, basis: &[DVector<f64>]) -> Option<DVector<f64>> {
    let scale = v.norm();
    if scale == 0.0 {
        return None;
    }
    let r = residual(v, basis);
    let n = r.norm();
    (n > 1e-10 * scale).then(|| r / n)
}

/// Orthogonal matrix `U` minimising `Σ ‖U a_i − b_i‖²` (reflections allowed).
pub fn procrustes(a: &[DVector<f64>], b: &[DVector<f64>]) -> DMatrix<f64> {
    assert_eq!(a.len(), b.len());
    let dim = a.first().map_or(0, |v| v.len());
    let mut cross = DMatrix::<f64>::zeros(dim, dim);
    for (ai, bi) in a.iter().zip(b) {
        cross += bi * ai.transpose();
    }
    let svd = cross.svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    u * v_t
}

/// Outer product `v vᵀ`.
pub fn outer(v: &DVector<f64>) -> DMatrix<f64> {
    v * v.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym3(a: [f64; 6]) -> DMatrix<f64> {
        DMatrix::from_row_slice(3, 3, &[a[0], a[1], a[2], a[1], a[3], a[4], a[2], a[4], a[5]])
    }

    #[test]
    fn eigen_2x2_matches_nalgebra() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, -0.7, -0.7, 0.5]);
        let ours = symmetric_eigenvalues(&m);
        let mut theirs: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
        theirs.sort_by(|a, b| b.total_cmp(a));
        for (x, y) in ours.iter().zip(&theirs) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn eigen_3x3_cases() {
        // diagonal, repeated, generic
        assert_eq!(symmetric_eigenvalues(&sym3([3.0, 0.0, 0.0, 1.0, 0.0, 2.0])), vec![3.0, 2.0, 1.0]);
        let iso = symmetric_eigenvalues(&(DMatrix::identity(3, 3) * 4.0));
        assert!(iso.iter().all(|&x| x == 4.0));
        let m = sym3([4.0, 1.0, -2.0, 2.0, 0.5, -1.0]);
        let ours = symmetric_eigenvalues(&m);
        let mut theirs: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
        theirs.sort_by(|a, b| b.total_cmp(a));
        for (x, y) in ours.iter().zip(&theirs) {
            assert!((x - y).abs() < 1e-10, "{ours:?} vs {theirs:?}");
        }
    }

    #[test]
    fn completion_is_orthonormal() {
        let x = DVector::from_vec(vec![2.02, 2.53, 2.90, 3.19]);
        let basis = complete_orthonormal_basis(std::slice::from_ref(&x), 4);
        assert_eq!(basis.len(), 4);
        assert!((basis[0].dot(&x) - x.norm()).abs() < 1e-12);
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((basis[i].dot(&basis[j]) - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn procrustes_recovers_rotation() {
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let rot = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let a: Vec<_> = [[1.0, 0.0], [0.3, 0.9], [-0.5, 0.2]]
            .iter()
            .map(|v| DVector::from_row_slice(v))
            .collect();
        let b: Vec<_> = a.iter().map(|v| &rot * v).collect();
        let u = procrustes(&a, &b);
        assert!((u - rot).norm() < 1e-12);
    }
}
