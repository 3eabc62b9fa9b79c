//! Lower bounds on `‖G‖²` and optimality certificates.
//!
//! * Regular sequences (`k0 = 0`): `‖G‖² ≥ (1/d)(Σ c_i²)²`, attained iff
//!   `G = (Σ c_i²/d) I`.
//! * Irregular sequences: `‖G‖² ≥ Σ_{i≤k0} c_i⁴ + (1/(d−k0))(Σ_{i>k0} c_i²)²`,
//!   attained iff the `k0` dominant bearings are mutually orthogonal, orthogonal
//!   to the rest, and the rest is regular optimal in the orthogonal complement.
//! * `n = d`: `‖G‖² ≥ Σ c_i⁴`, attained iff the bearings are an orthogonal basis.
//!
//! For `n = d` the three bounds coincide: regularity at `n = d` forces
//! equal coefficients, and the irregular bound reduces to `Σ c_i⁴` once the
//! residual is regular in its own dimension.

use nalgebra::{DMatrix, DVector};

use crate::coefficients::{irregularity, is_regular, CoefficientSequence};
use crate::error::{Error, Result};
use crate::geometry::Placement;
use crate::linalg;
use crate::sensor::{self, SensorSpec};

/// Default certificate tolerance (Frobenius norm of the deviation).
pub const DEFAULT_TOL: f64 = 1e-6;

/// Certificate errors down to `-NEGATIVE_FLOOR · max(1, β)` are round-off.
pub const NEGATIVE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Regular,
    Irregular { k0: usize },
    SquareCase,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::Regular => f.write_str("regular"),
            Regime::Irregular { k0 } => write!(f, "irregular(k0={k0})"),
            Regime::SquareCase => f.write_str("square"),
        }
    }
}

/// Structural checks behind an irregular certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct IrregularDetail {
    /// Original indices of the dominant sensors.
    pub dominant: Vec<usize>,
    pub residual: Vec<usize>,
    /// Largest `|g_iᵀ g_j|` over dominant–dominant and dominant–residual pairs.
    pub max_cross_inner: f64,
    pub orthogonal: bool,
    /// Orthonormal basis of the complement of the dominant bearings.
    pub complement: Vec<DVector<f64>>,
    /// Regular certificate of the residual bearings projected onto the complement.
    pub residual_certificate: Box<OptimalityCertificate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalityCertificate {
    pub bound: f64,
    pub objective: f64,
    /// `objective − bound`, unclamped.
    pub error: f64,
    pub regime: Regime,
    /// Quantity compared against `tol`: `‖G − μ̄I‖` (regular), the largest
    /// pairwise `|g_iᵀg_j|` (square case), or the larger of the structural
    /// checks (irregular).
    pub deviation: f64,
    pub tol: f64,
    pub verdict: bool,
    pub detail: Option<IrregularDetail>,
}

/// Regime-specific lower bound on `‖G‖²`.
pub fn lower_bound(coeffs: &CoefficientSequence, d: usize) -> Result<f64> {
    let report = irregularity(coeffs, d)?;
    let sq = coeffs.sorted_squares();
    let k0 = report.k0;
    let dominant: f64 = sq[..k0].iter().map(|s| s * s).sum();
    let rest: f64 = sq[k0..].iter().sum();
    Ok(dominant + rest * rest / (d - k0) as f64)
}

fn check_inputs(coeffs: &CoefficientSequence, bearings: &[DVector<f64>]) -> Result<usize> {
    if bearings.is_empty() {
        return Err(Error::Contract("no bearings".into()));
    }
    if coeffs.len() != bearings.len() {
        return Err(Error::Contract(format!(
            "{} coefficients for {} bearings",
            coeffs.len(),
            bearings.len()
        )));
    }
    let d = bearings[0].len();
    if bearings.len() < d {
        return Err(Error::Contract(format!("need n ≥ d, got n = {}, d = {d}", bearings.len())));
    }
    if bearings.iter().any(|g| g.len() != d) {
        return Err(Error::Contract("bearings of mixed dimension".into()));
    }
    Ok(d)
}

/// Certifies a placement for the coefficients implied by `specs`.
pub fn certify(pl: &Placement, specs: &[SensorSpec], tol: f64) -> Result<OptimalityCertificate> {
    if specs.len() != pl.len() {
        return Err(Error::Contract(format!("{} specs for {} sensors", specs.len(), pl.len())));
    }
    let coeffs = sensor::coefficients(specs)?;
    certify_bearings(&coeffs, pl.bearings(), tol)
}

/// Certifies raw unit bearings against explicit coefficients.
pub fn certify_bearings(
    coeffs: &CoefficientSequence,
    bearings: &[DVector<f64>],
    tol: f64,
) -> Result<OptimalityCertificate> {
    let d = check_inputs(coeffs, bearings)?;
    if bearings.len() == d {
        return Ok(certify_square(coeffs, bearings, tol));
    }
    certify_general(coeffs, bearings, tol)
}

/// Regular or irregular certificate, never the square-case shortcut.
pub fn certify_general(
    coeffs: &CoefficientSequence,
    bearings: &[DVector<f64>],
    tol: f64,
) -> Result<OptimalityCertificate> {
    let d = check_inputs(coeffs, bearings)?;
    let report = irregularity(coeffs, d)?;
    if report.regular {
        return Ok(certify_regular(coeffs.values(), bearings, d, tol));
    }

    let g = sensor::frame_matrix(d, coeffs.values().iter().copied().zip(bearings));
    let objective = linalg::frobenius_sq(&g);
    let bound = lower_bound(coeffs, d)?;

    let mut max_cross_inner: f64 = 0.0;
    for (a, &i) in report.dominant.iter().enumerate() {
        for (b, &j) in report.dominant.iter().chain(&report.residual).enumerate() {
            if b != a {
                max_cross_inner = max_cross_inner.max(bearings[i].dot(&bearings[j]).abs());
            }
        }
    }
    let orthogonal = max_cross_inner <= tol;

    let dominant_bearings: Vec<_> = report.dominant.iter().map(|&i| bearings[i].clone()).collect();
    let basis = linalg::complete_orthonormal_basis(&dominant_bearings, d);
    let m = d - report.k0;
    let complement = basis[d - m..].to_vec();
    let projected: Vec<DVector<f64>> = report
        .residual
        .iter()
        .map(|&i| DVector::from_iterator(m, complement.iter().map(|q| q.dot(&bearings[i]))))
        .collect();
    let residual_c: Vec<f64> = report.residual.iter().map(|&i| coeffs.values()[i]).collect();
    let sub = certify_regular(&residual_c, &projected, m, tol);

    let verdict = orthogonal && sub.verdict;
    Ok(OptimalityCertificate {
        bound,
        objective,
        error: objective - bound,
        regime: Regime::Irregular { k0: report.k0 },
        deviation: max_cross_inner.max(sub.deviation),
        tol,
        verdict,
        detail: Some(IrregularDetail {
            dominant: report.dominant,
            residual: report.residual,
            max_cross_inner,
            orthogonal,
            complement,
            residual_certificate: Box::new(sub),
        }),
    })
}

/// `‖Σ c_i² g_i g_iᵀ − (Σ c_i²/d) I‖ ≤ tol`. Bearings need not be exactly
/// unit length (projected residual bearings are used as-is).
fn certify_regular(c: &[f64], bearings: &[DVector<f64>], d: usize, tol: f64) -> OptimalityCertificate {
    let g = sensor::frame_matrix(d, c.iter().copied().zip(bearings));
    let total: f64 = c.iter().map(|x| x * x).sum();
    let objective = linalg::frobenius_sq(&g);
    let bound = total * total / d as f64;
    let deviation = (g - DMatrix::identity(d, d) * (total / d as f64)).norm();
    OptimalityCertificate {
        bound,
        objective,
        error: objective - bound,
        regime: Regime::Regular,
        deviation,
        tol,
        verdict: deviation <= tol,
        detail: None,
    }
}

fn certify_square(coeffs: &CoefficientSequence, bearings: &[DVector<f64>], tol: f64) -> OptimalityCertificate {
    let d = bearings.len();
    let g = sensor::frame_matrix(d, coeffs.values().iter().copied().zip(bearings));
    let objective = linalg::frobenius_sq(&g);
    let bound: f64 = coeffs.squares().iter().map(|s| s * s).sum();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in i + 1..d {
            worst = worst.max(bearings[i].dot(&bearings[j]).abs());
        }
    }
    OptimalityCertificate {
        bound,
        objective,
        error: objective - bound,
        regime: Regime::SquareCase,
        deviation: worst,
        tol,
        verdict: worst <= tol,
        detail: None,
    }
}

/// `‖G‖² − β`, with round-off negatives clamped to zero.
pub fn optimality_error(pl: &Placement, specs: &[SensorSpec]) -> Result<f64> {
    if specs.len() != pl.len() {
        return Err(Error::Contract(format!("{} specs for {} sensors", specs.len(), pl.len())));
    }
    let coeffs = sensor::coefficients(specs)?;
    optimality_error_for(&coeffs, pl.bearings())
}

pub fn optimality_error_for(coeffs: &CoefficientSequence, bearings: &[DVector<f64>]) -> Result<f64> {
    let d = check_inputs(coeffs, bearings)?;
    let bound = lower_bound(coeffs, d)?;
    let g = sensor::frame_matrix(d, coeffs.values().iter().copied().zip(bearings));
    // ‖G‖² − β = ‖G − μ̄I‖² − (β − (Σc²)²/d); the second term vanishes for
    // regular sequences, so no large quantities cancel there
    let total = coeffs.sum_sq();
    let mean = total / d as f64;
    let gap = if is_regular(coeffs, d)? { 0.0 } else { (bound - total * mean).max(0.0) };
    let deviation = linalg::frobenius_sq(&(g - DMatrix::identity(d, d) * mean));
    Ok(clamp_error(deviation - gap, bound))
}

pub(crate) fn clamp_error(error: f64, bound: f64) -> f64 {
    if error < 0.0 && error >= -NEGATIVE_FLOOR * bound.max(1.0) {
        0.0
    } else {
        error
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensor::SensorKind;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(x)
    }

    fn seq(x: &[f64]) -> CoefficientSequence {
        CoefficientSequence::new(x.to_vec()).unwrap()
    }

    fn tetrahedron() -> Vec<DVector<f64>> {
        let s = 1.0 / 3f64.sqrt();
        vec![v(&[s, s, s]), v(&[s, -s, -s]), v(&[-s, s, -s]), v(&[-s, -s, s])]
    }

    #[test]
    fn bound_examples() {
        assert!((lower_bound(&seq(&[1.0; 4]), 3).unwrap() - 16.0 / 3.0).abs() < 1e-12);
        // k0 = 1: 10⁴ + (1/2)(1+1+1)²
        assert!((lower_bound(&seq(&[10.0, 1.0, 1.0, 1.0]), 3).unwrap() - 10004.5).abs() < 1e-9);
    }

    #[test]
    fn square_case_bound_coincides() {
        for c in [vec![1.0, 1.0, 1.0], vec![3.0, 1.0, 2.0], vec![10.0, 1.0], vec![0.5, 0.5]] {
            let s = seq(&c);
            let fourth: f64 = s.squares().iter().map(|x| x * x).sum();
            assert!((lower_bound(&s, c.len()).unwrap() - fourth).abs() < 1e-9 * fourth);
        }
    }

    #[test]
    fn tetrahedron_certifies() {
        let cert = certify_bearings(&seq(&[1.0; 4]), &tetrahedron(), 1e-9).unwrap();
        assert_eq!(cert.regime, Regime::Regular);
        assert!(cert.verdict);
        assert!(cert.error.abs() <= 1e-9);
    }

    #[test]
    fn irregular_planar_structure() {
        let bearings = vec![v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[0.0, 1.0]), v(&[0.0, -1.0])];
        let cert = certify_bearings(&seq(&[10.0, 1.0, 1.0, 1.0]), &bearings, 1e-9).unwrap();
        assert_eq!(cert.regime, Regime::Irregular { k0: 1 });
        assert!(cert.verdict);
        assert!(cert.error.abs() < 1e-9);
        let detail = cert.detail.unwrap();
        assert_eq!(detail.dominant, vec![0]);
        assert!(detail.residual_certificate.verdict);
    }

    #[test]
    fn irregular_requires_orthogonality() {
        let t = 0.1f64;
        let bearings = vec![v(&[1.0, 0.0]), v(&[t.sin(), t.cos()]), v(&[0.0, 1.0]), v(&[0.0, 1.0])];
        let cert = certify_bearings(&seq(&[10.0, 1.0, 1.0, 1.0]), &bearings, 1e-6).unwrap();
        assert!(!cert.verdict);
        assert!(cert.error > 0.0);
    }

    #[test]
    fn square_case_non_orthogonal_pair() {
        let a = 80f64.to_radians();
        let bearings = vec![v(&[1.0, 0.0]), v(&[a.cos(), a.sin()])];
        let cert = certify_bearings(&seq(&[1.0, 1.0]), &bearings, 1e-6).unwrap();
        assert_eq!(cert.regime, Regime::SquareCase);
        assert!(!cert.verdict);
    }

    #[test]
    fn coincident_range_pair_error() {
        let pl = Placement::from_bearings(vec![v(&[1.0, 0.0]), v(&[1.0, 0.0])]).unwrap();
        let specs = SensorSpec::for_placement(SensorKind::RangeOnly, &[1.0, 1.0], &pl).unwrap();
        assert!((optimality_error(&pl, &specs).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn square_and_general_agree() {
        let ortho = vec![v(&[0.6, 0.8]), v(&[-0.8, 0.6])];
        let skew = vec![v(&[1.0, 0.0]), v(&[0.6, 0.8])];
        for tol in [1e-9, 1e-6, 1e-3] {
            for b in [&ortho, &skew] {
                let s = seq(&[2.0, 2.0]);
                assert_eq!(
                    certify_bearings(&s, b, tol).unwrap().verdict,
                    certify_general(&s, b, tol).unwrap().verdict
                );
            }
        }
    }

    #[test]
    fn contract_errors() {
        assert!(certify_bearings(&seq(&[1.0]), &[v(&[1.0, 0.0])], 1e-6).is_err());
        assert!(certify_bearings(&seq(&[1.0, 1.0, 1.0]), &[v(&[1.0, 0.0]), v(&[0.0, 1.0])], 1e-6).is_err());
    }
}
