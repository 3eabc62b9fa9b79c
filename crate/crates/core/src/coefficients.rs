//! Irregularity of a positive coefficient sequence with respect to a
//! dimension, and the fundamental inequality `max c_j² ≤ (1/d) Σ c_i²`.
//!
//! A sequence is *regular* (irregularity 0) when no single sensor carries
//! more than a 1/d share of the total squared weight. When it does, the
//! irregularity `k0` counts how many dominant sensors must be peeled off
//! (each claiming a dimension of its own) before the rest becomes regular
//! in the remaining `d − k0` dimensions.

use crate::error::{Error, Result};

/// Relative slack applied to every threshold comparison, scaled by the
/// total squared weight of the sequence being tested.
pub const REGULARITY_SLACK: f64 = 1e-12;

/// Positive sensor weights `c_i`, kept in input order with a cached
/// non-increasing sort order.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSequence {
    values: Vec<f64>,
    sort_order: Vec<usize>,
}

impl CoefficientSequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Contract("coefficient sequence is empty".into()));
        }
        if let Some((i, c)) = values.iter().enumerate().find(|(_, c)| !(**c > 0.0 && c.is_finite())) {
            return Err(Error::Contract(format!("coefficient {i} = {c} is not positive and finite")));
        }
        let mut sort_order: Vec<usize> = (0..values.len()).collect();
        // stable: ties keep original index order
        sort_order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
        Ok(Self { values, sort_order })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Indices into `values()` in non-increasing order of value.
    pub fn sort_order(&self) -> &[usize] {
        &self.sort_order
    }

    pub fn squares(&self) -> Vec<f64> {
        self.values.iter().map(|c| c * c).collect()
    }

    /// Squared values in non-increasing order.
    pub fn sorted_squares(&self) -> Vec<f64> {
        self.sort_order.iter().map(|&i| self.values[i] * self.values[i]).collect()
    }

    pub fn sum_sq(&self) -> f64 {
        self.values.iter().map(|c| c * c).sum()
    }

    pub fn max(&self) -> f64 {
        self.values[self.sort_order[0]]
    }

    /// Sub-sequence at the given original indices.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Self::new(indices.iter().map(|&i| self.values[i]).collect())
    }

    pub fn scaled(&self, t: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|c| c * t).collect())
    }
}

/// Outcome of [`irregularity`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IrregularityReport {
    pub k0: usize,
    pub dimension: usize,
    pub regular: bool,
    /// Original indices of the `k0` largest coefficients.
    pub dominant: Vec<usize>,
    /// Original indices of the remaining coefficients, in sorted order.
    pub residual: Vec<usize>,
}

fn check_dimension(n: usize, d: usize) -> Result<()> {
    if d < 1 || d > n {
        return Err(Error::Contract(format!("need 1 ≤ d ≤ n, got d = {d}, n = {n}")));
    }
    Ok(())
}

/// Smallest `k ≥ 0` with `c_{k+1}² ≤ (1/(d−k)) Σ_{i>k} c_i²` on the sorted
/// sequence. Equality counts as satisfied.
pub fn irregularity(coeffs: &CoefficientSequence, d: usize) -> Result<IrregularityReport> {
    let n = coeffs.len();
    check_dimension(n, d)?;
    let sq = coeffs.sorted_squares();
    let total = coeffs.sum_sq();
    let slack = REGULARITY_SLACK * total;

    // tail[k] = Σ_{i ≥ k} sq[i]
    let mut tail = vec![0.0; n + 1];
    for k in (0..n).rev() {
        tail[k] = tail[k + 1] + sq[k];
    }
    let k0 = (0..d)
        .find(|&k| sq[k] * (d - k) as f64 <= tail[k] + slack * (d - k) as f64)
        .unwrap_or(d - 1);

    let order = coeffs.sort_order();
    Ok(IrregularityReport {
        k0,
        dimension: d,
        regular: k0 == 0,
        dominant: order[..k0].to_vec(),
        residual: order[k0..].to_vec(),
    })
}

/// Fundamental inequality `max_j c_j² ≤ (1/d) Σ c_i²`.
pub fn is_regular(coeffs: &CoefficientSequence, d: usize) -> Result<bool> {
    check_dimension(coeffs.len(), d)?;
    let total = coeffs.sum_sq();
    let max = coeffs.max();
    Ok(max * max <= total / d as f64 + REGULARITY_SLACK * total)
}

/// Range form of the fundamental inequality for equal-noise bearing-only or
/// RSS networks: `max 1/‖r_j‖² ≤ (1/d) Σ 1/‖r_i‖²`. `true` means no sensor
/// is much closer to the target than the others.
pub fn range_regularity_check(ranges: &[f64], d: usize) -> Result<bool> {
    if let Some(r) = ranges.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::Contract(format!("range {r} is not positive")));
    }
    let inverse = CoefficientSequence::new(ranges.iter().map(|r| 1.0 / r).collect())?;
    is_regular(&inverse, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(v: &[f64]) -> CoefficientSequence {
        CoefficientSequence::new(v.to_vec()).unwrap()
    }

    #[test]
    fn equal_sequences_are_regular() {
        for n in 1..8 {
            for d in 1..=n {
                assert_eq!(irregularity(&seq(&vec![2.5; n]), d).unwrap().k0, 0);
            }
        }
    }

    #[test]
    fn one_dominant_of_four() {
        let r = irregularity(&seq(&[10.0, 1.0, 1.0, 1.0]), 3).unwrap();
        assert_eq!(r.k0, 1);
        assert!(!r.regular);
        assert_eq!(r.dominant, vec![0]);
        assert_eq!(r.residual, vec![1, 2, 3]);
    }

    #[test]
    fn two_dominant_depends_on_dimension() {
        let s = seq(&[10.0, 10.0, 1.0, 1.0]);
        assert_eq!(irregularity(&s, 2).unwrap().k0, 0);
        assert_eq!(irregularity(&s, 3).unwrap().k0, 2);
    }

    #[test]
    fn input_order_is_preserved() {
        let s = seq(&[1.0, 10.0, 1.0, 10.0]);
        let r = irregularity(&s, 3).unwrap();
        assert_eq!(r.dominant, vec![1, 3]);
        assert_eq!(r.residual, vec![0, 2]);
    }

    #[test]
    fn worked_2d_sequence_is_regular() {
        let c: Vec<f64> = [0.0400f64, 0.0278, 0.0204, 0.0156, 0.0123, 0.0100]
            .iter()
            .map(|s| s.sqrt())
            .collect();
        assert!(is_regular(&seq(&c), 2).unwrap());
        assert!(!is_regular(&seq(&[10.0, 1.0, 1.0, 1.0]), 3).unwrap());
        assert!(is_regular(&seq(&[0.7; 3]), 3).unwrap());
    }

    #[test]
    fn range_form() {
        assert!(range_regularity_check(&[4.0; 5], 3).unwrap());
        assert!(range_regularity_check(&[5.0, 6.0, 7.0, 8.0, 9.0, 10.0], 2).unwrap());
        assert!(!range_regularity_check(&[1.0, 100.0, 100.0, 100.0], 3).unwrap());
        assert!(range_regularity_check(&[1.0, -2.0], 2).is_err());
    }

    #[test]
    fn dimension_contract() {
        let s = seq(&[1.0, 2.0]);
        assert!(irregularity(&s, 3).is_err());
        assert!(irregularity(&s, 0).is_err());
        assert!(is_regular(&s, 3).is_err());
        assert!(CoefficientSequence::new(vec![1.0, 0.0]).is_err());
        assert!(CoefficientSequence::new(vec![]).is_err());
    }

    #[test]
    fn geometric_decay_drives_k0_to_d_minus_one() {
        for d in 2..=4 {
            let v: Vec<f64> = (0..d).map(|i| 10f64.powi((d - i) as i32)).collect();
            assert_eq!(irregularity(&seq(&v), d).unwrap().k0, d - 1);
        }
    }

    fn sequences() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.01f64..10.0, 1..10)
    }

    proptest! {
        #[test]
        fn k0_bounded_and_matches_is_regular(v in sequences()) {
            let s = seq(&v);
            for d in 1..=v.len() {
                let r = irregularity(&s, d).unwrap();
                prop_assert!(r.k0 < d);
                prop_assert_eq!(r.regular, is_regular(&s, d).unwrap());
            }
        }

        #[test]
        fn k0_non_decreasing_in_dimension(v in sequences()) {
            let s = seq(&v);
            let ks: Vec<usize> = (1..=v.len()).map(|d| irregularity(&s, d).unwrap().k0).collect();
            prop_assert!(ks.windows(2).all(|w| w[0] <= w[1]), "{:?}", ks);
        }

        #[test]
        fn k0_scale_invariant(v in sequences(), t in 1e-3f64..1e3) {
            let s = seq(&v);
            let scaled = s.scaled(t).unwrap();
            for d in 1..=v.len() {
                prop_assert_eq!(irregularity(&s, d).unwrap().k0, irregularity(&scaled, d).unwrap().k0);
            }
        }
    }
}
