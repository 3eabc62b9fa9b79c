//! Placements of sensors around a target and the equivalence relation
//! between them (permutation, per-sensor flips about the target, and a
//! global orthogonal transform).

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::coefficients::CoefficientSequence;
use crate::error::{Error, Result};
use crate::linalg;

/// Largest sensor count accepted by [`placements_equivalent`].
pub const MAX_EQUIVALENCE_SENSORS: usize = 8;

/// Default bearing-space tolerance for [`placements_equivalent`].
pub const DEFAULT_EQUIVALENCE_TOL: f64 = 1e-6;

/// Unit vector pointing from the target towards a sensor.
pub fn bearing_of(r: &DVector<f64>) -> Result<DVector<f64>> {
    // scale first so tiny but nonzero vectors do not underflow when squared
    let largest = r.amax();
    if largest == 0.0 || !largest.is_finite() {
        return Err(Error::DegenerateGeometry(format!(
            "relative position has norm {}; a sensor sits on the target",
            r.norm()
        )));
    }
    let scaled = r / largest;
    Ok(&scaled / scaled.norm())
}

/// Target estimate plus sensor positions relative to it.
///
/// Bearings and ranges are derived once at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    target: DVector<f64>,
    relative: Vec<DVector<f64>>,
    bearings: Vec<DVector<f64>>,
    ranges: Vec<f64>,
}

impl Placement {
    pub fn new(target: DVector<f64>, relative: Vec<DVector<f64>>) -> Result<Self> {
        let d = target.len();
        if d == 0 {
            return Err(Error::Contract("placement dimension must be positive".into()));
        }
        if relative.is_empty() {
            return Err(Error::Contract("placement needs at least one sensor".into()));
        }
        if let Some(i) = relative.iter().position(|r| r.len() != d) {
            return Err(Error::Contract(format!(
                "sensor {i} has dimension {}, target has {d}",
                relative[i].len()
            )));
        }
        if target.iter().chain(relative.iter().flatten()).any(|x| !x.is_finite()) {
            return Err(Error::Contract("placement coordinates must be finite".into()));
        }
        let mut bearings = Vec::with_capacity(relative.len());
        let mut ranges = Vec::with_capacity(relative.len());
        for (i, r) in relative.iter().enumerate() {
            let g = bearing_of(r).map_err(|_| {
                Error::DegenerateGeometry(format!("sensor {i} coincides with the target"))
            })?;
            ranges.push(r.norm());
            bearings.push(g);
        }
        Ok(Self { target, relative, bearings, ranges })
    }

    /// Builds a placement from absolute sensor positions.
    pub fn from_sensor_positions(target: DVector<f64>, sensors: &[DVector<f64>]) -> Result<Self> {
        if let Some(i) = sensors.iter().position(|s| s.len() != target.len()) {
            return Err(Error::Contract(format!("sensor {i} has the wrong dimension")));
        }
        let relative = sensors.iter().map(|s| s - &target).collect();
        Self::new(target, relative)
    }

    /// Target at the origin, every sensor at unit range along `bearings`.
    pub fn from_bearings(bearings: Vec<DVector<f64>>) -> Result<Self> {
        let d = bearings.first().map_or(0, |g| g.len());
        let unit = bearings
            .iter()
            .map(bearing_of)
            .collect::<Result<Vec<_>>>()?;
        Self::new(DVector::zeros(d), unit)
    }

    /// Same bearings, new target and ranges.
    pub fn with_ranges(&self, target: DVector<f64>, ranges: &[f64]) -> Result<Self> {
        if ranges.len() != self.len() {
            return Err(Error::Contract(format!(
                "{} ranges supplied for {} sensors",
                ranges.len(),
                self.len()
            )));
        }
        if target.len() != self.dimension() {
            return Err(Error::Contract("target dimension mismatch".into()));
        }
        if let Some(&r) = ranges.iter().find(|&&r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::DegenerateGeometry(format!("range {r} is not positive")));
        }
        let relative = self.bearings.iter().zip(ranges).map(|(g, &r)| g * r).collect();
        Self::new(target, relative)
    }

    pub fn dimension(&self) -> usize {
        self.target.len()
    }

    pub fn len(&self) -> usize {
        self.relative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relative.is_empty()
    }

    pub fn target(&self) -> &DVector<f64> {
        &self.target
    }

    pub fn relative_positions(&self) -> &[DVector<f64>] {
        &self.relative
    }

    pub fn bearings(&self) -> &[DVector<f64>] {
        &self.bearings
    }

    pub fn ranges(&self) -> &[f64] {
        &self.ranges
    }

    pub fn sensor_positions(&self) -> Vec<DVector<f64>> {
        self.relative.iter().map(|r| r + &self.target).collect()
    }
}

/// A d×d orthogonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalTransform(DMatrix<f64>);

impl OrthogonalTransform {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Contract("orthogonal transform must be square".into()));
        }
        let d = matrix.nrows();
        let defect = (matrix.transpose() * &matrix - DMatrix::identity(d, d)).amax();
        if defect > 1e-12 {
            return Err(Error::Contract(format!("UᵀU deviates from I by {defect:e}")));
        }
        Ok(Self(matrix))
    }

    pub fn identity(d: usize) -> Self {
        Self(DMatrix::identity(d, d))
    }

    /// Counter-clockwise planar rotation.
    pub fn rotation_2d(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self(DMatrix::from_row_slice(2, 2, &[c, -s, s, c]))
    }

    /// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the
    /// sign of R's diagonal folded into Q).
    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        let gauss = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let qr = gauss.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..d {
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        // re-orthonormalize to push UᵀU − I well below 1e-12
        let cols: Vec<DVector<f64>> = q.column_iter().map(|c| c.into_owned()).collect();
        let basis = linalg::complete_orthonormal_basis(&cols, d);
        Self(DMatrix::from_columns(&basis))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.nrows()
    }
}

/// Per-sensor ±1 flips about the target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignPattern(Vec<i8>);

impl SignPattern {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Contract("signs must be +1 or -1".into()));
        }
        Ok(Self(signs))
    }

    pub fn all_positive(n: usize) -> Self {
        Self(vec![1; n])
    }

    /// All positive except `index`.
    pub fn flip_one(n: usize, index: usize) -> Self {
        let mut s = vec![1; n];
        s[index] = -1;
        Self(s)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        f64::from(self.0[i])
    }
}

/// A permutation of sensor indices; `map[i]` is the new index of sensor `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &j in &map {
            if j >= map.len() || std::mem::replace(&mut seen[j], true) {
                return Err(Error::Contract(format!("{map:?} is not a permutation")));
            }
        }
        Ok(Self(map))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Self(inv)
    }
}

/// Applies `r'_{perm(i)} = s_i · U r_i`; the target is kept.
pub fn transform_placement(
    pl: &Placement,
    u: &OrthogonalTransform,
    signs: &SignPattern,
    perm: &Permutation,
) -> Result<Placement> {
    let n = pl.len();
    if u.dimension() != pl.dimension() {
        return Err(Error::Contract(format!(
            "transform is {0}×{0}, placement is {1}-dimensional",
            u.dimension(),
            pl.dimension()
        )));
    }
    if signs.len() != n || perm.len() != n {
        return Err(Error::Contract(format!(
            "sign pattern ({}) and permutation ({}) must cover {n} sensors",
            signs.len(),
            perm.len()
        )));
    }
    let mut relative = vec![DVector::zeros(pl.dimension()); n];
    for (i, r) in pl.relative_positions().iter().enumerate() {
        relative[perm.0[i]] = u.matrix() * r * signs.get(i);
    }
    Placement::new(pl.target().clone(), relative)
}

/// Transform that carries one placement's bearings onto another's.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceWitness {
    pub transform: OrthogonalTransform,
    pub signs: SignPattern,
    pub permutation: Permutation,
    /// Largest bearing mismatch after applying the witness.
    pub residual: f64,
}

/// Decides whether two placements are equivalent and returns a witness.
///
/// The witness is oriented so that
/// `transform_placement(pl_a, &w.transform, &w.signs, &w.permutation)`
/// reproduces the bearings of `pl_b` to within `tol`. Sensors may only be
/// exchanged when their coefficients agree to `1e-9 · max c`.
///
/// The search is exhaustive over coefficient-compatible permutations and
/// sign patterns, pruned by comparing absolute Gram entries, with an
/// orthogonal Procrustes fit at every complete candidate.
pub fn placements_equivalent(
    pl_a: &Placement,
    pl_b: &Placement,
    coeffs: &CoefficientSequence,
    tol: f64,
) -> Result<Option<EquivalenceWitness>> {
    let n = pl_a.len();
    if pl_b.len() != n || pl_a.dimension() != pl_b.dimension() {
        return Err(Error::Contract(format!(
            "cannot compare {}×{} with {}×{} placements",
            n,
            pl_a.dimension(),
            pl_b.len(),
            pl_b.dimension()
        )));
    }
    if coeffs.len() != n {
        return Err(Error::Contract(format!("{} coefficients for {n} sensors", coeffs.len())));
    }
    if n > MAX_EQUIVALENCE_SENSORS {
        return Err(Error::Unsupported(format!(
            "equivalence search is limited to {MAX_EQUIVALENCE_SENSORS} sensors, got {n}"
        )));
    }
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::Contract("tolerance must be nonnegative".into()));
    }

    let a = pl_a.bearings();
    let b = pl_b.bearings();
    let c = coeffs.values();
    let tie = 1e-9 * coeffs.max();
    let gram_a = DMatrix::from_fn(n, n, |i, j| a[i].dot(&a[j]));
    let gram_b = DMatrix::from_fn(n, n, |i, j| b[i].dot(&b[j]));

    let mut search = Search {
        a,
        b,
        c,
        tie,
        tol,
        gram_tol: 2.0 * tol + tol * tol,
        gram_a,
        gram_b,
        sigma: Vec::with_capacity(n),
        signs: Vec::with_capacity(n),
        used: vec![false; n],
    };
    Ok(search.run())
}

struct Search<'a> {
    a: &'a [DVector<f64>],
    b: &'a [DVector<f64>],
    c: &'a [f64],
    tie: f64,
    tol: f64,
    gram_tol: f64,
    gram_a: DMatrix<f64>,
    gram_b: DMatrix<f64>,
    // b_i ≈ signs[i] · U a_{sigma[i]}
    sigma: Vec<usize>,
    signs: Vec<f64>,
    used: Vec<bool>,
}

impl Search<'_> {
    fn run(&mut self) -> Option<EquivalenceWitness> {
        let i = self.sigma.len();
        let n = self.a.len();
        if i == n {
            return self.fit();
        }
        for j in 0..n {
            if self.used[j] || (self.c[j] - self.c[i]).abs() > self.tie {
                continue;
            }
            // A global sign change is absorbed by −U, so sensor 0 keeps +1.
            let sign_options: &[f64] = if i == 0 { &[1.0] } else { &[1.0, -1.0] };
            for &s in sign_options {
                if !self.consistent(i, j, s) {
                    continue;
                }
                self.used[j] = true;
                self.sigma.push(j);
                self.signs.push(s);
                if let Some(w) = self.run() {
                    return Some(w);
                }
                self.sigma.pop();
                self.signs.pop();
                self.used[j] = false;
            }
        }
        None
    }

    fn consistent(&self, i: usize, j: usize, s: f64) -> bool {
        (0..i).all(|k| {
            let lhs = s * self.signs[k] * self.gram_a[(j, self.sigma[k])];
            (lhs - self.gram_b[(i, k)]).abs() <= self.gram_tol
        })
    }

    fn fit(&self) -> Option<EquivalenceWitness> {
        let source: Vec<DVector<f64>> = self
            .sigma
            .iter()
            .zip(&self.signs)
            .map(|(&j, &s)| &self.a[j] * s)
            .collect();
        let u = linalg::procrustes(&source, self.b);
        let residual = source
            .iter()
            .zip(self.b)
            .map(|(x, y)| (&u * x - y).norm())
            .fold(0.0, f64::max);
        if residual > self.tol {
            return None;
        }
        // Convert b_i ≈ t_i U a_{σ(i)} into the transform_placement form
        // b_{π(j)} ≈ s_j U a_j with π = σ⁻¹ and s_j = t_{π(j)}.
        let sigma = Permutation(self.sigma.clone());
        let pi = sigma.inverse();
        let signs = pi.0.iter().map(|&i| self.signs[i] as i8).collect();
        Some(EquivalenceWitness {
            transform: OrthogonalTransform(u),
            signs: SignPattern(signs),
            permutation: pi,
            residual,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(x)
    }

    fn triangle_like() -> Placement {
        Placement::new(
            v(&[1.0, 2.0]),
            vec![v(&[3.0, 0.0]), v(&[-1.0, 2.0]), v(&[0.5, -4.0])],
        )
        .unwrap()
    }

    #[test]
    fn bearing_examples() {
        assert_eq!(bearing_of(&v(&[3.0, 4.0])).unwrap(), v(&[0.6, 0.8]));
        assert_eq!(bearing_of(&v(&[0.0, 0.0, 5.0])).unwrap(), v(&[0.0, 0.0, 1.0]));
        assert!(matches!(bearing_of(&v(&[0.0, 0.0])), Err(Error::DegenerateGeometry(_))));
        // 1e-300 is representable, so the norm does not underflow.
        let g = bearing_of(&v(&[1e-300, 0.0])).unwrap();
        assert_eq!(g, v(&[1.0, 0.0]));
        assert!(bearing_of(&v(&[1e-320 * 1e-10, 0.0])).is_err());
    }

    #[test]
    fn placement_rejects_coincident_sensor() {
        let err = Placement::from_sensor_positions(v(&[1.0, 1.0]), &[v(&[2.0, 1.0]), v(&[1.0, 1.0])]);
        assert!(matches!(err, Err(Error::DegenerateGeometry(_))));
    }

    #[test]
    fn identity_transform_is_noop() {
        let pl = triangle_like();
        let out = transform_placement(
            &pl,
            &OrthogonalTransform::identity(2),
            &SignPattern::all_positive(3),
            &Permutation::identity(3),
        )
        .unwrap();
        assert_eq!(out, pl);
    }

    #[test]
    fn transform_rejects_mismatch() {
        let pl = triangle_like();
        let err = transform_placement(
            &pl,
            &OrthogonalTransform::identity(3),
            &SignPattern::all_positive(3),
            &Permutation::identity(3),
        );
        assert!(matches!(err, Err(Error::Contract(_))));
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
        assert!(SignPattern::new(vec![1, 0]).is_err());
    }

    #[test]
    fn rotated_copy_is_equivalent_with_valid_witness() {
        let pl = triangle_like();
        let rotated = transform_placement(
            &pl,
            &OrthogonalTransform::rotation_2d(-60f64.to_radians()),
            &SignPattern::flip_one(3, 2),
            &Permutation::identity(3),
        )
        .unwrap();
        let coeffs = CoefficientSequence::new(vec![1.0; 3]).unwrap();
        let w = placements_equivalent(&pl, &rotated, &coeffs, 1e-9).unwrap().expect("equivalent");
        let mapped = transform_placement(&pl, &w.transform, &w.signs, &w.permutation).unwrap();
        for (x, y) in mapped.bearings().iter().zip(rotated.bearings()) {
            assert!((x - y).norm() < 1e-9);
        }
    }

    #[test]
    fn permutation_respects_coefficients() {
        let a = Placement::from_bearings(vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        let b = Placement::from_bearings(vec![v(&[0.0, 1.0]), v(&[1.0, 0.0])]).unwrap();
        let equal = CoefficientSequence::new(vec![1.0, 1.0]).unwrap();
        assert!(placements_equivalent(&a, &b, &equal, 1e-9).unwrap().is_some());
        // Swapping is also realisable by a reflection, so distinct
        // coefficients still leave them equivalent.
        let distinct = CoefficientSequence::new(vec![2.0, 1.0]).unwrap();
        assert!(placements_equivalent(&a, &b, &distinct, 1e-9).unwrap().is_some());
        // ...but not when the pair's angle changes.
        let c = Placement::from_bearings(vec![v(&[1.0, 0.0]), v(&[0.6, 0.8])]).unwrap();
        assert!(placements_equivalent(&a, &c, &distinct, 1e-6).unwrap().is_none());
    }

    #[test]
    fn random_replacement_breaks_equivalence() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pl = triangle_like();
        let mut rel = pl.relative_positions().to_vec();
        let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        rel[1] = v(&[angle.cos(), angle.sin()]) * 2.0;
        let other = Placement::new(pl.target().clone(), rel).unwrap();
        let coeffs = CoefficientSequence::new(vec![1.0; 3]).unwrap();
        assert!(placements_equivalent(&pl, &other, &coeffs, DEFAULT_EQUIVALENCE_TOL)
            .unwrap()
            .is_none());
    }

    #[test]
    fn equivalence_size_limit() {
        let bearings: Vec<_> = (0..9).map(|k| v(&[(k as f64).cos(), (k as f64).sin()])).collect();
        let pl = Placement::from_bearings(bearings).unwrap();
        let coeffs = CoefficientSequence::new(vec![1.0; 9]).unwrap();
        assert!(matches!(
            placements_equivalent(&pl, &pl, &coeffs, 1e-6),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn random_orthogonal_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in 2..=3 {
            let u = OrthogonalTransform::random(d, &mut rng);
            assert!(OrthogonalTransform::new(u.matrix().clone()).is_ok());
        }
    }
}
