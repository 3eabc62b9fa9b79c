//! Explicit constructors for optimal placements.
//!
//! Every constructor returns a [`Placement`] with the target at the origin
//! and unit ranges, so `relative_positions() == bearings()`. Attach real
//! ranges afterwards with [`Placement::with_ranges`]. Sensor order always
//! follows the input coefficient order.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::coefficients::{irregularity, is_regular, CoefficientSequence, REGULARITY_SLACK};
use crate::error::{Error, Result};
use crate::flow::{self, FlowConfig, Integrator, Outcome};
use crate::geometry::Placement;
use crate::linalg;
use crate::optimality::{self, certify_bearings, OptimalityCertificate};

/// Tolerance every analytic construction must certify at.
pub const CONSTRUCTION_TOL: f64 = 1e-9;

fn axis(d: usize, k: usize) -> DVector<f64> {
    DVector::from_fn(d, |i, _| if i == k { 1.0 } else { 0.0 })
}

fn unit_2d(angle: f64) -> DVector<f64> {
    DVector::from_vec(vec![angle.cos(), angle.sin()])
}

fn infeasible_2d(coeffs: &CoefficientSequence) -> Error {
    let total = coeffs.sum_sq();
    Error::Infeasible(format!(
        "no 2D tight placement exists: max c² = {:.6e} exceeds half the total {:.6e} \
         (a 2D regular optimal placement requires max c_j² ≤ ½ Σ c_i²)",
        coeffs.max().powi(2),
        total / 2.0
    ))
}

/// Split of a planar coefficient sequence into the three sides of a
/// triangle: `ℓ1 = c_1² + … + c_{n0−1}²`, `ℓ2 = c_{n0}²`, `ℓ3` the rest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleDecomposition {
    /// 1-based split index, `2 ≤ n0 ≤ n`.
    pub n0: usize,
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    /// Interior angle between sides ℓ1 and ℓ2, radians.
    pub alpha12: f64,
    /// Interior angle between sides ℓ1 and ℓ3, radians (0 when ℓ3 = 0).
    pub alpha13: f64,
}

fn law_of_cosines(adjacent_a: f64, adjacent_b: f64, opposite: f64) -> f64 {
    let cos = (adjacent_a * adjacent_a + adjacent_b * adjacent_b - opposite * opposite)
        / (2.0 * adjacent_a * adjacent_b);
    cos.clamp(-1.0, 1.0).acos()
}

pub fn triangle_decomposition(coeffs: &CoefficientSequence) -> Result<TriangleDecomposition> {
    let n = coeffs.len();
    if n < 2 {
        return Err(Error::Contract(format!("planar construction needs n ≥ 2, got {n}")));
    }
    if !is_regular(coeffs, 2)? {
        return Err(infeasible_2d(coeffs));
    }
    let sq = coeffs.squares();
    let total = coeffs.sum_sq();
    let half = 0.5 * total;
    let slack = REGULARITY_SLACK * total;

    // smallest n0 ≥ 2 with c_1²+…+c_{n0}² ≥ ½Σ; the companion inequality
    // on the shorter prefix then holds by minimality (or regularity for n0 = 2)
    let mut prefix = sq[0];
    let mut n0 = n;
    for (k, s) in sq.iter().enumerate().skip(1) {
        prefix += s;
        if prefix >= half - slack {
            n0 = k + 1;
            break;
        }
    }
    let l1: f64 = sq[..n0 - 1].iter().sum();
    let l2 = sq[n0 - 1];
    let l3: f64 = sq[n0..].iter().sum();
    let alpha12 = law_of_cosines(l1, l2, l3);
    let alpha13 = if l3 > 0.0 { law_of_cosines(l1, l3, l2) } else { 0.0 };
    Ok(TriangleDecomposition { n0, l1, l2, l3, alpha12, alpha13 })
}

/// Planar regular optimal placement for any coefficients satisfying
/// `max c_j² ≤ ½ Σ c_i²`.
pub fn construct_2d(coeffs: &CoefficientSequence) -> Result<Placement> {
    construct_2d_detailed(coeffs).map(|(pl, _)| pl)
}

/// [`construct_2d`] plus the triangle it was built from.
///
/// Doubled angles `2θ_i` place `c_i² [cos 2θ_i, sin 2θ_i]` along the sides
/// of the (ℓ1, ℓ2, ℓ3) triangle so they sum to zero; halving recovers the
/// bearings. Each bearing is then flipped so its first significant
/// component is positive.
pub fn construct_2d_detailed(coeffs: &CoefficientSequence) -> Result<(Placement, TriangleDecomposition)> {
    let tri = triangle_decomposition(coeffs)?;
    let first = unit_2d(0.0);
    let pivot = unit_2d(0.5 * (PI + tri.alpha12));
    let rest = unit_2d(0.5 * (PI - tri.alpha13));
    let bearings = (1..=coeffs.len())
        .map(|i| {
            let g = match i.cmp(&tri.n0) {
                std::cmp::Ordering::Less => first.clone(),
                std::cmp::Ordering::Equal => pivot.clone(),
                std::cmp::Ordering::Greater => rest.clone(),
            };
            linalg::canonical_sign(g)
        })
        .collect();
    Ok((Placement::from_bearings(bearings)?, tri))
}

/// Canonical orthonormal basis, the optimal placement whenever `n = d`.
pub fn construct_square(coeffs: &CoefficientSequence, d: usize) -> Result<Placement> {
    if coeffs.len() != d {
        return Err(Error::Contract(format!(
            "square construction needs n = d, got n = {}, d = {d}",
            coeffs.len()
        )));
    }
    Placement::from_bearings((0..d).map(|k| axis(d, k)).collect())
}

/// Augmentation vector `x_j = ±√((1/d) Σ c_i² − c_j²)` completing the
/// frame matrix `Φ = [c_1 g_1, …, c_{d+1} g_{d+1}]` to a scaled orthogonal
/// `(d+1)×(d+1)` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentationVector(pub DVector<f64>);

pub fn augmentation_vector(
    coeffs: &CoefficientSequence,
    d: usize,
    signs: &crate::geometry::SignPattern,
) -> Result<AugmentationVector> {
    let n = coeffs.len();
    if n != d + 1 {
        return Err(Error::Contract(format!("need n = d + 1, got n = {n}, d = {d}")));
    }
    if signs.len() != n {
        return Err(Error::Contract(format!("{} signs for {n} sensors", signs.len())));
    }
    if !is_regular(coeffs, d)? {
        return Err(Error::Infeasible(format!(
            "coefficients are irregular in dimension {d}: (1/d) Σ c_i² − c_j² < 0 for the largest c_j"
        )));
    }
    let share = coeffs.sum_sq() / d as f64;
    Ok(AugmentationVector(DVector::from_iterator(
        n,
        coeffs.values().iter().enumerate().map(|(j, c)| signs.get(j) * (share - c * c).max(0.0).sqrt()),
    )))
}

/// Output of [`construct_dplus1_detailed`].
#[derive(Debug, Clone, PartialEq)]
pub struct DPlusOneConstruction {
    pub placement: Placement,
    pub augmentation: AugmentationVector,
    /// `d × (d+1)` frame matrix with columns `c_j g_j`.
    pub phi: DMatrix<f64>,
}

/// The unique (up to equivalence) regular optimal placement for `n = d + 1`.
pub fn construct_dplus1(
    coeffs: &CoefficientSequence,
    d: usize,
    signs: &crate::geometry::SignPattern,
) -> Result<Placement> {
    construct_dplus1_detailed(coeffs, d, signs).map(|c| c.placement)
}

pub fn construct_dplus1_detailed(
    coeffs: &CoefficientSequence,
    d: usize,
    signs: &crate::geometry::SignPattern,
) -> Result<DPlusOneConstruction> {
    let x = augmentation_vector(coeffs, d, signs)?;
    let n = d + 1;
    let scale = (coeffs.sum_sq() / d as f64).sqrt();
    // Left singular vectors of the single column x: u_1 = x/‖x‖ (the only
    // nonzero singular value) followed by an orthonormal basis of x^⊥.
    let basis = linalg::complete_orthonormal_basis(std::slice::from_ref(&x.0), n);
    let rows: Vec<DVector<f64>> = basis[1..].iter().map(|u| linalg::canonical_sign(u.clone())).collect();
    let phi = DMatrix::from_fn(d, n, |i, j| scale * rows[i][j]);
    let placement = placement_from_frame(&phi, coeffs)?;
    Ok(DPlusOneConstruction { placement, augmentation: x, phi })
}

fn placement_from_frame(phi: &DMatrix<f64>, coeffs: &CoefficientSequence) -> Result<Placement> {
    let bearings = phi
        .column_iter()
        .zip(coeffs.values())
        .map(|(col, c)| col.into_owned() / *c)
        .collect();
    Placement::from_bearings(bearings)
}

/// Five sensors in 3D: build the planar optimal placement of the dual
/// norms `c'_j = √((1/3) Σ c_i² − c_j²)`, then take the orthogonal
/// complement of its row space in R⁵.
pub fn construct_3d_five(coeffs: &CoefficientSequence) -> Result<Placement> {
    if coeffs.len() != 5 {
        return Err(Error::Contract(format!("five-sensor lift needs n = 5, got {}", coeffs.len())));
    }
    let report = irregularity(coeffs, 3)?;
    if !report.regular {
        return Err(Error::Infeasible(format!(
            "coefficients are irregular in 3D (k0 = {}); no five-sensor tight placement exists",
            report.k0
        )));
    }
    let share = coeffs.sum_sq() / 3.0;
    let duals: Vec<f64> = coeffs.values().iter().map(|c| (share - c * c).max(0.0).sqrt()).collect();
    let cutoff = 1e-12 * share.sqrt();
    let active: Vec<usize> = (0..5).filter(|&j| duals[j] > cutoff).collect();
    let dual_seq = CoefficientSequence::new(active.iter().map(|&j| duals[j]).collect())?;
    if active.len() < 2 || !is_regular(&dual_seq, 2)? {
        return Err(Error::Internal(format!(
            "dual norms {duals:?} are not regular in 2D; the five-sensor lift cannot proceed"
        )));
    }
    let planar = construct_2d(&dual_seq)?;

    // Φ' is 2×5 with columns c'_j h_j (zero where c'_j vanishes).
    let mut phi_dual = DMatrix::<f64>::zeros(2, 5);
    for (k, &j) in active.iter().enumerate() {
        phi_dual.set_column(j, &(&planar.bearings()[k] * duals[j]));
    }
    let gram = &phi_dual * phi_dual.transpose();
    let defect = (&gram - DMatrix::identity(2, 2) * share).norm();
    if defect > CONSTRUCTION_TOL * share.max(1.0) {
        return Err(Error::Internal(format!("dual planar frame is not tight (defect {defect:e})")));
    }
    let row_space: Vec<DVector<f64>> = phi_dual.row_iter().map(|r| r.transpose() / share.sqrt()).collect();
    let basis = linalg::complete_orthonormal_basis(&row_space, 5);
    let rows: Vec<DVector<f64>> = basis[2..].iter().map(|u| linalg::canonical_sign(u.clone())).collect();
    let phi = DMatrix::from_fn(3, 5, |i, j| share.sqrt() * rows[i][j]);
    placement_from_frame(&phi, coeffs)
}

/// Optimal placement for an irregular sequence: the `k0` dominant sensors on
/// the first `k0` axes, the rest regular optimal in the remaining axes.
pub fn construct_irregular(coeffs: &CoefficientSequence, d: usize) -> Result<Placement> {
    let report = irregularity(coeffs, d)?;
    if report.regular {
        return Err(Error::Contract("coefficients are regular; use a regular construction".into()));
    }
    let m = d - report.k0;
    let mut bearings = vec![DVector::zeros(d); coeffs.len()];
    for (axis_index, &i) in report.dominant.iter().enumerate() {
        bearings[i] = axis(d, axis_index);
    }
    match m {
        1 => {
            for &i in &report.residual {
                bearings[i] = axis(d, d - 1);
            }
        }
        2 => {
            let sub = construct_2d(&coeffs.subset(&report.residual)?)?;
            for (&i, h) in report.residual.iter().zip(sub.bearings()) {
                let mut g = DVector::zeros(d);
                g[report.k0] = h[0];
                g[report.k0 + 1] = h[1];
                bearings[i] = g;
            }
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "irregular construction with a {m}-dimensional residual"
            )))
        }
    }
    Placement::from_bearings(bearings)
}

/// Concatenates disjoint regular optimal placements; the union is regular
/// optimal. The target is taken from the first part.
pub fn union_placements(parts: &[(Placement, CoefficientSequence)]) -> Result<(Placement, CoefficientSequence)> {
    let (first, _) = parts.first().ok_or_else(|| Error::Contract("no parts to unite".into()))?;
    let d = first.dimension();
    let mut relative = Vec::new();
    let mut values = Vec::new();
    for (k, (pl, coeffs)) in parts.iter().enumerate() {
        if pl.dimension() != d {
            return Err(Error::Contract(format!(
                "part {k} is {}-dimensional, part 0 is {d}-dimensional",
                pl.dimension()
            )));
        }
        if coeffs.len() != pl.len() {
            return Err(Error::Contract(format!("part {k}: {} coefficients for {} sensors", coeffs.len(), pl.len())));
        }
        check_regular_optimal(k, pl, coeffs)?;
        relative.extend(pl.relative_positions().iter().cloned());
        values.extend_from_slice(coeffs.values());
    }
    Ok((Placement::new(first.target().clone(), relative)?, CoefficientSequence::new(values)?))
}

fn check_regular_optimal(part: usize, pl: &Placement, coeffs: &CoefficientSequence) -> Result<()> {
    let d = pl.dimension();
    if pl.len() < d || !is_regular(coeffs, d)? {
        return Err(Error::PartNotOptimal { part, reason: "coefficients are not regular".into() });
    }
    let cert = optimality::certify_general(coeffs, pl.bearings(), CONSTRUCTION_TOL)?;
    if !cert.verdict {
        return Err(Error::PartNotOptimal {
            part,
            reason: format!("frame deviation {:.3e} exceeds {CONSTRUCTION_TOL:e}", cert.deviation),
        });
    }
    Ok(())
}

/// Construction path chosen by [`construct`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Method {
    Irregular,
    Square,
    Planar,
    DPlusOne,
    FiveInThree,
    /// Union of regular sub-placements; original indices of each part.
    Union(Vec<Vec<usize>>),
    /// Gradient-flow refinement from a random start.
    GradientFlow { seed: u64, restarts: usize },
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Irregular => f.write_str("irregular"),
            Method::Square => f.write_str("square"),
            Method::Planar => f.write_str("planar"),
            Method::DPlusOne => f.write_str("d+1"),
            Method::FiveInThree => f.write_str("five-in-3d"),
            Method::Union(parts) => {
                let sizes: Vec<String> = parts.iter().map(|p| p.len().to_string()).collect();
                write!(f, "union({})", sizes.join("+"))
            }
            Method::GradientFlow { seed, restarts } => write!(f, "gradient-flow(seed={seed}, restarts={restarts})"),
        }
    }
}

/// Forced construction path, or automatic dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MethodChoice {
    #[default]
    Auto,
    Irregular,
    Square,
    Planar,
    DPlusOne,
    FiveInThree,
    Union,
    GradientFlow,
}

impl std::str::FromStr for MethodChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "auto" => MethodChoice::Auto,
            "irregular" => MethodChoice::Irregular,
            "square" => MethodChoice::Square,
            "planar" | "2d" => MethodChoice::Planar,
            "dplus1" | "d+1" => MethodChoice::DPlusOne,
            "five" | "five-in-3d" => MethodChoice::FiveInThree,
            "union" => MethodChoice::Union,
            "flow" | "gradient-flow" => MethodChoice::GradientFlow,
            other => return Err(Error::Contract(format!("unknown construction method `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstructOptions {
    pub method: MethodChoice,
    /// Seed for the gradient-flow fallback.
    pub seed: u64,
    pub max_restarts: usize,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        Self { method: MethodChoice::Auto, seed: 0, max_restarts: 3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Construction {
    pub placement: Placement,
    pub method: Method,
    pub certificate: OptimalityCertificate,
}

/// Optimal placement for any coefficients with `n ≥ d`, `d ∈ {2, 3}`.
pub fn construct(coeffs: &CoefficientSequence, d: usize) -> Result<Construction> {
    construct_with(coeffs, d, &ConstructOptions::default())
}

pub fn construct_with(coeffs: &CoefficientSequence, d: usize, options: &ConstructOptions) -> Result<Construction> {
    let n = coeffs.len();
    if !(2..=3).contains(&d) {
        return Err(Error::Unsupported(format!("dimension {d}; only 2 and 3 are supported")));
    }
    if n < d {
        return Err(Error::Contract(format!("need n ≥ d, got n = {n}, d = {d}")));
    }
    let regular = is_regular(coeffs, d)?;
    let choice = match options.method {
        MethodChoice::Auto if !regular => MethodChoice::Irregular,
        MethodChoice::Auto if n == d => MethodChoice::Square,
        MethodChoice::Auto if d == 2 => MethodChoice::Planar,
        MethodChoice::Auto if n == d + 1 => MethodChoice::DPlusOne,
        MethodChoice::Auto if n == 5 => MethodChoice::FiveInThree,
        MethodChoice::Auto => MethodChoice::Union,
        forced => forced,
    };

    let (placement, method, tol) = match choice {
        MethodChoice::Irregular => (construct_irregular(coeffs, d)?, Method::Irregular, CONSTRUCTION_TOL),
        MethodChoice::Square => (construct_square(coeffs, d)?, Method::Square, CONSTRUCTION_TOL),
        MethodChoice::Planar => {
            if d != 2 {
                return Err(Error::Contract("planar construction needs d = 2".into()));
            }
            (construct_2d(coeffs)?, Method::Planar, CONSTRUCTION_TOL)
        }
        MethodChoice::DPlusOne => {
            let signs = crate::geometry::SignPattern::all_positive(n);
            (construct_dplus1(coeffs, d, &signs)?, Method::DPlusOne, CONSTRUCTION_TOL)
        }
        MethodChoice::FiveInThree => {
            if d != 3 {
                return Err(Error::Contract("five-sensor lift needs d = 3".into()));
            }
            (construct_3d_five(coeffs)?, Method::FiveInThree, CONSTRUCTION_TOL)
        }
        MethodChoice::Union => {
            if !regular {
                return Err(Error::Infeasible("a union of regular parts needs regular coefficients".into()));
            }
            match greedy_partition(coeffs, d)? {
                Some(parts) => (union_of_partition(coeffs, d, &parts)?, Method::Union(parts), CONSTRUCTION_TOL),
                None => flow_fallback(coeffs, d, options)?,
            }
        }
        MethodChoice::GradientFlow => flow_fallback(coeffs, d, options)?,
        MethodChoice::Auto => unreachable!("auto resolved above"),
    };

    let certificate = certify_bearings(coeffs, placement.bearings(), tol)?;
    if !certificate.verdict {
        return Err(Error::Internal(format!(
            "{method} construction failed certification: regime {}, deviation {:.3e} > {tol:e}, error {:.3e}",
            certificate.regime, certificate.deviation, certificate.error
        )));
    }
    Ok(Construction { placement, method, certificate })
}

/// Peels the largest remaining coefficient together with the smallest
/// remaining ones into the smallest subset (size d..d+3) that is regular in
/// dimension `d`. `None` when the heuristic gets stuck.
pub fn greedy_partition(coeffs: &CoefficientSequence, d: usize) -> Result<Option<Vec<Vec<usize>>>> {
    let mut remaining: Vec<usize> = coeffs.sort_order().to_vec();
    let mut parts = Vec::new();
    let max_part = d + 2;
    while !remaining.is_empty() {
        let len = remaining.len();
        if len <= max_part && len >= d && is_regular(&coeffs.subset(&remaining)?, d)? {
            parts.push(std::mem::take(&mut remaining));
            break;
        }
        let mut taken = None;
        for size in d..=max_part.min(len) {
            if len - size != 0 && len - size < d {
                continue;
            }
            let mut subset = vec![remaining[0]];
            subset.extend_from_slice(&remaining[len - (size - 1)..]);
            if is_regular(&coeffs.subset(&subset)?, d)? {
                taken = Some(subset);
                break;
            }
        }
        let Some(subset) = taken else { return Ok(None) };
        remaining.retain(|i| !subset.contains(i));
        parts.push(subset);
    }
    Ok(Some(parts))
}

fn union_of_partition(coeffs: &CoefficientSequence, d: usize, parts: &[Vec<usize>]) -> Result<Placement> {
    let mut pieces = Vec::with_capacity(parts.len());
    for part in parts {
        let sub = coeffs.subset(part)?;
        let pl = match (sub.len(), d) {
            (n, _) if n == d => construct_square(&sub, d)?,
            (_, 2) => construct_2d(&sub)?,
            (n, _) if n == d + 1 => construct_dplus1(&sub, d, &crate::geometry::SignPattern::all_positive(n))?,
            (5, 3) => construct_3d_five(&sub)?,
            (n, _) => return Err(Error::Internal(format!("no regular constructor for a part of size {n}"))),
        };
        pieces.push((pl, sub));
    }
    let (united, _) = union_placements(&pieces)?;
    // restore the caller's sensor order
    let mut bearings = vec![DVector::zeros(d); coeffs.len()];
    for (g, &i) in united.bearings().iter().zip(parts.iter().flatten()) {
        bearings[i] = g.clone();
    }
    Placement::from_bearings(bearings)
}

fn flow_fallback(
    coeffs: &CoefficientSequence,
    d: usize,
    options: &ConstructOptions,
) -> Result<(Placement, Method, f64)> {
    // geometry is scale-free; normalise to Σ c² = n so one step size fits all
    let scale = (coeffs.len() as f64 / coeffs.sum_sq()).sqrt();
    let scaled = coeffs.scaled(scale)?;
    let config = FlowConfig {
        dt: 1e-2,
        t_end: 2_000.0,
        integrator: Integrator::RungeKutta4,
        // deviation ≈ √error, so this lands well inside CONSTRUCTION_TOL
        convergence_tol: 1e-22 * coeffs.len() as f64,
        stall_threshold: 1e-14,
        seed: options.seed,
        record_every: 1000,
        ..FlowConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let start = flow::random_placement(d, &vec![1.0; coeffs.len()], &mut rng)?;
    let run = flow::simulate_with_restarts(&start, &scaled, &config, options.max_restarts)?;
    let last = run.trajectory.final_placement().clone();
    if run.trajectory.outcome != Outcome::ConvergedOptimal {
        return Err(Error::Internal(format!(
            "gradient-flow fallback ended as {:?} with error {:.3e}",
            run.trajectory.outcome,
            run.trajectory.final_error()
        )));
    }
    Ok((
        Placement::from_bearings(last.bearings().to_vec())?,
        Method::GradientFlow { seed: options.seed, restarts: run.restarts },
        CONSTRUCTION_TOL,
    ))
}

/// Vertices of a regular n-gon on the unit circle.
pub fn regular_polygon(n: usize) -> Result<Placement> {
    if n < 3 {
        return Err(Error::Contract(format!("a polygon needs n ≥ 3, got {n}")));
    }
    Placement::from_bearings((0..n).map(|k| unit_2d(2.0 * PI * k as f64 / n as f64)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlatonicSolid {
    Tetrahedron,
    Octahedron,
    Hexahedron,
    Icosahedron,
    Dodecahedron,
}

impl PlatonicSolid {
    pub const ALL: [PlatonicSolid; 5] = [
        PlatonicSolid::Tetrahedron,
        PlatonicSolid::Octahedron,
        PlatonicSolid::Hexahedron,
        PlatonicSolid::Icosahedron,
        PlatonicSolid::Dodecahedron,
    ];

    pub fn vertex_count(self) -> usize {
        match self {
            PlatonicSolid::Tetrahedron => 4,
            PlatonicSolid::Octahedron => 6,
            PlatonicSolid::Hexahedron => 8,
            PlatonicSolid::Icosahedron => 12,
            PlatonicSolid::Dodecahedron => 20,
        }
    }
}

/// Vertex bearings of a Platonic solid centred on the target.
pub fn platonic_solid(solid: PlatonicSolid) -> Placement {
    let phi = 0.5 * (1.0 + 5f64.sqrt());
    let signs = [1.0, -1.0];
    let mut v: Vec<[f64; 3]> = Vec::new();
    match solid {
        PlatonicSolid::Tetrahedron => {
            v = vec![[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]];
        }
        PlatonicSolid::Octahedron => {
            for k in 0..3 {
                for s in signs {
                    let mut p = [0.0; 3];
                    p[k] = s;
                    v.push(p);
                }
            }
        }
        PlatonicSolid::Hexahedron | PlatonicSolid::Dodecahedron => {
            for a in signs {
                for b in signs {
                    for c in signs {
                        v.push([a, b, c]);
                    }
                }
            }
            if solid == PlatonicSolid::Dodecahedron {
                let inv = 1.0 / phi;
                for a in signs {
                    for b in signs {
                        v.push([0.0, a * inv, b * phi]);
                        v.push([a * inv, b * phi, 0.0]);
                        v.push([a * phi, 0.0, b * inv]);
                    }
                }
            }
        }
        PlatonicSolid::Icosahedron => {
            for a in signs {
                for b in signs {
                    v.push([0.0, a, b * phi]);
                    v.push([a, b * phi, 0.0]);
                    v.push([a * phi, 0.0, b]);
                }
            }
        }
    }
    Placement::from_bearings(v.iter().map(|p| DVector::from_row_slice(p)).collect())
        .expect("polyhedron vertices are nonzero")
}
