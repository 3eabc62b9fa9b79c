//! Sensor measurement models, coefficients, the Fisher information matrix
//! and the frame operator `G = Σ c_i² g_i g_iᵀ`.
//!
//! | kind         | model `h(r)` | FIM                       | coefficient   |
//! |--------------|--------------|---------------------------|---------------|
//! | bearing-only | `r / ‖r‖`    | `Σ c_i² (I − g_i g_iᵀ)`   | `1/(σ ‖r‖)`   |
//! | range-only   | `‖r‖`        | `Σ c_i² g_i g_iᵀ`         | `1/σ`         |
//! | RSS          | `ln ‖r‖`     | `Σ c_i² g_i g_iᵀ`         | `1/(σ ‖r‖)`   |
//!
//! The RSS model drops the usual additive and multiplicative path-loss
//! constants. Measurement models are labels only; nothing here samples
//! noisy measurements.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::coefficients::CoefficientSequence;
use crate::error::{Error, Result};
use crate::geometry::Placement;
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SensorKind {
    BearingOnly,
    RangeOnly,
    Rss,
}

impl SensorKind {
    pub const ALL: [SensorKind; 3] = [SensorKind::BearingOnly, SensorKind::RangeOnly, SensorKind::Rss];

    /// Measurement model, as a formula label.
    pub fn measurement_model(self) -> &'static str {
        match self {
            SensorKind::BearingOnly => "r/|r|",
            SensorKind::RangeOnly => "|r|",
            SensorKind::Rss => "ln|r|",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SensorKind::BearingOnly => "bearing",
            SensorKind::RangeOnly => "range",
            SensorKind::Rss => "rss",
        }
    }
}

impl fmt::Display for SensorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SensorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bearing" | "bearing-only" | "bearing_only" => Ok(SensorKind::BearingOnly),
            "range" | "range-only" | "range_only" => Ok(SensorKind::RangeOnly),
            "rss" => Ok(SensorKind::Rss),
            other => Err(Error::Contract(format!("unknown sensor kind `{other}`"))),
        }
    }
}

/// Sensor type, noise standard deviation and sensor-target range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorSpec {
    kind: SensorKind,
    sigma: f64,
    range: f64,
}

impl SensorSpec {
    pub fn new(kind: SensorKind, sigma: f64, range: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Contract(format!("sigma = {sigma} must be positive")));
        }
        if !(range > 0.0 && range.is_finite()) {
            return Err(Error::Contract(format!("range = {range} must be positive")));
        }
        Ok(Self { kind, sigma, range })
    }

    /// One spec per sensor of `pl`, ranges taken from the placement.
    pub fn for_placement(kind: SensorKind, sigmas: &[f64], pl: &Placement) -> Result<Vec<Self>> {
        if sigmas.len() != pl.len() {
            return Err(Error::Contract(format!(
                "{} noise levels for {} sensors",
                sigmas.len(),
                pl.len()
            )));
        }
        sigmas.iter().zip(pl.ranges()).map(|(&s, &r)| Self::new(kind, s, r)).collect()
    }

    pub fn kind(&self) -> SensorKind {
        self.kind
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn range(&self) -> f64 {
        self.range
    }
}

/// `1/(σ‖r‖)` for bearing-only and RSS sensors, `1/σ` for range-only.
pub fn coefficient(spec: &SensorSpec) -> f64 {
    match spec.kind {
        SensorKind::BearingOnly | SensorKind::Rss => 1.0 / (spec.sigma * spec.range),
        SensorKind::RangeOnly => 1.0 / spec.sigma,
    }
}

/// Shared kind of a homogeneous network.
pub fn common_kind(specs: &[SensorSpec]) -> Result<SensorKind> {
    let first = specs
        .first()
        .ok_or_else(|| Error::Contract("no sensor specs".into()))?
        .kind;
    if specs.iter().any(|s| s.kind != first) {
        return Err(Error::Unsupported("networks with mixed sensor types".into()));
    }
    Ok(first)
}

pub fn coefficients(specs: &[SensorSpec]) -> Result<CoefficientSequence> {
    common_kind(specs)?;
    CoefficientSequence::new(specs.iter().map(coefficient).collect())
}

/// Fisher information matrix with its spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Fim {
    pub matrix: DMatrix<f64>,
    /// Descending, with round-off negatives clamped to zero.
    pub eigenvalues: Vec<f64>,
}

impl Fim {
    pub fn from_matrix(matrix: DMatrix<f64>) -> Self {
        let eigenvalues = clamped_eigenvalues(&matrix);
        Self { matrix, eigenvalues }
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    /// `λ̄ = tr F / d`.
    pub fn mean_eigenvalue(&self) -> f64 {
        self.matrix.trace() / self.dimension() as f64
    }
}

fn clamped_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    linalg::symmetric_eigenvalues(m)
        .into_iter()
        .map(|x| if (-1e-12..0.0).contains(&x) { 0.0 } else { x })
        .collect()
}

fn check_lengths(pl: &Placement, n: usize, what: &str) -> Result<()> {
    if pl.len() != n {
        return Err(Error::Contract(format!("{n} {what} for {} sensors", pl.len())));
    }
    Ok(())
}

/// FIM of a homogeneous sensor network.
pub fn fim(pl: &Placement, specs: &[SensorSpec]) -> Result<Fim> {
    check_lengths(pl, specs.len(), "sensor specs")?;
    let kind = common_kind(specs)?;
    let d = pl.dimension();
    let mut f = DMatrix::<f64>::zeros(d, d);
    for (g, spec) in pl.bearings().iter().zip(specs) {
        let c2 = coefficient(spec).powi(2);
        let gg = linalg::outer(g);
        match kind {
            SensorKind::BearingOnly => f += (DMatrix::identity(d, d) - gg) * c2,
            SensorKind::RangeOnly | SensorKind::Rss => f += gg * c2,
        }
    }
    Ok(Fim::from_matrix(symmetrize(f)))
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// `G = Σ c_i² g_i g_iᵀ` with its spectrum. The frame bounds are the
/// extreme eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameOperator {
    pub matrix: DMatrix<f64>,
    /// Descending, with round-off negatives clamped to zero.
    pub eigenvalues: Vec<f64>,
}

impl FrameOperator {
    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn lower_frame_bound(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty spectrum")
    }

    pub fn upper_frame_bound(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }
}

/// Builds `G` from raw (coefficient, bearing) pairs without validation.
pub(crate) fn frame_matrix<'a>(
    d: usize,
    pairs: impl IntoIterator<Item = (f64, &'a DVector<f64>)>,
) -> DMatrix<f64> {
    let mut g = DMatrix::<f64>::zeros(d, d);
    for (c, b) in pairs {
        g.ger(c * c, b, b, 1.0);
    }
    symmetrize(g)
}

pub fn frame_operator(coeffs: &CoefficientSequence, bearings: &[DVector<f64>]) -> Result<FrameOperator> {
    if coeffs.len() != bearings.len() {
        return Err(Error::Contract(format!(
            "{} coefficients for {} bearings",
            coeffs.len(),
            bearings.len()
        )));
    }
    let d = bearings[0].len();
    for (i, g) in bearings.iter().enumerate() {
        if g.len() != d {
            return Err(Error::Contract(format!("bearing {i} has the wrong dimension")));
        }
        if (g.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::Contract(format!("bearing {i} has norm {}", g.norm())));
        }
    }
    let matrix = frame_matrix(d, coeffs.values().iter().copied().zip(bearings));
    let eigenvalues = clamped_eigenvalues(&matrix);
    Ok(FrameOperator { matrix, eigenvalues })
}

/// Placement objective `‖G‖²` (squared Frobenius norm).
pub fn objective(g: &FrameOperator) -> f64 {
    linalg::frobenius_sq(&g.matrix)
}

/// Determinant criterion against its AM-GM ceiling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriteriaReport {
    pub det_f: f64,
    /// `λ̄^d`.
    pub lambda_bar_pow_d: f64,
    /// `‖F − λ̄ I‖²`.
    pub deviation: f64,
}

pub fn criteria_report(f: &Fim) -> CriteriaReport {
    let d = f.dimension();
    let mean = f.mean_eigenvalue();
    let det_f: f64 = f.eigenvalues.iter().map(|&x| x.max(0.0)).product();
    let deviation = linalg::frobenius_sq(&(&f.matrix - DMatrix::identity(d, d) * mean));
    CriteriaReport { det_f, lambda_bar_pow_d: mean.powi(d as i32), deviation }
}
