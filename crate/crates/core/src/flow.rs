//! Gradient control of sensor positions.
//!
//! Pure law: `ṙ_i = −P_i G g_i` with `P_i = I − g_i g_iᵀ`. It descends
//! `V = ¼(‖G‖² − β)` and keeps every range `‖r_i‖` constant. With altitude
//! targets (3D only) the law becomes
//! `ṙ_i = −(4c_i²/‖r_i‖) P_i G g_i − 2(e₃ᵀr_i − ℓ_i) e₃`, the negative
//! gradient of `‖G‖² + Σ (e₃ᵀr_i − ℓ_i)²`.
//!
//! Coefficients are held fixed for the whole run.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::coefficients::{is_regular, CoefficientSequence};
use crate::error::{Error, Result};
use crate::geometry::Placement;
use crate::optimality::{clamp_error, lower_bound};
use crate::sensor::{self, SensorSpec};

/// Rotation applied to every bearing when restarting from a stalled state.
pub const RESTART_PERTURBATION: f64 = 1e-2;

/// Irregular errors are a difference of two numbers of size `β`; below this
/// multiple of that size they are round-off. Such an error only counts as
/// converged once the velocities stall.
pub const ROUND_OFF_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    ExplicitEuler,
    #[default]
    RungeKutta4,
}

impl std::str::FromStr for Integrator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euler" | "explicit-euler" => Ok(Integrator::ExplicitEuler),
            "rk4" | "runge-kutta-4" => Ok(Integrator::RungeKutta4),
            other => Err(Error::Contract(format!("unknown integrator `{other}` (expected euler or rk4)"))),
        }
    }
}

impl std::fmt::Display for Integrator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Integrator::ExplicitEuler => "euler",
            Integrator::RungeKutta4 => "rk4",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub dt: f64,
    pub t_end: f64,
    pub integrator: Integrator,
    /// Rescale each `r_i` back to its initial length after every step.
    /// Ignored when altitude targets are set.
    pub renormalize: bool,
    /// Stop once the optimality error (and, with altitude targets, the
    /// altitude potential) falls to this level.
    pub convergence_tol: f64,
    /// Consecutive steps with every velocity norm below `stall_threshold`
    /// before the run is declared stuck at a non-optimal critical point.
    pub stall_window: usize,
    pub stall_threshold: f64,
    pub seed: u64,
    pub altitude_targets: Option<Vec<f64>>,
    /// Keep every k-th step in the trajectory (the last step is always kept).
    pub record_every: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 100.0,
            integrator: Integrator::RungeKutta4,
            renormalize: false,
            convergence_tol: 1e-10,
            stall_window: 100,
            stall_threshold: 1e-10,
            seed: 0,
            altitude_targets: None,
            record_every: 1,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Contract(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_end.is_finite() && self.dt < self.t_end) {
            return Err(Error::Contract(format!("need dt < t_end, got dt = {}, t_end = {}", self.dt, self.t_end)));
        }
        if !(self.convergence_tol > 0.0 && self.convergence_tol.is_finite()) {
            return Err(Error::Contract("convergence_tol must be positive".into()));
        }
        if self.stall_window == 0 || self.record_every == 0 {
            return Err(Error::Contract("stall_window and record_every must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    ConvergedOptimal,
    ConvergedCritical,
    TimedOut,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Outcome::ConvergedOptimal => "converged-optimal",
            Outcome::ConvergedCritical => "converged-critical",
            Outcome::TimedOut => "timed-out",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub placement: Placement,
    /// Potential being descended: `¼(‖G‖² − β)` for the pure law,
    /// `‖G‖² + Σ (e₃ᵀr_i − ℓ_i)²` with altitude targets.
    pub potential: f64,
    pub optimality_error: f64,
    pub velocity_norms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub outcome: Outcome,
    pub coefficients: CoefficientSequence,
}

impl Trajectory {
    pub fn final_sample(&self) -> &Sample {
        self.samples.last().expect("trajectories always hold the initial sample")
    }

    pub fn final_placement(&self) -> &Placement {
        &self.final_sample().placement
    }

    pub fn final_error(&self) -> f64 {
        self.final_sample().optimality_error
    }

    /// `max_i |‖r_i(t)‖ − ‖r_i(0)‖| / ‖r_i(0)‖` over all samples.
    pub fn max_relative_range_drift(&self) -> f64 {
        let r0 = self.samples[0].placement.ranges();
        self.samples
            .iter()
            .flat_map(|s| s.placement.ranges().iter().zip(r0).map(|(r, a)| (r - a).abs() / a))
            .fold(0.0, f64::max)
    }

    /// Largest rise of the potential between consecutive samples.
    pub fn max_potential_increase(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| w[1].potential - w[0].potential)
            .fold(0.0, f64::max)
    }
}

/// Flat-array dynamics: state is `n` consecutive `d`-vectors.
struct Dynamics<'a> {
    d: usize,
    n: usize,
    c2: Vec<f64>,
    beta: f64,
    /// `Σc²/d`
    mean: f64,
    /// `β − (Σc²)²/d`, zero for regular sequences.
    gap: f64,
    altitude: Option<&'a [f64]>,
}

struct Evaluation {
    g_norm_sq: f64,
    /// `‖G − (Σc²/d) I‖²`, free of the cancellation in `‖G‖² − β`.
    deviation_sq: f64,
    external: f64,
}

impl<'a> Dynamics<'a> {
    fn new(coeffs: &CoefficientSequence, d: usize, altitude: Option<&'a [f64]>) -> Result<Self> {
        let beta = lower_bound(coeffs, d)?;
        let total = coeffs.sum_sq();
        let gap = if is_regular(coeffs, d)? { 0.0 } else { (beta - total * total / d as f64).max(0.0) };
        Ok(Self { d, n: coeffs.len(), c2: coeffs.squares(), beta, mean: total / d as f64, gap, altitude })
    }

    /// Writes the velocity into `out` and returns the potential ingredients.
    fn eval(&self, x: &[f64], out: &mut [f64]) -> Evaluation {
        let d = self.d;
        let mut g = [0.0f64; 9];
        let mut gm = vec![0.0; d * d];
        let gmat: &mut [f64] = if d <= 3 { &mut g[..d * d] } else { &mut gm };
        let mut norms = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let r = &x[i * d..(i + 1) * d];
            let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            norms.push(norm);
            let w = self.c2[i] / (norm * norm);
            for a in 0..d {
                for b in 0..d {
                    gmat[a * d + b] += w * r[a] * r[b];
                }
            }
        }
        let g_norm_sq: f64 = gmat.iter().map(|v| v * v).sum();
        let deviation_sq: f64 = (0..d * d)
            .map(|k| {
                let e = if k % (d + 1) == 0 { gmat[k] - self.mean } else { gmat[k] };
                e * e
            })
            .sum();
        let mut external = 0.0;
        for i in 0..self.n {
            let r = &x[i * d..(i + 1) * d];
            let norm = norms[i];
            let mut gg = [0.0f64; 3];
            let mut ggv = vec![0.0; d];
            let ggs: &mut [f64] = if d <= 3 { &mut gg[..d] } else { &mut ggv };
            for a in 0..d {
                ggs[a] = (0..d).map(|b| gmat[a * d + b] * r[b]).sum::<f64>() / norm;
            }
            let along: f64 = (0..d).map(|a| ggs[a] * r[a]).sum::<f64>() / norm;
            let scale = match self.altitude {
                None => 1.0,
                Some(_) => 4.0 * self.c2[i] / norm,
            };
            for a in 0..d {
                out[i * d + a] = -scale * (ggs[a] - along * r[a] / norm);
            }
            if let Some(ell) = self.altitude {
                let gap = r[d - 1] - ell[i];
                external += gap * gap;
                out[i * d + d - 1] -= 2.0 * gap;
            }
        }
        Evaluation { g_norm_sq, deviation_sq, external }
    }

    fn potential(&self, e: &Evaluation) -> f64 {
        match self.altitude {
            None => 0.25 * (e.deviation_sq - self.gap),
            Some(_) => e.g_norm_sq + e.external,
        }
    }

    fn error(&self, e: &Evaluation) -> f64 {
        clamp_error(e.deviation_sq - self.gap, self.beta)
    }

    /// Error level below which `error` is dominated by round-off.
    fn error_floor(&self) -> f64 {
        ROUND_OFF_FLOOR * self.gap
    }
}

fn flatten(pl: &Placement) -> Vec<f64> {
    pl.relative_positions().iter().flat_map(|r| r.iter().copied()).collect()
}

fn unflatten(target: &DVector<f64>, x: &[f64]) -> Result<Placement> {
    let d = target.len();
    Placement::new(target.clone(), x.chunks(d).map(DVector::from_column_slice).collect())
}

fn velocity_norms(v: &[f64], d: usize) -> Vec<f64> {
    v.chunks(d).map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect()
}

/// `−P_i G g_i` for every sensor.
pub fn control_velocity(pl: &Placement, coeffs: &CoefficientSequence) -> Result<Vec<DVector<f64>>> {
    check_sizes(pl, coeffs)?;
    let dynamics = Dynamics::new(coeffs, pl.dimension(), None)?;
    let x = flatten(pl);
    let mut v = vec![0.0; x.len()];
    dynamics.eval(&x, &mut v);
    Ok(v.chunks(pl.dimension()).map(DVector::from_column_slice).collect())
}

/// `∇_{r_i} V = (c_i²/‖r_i‖) P_i G g_i`, so that
/// `control_velocity_i = −(‖r_i‖/c_i²) ∇_{r_i} V`.
pub fn lyapunov_gradient(pl: &Placement, coeffs: &CoefficientSequence) -> Result<Vec<DVector<f64>>> {
    let v = control_velocity(pl, coeffs)?;
    Ok(v
        .into_iter()
        .zip(coeffs.values().iter().zip(pl.ranges()))
        .map(|(vi, (c, r))| vi * (-c * c / r))
        .collect())
}

/// `¼(‖G‖² − β)`.
pub fn lyapunov(pl: &Placement, coeffs: &CoefficientSequence, d: usize) -> Result<f64> {
    check_sizes(pl, coeffs)?;
    if d != pl.dimension() {
        return Err(Error::Contract(format!("dimension {d} does not match placement ({})", pl.dimension())));
    }
    Ok(0.25 * crate::optimality::optimality_error_for(coeffs, pl.bearings())?)
}

/// Symbolic time derivative of `V` along the pure law:
/// `−Σ (c_i²/‖r_i‖) ‖P_i G g_i‖²`.
pub fn lyapunov_rate(pl: &Placement, coeffs: &CoefficientSequence) -> Result<f64> {
    let v = control_velocity(pl, coeffs)?;
    Ok(-v
        .iter()
        .zip(coeffs.values().iter().zip(pl.ranges()))
        .map(|(vi, (c, r))| c * c / r * vi.norm_squared())
        .sum::<f64>())
}

fn check_sizes(pl: &Placement, coeffs: &CoefficientSequence) -> Result<()> {
    if pl.len() != coeffs.len() {
        return Err(Error::Contract(format!("{} coefficients for {} sensors", coeffs.len(), pl.len())));
    }
    if pl.len() < pl.dimension() {
        return Err(Error::Contract(format!("need n ≥ d, got n = {}, d = {}", pl.len(), pl.dimension())));
    }
    Ok(())
}

/// Runs the flow with coefficients derived from `specs` at the initial placement.
pub fn simulate(initial: &Placement, specs: &[SensorSpec], config: &FlowConfig) -> Result<Trajectory> {
    if specs.len() != initial.len() {
        return Err(Error::Contract(format!("{} specs for {} sensors", specs.len(), initial.len())));
    }
    simulate_with_coefficients(initial, &sensor::coefficients(specs)?, config)
}

pub fn simulate_with_coefficients(
    initial: &Placement,
    coeffs: &CoefficientSequence,
    config: &FlowConfig,
) -> Result<Trajectory> {
    config.validate()?;
    check_sizes(initial, coeffs)?;
    let d = initial.dimension();
    let altitude = match &config.altitude_targets {
        Some(ell) if d != 3 => {
            let _ = ell;
            return Err(Error::Contract("altitude targets need d = 3".into()));
        }
        Some(ell) if ell.len() != initial.len() => {
            return Err(Error::Contract(format!("{} altitude targets for {} sensors", ell.len(), initial.len())))
        }
        Some(ell) => Some(ell.as_slice()),
        None => None,
    };
    let dynamics = Dynamics::new(coeffs, d, altitude)?;
    let target = initial.target().clone();
    let initial_ranges = initial.ranges().to_vec();
    let renormalize = config.renormalize && altitude.is_none();
    let size = d * initial.len();

    let mut x = flatten(initial);
    let mut v = vec![0.0; size];
    let mut eval = dynamics.eval(&x, &mut v);
    let mut potential = dynamics.potential(&eval);
    let mut samples = vec![Sample {
        t: 0.0,
        placement: initial.clone(),
        potential,
        optimality_error: dynamics.error(&eval),
        velocity_norms: velocity_norms(&v, d),
    }];
    let resolvable = dynamics.error_floor() < config.convergence_tol;
    let converged = |eval: &Evaluation| {
        resolvable
            && dynamics.error(eval) <= config.convergence_tol
            && (altitude.is_none() || eval.external <= config.convergence_tol)
    };
    if converged(&eval) {
        return Ok(Trajectory { samples, outcome: Outcome::ConvergedOptimal, coefficients: coeffs.clone() });
    }

    let steps = (config.t_end / config.dt).ceil() as usize;
    let mut stalled_for = 0usize;
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; size], vec![0.0; size], vec![0.0; size], vec![0.0; size], vec![0.0; size]);
    let mut outcome = Outcome::TimedOut;
    let mut last_valid = initial.clone();

    for step in 1..=steps {
        let t = (step as f64 * config.dt).min(config.t_end);
        let h = t - (step - 1) as f64 * config.dt;
        let mut next = x.clone();
        match config.integrator {
            Integrator::ExplicitEuler => {
                for (xi, vi) in next.iter_mut().zip(&v) {
                    *xi += h * vi;
                }
            }
            Integrator::RungeKutta4 => {
                k1.copy_from_slice(&v);
                for j in 0..size {
                    tmp[j] = x[j] + 0.5 * h * k1[j];
                }
                dynamics.eval(&tmp, &mut k2);
                for j in 0..size {
                    tmp[j] = x[j] + 0.5 * h * k2[j];
                }
                dynamics.eval(&tmp, &mut k3);
                for j in 0..size {
                    tmp[j] = x[j] + h * k3[j];
                }
                dynamics.eval(&tmp, &mut k4);
                for j in 0..size {
                    next[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
                }
            }
        }
        if renormalize {
            for (chunk, r0) in next.chunks_mut(d).zip(&initial_ranges) {
                let norm = chunk.iter().map(|a| a * a).sum::<f64>().sqrt();
                chunk.iter_mut().for_each(|a| *a *= r0 / norm);
            }
        }
        let degenerate = next
            .chunks(d)
            .any(|c| !c.iter().all(|a| a.is_finite()) || c.iter().map(|a| a * a).sum::<f64>() < 1e-300);
        if degenerate {
            return Err(Error::NumericalFailure {
                t,
                reason: "state became non-finite or a sensor collapsed onto the target".into(),
                last_valid: Some(Box::new(last_valid)),
            });
        }
        let next_eval = dynamics.eval(&next, &mut v);
        let next_potential = dynamics.potential(&next_eval);
        if !next_potential.is_finite() || v.iter().any(|a| !a.is_finite()) {
            return Err(Error::NumericalFailure {
                t,
                reason: "potential or velocity became non-finite".into(),
                last_valid: Some(Box::new(last_valid)),
            });
        }
        if next_potential > potential + 1e-9 * potential.abs().max(1.0) {
            return Err(Error::StepSize { t, before: potential, after: next_potential });
        }
        x = next;
        eval = next_eval;
        potential = next_potential;

        let norms = velocity_norms(&v, d);
        let done = converged(&eval);
        if norms.iter().all(|&s| s < config.stall_threshold) {
            stalled_for += 1;
        } else {
            stalled_for = 0;
        }
        let stalled = !done && stalled_for >= config.stall_window;
        let settled = stalled
            && dynamics.error(&eval) <= dynamics.error_floor().max(config.convergence_tol)
            && (altitude.is_none() || eval.external <= config.convergence_tol);
        let done = done || settled;
        let stalled = stalled && !settled;
        let last = done || stalled || step == steps;
        if step % config.record_every == 0 || last {
            let placement = unflatten(&target, &x)?;
            last_valid = placement.clone();
            samples.push(Sample {
                t,
                placement,
                potential,
                optimality_error: dynamics.error(&eval),
                velocity_norms: norms,
            });
        }
        if done {
            outcome = Outcome::ConvergedOptimal;
            break;
        }
        if stalled {
            outcome = Outcome::ConvergedCritical;
            break;
        }
    }
    Ok(Trajectory { samples, outcome, coefficients: coeffs.clone() })
}

/// Result of [`simulate_with_restarts`].
#[derive(Debug, Clone, PartialEq)]
pub struct RestartRun {
    /// The final attempt.
    pub trajectory: Trajectory,
    pub restarts: usize,
    pub outcomes: Vec<Outcome>,
}

/// Re-runs from a perturbed copy of the stalled state whenever a run ends at
/// a non-optimal critical point, at most `max_restarts` times. Attempt `k`
/// uses seed `config.seed + k`.
pub fn simulate_with_restarts(
    initial: &Placement,
    coeffs: &CoefficientSequence,
    config: &FlowConfig,
    max_restarts: usize,
) -> Result<RestartRun> {
    let mut start = initial.clone();
    let mut outcomes = Vec::new();
    for attempt in 0..=max_restarts {
        let trajectory = simulate_with_coefficients(&start, coeffs, config)?;
        outcomes.push(trajectory.outcome);
        if trajectory.outcome != Outcome::ConvergedCritical || attempt == max_restarts {
            return Ok(RestartRun { trajectory, restarts: attempt, outcomes });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(attempt as u64 + 1));
        start = perturb_bearings(trajectory.final_placement(), RESTART_PERTURBATION, &mut rng)?;
    }
    unreachable!("loop returns on the last attempt")
}

/// Rotates every bearing by `angle` radians towards a random orthogonal
/// direction, keeping ranges and target.
pub fn perturb_bearings<R: Rng + ?Sized>(pl: &Placement, angle: f64, rng: &mut R) -> Result<Placement> {
    let d = pl.dimension();
    let relative = pl
        .bearings()
        .iter()
        .zip(pl.ranges())
        .map(|(g, &r)| {
            let u = loop {
                let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
                let w = &z - g * g.dot(&z);
                if w.norm() > 1e-6 {
                    break w.normalize();
                }
            };
            (g * angle.cos() + u * angle.sin()) * r
        })
        .collect();
    Placement::new(pl.target().clone(), relative)
}

/// Uniformly random bearings at the given ranges around the origin.
pub fn random_placement<R: Rng + ?Sized>(d: usize, ranges: &[f64], rng: &mut R) -> Result<Placement> {
    if ranges.is_empty() || d == 0 {
        return Err(Error::Contract("need d ≥ 1 and at least one sensor".into()));
    }
    let relative = ranges
        .iter()
        .map(|&r| loop {
            let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
            if z.norm() > 1e-6 {
                break z.normalize() * r;
            }
        })
        .collect();
    Placement::new(DVector::zeros(d), relative)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityReport {
    pub compatible: bool,
    pub diagnostic: String,
    /// `(state index, sensor index)` of the first violation.
    pub offending: Option<(usize, usize)>,
}

/// Checks that the altitude gradient `2(e₃ᵀr_i − ℓ_i) e₃` is never
/// orthogonal to `r_i` at the given states. A vanishing gradient is not a
/// violation.
pub fn check_compatibility(states: &[Placement], config: &FlowConfig) -> Result<CompatibilityReport> {
    let ell = config
        .altitude_targets
        .as_ref()
        .ok_or_else(|| Error::Contract("compatibility needs altitude targets".into()))?;
    let mut notes = Vec::new();
    for (k, pl) in states.iter().enumerate() {
        if pl.dimension() != 3 || pl.len() != ell.len() {
            return Err(Error::Contract(format!("state {k} does not match the altitude targets")));
        }
        for (i, r) in pl.relative_positions().iter().enumerate() {
            let grad = 2.0 * (r[2] - ell[i]);
            let scale = r.norm();
            if grad.abs() <= 1e-12 * scale.max(1.0) {
                if r[2].abs() <= 1e-12 * scale {
                    notes.push(format!("state {k}, sensor {i}: altitude gradient vanishes, orthogonality is vacuous"));
                }
                continue;
            }
            // ∇V_E·r / (‖∇V_E‖‖r‖) = |r_z| / ‖r‖
            if r[2].abs() <= 1e-12 * scale {
                return Ok(CompatibilityReport {
                    compatible: false,
                    diagnostic: format!(
                        "state {k}, sensor {i}: r = {:?} is horizontal while its altitude target {} differs from {}, \
                         so the altitude gradient is orthogonal to r",
                        r.as_slice(),
                        ell[i],
                        r[2]
                    ),
                    offending: Some((k, i)),
                });
            }
        }
    }
    notes.dedup();
    Ok(CompatibilityReport {
        compatible: true,
        diagnostic: if notes.is_empty() {
            format!("altitude gradient never orthogonal to r across {} states", states.len())
        } else {
            notes.join("; ")
        },
        offending: None,
    })
}
