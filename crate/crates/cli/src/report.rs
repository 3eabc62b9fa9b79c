//! Placement reports in text and JSON form, plus trajectory CSV.

use std::fmt::Write as _;

use optiplace::flow::Trajectory;
use optiplace::sensor::criteria_report;
use optiplace::{certify, coefficients, fim, irregularity, Placement, Regime, SensorSpec};
use serde::Serialize;

/// Upper bound on data rows in a trajectory CSV.
pub const MAX_CSV_ROWS: usize = 10_000;

#[derive(Debug, Clone, Serialize)]
pub struct SensorRow {
    pub index: usize,
    pub kind: String,
    pub sigma: f64,
    pub range: f64,
    pub coefficient: f64,
    pub bearing: Vec<f64>,
    pub position: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlacementReport {
    pub dimension: usize,
    pub target: Vec<f64>,
    pub method: Option<String>,
    pub sensors: Vec<SensorRow>,
    pub k0: usize,
    pub regular: bool,
    pub regime: String,
    pub objective: f64,
    pub bound: f64,
    /// `objective − bound`.
    pub error: f64,
    pub deviation: f64,
    pub tol: f64,
    pub verdict: bool,
    pub det_f: f64,
    pub lambda_bar_pow_d: f64,
    pub fim_deviation: f64,
}

impl PlacementReport {
    pub fn new(pl: &Placement, specs: &[SensorSpec], tol: f64, method: Option<String>) -> optiplace::Result<Self> {
        let coeffs = coefficients(specs)?;
        let d = pl.dimension();
        let irr = irregularity(&coeffs, d)?;
        let cert = certify(pl, specs, tol)?;
        let criteria = criteria_report(&fim(pl, specs)?);
        let positions = pl.sensor_positions();
        let sensors = specs
            .iter()
            .enumerate()
            .map(|(i, s)| SensorRow {
                index: i,
                kind: s.kind().name().to_string(),
                sigma: s.sigma(),
                range: pl.ranges()[i],
                coefficient: coeffs.values()[i],
                bearing: pl.bearings()[i].iter().copied().collect(),
                position: positions[i].iter().copied().collect(),
            })
            .collect();
        let regime = match cert.regime {
            Regime::Regular => "regular".to_string(),
            Regime::Irregular { k0 } => format!("irregular (k0 = {k0})"),
            Regime::SquareCase => "square".to_string(),
        };
        Ok(Self {
            dimension: d,
            target: pl.target().iter().copied().collect(),
            method,
            sensors,
            k0: irr.k0,
            regular: irr.regular,
            regime,
            objective: cert.objective,
            bound: cert.bound,
            error: cert.error,
            deviation: cert.deviation,
            tol,
            verdict: cert.verdict,
            det_f: criteria.det_f,
            lambda_bar_pow_d: criteria.lambda_bar_pow_d,
            fim_deviation: criteria.deviation,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports hold only finite numbers and strings")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "dimension        {}", self.dimension);
        let _ = writeln!(out, "target           {}", vector(&self.target));
        if let Some(m) = &self.method {
            let _ = writeln!(out, "method           {m}");
        }
        let _ = writeln!(out, "regime           {}", self.regime);
        let _ = writeln!(out, "objective        {}", sig(self.objective));
        let _ = writeln!(out, "bound            {}", sig(self.bound));
        let _ = writeln!(out, "error            {}", sig(self.error));
        let _ = writeln!(out, "deviation        {} (tol {})", sig(self.deviation), sig(self.tol));
        let _ = writeln!(out, "det F            {}", sig(self.det_f));
        let _ = writeln!(out, "mean eig ^ d     {}", sig(self.lambda_bar_pow_d));
        let _ = writeln!(out, "|F - mean I|^2   {}", sig(self.fim_deviation));
        let _ = writeln!(out, "verdict          {}", if self.verdict { "optimal" } else { "not optimal" });
        let _ = writeln!(out, "sensors");
        for s in &self.sensors {
            let _ = writeln!(
                out,
                "  {:>3} {:<7} sigma {} range {} c {}\n      bearing  {}\n      position {}",
                s.index,
                s.kind,
                sig(s.sigma),
                sig(s.range),
                sig(s.coefficient),
                vector(&s.bearing),
                vector(&s.position)
            );
        }
        out
    }
}

/// 12 significant digits, fixed notation for moderate magnitudes.
pub fn sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return x.to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    if (-4..12).contains(&exponent) {
        let decimals = (11 - exponent).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.') } else { &s };
        s.to_string()
    } else {
        format!("{x:.11e}")
    }
}

fn vector(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|&x| sig(x)).collect();
    format!("[{}]", parts.join(", "))
}

/// Sample indices kept in the CSV: evenly strided, final sample always kept.
pub fn decimate(samples: usize, sensors: usize) -> Vec<usize> {
    if samples == 0 {
        return Vec::new();
    }
    let budget = (MAX_CSV_ROWS / sensors.max(1)).max(2);
    if samples <= budget {
        return (0..samples).collect();
    }
    let stride = (samples - 1).div_ceil(budget - 1);
    let mut keep: Vec<usize> = (0..samples).step_by(stride).collect();
    if *keep.last().expect("non-empty") != samples - 1 {
        keep.push(samples - 1);
    }
    keep
}

/// `t,sensor,x,y[,z],V,optimality_error`, absolute sensor positions.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let d = traj.final_placement().dimension();
    let axes = ["x", "y", "z"];
    let mut out = format!("t,sensor,{},V,optimality_error\n", axes[..d.min(3)].join(","));
    let n = traj.final_placement().len();
    for k in decimate(traj.samples.len(), n) {
        let s = &traj.samples[k];
        for (i, p) in s.placement.sensor_positions().iter().enumerate() {
            let coords: Vec<String> = p.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "{},{i},{},{},{}", s.t, coords.join(","), s.potential, s.optimality_error);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(sig(0.04), "0.04");
        assert_eq!(sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig(123456.789), "123456.789");
        assert_eq!(sig(-2.0), "-2");
        assert_eq!(sig(1.5e-20), "1.50000000000e-20");
        assert_eq!(sig(0.0), "0");
    }

    #[test]
    fn decimation_bounds_rows() {
        for (samples, n) in [(1, 4), (10, 4), (2500, 4), (2501, 4), (100_001, 4), (77_777, 3), (5000, 20_000)] {
            let keep = decimate(samples, n);
            assert_eq!(keep[0], 0);
            assert_eq!(*keep.last().unwrap(), samples - 1);
            assert!(keep.windows(2).all(|w| w[0] < w[1]));
            assert!(keep.len() * n <= MAX_CSV_ROWS.max(2 * n), "{samples} {n}: {}", keep.len());
        }
        assert_eq!(decimate(2500, 4).len(), 2500);
    }
}
