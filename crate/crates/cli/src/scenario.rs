//! Line-oriented scenario files.
//!
//! ```text
//! scenario   := line*
//! line       := blank | comment | header | entry
//! comment    := '#' any*                 (also allowed after a value)
//! header     := '[' ( "sensor" | "flow" | "construction" ) ']'
//! entry      := key '=' value
//! ```
//!
//! Top-level keys (before any header): `dimension` (2 or 3, required) and
//! `target` (whitespace-separated coordinates, default origin).
//!
//! `[sensor]` keys: `kind` (bearing | range | rss), `sigma`, exactly one of
//! `range` or `position`, and `repeat` (copies of this sensor, default 1).
//! Range-only sensors without either default to range 1.
//!
//! `[flow]` keys: `dt`, `t_end`, `integrator` (euler | rk4),
//! `convergence_tol`, `seed`, `renormalize` (true | false), `altitudes`
//! (one value per sensor), `max_restarts`.
//!
//! `[construction]` keys: `method` (auto | irregular | square | 2d |
//! dplus1 | five | union | flow).
//!
//! A file is in construct mode when no sensor has a position and in
//! simulate mode when every sensor has one; mixing the two is an error.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use optiplace::flow::FlowConfig;
use optiplace::{MethodChoice, SensorKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

fn err<T>(line: usize, column: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, column, message: message.into() })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Location {
    Range(f64),
    Position(DVector<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorEntry {
    pub kind: SensorKind,
    pub sigma: f64,
    pub location: Location,
    /// Line of the `[sensor]` header.
    pub line: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Construct,
    Simulate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowBlock {
    pub config: FlowConfig,
    pub max_restarts: usize,
}

impl Default for FlowBlock {
    fn default() -> Self {
        Self { config: FlowConfig::default(), max_restarts: 3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub dimension: usize,
    pub target: DVector<f64>,
    pub sensors: Vec<SensorEntry>,
    pub mode: Mode,
    pub flow: Option<FlowBlock>,
    pub method: MethodChoice,
}

impl Scenario {
    pub fn ranges(&self) -> Option<Vec<f64>> {
        self.sensors
            .iter()
            .map(|s| match s.location {
                Location::Range(r) => Some(r),
                Location::Position(_) => None,
            })
            .collect()
    }

    pub fn positions(&self) -> Option<Vec<DVector<f64>>> {
        self.sensors
            .iter()
            .map(|s| match &s.location {
                Location::Position(p) => Some(p.clone()),
                Location::Range(_) => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Top,
    Sensor,
    Flow,
    Construction,
}

/// A raw `key = value` entry with source coordinates.
#[derive(Debug, Clone)]
struct Entry<'a> {
    key: &'a str,
    value: &'a str,
    line: usize,
    value_column: usize,
}

impl Entry<'_> {
    fn number<T: FromStr>(&self, what: &str) -> Result<T, ParseError> {
        self.value
            .parse::<T>()
            .map_err(|_| ParseError {
                line: self.line,
                column: self.value_column,
                message: format!("`{}` is not a valid {what} for `{}`", self.value, self.key),
            })
    }

    fn real(&self) -> Result<f64, ParseError> {
        let x: f64 = self.number("number")?;
        if !x.is_finite() {
            return err(self.line, self.value_column, format!("`{}` must be finite", self.key));
        }
        Ok(x)
    }

    fn positive(&self) -> Result<f64, ParseError> {
        let x = self.real()?;
        if x <= 0.0 {
            return err(self.line, self.value_column, format!("`{}` must be positive, got {x}", self.key));
        }
        Ok(x)
    }

    fn vector(&self) -> Result<Vec<f64>, ParseError> {
        let mut out = Vec::new();
        let base = self.value.as_ptr() as usize;
        for token in self.value.split_whitespace() {
            let column = self.value_column + (token.as_ptr() as usize - base);
            match token.parse::<f64>() {
                Ok(x) if x.is_finite() => out.push(x),
                _ => return err(self.line, column, format!("`{token}` is not a finite number")),
            }
        }
        if out.is_empty() {
            return err(self.line, self.value_column, format!("`{}` needs at least one value", self.key));
        }
        Ok(out)
    }
}

#[derive(Default)]
struct SensorDraft {
    line: usize,
    kind: Option<SensorKind>,
    sigma: Option<f64>,
    range: Option<f64>,
    position: Option<(Vec<f64>, usize, usize)>,
    repeat: usize,
}

pub fn parse(text: &str) -> Result<Scenario, ParseError> {
    let mut section = Section::Top;
    let mut seen: HashSet<&str> = HashSet::new();
    let mut dimension: Option<(usize, usize)> = None;
    let mut target: Option<(Vec<f64>, usize, usize)> = None;
    let mut drafts: Vec<SensorDraft> = Vec::new();
    let mut flow: Option<FlowBlock> = None;
    let mut flow_line = 0;
    let mut altitudes: Option<(Vec<f64>, usize, usize)> = None;
    let mut method = MethodChoice::Auto;
    let mut had_construction = false;

    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        if let Some(rest) = trimmed.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return err(line, indent + 1, "section header is missing `]`");
            };
            seen.clear();
            section = match name.trim() {
                "sensor" => {
                    drafts.push(SensorDraft { line, repeat: 1, ..SensorDraft::default() });
                    Section::Sensor
                }
                "flow" if flow.is_none() => {
                    flow = Some(FlowBlock::default());
                    flow_line = line;
                    Section::Flow
                }
                "construction" if !had_construction => {
                    had_construction = true;
                    Section::Construction
                }
                "flow" | "construction" => return err(line, indent + 1, format!("duplicate [{}] section", name.trim())),
                other => return err(line, indent + 2, format!("unknown section `{other}`")),
            };
            continue;
        }
        let Some(eq) = content.find('=') else {
            return err(line, indent + 1, "expected `key = value`");
        };
        let key = content[..eq].trim();
        let after = &content[eq + 1..];
        let value = after.trim();
        let value_column = eq + 2 + (after.len() - after.trim_start().len());
        if key.is_empty() {
            return err(line, indent + 1, "missing key before `=`");
        }
        if value.is_empty() {
            return err(line, value_column, format!("missing value for `{key}`"));
        }
        if !seen.insert(key) {
            return err(line, indent + 1, format!("duplicate key `{key}`"));
        }
        let entry = Entry { key, value, line, value_column };
        let unknown = || err(line, indent + 1, format!("unknown key `{key}` in this section"));

        match section {
            Section::Top => match key {
                "dimension" => {
                    let d: usize = entry.number("dimension")?;
                    if !(2..=3).contains(&d) {
                        return err(line, value_column, format!("dimension must be 2 or 3, got {d}"));
                    }
                    dimension = Some((d, line));
                }
                "target" => target = Some((entry.vector()?, line, value_column)),
                _ => return unknown(),
            },
            Section::Sensor => {
                let draft = drafts.last_mut().expect("sensor section has a draft");
                match key {
                    "kind" => {
                        draft.kind = Some(value.parse().map_err(|_| ParseError {
                            line,
                            column: value_column,
                            message: format!("unknown sensor kind `{value}` (expected bearing, range or rss)"),
                        })?)
                    }
                    "sigma" => draft.sigma = Some(entry.positive()?),
                    "range" => draft.range = Some(entry.positive()?),
                    "position" => draft.position = Some((entry.vector()?, line, value_column)),
                    "repeat" => {
                        draft.repeat = entry.number("count")?;
                        if draft.repeat == 0 {
                            return err(line, value_column, "`repeat` must be at least 1");
                        }
                    }
                    _ => return unknown(),
                }
                if draft.range.is_some() && draft.position.is_some() {
                    return err(line, indent + 1, "a sensor takes either `range` or `position`, not both");
                }
            }
            Section::Flow => {
                let block = flow.as_mut().expect("flow section has a block");
                let config = &mut block.config;
                match key {
                    "dt" => config.dt = entry.positive()?,
                    "t_end" => config.t_end = entry.positive()?,
                    "integrator" => {
                        config.integrator = value.parse().map_err(|_| ParseError {
                            line,
                            column: value_column,
                            message: format!("unknown integrator `{value}` (expected euler or rk4)"),
                        })?
                    }
                    "convergence_tol" => config.convergence_tol = entry.positive()?,
                    "seed" => config.seed = entry.number("seed")?,
                    "renormalize" => config.renormalize = entry.number("boolean")?,
                    "altitudes" => altitudes = Some((entry.vector()?, line, value_column)),
                    "max_restarts" => block.max_restarts = entry.number("count")?,
                    _ => return unknown(),
                }
            }
            Section::Construction => match key {
                "method" => {
                    method = value.parse().map_err(|_| ParseError {
                        line,
                        column: value_column,
                        message: format!("unknown construction method `{value}`"),
                    })?
                }
                _ => return unknown(),
            },
        }
    }

    let Some((d, _)) = dimension else {
        return err(1, 1, "missing top-level `dimension`");
    };
    let target = match target {
        Some((t, line, column)) if t.len() != d => {
            return err(line, column, format!("target has {} coordinates, dimension is {d}", t.len()))
        }
        Some((t, _, _)) => DVector::from_vec(t),
        None => DVector::zeros(d),
    };
    if drafts.is_empty() {
        return err(text.lines().count().max(1), 1, "scenario has no [sensor] sections");
    }

    let with_position = drafts.iter().filter(|s| s.position.is_some()).count();
    let mode = if with_position == 0 { Mode::Construct } else { Mode::Simulate };
    let mut sensors = Vec::new();
    for draft in &drafts {
        let Some(kind) = draft.kind else {
            return err(draft.line, 1, "sensor is missing `kind`");
        };
        let Some(sigma) = draft.sigma else {
            return err(draft.line, 1, "sensor is missing `sigma`");
        };
        let location = match (mode, &draft.position, draft.range) {
            (Mode::Simulate, Some((p, line, column)), _) => {
                if p.len() != d {
                    return err(*line, *column, format!("position has {} coordinates, dimension is {d}", p.len()));
                }
                Location::Position(DVector::from_column_slice(p))
            }
            (Mode::Simulate, None, _) => {
                return err(draft.line, 1, "this sensor has no `position` while others do; use positions for every sensor or for none")
            }
            (Mode::Construct, _, Some(r)) => Location::Range(r),
            (Mode::Construct, _, None) if kind == SensorKind::RangeOnly => Location::Range(1.0),
            (Mode::Construct, _, None) => {
                return err(draft.line, 1, format!("{kind} sensor needs a `range` (its weight depends on it)"))
            }
        };
        for _ in 0..draft.repeat {
            sensors.push(SensorEntry { kind, sigma, location: location.clone(), line: draft.line });
        }
    }

    if let Some(block) = flow.as_mut() {
        if let Some((ell, line, column)) = altitudes {
            if ell.len() != sensors.len() {
                return err(line, column, format!("{} altitudes for {} sensors", ell.len(), sensors.len()));
            }
            if d != 3 {
                return err(line, 1, "altitudes need dimension 3");
            }
            block.config.altitude_targets = Some(ell);
        }
        if block.config.dt >= block.config.t_end {
            return err(flow_line, 1, format!("dt = {} must be smaller than t_end = {}", block.config.dt, block.config.t_end));
        }
    }

    Ok(Scenario { dimension: d, target, sensors, mode, flow, method })
}

/// Writes a simulate-mode scenario placing each sensor at `positions`.
pub fn render_positions(scenario: &Scenario, positions: &[DVector<f64>]) -> String {
    let join = |v: &DVector<f64>| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let mut out = format!("dimension = {}\ntarget = {}\n", scenario.dimension, join(&scenario.target));
    for (sensor, p) in scenario.sensors.iter().zip(positions) {
        out.push_str(&format!(
            "\n[sensor]\nkind = {}\nsigma = {}\nposition = {}\n",
            sensor.kind.name(),
            sensor.sigma,
            join(p)
        ));
    }
    out
}
