//! Scenario files: flat `key = value` lines, `#` starts a comment.
//!
//! ```text
//! # declining firm
//! a = 100 eur/unit
//! A = 20
//! B = 0.08 eur*y/unit^2
//! m = 2
//! c = -4
//! q0 = 1000
//! t_span = [0, 100]
//! mode = integrate
//! regime = 0, 200, 90, -0.5
//! regime = 200, inf, 20, 0.08
//! ```
//!
//! A number may carry a unit, which must match the key's dimension.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::dimensions::{assert_dim, Dimension, Quantity};
use crate::dynamics::{
    closed_form_trajectory, integrate, sample_segment, simulate_piecewise, RegimeSolution, Segment,
    Trajectory, DEFAULT_STEP,
};
use crate::error::{Error, Result};
use crate::firm_model::{CostRegime, CostSchedule, FirmParams, Param};

use super::presets::figure_preset;

pub const STEP_ENV: &str = "FIRMDYN_STEP";
pub const DEFAULT_SPAN: (f64, f64) = (0.0, 100.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    ClosedForm,
    Integrate,
    Piecewise,
    FigurePreset,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::ClosedForm => "closed_form",
            Mode::Integrate => "integrate",
            Mode::Piecewise => "piecewise",
            Mode::FigurePreset => "figure_preset",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Mode::ClosedForm,
            Mode::Integrate,
            Mode::Piecewise,
            Mode::FigurePreset,
        ]
        .into_iter()
        .find(|m| m.as_str() == s)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown mode `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Effective parameters; for presets, those of the first series.
    pub firm: FirmParams,
    /// Parameters set explicitly on top of a preset.
    pub overrides: BTreeMap<Param, f64>,
    /// H0 imposed verbatim instead of fitting it to q0.
    pub integration_constant: Option<f64>,
    pub regimes: Option<Vec<CostRegime>>,
    pub t_span: (f64, f64),
    pub step: f64,
    pub mode: Mode,
    pub preset: Option<String>,
}

/// Step from `FIRMDYN_STEP` if set to a positive number, else 0.01 y.
pub fn default_step() -> f64 {
    std::env::var(STEP_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<f64>().ok())
        .filter(|s| s.is_finite() && *s > 0.0)
        .unwrap_or(DEFAULT_STEP)
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn number(line: usize, s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("`{}` is not a number", s.trim())))?;
    if v.is_nan() {
        return Err(parse_err(line, "NaN is not allowed"));
    }
    Ok(v)
}

/// `value [unit]`, checking the unit against `dim` when present.
fn quantity(line: usize, s: &str, dim: Dimension) -> Result<f64> {
    let s = s.trim();
    let (num, unit) = s.split_once(char::is_whitespace).unwrap_or((s, ""));
    let v = number(line, num)?;
    let unit = unit.trim();
    if !unit.is_empty() {
        let given: Dimension = unit
            .parse()
            .map_err(|e: Error| parse_err(line, e.to_string()))?;
        let q = Quantity::new(v, given).map_err(|e| parse_err(line, e.to_string()))?;
        assert_dim(q, dim).map_err(|e| parse_err(line, e.to_string()))?;
    }
    Ok(v)
}

fn list(line: usize, s: &str, n: usize) -> Result<Vec<f64>> {
    let items: Vec<&str> = s.split(',').collect();
    if items.len() != n {
        return Err(parse_err(
            line,
            format!("expected {n} comma-separated values"),
        ));
    }
    items.into_iter().map(|x| number(line, x)).collect()
}

fn unquote(s: &str) -> &str {
    let s = s.trim();
    s.strip_prefix('"')
        .and_then(|x| x.strip_suffix('"'))
        .unwrap_or(s)
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut explicit: BTreeMap<Param, f64> = BTreeMap::new();
    let mut h0 = None;
    let mut regimes: Vec<CostRegime> = Vec::new();
    let mut t_span = None;
    let mut step = None;
    let mut mode = None;
    let mut preset: Option<String> = None;
    let mut seen: Vec<String> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| parse_err(line, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(parse_err(line, format!("missing value for `{key}`")));
        }
        if key != "regime" {
            if seen.iter().any(|k| k == key) {
                return Err(parse_err(line, format!("duplicate key `{key}`")));
            }
            seen.push(key.to_string());
        }
        if let Ok(param) = key.parse::<Param>() {
            explicit.insert(param, quantity(line, value, param.dimension())?);
            continue;
        }
        match key {
            "H0" => h0 = Some(quantity(line, value, Dimension::FLOW)?),
            "step" => step = Some(quantity(line, value, Dimension::YEAR)?),
            "t_span" => {
                let inner = value
                    .strip_prefix('[')
                    .and_then(|v| v.split_once(']'))
                    .ok_or_else(|| parse_err(line, "expected `[t0, t1]`"))?;
                let unit = inner.1.trim();
                let span = list(line, inner.0, 2)?;
                for v in &span {
                    quantity(line, &format!("{v} {unit}"), Dimension::YEAR)?;
                }
                t_span = Some((span[0], span[1]));
            }
            "mode" => {
                mode = Some(
                    unquote(value)
                        .parse()
                        .map_err(|e: Error| parse_err(line, e.to_string()))?,
                )
            }
            "preset" => preset = Some(unquote(value).to_string()),
            "regime" => {
                let v = list(line, value, 4)?;
                regimes.push(CostRegime {
                    q_low: v[0],
                    q_high: v[1],
                    base_unit_cost: v[2],
                    cost_slope: v[3],
                });
            }
            _ => return Err(parse_err(line, format!("unknown key `{key}`"))),
        }
    }

    let mode = match (mode, &preset) {
        (Some(m), _) => m,
        (None, Some(_)) => Mode::FigurePreset,
        (None, None) => Mode::ClosedForm,
    };
    if (mode == Mode::FigurePreset) != preset.is_some() {
        return Err(Error::validation("preset given iff mode = figure_preset"));
    }

    let mut overrides = BTreeMap::new();
    let (firm, integration_constant, span) = match &preset {
        Some(name) => {
            let fig = figure_preset(name)?;
            let first = &fig.series[0];
            let mut firm = first.params;
            for (&p, &v) in &explicit {
                firm.set(p, v);
            }
            overrides = explicit;
            (
                firm,
                Some(h0.unwrap_or(first.integration_constant)),
                fig.t_span,
            )
        }
        None => {
            for p in [
                Param::BasePrice,
                Param::BaseUnitCost,
                Param::CostSlope,
                Param::Inertia,
            ] {
                if !explicit.contains_key(&p) {
                    return Err(Error::InvalidArgument(format!("missing key `{p}`")));
                }
            }
            if h0.is_some() && explicit.contains_key(&Param::InitialFlow) {
                return Err(Error::InvalidArgument(
                    "give either q0 or H0, not both".into(),
                ));
            }
            let mut firm = FirmParams::untrended(0.0, 0.0, 0.0, 0.0);
            for (&p, &v) in &explicit {
                firm.set(p, v);
            }
            (firm, h0, DEFAULT_SPAN)
        }
    };

    let scenario = Scenario {
        firm,
        overrides,
        integration_constant,
        regimes: (!regimes.is_empty()).then_some(regimes),
        t_span: t_span.unwrap_or(span),
        step: step.unwrap_or_else(default_step),
        mode,
        preset,
    };
    scenario.validate()?;
    Ok(scenario)
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let (t0, t1) = self.t_span;
        if !(t0.is_finite() && t1.is_finite() && t0 < t1) {
            return Err(Error::validation("t0 < t1"));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::validation("step > 0"));
        }
        self.firm.validate()?;
        if let Some(r) = &self.regimes {
            if !matches!(self.mode, Mode::Integrate | Mode::Piecewise) {
                return Err(Error::InvalidArgument(
                    "regimes apply to integrate and piecewise modes".into(),
                ));
            }
            CostSchedule::new(r.clone())?;
        }
        if self.integration_constant.is_some()
            && matches!(self.mode, Mode::Integrate | Mode::Piecewise)
        {
            return Err(Error::InvalidArgument(
                "H0 applies to closed_form and figure_preset modes; use q0".into(),
            ));
        }
        Ok(())
    }

    pub fn schedule(&self) -> Result<CostSchedule> {
        match &self.regimes {
            Some(r) => CostSchedule::new(r.clone()),
            None => Ok(CostSchedule::single(&self.firm)),
        }
    }

    /// Text that [`parse_scenario`] reads back to an identical scenario.
    pub fn to_config(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "mode = {}", self.mode.as_str());
        match &self.preset {
            Some(name) => {
                let _ = writeln!(out, "preset = {name}");
                for (p, v) in &self.overrides {
                    let _ = writeln!(out, "{p} = {v:?}");
                }
            }
            None => {
                for p in Param::ALL {
                    if p == Param::InitialFlow && self.integration_constant.is_some() {
                        continue;
                    }
                    let _ = writeln!(out, "{p} = {:?}", self.firm.get(p));
                }
            }
        }
        if let Some(h) = self.integration_constant {
            let _ = writeln!(out, "H0 = {h:?}");
        }
        let _ = writeln!(out, "t_span = [{:?}, {:?}]", self.t_span.0, self.t_span.1);
        let _ = writeln!(out, "step = {:?}", self.step);
        for r in self.regimes.iter().flatten() {
            let _ = writeln!(
                out,
                "regime = {:?}, {:?}, {:?}, {:?}",
                r.q_low, r.q_high, r.base_unit_cost, r.cost_slope
            );
        }
        out
    }

    /// Labelled trajectories with price, cost and profit filled in.
    pub fn run(&self) -> Result<Vec<Trajectory>> {
        self.validate()?;
        let firm = &self.firm;
        let mut out = Vec::new();
        match self.mode {
            Mode::FigurePreset => {
                let name = self.preset.as_deref().unwrap_or_default();
                for series in figure_preset(name)?.series {
                    let mut p = series.params;
                    for (&k, &v) in &self.overrides {
                        p.set(k, v);
                    }
                    let h0 = if out.is_empty() {
                        self.integration_constant
                            .unwrap_or(series.integration_constant)
                    } else {
                        series.integration_constant
                    };
                    let seg =
                        Segment::Exponential(RegimeSolution::with_constant(&p, h0, self.t_span.0)?);
                    let mut t = sample_segment(&seg, self.t_span, self.step)?;
                    t.label = series.label;
                    t.enrich(&p, None);
                    out.push(t);
                }
                return Ok(out);
            }
            Mode::ClosedForm => {
                let mut t = match self.integration_constant {
                    Some(h0) => {
                        let seg = Segment::Exponential(RegimeSolution::with_constant(
                            firm,
                            h0,
                            self.t_span.0,
                        )?);
                        sample_segment(&seg, self.t_span, self.step)?
                    }
                    None => {
                        closed_form_trajectory(firm, firm.initial_flow, self.t_span, self.step)?
                    }
                };
                t.enrich(firm, None);
                out.push(t);
            }
            Mode::Integrate | Mode::Piecewise => {
                let schedule = self.schedule()?;
                let mut t = if self.mode == Mode::Integrate {
                    integrate(firm, &schedule, firm.initial_flow, self.t_span, self.step)?
                } else {
                    simulate_piecewise(firm, &schedule, firm.initial_flow, self.t_span, self.step)?
                        .trajectory
                };
                t.enrich(firm, Some(&schedule));
                out.push(t);
            }
        }
        out[0].label = self.mode.as_str().to_string();
        Ok(out)
    }
}
