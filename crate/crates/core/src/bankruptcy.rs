//! Survival time of a declining firm: the first time its flow of production
//! reaches zero, and how that time responds to the model parameters.
//!
//! No closed form exists for the hitting time of
//! `q(t) = K + (c+G)/B·t + H0·exp(−Bt/m)`, so it is bracketed by doubling
//! from `[0, 1]` y and refined by bisection. Every closed-form segment has
//! at most one turning point, which is checked alongside the probes so the
//! bracket always holds the *first* crossing.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::dynamics::{simulate_piecewise, EventKind, Segment};
use crate::error::{Error, Result};
use crate::firm_model::{CostSchedule, FirmParams, Param};
use crate::roots;

/// Upper limit (y) of the survival-time search.
pub const HORIZON: f64 = 1e6;
/// Required |q(T)| at a reported survival time.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_REL_STEP: f64 = 0.01;
/// Parameters whose effect on survival time is reported.
pub const SENSITIVITY_PARAMS: [Param; 6] = [
    Param::BasePrice,
    Param::Inertia,
    Param::PopularityTrend,
    Param::TechnologyTrend,
    Param::CostSlope,
    Param::BaseUnitCost,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegimeClass {
    StableEquilibrium,
    UnboundedGrowth,
    Declining,
    Static,
}

impl RegimeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            RegimeClass::StableEquilibrium => "stable_equilibrium",
            RegimeClass::UnboundedGrowth => "unbounded_growth",
            RegimeClass::Declining => "declining",
            RegimeClass::Static => "static",
        }
    }
}

impl fmt::Display for RegimeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum LongRun {
    PlusInfinity,
    MinusInfinity,
    Limit(f64),
}

fn long_run(seg: &Segment) -> LongRun {
    let by_sign = |x: f64, otherwise: f64| {
        if x > 0.0 {
            LongRun::PlusInfinity
        } else if x < 0.0 {
            LongRun::MinusInfinity
        } else {
            LongRun::Limit(otherwise)
        }
    };
    match seg {
        Segment::Exponential(s) if s.decay_rate < 0.0 && s.integration_constant != 0.0 => {
            by_sign(s.integration_constant, 0.0)
        }
        Segment::Exponential(s) => by_sign(s.slope, s.level),
        Segment::Drift(s) if s.jerk != 0.0 => by_sign(s.jerk, 0.0),
        Segment::Drift(s) => by_sign(s.acceleration, s.q_start),
        Segment::Linear(s) => by_sign(s.slope, s.level),
    }
}

/// Regime of the single-regime path starting from `params.initial_flow`.
///
/// A path that reaches zero at any finite time is declining, even if it
/// would grow afterwards: q = 0 is absorbing. A path decaying toward zero
/// without reaching it is declining too. Otherwise the long-run behaviour
/// decides between unbounded growth and a stable positive level.
pub fn classify(params: &FirmParams) -> RegimeClass {
    if params.inertia == 0.0 {
        return RegimeClass::Static;
    }
    let q0 = params.initial_flow;
    let Ok(seg) = Segment::solve(params, q0, 0.0) else {
        return RegimeClass::Static;
    };
    if q0 == 0.0 && params.force(0.0, 0.0) <= 0.0 {
        return RegimeClass::Declining;
    }
    let dips = seg.turning_point().is_some_and(|tp| seg.q_at(tp) <= 0.0);
    match long_run(&seg) {
        LongRun::MinusInfinity => RegimeClass::Declining,
        _ if dips => RegimeClass::Declining,
        LongRun::PlusInfinity => RegimeClass::UnboundedGrowth,
        LongRun::Limit(l) if l <= 0.0 => RegimeClass::Declining,
        LongRun::Limit(_) => RegimeClass::StableEquilibrium,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Survival {
    /// y
    pub time: f64,
    /// |q(time)| (unit/y)
    pub residual: f64,
}

/// First time the closed-form path from `q_init` reaches zero. `None` for
/// firms that are not declining.
pub fn survival_time(params: &FirmParams, q_init: f64) -> Result<Option<Survival>> {
    if params.inertia == 0.0 {
        return Err(Error::ZeroMass);
    }
    if !(q_init > 0.0 && q_init.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "initial flow {q_init} must be positive"
        )));
    }
    let params = params.with(Param::InitialFlow, q_init);
    if classify(&params) != RegimeClass::Declining {
        return Ok(None);
    }
    let seg = Segment::solve(&params, q_init, 0.0)?;
    let q = |t: f64| seg.q_at(t);
    let tp = seg.turning_point().filter(|&tp| q(tp) <= 0.0);
    // decay toward zero never reaches it, though exp() underflows far out
    if tp.is_none() && long_run(&seg) == LongRun::Limit(0.0) {
        return Err(Error::NoBracket { horizon: HORIZON });
    }
    let crossed = |hi: f64| q(hi) <= 0.0 || tp.is_some_and(|tp| tp <= hi);
    let (mut lo, mut hi) = roots::expand_bracket(crossed, 0.0, 1.0, HORIZON)
        .ok_or(Error::NoBracket { horizon: HORIZON })?;

    // make q monotone on [lo, hi]
    if let Some(turn) = seg.turning_point().filter(|&tp| tp > lo && tp < hi) {
        if q(turn) <= 0.0 {
            hi = turn;
        } else {
            lo = turn;
        }
    }
    if q(hi) == 0.0 {
        return Ok(Some(Survival {
            time: hi,
            residual: 0.0,
        }));
    }
    let (time, value) = roots::bisect(q, lo, hi, 0.0).best();
    Ok(Some(Survival {
        time,
        residual: value.abs(),
    }))
}

/// Survival time along the stitched piecewise path over a cost schedule.
pub fn survival_time_on_schedule(
    params: &FirmParams,
    schedule: &CostSchedule,
    q_init: f64,
) -> Result<Option<Survival>> {
    if params.inertia == 0.0 {
        return Err(Error::ZeroMass);
    }
    let path = simulate_piecewise(params, schedule, q_init, (0.0, HORIZON), HORIZON)?;
    let Some(event) = path.trajectory.events_of(EventKind::Bankruptcy).next() else {
        return Ok(None);
    };
    let residual = path
        .pieces
        .last()
        .map_or(0.0, |p| p.segment.q_at(event.t).abs());
    Ok(Some(Survival {
        time: event.t,
        residual,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sensitivity {
    /// Central-difference ∂T/∂p (y per parameter unit).
    pub gradient: f64,
    pub delta: f64,
    pub t_minus: f64,
    pub t_plus: f64,
}

/// Central difference `(T(p+δ) − T(p−δ)) / 2δ` with `δ = rel_step·|p|`,
/// or `δ = rel_step` in parameter units when `p = 0`.
pub fn sensitivity(
    params: &FirmParams,
    q_init: f64,
    which: Param,
    rel_step: f64,
) -> Result<Sensitivity> {
    if !(rel_step > 0.0 && rel_step.is_finite()) {
        return Err(Error::InvalidArgument(format!("relative step {rel_step}")));
    }
    let base = params.with(Param::InitialFlow, q_init);
    if survival_time(&base, q_init)?.is_none() {
        return Err(Error::NotDeclining(classify(&base)));
    }
    let value = base.get(which);
    let delta = if value == 0.0 {
        rel_step
    } else {
        rel_step * value.abs()
    };
    let at = |side: &'static str, v: f64| -> Result<f64> {
        let lost = |reason: String| Error::RootLost {
            param: which.to_string(),
            side,
            reason,
        };
        let p = base.with(which, v);
        p.validate().map_err(|e| lost(e.to_string()))?;
        match survival_time(&p, p.initial_flow) {
            Ok(Some(s)) => Ok(s.time),
            Ok(None) => Err(lost(format!("classified {}", classify(&p)))),
            Err(e) => Err(lost(e.to_string())),
        }
    };
    let t_plus = at("plus", value + delta)?;
    let t_minus = at("minus", value - delta)?;
    Ok(Sensitivity {
        gradient: (t_plus - t_minus) / (2.0 * delta),
        delta,
        t_minus,
        t_plus,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BankruptcyReport {
    pub firm_id: String,
    pub regime_class: RegimeClass,
    pub q_star: Option<f64>,
    pub survival_time: Option<f64>,
    pub residual: Option<f64>,
    /// Per-parameter gradient, or the reason it could not be computed.
    pub sensitivities: BTreeMap<Param, std::result::Result<f64, String>>,
    pub error: Option<String>,
}

/// Evaluate one firm; failures land in `error` rather than aborting.
pub fn report(firm_id: &str, params: &FirmParams, with_sensitivities: bool) -> BankruptcyReport {
    let mut out = BankruptcyReport {
        firm_id: firm_id.to_string(),
        regime_class: classify(params),
        q_star: params.static_optimum().ok().map(|s| s.q_star),
        survival_time: None,
        residual: None,
        sensitivities: BTreeMap::new(),
        error: None,
    };
    if let Err(e) = params.validate() {
        out.error = Some(e.to_string());
        return out;
    }
    if out.regime_class != RegimeClass::Declining {
        return out;
    }
    match survival_time(params, params.initial_flow) {
        Ok(Some(s)) => {
            out.survival_time = Some(s.time);
            out.residual = Some(s.residual);
        }
        Ok(None) => {}
        Err(e) => {
            out.error = Some(e.to_string());
            return out;
        }
    }
    if with_sensitivities && out.survival_time.is_some() {
        for p in SENSITIVITY_PARAMS {
            let g = sensitivity(params, params.initial_flow, p, DEFAULT_REL_STEP)
                .map(|s| s.gradient)
                .map_err(|e| e.to_string());
            out.sensitivities.insert(p, g);
        }
    }
    out
}

/// Cartesian grid of parameter values around a base firm.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepGrid {
    pub axes: Vec<(Param, Vec<f64>)>,
}

impl SweepGrid {
    pub fn len(&self) -> usize {
        if self.axes.is_empty() {
            return 1;
        }
        self.axes.iter().map(|(_, v)| v.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Parameters at grid point `index`; the last axis varies fastest.
    pub fn point(&self, base: &FirmParams, mut index: usize) -> FirmParams {
        let mut p = *base;
        for (param, values) in self.axes.iter().rev() {
            p.set(*param, values[index % values.len()]);
            index /= values.len();
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub params: FirmParams,
    pub report: BankruptcyReport,
}

/// One report per grid point, in grid order. Points are evaluated in parallel.
pub fn sweep(
    base: &FirmParams,
    grid: &SweepGrid,
    with_sensitivities: bool,
) -> Result<Vec<SweepPoint>> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty sweep grid".into()));
    }
    Ok((0..grid.len())
        .into_par_iter()
        .map(|index| {
            let params = grid.point(base, index);
            let report = report(&format!("p{index}"), &params, with_sensitivities);
            SweepPoint {
                index,
                params,
                report,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, RegimeSolution};

    fn reference() -> FirmParams {
        FirmParams {
            popularity_trend: -4.0,
            initial_flow: 1000.0,
            ..FirmParams::untrended(100.0, 20.0, 0.08, 2.0)
        }
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&reference()), RegimeClass::Declining);
        let growth = FirmParams {
            initial_flow: 10.0,
            ..FirmParams::untrended(100.0, 90.0, -0.5, 2.0)
        };
        assert_eq!(classify(&growth), RegimeClass::UnboundedGrowth);
        let stable = reference().with(Param::PopularityTrend, 0.0);
        assert_eq!(classify(&stable), RegimeClass::StableEquilibrium);
        assert_eq!(
            classify(&stable.with(Param::Inertia, 0.0)),
            RegimeClass::Static
        );
        // a <= A with B > 0
        assert_eq!(
            classify(&stable.with(Param::BaseUnitCost, 100.0)),
            RegimeClass::Declining
        );
        assert_eq!(
            classify(&stable.with(Param::BaseUnitCost, 120.0)),
            RegimeClass::Declining
        );
        // c + G > 0 with B > 0
        assert_eq!(
            classify(&stable.with(Param::TechnologyTrend, 1.0)),
            RegimeClass::UnboundedGrowth
        );
        // B = 0: the linear trend sign decides
        let flat = stable.with(Param::CostSlope, 0.0);
        assert_eq!(classify(&flat), RegimeClass::UnboundedGrowth);
        assert_eq!(
            classify(&flat.with(Param::BaseUnitCost, 100.0)),
            RegimeClass::StableEquilibrium
        );
        assert_eq!(
            classify(&flat.with(Param::BaseUnitCost, 150.0)),
            RegimeClass::Declining
        );
        assert_eq!(
            classify(&flat.with(Param::PopularityTrend, -1.0)),
            RegimeClass::Declining
        );
        // unstable equilibrium below the start: B < 0, a < A
        let above = FirmParams {
            initial_flow: 30.0,
            ..FirmParams::untrended(80.0, 90.0, -0.5, 2.0)
        };
        assert_eq!(classify(&above), RegimeClass::UnboundedGrowth);
        assert_eq!(
            classify(&above.with(Param::InitialFlow, 10.0)),
            RegimeClass::Declining
        );
    }

    #[test]
    fn growth_with_transient_dip_is_declining() {
        // H0 > 0 with a positive trend: q falls first, then grows
        let p = FirmParams {
            technology_trend: 0.4,
            initial_flow: 5000.0,
            ..FirmParams::untrended(20.0, 60.0, 0.08, 2.0)
        };
        let seg = Segment::solve(&p, 5000.0, 0.0).unwrap();
        let tp = seg.turning_point().unwrap();
        assert!(seg.q_at(tp) < 0.0);
        assert_eq!(classify(&p), RegimeClass::Declining);
        let s = survival_time(&p, 5000.0).unwrap().unwrap();
        assert!(s.time < tp);
        assert!(s.residual <= RESIDUAL_TOLERANCE);
    }

    #[test]
    fn reference_survival_time() {
        let s = survival_time(&reference(), 1000.0).unwrap().unwrap();
        assert!(s.time > 39.0 && s.time < 40.0);
        assert!(s.residual <= RESIDUAL_TOLERANCE);
        // independent check: bisection written out on the explicit formula
        let q = |t: f64| 2250.0 - 50.0 * t - 1250.0 * (-0.04 * t).exp();
        let (mut lo, mut hi) = (39.0, 40.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if q(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((s.time - lo).abs() < 1e-9);
    }

    #[test]
    fn first_hitting_property() {
        let p = reference();
        let s = survival_time(&p, 1000.0).unwrap().unwrap();
        let sol = RegimeSolution::fit(&p, 1000.0, 0.0).unwrap();
        for i in 0..1000 {
            let t = s.time * i as f64 / 1000.0;
            assert!(sol.q_at(t) > 0.0);
        }
    }

    #[test]
    fn stable_firm_has_no_survival_time() {
        let p = reference().with(Param::PopularityTrend, 0.0);
        assert_eq!(survival_time(&p, 1000.0).unwrap(), None);
    }

    #[test]
    fn asymptotic_decline_has_no_bracket() {
        let p = reference()
            .with(Param::PopularityTrend, 0.0)
            .with(Param::BaseUnitCost, 100.0);
        assert!(matches!(
            survival_time(&p, 1000.0),
            Err(Error::NoBracket { .. })
        ));
    }

    #[test]
    fn tiny_initial_flow_fails_fast() {
        // with a > A the flow first rises from near zero, so take a < A:
        // q'(0) = (a − A)/m = −10
        let p = reference().with(Param::BaseUnitCost, 120.0);
        let s = survival_time(&p, 1e-6).unwrap().unwrap();
        assert!(s.time > 0.0 && s.time < 1e-6, "{}", s.time);
        assert!((s.time - 1e-7).abs() < 1e-12);
    }

    #[test]
    fn survival_errors() {
        let p = reference();
        assert!(matches!(
            survival_time(&p.with(Param::Inertia, 0.0), 1000.0),
            Err(Error::ZeroMass)
        ));
        assert!(survival_time(&p, 0.0).is_err());
    }

    #[test]
    fn closed_form_and_integrator_agree() {
        let p = reference();
        let s = survival_time(&p, 1000.0).unwrap().unwrap();
        let traj = integrate(&p, &CostSchedule::single(&p), 1000.0, (0.0, 100.0), 0.01).unwrap();
        assert!((traj.bankruptcy_time().unwrap() - s.time).abs() < 1e-6);
        let on_schedule = survival_time_on_schedule(&p, &CostSchedule::single(&p), 1000.0)
            .unwrap()
            .unwrap();
        assert!((on_schedule.time - s.time).abs() < 1e-9);
    }

    #[test]
    fn sensitivity_signs_at_reference() {
        let p = reference();
        let expected = [
            (Param::BasePrice, 1.0),
            (Param::Inertia, 1.0),
            (Param::PopularityTrend, 1.0),
            (Param::TechnologyTrend, 1.0),
            // a steeper cost curve lowers the level the firm declines from
            (Param::CostSlope, -1.0),
            (Param::BaseUnitCost, -1.0),
        ];
        for (param, sign) in expected {
            let s = sensitivity(&p, 1000.0, param, DEFAULT_REL_STEP).unwrap();
            assert_eq!(s.gradient.signum(), sign, "{param}: {s:?}");
        }
    }

    #[test]
    fn sensitivity_root_lost() {
        // dropping c by 1% of... make c tiny so the minus side stops declining
        let p = reference().with(Param::PopularityTrend, -1e-3);
        let err = sensitivity(&p, 1000.0, Param::PopularityTrend, 2.0).unwrap_err();
        assert!(matches!(err, Error::RootLost { side: "plus", .. }), "{err}");
        let stable = reference().with(Param::PopularityTrend, 0.0);
        assert!(matches!(
            sensitivity(&stable, 1000.0, Param::BasePrice, 0.01),
            Err(Error::NotDeclining(RegimeClass::StableEquilibrium))
        ));
    }

    #[test]
    fn sweep_is_monotone_in_a_and_isolates_errors() {
        let grid = SweepGrid {
            axes: vec![(Param::BasePrice, vec![90.0, 100.0, 110.0])],
        };
        let out = sweep(&reference(), &grid, false).unwrap();
        let times: Vec<f64> = out
            .iter()
            .map(|p| p.report.survival_time.unwrap())
            .collect();
        assert!(times.windows(2).all(|w| w[1] > w[0]), "{times:?}");

        let grid = SweepGrid {
            axes: vec![(Param::PopularityTrend, vec![-4.0, 0.0, -2.0])],
        };
        let out = sweep(&reference(), &grid, false).unwrap();
        assert!(out[0].report.survival_time.is_some());
        assert_eq!(out[1].report.survival_time, None);
        assert_eq!(out[1].report.regime_class, RegimeClass::StableEquilibrium);
        assert!(out[2].report.survival_time.is_some());

        let single = sweep(&reference(), &SweepGrid::default(), false).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(
            single[0].report.survival_time,
            Some(survival_time(&reference(), 1000.0).unwrap().unwrap().time)
        );
    }

    #[test]
    fn grid_ordering() {
        let grid = SweepGrid {
            axes: vec![
                (Param::BasePrice, vec![1.0, 2.0]),
                (Param::Inertia, vec![10.0, 20.0, 30.0]),
            ],
        };
        assert_eq!(grid.len(), 6);
        let p = grid.point(&reference(), 4);
        assert_eq!((p.base_price, p.inertia), (2.0, 20.0));
    }

    #[test]
    fn report_embeds_errors() {
        let bad = reference().with(Param::BasePrice, 0.0);
        let r = report("x", &bad, false);
        assert_eq!(r.error.as_deref(), Some("a > 0 violated"));
        let r = report("ref", &reference(), true);
        assert_eq!(r.sensitivities.len(), 6);
        assert!(r.sensitivities.values().all(|g| g.is_ok()));
    }
}
