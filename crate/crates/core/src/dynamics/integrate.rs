use super::{
    bankrupt_at_start, boundaries, check_initial_flow, check_span, sliding_after_switch, Boundary,
    EventKind, Grid, Sliding, Trajectory, EVENT_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::firm_model::{CostSchedule, FirmParams};
use crate::roots;

type State = [f64; 2];

/// Classical fourth-order Runge–Kutta step.
fn rk4(f: &impl Fn(f64, State) -> State, t: f64, y: State, h: f64) -> State {
    let add = |y: State, k: State, s: f64| [y[0] + s * k[0], y[1] + s * k[1]];
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, add(y, k1, 0.5 * h));
    let k3 = f(t + 0.5 * h, add(y, k2, 0.5 * h));
    let k4 = f(t + h, add(y, k3, h));
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Integrate `m·q' = ∂Π/∂q` (and `Q' = q`) with fixed-step RK4 over
/// `t_span`, switching cost regimes at their boundaries. Each boundary
/// crossing is located by bisecting the step that brackets it and gets an
/// exact sample. Samples carry q and Q only; see [`Trajectory::enrich`].
pub fn integrate(
    params: &FirmParams,
    schedule: &CostSchedule,
    q_init: f64,
    t_span: (f64, f64),
    step: f64,
) -> Result<Trajectory> {
    if params.inertia == 0.0 {
        return Err(Error::ZeroMass);
    }
    if !(params.inertia > 0.0) {
        return Err(Error::validation("m >= 0"));
    }
    check_span(t_span, step)?;
    check_initial_flow(q_init)?;
    #[cfg(debug_assertions)]
    for i in 0..schedule.len() {
        schedule.params_for(params, i).audit_dimensions()?;
    }

    let m = params.inertia;
    let (t0, t1) = t_span;
    let grid = Grid::new(t_span, step);
    let mut traj = Trajectory::new("");
    let mut regime = schedule.index_of(q_init);
    let mut t = t0;
    let mut y: State = [q_init, 0.0];
    traj.push(t, q_init, 0.0);
    if bankrupt_at_start(&schedule.params_for(params, regime), q_init, t0) {
        traj.mark(t0, EventKind::Bankruptcy);
        return Ok(traj);
    }

    let mut sliding: Option<Sliding> = None;
    let mut cost_negative = false;
    let mut k = 0usize;
    while t < t1 {
        let t_target = grid.at(k + 1);
        if t_target <= t {
            k += 1;
            continue;
        }

        if let Some(s) = sliding {
            let t_end = t_target.min(s.release_at);
            y = [s.q, y[1] + s.q * (t_end - t)];
            t = t_end;
            traj.push(t, y[0], y[1]);
            if t == s.release_at {
                regime = s.release_to;
                sliding = None;
                traj.mark(t, EventKind::RegimeSwitch);
            }
            if t == t_target {
                k += 1;
            }
            continue;
        }

        let rp = schedule.params_for(params, regime);
        let rhs = |t: f64, y: State| [rp.force(y[0], t) / m, y[0]];
        let y_new = rk4(&rhs, t, y, t_target - t);
        if !(y_new[0].is_finite() && y_new[1].is_finite()) {
            return Err(Error::NonFiniteState { t: t_target });
        }

        let (lower, upper) = boundaries(schedule, regime);
        let crossed_lower = match lower {
            Boundary::Bankruptcy => y_new[0] <= 0.0,
            b => y_new[0] < b.level(),
        };
        let crossed_upper = upper.is_some_and(|b| y_new[0] >= b.level());
        let locate = |b: Boundary| {
            let g = |h: f64| rk4(&rhs, t, y, h)[0] - b.level();
            if g(0.0) == 0.0 {
                return (t, b);
            }
            let bracket = roots::bisect(g, 0.0, t_target - t, EVENT_TOLERANCE);
            (t + bracket.crossed, b)
        };
        let event = [
            crossed_lower.then(|| locate(lower)),
            upper.filter(|_| crossed_upper).map(locate),
        ]
        .into_iter()
        .flatten()
        .min_by(|a, b| a.0.total_cmp(&b.0));

        let Some((te, boundary)) = event else {
            t = t_target;
            y = y_new;
            k += 1;
            traj.push(t, y[0], y[1]);
            let negative = rp.unit_cost(y[0], t).is_ok_and(|g| g < 0.0);
            if negative && !cost_negative {
                traj.mark(t, EventKind::NegativeUnitCost);
            }
            cost_negative = negative;
            continue;
        };

        let ye = rk4(&rhs, t, y, te - t);
        t = te;
        y = [boundary.level(), ye[1]];
        traj.push(t, y[0], y[1]);
        match boundary {
            Boundary::Bankruptcy => {
                traj.mark(t, EventKind::Bankruptcy);
                return Ok(traj);
            }
            Boundary::Up(_) | Boundary::Down(_) => {
                let next = if matches!(boundary, Boundary::Up(_)) {
                    regime + 1
                } else {
                    regime - 1
                };
                traj.mark(t, EventKind::RegimeSwitch);
                sliding = sliding_after_switch(params, schedule, regime, next, y[0], t);
                if sliding.is_some() {
                    traj.mark(t, EventKind::Sliding);
                }
                regime = next;
            }
        }
    }
    traj.mark(t1, EventKind::Horizon);
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::RegimeSolution;
    use crate::firm_model::Param;

    fn fig1a() -> FirmParams {
        FirmParams::untrended(100.0, 20.0, 0.08, 2.0)
    }

    #[test]
    fn rk4_matches_closed_form() {
        let p = fig1a();
        let traj = integrate(&p, &CostSchedule::single(&p), 900.0, (0.0, 100.0), 0.01).unwrap();
        let exact = RegimeSolution::fit(&p, 900.0, 0.0).unwrap();
        assert_eq!(traj.len(), 10001);
        let dev = traj
            .samples
            .iter()
            .map(|s| (s.q - exact.q_at(s.t)).abs())
            .fold(0.0, f64::max);
        assert!(dev <= 1e-6, "max deviation {dev}");
        assert_eq!(traj.samples.last().unwrap().t, 100.0);
        assert_eq!(traj.events.last().unwrap().kind, EventKind::Horizon);
    }

    #[test]
    fn equilibrium_is_constant() {
        let p = fig1a();
        let traj = integrate(&p, &CostSchedule::single(&p), 1000.0, (0.0, 30.0), 0.01).unwrap();
        assert!(traj.samples.iter().all(|s| s.q == 1000.0));
    }

    #[test]
    fn two_phase_switch_time() {
        let p = fig1a();
        let sched = CostSchedule::two_phase_reference();
        let traj = integrate(&p, &sched, 0.0, (0.0, 100.0), 0.01).unwrap();
        let sw: Vec<_> = traj.events_of(EventKind::RegimeSwitch).collect();
        assert_eq!(sw.len(), 1);
        assert!((sw[0].t - 4.0 * 11f64.ln()).abs() < 1e-6, "{}", sw[0].t);
        // phase 2 relaxes from 200 toward 1000 at rate B/m = 0.04
        let last = traj.last().unwrap();
        let expect = 1000.0 - 800.0 * (-0.04 * (100.0 - sw[0].t)).exp();
        assert!((last.q - expect).abs() < 1e-6, "{} vs {expect}", last.q);
        let at_switch = traj.samples.iter().find(|s| s.t == sw[0].t).unwrap();
        assert_eq!(at_switch.q, 200.0);
    }

    #[test]
    fn trended_decline_hits_zero() {
        let p = fig1a().with(Param::PopularityTrend, -4.0);
        let traj = integrate(&p, &CostSchedule::single(&p), 1000.0, (0.0, 100.0), 0.01).unwrap();
        let tb = traj.bankruptcy_time().unwrap();
        assert!(tb > 39.0 && tb < 40.0);
        assert_eq!(traj.last().unwrap().q, 0.0);
        assert_eq!(traj.last().unwrap().t, tb);
        assert!(traj.samples.iter().all(|s| s.q >= 0.0));
        assert!(traj.events_of(EventKind::Horizon).next().is_none());
    }

    #[test]
    fn errors() {
        let p = fig1a();
        let s = CostSchedule::single(&p);
        let zero = p.with(Param::Inertia, 0.0);
        assert!(matches!(
            integrate(&zero, &s, 1.0, (0.0, 1.0), 0.01),
            Err(Error::ZeroMass)
        ));
        assert!(integrate(&p, &s, 1.0, (0.0, 1.0), 0.0).is_err());
        assert!(integrate(&p, &s, -1.0, (0.0, 1.0), 0.01).is_err());
        assert!(integrate(&p, &s, 1.0, (1.0, 1.0), 0.01).is_err());
        let unstable = FirmParams::untrended(100.0, 90.0, -0.5, 2.0);
        let err = integrate(
            &unstable,
            &CostSchedule::single(&unstable),
            10.0,
            (0.0, 1e4),
            0.5,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonFiniteState { .. }));
    }

    #[test]
    fn negative_unit_cost_is_flagged_not_fatal() {
        let p = FirmParams::untrended(100.0, 90.0, -0.5, 2.0);
        let traj = integrate(&p, &CostSchedule::single(&p), 10.0, (0.0, 20.0), 0.01).unwrap();
        assert_eq!(traj.events_of(EventKind::NegativeUnitCost).count(), 1);
        assert_eq!(traj.last().unwrap().t, 20.0);
    }

    #[test]
    fn declining_firm_slides_at_boundary() {
        // Above 200 the firm declines; below, increasing returns push it back up
        // until the negative trend overwhelms the lower regime as well.
        let p = FirmParams {
            popularity_trend: -1.0,
            ..fig1a()
        };
        let sched = CostSchedule::two_phase_reference();
        let traj = integrate(&p, &sched, 1000.0, (0.0, 200.0), 0.01).unwrap();
        let kinds: Vec<_> = traj.events.iter().map(|e| e.kind).collect();
        assert_eq!(
            kinds,
            [
                EventKind::RegimeSwitch,
                EventKind::Sliding,
                EventKind::RegimeSwitch,
                EventKind::Bankruptcy
            ]
        );
        // lower-regime force at q = 200: 10 + 100 − t, zero at t = 110
        assert_eq!(traj.events[2].t, 110.0);
        let held: Vec<_> = traj
            .samples
            .iter()
            .filter(|s| s.t >= traj.events[0].t && s.t <= 110.0)
            .collect();
        assert!(held.iter().all(|s| s.q == 200.0));
    }
}
