use super::{
    bankrupt_at_start, boundaries, check_initial_flow, check_span, sliding_after_switch, Boundary,
    EventKind, Grid, Segment, Sliding, Trajectory, EVENT_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::firm_model::{CostSchedule, FirmParams};

/// One stitched closed-form piece, valid on `[segment.t_start(), t_end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub regime: usize,
    pub segment: Segment,
    pub t_end: f64,
    pub accumulated_start: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePath {
    pub trajectory: Trajectory,
    pub pieces: Vec<Piece>,
}

impl PiecewisePath {
    /// Flow at `t`, from the piece covering it (the later piece at a switch).
    pub fn q_at(&self, t: f64) -> Option<f64> {
        self.pieces
            .iter()
            .rev()
            .find(|p| p.segment.t_start() <= t && t <= p.t_end)
            .map(|p| p.segment.q_at(t))
    }
}

/// Stitch closed-form regime solutions: inside a regime q follows its exact
/// solution, at a boundary crossing (solved to full precision on the closed
/// form) the next regime's H0 is refit so that q stays continuous.
/// Samples are taken on the `step` grid plus every event time.
pub fn simulate_piecewise(
    params: &FirmParams,
    schedule: &CostSchedule,
    q_init: f64,
    t_span: (f64, f64),
    step: f64,
) -> Result<PiecewisePath> {
    if params.inertia < 0.0 {
        return Err(Error::validation("m >= 0"));
    }
    if params.inertia == 0.0 && schedule.len() > 1 {
        return Err(Error::ZeroMass);
    }
    check_span(t_span, step)?;
    check_initial_flow(q_init)?;

    let (t0, t1) = t_span;
    let grid = Grid::new(t_span, step);
    let mut traj = Trajectory::new("");
    let mut pieces = Vec::new();
    let mut regime = schedule.index_of(q_init);
    let rp = schedule.params_for(params, regime);

    let mut segment = Segment::solve(&rp, q_init, t0)?;
    let q_start = segment.q_at(t0);
    if q_start <= 0.0 && (q_start < 0.0 || bankrupt_at_start(&rp, q_start, t0)) {
        traj.push(t0, 0.0, 0.0);
        traj.mark(t0, EventKind::Bankruptcy);
        return Ok(PiecewisePath {
            trajectory: traj,
            pieces,
        });
    }
    traj.push(t0, q_start, 0.0);

    let mut t = t0;
    let mut acc_start = 0.0;
    let mut sliding: Option<Sliding> = None;
    let mut k = 1usize;
    loop {
        // next event on (t, t1]
        let event: Option<(f64, Option<Boundary>)> = match sliding {
            Some(s) => (s.release_at <= t1).then_some((s.release_at, None)),
            None => {
                let (lower, upper) = boundaries(schedule, regime);
                [Some(lower), upper]
                    .into_iter()
                    .flatten()
                    .filter_map(|b| {
                        segment
                            .first_crossing(b.level(), t, t1, 0.0)
                            .map(|te| (te, Some(b)))
                    })
                    .min_by(|a, b| a.0.total_cmp(&b.0))
            }
        };
        let t_stop = event.map_or(t1, |e| e.0);

        while k <= grid.last_index() && grid.at(k) < t_stop {
            let tk = grid.at(k);
            traj.push(
                tk,
                segment.q_at(tk).max(0.0),
                segment.accumulated(t, tk, acc_start),
            );
            k += 1;
        }

        let acc_stop = segment.accumulated(t, t_stop, acc_start);
        let q_stop = segment.q_at(t_stop);
        pieces.push(Piece {
            regime,
            segment,
            t_end: t_stop,
            accumulated_start: acc_start,
        });

        let Some((te, boundary)) = event else {
            traj.push(t1, q_stop.max(0.0), acc_stop);
            traj.mark(t1, EventKind::Horizon);
            break;
        };

        match boundary {
            Some(Boundary::Bankruptcy) => {
                traj.push(te, 0.0, acc_stop);
                traj.mark(te, EventKind::Bankruptcy);
                break;
            }
            Some(b) => {
                traj.push(te, q_stop, acc_stop);
                traj.mark(te, EventKind::RegimeSwitch);
                let next = if matches!(b, Boundary::Up(_)) {
                    regime + 1
                } else {
                    regime - 1
                };
                sliding = sliding_after_switch(params, schedule, regime, next, q_stop, te);
                regime = next;
                segment = match sliding {
                    Some(s) => {
                        traj.mark(te, EventKind::Sliding);
                        Segment::hold(s.q, te)
                    }
                    None => Segment::solve(&schedule.params_for(params, regime), q_stop, te)?,
                };
            }
            None => {
                // release from a held boundary
                let s = sliding.take().expect("release without sliding");
                traj.push(te, s.q, acc_stop);
                traj.mark(te, EventKind::RegimeSwitch);
                regime = s.release_to;
                segment = Segment::solve(&schedule.params_for(params, regime), s.q, te)?;
            }
        }
        t = te;
        acc_start = acc_stop;
    }
    Ok(PiecewisePath {
        trajectory: traj,
        pieces,
    })
}

/// Single-regime closed-form trajectory from `(t_span.0, q_init)`.
/// With `m = 0` the flow jumps to the zero-force level at once.
pub fn closed_form_trajectory(
    params: &FirmParams,
    q_init: f64,
    t_span: (f64, f64),
    step: f64,
) -> Result<Trajectory> {
    simulate_piecewise(params, &CostSchedule::single(params), q_init, t_span, step)
        .map(|p| p.trajectory)
}

/// Sample a given segment on the grid, ending early (with a bankruptcy
/// event) if q reaches zero. Used when the integration constant is imposed
/// rather than fitted.
pub fn sample_segment(segment: &Segment, t_span: (f64, f64), step: f64) -> Result<Trajectory> {
    check_span(t_span, step)?;
    let (t0, t1) = t_span;
    let grid = Grid::new(t_span, step);
    let mut traj = Trajectory::new("");
    let q0 = segment.q_at(t0);
    if !(q0 >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "negative initial flow {q0}"
        )));
    }
    let hit = segment.first_crossing(0.0, t0, t1, EVENT_TOLERANCE * 1e-3);
    let t_stop = hit.unwrap_or(t1);
    for k in 0..=grid.last_index() {
        let tk = grid.at(k);
        if tk >= t_stop && k > 0 {
            break;
        }
        let q = segment.q_at(tk);
        if !q.is_finite() {
            return Err(Error::NonFiniteState { t: tk });
        }
        traj.push(tk, q.max(0.0), segment.accumulated(t0, tk, 0.0));
    }
    match hit {
        Some(te) => {
            traj.push(te, 0.0, segment.accumulated(t0, te, 0.0));
            traj.mark(te, EventKind::Bankruptcy);
        }
        None => {
            traj.push(t1, segment.q_at(t1), segment.accumulated(t0, t1, 0.0));
            traj.mark(t1, EventKind::Horizon);
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, RegimeSolution};
    use crate::firm_model::Param;

    fn fig1a() -> FirmParams {
        FirmParams::untrended(100.0, 20.0, 0.08, 2.0)
    }

    #[test]
    fn single_regime_is_the_closed_form() {
        let p = fig1a();
        let path =
            simulate_piecewise(&p, &CostSchedule::single(&p), 900.0, (0.0, 50.0), 0.5).unwrap();
        let exact = RegimeSolution::fit(&p, 900.0, 0.0).unwrap();
        assert_eq!(path.pieces.len(), 1);
        for s in &path.trajectory.samples {
            assert_eq!(s.q, exact.q_at(s.t));
            assert_eq!(s.accumulated, exact.accumulated(0.0, s.t, 0.0));
        }
    }

    #[test]
    fn two_phase_growth_switches_continuously() {
        let p = fig1a();
        let sched = CostSchedule::two_phase_reference();
        let path = simulate_piecewise(&p, &sched, 0.0, (0.0, 100.0), 0.01).unwrap();
        let switches: Vec<_> = path.trajectory.events_of(EventKind::RegimeSwitch).collect();
        assert_eq!(switches.len(), 1);
        let ts = switches[0].t;
        assert!((ts - 4.0 * 11f64.ln()).abs() < 1e-9, "{ts}");
        let (before, after) = (&path.pieces[0], &path.pieces[1]);
        assert_eq!(before.t_end, ts);
        let jump = (before.segment.q_at(ts) - after.segment.q_at(ts)).abs();
        assert!(jump <= 1e-12 * 200.0, "jump {jump}");
        let expect = 1000.0 - 800.0 * (-0.04 * (100.0 - ts)).exp();
        assert!((path.trajectory.last().unwrap().q - expect).abs() < 1e-9);

        let rk = integrate(&p, &sched, 0.0, (0.0, 100.0), 0.01).unwrap();
        let dev = rk
            .samples
            .iter()
            .map(|s| (s.q - path.q_at(s.t).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(dev <= 1e-5, "{dev}");
    }

    #[test]
    fn bankruptcy_truncates_path() {
        let p = fig1a().with(Param::PopularityTrend, -4.0);
        let t = closed_form_trajectory(&p, 1000.0, (0.0, 100.0), 0.01).unwrap();
        let tb = t.bankruptcy_time().unwrap();
        assert!((tb - 39.940575099019).abs() < 1e-9, "{tb}");
        assert_eq!(t.last().unwrap().t, tb);
        assert_eq!(t.last().unwrap().q, 0.0);
    }

    #[test]
    fn sliding_release_matches_integrator() {
        let p = fig1a().with(Param::PopularityTrend, -1.0);
        let sched = CostSchedule::two_phase_reference();
        let path = simulate_piecewise(&p, &sched, 1000.0, (0.0, 200.0), 0.01).unwrap();
        let rk = integrate(&p, &sched, 1000.0, (0.0, 200.0), 0.01).unwrap();
        let kinds = |t: &Trajectory| t.events.iter().map(|e| e.kind).collect::<Vec<_>>();
        assert_eq!(kinds(&path.trajectory), kinds(&rk));
        for (a, b) in path.trajectory.events.iter().zip(&rk.events) {
            assert!((a.t - b.t).abs() < 1e-6, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn static_mode_path() {
        let p = fig1a().with(Param::Inertia, 0.0);
        let t = closed_form_trajectory(&p, 10.0, (0.0, 5.0), 1.0).unwrap();
        assert!(t.samples.iter().all(|s| s.q == 1000.0));
        let err = simulate_piecewise(
            &p,
            &CostSchedule::two_phase_reference(),
            10.0,
            (0.0, 5.0),
            1.0,
        );
        assert!(matches!(err, Err(Error::ZeroMass)));
    }

    #[test]
    fn sample_segment_with_imposed_constant() {
        let p = FirmParams::untrended(100.0, 90.0, -0.5, 2.0);
        let seg = Segment::Exponential(RegimeSolution::with_constant(&p, 20.0, 0.0).unwrap());
        let t = sample_segment(&seg, (0.0, 10.0), 0.01).unwrap();
        assert_eq!(t.samples[0].q, 0.0);
        assert_eq!(t.len(), 1001);
        assert!(t.samples.windows(2).all(|w| w[1].q > w[0].q));
    }
}
