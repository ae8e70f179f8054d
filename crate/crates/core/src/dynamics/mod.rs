//! Trajectories of the Newtonian adjustment law `m·q' = ∂Π/∂q`.
//!
//! Three routes produce a [`Trajectory`]:
//!
//! * [`Segment`] closed forms for a single regime (exponential for `B ≠ 0`,
//!   polynomial for `B = 0`, the static jump for `m = 0`);
//! * [`simulate_piecewise`], which stitches closed forms across cost regimes
//!   with exact switch times and continuity of q;
//! * [`integrate`], a fixed-step RK4 integrator with bisection event
//!   location, usable as an independent check on the other two.
//!
//! The flow q = 0 is absorbing: reaching it ends the path with a
//! bankruptcy event.

mod integrate;
mod piecewise;
mod solution;
mod trajectory;

pub use integrate::integrate;
pub use piecewise::{
    closed_form_trajectory, sample_segment, simulate_piecewise, Piece, PiecewisePath,
};
pub use solution::{DriftSolution, LinearPath, RegimeSolution, Segment};
pub use trajectory::{evaluate_trajectory, Event, EventKind, Sample, Trajectory};

use crate::error::{Error, Result};
use crate::firm_model::{CostSchedule, FirmParams};

pub const DEFAULT_STEP: f64 = 0.01;
/// Time tolerance (y) for locating regime switches and bankruptcy.
pub const EVENT_TOLERANCE: f64 = 1e-9;

pub(crate) fn check_span(t_span: (f64, f64), step: f64) -> Result<()> {
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite() && t0 < t1) {
        return Err(Error::InvalidArgument(format!("time span [{t0}, {t1}]")));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidArgument(format!("step {step}")));
    }
    Ok(())
}

pub(crate) fn check_initial_flow(q_init: f64) -> Result<()> {
    if !(q_init.is_finite() && q_init >= 0.0) {
        return Err(Error::InvalidArgument(format!("initial flow {q_init}")));
    }
    Ok(())
}

/// Output grid `t0 + k·step`, with the last point pinned to `t1`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Grid {
    t0: f64,
    t1: f64,
    step: f64,
    last: usize,
}

impl Grid {
    pub fn new(t_span: (f64, f64), step: f64) -> Self {
        let (t0, t1) = t_span;
        // a final sliver shorter than 1e-9 steps is absorbed into the last step
        let last = (((t1 - t0) / step) - 1e-9).ceil().max(1.0) as usize;
        Grid { t0, t1, step, last }
    }

    pub fn at(&self, k: usize) -> f64 {
        if k >= self.last {
            self.t1
        } else {
            self.t0 + k as f64 * self.step
        }
    }

    pub fn last_index(&self) -> usize {
        self.last
    }
}

/// Where the active regime ends on either side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Boundary {
    Bankruptcy,
    Down(f64),
    Up(f64),
}

impl Boundary {
    pub fn level(self) -> f64 {
        match self {
            Boundary::Bankruptcy => 0.0,
            Boundary::Down(q) | Boundary::Up(q) => q,
        }
    }
}

pub(crate) fn boundaries(schedule: &CostSchedule, regime: usize) -> (Boundary, Option<Boundary>) {
    let r = &schedule.regimes()[regime];
    let lower = if regime == 0 {
        Boundary::Bankruptcy
    } else {
        Boundary::Down(r.q_low)
    };
    let upper = r.q_high.is_finite().then_some(Boundary::Up(r.q_high));
    (lower, upper)
}

/// A flow held at the boundary below regime `upper`, and when it lets go.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Sliding {
    pub q: f64,
    pub release_at: f64,
    pub release_to: usize,
}

/// After switching into `to` across the boundary at `q`, decide whether the
/// forces on both sides point at the boundary. The forces differ between
/// regimes only through A and B, and both move with the shared trend
/// (c + G)·t, so the release time solves a linear equation.
pub(crate) fn sliding_after_switch(
    params: &FirmParams,
    schedule: &CostSchedule,
    from: usize,
    to: usize,
    q: f64,
    t: f64,
) -> Option<Sliding> {
    let force_to = schedule.params_for(params, to).force(q, t);
    let upward = to > from;
    let pushed_back = if upward {
        force_to < 0.0
    } else {
        force_to > 0.0
    };
    if !pushed_back {
        return None;
    }
    let (below, above) = if upward { (from, to) } else { (to, from) };
    let k = params.trend();
    let release = |regime: usize| {
        let f0 = schedule.params_for(params, regime).force(q, 0.0);
        (-f0 / k).max(t)
    };
    let (release_at, release_to) = if k > 0.0 {
        (release(above), above)
    } else if k < 0.0 {
        (release(below), below)
    } else {
        (f64::INFINITY, to)
    };
    Some(Sliding {
        q,
        release_at,
        release_to,
    })
}

/// Zero initial flow with a non-positive force is immediate bankruptcy.
pub(crate) fn bankrupt_at_start(params: &FirmParams, q_init: f64, t0: f64) -> bool {
    q_init == 0.0 && params.force(0.0, t0) <= 0.0
}
