use crate::error::{Error, Result};
use crate::firm_model::FirmParams;
use crate::roots;

/// Closed-form solution of `m·q' = a − A − B·q + (c+G)·t` for `B ≠ 0`, `m > 0`:
///
/// ```text
/// q(t) = level + slope·t + H0·exp(−(B/m)·(t − t_start))
/// level = ((a − A)·B − (c + G)·m) / B²,  slope = (c + G) / B
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeSolution {
    pub level: f64,
    pub slope: f64,
    /// H0 (unit/y), the constant of integration.
    pub integration_constant: f64,
    /// B/m (1/y)
    pub decay_rate: f64,
    pub t_start: f64,
}

impl RegimeSolution {
    /// Fit H0 so that `q(t_init) = q_init`.
    pub fn fit(params: &FirmParams, q_init: f64, t_init: f64) -> Result<Self> {
        let mut sol = Self::with_constant(params, 0.0, t_init)?;
        sol.integration_constant = q_init - sol.level - sol.slope * t_init;
        Ok(sol)
    }

    /// Use a given integration constant verbatim.
    pub fn with_constant(params: &FirmParams, h0: f64, t_start: f64) -> Result<Self> {
        let (m, b) = (params.inertia, params.cost_slope);
        if m == 0.0 {
            return Err(Error::ZeroMass);
        }
        if b == 0.0 {
            return Err(Error::ZeroCurvature);
        }
        let k = params.trend();
        Ok(RegimeSolution {
            level: params.driving_force() / b - k * m / (b * b),
            slope: k / b,
            integration_constant: h0,
            decay_rate: b / m,
            t_start,
        })
    }

    fn transient(&self, t: f64) -> f64 {
        self.integration_constant * (-self.decay_rate * (t - self.t_start)).exp()
    }

    pub fn q_at(&self, t: f64) -> f64 {
        self.level + self.slope * t + self.transient(t)
    }

    /// Analytic q'(t).
    pub fn rate_at(&self, t: f64) -> f64 {
        self.slope - self.decay_rate * self.transient(t)
    }

    /// Exact ∫ q from `t0` to `t`, added to `accumulated0`.
    pub fn accumulated(&self, t0: f64, t: f64, accumulated0: f64) -> f64 {
        let linear = self.level * (t - t0) + 0.5 * self.slope * (t * t - t0 * t0);
        let exponential = if self.integration_constant == 0.0 {
            0.0
        } else {
            -(self.transient(t) - self.transient(t0)) / self.decay_rate
        };
        accumulated0 + linear + exponential
    }

    /// Time after `t_start` where q' = 0, if any. At most one exists.
    pub fn turning_point(&self) -> Option<f64> {
        let ratio = self.slope / (self.decay_rate * self.integration_constant);
        if !(ratio > 0.0 && ratio.is_finite()) {
            return None;
        }
        let t = self.t_start - ratio.ln() / self.decay_rate;
        (t > self.t_start).then_some(t)
    }
}

/// Solution for constant returns to scale (B = 0):
/// `q(t) = q_start + ((a − A)/m)·(t − t_start) + ((c + G)/(2m))·(t² − t_start²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftSolution {
    pub q_start: f64,
    pub t_start: f64,
    /// (a − A)/m
    pub acceleration: f64,
    /// (c + G)/m
    pub jerk: f64,
}

impl DriftSolution {
    pub fn fit(params: &FirmParams, q_init: f64, t_init: f64) -> Result<Self> {
        if params.inertia == 0.0 {
            return Err(Error::ZeroMass);
        }
        Ok(DriftSolution {
            q_start: q_init,
            t_start: t_init,
            acceleration: params.driving_force() / params.inertia,
            jerk: params.trend() / params.inertia,
        })
    }

    pub fn q_at(&self, t: f64) -> f64 {
        let ts = self.t_start;
        self.q_start + self.acceleration * (t - ts) + 0.5 * self.jerk * (t * t - ts * ts)
    }

    pub fn rate_at(&self, t: f64) -> f64 {
        self.acceleration + self.jerk * t
    }

    pub fn accumulated(&self, t0: f64, t: f64, accumulated0: f64) -> f64 {
        let ts = self.t_start;
        let antiderivative = |s: f64| {
            self.q_start * s
                + 0.5 * self.acceleration * (s - ts) * (s - ts)
                + 0.5 * self.jerk * (s * s * s / 3.0 - ts * ts * s)
        };
        accumulated0 + antiderivative(t) - antiderivative(t0)
    }

    pub fn turning_point(&self) -> Option<f64> {
        if self.jerk == 0.0 {
            return None;
        }
        let t = -self.acceleration / self.jerk;
        (t > self.t_start).then_some(t)
    }
}

/// `q(t) = level + slope·t` with no transient: the zero-inertia static
/// mode, or a flow held at a regime boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearPath {
    pub level: f64,
    pub slope: f64,
    pub t_start: f64,
}

impl LinearPath {
    pub fn q_at(&self, t: f64) -> f64 {
        self.level + self.slope * t
    }

    pub fn accumulated(&self, t0: f64, t: f64, accumulated0: f64) -> f64 {
        accumulated0 + self.level * (t - t0) + 0.5 * self.slope * (t * t - t0 * t0)
    }
}

/// One analytic piece of a flow trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Exponential(RegimeSolution),
    Drift(DriftSolution),
    Linear(LinearPath),
}

impl Segment {
    /// Solve the adjustment law from `(t_init, q_init)`. With `m = 0` the
    /// flow jumps to the moving zero-force level, which requires `B > 0`.
    pub fn solve(params: &FirmParams, q_init: f64, t_init: f64) -> Result<Self> {
        let (m, b) = (params.inertia, params.cost_slope);
        if m == 0.0 {
            if b <= 0.0 {
                return Err(Error::ZeroMass);
            }
            return Ok(Segment::Linear(LinearPath {
                level: params.driving_force() / b,
                slope: params.trend() / b,
                t_start: t_init,
            }));
        }
        if b == 0.0 {
            return Ok(Segment::Drift(DriftSolution::fit(params, q_init, t_init)?));
        }
        Ok(Segment::Exponential(RegimeSolution::fit(
            params, q_init, t_init,
        )?))
    }

    pub fn hold(q: f64, t_start: f64) -> Self {
        Segment::Linear(LinearPath {
            level: q,
            slope: 0.0,
            t_start,
        })
    }

    pub fn t_start(&self) -> f64 {
        match self {
            Segment::Exponential(s) => s.t_start,
            Segment::Drift(s) => s.t_start,
            Segment::Linear(s) => s.t_start,
        }
    }

    pub fn q_at(&self, t: f64) -> f64 {
        match self {
            Segment::Exponential(s) => s.q_at(t),
            Segment::Drift(s) => s.q_at(t),
            Segment::Linear(s) => s.q_at(t),
        }
    }

    pub fn rate_at(&self, t: f64) -> f64 {
        match self {
            Segment::Exponential(s) => s.rate_at(t),
            Segment::Drift(s) => s.rate_at(t),
            Segment::Linear(s) => s.slope,
        }
    }

    pub fn accumulated(&self, t0: f64, t: f64, accumulated0: f64) -> f64 {
        match self {
            Segment::Exponential(s) => s.accumulated(t0, t, accumulated0),
            Segment::Drift(s) => s.accumulated(t0, t, accumulated0),
            Segment::Linear(s) => s.accumulated(t0, t, accumulated0),
        }
    }

    pub fn turning_point(&self) -> Option<f64> {
        match self {
            Segment::Exponential(s) => s.turning_point(),
            Segment::Drift(s) => s.turning_point(),
            Segment::Linear(_) => None,
        }
    }

    /// Subintervals of `[from, to]` on which q is monotone.
    pub fn monotone_pieces(&self, from: f64, to: f64) -> Vec<(f64, f64)> {
        match self.turning_point() {
            Some(tp) if tp > from && tp < to => vec![(from, tp), (tp, to)],
            _ => vec![(from, to)],
        }
    }

    /// First time in `(from, to]` where q reaches `target` from the side it
    /// starts on. A path starting exactly on `target` must leave and come
    /// back to count.
    pub fn first_crossing(&self, target: f64, from: f64, to: f64, x_tol: f64) -> Option<f64> {
        if !(to > from) {
            return None;
        }
        let g = |t: f64| self.q_at(t) - target;
        for (i, (lo, hi)) in self.monotone_pieces(from, to).into_iter().enumerate() {
            let (g_lo, g_hi) = (g(lo), g(hi));
            if g_lo == 0.0 {
                if i > 0 {
                    return Some(lo);
                }
                continue;
            }
            if g_hi == 0.0 || (g_hi > 0.0) != (g_lo > 0.0) {
                return Some(roots::bisect(g, lo, hi, x_tol).crossed);
            }
        }
        None
    }
}
