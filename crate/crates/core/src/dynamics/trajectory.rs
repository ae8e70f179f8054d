use std::fmt;

use crate::firm_model::{CostSchedule, FirmParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    /// y
    pub t: f64,
    /// unit/y
    pub q: f64,
    /// €/unit; undefined at q = 0 when b > 0.
    pub price: Option<f64>,
    /// €/y
    pub cost: Option<f64>,
    /// €/y
    pub profit: Option<f64>,
    /// unit
    pub accumulated: f64,
}

impl Sample {
    pub fn new(t: f64, q: f64, accumulated: f64) -> Self {
        Sample {
            t,
            q,
            price: None,
            cost: None,
            profit: None,
            accumulated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    RegimeSwitch,
    Bankruptcy,
    Horizon,
    /// Warning only: unit costs went negative inside a regime.
    NegativeUnitCost,
    /// The flow is held at a regime boundary because the forces on both
    /// sides point toward it.
    Sliding,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::RegimeSwitch => "regime_switch",
            EventKind::Bankruptcy => "bankruptcy",
            EventKind::Horizon => "horizon",
            EventKind::NegativeUnitCost => "negative_unit_cost",
            EventKind::Sliding => "sliding",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
}

/// Sampled flow path with event markers. Times strictly increase, flows
/// are non-negative and nothing follows a bankruptcy.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub label: String,
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
}

impl Trajectory {
    pub fn new(label: impl Into<String>) -> Self {
        Trajectory {
            label: label.into(),
            ..Default::default()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    /// Append a sample; one at the same time as the previous is dropped.
    pub(crate) fn push(&mut self, t: f64, q: f64, accumulated: f64) {
        if let Some(last) = self.samples.last() {
            if t <= last.t {
                debug_assert!(t == last.t, "time went backwards: {} -> {t}", last.t);
                return;
            }
        }
        debug_assert!(q >= 0.0, "negative flow {q} at t = {t}");
        self.samples.push(Sample::new(t, q, accumulated));
    }

    pub(crate) fn mark(&mut self, t: f64, kind: EventKind) {
        self.events.push(Event { t, kind });
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn bankruptcy_time(&self) -> Option<f64> {
        self.events_of(EventKind::Bankruptcy).next().map(|e| e.t)
    }

    /// Fill price, cost and profit from the firm model at every sample.
    pub fn enrich(&mut self, params: &FirmParams, schedule: Option<&CostSchedule>) {
        for s in &mut self.samples {
            let p = match schedule {
                Some(sched) => sched.params_at(params, s.q),
                None => *params,
            };
            s.price = p.price(s.q, s.t).ok();
            s.cost = Some(p.total_cost(s.q, s.t));
            s.profit = Some(p.profit(s.q, s.t));
        }
    }

    /// Trapezoid-rule accumulated production over `[t0, t]`, interpolating
    /// q linearly between samples. Times outside the sampled range
    /// contribute nothing.
    pub fn accumulated_production(&self, t0: f64, t: f64, accumulated0: f64) -> f64 {
        let interp = |a: &Sample, b: &Sample, x: f64| a.q + (b.q - a.q) * (x - a.t) / (b.t - a.t);
        let mut total = accumulated0;
        for w in self.samples.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let lo = a.t.max(t0);
            let hi = b.t.min(t);
            if hi <= lo {
                continue;
            }
            total += 0.5 * (interp(a, b, lo) + interp(a, b, hi)) * (hi - lo);
        }
        total
    }
}

/// Free-function form of [`Trajectory::enrich`] for a single cost regime.
pub fn evaluate_trajectory(traj: &Trajectory, params: &FirmParams) -> Trajectory {
    let mut out = traj.clone();
    out.enrich(params, None);
    out
}
