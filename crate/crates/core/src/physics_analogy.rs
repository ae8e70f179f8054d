//! A motorboat pushed by a constant engine force against linear water
//! friction, `m_b·v' = F0 − k·v`, and its exact correspondence with the
//! untrended firm: `q = v`, `m = m_b`, `a − A = F0`, `B = k`.
//!
//! The correspondence is a renaming of numbers. Mechanical quantities carry
//! mechanical units and economic ones economic units; the two systems are
//! never mixed.

use crate::dimensions::{Dimension, Quantity};
use crate::dynamics::Segment;
use crate::error::{Error, Result};
use crate::firm_model::{FirmParams, Param};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoatParams {
    /// N
    pub engine_force: f64,
    /// kg/s; negative values model a current that pushes with the boat.
    pub friction: f64,
    /// kg
    pub mass: f64,
    /// m/s
    pub initial_velocity: f64,
    /// s; the engine stops here.
    pub cutoff: Option<f64>,
}

impl BoatParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.engine_force,
            self.friction,
            self.mass,
            self.initial_velocity,
        ]
        .iter()
        .chain(self.cutoff.iter())
        .all(|x| x.is_finite());
        if !finite {
            return Err(Error::NonFinite("boat parameters".into()));
        }
        if self.engine_force < 0.0 {
            return Err(Error::validation("F0 >= 0"));
        }
        if self.mass <= 0.0 {
            return Err(Error::validation("m_b > 0"));
        }
        if self.initial_velocity < 0.0 {
            return Err(Error::validation("v0 >= 0"));
        }
        if self.cutoff.is_some_and(|t1| t1 <= 0.0) {
            return Err(Error::validation("t1 > 0"));
        }
        Ok(())
    }

    /// Parameters tagged with their mechanical units.
    pub fn quantities(&self) -> Result<[Quantity; 4]> {
        Ok([
            Quantity::new(self.engine_force, Dimension::NEWTON)?,
            Quantity::new(self.friction, Dimension::KG_PER_SECOND)?,
            Quantity::new(self.mass, Dimension::KILOGRAM)?,
            Quantity::new(self.initial_velocity, Dimension::VELOCITY)?,
        ])
    }

    /// Equilibrium velocity `F0/k`, if friction is non-zero.
    pub fn equilibrium_velocity(&self) -> Option<f64> {
        (self.friction != 0.0).then(|| self.engine_force / self.friction)
    }
}

/// Velocity under a constant force starting from `v_start` at `t_start`.
fn coast(force: f64, friction: f64, mass: f64, v_start: f64, dt: f64) -> f64 {
    if friction == 0.0 {
        return v_start + force / mass * dt;
    }
    let v_eq = force / friction;
    v_eq + (v_start - v_eq) * (-friction * dt / mass).exp()
}

/// Velocity (m/s) at time `t` (s). After the cutoff the engine force is
/// zero and the motion continues from the velocity reached at the cutoff.
pub fn boat_velocity(boat: &BoatParams, t: f64) -> f64 {
    let BoatParams {
        engine_force,
        friction,
        mass,
        initial_velocity,
        cutoff,
    } = *boat;
    match cutoff {
        Some(t1) if t > t1 => {
            let v1 = coast(engine_force, friction, mass, initial_velocity, t1);
            coast(0.0, friction, mass, v1, t - t1)
        }
        _ => coast(engine_force, friction, mass, initial_velocity, t),
    }
}

/// The untrended firm's terms that enter its law of motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirmTerms {
    /// a − A (€/unit)
    pub driving_force: f64,
    /// B (€·y/unit²)
    pub curvature: f64,
    /// m (€·y²/unit²)
    pub mass: f64,
    /// q0 (unit/y)
    pub initial_flow: f64,
}

impl FirmTerms {
    pub fn of(params: &FirmParams) -> Self {
        FirmTerms {
            driving_force: params.driving_force(),
            curvature: params.cost_slope,
            mass: params.inertia,
            initial_flow: params.initial_flow,
        }
    }

    /// Firm parameters with these terms, keeping `template`'s price level `a`
    /// and setting `A = a − driving_force`.
    pub fn apply(&self, template: &FirmParams) -> FirmParams {
        FirmParams {
            base_unit_cost: template.base_price - self.driving_force,
            cost_slope: self.curvature,
            inertia: self.mass,
            initial_flow: self.initial_flow,
            ..*template
        }
    }
}

pub fn map_firm_to_boat(params: &FirmParams) -> Result<BoatParams> {
    if params.trend() != 0.0 {
        return Err(Error::TrendedModel);
    }
    if params.inertia == 0.0 {
        return Err(Error::ZeroMass);
    }
    let boat = BoatParams {
        engine_force: params.driving_force(),
        friction: params.cost_slope,
        mass: params.inertia,
        initial_velocity: params.initial_flow,
        cutoff: None,
    };
    boat.validate()?;
    Ok(boat)
}

pub fn map_boat_to_firm(boat: &BoatParams) -> Result<FirmTerms> {
    boat.validate()?;
    Ok(FirmTerms {
        driving_force: boat.engine_force,
        curvature: boat.friction,
        mass: boat.mass,
        initial_flow: boat.initial_velocity,
    })
}

/// Largest |q(t) − v(t)| over `t_grid` between the firm's closed-form path
/// and the mapped boat's velocity.
pub fn homomorphism_check(params: &FirmParams, t_grid: &[f64]) -> Result<f64> {
    let boat = map_firm_to_boat(params)?;
    let firm = Segment::solve(params, params.initial_flow, 0.0)?;
    Ok(t_grid
        .iter()
        .map(|&t| (firm.q_at(t) - boat_velocity(&boat, t)).abs())
        .fold(0.0, f64::max))
}

/// Firm analogue of the engine cutoff: after `cutoff` the driving force
/// `a − A` vanishes (A rises to a) and the flow follows the refit path.
pub fn firm_flow_with_cutoff(params: &FirmParams, cutoff: f64, t: f64) -> Result<f64> {
    let before = Segment::solve(params, params.initial_flow, 0.0)?;
    if t <= cutoff {
        return Ok(before.q_at(t));
    }
    let idle = params.with(Param::BaseUnitCost, params.base_price);
    Ok(Segment::solve(&idle, before.q_at(cutoff), cutoff)?.q_at(t))
}
