//! Sales, cost and profit of a one-product firm and the economic force
//! acting on its flow of production.
//!
//! The model family is
//!
//! ```text
//! p(q, t) = a + b/q + c·t                         (€/unit)
//! C(q, t) = h0 + (A + (B/2)·q − G·t)·q            (€/y)
//! Π(q, t) = a·q + b − h0 − A·q − (B/2)·q² + (c+G)·t·q
//! ∂Π/∂q   = a − A − B·q + (c+G)·t                 (€/unit)
//! ```
//!
//! Fixed costs are constant (`h(t) = h0`). Revenue `p·q` extends
//! continuously to `q = 0`, so profit there is `b − h0`.

use std::fmt;
use std::str::FromStr;

use crate::dimensions::{assert_dim, Dimension, Quantity};
use crate::error::{Error, Result};

/// Full parameter set of the firm, including the initial flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirmParams {
    /// a (€/unit): price received per product in any situation.
    pub base_price: f64,
    /// b (€/y): strength of the price/sales relation; zero under perfect competition.
    pub price_premium: f64,
    /// A (€/unit): unit cost of the first produced unit.
    pub base_unit_cost: f64,
    /// B (€·y/unit²): returns to scale; positive means decreasing returns.
    pub cost_slope: f64,
    /// h0 (€/y)
    pub fixed_cost: f64,
    /// m (€·y²/unit²): inertial mass of the flow of production.
    pub inertia: f64,
    /// c (€/(unit·y)): change in popularity of the product.
    pub popularity_trend: f64,
    /// G (€/(unit·y)): technological development lowering unit costs.
    pub technology_trend: f64,
    /// q(0) (unit/y)
    pub initial_flow: f64,
}

/// Names of the individual parameters, keyed by their conventional symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Param {
    BasePrice,
    PricePremium,
    BaseUnitCost,
    CostSlope,
    FixedCost,
    Inertia,
    PopularityTrend,
    TechnologyTrend,
    InitialFlow,
}

impl Param {
    pub const ALL: [Param; 9] = [
        Param::BasePrice,
        Param::PricePremium,
        Param::BaseUnitCost,
        Param::CostSlope,
        Param::FixedCost,
        Param::Inertia,
        Param::PopularityTrend,
        Param::TechnologyTrend,
        Param::InitialFlow,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Param::BasePrice => "a",
            Param::PricePremium => "b",
            Param::BaseUnitCost => "A",
            Param::CostSlope => "B",
            Param::FixedCost => "h0",
            Param::Inertia => "m",
            Param::PopularityTrend => "c",
            Param::TechnologyTrend => "G",
            Param::InitialFlow => "q0",
        }
    }

    pub fn dimension(self) -> Dimension {
        match self {
            Param::BasePrice | Param::BaseUnitCost => Dimension::PRICE,
            Param::PricePremium | Param::FixedCost => Dimension::MONEY_FLOW,
            Param::CostSlope => Dimension::CURVATURE,
            Param::Inertia => Dimension::INERTIA,
            Param::PopularityTrend | Param::TechnologyTrend => Dimension::TREND,
            Param::InitialFlow => Dimension::FLOW,
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Param::ALL
            .into_iter()
            .find(|p| p.symbol() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown parameter `{s}`")))
    }
}

impl FirmParams {
    /// The untrended firm with no price premium, fixed costs or initial flow.
    pub fn untrended(base_price: f64, base_unit_cost: f64, cost_slope: f64, inertia: f64) -> Self {
        FirmParams {
            base_price,
            price_premium: 0.0,
            base_unit_cost,
            cost_slope,
            fixed_cost: 0.0,
            inertia,
            popularity_trend: 0.0,
            technology_trend: 0.0,
            initial_flow: 0.0,
        }
    }

    pub fn get(&self, p: Param) -> f64 {
        match p {
            Param::BasePrice => self.base_price,
            Param::PricePremium => self.price_premium,
            Param::BaseUnitCost => self.base_unit_cost,
            Param::CostSlope => self.cost_slope,
            Param::FixedCost => self.fixed_cost,
            Param::Inertia => self.inertia,
            Param::PopularityTrend => self.popularity_trend,
            Param::TechnologyTrend => self.technology_trend,
            Param::InitialFlow => self.initial_flow,
        }
    }

    pub fn set(&mut self, p: Param, value: f64) {
        let slot = match p {
            Param::BasePrice => &mut self.base_price,
            Param::PricePremium => &mut self.price_premium,
            Param::BaseUnitCost => &mut self.base_unit_cost,
            Param::CostSlope => &mut self.cost_slope,
            Param::FixedCost => &mut self.fixed_cost,
            Param::Inertia => &mut self.inertia,
            Param::PopularityTrend => &mut self.popularity_trend,
            Param::TechnologyTrend => &mut self.technology_trend,
            Param::InitialFlow => &mut self.initial_flow,
        };
        *slot = value;
    }

    pub fn with(mut self, p: Param, value: f64) -> Self {
        self.set(p, value);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for p in Param::ALL {
            if !self.get(p).is_finite() {
                return Err(Error::validation(format!("{p} finite")));
            }
        }
        let checks = [
            (self.base_price > 0.0, "a > 0"),
            (self.base_unit_cost > 0.0, "A > 0"),
            (self.price_premium >= 0.0, "b >= 0"),
            (self.fixed_cost >= 0.0, "h0 >= 0"),
            (self.inertia >= 0.0, "m >= 0"),
            (self.initial_flow >= 0.0, "q0 >= 0"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, what)) => Err(Error::validation(*what)),
            None => Ok(()),
        }
    }

    /// Combined time trend c + G entering price and unit cost.
    pub fn trend(&self) -> f64 {
        self.popularity_trend + self.technology_trend
    }

    /// Driving force component a − A.
    pub fn driving_force(&self) -> f64 {
        self.base_price - self.base_unit_cost
    }

    pub fn price(&self, q: f64, t: f64) -> Result<f64> {
        let premium = if self.price_premium == 0.0 && q == 0.0 {
            0.0
        } else if q <= 0.0 {
            return Err(Error::NonPositiveFlow(q));
        } else {
            self.price_premium / q
        };
        Ok(self.base_price + premium + self.popularity_trend * t)
    }

    /// Unit cost g(q, t) = A + (B/2)·q − G·t. May be negative, which the
    /// caller should treat as a warning: real unit costs cannot be.
    pub fn unit_cost(&self, q: f64, t: f64) -> Result<f64> {
        if q <= 0.0 {
            return Err(Error::NonPositiveFlow(q));
        }
        Ok(self.unit_cost_formula(q, t))
    }

    fn unit_cost_formula(&self, q: f64, t: f64) -> f64 {
        self.base_unit_cost + 0.5 * self.cost_slope * q - self.technology_trend * t
    }

    /// Total cost per time unit; `q ≥ 0`.
    pub fn total_cost(&self, q: f64, t: f64) -> f64 {
        self.fixed_cost + self.unit_cost_formula(q, t) * q
    }

    /// Revenue p·q, continuously extended to q = 0.
    pub fn revenue(&self, q: f64, t: f64) -> f64 {
        (self.base_price + self.popularity_trend * t) * q + self.price_premium
    }

    /// Profit per time unit; `q ≥ 0`.
    pub fn profit(&self, q: f64, t: f64) -> f64 {
        self.base_price * q + self.price_premium
            - self.fixed_cost
            - self.base_unit_cost * q
            - 0.5 * self.cost_slope * q * q
            + self.trend() * t * q
    }

    /// The economic force ∂Π/∂q = MR − MC.
    pub fn force(&self, q: f64, t: f64) -> f64 {
        self.driving_force() - self.cost_slope * q + self.trend() * t
    }

    pub fn marginals(&self, q: f64, t: f64) -> Marginals {
        Marginals {
            revenue: self.base_price + self.popularity_trend * t,
            cost: self.base_unit_cost + self.cost_slope * q - self.technology_trend * t,
        }
    }

    pub fn static_optimum(&self) -> Result<StaticOptimum> {
        let classification = Curvature::of(self.cost_slope);
        if classification == Curvature::Degenerate {
            return Err(Error::ZeroCurvature);
        }
        Ok(StaticOptimum {
            q_star: self.driving_force() / self.cost_slope,
            soc_holds: classification == Curvature::Maximum,
            classification,
        })
    }

    /// Tag every parameter with its unit for the checked evaluation path.
    pub fn quantities(&self) -> Result<CheckedFirm> {
        let tag = |p: Param| Quantity::new(self.get(p), p.dimension());
        Ok(CheckedFirm {
            a: tag(Param::BasePrice)?,
            b: tag(Param::PricePremium)?,
            cost_a: tag(Param::BaseUnitCost)?,
            cost_b: tag(Param::CostSlope)?,
            h0: tag(Param::FixedCost)?,
            m: tag(Param::Inertia)?,
            c: tag(Param::PopularityTrend)?,
            g: tag(Param::TechnologyTrend)?,
        })
    }

    /// Run every model expression once through the checked path and
    /// confirm its result unit. Numeric loops may then use raw values.
    pub fn audit_dimensions(&self) -> Result<()> {
        let checked = self.quantities()?;
        let q = Quantity::new(self.initial_flow.max(1.0), Dimension::FLOW)?;
        let t = Quantity::new(1.0, Dimension::YEAR)?;
        let qdot = Quantity::new(1.0, Dimension::FLOW_RATE)?;
        assert_dim(checked.price(q, t)?, Dimension::PRICE)?;
        assert_dim(checked.total_cost(q, t)?, Dimension::MONEY_FLOW)?;
        assert_dim(checked.profit(q, t)?, Dimension::MONEY_FLOW)?;
        let force = assert_dim(checked.force(q, t)?, Dimension::PRICE)?;
        let inertial = assert_dim(checked.inertial_force(qdot)?, Dimension::PRICE)?;
        force.sub(inertial)?;
        if self.cost_slope != 0.0 {
            assert_dim(checked.static_optimum()?, Dimension::FLOW)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Marginals {
    pub revenue: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curvature {
    Maximum,
    Minimum,
    Degenerate,
}

impl Curvature {
    /// Π''(q*) = −B, so the sign of B alone decides.
    pub fn of(cost_slope: f64) -> Self {
        if cost_slope > 0.0 {
            Curvature::Maximum
        } else if cost_slope < 0.0 {
            Curvature::Minimum
        } else {
            Curvature::Degenerate
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticOptimum {
    pub q_star: f64,
    pub soc_holds: bool,
    pub classification: Curvature,
}

/// Unit-tagged parameters; every operation goes through dimension checks.
#[derive(Debug, Clone, Copy)]
pub struct CheckedFirm {
    pub a: Quantity,
    pub b: Quantity,
    pub cost_a: Quantity,
    pub cost_b: Quantity,
    pub h0: Quantity,
    pub m: Quantity,
    pub c: Quantity,
    pub g: Quantity,
}

impl CheckedFirm {
    pub fn price(&self, q: Quantity, t: Quantity) -> Result<Quantity> {
        self.a.add(self.b.div(q)?)?.add(self.c.mul(t)?)
    }

    pub fn unit_cost(&self, q: Quantity, t: Quantity) -> Result<Quantity> {
        self.cost_a
            .add(self.cost_b.scale(0.5)?.mul(q)?)?
            .sub(self.g.mul(t)?)
    }

    pub fn total_cost(&self, q: Quantity, t: Quantity) -> Result<Quantity> {
        self.h0.add(self.unit_cost(q, t)?.mul(q)?)
    }

    pub fn profit(&self, q: Quantity, t: Quantity) -> Result<Quantity> {
        let trend = self.c.add(self.g)?;
        self.a
            .mul(q)?
            .add(self.b)?
            .sub(self.h0)?
            .sub(self.cost_a.mul(q)?)?
            .sub(self.cost_b.scale(0.5)?.mul(q)?.mul(q)?)?
            .add(trend.mul(t)?.mul(q)?)
    }

    pub fn force(&self, q: Quantity, t: Quantity) -> Result<Quantity> {
        let trend = self.c.add(self.g)?;
        self.a
            .sub(self.cost_a)?
            .sub(self.cost_b.mul(q)?)?
            .add(trend.mul(t)?)
    }

    /// m·q'
    pub fn inertial_force(&self, qdot: Quantity) -> Result<Quantity> {
        self.m.mul(qdot)
    }

    pub fn static_optimum(&self) -> Result<Quantity> {
        self.a.sub(self.cost_a)?.div(self.cost_b)
    }
}

/// One flow interval `[q_low, q_high)` with its own unit-cost coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostRegime {
    pub q_low: f64,
    pub q_high: f64,
    pub base_unit_cost: f64,
    pub cost_slope: f64,
}

/// Piecewise unit-cost function: contiguous regimes covering `(0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostSchedule {
    regimes: Vec<CostRegime>,
}

impl CostSchedule {
    pub fn new(regimes: Vec<CostRegime>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidSchedule(msg));
        let Some(first) = regimes.first() else {
            return bad("no regimes".into());
        };
        if first.q_low != 0.0 {
            return bad(format!(
                "first regime starts at {} instead of 0",
                first.q_low
            ));
        }
        for (i, r) in regimes.iter().enumerate() {
            if !(r.q_low < r.q_high) {
                return bad(format!(
                    "regime {i}: q_low {} >= q_high {}",
                    r.q_low, r.q_high
                ));
            }
            if !r.base_unit_cost.is_finite() || !r.cost_slope.is_finite() {
                return bad(format!("regime {i}: non-finite coefficients"));
            }
            if let Some(next) = regimes.get(i + 1) {
                if next.q_low != r.q_high {
                    return bad(format!(
                        "gap or overlap between regimes {i} and {}: {} vs {}",
                        i + 1,
                        r.q_high,
                        next.q_low
                    ));
                }
            }
        }
        if regimes.last().is_some_and(|r| r.q_high != f64::INFINITY) {
            return bad("last regime must extend to infinity".into());
        }
        Ok(CostSchedule { regimes })
    }

    /// The single regime implied by the parameters' own A and B.
    pub fn single(params: &FirmParams) -> Self {
        CostSchedule {
            regimes: vec![CostRegime {
                q_low: 0.0,
                q_high: f64::INFINITY,
                base_unit_cost: params.base_unit_cost,
                cost_slope: params.cost_slope,
            }],
        }
    }

    /// Falling unit costs up to 200 unit/y, rising afterwards:
    /// g = 90 − 0.25·q below 200 and 20 + 0.04·q above. Unit cost jumps from
    /// 40 to 28 €/unit at the boundary.
    pub fn two_phase_reference() -> Self {
        CostSchedule::new(vec![
            CostRegime {
                q_low: 0.0,
                q_high: 200.0,
                base_unit_cost: 90.0,
                cost_slope: -0.5,
            },
            CostRegime {
                q_low: 200.0,
                q_high: f64::INFINITY,
                base_unit_cost: 20.0,
                cost_slope: 0.08,
            },
        ])
        .expect("reference schedule is valid")
    }

    pub fn regimes(&self) -> &[CostRegime] {
        &self.regimes
    }

    pub fn len(&self) -> usize {
        self.regimes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regimes.is_empty()
    }

    /// Index of the regime containing `q`; flows at or below zero map to the first.
    pub fn index_of(&self, q: f64) -> usize {
        self.regimes
            .iter()
            .position(|r| q < r.q_high)
            .unwrap_or(self.regimes.len() - 1)
    }

    /// `params` with A and B replaced by those of regime `index`.
    pub fn params_for(&self, params: &FirmParams, index: usize) -> FirmParams {
        let r = &self.regimes[index];
        FirmParams {
            base_unit_cost: r.base_unit_cost,
            cost_slope: r.cost_slope,
            ..*params
        }
    }

    pub fn params_at(&self, params: &FirmParams, q: f64) -> FirmParams {
        self.params_for(params, self.index_of(q))
    }

    pub fn unit_cost(&self, params: &FirmParams, q: f64, t: f64) -> Result<f64> {
        self.params_at(params, q).unit_cost(q, t)
    }
}
