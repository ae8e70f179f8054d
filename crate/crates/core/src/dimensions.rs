//! Dimensional quantities over the base units {€, unit, year, kg, m, s}.
//!
//! Every theoretical quantity of the firm model carries a measurement unit.
//! [`Quantity`] pairs a finite value with a [`Dimension`] and refuses
//! arithmetic that mixes incompatible units. Economic and mechanical units
//! share the same exponent vector but never mix in practice: €/unit is not
//! a Newton.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Integer exponents over the six base units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Dimension {
    pub eur: i32,
    pub unit: i32,
    pub year: i32,
    pub kg: i32,
    pub m: i32,
    pub s: i32,
}

const TOKENS: [&str; 6] = ["eur", "unit", "y", "kg", "m", "s"];

// named like the operator traits, but exponent arithmetic rather than numbers
#[allow(clippy::should_implement_trait)]
impl Dimension {
    pub const DIMENSIONLESS: Dimension = Dimension::new(0, 0, 0, 0, 0, 0);

    pub const EUR: Dimension = Dimension::new(1, 0, 0, 0, 0, 0);
    pub const UNIT: Dimension = Dimension::new(0, 1, 0, 0, 0, 0);
    pub const YEAR: Dimension = Dimension::new(0, 0, 1, 0, 0, 0);
    pub const KILOGRAM: Dimension = Dimension::new(0, 0, 0, 1, 0, 0);
    pub const METRE: Dimension = Dimension::new(0, 0, 0, 0, 1, 0);
    pub const SECOND: Dimension = Dimension::new(0, 0, 0, 0, 0, 1);

    /// €/unit: prices, unit costs, a, A and the economic force.
    pub const PRICE: Dimension = Dimension::new(1, -1, 0, 0, 0, 0);
    /// €/y: revenue, costs, profit, b and h0.
    pub const MONEY_FLOW: Dimension = Dimension::new(1, 0, -1, 0, 0, 0);
    /// unit/y: the flow of production.
    pub const FLOW: Dimension = Dimension::new(0, 1, -1, 0, 0, 0);
    /// unit/y²: acceleration of accumulated production.
    pub const FLOW_RATE: Dimension = Dimension::new(0, 1, -2, 0, 0, 0);
    /// €·y/unit²: the returns-to-scale coefficient B.
    pub const CURVATURE: Dimension = Dimension::new(1, -2, 1, 0, 0, 0);
    /// €·y²/unit²: the inertial mass of the flow of production.
    pub const INERTIA: Dimension = Dimension::new(1, -2, 2, 0, 0, 0);
    /// €/(unit·y): the popularity and technology trends c and G.
    pub const TREND: Dimension = Dimension::new(1, -1, -1, 0, 0, 0);
    /// 1/y
    pub const PER_YEAR: Dimension = Dimension::new(0, 0, -1, 0, 0, 0);

    pub const NEWTON: Dimension = Dimension::new(0, 0, 0, 1, 1, -2);
    pub const KG_PER_SECOND: Dimension = Dimension::new(0, 0, 0, 1, 0, -1);
    pub const VELOCITY: Dimension = Dimension::new(0, 0, 0, 0, 1, -1);

    pub const fn new(eur: i32, unit: i32, year: i32, kg: i32, m: i32, s: i32) -> Self {
        Dimension {
            eur,
            unit,
            year,
            kg,
            m,
            s,
        }
    }

    fn exponents(&self) -> [i32; 6] {
        [self.eur, self.unit, self.year, self.kg, self.m, self.s]
    }

    fn from_exponents(e: [i32; 6]) -> Self {
        Dimension::new(e[0], e[1], e[2], e[3], e[4], e[5])
    }

    fn zip(self, other: Dimension, f: impl Fn(i32, i32) -> i32) -> Dimension {
        let (a, b) = (self.exponents(), other.exponents());
        Dimension::from_exponents(std::array::from_fn(|i| f(a[i], b[i])))
    }

    pub fn is_dimensionless(&self) -> bool {
        *self == Self::DIMENSIONLESS
    }

    pub fn mul(self, other: Dimension) -> Dimension {
        self.zip(other, |a, b| a + b)
    }

    pub fn div(self, other: Dimension) -> Dimension {
        self.zip(other, |a, b| a - b)
    }

    pub fn powi(self, n: i32) -> Dimension {
        Dimension::from_exponents(self.exponents().map(|e| e * n))
    }

    pub fn recip(self) -> Dimension {
        self.powi(-1)
    }
}

impl fmt::Display for Dimension {
    /// Canonical form, e.g. `eur*y^2/unit^2`. Parses back to the same value.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let exps = self.exponents();
        let factor = |tok: &str, e: i32| {
            if e == 1 {
                tok.to_string()
            } else {
                format!("{tok}^{e}")
            }
        };
        let num: Vec<String> = TOKENS
            .iter()
            .zip(exps)
            .filter(|(_, e)| *e > 0)
            .map(|(t, e)| factor(t, e))
            .collect();
        let den: Vec<String> = TOKENS
            .iter()
            .zip(exps)
            .filter(|(_, e)| *e < 0)
            .map(|(t, e)| factor(t, -e))
            .collect();
        if num.is_empty() {
            write!(f, "1")?;
        } else {
            write!(f, "{}", num.join("*"))?;
        }
        for d in den {
            write!(f, "/{d}")?;
        }
        Ok(())
    }
}

impl FromStr for Dimension {
    type Err = Error;

    /// Products and quotients of `eur`, `unit`, `y`, `kg`, `m`, `s` with
    /// integer exponents, e.g. `eur*y^2/unit^2` or `eur/(unit*y)`.
    /// `/` binds to the single factor that follows it.
    fn from_str(s: &str) -> Result<Self> {
        let mut parser = UnitParser {
            input: s,
            chars: s.chars().filter(|c| !c.is_whitespace()).collect(),
            pos: 0,
        };
        let dim = parser.expr()?;
        if parser.pos != parser.chars.len() {
            return Err(parser.fail("trailing input"));
        }
        Ok(dim)
    }
}

struct UnitParser<'a> {
    input: &'a str,
    chars: Vec<char>,
    pos: usize,
}

impl UnitParser<'_> {
    fn fail(&self, reason: &str) -> Error {
        Error::UnitParse {
            input: self.input.to_string(),
            reason: format!("{reason} at position {}", self.pos),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Dimension> {
        let mut dim = self.factor()?;
        while let Some(op @ ('*' | '/')) = self.peek() {
            self.pos += 1;
            let rhs = self.factor()?;
            dim = if op == '*' {
                dim.mul(rhs)
            } else {
                dim.div(rhs)
            };
        }
        Ok(dim)
    }

    fn factor(&mut self) -> Result<Dimension> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let start = self.pos;
            if self.peek() == Some('-') {
                self.pos += 1;
            }
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            let text: String = self.chars[start..self.pos].iter().collect();
            let n: i32 = text.parse().map_err(|_| self.fail("bad exponent"))?;
            return Ok(base.powi(n));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Dimension> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.fail("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some('1') => {
                self.pos += 1;
                Ok(Dimension::DIMENSIONLESS)
            }
            Some(c) if c.is_alphabetic() || c == '€' => {
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_alphabetic() || c == '€') {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                match name.as_str() {
                    "eur" | "€" => Ok(Dimension::EUR),
                    "unit" => Ok(Dimension::UNIT),
                    "y" | "year" => Ok(Dimension::YEAR),
                    "kg" => Ok(Dimension::KILOGRAM),
                    "m" => Ok(Dimension::METRE),
                    "s" => Ok(Dimension::SECOND),
                    _ => {
                        self.pos = start;
                        Err(self.fail(&format!("unknown unit `{name}`")))
                    }
                }
            }
            _ => Err(self.fail("expected a unit")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
}

/// A finite value tagged with a [`Dimension`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    value: f64,
    dim: Dimension,
}

// fallible, so not the operator traits
#[allow(clippy::should_implement_trait)]
impl Quantity {
    pub fn new(value: f64, dim: Dimension) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::NonFinite(format!("quantity [{dim}]")));
        }
        Ok(Quantity { value, dim })
    }

    pub fn dimensionless(value: f64) -> Result<Self> {
        Quantity::new(value, Dimension::DIMENSIONLESS)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn add(self, rhs: Quantity) -> Result<Quantity> {
        combine(self, rhs, Op::Add)
    }

    pub fn sub(self, rhs: Quantity) -> Result<Quantity> {
        combine(self, rhs, Op::Sub)
    }

    pub fn mul(self, rhs: Quantity) -> Result<Quantity> {
        combine(self, rhs, Op::Mul)
    }

    pub fn div(self, rhs: Quantity) -> Result<Quantity> {
        combine(self, rhs, Op::Div)
    }

    /// Multiply by a pure number.
    pub fn scale(self, k: f64) -> Result<Quantity> {
        Quantity::new(self.value * k, self.dim)
    }

    pub fn neg(self) -> Quantity {
        Quantity {
            value: -self.value,
            dim: self.dim,
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.dim)
    }
}

pub fn combine(x: Quantity, y: Quantity, op: Op) -> Result<Quantity> {
    let (value, dim) = match op {
        Op::Add | Op::Sub => {
            if x.dim != y.dim {
                return Err(Error::DimensionMismatch {
                    context: format!("{op:?}").to_lowercase(),
                    left: x.dim,
                    right: y.dim,
                });
            }
            let v = if op == Op::Add {
                x.value + y.value
            } else {
                x.value - y.value
            };
            (v, x.dim)
        }
        Op::Mul => (x.value * y.value, x.dim.mul(y.dim)),
        Op::Div => {
            if y.value == 0.0 {
                return Err(Error::DivisionByZero);
            }
            (x.value / y.value, x.dim.div(y.dim))
        }
    };
    Quantity::new(value, dim)
}

pub fn assert_dim(x: Quantity, expected: Dimension) -> Result<Quantity> {
    if x.dim != expected {
        return Err(Error::DimensionMismatch {
            context: format!("expected [{expected}]"),
            left: x.dim,
            right: expected,
        });
    }
    Ok(x)
}
