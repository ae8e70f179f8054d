//! Dynamic model of a firm whose flow of production adjusts under the
//! pull of marginal profit, resisted by an inertia term: `m·q' = ∂Π/∂q`.
//!
//! Modules build on each other bottom-up: [`dimensions`] checks units,
//! [`firm_model`] holds the economic primitives, [`dynamics`] produces
//! trajectories, [`bankruptcy`] finds when a declining firm's flow hits
//! zero, [`physics_analogy`] maps the firm onto a boat pushed against
//! friction, and [`cli_reports`] handles configuration and CSV output.

// `!(x > 0.0)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bankruptcy;
pub mod cli_reports;
pub mod dimensions;
pub mod dynamics;
pub mod error;
pub mod firm_model;
pub mod physics_analogy;
pub mod roots;

pub use error::{Error, Result};
