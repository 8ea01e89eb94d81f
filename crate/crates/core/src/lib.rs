//! Airborne disease spread over synthetic same-place-different-time (SPDT)
//! contact networks.
//!
//! - [`contact_net`] generates activity-driven SPDT traces and projects them to
//!   their same-place-same-time (SPST) counterparts.
//! - [`exposure`] turns link timings and environments into inhaled doses and
//!   infection probabilities.
//! - [`seir`] propagates disease over a trace day by day.
//! - [`experiments`] runs the hidden-spreader studies on paired SPDT/SPST traces.

pub mod contact_net;
pub mod error;
pub mod experiments;
pub mod exposure;
pub mod gof;
pub mod seir;
pub mod stream;

pub use error::{Error, Result};
