//! First level-crossing times of a compound renewal process with drift.
//!
//! The crate provides, for the process V_s - cs crossing a high level u:
//!
//! * closed-form approximations of the conditional crossing distribution
//!   built from generalized inverse Gaussian c.d.f.s ([`crossing`]),
//! * the exact conditional distribution for exponential inter-arrivals and
//!   claims, with an independent series oracle ([`exact_exp`]),
//! * a reproducible parallel Monte Carlo simulator of the risk reserve
//!   process ([`sim`]),
//! * the special functions and adaptive quadrature everything rests on
//!   ([`special`], [`quad`]), and the GIG distribution family ([`gig`]).

pub mod error;
pub mod quad;
pub mod special;
pub mod gig;
pub mod renewal;
pub mod crossing;
pub mod exact_exp;
pub mod sim;

pub use error::{Error, Result};
