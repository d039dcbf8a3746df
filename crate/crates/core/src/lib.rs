//! First-price auctions with expectations-based loss-averse bidders.
//!
//! Equilibrium bids, optimal reserve prices and expected revenue under a
//! public reserve, a secret random reserve, and an auction followed by a
//! take-it-or-leave-it offer, with a Monte Carlo and deviation-check oracle.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod equilibrium;
mod error;
pub mod numeric;
pub mod optimizer;
pub mod preferences;
pub mod revenue;
pub mod sim;

pub use distributions::{AuctionEnv, Family, RegularityReport, TabulatedCdf, TypeDistribution};
pub use equilibrium::{BidCurve, CurveNode, SecretReserveSpec, TioliSpec};
pub use error::{Error, Result};
pub use optimizer::ReserveSolution;
pub use preferences::{LossParams, OutcomeLottery};
pub use revenue::{MechanismSpec, RevenueReport};
