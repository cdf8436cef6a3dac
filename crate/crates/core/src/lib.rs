//! Age-of-information laboratory for a slotted point-to-point link with
//! Bernoulli packet arrivals and an i.i.d. erasure channel.
//!
//! The crate has four legs that check each other:
//!
//! * [`analytics`] — closed-form AoI distribution, average AoI, and average
//!   transmission cost of threshold scheduling policies, plus the AoI lower
//!   bound, threshold selection under a cost budget, and the
//!   random-transmission benchmark.
//! * [`simulator`] — a slot-by-slot Monte Carlo engine with a pinned,
//!   reproducible draw discipline.
//! * [`cmdp`] — a truncated constrained-MDP solver (Lagrangian relative
//!   value iteration plus bisection on the multiplier) giving the optimal
//!   tradeoff baseline.
//! * [`policies`] — the scheduling decision rules shared by all of the above.

pub mod analytics;
pub mod cmdp;
pub mod error;
pub mod model;
pub mod policies;
pub mod rng;
pub mod simulator;

pub use error::{Error, Result};
pub use model::NetworkParams;
