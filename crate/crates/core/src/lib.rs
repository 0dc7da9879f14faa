//! Simulation and verification toolkit for positive and negative association
//! of random fields, point processes and random measures.
//!
//! The crate is organised bottom-up:
//!
//! * [`poset`]: finite partially ordered sets, upper sets, monotone functions.
//! * [`dominance`]: stochastic dominance on finite posets, decided by max-flow,
//!   with an order-respecting coupling or a monotone witness as certificate.
//! * [`fields`]: samplers for discrete-index random fields.
//! * [`measures`]: samplers for point processes and random measures on a box.
//! * [`dissection`]: dyadic partitions of the window and the count map.
//! * [`assoc`]: exact oracles and Monte-Carlo tests for association.
//! * [`experiment`]: JSON-configured batch runs used by the CLI.
//!
//! Every sampler takes an explicit [`rng::SimRng`]; replicate `i` of a run with
//! seed `s` always draws from stream `(s, i)`, so results do not depend on
//! whether replicates are evaluated in parallel.

pub mod assoc;
pub mod dissection;
pub mod dominance;
mod error;
pub mod experiment;
pub mod fields;
mod flow;
pub mod measures;
pub mod par;
pub mod poset;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
