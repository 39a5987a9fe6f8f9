//! Scheduling primitives for collocated heterogeneous half-/full-duplex
//! wireless networks: the topology and capacity model, centralized and
//! random-access schedulers, analytic delay lower bounds, and a slotted
//! Monte-Carlo engine.

pub mod arrivals;
pub mod bounds;
pub mod error;
pub mod model;
pub mod schedulers;
pub mod sim;

pub use error::{Error, Result};
