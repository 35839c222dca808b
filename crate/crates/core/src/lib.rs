//! Multi-fidelity Monte Carlo estimation with surrogate training cost folded
//! into the budget, plus a 2D tissue-oxygen testbed and a POD surrogate.

pub mod error;
pub mod estimators;
pub mod model;
pub mod pipeline;
pub mod policy;
pub mod rom;
pub mod snapshot;
pub mod stats;
pub mod testbed;

pub use error::{Error, Result};
