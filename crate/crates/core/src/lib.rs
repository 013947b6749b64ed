//! Simulation and verification toolkit for cloning-based logical boosting
//! of SAT: CNF handling, boosting circuits, exact and approximate
//! failure-probability engines, Monte Carlo sampling, and a numerical check
//! that unitary boosting steps with a fixed point cannot amplify.

pub mod approx;
pub mod circuit;
pub mod cnf;
pub mod error;
pub mod exact;
pub mod ext_prob;
pub mod nogo;
pub mod sampler;

pub use error::{BoundError, Error, Result};
pub use ext_prob::ExtProb;
