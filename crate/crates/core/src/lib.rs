//! Finite-universe decision-theoretic agents: environment models, exact
//! planning, model learning and the supporting analyses.

pub mod arena;
pub mod envmodel;
pub mod error;
pub mod experiments;
pub mod history;
pub mod learner;
pub mod logic;
pub mod lottery;
pub mod markov;
pub mod planner;
pub mod rng;
pub mod utility;
pub mod values;

pub use error::{Error, Result};
pub use history::{ActionSymbol, FlaggedHistory, InteractionHistory, ObservationSymbol};
