//! Intention deception planning for a user-controlled stochastic system
//! monitored by a partially observing defender.
//!
//! The attacker masquerades as a legitimate user: it only plays actions a
//! user could play under some almost-sure winning strategy consistent with
//! the defender's observations, while steering toward its own target.

pub mod asw;
pub mod belief;
pub mod dot;
pub mod error;
pub mod experiments;
pub mod gridworld;
pub mod mdp;
pub mod model_file;
pub mod planner;
pub mod set;
pub mod sim;

pub use asw::{asw, asw_reach, AswResult};
pub use belief::{AugConfig, AugId, AugState, AugmentedMdp, InitialBelief, Mode};
pub use error::{Error, Result};
pub use mdp::{ActionId, History, Mdp, ObservationModel, ReachAvoidObjective, StateId};
pub use model_file::{Model, ModelFile};
pub use planner::{synthesize, FiniteMemoryStrategy, Synthesis};
pub use set::StateSet;

/// Version string recorded in run reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
