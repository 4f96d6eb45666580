//! Shinohara rock-paper-scissors: round mechanics, the symmetric equilibrium
//! paper probability, Markov profile analysis and seeded simulation.

pub mod equilibrium;
pub mod error;
pub mod game;
pub mod markov;
pub mod montecarlo;
pub mod seed;

pub use error::{Error, Result};
pub use game::{Action, GameState, PayoffVector, PlayerId, ResolutionKind, RoundResolution};
pub use markov::MarkovProfile;
