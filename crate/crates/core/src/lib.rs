pub mod arith;
pub mod error;
pub mod game;
pub mod io;
pub mod kplayer;
pub mod library;
pub mod spectral;
pub mod bireg;
pub mod concat;
pub mod multiplayer;
pub mod ordered;
pub mod pipeline;
pub mod plan;
pub mod repetition;
mod vertex;
pub mod strategy;

pub use arith::Rational;
pub use error::{Error, Result, Violation};
pub use game::{Game, Predicate};
pub use kplayer::KPlayerGame;
pub use strategy::Substrategy;
