pub mod analysis;
pub mod ca;
pub mod cli;
pub mod error;
pub mod evolve;
pub mod fsm;
pub mod genome;
pub mod seed;

pub use error::{Error, Result};
