pub mod belief;
pub mod bundled;
pub mod error;
pub mod experiment;
pub mod game;
pub mod generator;
pub mod hypothesis;
pub mod lattice;
pub mod literal;
pub mod propositions;
pub mod relations;
pub mod scenario;
pub mod schedule;
pub mod stream;

pub use error::{Error, Result};
