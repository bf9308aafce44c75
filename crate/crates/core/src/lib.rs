pub mod cooc;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod factorization;
pub mod pairs;
pub mod report;
pub mod rng;
pub mod second_order;
pub mod sgns;
pub mod simgen;

pub use error::{Error, Result};
