pub mod error;
pub mod num;
pub mod poly;

pub use error::{Error, Result};
pub mod substitution;
pub mod algebraic;
pub mod riesz;
pub mod diophantine;
pub mod spectral;
pub mod flows;
pub mod bernoulli;
pub mod config;
