//! Robust inference for discrete Bayesian networks whose local
//! distributions are polytopic credal sets.

pub mod approx;
pub mod bn;
pub mod ccm;
pub mod credal;
mod error;
pub mod io;
pub mod lavine;
mod linalg;
pub mod lp;
pub mod natural;
pub mod query;
pub mod random;
pub mod type1;

pub use error::{Error, Result};
