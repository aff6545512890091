//! Twisted traces of CM values of weakly holomorphic modular functions on Γ₀(N),
//! the Weil representation machinery around them, and the weak Jacobi forms that
//! collect them into generating series.

pub mod arith;
pub mod ball;
pub mod cmeval;
pub mod error;
pub mod genus;
pub mod jacobi;
pub mod qforms;
pub mod qseries;
pub mod traces;
pub mod weilrep;

pub use error::{Error, Result};
