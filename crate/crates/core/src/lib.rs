//! Integer-valued polynomials over Z.
//!
//! The library enumerates the factorizations into irreducibles of
//! polynomials `(∏ f_i) / c`. It also constructs elements of Int(Z) whose
//! set of factorization lengths is any prescribed finite set.

pub mod arith;
pub mod cli;
pub mod construct;
pub mod design;
pub mod error;
pub mod factor;
mod json;
pub mod lift;
pub mod poly;
pub mod report;

pub use error::{Error, Result};
