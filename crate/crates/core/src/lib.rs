//! Numerical laboratory for the generalized Korteweg–de Vries equation
//! ∂ₜu + ∂ₓ(∂ₓ²u + uᵖ) = 0 on a periodic surrogate of the line.

// Negated comparisons are how parameter checks reject NaN; index loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod diagnostics;
pub mod error;
pub mod field;
pub mod lab;
pub mod modulation;
pub mod profiles;
pub mod scattering;
pub mod solver;
pub mod spectral;

#[cfg(test)]
#[path = "../tests/common/oracle.rs"]
mod oracle;

pub use error::{Error, Result};
pub use field::{Exponent, Field, GridSpec};
