//! Hadamard finite-part integrals by the limit and contour methods, and
//! corrected term-by-term expansions of Stieltjes transforms.

// `!(x > 0.0)` deliberately rejects NaN; quadrature nodes keep their published digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod contour;
pub mod error;
pub mod finite_part;
pub mod function_model;
pub mod quadrature;
pub mod reference;
pub mod special;
pub mod stieltjes;

pub use contour::Contour;
pub use error::{Error, Result};
pub use finite_part::{FpiProblem, FpiResult, Method};
pub use function_model::{make_builtin, AnalyticFunction, BranchSpec};
pub use stieltjes::{ExpansionResult, StieltjesProblem};
