//! Numerical laboratory for value-distribution theory: proximity, counting
//! and characteristic functions of explicit meromorphic functions and
//! holomorphic curves, Casorati/Wronskian determinants, divisor extraction
//! by the argument principle, hyperplane constructions, and a harness that
//! evaluates both sides of the explicit growth inequalities on concrete
//! instances.

pub mod casorati;
pub mod dd;
pub mod expr;
pub mod hyperplanes;
pub mod linalg;
pub mod nevanlinna;
pub mod quad;
pub mod roots;
pub mod special;
pub mod verify;

pub use expr::{Expr, ExprError, ExprRef, LogComplex};
