//! Construction of linearizing point transformations.
//!
//! Once classification has identified the symmetry dimension, the actual
//! change of variables (x̄, ū) = (φ(x,u), ψ(x,u)) is found by solving a
//! small determining system for auxiliary functions, searching candidate
//! closed forms over a structured ansatz, and accepting only candidates
//! that make the full pullback identity hold.

pub mod system;
pub mod unknowns;

pub use system::{match_coefficients, DeterminingSystem, LabeledEquation, SystemError};
pub use unknowns::{dx_with_unknowns, mentions_unknown, substitute_unknown, UnknownFn};
