//! Symbolic linearization of scalar third-order ODEs u''' = f(x, u, u', u'')
//! by point transformations.
//!
//! The crate decides whether such an equation can be mapped to a linear
//! one by a change of variables (x̄, ū) = (φ(x,u), ψ(x,u)), reports the
//! dimension of its point-symmetry group (7, 5, or 4), constructs the
//! transformation and the canonical target form where one exists, and
//! verifies every transformation by exact pullback on the jet space.

pub mod classify;
pub mod expr;
pub mod invariants;
pub mod jet;
pub mod linearize;
pub mod parse;
pub mod print;
pub mod sym;
