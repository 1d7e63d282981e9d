//! Symbol names and the fixed symbol order.
//!
//! Expressions live on the third-order jet space with coordinates
//! (x, u, p, q) where p stands for u' and q for u''. Every other symbol
//! is a parameter. The total order x < u < p < q < parameters (alphabetical)
//! fixes monomial order, operand sort order and printed output.

use std::cmp::Ordering;
use std::fmt;

/// Independent variable.
pub const X: &str = "x";
/// Dependent variable.
pub const U: &str = "u";
/// First derivative u'.
pub const P: &str = "p";
/// Second derivative u''.
pub const Q: &str = "q";

/// The four jet coordinates in order.
pub const JET_VARS: [&str; 4] = [X, U, P, Q];

/// An interned symbol name.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sym(pub String);

impl Sym {
    pub fn new(name: impl Into<String>) -> Self {
        Sym(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// True for one of the four jet coordinates.
    pub fn is_jet_var(&self) -> bool {
        JET_VARS.contains(&self.0.as_str())
    }

    /// Sort rank: jet coordinates first in jet order, then parameters.
    fn rank(&self) -> u8 {
        match self.0.as_str() {
            X => 0,
            U => 1,
            P => 2,
            Q => 3,
            _ => 4,
        }
    }
}

impl Ord for Sym {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank()
            .cmp(&other.rank())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Sym {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Sym {
    fn from(s: &str) -> Self {
        Sym::new(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_vars_precede_parameters() {
        let mut syms: Vec<Sym> = ["alpha", "q", "x", "m", "u", "p"]
            .iter()
            .map(|s| Sym::new(*s))
            .collect();
        syms.sort();
        let names: Vec<&str> = syms.iter().map(|s| s.name()).collect();
        assert_eq!(names, ["x", "u", "p", "q", "alpha", "m"]);
    }

    #[test]
    fn parameters_sort_alphabetically() {
        assert!(Sym::new("a") < Sym::new("b"));
        assert!(Sym::new("q") < Sym::new("a"));
    }
}
