//! Simultaneous symbol substitution.

use super::Expr;
use crate::sym::Sym;
use std::collections::BTreeMap;

/// Replace every occurrence of each key symbol by its expression, in one
/// pass (substitutions do not feed each other), rebuilding canonical form
/// bottom-up.
pub fn substitute(e: &Expr, map: &BTreeMap<Sym, Expr>) -> Expr {
    match e {
        Expr::Rational(_) => e.clone(),
        Expr::Symbol(s) => match map.get(s) {
            Some(repl) => repl.clone(),
            None => e.clone(),
        },
        Expr::Sum(ts) => Expr::add_all(ts.iter().map(|t| substitute(t, map)).collect()),
        Expr::Product(fs) => Expr::mul_all(fs.iter().map(|f| substitute(f, map)).collect()),
        Expr::Power(b, k) => Expr::pow(substitute(b, map), *k),
        Expr::Cbrt(a) => Expr::cbrt(substitute(a, map)),
        Expr::Func(f, a) => Expr::func(*f, substitute(a, map)),
        Expr::Undefined => Expr::Undefined,
    }
}

/// Substitution of a single symbol.
pub fn substitute_one(e: &Expr, s: &Sym, repl: &Expr) -> Expr {
    let mut map = BTreeMap::new();
    map.insert(s.clone(), repl.clone());
    substitute(e, &map)
}
