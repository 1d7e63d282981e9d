//! Unknown scalar functions inside determining equations.
//!
//! The construction step works with equations that mention functions not
//! yet known — H(x,u), b(x,u), a₁(x,u,p) and so on. An unknown is carried
//! symbolically: its value is the plain symbol `H`, and its partial
//! derivatives are flat symbols `H_x`, `H_u`, `H_xu`, … with suffix
//! letters kept in jet order so each mixed partial has exactly one name.
//! The total derivative D_x = ∂x + p ∂u + q ∂p + f ∂q then extends to
//! these symbols by the chain rule over the unknown's declared arguments,
//! and a candidate solution is checked by substituting its actual partial
//! derivatives for the placeholder symbols.

use crate::expr::{diff, substitute, Expr};
use crate::jet::JetContext;
use crate::sym::{Sym, P, Q, U, X};
use std::collections::BTreeMap;

/// An unknown scalar function with a declared argument list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownFn {
    /// Placeholder symbol name; must not contain `_` (reserved for
    /// partial-derivative suffixes) and must not shadow a jet variable.
    pub name: String,
    /// Arguments among {x, u, p}, kept in jet order.
    pub args: Vec<Sym>,
    /// Whether candidate solutions must be nonvanishing (functions that
    /// end up as factors of a jacobian or a denominator).
    pub nonzero: bool,
}

impl UnknownFn {
    /// Declare an unknown over the given arguments. Panics on a name that
    /// collides with the partial-symbol scheme or an argument outside
    /// {x, u, p}.
    pub fn new(name: impl Into<String>, args: &[&str]) -> Self {
        let name = name.into();
        assert!(
            !name.is_empty() && !name.contains('_'),
            "unknown-function name must be nonempty and free of `_`"
        );
        assert!(
            ![X, U, P, Q].contains(&name.as_str()),
            "unknown-function name must not shadow a jet variable"
        );
        let mut seen: Vec<Sym> = Vec::new();
        for a in args {
            assert!(
                [X, U, P].contains(a),
                "unknown-function arguments must be among x, u, p"
            );
            let s = Sym::new(*a);
            if !seen.contains(&s) {
                seen.push(s);
            }
        }
        seen.sort();
        UnknownFn {
            name,
            args: seen,
            nonzero: false,
        }
    }

    /// Mark candidate solutions as required to be nonvanishing.
    pub fn nonzero(mut self) -> Self {
        self.nonzero = true;
        self
    }

    /// The unknown itself as an expression.
    pub fn value(&self) -> Expr {
        Expr::sym(self.name.clone())
    }

    /// The symbol for a (possibly mixed) partial derivative, e.g.
    /// `partial("xu")` of `H` is the symbol `H_xu`. The suffix is
    /// re-sorted into jet order so every mixed partial is unique.
    pub fn partial(&self, suffix: &str) -> Sym {
        let mut letters: Vec<char> = suffix.chars().collect();
        letters.sort_by_key(|c| jet_letter_rank(*c));
        let sorted: String = letters.into_iter().collect();
        if sorted.is_empty() {
            Sym::new(self.name.clone())
        } else {
            Sym::new(format!("{}_{}", self.name, sorted))
        }
    }

    /// True when the symbol is this unknown or one of its partials.
    pub fn owns_symbol(&self, s: &Sym) -> bool {
        self.parse_symbol(s).is_some()
    }

    /// Interpret a symbol as this unknown or one of its partials,
    /// returning the suffix (empty for the value itself).
    fn parse_symbol(&self, s: &Sym) -> Option<String> {
        let n = s.name();
        if n == self.name {
            return Some(String::new());
        }
        let rest = n.strip_prefix(&self.name)?.strip_prefix('_')?;
        if !rest.is_empty() && rest.chars().all(|c| jet_letter_rank(c) < 4) {
            Some(rest.to_string())
        } else {
            None
        }
    }

    /// All placeholder symbols of this unknown occurring in an expression.
    fn occurrences(&self, e: &Expr) -> Vec<(Sym, String)> {
        e.free_symbols()
            .into_iter()
            .filter_map(|s| self.parse_symbol(&s).map(|suffix| (s, suffix)))
            .collect()
    }
}

/// Sort rank of a suffix letter: x < u < p; 4 marks a foreign character.
fn jet_letter_rank(c: char) -> u8 {
    match c {
        'x' => 0,
        'u' => 1,
        'p' => 2,
        _ => 4,
    }
}

/// D_x along solutions of the context's equation, extended to unknown
/// placeholders: a partial symbol `H_s` differentiates to
/// Σ rate(v) · H_sv over the unknown's arguments, with the usual rates
/// x → 1, u → p, p → q, q → f and parameters constant.
pub fn dx_with_unknowns(ctx: &JetContext, e: &Expr, unknowns: &[UnknownFn]) -> Expr {
    let mut terms = Vec::new();
    for s in e.free_symbols() {
        let de = diff(e, &s);
        if de.is_zero_const() {
            continue;
        }
        let rate = symbol_rate(ctx, &s, unknowns);
        if rate.is_zero_const() {
            continue;
        }
        terms.push(Expr::mul(de, rate));
    }
    Expr::add_all(terms)
}

/// D_x of a single symbol under the extended chain rule.
fn symbol_rate(ctx: &JetContext, s: &Sym, unknowns: &[UnknownFn]) -> Expr {
    match s.name() {
        X => return Expr::one(),
        U => return Expr::sym(P),
        P => return Expr::sym(Q),
        Q => return ctx.f.clone(),
        _ => {}
    }
    for uf in unknowns {
        if let Some(suffix) = uf.parse_symbol(s) {
            let mut parts = Vec::new();
            for arg in &uf.args {
                let arg_rate = match arg.name() {
                    X => Expr::one(),
                    U => Expr::sym(P),
                    P => Expr::sym(Q),
                    _ => unreachable!("arguments are validated at construction"),
                };
                let bumped = uf.partial(&format!("{}{}", suffix, arg.name()));
                parts.push(Expr::mul(arg_rate, Expr::Symbol(bumped)));
            }
            return Expr::add_all(parts);
        }
    }
    // Parameters and foreign symbols are constant along solutions.
    Expr::zero()
}

/// Replace an unknown and all of its partial placeholders by an actual
/// expression and its corresponding derivatives.
pub fn substitute_unknown(e: &Expr, unknown: &UnknownFn, replacement: &Expr) -> Expr {
    let mut map = BTreeMap::new();
    for (sym, suffix) in unknown.occurrences(e) {
        let mut value = replacement.clone();
        for c in suffix.chars() {
            value = diff(&value, &Sym::new(c.to_string()));
        }
        map.insert(sym, value);
    }
    if map.is_empty() {
        return e.clone();
    }
    substitute(e, &map)
}

/// True when the expression still mentions the unknown or any partial.
pub fn mentions_unknown(e: &Expr, unknown: &UnknownFn) -> bool {
    e.free_symbols()
        .iter()
        .any(|s| unknown.parse_symbol(s).is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_expr;

    fn free_ctx() -> JetContext {
        JetContext::new(Expr::zero(), vec![])
    }

    #[test]
    fn arguments_are_sorted_and_deduplicated() {
        let h = UnknownFn::new("H", &["u", "x", "u"]);
        let names: Vec<&str> = h.args.iter().map(Sym::name).collect();
        assert_eq!(names, ["x", "u"]);
    }

    #[test]
    fn total_derivative_creates_partial_symbols() {
        // D_x H(x,u) = H_x + p H_u.
        let h = UnknownFn::new("H", &["x", "u"]);
        let d = dx_with_unknowns(&free_ctx(), &h.value(), &[h.clone()]);
        let expected = Expr::add(
            Expr::Symbol(h.partial("x")),
            Expr::mul(Expr::sym(P), Expr::Symbol(h.partial("u"))),
        );
        assert_eq!(d, expected);
    }

    #[test]
    fn second_derivative_orders_mixed_suffixes() {
        // D_x²H = H_xx + 2p H_xu + p² H_uu + q H_u: the mixed partial
        // appears once under the canonical name H_xu, never as H_ux.
        let h = UnknownFn::new("H", &["x", "u"]);
        let ctx = free_ctx();
        let d1 = dx_with_unknowns(&ctx, &h.value(), &[h.clone()]);
        let d2 = dx_with_unknowns(&ctx, &d1, &[h.clone()]);
        let expected = parse_expr("H_xx + 2*p*H_xu + p^2*H_uu + q*H_u", &[
            Sym::new("H_xx"),
            Sym::new("H_xu"),
            Sym::new("H_uu"),
            Sym::new("H_u"),
        ])
        .unwrap();
        assert_eq!(d2, expected);
    }

    #[test]
    fn derivative_feeds_q_through_the_equation() {
        // For a₁(x,u,p), D_x a₁ ends in q a₁_p, and a product with q pulls
        // in f through D_x q = f.
        let f = parse_expr("3*q^2/p", &[]).unwrap();
        let ctx = JetContext::new(f.clone(), vec![]);
        let a1 = UnknownFn::new("a1", &["x", "u", "p"]);
        let d = dx_with_unknowns(&ctx, &a1.value(), &[a1.clone()]);
        let expected = parse_expr("a1_x + p*a1_u + q*a1_p", &[
            Sym::new("a1_x"),
            Sym::new("a1_u"),
            Sym::new("a1_p"),
        ])
        .unwrap();
        assert_eq!(d, expected);

        let prod = Expr::mul(a1.value(), Expr::sym(Q));
        let dprod = dx_with_unknowns(&ctx, &prod, &[a1.clone()]);
        // Leibniz: (D_x a₁) q + a₁ f.
        let expected = Expr::add(
            Expr::mul(d, Expr::sym(Q)),
            Expr::mul(a1.value(), ctx.f.clone()),
        );
        assert_eq!(dprod, expected);
    }

    #[test]
    fn parameters_are_constant_along_solutions() {
        let ctx = JetContext::new(Expr::zero(), vec![Sym::new("k")]);
        let h = UnknownFn::new("H", &["x"]);
        let e = Expr::mul(Expr::sym("k"), h.value());
        let d = dx_with_unknowns(&ctx, &e, &[h.clone()]);
        assert_eq!(d, Expr::mul(Expr::sym("k"), Expr::Symbol(h.partial("x"))));
    }

    #[test]
    fn substitution_applies_structural_partials() {
        // H_x + p H_u + H² at H = 1/u² becomes -2p/u³ + 1/u⁴.
        let h = UnknownFn::new("H", &["x", "u"]);
        let e = Expr::add_all(vec![
            Expr::Symbol(h.partial("x")),
            Expr::mul(Expr::sym(P), Expr::Symbol(h.partial("u"))),
            Expr::pow(h.value(), 2),
        ]);
        let repl = parse_expr("1/u^2", &[]).unwrap();
        let got = substitute_unknown(&e, &h, &repl);
        let expected = parse_expr("-2*p/u^3 + 1/u^4", &[]).unwrap();
        assert_eq!(got, expected);
    }

    #[test]
    fn substitution_handles_second_order_suffixes() {
        let psi = UnknownFn::new("psi", &["x", "u"]);
        let e = Expr::Symbol(psi.partial("ux")); // canonicalizes to psi_xu
        assert_eq!(psi.partial("ux"), Sym::new("psi_xu"));
        let repl = parse_expr("x^2*u", &[]).unwrap();
        // ∂²(x²u)/∂x∂u = 2x.
        let got = substitute_unknown(&e, &psi, &repl);
        assert_eq!(got, parse_expr("2*x", &[]).unwrap());
    }

    #[test]
    fn foreign_symbols_are_left_alone() {
        let h = UnknownFn::new("H", &["x", "u"]);
        let other = parse_expr("u + x", &[]).unwrap();
        assert_eq!(substitute_unknown(&other, &h, &Expr::one()), other);
        // A symbol with the right prefix but a foreign suffix letter stays.
        let odd = Expr::sym("H_z");
        assert_eq!(substitute_unknown(&odd, &h, &Expr::one()), odd);
        assert!(!mentions_unknown(&odd, &h));
    }

    #[test]
    fn mentions_detects_value_and_partials() {
        let b = UnknownFn::new("b", &["x", "u"]);
        assert!(mentions_unknown(&b.value(), &b));
        assert!(mentions_unknown(&Expr::Symbol(b.partial("u")), &b));
        assert!(!mentions_unknown(&Expr::sym("bb"), &b));
    }
}
