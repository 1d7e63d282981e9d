//! Partial differentiation with respect to a symbol.

use super::{Builtin, Expr};
use crate::sym::Sym;

/// d(e)/d(s), treating every other symbol as independent of `s`.
pub fn diff(e: &Expr, s: &Sym) -> Expr {
    match e {
        Expr::Rational(_) => Expr::zero(),
        Expr::Symbol(t) => {
            if t == s {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Sum(ts) => Expr::add_all(ts.iter().map(|t| diff(t, s)).collect()),
        Expr::Product(fs) => {
            // Leibniz: sum over factors of (d factor) * rest.
            let mut terms = Vec::with_capacity(fs.len());
            for (i, fi) in fs.iter().enumerate() {
                if !fi.depends_on(s) {
                    continue;
                }
                let mut factors = Vec::with_capacity(fs.len());
                factors.push(diff(fi, s));
                for (j, fj) in fs.iter().enumerate() {
                    if j != i {
                        factors.push(fj.clone());
                    }
                }
                terms.push(Expr::mul_all(factors));
            }
            Expr::add_all(terms)
        }
        Expr::Power(b, k) => {
            if !b.depends_on(s) {
                return Expr::zero();
            }
            // d(b^k) = k b^(k-1) db
            Expr::mul_all(vec![
                Expr::int(*k),
                Expr::pow((**b).clone(), k - 1),
                diff(b, s),
            ])
        }
        Expr::Cbrt(a) => {
            if !a.depends_on(s) {
                return Expr::zero();
            }
            // d(a^(1/3)) = da / (3 a^(2/3)) = da * cbrt(a) / (3 a)
            Expr::mul_all(vec![
                Expr::rat(1, 3),
                diff(a, s),
                Expr::cbrt((**a).clone()),
                Expr::pow((**a).clone(), -1),
            ])
        }
        Expr::Func(f, a) => {
            if !a.depends_on(s) {
                return Expr::zero();
            }
            let da = diff(a, s);
            let outer = match f {
                Builtin::Exp => Expr::func(Builtin::Exp, (**a).clone()),
                Builtin::Ln => Expr::pow((**a).clone(), -1),
                Builtin::Sin => Expr::func(Builtin::Cos, (**a).clone()),
                Builtin::Cos => Expr::neg(Expr::func(Builtin::Sin, (**a).clone())),
                // d(sqrt(a)) = da / (2 sqrt(a))
                Builtin::Sqrt => Expr::mul_all(vec![
                    Expr::rat(1, 2),
                    Expr::pow(Expr::sqrt((**a).clone()), -1),
                ]),
            };
            Expr::mul(outer, da)
        }
        Expr::Undefined => Expr::Undefined,
    }
}

/// Iterated derivative.
pub fn diff_n(e: &Expr, s: &Sym, n: u32) -> Expr {
    let mut acc = e.clone();
    for _ in 0..n {
        acc = diff(&acc, s);
    }
    acc
}
