//! Expression printers: plain infix, LaTeX, and a JSON tree.
//!
//! Infix output re-parses to the same normalized expression, so it doubles
//! as a serialization format. Negative powers print as divisions
//! (`-3/u^4`, never `-3*u^-4`), exact rationals print as `a/b`, never as
//! decimals. JSON spells the whole tree with rationals kept as strings.

use crate::expr::{Builtin, Expr};
use crate::sym::Sym;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::str::FromStr;

// ---- infix ---------------------------------------------------------------

/// Render as plain infix text.
pub fn infix(e: &Expr) -> String {
    match e {
        Expr::Sum(ts) => {
            let mut out = String::new();
            for (i, t) in ts.iter().enumerate() {
                let (neg, s) = render_term(t);
                if i == 0 {
                    if neg {
                        out.push('-');
                    }
                } else if neg {
                    out.push_str(" - ");
                } else {
                    out.push_str(" + ");
                }
                out.push_str(&s);
            }
            out
        }
        _ => {
            let (neg, s) = render_term(e);
            if neg {
                format!("-{s}")
            } else {
                s
            }
        }
    }
}

/// Sign and body of one additive term, negative powers moved below the bar.
fn render_term(e: &Expr) -> (bool, String) {
    let mut coeff = BigRational::one();
    let mut num: Vec<String> = Vec::new();
    let mut den: Vec<String> = Vec::new();
    collect_factors(e, &mut coeff, &mut num, &mut den);
    if coeff.is_zero() {
        return (false, "0".to_string());
    }
    let neg = coeff.is_negative();
    let numer = coeff.numer().abs();
    let denom = coeff.denom().abs();
    let mut num_parts: Vec<String> = Vec::new();
    if !numer.is_one() || num.is_empty() {
        num_parts.push(numer.to_string());
    }
    num_parts.extend(num);
    let mut den_parts: Vec<String> = Vec::new();
    if !denom.is_one() {
        den_parts.push(denom.to_string());
    }
    den_parts.extend(den);
    let mut s = num_parts.join("*");
    match den_parts.len() {
        0 => {}
        1 => {
            s.push('/');
            s.push_str(&den_parts[0]);
        }
        _ => {
            s.push_str("/(");
            s.push_str(&den_parts.join("*"));
            s.push(')');
        }
    }
    (neg, s)
}

/// Split a term into rational coefficient, numerator atoms, denominator
/// atoms.
fn collect_factors(e: &Expr, coeff: &mut BigRational, num: &mut Vec<String>, den: &mut Vec<String>) {
    match e {
        Expr::Rational(r) => *coeff *= r,
        Expr::Product(fs) => {
            for f in fs {
                collect_factors(f, coeff, num, den);
            }
        }
        Expr::Power(b, k) => {
            let base = atom(b, true);
            let mag = k.unsigned_abs();
            // A sum base keeps its explicit exponent: `1/(x + u)^2` would
            // re-parse through the expanding positive power and lose the
            // compact form, while `(x + u)^-2` round-trips structurally.
            if *k < 0 && matches!(**b, Expr::Sum(_)) {
                num.push(format!("{base}^-{mag}"));
                return;
            }
            let body = if mag == 1 {
                base
            } else {
                format!("{base}^{mag}")
            };
            if *k < 0 {
                den.push(body);
            } else {
                num.push(body);
            }
        }
        other => num.push(atom(other, false)),
    }
}

/// A single multiplicative atom; `as_base` asks for parentheses safe to
/// exponentiate.
fn atom(e: &Expr, as_base: bool) -> String {
    match e {
        Expr::Rational(r) => {
            let plain = if r.denom().is_one() {
                r.numer().to_string()
            } else {
                format!("{}/{}", r.numer(), r.denom())
            };
            if as_base && (r.is_negative() || !r.denom().is_one()) {
                format!("({plain})")
            } else {
                plain
            }
        }
        Expr::Symbol(s) => s.name().to_string(),
        Expr::Cbrt(a) => format!("cbrt({})", infix(a)),
        Expr::Func(f, a) => format!("{}({})", f.name(), infix(a)),
        Expr::Sum(_) => format!("({})", infix(e)),
        Expr::Product(_) | Expr::Power(_, _) => {
            let s = infix(e);
            format!("({s})")
        }
        Expr::Undefined => "undefined".to_string(),
    }
}

// ---- LaTeX ---------------------------------------------------------------

const GREEK: [&str; 24] = [
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "iota", "kappa",
    "lambda", "mu", "nu", "xi", "omicron", "pi", "rho", "sigma", "tau", "upsilon", "phi", "chi",
    "psi", "omega",
];

fn latex_symbol(s: &Sym) -> String {
    let n = s.name();
    if GREEK.contains(&n) {
        return format!("\\{n}");
    }
    if let Some(core) = n.strip_suffix("bar") {
        if core.len() == 1 {
            return format!("\\bar{{{core}}}");
        }
    }
    n.to_string()
}

/// Render as LaTeX math.
pub fn latex(e: &Expr) -> String {
    match e {
        Expr::Sum(ts) => {
            let mut out = String::new();
            for (i, t) in ts.iter().enumerate() {
                let (neg, s) = latex_term(t);
                if i == 0 {
                    if neg {
                        out.push('-');
                    }
                } else if neg {
                    out.push_str(" - ");
                } else {
                    out.push_str(" + ");
                }
                out.push_str(&s);
            }
            out
        }
        _ => {
            let (neg, s) = latex_term(e);
            if neg {
                format!("-{s}")
            } else {
                s
            }
        }
    }
}

fn latex_term(e: &Expr) -> (bool, String) {
    let mut coeff = BigRational::one();
    let mut num: Vec<String> = Vec::new();
    let mut den: Vec<String> = Vec::new();
    collect_latex_factors(e, &mut coeff, &mut num, &mut den);
    if coeff.is_zero() {
        return (false, "0".to_string());
    }
    let neg = coeff.is_negative();
    let numer = coeff.numer().abs();
    let denom = coeff.denom().abs();
    let mut num_parts: Vec<String> = Vec::new();
    if !numer.is_one() || num.is_empty() {
        num_parts.push(numer.to_string());
    }
    num_parts.extend(num);
    let mut den_parts: Vec<String> = Vec::new();
    if !denom.is_one() {
        den_parts.push(denom.to_string());
    }
    den_parts.extend(den);
    let num_str = num_parts.join(" ");
    if den_parts.is_empty() {
        (neg, num_str)
    } else {
        (neg, format!("\\frac{{{}}}{{{}}}", num_str, den_parts.join(" ")))
    }
}

fn collect_latex_factors(
    e: &Expr,
    coeff: &mut BigRational,
    num: &mut Vec<String>,
    den: &mut Vec<String>,
) {
    match e {
        Expr::Rational(r) => *coeff *= r,
        Expr::Product(fs) => {
            for f in fs {
                collect_latex_factors(f, coeff, num, den);
            }
        }
        Expr::Power(b, k) => {
            let base = latex_atom(b, true);
            let mag = k.unsigned_abs();
            let body = if mag == 1 {
                base
            } else {
                format!("{base}^{{{mag}}}")
            };
            if *k < 0 {
                den.push(body);
            } else {
                num.push(body);
            }
        }
        other => num.push(latex_atom(other, false)),
    }
}

fn latex_atom(e: &Expr, as_base: bool) -> String {
    match e {
        Expr::Rational(r) => {
            let plain = if r.denom().is_one() {
                r.numer().to_string()
            } else {
                format!("\\frac{{{}}}{{{}}}", r.numer(), r.denom())
            };
            if as_base && r.is_negative() {
                format!("\\left({plain}\\right)")
            } else {
                plain
            }
        }
        Expr::Symbol(s) => latex_symbol(s),
        Expr::Cbrt(a) => format!("\\sqrt[3]{{{}}}", latex(a)),
        Expr::Func(Builtin::Sqrt, a) => format!("\\sqrt{{{}}}", latex(a)),
        Expr::Func(f, a) => format!("\\{}\\left({}\\right)", f.name(), latex(a)),
        Expr::Sum(_) | Expr::Product(_) | Expr::Power(_, _) => {
            format!("\\left({}\\right)", latex(e))
        }
        Expr::Undefined => "\\mathrm{undefined}".to_string(),
    }
}

// ---- JSON ----------------------------------------------------------------

/// Malformed JSON expression tree.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid expression JSON: {0}")]
pub struct JsonFormatError(pub String);

/// Emit the full tree; rationals and exponents are strings, exact.
pub fn to_json(e: &Expr) -> serde_json::Value {
    use serde_json::json;
    match e {
        Expr::Rational(r) => {
            let value = if r.denom().is_one() {
                r.numer().to_string()
            } else {
                format!("{}/{}", r.numer(), r.denom())
            };
            json!({"kind": "rational", "value": value})
        }
        Expr::Symbol(s) => json!({"kind": "symbol", "name": s.name()}),
        Expr::Sum(ts) => {
            json!({"kind": "sum", "children": ts.iter().map(to_json).collect::<Vec<_>>()})
        }
        Expr::Product(fs) => {
            json!({"kind": "product", "children": fs.iter().map(to_json).collect::<Vec<_>>()})
        }
        Expr::Power(b, k) => {
            json!({"kind": "power", "value": k.to_string(), "children": vec![to_json(b)]})
        }
        Expr::Cbrt(a) => json!({"kind": "cbrt", "children": vec![to_json(a)]}),
        Expr::Func(f, a) => {
            json!({"kind": "func", "name": f.name(), "children": vec![to_json(a)]})
        }
        Expr::Undefined => json!({"kind": "undefined"}),
    }
}

/// Rebuild an expression from the JSON tree, renormalizing on the way up.
pub fn from_json(v: &serde_json::Value) -> Result<Expr, JsonFormatError> {
    let kind = v
        .get("kind")
        .and_then(|k| k.as_str())
        .ok_or_else(|| JsonFormatError("missing \"kind\"".into()))?;
    let children = || -> Result<Vec<Expr>, JsonFormatError> {
        v.get("children")
            .and_then(|c| c.as_array())
            .ok_or_else(|| JsonFormatError(format!("{kind}: missing \"children\"")))?
            .iter()
            .map(from_json)
            .collect()
    };
    let one_child = || -> Result<Expr, JsonFormatError> {
        let cs = children()?;
        if cs.len() != 1 {
            return Err(JsonFormatError(format!(
                "{kind}: expected exactly one child, got {}",
                cs.len()
            )));
        }
        Ok(cs.into_iter().next().unwrap())
    };
    match kind {
        "rational" => {
            let s = v
                .get("value")
                .and_then(|x| x.as_str())
                .ok_or_else(|| JsonFormatError("rational: missing \"value\"".into()))?;
            let r = parse_rational(s)
                .ok_or_else(|| JsonFormatError(format!("rational: bad value `{s}`")))?;
            Ok(Expr::Rational(r))
        }
        "symbol" => {
            let name = v
                .get("name")
                .and_then(|x| x.as_str())
                .ok_or_else(|| JsonFormatError("symbol: missing \"name\"".into()))?;
            Ok(Expr::sym(name))
        }
        "sum" => Ok(Expr::add_all(children()?)),
        "product" => Ok(Expr::mul_all(children()?)),
        "power" => {
            let k = v
                .get("value")
                .and_then(|x| x.as_str())
                .and_then(|s| s.parse::<i64>().ok())
                .ok_or_else(|| JsonFormatError("power: missing integer \"value\"".into()))?;
            Ok(Expr::pow(one_child()?, k))
        }
        "cbrt" => Ok(Expr::cbrt(one_child()?)),
        "func" => {
            let name = v
                .get("name")
                .and_then(|x| x.as_str())
                .ok_or_else(|| JsonFormatError("func: missing \"name\"".into()))?;
            let f = Builtin::from_name(name)
                .ok_or_else(|| JsonFormatError(format!("func: unknown function `{name}`")))?;
            Ok(Expr::func(f, one_child()?))
        }
        "undefined" => Ok(Expr::Undefined),
        other => Err(JsonFormatError(format!("unknown kind `{other}`"))),
    }
}

fn parse_rational(s: &str) -> Option<BigRational> {
    match s.split_once('/') {
        None => BigInt::from_str(s).ok().map(BigRational::from_integer),
        Some((n, d)) => {
            let n = BigInt::from_str(n).ok()?;
            let d = BigInt::from_str(d).ok()?;
            if d.is_zero() {
                None
            } else {
                Some(BigRational::new(n, d))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u() -> Expr {
        Expr::sym("u")
    }

    #[test]
    fn negative_power_prints_as_division() {
        // -3 u^{-4} must render with the power below the bar.
        let e = Expr::mul(Expr::int(-3), Expr::pow(u(), -4));
        assert_eq!(infix(&e), "-3/u^4");
    }

    #[test]
    fn cube_root_of_two_in_latex() {
        let e = Expr::cbrt(Expr::int(2));
        assert_eq!(latex(&e), "\\sqrt[3]{2}");
    }

    #[test]
    fn mixed_term_groups_denominator() {
        // 3 q^2 / p and a second term with a composite denominator.
        let e = Expr::mul_all(vec![
            Expr::int(3),
            Expr::pow(Expr::sym("q"), 2),
            Expr::pow(Expr::sym("p"), -1),
        ]);
        assert_eq!(infix(&e), "3*q^2/p");
        // Denominator factors follow the canonical symbol order x < u < p < q.
        let e2 = Expr::mul_all(vec![
            Expr::int(5),
            Expr::pow(Expr::sym("p"), -1),
            Expr::pow(u(), -2),
        ]);
        assert_eq!(infix(&e2), "5/(u^2*p)");
    }

    #[test]
    fn rational_coefficients_never_print_as_decimals() {
        let e = Expr::mul(Expr::rat(3, 4), Expr::sym("x"));
        assert_eq!(infix(&e), "3*x/4");
        assert_eq!(infix(&Expr::rat(-7, 2)), "-7/2");
    }

    #[test]
    fn json_round_trip_preserves_structure() {
        let e = Expr::add(
            Expr::mul(Expr::rat(3, 4), Expr::pow(Expr::sym("q"), 2)),
            Expr::cbrt(Expr::mul(Expr::sym("x"), u())),
        );
        let v = to_json(&e);
        let back = from_json(&v).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn json_rejects_malformed_trees() {
        let bad = serde_json::json!({"kind": "power", "children": []});
        assert!(from_json(&bad).is_err());
        let bad2 = serde_json::json!({"kind": "wat"});
        assert!(from_json(&bad2).is_err());
    }
}
