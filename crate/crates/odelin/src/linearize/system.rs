//! Determining systems and coefficient matching.
//!
//! A determining system is a list of equations, each required to vanish
//! identically in the jet variables, over a set of unknown functions.
//! Because an unknown like H(x,u) does not depend on p or q, an equation
//! involving it splits: collecting by monomials in the absent jet
//! variables turns one identity into several smaller ones, exactly the
//! step that reduces a total-derivative equation to partial-derivative
//! equations. `match_coefficients` performs that split after clearing
//! denominators.

use crate::expr::nf::{NfError, PolyCtx, RationalNF};
use crate::expr::Expr;
use crate::linearize::unknowns::UnknownFn;
use crate::print::{from_json, to_json, JsonFormatError};
use crate::sym::Sym;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::json;
use std::collections::{BTreeMap, BTreeSet};

/// Failure to split an equation into coefficient equations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SystemError {
    /// A match variable occurs inside a function node or under an
    /// irreducible radical, so collecting by its monomials is unsound.
    #[error("expression is not polynomial in {vars}: {reason}")]
    NotPolynomialInJetVars { vars: String, reason: String },
}

/// One equation of a determining system; the label names the role the
/// equation plays in the construction (e.g. `riccati(H)`, `slope(phi)`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledEquation {
    pub label: String,
    pub expr: Expr,
}

impl LabeledEquation {
    pub fn new(label: impl Into<String>, expr: Expr) -> Self {
        LabeledEquation {
            label: label.into(),
            expr,
        }
    }
}

/// Equations over unknown functions, to hold identically in p and q.
/// Unknowns are listed in the order they are meant to be solved: each
/// one's equations may mention earlier unknowns but not later ones once
/// the earlier ones are substituted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterminingSystem {
    pub unknowns: Vec<UnknownFn>,
    pub params: Vec<Sym>,
    pub equations: Vec<LabeledEquation>,
}

impl DeterminingSystem {
    /// Assemble a system, checking that every symbol in every equation is
    /// a jet variable, a parameter, or a placeholder of a declared
    /// unknown.
    pub fn new(
        unknowns: Vec<UnknownFn>,
        params: Vec<Sym>,
        equations: Vec<LabeledEquation>,
    ) -> Self {
        for eq in &equations {
            for s in eq.expr.free_symbols() {
                let known = s.is_jet_var()
                    || params.contains(&s)
                    || unknowns.iter().any(|u| u.owns_symbol(&s));
                assert!(
                    known,
                    "equation `{}` mentions undeclared symbol `{}`",
                    eq.label,
                    s.name()
                );
            }
        }
        DeterminingSystem {
            unknowns,
            params,
            equations,
        }
    }

    /// Serialize for external solving: unknown declarations, parameters,
    /// and each labeled equation in the expression JSON schema.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "unknowns": self.unknowns.iter().map(|u| json!({
                "name": u.name,
                "args": u.args.iter().map(Sym::name).collect::<Vec<_>>(),
                "nonzero": u.nonzero,
            })).collect::<Vec<_>>(),
            "params": self.params.iter().map(Sym::name).collect::<Vec<_>>(),
            "equations": self.equations.iter().map(|eq| json!({
                "label": eq.label,
                "expr": to_json(&eq.expr),
            })).collect::<Vec<_>>(),
        })
    }

    /// Rebuild a system from its JSON form.
    pub fn from_json(v: &serde_json::Value) -> Result<DeterminingSystem, JsonFormatError> {
        let arr = |field: &str| -> Result<&Vec<serde_json::Value>, JsonFormatError> {
            v.get(field)
                .and_then(|x| x.as_array())
                .ok_or_else(|| JsonFormatError(format!("system: missing \"{field}\" array")))
        };
        let mut unknowns = Vec::new();
        for u in arr("unknowns")? {
            let name = u
                .get("name")
                .and_then(|x| x.as_str())
                .ok_or_else(|| JsonFormatError("unknown: missing \"name\"".into()))?;
            let args: Vec<&str> = u
                .get("args")
                .and_then(|x| x.as_array())
                .ok_or_else(|| JsonFormatError("unknown: missing \"args\"".into()))?
                .iter()
                .map(|a| {
                    a.as_str()
                        .ok_or_else(|| JsonFormatError("unknown: non-string arg".into()))
                })
                .collect::<Result<_, _>>()?;
            let ok_name = !name.is_empty()
                && !name.contains('_')
                && !Sym::new(name).is_jet_var()
                && args.iter().all(|a| ["x", "u", "p"].contains(a));
            if !ok_name {
                return Err(JsonFormatError(format!(
                    "unknown: invalid declaration `{name}({})`",
                    args.join(",")
                )));
            }
            let mut uf = UnknownFn::new(name, &args);
            if u.get("nonzero").and_then(|x| x.as_bool()).unwrap_or(false) {
                uf = uf.nonzero();
            }
            unknowns.push(uf);
        }
        let params = arr("params")?
            .iter()
            .map(|p| {
                p.as_str()
                    .map(Sym::new)
                    .ok_or_else(|| JsonFormatError("params: non-string entry".into()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut equations = Vec::new();
        for eq in arr("equations")? {
            let label = eq
                .get("label")
                .and_then(|x| x.as_str())
                .ok_or_else(|| JsonFormatError("equation: missing \"label\"".into()))?;
            let expr = from_json(
                eq.get("expr")
                    .ok_or_else(|| JsonFormatError("equation: missing \"expr\"".into()))?,
            )?;
            for s in expr.free_symbols() {
                let known = s.is_jet_var()
                    || params.contains(&s)
                    || unknowns.iter().any(|u| u.owns_symbol(&s));
                if !known {
                    return Err(JsonFormatError(format!(
                        "equation `{label}` mentions undeclared symbol `{}`",
                        s.name()
                    )));
                }
            }
            equations.push(LabeledEquation::new(label, expr));
        }
        Ok(DeterminingSystem {
            unknowns,
            params,
            equations,
        })
    }
}

/// Split an identity into coefficient equations: clear denominators,
/// group the numerator by monomials in the match variables, and return
/// one cleaned expression per group, each required to vanish. Groups are
/// stripped of numeric content and of common jet-variable monomial
/// factors (nonvanishing generically), normalized to a positive leading
/// coefficient, and deduplicated.
pub fn match_coefficients(e: &Expr, vars: &[Sym]) -> Result<Vec<Expr>, SystemError> {
    if e.is_zero_const() {
        return Ok(Vec::new());
    }
    let ctx = PolyCtx::for_expr(e);
    let nf = RationalNF::from_expr(e, &ctx)
        .map_err(|err| not_polynomial(vars, err))?
        .reduced();
    if let Some(base) = &nf.base {
        if base.depends_on_any(vars) {
            return Err(SystemError::NotPolynomialInJetVars {
                vars: joined(vars),
                reason: "a match variable occurs under an irreducible cube root".into(),
            });
        }
    }

    let match_pos: Vec<bool> = nf.ctx.vars.iter().map(|s| vars.contains(s)).collect();
    let kept: Vec<Sym> = nf
        .ctx
        .vars
        .iter()
        .filter(|s| !vars.contains(s))
        .cloned()
        .collect();

    let mut seen: BTreeSet<Expr> = BTreeSet::new();
    let mut out: Vec<Expr> = Vec::new();
    // Radical grades never mix: 1, B^(1/3), B^(2/3) are independent over
    // the rational functions, so each grade's coefficients vanish on
    // their own.
    for part in &nf.parts {
        if part.num.is_zero() {
            continue;
        }
        let mut groups: BTreeMap<Vec<u32>, BTreeMap<Vec<u32>, BigRational>> = BTreeMap::new();
        for (mono, c) in &part.num.terms {
            let mut key = Vec::new();
            let mut residual = Vec::new();
            for (i, exp) in mono.0.iter().enumerate() {
                if match_pos[i] {
                    key.push(*exp);
                } else {
                    residual.push(*exp);
                }
            }
            groups.entry(key).or_default().insert(residual, c.clone());
        }
        for terms in groups.values() {
            let cleaned = normalized_group(terms, &kept);
            if seen.insert(cleaned.clone()) {
                out.push(cleaned);
            }
        }
    }
    Ok(out)
}

/// Rebuild one coefficient group, dividing out what cannot vanish:
/// the numeric content, the sign of the leading coefficient, and any
/// jet-variable monomial common to all terms. Symbols that stand for
/// unknowns (or parameters) are never stripped.
fn normalized_group(terms: &BTreeMap<Vec<u32>, BigRational>, kept: &[Sym]) -> Expr {
    let strip: Vec<bool> = kept.iter().map(Sym::is_jet_var).collect();
    let mut min_exp: Vec<u32> = vec![u32::MAX; kept.len()];
    let mut ngcd = BigInt::zero();
    let mut dlcm = BigInt::one();
    for (exps, c) in terms {
        for (i, e) in exps.iter().enumerate() {
            let floor = if strip[i] { *e } else { 0 };
            min_exp[i] = min_exp[i].min(floor);
        }
        ngcd = ngcd.gcd(&c.numer().abs());
        dlcm = dlcm.lcm(c.denom());
    }
    let mut scale = BigRational::new(ngcd, dlcm);
    let (_, lead) = terms.iter().next_back().expect("group is nonempty");
    if lead.is_negative() {
        scale = -scale;
    }
    let mut parts = Vec::with_capacity(terms.len());
    for (exps, c) in terms {
        let mut factors = vec![Expr::Rational(c / &scale)];
        for (i, e) in exps.iter().enumerate() {
            let rem = e - min_exp[i];
            if rem > 0 {
                factors.push(Expr::pow(Expr::Symbol(kept[i].clone()), rem as i64));
            }
        }
        parts.push(Expr::mul_all(factors));
    }
    Expr::add_all(parts)
}

fn not_polynomial(vars: &[Sym], err: NfError) -> SystemError {
    let reason = match err {
        NfError::FunctionNode => "a function node blocks polynomial collection".into(),
        other => other.to_string(),
    };
    SystemError::NotPolynomialInJetVars {
        vars: joined(vars),
        reason,
    }
}

fn joined(vars: &[Sym]) -> String {
    vars.iter().map(Sym::name).collect::<Vec<_>>().join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_expr;
    use crate::sym::{P, Q};

    fn pq() -> Vec<Sym> {
        vec![Sym::new(P), Sym::new(Q)]
    }

    fn hsyms() -> Vec<Sym> {
        ["H", "H_x", "H_u"].into_iter().map(Sym::new).collect()
    }

    #[test]
    fn riccati_identity_splits_by_powers_of_p() {
        // (2/(u p))(H_x + p H_u) + H² + 3/u⁴ must vanish identically in p
        // for H = H(x,u): the 1/p part forces H_x = 0 and the rest is the
        // Riccati equation 2u³H_u + u⁴H² + 3 = 0 after clearing u⁴.
        let e = parse_expr("(2/(u*p))*(H_x + p*H_u) + H^2 + 3/u^4", &hsyms()).unwrap();
        let got = match_coefficients(&e, &pq()).unwrap();
        let riccati = parse_expr("2*u^3*H_u + u^4*H^2 + 3", &hsyms()).unwrap();
        assert_eq!(got, vec![Expr::sym("H_x"), riccati]);
        // H = 1/u² satisfies the group equations: 2u³(−2/u³) + u⁴/u⁴ + 3 = 0.
        let h = crate::linearize::unknowns::UnknownFn::new("H", &["x", "u"]);
        let sol = parse_expr("1/u^2", &[]).unwrap();
        for g in &got {
            assert!(crate::linearize::unknowns::substitute_unknown(g, &h, &sol).is_zero_const());
        }
    }

    #[test]
    fn transport_identity_splits_into_partial_equations() {
        // b_x + p b_u − p b/u over b(x,u) splits into b_x = 0 and the
        // cleared form of b_u = b/u.
        let syms: Vec<Sym> = ["b", "b_x", "b_u"].into_iter().map(Sym::new).collect();
        let e = parse_expr("b_x + p*b_u - p*b/u", &syms).unwrap();
        let got = match_coefficients(&e, &pq()).unwrap();
        let cleared = parse_expr("u*b_u - b", &syms).unwrap();
        assert_eq!(got, vec![Expr::sym("b_x"), cleared]);
    }

    #[test]
    fn zero_expression_has_no_coefficient_equations() {
        assert_eq!(match_coefficients(&Expr::zero(), &pq()).unwrap(), vec![]);
    }

    #[test]
    fn repeated_groups_are_deduplicated() {
        // H_x(1 + p) produces the same group at p⁰ and p¹.
        let e = parse_expr("H_x*(1 + p)", &hsyms()).unwrap();
        let got = match_coefficients(&e, &pq()).unwrap();
        assert_eq!(got, vec![Expr::sym("H_x")]);
    }

    #[test]
    fn numeric_and_jet_content_are_stripped_but_placeholders_kept() {
        // 6x³H_xH_u p: the jet factor x³ and the constant drop, the
        // placeholder product stays.
        let e = parse_expr("6*x^3*H_x*H_u*p", &hsyms()).unwrap();
        let got = match_coefficients(&e, &pq()).unwrap();
        let expected = parse_expr("H_x*H_u", &hsyms()).unwrap();
        assert_eq!(got, vec![expected]);
    }

    #[test]
    fn leading_coefficient_is_normalized_positive() {
        let syms = hsyms();
        let a = parse_expr("-2*H_u*p + 4*H*p", &syms).unwrap();
        let got = match_coefficients(&a, &pq()).unwrap();
        // Leading term (highest monomial) made positive, content 2 gone.
        let expected = parse_expr("2*H - H_u", &syms).unwrap();
        assert_eq!(got, vec![expected]);
    }

    #[test]
    fn match_variable_inside_function_node_is_rejected() {
        let e = Expr::func(crate::expr::Builtin::Sin, Expr::sym(P));
        let err = match_coefficients(&e, &pq()).unwrap_err();
        assert!(matches!(err, SystemError::NotPolynomialInJetVars { .. }));
    }

    #[test]
    fn match_variable_under_radical_is_rejected() {
        let e = Expr::cbrt(parse_expr("u^3*p^3 + p", &[]).unwrap());
        let err = match_coefficients(&e, &pq()).unwrap_err();
        assert!(matches!(err, SystemError::NotPolynomialInJetVars { .. }));
    }

    #[test]
    fn radical_free_of_match_variables_grades_separately() {
        // p·∛u + u: grade 0 gives u (content-stripped to 1? no — u is a
        // single term, stripped to 1 as a jet monomial: the group says
        // u = 0 cannot hold, and indeed the full identity never vanishes).
        // The interesting part: grouping does not error and the cbrt(u)
        // coefficient appears as its own equation.
        let e = parse_expr("p*cbrt(u) + u*q", &[]).unwrap();
        let got = match_coefficients(&e, &pq()).unwrap();
        // Both groups strip to the constant 1: neither u·q nor p·∛u can
        // vanish identically (jet content and radical factors removed).
        assert_eq!(got, vec![Expr::one()]);
    }

    #[test]
    fn system_json_round_trips() {
        let h = UnknownFn::new("H", &["x", "u"]);
        let b = UnknownFn::new("b", &["x", "u"]).nonzero();
        let eqs = vec![
            LabeledEquation::new(
                "riccati(H)",
                parse_expr("2*u^3*H_u + u^4*H^2 + 3", &hsyms()).unwrap(),
            ),
            LabeledEquation::new(
                "transport(b)",
                parse_expr("u*b_u - b", &[Sym::new("b"), Sym::new("b_u")]).unwrap(),
            ),
        ];
        let sys = DeterminingSystem::new(vec![h, b], vec![], eqs);
        let v = sys.to_json();
        let back = DeterminingSystem::from_json(&v).unwrap();
        assert_eq!(back, sys);
        assert!(back.unknowns[1].nonzero);
    }

    #[test]
    fn json_import_rejects_undeclared_symbols() {
        let sys = DeterminingSystem::new(
            vec![UnknownFn::new("H", &["x", "u"])],
            vec![],
            vec![LabeledEquation::new("riccati(H)", Expr::sym("H_u"))],
        );
        let mut v = sys.to_json();
        v["equations"][0]["expr"] = to_json(&Expr::sym("mystery"));
        let err = DeterminingSystem::from_json(&v).unwrap_err();
        assert!(err.to_string().contains("mystery"));
    }

    #[test]
    #[should_panic(expected = "undeclared symbol")]
    fn construction_rejects_stray_symbols() {
        DeterminingSystem::new(
            vec![UnknownFn::new("H", &["x", "u"])],
            vec![],
            vec![LabeledEquation::new("riccati(H)", Expr::sym("stray"))],
        );
    }

    #[test]
    fn parameters_are_allowed_in_equations() {
        let k = Sym::new("k");
        let e = Expr::mul(Expr::sym("k"), Expr::sym("H_u"));
        let sys = DeterminingSystem::new(
            vec![UnknownFn::new("H", &["x", "u"])],
            vec![k.clone()],
            vec![LabeledEquation::new("riccati(H)", e)],
        );
        assert_eq!(sys.params, vec![k]);
    }
}
