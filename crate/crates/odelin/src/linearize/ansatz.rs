//! Deterministic ansatz search over determining systems.
//!
//! Unknowns are solved one at a time, in their declared order. For each,
//! the equations currently mentioning it (and no later unknown) are split
//! into coefficient equations, and candidate closed forms are tried in a
//! fixed enumeration order. A candidate is accepted only when every
//! coefficient equation becomes identically zero under exact testing;
//! the first accepted candidate is substituted and the search moves on,
//! backtracking through recorded alternates when a later unknown cannot
//! be solved.
//!
//! Two kinds of families are searched: concrete monomials c·v₁^{e₁}⋯,
//! tried candidate by candidate, and linear families (sums of monomials,
//! polynomials of bounded degree) solved in one stroke by undetermined
//! coefficients and exact Gaussian elimination.

use crate::expr::zero::{decide_zero, find_nonzero_witness, ZeroCfg, ZeroStatus};
use crate::expr::Expr;
use crate::linearize::system::{match_coefficients, DeterminingSystem, LabeledEquation};
use crate::linearize::unknowns::{mentions_unknown, substitute_unknown, UnknownFn};
use crate::sym::{Sym, JET_VARS, P, Q};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;

/// Shape of candidate solutions for one unknown.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnsatzFamily {
    /// One term c·v₁^{e₁}⋯vₙ^{eₙ} with integer exponents |eᵢ| ≤ max_exp.
    Monomial { max_exp: u32 },
    /// Monomial in a single argument (the others absent).
    SingleVariable { max_exp: u32 },
    /// Rational linear combination of monomials with Σ|eᵢ| ≤ max_exp,
    /// reported only when at most `terms` monomials carry nonzero
    /// coefficients.
    SumOfMonomials { max_exp: u32, terms: usize },
    /// Polynomial of bounded total degree (no negative exponents).
    PolynomialOfDegree { degree: u32 },
}

/// Families to try, in order, and the total candidate budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnsatzConfig {
    pub ladder: Vec<AnsatzFamily>,
    pub budget: u64,
}

impl Default for AnsatzConfig {
    fn default() -> Self {
        AnsatzConfig {
            ladder: vec![
                AnsatzFamily::Monomial { max_exp: 6 },
                AnsatzFamily::SumOfMonomials {
                    max_exp: 3,
                    terms: 3,
                },
                AnsatzFamily::PolynomialOfDegree { degree: 4 },
            ],
            budget: 50_000,
        }
    }
}

/// Search failure that aborts rather than reporting a residual.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnsatzError {
    #[error("ansatz search exceeded its budget of {budget} candidates")]
    SearchBudgetExceeded { budget: u64 },
}

/// A solved unknown: the accepted value plus any other candidates that
/// passed the same equations (recorded, not substituted).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    pub unknown: UnknownFn,
    pub value: Expr,
    pub alternates: Vec<Expr>,
}

/// Result of a search: either every unknown bound, or the system handed
/// back untouched for manual work.
#[derive(Debug, Clone, PartialEq)]
pub enum SolveOutcome {
    Solved { bindings: Vec<Binding> },
    Failed { residual: DeterminingSystem },
}

/// Candidate coefficients, in preference order.
const COEFFS: [(i64, i64); 10] = [
    (1, 1),
    (-1, 1),
    (2, 1),
    (-2, 1),
    (3, 1),
    (-3, 1),
    (1, 2),
    (-1, 2),
    (1, 3),
    (-1, 3),
];

/// Accepted candidates kept per unknown (first is primary).
const MAX_HITS: usize = 4;

/// Solve a determining system against the configured ansatz ladder.
pub fn solve_ansatz(
    sys: &DeterminingSystem,
    config: &AnsatzConfig,
    zcfg: &ZeroCfg,
) -> Result<SolveOutcome, AnsatzError> {
    let mut search = Search {
        sys,
        config,
        zcfg,
        quick: ZeroCfg {
            seed: zcfg.seed,
            samples: 1,
        },
        budget_left: config.budget,
    };
    let work: Vec<LabeledEquation> = sys
        .equations
        .iter()
        .filter(|eq| !eq.expr.is_zero_const())
        .cloned()
        .collect();
    let mut bindings = Vec::new();
    if search.dfs(0, &work, &mut bindings)? {
        Ok(SolveOutcome::Solved { bindings })
    } else {
        Ok(SolveOutcome::Failed {
            residual: sys.clone(),
        })
    }
}

struct Search<'a> {
    sys: &'a DeterminingSystem,
    config: &'a AnsatzConfig,
    zcfg: &'a ZeroCfg,
    /// One-sample configuration for fast rejection of bad candidates.
    quick: ZeroCfg,
    budget_left: u64,
}

impl Search<'_> {
    fn spend(&mut self, units: u64) -> Result<(), AnsatzError> {
        if self.budget_left < units {
            return Err(AnsatzError::SearchBudgetExceeded {
                budget: self.config.budget,
            });
        }
        self.budget_left -= units;
        Ok(())
    }

    /// Depth-first search over unknowns; `work` carries the equations
    /// with all earlier bindings substituted.
    fn dfs(
        &mut self,
        idx: usize,
        work: &[LabeledEquation],
        bindings: &mut Vec<Binding>,
    ) -> Result<bool, AnsatzError> {
        if idx == self.sys.unknowns.len() {
            // Everything bound: any leftover equation must already vanish.
            for eq in work {
                if decide_zero(&eq.expr, self.zcfg).status != ZeroStatus::Zero {
                    return Ok(false);
                }
            }
            return Ok(true);
        }
        let uf = &self.sys.unknowns[idx];
        let later = &self.sys.unknowns[idx + 1..];
        let visible: Vec<&Expr> = work
            .iter()
            .map(|eq| &eq.expr)
            .filter(|e| {
                mentions_unknown(e, uf) && !later.iter().any(|l| mentions_unknown(e, l))
            })
            .collect();
        let candidates = if visible.is_empty() {
            // Unconstrained at this stage: bind the simplest legal value.
            vec![if uf.nonzero {
                Expr::one()
            } else {
                Expr::zero()
            }]
        } else {
            self.solve_unknown(&visible, uf)?
        };
        for (i, cand) in candidates.iter().enumerate() {
            let new_work: Vec<LabeledEquation> = work
                .iter()
                .map(|eq| {
                    LabeledEquation::new(eq.label.clone(), substitute_unknown(&eq.expr, uf, cand))
                })
                .filter(|eq| !eq.expr.is_zero_const())
                .collect();
            bindings.push(Binding {
                unknown: uf.clone(),
                value: cand.clone(),
                alternates: Vec::new(),
            });
            if self.dfs(idx + 1, &new_work, bindings)? {
                let mut others = candidates.clone();
                others.remove(i);
                bindings[idx].alternates = others;
                return Ok(true);
            }
            bindings.pop();
        }
        Ok(false)
    }

    /// Candidates for one unknown from its visible equations, walking the
    /// family ladder until one family produces at least one hit.
    fn solve_unknown(
        &mut self,
        visible: &[&Expr],
        uf: &UnknownFn,
    ) -> Result<Vec<Expr>, AnsatzError> {
        // Identities in the jet variables the unknown does not depend on
        // split into coefficient equations; an equation that cannot be
        // split (a radical involving p or q) is kept whole and left to
        // the exact zero test.
        let mvars: Vec<Sym> = [P, Q]
            .into_iter()
            .map(Sym::new)
            .filter(|v| !uf.args.contains(v))
            .collect();
        let mut groups: Vec<Expr> = Vec::new();
        let mut seen: BTreeSet<Expr> = BTreeSet::new();
        for e in visible {
            match match_coefficients(e, &mvars) {
                Ok(gs) => {
                    for g in gs {
                        if seen.insert(g.clone()) {
                            groups.push(g);
                        }
                    }
                }
                Err(_) => {
                    if seen.insert((*e).clone()) {
                        groups.push((*e).clone());
                    }
                }
            }
        }
        for family in &self.config.ladder {
            let hits = match family {
                AnsatzFamily::Monomial { max_exp } => {
                    self.monomial_scan(&groups, uf, *max_exp, false)?
                }
                AnsatzFamily::SingleVariable { max_exp } => {
                    self.monomial_scan(&groups, uf, *max_exp, true)?
                }
                AnsatzFamily::SumOfMonomials { max_exp, terms } => {
                    let basis = exponent_tuples(uf.args.len(), *max_exp, false, false);
                    self.linear_scan(&groups, uf, &basis, Some(*terms))?
                }
                AnsatzFamily::PolynomialOfDegree { degree } => {
                    let basis = exponent_tuples(uf.args.len(), *degree, true, false);
                    self.linear_scan(&groups, uf, &basis, None)?
                }
            };
            if !hits.is_empty() {
                return Ok(hits);
            }
        }
        Ok(Vec::new())
    }

    /// Enumerate concrete monomials by total absolute exponent level,
    /// lexicographic within a level, coefficients in preference order.
    /// After the first hit the rest of its level is still scanned so
    /// same-shape alternates are recorded.
    fn monomial_scan(
        &mut self,
        groups: &[Expr],
        uf: &UnknownFn,
        max_exp: u32,
        single: bool,
    ) -> Result<Vec<Expr>, AnsatzError> {
        let mut hits = Vec::new();
        if !uf.nonzero {
            self.spend(1)?;
            if self.accepts(groups, uf, &Expr::zero()) {
                return Ok(vec![Expr::zero()]);
            }
        }
        let n = uf.args.len();
        let d = max_exp as i64;
        for level in 0..=d * n as i64 {
            for tuple in tuples_at_level(n, d, level, false) {
                if single && tuple.iter().filter(|e| **e != 0).count() > 1 {
                    continue;
                }
                for (num, den) in COEFFS {
                    self.spend(1)?;
                    let c = BigRational::new(BigInt::from(num), BigInt::from(den));
                    let cand = monomial_expr(&c, &uf.args, &tuple);
                    if self.accepts(groups, uf, &cand) {
                        hits.push(cand);
                        if hits.len() >= MAX_HITS {
                            return Ok(hits);
                        }
                    }
                }
            }
            if !hits.is_empty() {
                break;
            }
        }
        Ok(hits)
    }

    /// Solve a linear family in one stroke: substitute a combination with
    /// undetermined coefficients, collect by all jet-variable monomials,
    /// and Gauss-eliminate the resulting affine system exactly. Applies
    /// only when every collected row is affine in the coefficients with
    /// rational entries; otherwise the family reports no hits.
    fn linear_scan(
        &mut self,
        groups: &[Expr],
        uf: &UnknownFn,
        basis: &[Vec<i64>],
        max_terms: Option<usize>,
    ) -> Result<Vec<Expr>, AnsatzError> {
        if basis.is_empty() {
            return Ok(Vec::new());
        }
        self.spend(basis.len() as u64)?;
        let csyms: Vec<Sym> = (0..basis.len())
            .map(|i| Sym::new(format!("#c{i}")))
            .collect();
        let one = BigRational::one();
        let combo = Expr::add_all(
            basis
                .iter()
                .zip(&csyms)
                .map(|(t, c)| {
                    Expr::mul(Expr::Symbol(c.clone()), monomial_expr(&one, &uf.args, t))
                })
                .collect(),
        );
        let jet: Vec<Sym> = JET_VARS.map(Sym::new).to_vec();
        let mut rows: Vec<Expr> = Vec::new();
        for g in groups {
            let e = substitute_unknown(g, uf, &combo);
            if e.is_zero_const() {
                continue;
            }
            match match_coefficients(&e, &jet) {
                Ok(gs) => rows.extend(gs),
                Err(_) => return Ok(Vec::new()),
            }
        }
        let Some(system) = affine_rows(&rows, &csyms) else {
            return Ok(Vec::new());
        };
        let Some((particular, null_basis)) = solve_affine(&system, csyms.len()) else {
            return Ok(Vec::new()); // inconsistent
        };
        // Assemble concrete coefficient vectors: the particular solution
        // first, then one null direction at a time (added to it when it
        // is nonzero, alone otherwise).
        let mut vectors: Vec<Vec<BigRational>> = Vec::new();
        let part_nonzero = particular.iter().any(|x| !x.is_zero());
        if part_nonzero {
            vectors.push(particular.clone());
        }
        for v in &null_basis {
            if part_nonzero {
                let shifted: Vec<BigRational> =
                    particular.iter().zip(v).map(|(a, b)| a + b).collect();
                vectors.push(shifted);
            } else {
                vectors.push(primitive_vector(v));
            }
        }
        let mut hits = Vec::new();
        for vec in vectors {
            let cand = combination_expr(&vec, &uf.args, basis);
            if cand.is_zero_const() {
                continue;
            }
            if let Some(cap) = max_terms {
                let terms = match &cand {
                    Expr::Sum(ts) => ts.len(),
                    _ => 1,
                };
                if terms > cap {
                    continue;
                }
            }
            if self.accepts(groups, uf, &cand) {
                hits.push(cand);
                if hits.len() >= MAX_HITS {
                    break;
                }
            }
        }
        Ok(hits)
    }

    /// Exact acceptance: every coefficient equation must provably vanish
    /// under the candidate. A single random sample rejects most wrong
    /// candidates before the exact test runs.
    fn accepts(&self, groups: &[Expr], uf: &UnknownFn, cand: &Expr) -> bool {
        for g in groups {
            let e = substitute_unknown(g, uf, cand);
            if e.is_zero_const() {
                continue;
            }
            if find_nonzero_witness(&e, &self.quick).is_some() {
                return false;
            }
            if decide_zero(&e, self.zcfg).status != ZeroStatus::Zero {
                return false;
            }
        }
        true
    }
}

/// All exponent tuples with Σ|eᵢ| = level and |eᵢ| ≤ d, in lexicographic
/// ascending order (nonneg restricts to eᵢ ≥ 0).
fn tuples_at_level(n: usize, d: i64, level: i64, nonneg: bool) -> Vec<Vec<i64>> {
    fn rec(
        n: usize,
        d: i64,
        remaining: i64,
        nonneg: bool,
        cur: &mut Vec<i64>,
        out: &mut Vec<Vec<i64>>,
    ) {
        if cur.len() == n {
            if remaining == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let slots_after = (n - cur.len() - 1) as i64;
        let lo = if nonneg { 0 } else { -d };
        for e in lo..=d {
            let left = remaining - e.abs();
            if left < 0 || left > slots_after * d {
                continue;
            }
            cur.push(e);
            rec(n, d, left, nonneg, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        if level == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(n, d, level, nonneg, &mut Vec::new(), &mut out);
    out
}

/// Exponent tuples for a linear-family basis: levels ascending, lex
/// within a level.
fn exponent_tuples(n: usize, max: u32, nonneg: bool) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for level in 0..=max as i64 {
        out.extend(tuples_at_level(n, max as i64, level, nonneg));
    }
    out
}

/// c · Π argᵢ^{eᵢ} as an expression.
fn monomial_expr(c: &BigRational, args: &[Sym], exps: &[i64]) -> Expr {
    let mut factors = vec![Expr::Rational(c.clone())];
    for (a, e) in args.iter().zip(exps) {
        if *e != 0 {
            factors.push(Expr::pow(Expr::Symbol(a.clone()), *e));
        }
    }
    Expr::mul_all(factors)
}

/// Σ cᵢ · monoᵢ for a concrete coefficient vector.
fn combination_expr(coeffs: &[BigRational], args: &[Sym], basis: &[Vec<i64>]) -> Expr {
    Expr::add_all(
        coeffs
            .iter()
            .zip(basis)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, t)| monomial_expr(c, args, t))
            .collect(),
    )
}

/// Scale to coprime integers with the first nonzero entry positive.
fn primitive_vector(v: &[BigRational]) -> Vec<BigRational> {
    let mut dlcm = BigInt::one();
    let mut ngcd = BigInt::zero();
    for x in v {
        dlcm = dlcm.lcm(x.denom());
        ngcd = ngcd.gcd(&x.numer().abs());
    }
    if ngcd.is_zero() {
        return v.to_vec();
    }
    let mut scale = BigRational::new(dlcm, ngcd);
    if let Some(first) = v.iter().find(|x| !x.is_zero()) {
        if first.is_negative() {
            scale = -scale;
        }
    }
    v.iter().map(|x| x * &scale).collect()
}

/// Interpret rows as affine forms Σ aᵢ·cᵢ + k over the coefficient
/// symbols; None when a row brings in foreign symbols or a nonlinear
/// coefficient product.
fn affine_rows(rows: &[Expr], csyms: &[Sym]) -> Option<Vec<(Vec<BigRational>, BigRational)>> {
    use crate::expr::nf::{Poly, PolyCtx};
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let ctx = PolyCtx::for_expr(row);
        let positions: Vec<usize> = ctx
            .vars
            .iter()
            .map(|s| csyms.iter().position(|c| c == s))
            .collect::<Option<Vec<_>>>()?;
        let poly = Poly::from_expr(row, &ctx).ok()?;
        let mut coeffs = vec![BigRational::zero(); csyms.len()];
        let mut konst = BigRational::zero();
        for (mono, c) in &poly.terms {
            let total: u32 = mono.0.iter().sum();
            match total {
                0 => konst = c.clone(),
                1 => {
                    let at = mono.0.iter().position(|e| *e == 1).expect("degree-1 term");
                    coeffs[positions[at]] = c.clone();
                }
                _ => return None, // nonlinear in the coefficients
            }
        }
        out.push((coeffs, konst));
    }
    Some(out)
}

/// Exact affine solve: rows state Σ aᵢⱼ·cⱼ + kᵢ = 0. Returns the
/// particular solution with free variables at zero and one null-space
/// basis vector per free variable (in ascending variable order); None
/// when the system is inconsistent.
#[allow(clippy::needless_range_loop)]
fn solve_affine(
    rows: &[(Vec<BigRational>, BigRational)],
    m: usize,
) -> Option<(Vec<BigRational>, Vec<Vec<BigRational>>)> {
    // Augmented matrix [A | b] for A c = b with b = −k.
    let mut mat: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|(a, k)| {
            let mut row = a.clone();
            row.push(-k.clone());
            row
        })
        .collect();
    let nrows = mat.len();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; m];
    let mut rank = 0usize;
    for col in 0..m {
        let Some(pr) = (rank..nrows).find(|r| !mat[*r][col].is_zero()) else {
            continue;
        };
        mat.swap(rank, pr);
        let inv = mat[rank][col].recip();
        for x in mat[rank].iter_mut() {
            *x *= &inv;
        }
        for r in 0..nrows {
            if r != rank && !mat[r][col].is_zero() {
                let factor = mat[r][col].clone();
                for c in 0..=m {
                    let delta = &factor * &mat[rank][c];
                    mat[r][c] -= delta;
                }
            }
        }
        pivot_of_col[col] = Some(rank);
        rank += 1;
    }
    for r in rank..nrows {
        if !mat[r][m].is_zero() {
            return None; // 0 = nonzero
        }
    }
    let mut particular = vec![BigRational::zero(); m];
    for col in 0..m {
        if let Some(r) = pivot_of_col[col] {
            particular[col] = mat[r][m].clone();
        }
    }
    let mut null_basis = Vec::new();
    for free in 0..m {
        if pivot_of_col[free].is_some() {
            continue;
        }
        let mut v = vec![BigRational::zero(); m];
        v[free] = BigRational::one();
        for col in 0..m {
            if let Some(r) = pivot_of_col[col] {
                v[col] = -mat[r][free].clone();
            }
        }
        null_basis.push(v);
    }
    Some((particular, null_basis))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::JetContext;
    use crate::linearize::unknowns::dx_with_unknowns;
    use crate::parse::parse_expr;

    fn zcfg() -> ZeroCfg {
        ZeroCfg::default()
    }

    fn one_unknown_system(uf: UnknownFn, label: &str, eq: Expr) -> DeterminingSystem {
        DeterminingSystem::new(vec![uf], vec![], vec![LabeledEquation::new(label, eq)])
    }

    #[test]
    fn riccati_search_finds_inverse_square_first() {
        // (2/(u p))·D_x H + H² + 3/u⁴ over H(x,u): both 1/u² and 3/u²
        // solve it (the substituted constants satisfy c² − 4c + 3 = 0);
        // the enumeration order must put 1/u² first.
        let h = UnknownFn::new("H", &["x", "u"]);
        let ctx = JetContext::new(Expr::zero(), vec![]);
        let dxh = dx_with_unknowns(&ctx, &h.value(), &[h.clone()]);
        let eq = Expr::add_all(vec![
            Expr::mul(parse_expr("2/(u*p)", &[]).unwrap(), dxh),
            Expr::pow(h.value(), 2),
            parse_expr("3/u^4", &[]).unwrap(),
        ]);
        let sys = one_unknown_system(h, "riccati(H)", eq);
        let out = solve_ansatz(&sys, &AnsatzConfig::default(), &zcfg()).unwrap();
        let SolveOutcome::Solved { bindings } = out else {
            panic!("expected a solution");
        };
        assert_eq!(bindings[0].value, parse_expr("1/u^2", &[]).unwrap());
        assert!(bindings[0]
            .alternates
            .contains(&parse_expr("3/u^2", &[]).unwrap()));
    }

    #[test]
    fn homogeneous_transport_solves_to_linear_monomial() {
        // D_x b = (p/u)·b for b(x,u): solution b = u (scalar multiples are
        // alternates of the same ray).
        let b = UnknownFn::new("b", &["x", "u"]).nonzero();
        let ctx = JetContext::new(Expr::zero(), vec![]);
        let dxb = dx_with_unknowns(&ctx, &b.value(), &[b.clone()]);
        let eq = Expr::sub(dxb, Expr::mul(parse_expr("p/u", &[]).unwrap(), b.value()));
        let sys = one_unknown_system(b, "transport(b)", eq);
        let out = solve_ansatz(&sys, &AnsatzConfig::default(), &zcfg()).unwrap();
        let SolveOutcome::Solved { bindings } = out else {
            panic!("expected a solution");
        };
        assert_eq!(bindings[0].value, Expr::sym("u"));
    }

    #[test]
    fn three_argument_transport_recovers_deep_monomial() {
        // D_x a₁ = −(q/p + 5p/u)·a₁ over a₁(x,u,p): the worked value is
        // a₁ = 1/(u⁵p), six levels deep in the enumeration.
        let f = parse_expr("3*q^2/p - x*u^3*p^4", &[]).unwrap();
        let ctx = JetContext::new(f, vec![]);
        let a1 = UnknownFn::new("a1", &["x", "u", "p"]).nonzero();
        let dxa1 = dx_with_unknowns(&ctx, &a1.value(), &[a1.clone()]);
        let rate = parse_expr("-(q/p + 5*p/u)", &[]).unwrap();
        let eq = Expr::sub(dxa1, Expr::mul(rate, a1.value()));
        let sys = one_unknown_system(a1, "transport(a1)", eq);
        let out = solve_ansatz(&sys, &AnsatzConfig::default(), &zcfg()).unwrap();
        let SolveOutcome::Solved { bindings } = out else {
            panic!("expected a solution");
        };
        assert_eq!(bindings[0].value, parse_expr("1/(u^5*p)", &[]).unwrap());
    }

    #[test]
    fn linear_family_recovers_two_term_solution() {
        // ψ_u = 1 and ψ_x = −4x have no single-monomial solution; the
        // sum-of-monomials family must return ψ = u − 2x² (the free
        // additive constant is an alternate direction, not the primary).
        let psi = UnknownFn::new("psi", &["x", "u"]);
        let ctx = JetContext::new(Expr::zero(), vec![]);
        let dxpsi = dx_with_unknowns(&ctx, &psi.value(), &[psi.clone()]);
        // D_xψ − (p − 4x) forces ψ_u = 1 and ψ_x = −4x at once.
        let eq = Expr::sub(dxpsi, parse_expr("p - 4*x", &[]).unwrap());
        let sys = one_unknown_system(psi, "area(psi)", eq);
        let out = solve_ansatz(&sys, &AnsatzConfig::default(), &zcfg()).unwrap();
        let SolveOutcome::Solved { bindings } = out else {
            panic!("expected a solution");
        };
        assert_eq!(bindings[0].value, parse_expr("u - 2*x^2", &[]).unwrap());
    }

    #[test]
    fn dependent_pair_solves_in_declared_order() {
        // b first (b = u), then φ with D_xφ = u·p/b = p, giving φ = u.
        let b = UnknownFn::new("b", &["x", "u"]).nonzero();
        let phi = UnknownFn::new("phi", &["x", "u"]);
        let ctx = JetContext::new(Expr::zero(), vec![]);
        let dxb = dx_with_unknowns(&ctx, &b.value(), &[b.clone()]);
        let transport = Expr::sub(dxb, Expr::mul(parse_expr("p/u", &[]).unwrap(), b.value()));
        let dxphi = dx_with_unknowns(&ctx, &phi.value(), &[phi.clone()]);
        let slope = Expr::sub(
            Expr::mul(dxphi, b.value()),
            parse_expr("u*p", &[]).unwrap(),
        );
        let sys = DeterminingSystem::new(
            vec![b, phi],
            vec![],
            vec![
                LabeledEquation::new("transport(b)", transport),
                LabeledEquation::new("slope(phi)", slope),
            ],
        );
        let out = solve_ansatz(&sys, &AnsatzConfig::default(), &zcfg()).unwrap();
        let SolveOutcome::Solved { bindings } = out else {
            panic!("expected a solution");
        };
        assert_eq!(bindings[0].value, Expr::sym("u"));
        assert_eq!(bindings[1].value, Expr::sym("u"));
    }

    #[test]
    fn unsolvable_system_returns_untouched_residual() {
        // H_u = H over H(x,u) has only exponential solutions, outside
        // every family; the zero solution is barred by the nonzero mark.
        let h = UnknownFn::new("H", &["x", "u"]).nonzero();
        let eq = Expr::sub(Expr::Symbol(h.partial("u")), h.value());
        let sys = one_unknown_system(h, "growth(H)", eq);
        let out = solve_ansatz(&sys, &AnsatzConfig::default(), &zcfg()).unwrap();
        let SolveOutcome::Failed { residual } = out else {
            panic!("expected failure");
        };
        assert_eq!(residual, sys);
    }

    #[test]
    fn exhausted_budget_is_an_error() {
        let h = UnknownFn::new("H", &["x", "u"]).nonzero();
        let eq = Expr::sub(Expr::Symbol(h.partial("u")), h.value());
        let sys = one_unknown_system(h, "growth(H)", eq);
        let config = AnsatzConfig {
            budget: 5,
            ..AnsatzConfig::default()
        };
        let err = solve_ansatz(&sys, &config, &zcfg()).unwrap_err();
        assert_eq!(err, AnsatzError::SearchBudgetExceeded { budget: 5 });
    }

    #[test]
    fn search_is_deterministic_for_a_fixed_seed() {
        let h = UnknownFn::new("H", &["x", "u"]);
        let ctx = JetContext::new(Expr::zero(), vec![]);
        let dxh = dx_with_unknowns(&ctx, &h.value(), &[h.clone()]);
        let eq = Expr::add_all(vec![
            Expr::mul(parse_expr("2/(u*p)", &[]).unwrap(), dxh),
            Expr::pow(h.value(), 2),
            parse_expr("3/u^4", &[]).unwrap(),
        ]);
        let sys = one_unknown_system(h, "riccati(H)", eq);
        let a = solve_ansatz(&sys, &AnsatzConfig::default(), &zcfg()).unwrap();
        let b = solve_ansatz(&sys, &AnsatzConfig::default(), &zcfg()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tuple_enumeration_is_level_then_lexicographic() {
        let got = tuples_at_level(2, 2, 2, false);
        let expected: Vec<Vec<i64>> = vec![
            vec![-2, 0],
            vec![-1, -1],
            vec![-1, 1],
            vec![0, -2],
            vec![0, 2],
            vec![1, -1],
            vec![1, 1],
            vec![2, 0],
        ];
        assert_eq!(got, expected);
    }

    #[test]
    fn nonnegative_tuples_respect_total_degree() {
        let got = exponent_tuples(2, 2, true, false);
        let expected: Vec<Vec<i64>> = vec![
            vec![0, 0],
            vec![0, 1],
            vec![1, 0],
            vec![0, 2],
            vec![1, 1],
            vec![2, 0],
        ];
        assert_eq!(got, expected);
    }

    #[test]
    fn zero_candidate_wins_when_allowed() {
        // A_p = 0 and A·(A − u) = 0 over A(x,u,p): zero is legal and
        // tried before any monomial.
        let a = UnknownFn::new("A", &["x", "u", "p"]);
        let eq1 = Expr::Symbol(a.partial("p"));
        let eq2 = Expr::mul(a.value(), Expr::sub(a.value(), Expr::sym("u")));
        let sys = DeterminingSystem::new(
            vec![a],
            vec![],
            vec![
                LabeledEquation::new("shape(A)", eq1),
                LabeledEquation::new("shape2(A)", eq2),
            ],
        );
        let out = solve_ansatz(&sys, &AnsatzConfig::default(), &zcfg()).unwrap();
        let SolveOutcome::Solved { bindings } = out else {
            panic!("expected a solution");
        };
        assert!(bindings[0].value.is_zero_const());
    }
}
