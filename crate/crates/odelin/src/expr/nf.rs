//! Multivariate polynomial and rational-function normal forms.
//!
//! Polynomials are sparse maps from exponent vectors to rational
//! coefficients under graded lexicographic order built on the symbol order
//! x < u < p < q < parameters. The rational normal form keeps a numerator
//! and a monic denominator with gcd 1, plus a graded radical part: an
//! expression rational in one cube-root base B is written
//! c0 + c1 B^(1/3) + c2 B^(2/3) with rational-function coefficients, and is
//! zero exactly when all three components vanish (B cube-free, so B^(1/3)
//! is irrational over the coefficient field).

use super::Expr;
use crate::sym::Sym;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

/// Conversion failure: the expression leaves the representable fragment.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NfError {
    #[error("expression contains a transcendental or square-root node")]
    FunctionNode,
    #[error("expression mixes more than one irreducible cube-root base")]
    MultipleRadicalBases,
    #[error("nested radical")]
    NestedRadical,
    #[error("division by an expression that is identically zero")]
    DivisionByZero,
    #[error("undefined subexpression (division by zero during construction)")]
    Undefined,
}

// ---- monomials -----------------------------------------------------------

/// Exponent vector relative to a [`PolyCtx`]; graded lex order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    fn degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    fn mul(&self, other: &Mono) -> Mono {
        Mono(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Componentwise division; None when not divisible.
    fn div(&self, other: &Mono) -> Option<Mono> {
        let mut out = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            if a < b {
                return None;
            }
            out.push(a - b);
        }
        Some(Mono(out))
    }

    fn is_unit(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// ---- context -------------------------------------------------------------

/// Ordered variable list shared by the polynomials of one computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyCtx {
    pub vars: Vec<Sym>,
}

impl PolyCtx {
    pub fn new(mut vars: Vec<Sym>) -> Self {
        vars.sort();
        vars.dedup();
        PolyCtx { vars }
    }

    /// Context over the free symbols of an expression.
    pub fn for_expr(e: &Expr) -> Self {
        PolyCtx::new(e.free_symbols().into_iter().collect())
    }

    /// Context over the free symbols of several expressions.
    pub fn for_exprs<'a>(es: impl IntoIterator<Item = &'a Expr>) -> Self {
        let mut vars = Vec::new();
        for e in es {
            vars.extend(e.free_symbols());
        }
        PolyCtx::new(vars)
    }

    pub fn index_of(&self, s: &Sym) -> Option<usize> {
        self.vars.iter().position(|v| v == s)
    }

    fn unit(&self) -> Mono {
        Mono(vec![0; self.vars.len()])
    }

    fn var_mono(&self, idx: usize) -> Mono {
        let mut v = vec![0; self.vars.len()];
        v[idx] = 1;
        Mono(v)
    }
}

// ---- polynomials ---------------------------------------------------------

/// Sparse multivariate polynomial with rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    pub terms: BTreeMap<Mono, BigRational>,
    nvars: usize,
}

impl Poly {
    pub fn zero(ctx: &PolyCtx) -> Poly {
        Poly {
            terms: BTreeMap::new(),
            nvars: ctx.vars.len(),
        }
    }

    pub fn constant(ctx: &PolyCtx, c: BigRational) -> Poly {
        let mut p = Poly::zero(ctx);
        if !c.is_zero() {
            p.terms.insert(ctx.unit(), c);
        }
        p
    }

    pub fn one(ctx: &PolyCtx) -> Poly {
        Poly::constant(ctx, BigRational::one())
    }

    pub fn var(ctx: &PolyCtx, s: &Sym) -> Option<Poly> {
        let idx = ctx.index_of(s)?;
        let mut p = Poly::zero(ctx);
        p.terms.insert(ctx.var_mono(idx), BigRational::one());
        Some(p)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.keys().next().unwrap().is_unit())
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        if self.terms.is_empty() {
            return Some(BigRational::zero());
        }
        if self.is_constant() {
            return Some(self.terms.values().next().unwrap().clone());
        }
        None
    }

    fn insert(&mut self, m: Mono, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly {
            terms: BTreeMap::new(),
            nvars: self.nvars,
        };
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.insert(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly {
                terms: BTreeMap::new(),
                nvars: self.nvars,
            };
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= c;
        }
        out
    }

    pub fn pow(&self, k: u32, ctx: &PolyCtx) -> Poly {
        let mut acc = Poly::one(ctx);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Leading (monomial, coefficient) under graded lex order.
    pub fn leading(&self) -> Option<(&Mono, &BigRational)> {
        self.terms.iter().next_back()
    }

    /// Total degree; zero polynomial reports 0.
    pub fn total_degree(&self) -> u64 {
        self.terms.keys().map(Mono::degree).max().unwrap_or(0)
    }

    /// Degree in one variable.
    pub fn degree_in(&self, idx: usize) -> u32 {
        self.terms.keys().map(|m| m.0[idx]).max().unwrap_or(0)
    }

    /// Exact division; None when the division leaves a remainder.
    pub fn exact_div(&self, div: &Poly) -> Option<Poly> {
        if div.is_zero() {
            return None;
        }
        let mut rem = self.clone();
        let mut quot = Poly {
            terms: BTreeMap::new(),
            nvars: self.nvars,
        };
        let (dm, dc) = {
            let (m, c) = div.leading().unwrap();
            (m.clone(), c.clone())
        };
        while let Some((rm, rc)) = rem.leading().map(|(m, c)| (m.clone(), c.clone())) {
            let qm = rm.div(&dm)?;
            let qc = &rc / &dc;
            quot.insert(qm.clone(), qc.clone());
            // rem -= (qc * qm) * div
            for (m, c) in &div.terms {
                rem.insert(qm.mul(m), -(&qc * c));
            }
        }
        Some(quot)
    }

    /// Make the leading coefficient 1; returns the scale applied.
    pub fn monic(&self) -> (Poly, BigRational) {
        match self.leading() {
            None => (self.clone(), BigRational::one()),
            Some((_, lc)) => {
                let inv = lc.recip();
                (self.scale(&inv), inv)
            }
        }
    }

    /// Coefficients as a univariate polynomial in variable `idx`, constant
    /// term first; trailing zero polynomials trimmed.
    pub fn univariate_in(&self, idx: usize, ctx: &PolyCtx) -> Vec<Poly> {
        let deg = self.degree_in(idx) as usize;
        let mut out = vec![Poly::zero(ctx); deg + 1];
        for (m, c) in &self.terms {
            let e = m.0[idx] as usize;
            let mut lowered = m.clone();
            lowered.0[idx] = 0;
            out[e].insert(lowered, c.clone());
        }
        while out.len() > 1 && out.last().unwrap().is_zero() {
            out.pop();
        }
        out
    }

    /// Rebuild from univariate coefficients in variable `idx`.
    pub fn from_univariate(coeffs: &[Poly], idx: usize, ctx: &PolyCtx) -> Poly {
        let mut out = Poly::zero(ctx);
        for (e, p) in coeffs.iter().enumerate() {
            for (m, c) in &p.terms {
                let mut raised = m.clone();
                raised.0[idx] += e as u32;
                out.insert(raised, c.clone());
            }
        }
        out
    }

    /// Greatest common divisor, monic, via primitive pseudo-remainder
    /// sequences with recursion over the coefficient ring.
    pub fn gcd(&self, other: &Poly, ctx: &PolyCtx) -> Poly {
        let g = gcd_inner(self, other, ctx);
        g.monic().0
    }

    /// Cube root by greedy leading-term extraction; None when the
    /// polynomial is not the cube of a polynomial.
    pub fn cube_root(&self) -> Option<Poly> {
        if self.is_zero() {
            return Some(self.clone());
        }
        let (lm, lc) = self.leading().unwrap();
        // Leading monomial exponents divisible by 3 and leading coefficient
        // a rational cube.
        let mut root_m = Vec::with_capacity(lm.0.len());
        for &e in &lm.0 {
            if e % 3 != 0 {
                return None;
            }
            root_m.push(e / 3);
        }
        let root_c = rational_cbrt(lc)?;
        let mut q = Poly {
            terms: BTreeMap::new(),
            nvars: self.nvars,
        };
        q.insert(Mono(root_m), root_c);
        // 3 lead(q)^2 divides successive leading remainders.
        let mut guard = 0;
        loop {
            guard += 1;
            if guard > 4096 {
                return None;
            }
            let q3 = q.mul(&q).mul(&q);
            let rem = self.sub(&q3);
            if rem.is_zero() {
                return Some(q);
            }
            let (rm, rc) = rem.leading().unwrap();
            let (qm, qc) = q.leading().unwrap();
            let lead_sq = qm.mul(qm);
            let nm = rm.div(&lead_sq)?;
            let nc = rc / (BigRational::from_integer(BigInt::from(3)) * qc * qc);
            // New term must be below the current leading term, or we loop.
            if let Some((hm, _)) = q.terms.iter().next_back() {
                if &nm >= hm {
                    return None;
                }
            }
            q.insert(nm, nc);
        }
    }

    /// Evaluate at a rational point (all variables bound).
    pub fn eval(&self, point: &[BigRational]) -> BigRational {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    t *= &point[i];
                }
            }
            acc += t;
        }
        acc
    }

    /// Back to an expression (expanded sum of monomials).
    pub fn to_expr(&self, ctx: &PolyCtx) -> Expr {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let mut factors = vec![Expr::Rational(c.clone())];
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    factors.push(Expr::pow(Expr::Symbol(ctx.vars[i].clone()), e as i64));
                }
            }
            terms.push(Expr::mul_all(factors));
        }
        Expr::add_all(terms)
    }

    /// Convert a normalized expression that is polynomial in the context
    /// variables (no negative powers, radicals or functions).
    pub fn from_expr(e: &Expr, ctx: &PolyCtx) -> Result<Poly, NfError> {
        match e {
            Expr::Rational(r) => Ok(Poly::constant(ctx, r.clone())),
            Expr::Symbol(s) => Poly::var(ctx, s).ok_or(NfError::FunctionNode),
            Expr::Sum(ts) => {
                let mut acc = Poly::zero(ctx);
                for t in ts {
                    acc = acc.add(&Poly::from_expr(t, ctx)?);
                }
                Ok(acc)
            }
            Expr::Product(fs) => {
                let mut acc = Poly::one(ctx);
                for f in fs {
                    acc = acc.mul(&Poly::from_expr(f, ctx)?);
                }
                Ok(acc)
            }
            Expr::Power(b, k) if *k > 0 => {
                let base = Poly::from_expr(b, ctx)?;
                Ok(base.pow(*k as u32, ctx))
            }
            Expr::Power(_, _) | Expr::Cbrt(_) | Expr::Func(_, _) => Err(NfError::FunctionNode),
            Expr::Undefined => Err(NfError::Undefined),
        }
    }
}

fn rational_cbrt(r: &BigRational) -> Option<BigRational> {
    let n = num_integer::Roots::cbrt(r.numer());
    let d = num_integer::Roots::cbrt(r.denom());
    let cand = BigRational::new(n, d);
    if &(&cand * &cand * &cand) == r {
        Some(cand)
    } else {
        None
    }
}

/// Content (gcd of coefficients as polynomials in the remaining variables)
/// and primitive part with respect to variable `idx`.
fn content_wrt(p: &Poly, idx: usize, ctx: &PolyCtx) -> (Poly, Vec<Poly>) {
    let coeffs = p.univariate_in(idx, ctx);
    let mut content = Poly::zero(ctx);
    for c in &coeffs {
        if !c.is_zero() {
            content = gcd_inner(&content, c, ctx);
        }
    }
    if content.is_zero() {
        return (content, coeffs);
    }
    let content = content.monic().0;
    let mut prim: Vec<Poly> = coeffs
        .iter()
        .map(|c| c.exact_div(&content).expect("content divides coefficients"))
        .collect();
    // Strip the scalar content too. The polynomial content of rational
    // constants is 1, so without this step the pseudo-remainder sequence
    // never sheds its accumulated scalar factors and coefficient bit sizes
    // grow exponentially along the sequence.
    let mut num_gcd = BigInt::zero();
    let mut den_lcm = BigInt::one();
    for c in &prim {
        for v in c.terms.values() {
            num_gcd = num_gcd.gcd(v.numer());
            den_lcm = den_lcm.lcm(v.denom());
        }
    }
    if !num_gcd.is_zero() && !(num_gcd.is_one() && den_lcm.is_one()) {
        let scale = BigRational::new(den_lcm, num_gcd);
        for c in &mut prim {
            *c = c.scale(&scale);
        }
    }
    (content, prim)
}

/// Univariate pseudo-remainder with polynomial coefficients.
fn pseudo_rem(a: &[Poly], b: &[Poly], ctx: &PolyCtx) -> Vec<Poly> {
    let mut r: Vec<Poly> = a.to_vec();
    let db = b.len() - 1;
    let lb = b.last().unwrap().clone();
    while r.len() - 1 >= db && !(r.len() == 1 && r[0].is_zero()) {
        let dr = r.len() - 1;
        let lr = r.last().unwrap().clone();
        // r = lb * r - lr * x^(dr-db) * b
        let mut out = vec![Poly::zero(ctx); dr.max(1)];
        for (i, ri) in r.iter().enumerate().take(dr) {
            out[i] = ri.mul(&lb);
        }
        for (j, bj) in b.iter().enumerate().take(db) {
            let k = j + dr - db;
            out[k] = out[k].sub(&bj.mul(&lr));
        }
        while out.len() > 1 && out.last().unwrap().is_zero() {
            out.pop();
        }
        r = out;
        if r.len() - 1 < db {
            break;
        }
    }
    r
}

fn gcd_inner(a: &Poly, b: &Poly, ctx: &PolyCtx) -> Poly {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one(ctx);
    }
    // Monomial fast path: against a single-term polynomial the gcd is the
    // componentwise-minimum monomial over all terms of both operands.
    if a.terms.len() == 1 || b.terms.len() == 1 {
        let mut mins = vec![u32::MAX; a.nvars];
        for m in a.terms.keys().chain(b.terms.keys()) {
            for (i, &e) in m.0.iter().enumerate() {
                mins[i] = mins[i].min(e);
            }
        }
        let mut g = Poly::zero(ctx);
        g.insert(Mono(mins), BigRational::one());
        return g;
    }
    // Main variable: the highest-index variable present in either.
    let idx = (0..ctx.vars.len())
        .rev()
        .find(|&i| a.degree_in(i) > 0 || b.degree_in(i) > 0)
        .expect("non-constant polynomials have a variable");
    let (ca, pa) = content_wrt(a, idx, ctx);
    let (cb, pb) = content_wrt(b, idx, ctx);
    let cont = gcd_inner(&ca, &cb, ctx);
    let (mut f, mut g) = if pa.len() >= pb.len() {
        (pa, pb)
    } else {
        (pb, pa)
    };
    loop {
        if g.len() == 1 && g[0].is_zero() {
            break;
        }
        if g.len() == 1 {
            // Nonzero constant in the main variable: coprime there.
            return cont;
        }
        let r = pseudo_rem(&f, &g, ctx);
        let r = {
            // Primitive part of the remainder.
            let rp = Poly::from_univariate(&r, idx, ctx);
            if rp.is_zero() {
                vec![Poly::zero(ctx)]
            } else {
                let (c, prim) = content_wrt(&rp, idx, ctx);
                let _ = c;
                prim
            }
        };
        f = g;
        g = r;
    }
    let gp = Poly::from_univariate(&f, idx, ctx);
    cont.mul(&gp)
}

// ---- rational functions --------------------------------------------------

/// Quotient of polynomials; gcd(num, den) = 1, den monic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatFun {
    pub num: Poly,
    pub den: Poly,
}

impl RatFun {
    pub fn zero(ctx: &PolyCtx) -> RatFun {
        RatFun {
            num: Poly::zero(ctx),
            den: Poly::one(ctx),
        }
    }

    pub fn one(ctx: &PolyCtx) -> RatFun {
        RatFun {
            num: Poly::one(ctx),
            den: Poly::one(ctx),
        }
    }

    pub fn from_poly(p: Poly, ctx: &PolyCtx) -> RatFun {
        RatFun {
            num: p,
            den: Poly::one(ctx),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Reduce to lowest terms with monic denominator.
    pub fn reduced(&self, ctx: &PolyCtx) -> RatFun {
        if self.num.is_zero() {
            return RatFun::zero(ctx);
        }
        let g = self.num.gcd(&self.den, ctx);
        let (num, den) = if g.is_constant() {
            (self.num.clone(), self.den.clone())
        } else {
            (
                self.num.exact_div(&g).expect("gcd divides numerator"),
                self.den.exact_div(&g).expect("gcd divides denominator"),
            )
        };
        let (den_monic, scale) = den.monic();
        RatFun {
            num: num.scale(&scale),
            den: den_monic,
        }
    }

    /// Rescale numerator and denominator together so both have integer,
    /// jointly primitive coefficients. Keeps scalar factors from piling up
    /// across chained operations (only the ratio matters).
    fn strip_scalar(num: Poly, den: Poly) -> RatFun {
        let mut ngcd = BigInt::zero();
        let mut dlcm = BigInt::one();
        for v in num.terms.values().chain(den.terms.values()) {
            ngcd = ngcd.gcd(v.numer());
            dlcm = dlcm.lcm(v.denom());
        }
        if ngcd.is_zero() || (ngcd.is_one() && dlcm.is_one()) {
            return RatFun { num, den };
        }
        let scale = BigRational::new(dlcm, ngcd);
        RatFun {
            num: num.scale(&scale),
            den: den.scale(&scale),
        }
    }

    /// Sum over the least common denominator. Cancelling the denominator
    /// gcd here keeps long chains of additions near reduced form; without
    /// it each step multiplies the accumulated denominator by the next
    /// term's and sizes grow geometrically.
    pub fn add(&self, other: &RatFun, ctx: &PolyCtx) -> RatFun {
        if self.num.is_zero() {
            return other.clone();
        }
        if other.num.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            return RatFun::strip_scalar(self.num.add(&other.num), self.den.clone());
        }
        let g = self.den.gcd(&other.den, ctx);
        if g.is_constant() {
            return RatFun::strip_scalar(
                self.num.mul(&other.den).add(&other.num.mul(&self.den)),
                self.den.mul(&other.den),
            );
        }
        let da = self.den.exact_div(&g).expect("gcd divides denominator");
        let db = other.den.exact_div(&g).expect("gcd divides denominator");
        RatFun::strip_scalar(
            self.num.mul(&db).add(&other.num.mul(&da)),
            self.den.mul(&db),
        )
    }

    pub fn neg(&self) -> RatFun {
        RatFun {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &RatFun, ctx: &PolyCtx) -> RatFun {
        self.add(&other.neg(), ctx)
    }

    /// Product with cross-cancellation (each numerator against the other
    /// denominator), so products of reduced fractions stay reduced.
    pub fn mul(&self, other: &RatFun, ctx: &PolyCtx) -> RatFun {
        if self.num.is_zero() || other.num.is_zero() {
            return RatFun::zero(ctx);
        }
        let g1 = self.num.gcd(&other.den, ctx);
        let (n1, d2) = if g1.is_constant() {
            (self.num.clone(), other.den.clone())
        } else {
            (
                self.num.exact_div(&g1).expect("gcd divides"),
                other.den.exact_div(&g1).expect("gcd divides"),
            )
        };
        let g2 = other.num.gcd(&self.den, ctx);
        let (n2, d1) = if g2.is_constant() {
            (other.num.clone(), self.den.clone())
        } else {
            (
                other.num.exact_div(&g2).expect("gcd divides"),
                self.den.exact_div(&g2).expect("gcd divides"),
            )
        };
        RatFun::strip_scalar(n1.mul(&n2), d1.mul(&d2))
    }

    /// Reciprocal; None for the zero function.
    pub fn recip(&self) -> Option<RatFun> {
        if self.num.is_zero() {
            return None;
        }
        Some(RatFun {
            num: self.den.clone(),
            den: self.num.clone(),
        })
    }

    /// Back to an expression, in lowest terms with one flat denominator.
    pub fn to_expr(&self, ctx: &PolyCtx) -> Expr {
        let r = self.reduced(ctx);
        Expr::div(r.num.to_expr(ctx), r.den.to_expr(ctx))
    }
}

// ---- rational normal form with one radical -------------------------------

/// Normal form c0 + c1 B^(1/3) + c2 B^(2/3) over rational functions.
#[derive(Debug, Clone)]
pub struct RationalNF {
    pub ctx: PolyCtx,
    /// Irreducible cube-root base, when a radical occurs.
    pub base: Option<Expr>,
    /// Graded components for B^(0/3), B^(1/3), B^(2/3).
    pub parts: [RatFun; 3],
}

impl RationalNF {
    /// True exactly when the represented expression is zero.
    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(RatFun::is_zero)
    }

    /// Reduce every component to lowest terms (monic denominators, gcd 1).
    pub fn reduced(&self) -> RationalNF {
        RationalNF {
            ctx: self.ctx.clone(),
            base: self.base.clone(),
            parts: [
                self.parts[0].reduced(&self.ctx),
                self.parts[1].reduced(&self.ctx),
                self.parts[2].reduced(&self.ctx),
            ],
        }
    }

    /// Convert a normalized expression. Fails on function nodes, nested
    /// radicals or more than one irreducible cube-root base.
    pub fn from_expr(e: &Expr, ctx: &PolyCtx) -> Result<RationalNF, NfError> {
        // Identify the radical base: collect distinct cbrt arguments.
        let mut args: Vec<Expr> = Vec::new();
        collect_cbrt_args(e, &mut args)?;
        args.sort();
        args.dedup();
        let base = match args.len() {
            0 => None,
            1 => Some(args.pop().unwrap()),
            2 => {
                // Accept the pair {B, B^2}: cbrt(B^2) sits in grade 2.
                let a = &args[0];
                let b = &args[1];
                if Expr::pow(a.clone(), 2) == *b {
                    Some(a.clone())
                } else if Expr::pow(b.clone(), 2) == *a {
                    Some(b.clone())
                } else {
                    return Err(NfError::MultipleRadicalBases);
                }
            }
            _ => return Err(NfError::MultipleRadicalBases),
        };
        let base_rf = match &base {
            None => None,
            Some(b) => {
                let nf = convert(b, ctx, &None)?;
                Some(nf.parts[0].clone())
            }
        };
        let mut nf = convert(e, ctx, &base)?;
        nf.base = base;
        let _ = base_rf;
        Ok(nf)
    }

    /// Back to an expression: each graded component in lowest terms,
    /// multiplied by the matching power of the cube root.
    pub fn to_expr(&self) -> Expr {
        let mut terms = vec![self.parts[0].to_expr(&self.ctx)];
        if let Some(base) = &self.base {
            let j = Expr::cbrt(base.clone());
            terms.push(Expr::mul(self.parts[1].to_expr(&self.ctx), j.clone()));
            terms.push(Expr::mul(self.parts[2].to_expr(&self.ctx), Expr::pow(j, 2)));
        }
        Expr::add_all(terms)
    }
}

/// Rewrite a rational (or single-cube-root) expression with one flat,
/// fully cancelled numerator/denominator pair per radical grade. An
/// expression outside the normal form's fragment comes back unchanged.
///
/// This undoes the blowup that rational arithmetic on the tree can cause:
/// positive powers of sums expand on construction, so a factor introduced
/// by one operation cannot cancel against its inverse from another, and
/// quotients accumulate unmergeable denominators. The round trip through
/// the normal form restores the canonical quotient.
pub fn rational_simplify(e: &Expr) -> Expr {
    let ctx = PolyCtx::for_expr(e);
    match RationalNF::from_expr(e, &ctx) {
        Ok(nf) => nf.to_expr(),
        Err(_) => e.clone(),
    }
}

fn collect_cbrt_args(e: &Expr, out: &mut Vec<Expr>) -> Result<(), NfError> {
    match e {
        Expr::Rational(_) | Expr::Symbol(_) => Ok(()),
        Expr::Undefined => Err(NfError::Undefined),
        Expr::Func(_, _) => Err(NfError::FunctionNode),
        Expr::Cbrt(a) => {
            // The argument itself must be radical-free.
            let mut inner = Vec::new();
            collect_cbrt_args(a, &mut inner)?;
            if !inner.is_empty() {
                return Err(NfError::NestedRadical);
            }
            out.push((**a).clone());
            Ok(())
        }
        Expr::Power(b, _) => collect_cbrt_args(b, out),
        Expr::Sum(es) | Expr::Product(es) => {
            for e in es {
                collect_cbrt_args(e, out)?;
            }
            Ok(())
        }
    }
}

/// Structural conversion; `base` fixes the grading.
fn convert(e: &Expr, ctx: &PolyCtx, base: &Option<Expr>) -> Result<RationalNF, NfError> {
    let rf0 = |rf: RatFun| RationalNF {
        ctx: ctx.clone(),
        base: base.clone(),
        parts: [rf, RatFun::zero(ctx), RatFun::zero(ctx)],
    };
    match e {
        Expr::Rational(r) => Ok(rf0(RatFun::from_poly(
            Poly::constant(ctx, r.clone()),
            ctx,
        ))),
        Expr::Symbol(s) => {
            let p = Poly::var(ctx, s).ok_or(NfError::FunctionNode)?;
            Ok(rf0(RatFun::from_poly(p, ctx)))
        }
        Expr::Undefined => Err(NfError::Undefined),
        Expr::Func(_, _) => Err(NfError::FunctionNode),
        Expr::Cbrt(a) => {
            let b = base.as_ref().ok_or(NfError::MultipleRadicalBases)?;
            let mut parts = [
                RatFun::zero(ctx),
                RatFun::zero(ctx),
                RatFun::zero(ctx),
            ];
            if **a == *b {
                parts[1] = RatFun::one(ctx);
            } else if Expr::pow(b.clone(), 2) == **a {
                parts[2] = RatFun::one(ctx);
            } else {
                return Err(NfError::MultipleRadicalBases);
            }
            Ok(RationalNF {
                ctx: ctx.clone(),
                base: base.clone(),
                parts,
            })
        }
        Expr::Sum(ts) => {
            let mut acc = rf0(RatFun::zero(ctx));
            for t in ts {
                let nf = convert(t, ctx, base)?;
                acc = nf_add(&acc, &nf);
            }
            Ok(acc)
        }
        Expr::Product(fs) => {
            let mut acc = rf0(RatFun::one(ctx));
            for f in fs {
                let nf = convert(f, ctx, base)?;
                acc = nf_mul(&acc, &nf, ctx, base)?;
            }
            Ok(acc)
        }
        Expr::Power(b, k) => {
            let nf = convert(b, ctx, base)?;
            nf_pow(&nf, *k, ctx, base)
        }
    }
}

fn nf_add(a: &RationalNF, b: &RationalNF) -> RationalNF {
    let ctx = &a.ctx;
    RationalNF {
        ctx: a.ctx.clone(),
        base: a.base.clone(),
        parts: [
            a.parts[0].add(&b.parts[0], ctx),
            a.parts[1].add(&b.parts[1], ctx),
            a.parts[2].add(&b.parts[2], ctx),
        ],
    }
}

/// B as a rational function, for reducing y^3 -> B during multiplication.
fn base_ratfun(ctx: &PolyCtx, base: &Option<Expr>) -> Result<RatFun, NfError> {
    match base {
        None => Ok(RatFun::one(ctx)),
        Some(b) => {
            let nf = convert(b, ctx, &None)?;
            Ok(nf.parts[0].clone())
        }
    }
}

fn nf_mul(
    a: &RationalNF,
    b: &RationalNF,
    ctx: &PolyCtx,
    base: &Option<Expr>,
) -> Result<RationalNF, NfError> {
    let bb = base_ratfun(ctx, base)?;
    let mut parts = [
        RatFun::zero(ctx),
        RatFun::zero(ctx),
        RatFun::zero(ctx),
    ];
    for i in 0..3 {
        for j in 0..3 {
            if a.parts[i].is_zero() || b.parts[j].is_zero() {
                continue;
            }
            let prod = a.parts[i].mul(&b.parts[j], ctx);
            let k = i + j;
            let (grade, carry) = (k % 3, k / 3);
            let mut term = prod;
            for _ in 0..carry {
                term = term.mul(&bb, ctx);
            }
            parts[grade] = parts[grade].add(&term, ctx);
        }
    }
    Ok(RationalNF {
        ctx: ctx.clone(),
        base: base.clone(),
        parts,
    })
}

fn nf_pow(
    a: &RationalNF,
    k: i64,
    ctx: &PolyCtx,
    base: &Option<Expr>,
) -> Result<RationalNF, NfError> {
    if k == 0 {
        return Ok(RationalNF {
            ctx: ctx.clone(),
            base: base.clone(),
            parts: [RatFun::one(ctx), RatFun::zero(ctx), RatFun::zero(ctx)],
        });
    }
    let inv;
    let (src, n) = if k < 0 {
        inv = nf_invert(a, ctx, base)?;
        (&inv, (-k) as u64)
    } else {
        (a, k as u64)
    };
    let mut acc = RationalNF {
        ctx: ctx.clone(),
        base: base.clone(),
        parts: [RatFun::one(ctx), RatFun::zero(ctx), RatFun::zero(ctx)],
    };
    for _ in 0..n {
        acc = nf_mul(&acc, src, ctx, base)?;
    }
    Ok(acc)
}

/// Invert c0 + c1 y + c2 y^2 modulo y^3 = B by solving the 3x3 linear
/// system over the rational-function field (Cramer's rule).
fn nf_invert(
    a: &RationalNF,
    ctx: &PolyCtx,
    base: &Option<Expr>,
) -> Result<RationalNF, NfError> {
    let c0 = &a.parts[0];
    let c1 = &a.parts[1];
    let c2 = &a.parts[2];
    if c1.is_zero() && c2.is_zero() {
        let inv = c0.recip().ok_or(NfError::DivisionByZero)?;
        return Ok(RationalNF {
            ctx: ctx.clone(),
            base: base.clone(),
            parts: [inv, RatFun::zero(ctx), RatFun::zero(ctx)],
        });
    }
    let bb = base_ratfun(ctx, base)?;
    // (c0 + c1 y + c2 y^2)(d0 + d1 y + d2 y^2) = 1 gives the system
    //   c0 d0 + B c2 d1 + B c1 d2 = 1
    //   c1 d0 + c0 d1 + B c2 d2 = 0
    //   c2 d0 + c1 d1 + c0 d2  = 0
    let m = [
        [c0.clone(), bb.mul(c2, ctx), bb.mul(c1, ctx)],
        [c1.clone(), c0.clone(), bb.mul(c2, ctx)],
        [c2.clone(), c1.clone(), c0.clone()],
    ];
    let det = det3(&m, ctx);
    let det_inv = det.recip().ok_or(NfError::DivisionByZero)?;
    let rhs_col = 0usize;
    let mut d = [RatFun::zero(ctx), RatFun::zero(ctx), RatFun::zero(ctx)];
    for (i, di) in d.iter_mut().enumerate() {
        // Replace column i by the unit vector e_0 (rhs = [1,0,0]^T):
        // determinant reduces to the cofactor of entry (0, i).
        let mut mi = m.clone();
        for (row, mrow) in mi.iter_mut().enumerate() {
            mrow[i] = if row == rhs_col {
                RatFun::one(ctx)
            } else {
                RatFun::zero(ctx)
            };
        }
        *di = det3(&mi, ctx).mul(&det_inv, ctx);
    }
    Ok(RationalNF {
        ctx: ctx.clone(),
        base: base.clone(),
        parts: d,
    })
}

fn det3(m: &[[RatFun; 3]; 3], ctx: &PolyCtx) -> RatFun {
    let a = m[0][0].mul(
        &m[1][1].mul(&m[2][2], ctx).sub(&m[1][2].mul(&m[2][1], ctx), ctx),
        ctx,
    );
    let b = m[0][1].mul(
        &m[1][0].mul(&m[2][2], ctx).sub(&m[1][2].mul(&m[2][0], ctx), ctx),
        ctx,
    );
    let c = m[0][2].mul(
        &m[1][0].mul(&m[2][1], ctx).sub(&m[1][1].mul(&m[2][0], ctx), ctx),
        ctx,
    );
    a.sub(&b, ctx).add(&c, ctx)
}

impl fmt::Display for RationalNF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<nf over {} vars>", self.ctx.vars.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sym::Sym;

    fn ctx_xy() -> PolyCtx {
        PolyCtx::new(vec![Sym::new("x"), Sym::new("u")])
    }

    fn x_poly(ctx: &PolyCtx) -> Poly {
        Poly::var(ctx, &Sym::new("x")).unwrap()
    }

    fn u_poly(ctx: &PolyCtx) -> Poly {
        Poly::var(ctx, &Sym::new("u")).unwrap()
    }

    #[test]
    fn exact_division_recovers_factor() {
        let ctx = ctx_xy();
        let x = x_poly(&ctx);
        let u = u_poly(&ctx);
        // (x + u)(x - u) = x^2 - u^2
        let sum = x.add(&u);
        let diff = x.sub(&u);
        let prod = sum.mul(&diff);
        assert_eq!(prod.exact_div(&sum).unwrap(), diff);
        assert!(prod.exact_div(&x.add(&Poly::one(&ctx))).is_none());
    }

    #[test]
    fn gcd_of_product_pairs() {
        let ctx = ctx_xy();
        let x = x_poly(&ctx);
        let u = u_poly(&ctx);
        let f = x.add(&u); // x + u
        let a = f.mul(&x); // x(x+u)
        let b = f.mul(&u); // u(x+u)
        let g = a.gcd(&b, &ctx);
        assert_eq!(g, f.monic().0);
    }

    #[test]
    fn gcd_of_coprime_is_one() {
        let ctx = ctx_xy();
        let x = x_poly(&ctx);
        let u = u_poly(&ctx);
        let g = x.gcd(&u, &ctx);
        assert!(g.is_constant());
    }

    #[test]
    fn cube_root_of_perfect_cube() {
        let ctx = ctx_xy();
        let x = x_poly(&ctx);
        let f = x.add(&Poly::one(&ctx)); // x + 1
        let f3 = f.mul(&f).mul(&f);
        assert_eq!(f3.cube_root().unwrap(), f);
        // x^2 + 2x + 1 is a square, not a cube.
        let f2 = f.mul(&f);
        assert!(f2.cube_root().is_none());
    }

    #[test]
    fn ratfun_reduction_cancels_common_factor() {
        let ctx = ctx_xy();
        let x = x_poly(&ctx);
        let one = Poly::one(&ctx);
        // (x^2 - 1)/(x - 1) reduces to x + 1.
        let num = x.mul(&x).sub(&one);
        let den = x.sub(&one);
        let rf = RatFun { num, den }.reduced(&ctx);
        assert_eq!(rf.num, x.add(&one));
        assert_eq!(rf.den, one);
    }
}
