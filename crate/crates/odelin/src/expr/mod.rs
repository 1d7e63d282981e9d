//! Immutable symbolic expression trees with a canonical normal form.
//!
//! Every constructor returns a normalized expression: sums and products are
//! flattened, sorted under a fixed total order and constant-folded, products
//! distribute over sums (polynomial parts are kept expanded), integer powers
//! of cube roots are absorbed (cbrt(a)^3 = a) and perfect cubes are pulled
//! out of cube roots on the real branch (cbrt(-2 u^3 p^3) = -cbrt(2) u p).
//! Rational exponents normalize into this vocabulary: x^(-2/3) becomes
//! cbrt(x)/x and x^(3/2) becomes sqrt(x^3).
//!
//! The real-branch convention applies throughout: cbrt is odd and
//! multiplicative over the reals, so cube extraction from arbitrary products
//! is exact; square roots only release positive rational squares and
//! exponents divisible by four, since sqrt(u^6) = |u|^3 has no
//! representation here.

mod diff;
mod eval;
pub mod nf;
mod subst;
pub mod zero;

pub use diff::{diff, diff_n};
pub use eval::{eval_exact, eval_f64, EvalError, ExactVal};
pub use nf::rational_simplify;
pub use subst::{substitute, substitute_one};
pub use zero::{decide_zero, is_zero, ZeroCfg, ZeroDecision, ZeroMethod, ZeroStatus};

use crate::sym::Sym;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero as NumZero};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

/// Unary functions in the expression vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Builtin {
    Exp,
    Ln,
    Sin,
    Cos,
    Sqrt,
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::Exp => "exp",
            Builtin::Ln => "ln",
            Builtin::Sin => "sin",
            Builtin::Cos => "cos",
            Builtin::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "exp" => Some(Builtin::Exp),
            "ln" => Some(Builtin::Ln),
            "sin" => Some(Builtin::Sin),
            "cos" => Some(Builtin::Cos),
            "sqrt" => Some(Builtin::Sqrt),
            _ => None,
        }
    }
}

/// A normalized symbolic expression.
///
/// Construct through [`Expr::rat`], [`Expr::sym`], [`Expr::add`],
/// [`Expr::mul`], [`Expr::pow`], [`Expr::cbrt`] and [`Expr::func`]; pattern
/// matching on the variants is fine for inspection.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    /// Exact rational constant.
    Rational(BigRational),
    /// Free symbol (jet coordinate or parameter).
    Symbol(Sym),
    /// Flattened sum with at least two collected terms.
    Sum(Vec<Expr>),
    /// Flattened product with at least two merged factors; a rational
    /// coefficient, when present, is the first factor.
    Product(Vec<Expr>),
    /// Integer power with exponent not in {0, 1}; the base is a symbol, a
    /// function application, or a sum (sums only with negative exponents).
    Power(Box<Expr>, i64),
    /// Real-branch cube root with cube-free argument.
    Cbrt(Box<Expr>),
    /// Unary function application.
    Func(Builtin, Box<Expr>),
    /// Result of division by zero; absorbs every operation.
    Undefined,
}

impl Expr {
    // ---- atoms -----------------------------------------------------------

    pub fn zero() -> Expr {
        Expr::Rational(BigRational::zero())
    }

    pub fn one() -> Expr {
        Expr::Rational(BigRational::one())
    }

    /// Integer constant.
    pub fn int(n: i64) -> Expr {
        Expr::Rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// Rational constant n/d. Panics when d = 0.
    pub fn rat(n: i64, d: i64) -> Expr {
        assert!(d != 0, "rational literal with zero denominator");
        Expr::Rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn rational(r: BigRational) -> Expr {
        Expr::Rational(r)
    }

    pub fn sym(name: impl Into<String>) -> Expr {
        Expr::Symbol(Sym::new(name))
    }

    pub fn is_zero_const(&self) -> bool {
        matches!(self, Expr::Rational(r) if r.is_zero())
    }

    pub fn is_one_const(&self) -> bool {
        matches!(self, Expr::Rational(r) if r.is_one())
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Expr::Rational(r) => Some(r),
            _ => None,
        }
    }

    // ---- sums ------------------------------------------------------------

    /// Normalized binary sum.
    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::add_all(vec![a, b])
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        let nb = Expr::neg(b);
        Expr::add(a, nb)
    }

    pub fn neg(a: Expr) -> Expr {
        Expr::mul(Expr::int(-1), a)
    }

    /// Normalized n-ary sum: flattens, combines like terms, drops zeros.
    pub fn add_all(terms: Vec<Expr>) -> Expr {
        let mut cores: BTreeMap<Expr, BigRational> = BTreeMap::new();
        let mut stack = terms;
        stack.reverse();
        while let Some(t) = stack.pop() {
            match t {
                Expr::Undefined => return Expr::Undefined,
                Expr::Sum(ts) => {
                    for t in ts.into_iter().rev() {
                        stack.push(t);
                    }
                }
                other => {
                    let (c, core) = split_coeff(other);
                    if !c.is_zero() {
                        let entry = cores.entry(core).or_insert_with(BigRational::zero);
                        *entry += c;
                    }
                }
            }
        }
        let mut out: Vec<Expr> = Vec::with_capacity(cores.len());
        for (core, c) in cores {
            if c.is_zero() {
                continue;
            }
            out.push(join_coeff(c, core));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::Sum(out),
        }
    }

    // ---- products --------------------------------------------------------

    /// Normalized binary product.
    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::mul_all(vec![a, b])
    }

    /// Quotient a/b, i.e. a * b^(-1).
    pub fn div(a: Expr, b: Expr) -> Expr {
        let inv = Expr::pow(b, -1);
        Expr::mul(a, inv)
    }

    /// Normalized n-ary product: flattens, merges equal bases by exponent
    /// addition, merges cube-root factors on the real branch, and
    /// distributes over sum factors so polynomial parts stay expanded.
    pub fn mul_all(factors: Vec<Expr>) -> Expr {
        // Collection phase: rational coefficient, base -> exponent map,
        // cube-root argument -> exponent map, plain sum factors to distribute.
        let mut coeff = BigRational::one();
        let mut bases: BTreeMap<Expr, i64> = BTreeMap::new();
        let mut cbrt_args: BTreeMap<Expr, i64> = BTreeMap::new();
        let mut sums: Vec<Vec<Expr>> = Vec::new();
        let mut undefined = false;

        let mut stack = factors;
        stack.reverse();
        while let Some(f) = stack.pop() {
            match f {
                Expr::Undefined => undefined = true,
                Expr::Rational(r) => coeff *= r,
                Expr::Product(fs) => {
                    for f in fs.into_iter().rev() {
                        stack.push(f);
                    }
                }
                Expr::Sum(ts) => sums.push(ts),
                Expr::Power(b, k) => match *b {
                    Expr::Sum(ts) => {
                        *bases.entry(Expr::Sum(ts)).or_insert(0) += k;
                    }
                    other => {
                        *bases.entry(other).or_insert(0) += k;
                    }
                },
                Expr::Cbrt(a) => {
                    if contains_cbrt_top(&a) {
                        // Nested-radical corner: keep opaque.
                        *bases.entry(Expr::Cbrt(a)).or_insert(0) += 1;
                    } else {
                        *cbrt_args.entry(*a).or_insert(0) += 1;
                    }
                }
                atom @ (Expr::Symbol(_) | Expr::Func(_, _)) => {
                    *bases.entry(atom).or_insert(0) += 1;
                }
            }
        }
        if undefined {
            return Expr::Undefined;
        }

        // Merge cube roots: cbrt(a) cbrt(b) = cbrt(a b) on the real branch.
        // A lone first-power cube root has nothing to merge with; folding it
        // straight back also keeps this from re-entering `cbrt` forever on
        // arguments that extract a rational coefficient.
        if cbrt_args.len() == 1 && cbrt_args.values().all(|&k| k == 1) {
            let (a, _) = cbrt_args.pop_first().unwrap();
            *bases.entry(Expr::Cbrt(Box::new(a))).or_insert(0) += 1;
        } else if !cbrt_args.is_empty() {
            let mut arg_factors: Vec<Expr> = Vec::new();
            for (a, k) in cbrt_args {
                arg_factors.push(Expr::pow(a, k));
            }
            let merged = Expr::cbrt(Expr::mul_all(arg_factors));
            // The merged result is a product of a rational, symbol powers,
            // sum powers and at most one irreducible cube root; fold it back.
            let mut sub = vec![merged];
            while let Some(f) = sub.pop() {
                match f {
                    Expr::Undefined => return Expr::Undefined,
                    Expr::Rational(r) => coeff *= r,
                    Expr::Product(fs) => sub.extend(fs),
                    Expr::Sum(ts) => sums.push(ts),
                    Expr::Power(b, k) => match *b {
                        Expr::Sum(ts) => *bases.entry(Expr::Sum(ts)).or_insert(0) += k,
                        other => *bases.entry(other).or_insert(0) += k,
                    },
                    cb @ Expr::Cbrt(_) => {
                        *bases.entry(cb).or_insert(0) += 1;
                    }
                    atom => {
                        *bases.entry(atom).or_insert(0) += 1;
                    }
                }
            }
        }

        if coeff.is_zero() {
            return Expr::zero();
        }

        // Resolution phase: rebuild factors from the base map. Power rules
        // may emit new material (sqrt rewrites, expanded sum powers), so run
        // to a fixpoint; two passes suffice in practice.
        let mut resolved: Vec<Expr> = Vec::new();
        let mut pending: Vec<(Expr, i64)> = bases.into_iter().collect();
        let mut guard = 0;
        while !pending.is_empty() {
            guard += 1;
            assert!(guard < 64, "product normalization failed to converge");
            let mut next: BTreeMap<Expr, i64> = BTreeMap::new();
            for (base, k) in pending.drain(..) {
                if k == 0 {
                    continue;
                }
                let rebuilt = Expr::pow(base, k);
                let mut sub = vec![rebuilt];
                while let Some(f) = sub.pop() {
                    match f {
                        Expr::Undefined => return Expr::Undefined,
                        Expr::Rational(r) => coeff *= r,
                        Expr::Product(fs) => sub.extend(fs),
                        Expr::Sum(ts) => sums.push(ts),
                        Expr::Power(b, j) => {
                            let key = *b;
                            // Simple bases are final; composite rewrites loop.
                            match key {
                                Expr::Symbol(_) | Expr::Sum(_) => {
                                    resolved.push(Expr::Power(Box::new(key), j))
                                }
                                other => *next.entry(other).or_insert(0) += j,
                            }
                        }
                        cb @ Expr::Cbrt(_) => resolved.push(cb),
                        Expr::Symbol(s) => resolved.push(Expr::Symbol(s)),
                        Expr::Func(f2, a) => *next.entry(Expr::Func(f2, a)).or_insert(0) += 1,
                    }
                }
            }
            // Functions and leftovers merged again; symbols/powers already out.
            let mut still: Vec<(Expr, i64)> = Vec::new();
            for (base, k) in next {
                if k == 0 {
                    continue;
                }
                match base {
                    f @ Expr::Func(_, _) => {
                        if k == 1 {
                            resolved.push(f);
                        } else {
                            still.push((f, k));
                        }
                    }
                    other => still.push((other, k)),
                }
            }
            // Resolve remaining function powers directly (sqrt rewrite loops
            // back, others are final Power nodes).
            for (base, k) in still {
                match &base {
                    Expr::Func(Builtin::Sqrt, _) => pending.push((base, k)),
                    Expr::Func(_, _) | Expr::Cbrt(_) => {
                        resolved.push(Expr::Power(Box::new(base), k))
                    }
                    _ => pending.push((base, k)),
                }
            }
        }

        if coeff.is_zero() {
            return Expr::zero();
        }

        // Re-merge resolved factors that share a base (a sqrt rewrite can
        // emit a base that already came out).
        let mut final_bases: BTreeMap<Expr, i64> = BTreeMap::new();
        for f in resolved {
            match f {
                Expr::Power(b, k) => *final_bases.entry(*b).or_insert(0) += k,
                other => *final_bases.entry(other).or_insert(0) += 1,
            }
        }
        let mut core: Vec<Expr> = Vec::new();
        for (base, k) in final_bases {
            match k {
                0 => {}
                1 => core.push(base),
                _ => match base {
                    Expr::Func(Builtin::Sqrt, _) | Expr::Cbrt(_) => {
                        // Guarded above; exponents here are already reduced.
                        core.push(Expr::pow(base, k));
                    }
                    other => core.push(Expr::Power(Box::new(other), k)),
                },
            }
        }
        core.sort();

        // Distribute over collected sum factors.
        if sums.is_empty() {
            return assemble_product(coeff, core);
        }
        let seed = assemble_product(coeff, core);
        let mut acc: Vec<Expr> = vec![seed];
        for terms in sums {
            let mut nxt: Vec<Expr> = Vec::with_capacity(acc.len() * terms.len());
            for t in &terms {
                for a in &acc {
                    nxt.push(Expr::mul(a.clone(), t.clone()));
                }
            }
            acc = nxt;
        }
        Expr::add_all(acc)
    }

    // ---- powers ----------------------------------------------------------

    /// Normalized integer power.
    pub fn pow(base: Expr, k: i64) -> Expr {
        if k == 1 {
            return base;
        }
        match base {
            Expr::Undefined => Expr::Undefined,
            Expr::Rational(r) => {
                if k == 0 {
                    return Expr::one();
                }
                if r.is_zero() {
                    if k < 0 {
                        return Expr::Undefined;
                    }
                    return Expr::zero();
                }
                Expr::Rational(rational_pow(&r, k))
            }
            _ if k == 0 => Expr::one(),
            Expr::Symbol(s) => Expr::Power(Box::new(Expr::Symbol(s)), k),
            Expr::Power(b, j) => {
                let kk = j.checked_mul(k).expect("power exponent overflow");
                Expr::pow(*b, kk)
            }
            Expr::Product(fs) => {
                let powered = fs.into_iter().map(|f| Expr::pow(f, k)).collect();
                Expr::mul_all(powered)
            }
            Expr::Sum(ts) => {
                if k > 0 {
                    let base = Expr::Sum(ts);
                    let mut acc = base.clone();
                    for _ in 1..k {
                        acc = Expr::mul(acc, base.clone());
                    }
                    acc
                } else {
                    // Pull the leading rational coefficient out of the base
                    // so 1/(3e) and 1/e share one denominator key.
                    let content = split_coeff(ts[0].clone()).0;
                    if content.is_one() {
                        Expr::Power(Box::new(Expr::Sum(ts)), k)
                    } else {
                        let inv = Expr::Rational(content.recip());
                        let monic = Expr::mul(inv, Expr::Sum(ts));
                        Expr::mul(
                            Expr::Rational(rational_pow(&content, k)),
                            Expr::pow(monic, k),
                        )
                    }
                }
            }
            Expr::Cbrt(a) => Expr::cbrt(Expr::pow(*a, k)),
            Expr::Func(Builtin::Sqrt, a) => {
                // sqrt(a)^k = a^m sqrt(a)^r with k = 2m + r, r in {0,1};
                // exact on the sqrt domain a >= 0.
                let r = k.rem_euclid(2);
                let m = (k - r) / 2;
                let whole = Expr::pow((*a).clone(), m);
                if r == 0 {
                    whole
                } else {
                    Expr::mul(whole, Expr::Func(Builtin::Sqrt, a))
                }
            }
            f @ Expr::Func(_, _) => Expr::Power(Box::new(f), k),
        }
    }

    // ---- radicals --------------------------------------------------------

    /// Real-branch cube root with perfect-cube extraction.
    pub fn cbrt(a: Expr) -> Expr {
        match a {
            Expr::Undefined => Expr::Undefined,
            Expr::Rational(r) => cbrt_rational(&r),
            Expr::Symbol(s) => Expr::Cbrt(Box::new(Expr::Symbol(s))),
            Expr::Power(b, k) => {
                let r = k.rem_euclid(3);
                let m = (k - r) / 3;
                let outside = Expr::pow((*b).clone(), m);
                let inside = if r == 0 {
                    Expr::one()
                } else {
                    // The residue power b^r (r = 1 or 2) keeps its base, so
                    // recursing on a Power would not terminate; wrap it
                    // directly and recurse only when squaring changed shape.
                    match Expr::pow(*b, r) {
                        arg @ Expr::Power(_, _) => Expr::Cbrt(Box::new(arg)),
                        other => Expr::cbrt(other),
                    }
                };
                Expr::mul(outside, inside)
            }
            Expr::Product(fs) => {
                if fs.iter().any(contains_cbrt_top) {
                    // cbrt of an expression already holding a cube root is a
                    // ninth root: keep it opaque.
                    return Expr::Cbrt(Box::new(Expr::Product(fs)));
                }
                let mut outside: Vec<Expr> = Vec::new();
                let mut inside: Vec<Expr> = Vec::new();
                for f in fs {
                    match f {
                        Expr::Rational(r) => match cbrt_rational(&r) {
                            Expr::Cbrt(m) => inside.push(*m),
                            Expr::Product(parts) => {
                                for p in parts {
                                    match p {
                                        Expr::Cbrt(m) => inside.push(*m),
                                        other => outside.push(other),
                                    }
                                }
                            }
                            exact => outside.push(exact),
                        },
                        Expr::Power(b, k) => {
                            let r = k.rem_euclid(3);
                            let m = (k - r) / 3;
                            if m != 0 {
                                outside.push(Expr::pow((*b).clone(), m));
                            }
                            if r != 0 {
                                inside.push(Expr::pow(*b, r));
                            }
                        }
                        atom => inside.push(atom),
                    }
                }
                let inner = Expr::mul_all(inside);
                let root = match inner {
                    Expr::Rational(r) => cbrt_rational(&r),
                    Expr::Sum(ts) => match try_poly_cube_root(&Expr::Sum(ts.clone())) {
                        Some(rt) => rt,
                        None => Expr::Cbrt(Box::new(Expr::Sum(ts))),
                    },
                    other if other.is_one_const() => Expr::one(),
                    other => Expr::Cbrt(Box::new(other)),
                };
                outside.push(root);
                Expr::mul_all(outside)
            }
            Expr::Sum(ts) => match try_poly_cube_root(&Expr::Sum(ts.clone())) {
                Some(rt) => rt,
                None => Expr::Cbrt(Box::new(Expr::Sum(ts))),
            },
            nested @ (Expr::Cbrt(_) | Expr::Func(_, _)) => Expr::Cbrt(Box::new(nested)),
        }
    }

    /// Square root with positive-rational square extraction.
    pub fn sqrt(a: Expr) -> Expr {
        Expr::func(Builtin::Sqrt, a)
    }

    // ---- functions -------------------------------------------------------

    /// Normalized function application with basic special values.
    pub fn func(f: Builtin, a: Expr) -> Expr {
        if matches!(a, Expr::Undefined) {
            return Expr::Undefined;
        }
        match f {
            Builtin::Exp if a.is_zero_const() => Expr::one(),
            Builtin::Ln if a.is_one_const() => Expr::zero(),
            Builtin::Sin if a.is_zero_const() => Expr::zero(),
            Builtin::Cos if a.is_zero_const() => Expr::one(),
            Builtin::Sqrt => sqrt_extract(a),
            _ => Expr::Func(f, Box::new(a)),
        }
    }

    // ---- structure -------------------------------------------------------

    /// Free symbols of the expression.
    pub fn free_symbols(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Sym>) {
        match self {
            Expr::Rational(_) | Expr::Undefined => {}
            Expr::Symbol(s) => {
                out.insert(s.clone());
            }
            Expr::Sum(es) | Expr::Product(es) => {
                for e in es {
                    e.collect_symbols(out);
                }
            }
            Expr::Power(b, _) => b.collect_symbols(out),
            Expr::Cbrt(a) => a.collect_symbols(out),
            Expr::Func(_, a) => a.collect_symbols(out),
        }
    }

    /// True when the symbol occurs in the expression.
    pub fn depends_on(&self, s: &Sym) -> bool {
        match self {
            Expr::Rational(_) | Expr::Undefined => false,
            Expr::Symbol(t) => t == s,
            Expr::Sum(es) | Expr::Product(es) => es.iter().any(|e| e.depends_on(s)),
            Expr::Power(b, _) => b.depends_on(s),
            Expr::Cbrt(a) => a.depends_on(s),
            Expr::Func(_, a) => a.depends_on(s),
        }
    }

    /// True when any of the listed symbols occurs.
    pub fn depends_on_any(&self, syms: &[Sym]) -> bool {
        syms.iter().any(|s| self.depends_on(s))
    }

    /// True when an Undefined node occurs anywhere in the tree.
    pub fn has_undefined(&self) -> bool {
        match self {
            Expr::Undefined => true,
            Expr::Rational(_) | Expr::Symbol(_) => false,
            Expr::Sum(es) | Expr::Product(es) => es.iter().any(Expr::has_undefined),
            Expr::Power(b, _) => b.has_undefined(),
            Expr::Cbrt(a) | Expr::Func(_, a) => a.has_undefined(),
        }
    }

    /// Number of nodes, for budget accounting.
    pub fn node_count(&self) -> usize {
        match self {
            Expr::Rational(_) | Expr::Symbol(_) | Expr::Undefined => 1,
            Expr::Sum(es) | Expr::Product(es) => {
                1 + es.iter().map(Expr::node_count).sum::<usize>()
            }
            Expr::Power(b, _) => 1 + b.node_count(),
            Expr::Cbrt(a) | Expr::Func(_, a) => 1 + a.node_count(),
        }
    }
}

/// Re-normalize an arbitrary expression tree through the constructors.
/// Idempotent: normalize(normalize(e)) == normalize(e).
pub fn normalize(e: &Expr) -> Expr {
    match e {
        Expr::Rational(r) => Expr::Rational(r.clone()),
        Expr::Symbol(s) => Expr::Symbol(s.clone()),
        Expr::Sum(ts) => Expr::add_all(ts.iter().map(normalize).collect()),
        Expr::Product(fs) => Expr::mul_all(fs.iter().map(normalize).collect()),
        Expr::Power(b, k) => Expr::pow(normalize(b), *k),
        Expr::Cbrt(a) => Expr::cbrt(normalize(a)),
        Expr::Func(f, a) => Expr::func(*f, normalize(a)),
        Expr::Undefined => Expr::Undefined,
    }
}

// ---- internals -----------------------------------------------------------

fn rational_pow(r: &BigRational, k: i64) -> BigRational {
    let kk = i32::try_from(k.unsigned_abs().min(i32::MAX as u64)).unwrap();
    let p = num_traits::pow::Pow::pow(r, kk);
    if k < 0 {
        p.recip()
    } else {
        p
    }
}

/// Split a canonical non-sum term into (rational coefficient, core).
fn split_coeff(e: Expr) -> (BigRational, Expr) {
    match e {
        Expr::Rational(r) => (r, Expr::one()),
        Expr::Product(fs) => {
            let mut coeff = BigRational::one();
            let mut rest: Vec<Expr> = Vec::with_capacity(fs.len());
            for f in fs {
                match f {
                    Expr::Rational(r) => coeff *= r,
                    other => rest.push(other),
                }
            }
            match rest.len() {
                0 => (coeff, Expr::one()),
                1 => (coeff, rest.pop().unwrap()),
                _ => (coeff, Expr::Product(rest)),
            }
        }
        other => (BigRational::one(), other),
    }
}

/// Rebuild coefficient * core without a full renormalization pass.
fn join_coeff(c: BigRational, core: Expr) -> Expr {
    if c.is_zero() {
        return Expr::zero();
    }
    if core.is_one_const() {
        return Expr::Rational(c);
    }
    if c.is_one() {
        return core;
    }
    match core {
        Expr::Product(fs) => {
            let mut out = Vec::with_capacity(fs.len() + 1);
            out.push(Expr::Rational(c));
            out.extend(fs);
            Expr::Product(out)
        }
        other => Expr::Product(vec![Expr::Rational(c), other]),
    }
}

fn assemble_product(coeff: BigRational, mut core: Vec<Expr>) -> Expr {
    if coeff.is_zero() {
        return Expr::zero();
    }
    match core.len() {
        0 => Expr::Rational(coeff),
        1 if coeff.is_one() => core.pop().unwrap(),
        _ => {
            if coeff.is_one() {
                Expr::Product(core)
            } else {
                let mut out = Vec::with_capacity(core.len() + 1);
                out.push(Expr::Rational(coeff));
                out.append(&mut core);
                Expr::Product(out)
            }
        }
    }
}

/// True when the expression is a cube root or a product containing one.
fn contains_cbrt_top(e: &Expr) -> bool {
    match e {
        Expr::Cbrt(_) => true,
        Expr::Product(fs) => fs.iter().any(|f| matches!(f, Expr::Cbrt(_))),
        Expr::Power(b, _) => matches!(**b, Expr::Cbrt(_)),
        _ => false,
    }
}

/// Exact cube root of a rational: sign passes through, the largest cube
/// divisor comes out, the cube-free remainder stays under the radical.
fn cbrt_rational(r: &BigRational) -> Expr {
    if r.is_zero() {
        return Expr::zero();
    }
    let neg = r.is_negative();
    let (n, d) = (r.numer().abs(), r.denom().abs());
    // cbrt(n/d) = cbrt(n d^2)/d.
    let scaled: BigInt = &n * &d * &d;
    let (out, rem) = extract_perfect_power(&scaled, 3);
    let mut coeff = BigRational::new(out, d);
    if neg {
        coeff = -coeff;
    }
    if rem.is_one() {
        Expr::Rational(coeff)
    } else {
        // Built directly: routing through `mul` would re-merge the cube
        // root and call back into `cbrt`.
        let root = Expr::Cbrt(Box::new(Expr::Rational(BigRational::from_integer(rem))));
        if coeff.is_one() {
            root
        } else {
            Expr::Product(vec![Expr::Rational(coeff), root])
        }
    }
}

/// Factor n = out^k * rem with rem k-th-power-free, by trial division.
/// Primes above the trial bound stay in rem, which is sound (no extraction).
fn extract_perfect_power(n: &BigInt, k: u32) -> (BigInt, BigInt) {
    let mut rem = n.clone();
    let mut out = BigInt::one();
    let mut p = BigInt::from(2u32);
    let bound = BigInt::from(100_000u32);
    while &p * &p <= rem && p <= bound {
        let mut count = 0u32;
        while (&rem % &p).is_zero() {
            rem /= &p;
            count += 1;
        }
        if count > 0 {
            let times = count / k;
            let keep = count % k;
            for _ in 0..times {
                out *= &p;
            }
            for _ in 0..keep {
                rem *= &p;
            }
        }
        p += 1;
    }
    (out, rem)
}

/// Square-root extraction: positive rational squares and exponents divisible
/// by four come out; everything else stays under the radical.
fn sqrt_extract(a: Expr) -> Expr {
    match a {
        Expr::Rational(r) => {
            if r.is_zero() {
                return Expr::zero();
            }
            if r.is_negative() {
                return Expr::Func(Builtin::Sqrt, Box::new(Expr::Rational(r)));
            }
            let (n, d) = (r.numer().clone(), r.denom().clone());
            // sqrt(n/d) = sqrt(n d)/d.
            let scaled: BigInt = &n * &d;
            let (out, rem) = extract_perfect_power(&scaled, 2);
            let coeff = BigRational::new(out, d);
            if rem.is_one() {
                Expr::Rational(coeff)
            } else {
                Expr::mul(
                    Expr::Rational(coeff),
                    Expr::Func(
                        Builtin::Sqrt,
                        Box::new(Expr::Rational(BigRational::from_integer(rem))),
                    ),
                )
            }
        }
        Expr::Product(fs) => {
            let mut outside: Vec<Expr> = Vec::new();
            let mut inside: Vec<Expr> = Vec::new();
            for f in fs {
                match f {
                    Expr::Rational(r) => {
                        if r.is_negative() {
                            // Split |r|; the sign stays under the radical.
                            match sqrt_extract(Expr::Rational(-r.clone())) {
                                Expr::Func(Builtin::Sqrt, m) => {
                                    inside.push(Expr::neg(*m));
                                }
                                Expr::Product(parts) => {
                                    let mut pushed_sign = false;
                                    for p in parts {
                                        match p {
                                            Expr::Func(Builtin::Sqrt, m) => {
                                                inside.push(Expr::neg(*m));
                                                pushed_sign = true;
                                            }
                                            other => outside.push(other),
                                        }
                                    }
                                    if !pushed_sign {
                                        inside.push(Expr::int(-1));
                                    }
                                }
                                exact => {
                                    outside.push(exact);
                                    inside.push(Expr::int(-1));
                                }
                            }
                        } else {
                            match sqrt_extract(Expr::Rational(r)) {
                                Expr::Func(Builtin::Sqrt, m) => inside.push(*m),
                                Expr::Product(parts) => {
                                    for p in parts {
                                        match p {
                                            Expr::Func(Builtin::Sqrt, m) => inside.push(*m),
                                            other => outside.push(other),
                                        }
                                    }
                                }
                                exact => outside.push(exact),
                            }
                        }
                    }
                    Expr::Power(b, k) => {
                        // sqrt(b^(4m+r)) = b^(2m) sqrt(b^r): b^(2m) >= 0.
                        let r = k.rem_euclid(4);
                        let m = (k - r) / 4;
                        if m != 0 {
                            outside.push(Expr::pow((*b).clone(), 2 * m));
                        }
                        if r != 0 {
                            inside.push(Expr::pow(*b, r));
                        }
                    }
                    Expr::Cbrt(m) => {
                        // sqrt(cbrt(c)) = cbrt(sqrt(c)) for positive rational
                        // perfect squares c = s^2.
                        if let Expr::Rational(c) = &*m {
                            if !c.is_negative() {
                                let s_num = c.numer().sqrt();
                                let s_den = c.denom().sqrt();
                                if &(&s_num * &s_num) == c.numer()
                                    && &(&s_den * &s_den) == c.denom()
                                {
                                    outside.push(Expr::cbrt(Expr::Rational(BigRational::new(
                                        s_num, s_den,
                                    ))));
                                    continue;
                                }
                            }
                        }
                        inside.push(Expr::Cbrt(m));
                    }
                    atom => inside.push(atom),
                }
            }
            let inner = Expr::mul_all(inside);
            let root = match inner {
                Expr::Rational(r) => sqrt_extract(Expr::Rational(r)),
                other if other.is_one_const() => Expr::one(),
                other => Expr::Func(Builtin::Sqrt, Box::new(other)),
            };
            outside.push(root);
            Expr::mul_all(outside)
        }
        Expr::Power(b, k) => sqrt_extract(Expr::Product(vec![Expr::Power(b, k)])),
        Expr::Cbrt(m) => sqrt_extract(Expr::Product(vec![Expr::Cbrt(m)])),
        other => Expr::Func(Builtin::Sqrt, Box::new(other)),
    }
}

/// Cube root of an expanded polynomial sum by greedy leading-term
/// extraction; returns None when the sum is not a perfect cube of a
/// polynomial in its symbols.
fn try_poly_cube_root(e: &Expr) -> Option<Expr> {
    let ctx = nf::PolyCtx::for_expr(e);
    let p = nf::Poly::from_expr(e, &ctx).ok()?;
    let root = p.cube_root()?;
    Some(root.to_expr(&ctx))
}

// ---- ordering ------------------------------------------------------------

fn kind_rank(e: &Expr) -> u8 {
    match e {
        Expr::Rational(_) => 0,
        Expr::Symbol(_) => 1,
        Expr::Cbrt(_) => 2,
        Expr::Func(_, _) => 3,
        Expr::Power(_, _) => 4,
        Expr::Product(_) => 5,
        Expr::Sum(_) => 6,
        Expr::Undefined => 7,
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        kind_rank(self)
            .cmp(&kind_rank(other))
            .then_with(|| match (self, other) {
                (Expr::Rational(a), Expr::Rational(b)) => a.cmp(b),
                (Expr::Symbol(a), Expr::Symbol(b)) => a.cmp(b),
                (Expr::Cbrt(a), Expr::Cbrt(b)) => a.cmp(b),
                (Expr::Func(f, a), Expr::Func(g, b)) => f.cmp(g).then_with(|| a.cmp(b)),
                (Expr::Power(a, j), Expr::Power(b, k)) => a.cmp(b).then_with(|| j.cmp(k)),
                (Expr::Product(a), Expr::Product(b)) | (Expr::Sum(a), Expr::Sum(b)) => {
                    for (x, y) in a.iter().zip(b.iter()) {
                        let c = x.cmp(y);
                        if c != Ordering::Equal {
                            return c;
                        }
                    }
                    a.len().cmp(&b.len())
                }
                (Expr::Undefined, Expr::Undefined) => Ordering::Equal,
                _ => unreachable!("kind ranks matched distinct variants"),
            })
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&crate::print::infix(self))
    }
}

#[cfg(test)]
mod tests;
