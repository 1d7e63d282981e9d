//! Deciding whether an expression vanishes identically.
//!
//! Strategy: try the exact rational normal form first — sound in both
//! directions for expressions built from field operations and at most one
//! irreducible cube-root base. Everything else (square roots,
//! transcendental functions, several radical bases) falls back to seeded
//! random sampling with scaled tolerances, which returns a verdict plus
//! the method used so callers can tell proof from evidence.

use super::eval::eval_exact;
use super::nf::{NfError, PolyCtx, RatFun, RationalNF};
use super::Expr;
use crate::sym::Sym;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Verdict of a zero test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroStatus {
    /// Identically zero.
    Zero,
    /// Not identically zero.
    NonZero,
    /// Could not be decided by the configured methods.
    Unknown,
}

/// How the verdict was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroMethod {
    /// Exact cancellation in the rational normal form: a proof.
    ExactNormalForm,
    /// Random evaluation: overwhelming evidence, not a proof.
    Probabilistic,
    /// Every sampled point hit a domain error (poles, root domains).
    EvaluationDomain,
}

/// A sample point certifying a NonZero verdict.
#[derive(Debug, Clone)]
pub struct Witness {
    pub point: BTreeMap<Sym, BigRational>,
    pub value: f64,
}

/// Full result of a zero decision.
#[derive(Debug, Clone)]
pub struct ZeroDecision {
    pub status: ZeroStatus,
    pub method: ZeroMethod,
    pub witness: Option<Witness>,
}

/// Sampling configuration shared by every probabilistic test in a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZeroCfg {
    /// RNG seed; equal seeds reproduce verdicts bit for bit.
    pub seed: u64,
    /// Number of clean sample points required for a Zero verdict.
    pub samples: u32,
}

impl Default for ZeroCfg {
    fn default() -> Self {
        ZeroCfg {
            seed: 0x0ED0_11E5,
            samples: 12,
        }
    }
}

/// Relative tolerance below which a sampled value counts as zero.
const ZERO_TOL: f64 = 1e-9;
/// Relative tolerance above which a sampled value certifies NonZero.
const NONZERO_TOL: f64 = 1e-4;
/// Resampling attempts per requested point before giving up on it.
const ATTEMPTS_PER_POINT: u32 = 100;

/// Convenience wrapper returning only the status.
pub fn is_zero(e: &Expr, cfg: &ZeroCfg) -> ZeroStatus {
    decide_zero(e, cfg).status
}

/// Decide whether `e` is identically zero.
pub fn decide_zero(e: &Expr, cfg: &ZeroCfg) -> ZeroDecision {
    // Constants decide themselves.
    if e.is_zero_const() {
        return ZeroDecision {
            status: ZeroStatus::Zero,
            method: ZeroMethod::ExactNormalForm,
            witness: None,
        };
    }
    if matches!(e, Expr::Rational(_)) {
        return ZeroDecision {
            status: ZeroStatus::NonZero,
            method: ZeroMethod::ExactNormalForm,
            witness: None,
        };
    }
    // Exact path: rational normal form over at most one cube-root base.
    // Clearing denominators first turns flat rational sums into polynomials
    // (no GCD work); sound because denominator bases are nonzero as
    // rational functions, and any nonzero point of the product is a nonzero
    // point of `e` itself.
    if let Some(status) = try_exact(&clear_denominators(e)) {
        let witness = if status == ZeroStatus::NonZero {
            find_nonzero_witness(e, cfg)
        } else {
            None
        };
        return ZeroDecision {
            status,
            method: ZeroMethod::ExactNormalForm,
            witness,
        };
    }
    probabilistic(e, cfg)
}

/// Multiply through by every top-level denominator base raised to its
/// largest exponent, cancelling the negative powers factor by factor (a
/// positive sum power would otherwise expand before it could cancel).
/// Negative powers under radicals or inside function arguments stay put;
/// the normal form deals with those.
fn clear_denominators(e: &Expr) -> Expr {
    let term_factors = |t: &Expr| -> Vec<Expr> {
        match t {
            Expr::Product(fs) => fs.clone(),
            other => vec![other.clone()],
        }
    };
    let mut needed: BTreeMap<Expr, i64> = BTreeMap::new();
    let terms: Vec<Expr> = match e {
        Expr::Sum(ts) => ts.clone(),
        other => vec![other.clone()],
    };
    for t in &terms {
        for f in term_factors(t) {
            if let Expr::Power(b, k) = f {
                if k < 0 && matches!(*b, Expr::Sum(_)) {
                    let need = needed.entry(*b).or_insert(0);
                    *need = (*need).max(-k);
                }
            }
        }
    }
    if needed.is_empty() {
        return e.clone();
    }
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        let factors = term_factors(&t);
        let mut kept = Vec::with_capacity(factors.len() + needed.len());
        let mut seen: BTreeMap<&Expr, i64> = BTreeMap::new();
        for f in factors {
            match f {
                Expr::Power(b, k) if k < 0 && needed.contains_key(&*b) => {
                    seen.insert(needed.get_key_value(&*b).unwrap().0, k);
                }
                other => kept.push(other),
            }
        }
        for (base, need) in &needed {
            let short = need + seen.get(base).copied().unwrap_or(0);
            kept.push(Expr::pow(base.clone(), short));
        }
        out.push(Expr::mul_all(kept));
    }
    Expr::add_all(out)
}

/// Exact decision when the expression fits the normal form's fragment.
fn try_exact(e: &Expr) -> Option<ZeroStatus> {
    let ctx = PolyCtx::for_expr(e);
    let nf = match RationalNF::from_expr(e, &ctx) {
        Ok(nf) => nf,
        Err(
            NfError::FunctionNode
            | NfError::MultipleRadicalBases
            | NfError::NestedRadical
            | NfError::DivisionByZero
            | NfError::Undefined,
        ) => return None,
    };
    // The graded zero test needs the base to be a non-cube in the rational
    // function field; a base the constructors failed to collapse would make
    // it unsound, so verify cube-freeness before trusting the grading.
    if let Some(base) = &nf.base {
        if !base_is_cube_free(base, &ctx) {
            return None;
        }
    }
    Some(if nf.is_zero() {
        ZeroStatus::Zero
    } else {
        ZeroStatus::NonZero
    })
}

/// True when n/d (the radical base) is not a perfect cube in the rational
/// function field. n/d is a cube there exactly when n * d^2 is a cube in
/// the polynomial ring, so one polynomial cube-root attempt settles it.
fn base_is_cube_free(base: &Expr, ctx: &PolyCtx) -> bool {
    let nf = match RationalNF::from_expr(base, ctx) {
        Ok(nf) => nf,
        Err(_) => return false,
    };
    if nf.base.is_some() {
        return false; // nested radical; unsupported
    }
    let RatFun { num, den } = nf.parts[0].clone();
    let scaled = num.mul(&den).mul(&den);
    scaled.cube_root().is_none()
}

/// One random rational in [-5, 5] with denominator at most 64.
fn sample_rational(rng: &mut ChaCha8Rng) -> BigRational {
    let den: i64 = rng.gen_range(1..=64);
    let num: i64 = rng.gen_range(-5 * den..=5 * den);
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Largest |term| at the point, for relative tolerance scaling; falls back
/// to |value| when term evaluation fails.
fn term_scale(e: &Expr, bind: &BTreeMap<Sym, BigRational>, value: f64) -> f64 {
    let mut scale = value.abs();
    if let Expr::Sum(ts) = e {
        for t in ts {
            if let Ok(v) = eval_exact(t, bind).and_then(|v| v.to_f64()) {
                scale = scale.max(v.abs());
            }
        }
    }
    scale
}

/// Sample a point where |e| clears the NonZero threshold, for callers that
/// proved non-vanishing exactly but still owe a concrete witness.
pub fn find_nonzero_witness(e: &Expr, cfg: &ZeroCfg) -> Option<Witness> {
    let vars: Vec<Sym> = e.free_symbols().into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.samples.max(1) * ATTEMPTS_PER_POINT {
        let mut bind = BTreeMap::new();
        for v in &vars {
            bind.insert(v.clone(), sample_rational(&mut rng));
        }
        let Ok(val) = eval_exact(e, &bind) else {
            continue;
        };
        if val.is_exact_zero() {
            continue;
        }
        let Ok(v) = val.to_f64() else {
            continue;
        };
        let scale = 1.0 + term_scale(e, &bind, v);
        if v.abs() > NONZERO_TOL * scale {
            return Some(Witness {
                point: bind,
                value: v,
            });
        }
    }
    None
}

fn probabilistic(e: &Expr, cfg: &ZeroCfg) -> ZeroDecision {
    let vars: Vec<Sym> = e.free_symbols().into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    // A closed expression needs only one evaluation.
    let wanted = if vars.is_empty() { 1 } else { cfg.samples };
    let mut clean = 0u32;
    let mut ambiguous = false;
    for _ in 0..wanted {
        let mut found = None;
        for _ in 0..ATTEMPTS_PER_POINT {
            let mut bind = BTreeMap::new();
            for v in &vars {
                bind.insert(v.clone(), sample_rational(&mut rng));
            }
            match eval_exact(e, &bind) {
                Ok(val) => {
                    found = Some((bind, val));
                    break;
                }
                Err(_) => continue,
            }
        }
        let Some((bind, val)) = found else {
            continue;
        };
        if val.is_exact_zero() {
            clean += 1;
            continue;
        }
        let Ok(v) = val.to_f64() else {
            continue;
        };
        let scale = 1.0 + term_scale(e, &bind, v);
        if v.abs() <= ZERO_TOL * scale {
            clean += 1;
        } else if v.abs() > NONZERO_TOL * scale {
            return ZeroDecision {
                status: ZeroStatus::NonZero,
                method: ZeroMethod::Probabilistic,
                witness: Some(Witness {
                    point: bind,
                    value: v,
                }),
            };
        } else {
            ambiguous = true;
        }
    }
    if clean == 0 {
        return ZeroDecision {
            status: ZeroStatus::Unknown,
            method: ZeroMethod::EvaluationDomain,
            witness: None,
        };
    }
    if ambiguous || clean < wanted {
        return ZeroDecision {
            status: ZeroStatus::Unknown,
            method: ZeroMethod::Probabilistic,
            witness: None,
        };
    }
    ZeroDecision {
        status: ZeroStatus::Zero,
        method: ZeroMethod::Probabilistic,
        witness: None,
    }
}
