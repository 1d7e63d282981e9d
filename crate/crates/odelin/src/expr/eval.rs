//! Numeric evaluation over rational points, with float fallback.
//!
//! Exact evaluation stays in rational arithmetic as long as roots resolve
//! to rationals (perfect cubes and squares) and drops to `f64` the moment
//! an irrational value appears. Domain violations are reported as errors
//! rather than NaN, so callers can resample instead of misreading a point.

use super::{Builtin, Expr};
use crate::sym::Sym;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;

/// Why a point could not be evaluated.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("even root of a negative value")]
    NegativeEvenRoot,
    #[error("logarithm of a non-positive value")]
    LogDomain,
    #[error("no value bound for symbol `{0}`")]
    MissingSymbol(Sym),
    #[error("undefined expression")]
    Undefined,
    #[error("value overflowed to a non-finite float")]
    NonFinite,
}

/// Result of exact-first evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum ExactVal {
    /// Still a rational number.
    Exact(BigRational),
    /// An irrational intermediate forced a float.
    Approx(f64),
}

impl ExactVal {
    pub fn to_f64(&self) -> Result<f64, EvalError> {
        let v = match self {
            ExactVal::Exact(r) => r.to_f64().ok_or(EvalError::NonFinite)?,
            ExactVal::Approx(v) => *v,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self, ExactVal::Exact(r) if r.is_zero())
    }

    fn add(self, other: ExactVal) -> Result<ExactVal, EvalError> {
        match (self, other) {
            (ExactVal::Exact(a), ExactVal::Exact(b)) => Ok(ExactVal::Exact(a + b)),
            (a, b) => Ok(ExactVal::Approx(a.to_f64()? + b.to_f64()?)),
        }
    }

    fn mul(self, other: ExactVal) -> Result<ExactVal, EvalError> {
        match (self, other) {
            (ExactVal::Exact(a), ExactVal::Exact(b)) => Ok(ExactVal::Exact(a * b)),
            (a, b) => Ok(ExactVal::Approx(a.to_f64()? * b.to_f64()?)),
        }
    }

    fn powi(self, k: i64) -> Result<ExactVal, EvalError> {
        match self {
            ExactVal::Exact(r) => {
                if r.is_zero() && k < 0 {
                    return Err(EvalError::DivisionByZero);
                }
                if r.is_zero() && k == 0 {
                    return Ok(ExactVal::Exact(BigRational::from_integer(BigInt::from(1))));
                }
                Ok(ExactVal::Exact(super::rational_pow(&r, k)))
            }
            ExactVal::Approx(v) => {
                if v == 0.0 && k < 0 {
                    return Err(EvalError::DivisionByZero);
                }
                let p = v.powi(k.clamp(i32::MIN as i64, i32::MAX as i64) as i32);
                if p.is_finite() {
                    Ok(ExactVal::Approx(p))
                } else {
                    Err(EvalError::NonFinite)
                }
            }
        }
    }
}

/// Exact rational cube root when one exists.
fn exact_cbrt(r: &BigRational) -> Option<BigRational> {
    let n = num_integer::Roots::cbrt(r.numer());
    let d = num_integer::Roots::cbrt(r.denom());
    let cand = BigRational::new(n, d);
    (&(&cand * &cand) * &cand == *r).then_some(cand)
}

/// Exact rational square root of a non-negative rational when one exists.
fn exact_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let n = num_integer::Roots::sqrt(r.numer());
    let d = num_integer::Roots::sqrt(r.denom());
    let cand = BigRational::new(n, d);
    (&cand * &cand == *r).then_some(cand)
}

/// Evaluate with exact rational arithmetic where possible.
pub fn eval_exact(e: &Expr, bind: &BTreeMap<Sym, BigRational>) -> Result<ExactVal, EvalError> {
    match e {
        Expr::Rational(r) => Ok(ExactVal::Exact(r.clone())),
        Expr::Symbol(s) => bind
            .get(s)
            .cloned()
            .map(ExactVal::Exact)
            .ok_or_else(|| EvalError::MissingSymbol(s.clone())),
        Expr::Sum(ts) => {
            let mut acc = ExactVal::Exact(BigRational::zero());
            for t in ts {
                acc = acc.add(eval_exact(t, bind)?)?;
            }
            Ok(acc)
        }
        Expr::Product(fs) => {
            let mut acc = ExactVal::Exact(BigRational::from_integer(BigInt::from(1)));
            for f in fs {
                acc = acc.mul(eval_exact(f, bind)?)?;
            }
            Ok(acc)
        }
        Expr::Power(b, k) => eval_exact(b, bind)?.powi(*k),
        Expr::Cbrt(a) => match eval_exact(a, bind)? {
            ExactVal::Exact(r) => match exact_cbrt(&r) {
                Some(root) => Ok(ExactVal::Exact(root)),
                None => {
                    let v = r.to_f64().ok_or(EvalError::NonFinite)?;
                    Ok(ExactVal::Approx(v.cbrt()))
                }
            },
            ExactVal::Approx(v) => Ok(ExactVal::Approx(v.cbrt())),
        },
        Expr::Func(f, a) => {
            let av = eval_exact(a, bind)?;
            match f {
                Builtin::Sqrt => match av {
                    ExactVal::Exact(r) => {
                        if r.is_negative() {
                            return Err(EvalError::NegativeEvenRoot);
                        }
                        match exact_sqrt(&r) {
                            Some(root) => Ok(ExactVal::Exact(root)),
                            None => {
                                let v = r.to_f64().ok_or(EvalError::NonFinite)?;
                                Ok(ExactVal::Approx(v.sqrt()))
                            }
                        }
                    }
                    ExactVal::Approx(v) => {
                        if v < 0.0 {
                            Err(EvalError::NegativeEvenRoot)
                        } else {
                            Ok(ExactVal::Approx(v.sqrt()))
                        }
                    }
                },
                Builtin::Exp | Builtin::Ln | Builtin::Sin | Builtin::Cos => {
                    let v = av.to_f64()?;
                    let out = match f {
                        Builtin::Exp => v.exp(),
                        Builtin::Ln => {
                            if v <= 0.0 {
                                return Err(EvalError::LogDomain);
                            }
                            v.ln()
                        }
                        Builtin::Sin => v.sin(),
                        Builtin::Cos => v.cos(),
                        Builtin::Sqrt => unreachable!(),
                    };
                    if out.is_finite() {
                        Ok(ExactVal::Approx(out))
                    } else {
                        Err(EvalError::NonFinite)
                    }
                }
            }
        }
        Expr::Undefined => Err(EvalError::Undefined),
    }
}

/// Plain float evaluation.
pub fn eval_f64(e: &Expr, bind: &BTreeMap<Sym, f64>) -> Result<f64, EvalError> {
    let v = eval_f64_inner(e, bind)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite)
    }
}

fn eval_f64_inner(e: &Expr, bind: &BTreeMap<Sym, f64>) -> Result<f64, EvalError> {
    match e {
        Expr::Rational(r) => r.to_f64().ok_or(EvalError::NonFinite),
        Expr::Symbol(s) => bind
            .get(s)
            .copied()
            .ok_or_else(|| EvalError::MissingSymbol(s.clone())),
        Expr::Sum(ts) => {
            let mut acc = 0.0;
            for t in ts {
                acc += eval_f64_inner(t, bind)?;
            }
            Ok(acc)
        }
        Expr::Product(fs) => {
            let mut acc = 1.0;
            for f in fs {
                acc *= eval_f64_inner(f, bind)?;
            }
            Ok(acc)
        }
        Expr::Power(b, k) => {
            let bv = eval_f64_inner(b, bind)?;
            if bv == 0.0 && *k < 0 {
                return Err(EvalError::DivisionByZero);
            }
            Ok(bv.powi((*k).clamp(i32::MIN as i64, i32::MAX as i64) as i32))
        }
        Expr::Cbrt(a) => Ok(eval_f64_inner(a, bind)?.cbrt()),
        Expr::Func(f, a) => {
            let av = eval_f64_inner(a, bind)?;
            match f {
                Builtin::Exp => Ok(av.exp()),
                Builtin::Ln => {
                    if av <= 0.0 {
                        Err(EvalError::LogDomain)
                    } else {
                        Ok(av.ln())
                    }
                }
                Builtin::Sin => Ok(av.sin()),
                Builtin::Cos => Ok(av.cos()),
                Builtin::Sqrt => {
                    if av < 0.0 {
                        Err(EvalError::NegativeEvenRoot)
                    } else {
                        Ok(av.sqrt())
                    }
                }
            }
        }
        Expr::Undefined => Err(EvalError::Undefined),
    }
}
