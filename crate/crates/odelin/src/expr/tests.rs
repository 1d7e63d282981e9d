//! Kernel tests: canonical-form laws, differentiation, evaluation, and the
//! zero decision procedure.

use super::zero::{decide_zero, is_zero, ZeroCfg, ZeroMethod, ZeroStatus};
use super::{eval_exact, eval_f64, normalize, Builtin, EvalError, ExactVal, Expr};
use crate::sym::Sym;
use num_rational::BigRational;
use proptest::prelude::*;
use std::collections::BTreeMap;

fn x() -> Expr {
    Expr::sym("x")
}
fn u() -> Expr {
    Expr::sym("u")
}
fn p() -> Expr {
    Expr::sym("p")
}
fn q() -> Expr {
    Expr::sym("q")
}

// ---- canonical form ------------------------------------------------------

#[test]
fn like_terms_cancel_to_zero() {
    // 864 t - 1620 t + 432 t + 324 t = 0 for t = q^3/p^3: the constructors
    // must merge coefficients on a shared monomial core.
    let t = || Expr::mul(Expr::pow(q(), 3), Expr::pow(p(), -3));
    let e = Expr::add_all(vec![
        Expr::mul(Expr::int(864), t()),
        Expr::mul(Expr::int(-1620), t()),
        Expr::mul(Expr::int(432), t()),
        Expr::mul(Expr::int(324), t()),
    ]);
    assert!(e.is_zero_const(), "got {e}");
}

#[test]
fn binomial_square_expands() {
    // (p^2 + u q)^2 = p^4 + 2 p^2 u q + u^2 q^2
    let e = Expr::pow(Expr::add(Expr::pow(p(), 2), Expr::mul(u(), q())), 2);
    let expected = Expr::add_all(vec![
        Expr::pow(p(), 4),
        Expr::mul_all(vec![Expr::int(2), Expr::pow(p(), 2), u(), q()]),
        Expr::mul_all(vec![Expr::pow(u(), 2), Expr::pow(q(), 2)]),
    ]);
    assert_eq!(e, expected);
}

#[test]
fn cube_root_extracts_perfect_cubes() {
    // cbrt(-8) = -2 and cbrt(-2 u^3 p^3) = -cbrt(2) u p.
    assert_eq!(Expr::cbrt(Expr::int(-8)), Expr::int(-2));
    let e = Expr::cbrt(Expr::mul_all(vec![
        Expr::int(-2),
        Expr::pow(u(), 3),
        Expr::pow(p(), 3),
    ]));
    let expected = Expr::mul_all(vec![
        Expr::int(-1),
        Expr::cbrt(Expr::int(2)),
        u(),
        p(),
    ]);
    assert_eq!(e, expected);
}

#[test]
fn cube_root_of_polynomial_cube_collapses() {
    // cbrt(x^3 + 3x^2 + 3x + 1) = x + 1, found by polynomial root
    // extraction rather than factor splitting.
    let cube = Expr::add_all(vec![
        Expr::pow(x(), 3),
        Expr::mul(Expr::int(3), Expr::pow(x(), 2)),
        Expr::mul(Expr::int(3), x()),
        Expr::one(),
    ]);
    assert_eq!(Expr::cbrt(cube), Expr::add(x(), Expr::one()));
}

#[test]
fn cube_roots_merge_under_multiplication() {
    // cbrt(2) cbrt(4) = cbrt(8) = 2.
    let e = Expr::mul(Expr::cbrt(Expr::int(2)), Expr::cbrt(Expr::int(4)));
    assert_eq!(e, Expr::int(2));
    // cbrt(x) cbrt(x^2) = x.
    let e2 = Expr::mul(Expr::cbrt(x()), Expr::cbrt(Expr::pow(x(), 2)));
    assert_eq!(e2, x());
}

#[test]
fn square_root_stays_on_even_powers() {
    // sqrt(x^2) is |x|, not x: no extraction allowed.
    let e = Expr::sqrt(Expr::pow(x(), 2));
    assert_eq!(e, Expr::Func(Builtin::Sqrt, Box::new(Expr::pow(x(), 2))));
    // Exponents divisible by 4 do come out: sqrt(x^4) = x^2.
    assert_eq!(Expr::sqrt(Expr::pow(x(), 4)), Expr::pow(x(), 2));
    // Positive rational squares come out: sqrt(9/4) = 3/2.
    assert_eq!(Expr::sqrt(Expr::rat(9, 4)), Expr::rat(3, 2));
}

#[test]
fn zero_power_rules() {
    assert_eq!(Expr::pow(Expr::zero(), 0), Expr::one());
    assert_eq!(Expr::pow(x(), 0), Expr::one());
    assert!(matches!(Expr::pow(Expr::zero(), -1), Expr::Undefined));
    // Undefined absorbs arithmetic.
    assert!(matches!(Expr::add(Expr::Undefined, x()), Expr::Undefined));
    assert!(matches!(Expr::mul(Expr::Undefined, x()), Expr::Undefined));
}

proptest! {
    #[test]
    fn constructors_are_idempotent_under_normalize(e in arb_expr()) {
        let once = normalize(&e);
        let twice = normalize(&once);
        prop_assert_eq!(&once, &twice);
        // Trees built through the constructors are already normal.
        prop_assert_eq!(&once, &e);
    }
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-9i64..=9).prop_map(Expr::int),
        (1i64..=5i64, 2i64..=5i64).prop_map(|(n, d)| Expr::rat(n, d)),
        prop_oneof![Just("x"), Just("u"), Just("p"), Just("q")].prop_map(Expr::sym),
    ];
    leaf.prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::add_all),
            prop::collection::vec(inner.clone(), 2..3).prop_map(Expr::mul_all),
            (inner.clone(), prop_oneof![Just(-2i64), Just(-1), Just(2), Just(3)])
                .prop_map(|(b, k)| Expr::pow(b, k)),
            inner.prop_map(Expr::cbrt),
        ]
    })
}

// ---- differentiation -----------------------------------------------------

#[test]
fn power_rule_with_negative_exponent() {
    // d(x^-2)/dx = -2 x^-3
    let e = Expr::pow(x(), -2);
    let d = super::diff(&e, &Sym::new("x"));
    assert_eq!(d, Expr::mul(Expr::int(-2), Expr::pow(x(), -3)));
}

#[test]
fn cube_root_derivative() {
    // d(cbrt(x))/dx = cbrt(x)/(3x)
    let d = super::diff(&Expr::cbrt(x()), &Sym::new("x"));
    let expected = Expr::mul_all(vec![Expr::rat(1, 3), Expr::cbrt(x()), Expr::pow(x(), -1)]);
    assert_eq!(d, expected);
}

#[test]
fn derivative_matches_central_difference() {
    // Spot-check d/dx against a numeric derivative at benign points.
    let exprs = vec![
        Expr::add(Expr::mul(Expr::pow(x(), 3), u()), Expr::mul(Expr::int(-3), Expr::pow(u(), -1))),
        Expr::mul(Expr::cbrt(Expr::mul(Expr::pow(x(), 2), u())), p()),
        Expr::func(Builtin::Sin, Expr::mul(x(), u())),
    ];
    let xs = Sym::new("x");
    for e in exprs {
        let d = super::diff(&e, &xs);
        for (xv, uv, pv) in [(1.3, 0.7, 2.0), (2.1, 1.9, -0.5), (0.6, 2.3, 1.1)] {
            let mut bind = BTreeMap::new();
            bind.insert(Sym::new("u"), uv);
            bind.insert(Sym::new("p"), pv);
            let h = 1e-5;
            let mut at = |xx: f64| {
                bind.insert(Sym::new("x"), xx);
                eval_f64(&e, &bind).unwrap()
            };
            let fd = (at(xv + h) - at(xv - h)) / (2.0 * h);
            bind.insert(Sym::new("x"), xv);
            let exact = eval_f64(&d, &bind).unwrap();
            assert!(
                (fd - exact).abs() <= 1e-4 * (1.0 + exact.abs()),
                "d({e})/dx at x={xv}: finite diff {fd} vs {exact}"
            );
        }
    }
}

// ---- evaluation ----------------------------------------------------------

#[test]
fn exact_evaluation_resolves_rational_roots() {
    let bind = BTreeMap::new();
    // cbrt(27/8) = 3/2 exactly.
    let v = eval_exact(&Expr::Cbrt(Box::new(Expr::rat(27, 8))), &bind).unwrap();
    assert_eq!(v, ExactVal::Exact(BigRational::new(3.into(), 2.into())));
    // sqrt(2) is irrational: approximate.
    let v = eval_exact(&Expr::Func(Builtin::Sqrt, Box::new(Expr::int(2))), &bind).unwrap();
    match v {
        ExactVal::Approx(f) => assert!((f - 2f64.sqrt()).abs() < 1e-12),
        other => panic!("expected approximate value, got {other:?}"),
    }
}

#[test]
fn evaluation_reports_domain_errors() {
    let mut bind = BTreeMap::new();
    bind.insert(Sym::new("x"), BigRational::from_integer(0.into()));
    let e = Expr::Power(Box::new(x()), -1);
    assert_eq!(eval_exact(&e, &bind), Err(EvalError::DivisionByZero));
    let missing = eval_exact(&u(), &bind);
    assert_eq!(missing, Err(EvalError::MissingSymbol(Sym::new("u"))));
}

// ---- zero decisions ------------------------------------------------------

#[test]
fn partial_fraction_identity_is_exactly_zero() {
    // 1/(x+u) + 1/(x-u) - 2x/(x^2-u^2) = 0: needs the rational normal
    // form, since negative powers of sums never expand.
    let e = Expr::add_all(vec![
        Expr::pow(Expr::add(x(), u()), -1),
        Expr::pow(Expr::sub(x(), u()), -1),
        Expr::mul_all(vec![
            Expr::int(-2),
            x(),
            Expr::pow(Expr::sub(Expr::pow(x(), 2), Expr::pow(u(), 2)), -1),
        ]),
    ]);
    let d = decide_zero(&e, &ZeroCfg::default());
    assert_eq!(d.status, ZeroStatus::Zero);
    assert_eq!(d.method, ZeroMethod::ExactNormalForm);
}

#[test]
fn radical_denominator_rationalizes_to_zero() {
    // 1/(1 + cbrt(2)) = (cbrt(4) - cbrt(2) + 1)/3, so the difference
    // vanishes; decided by the graded normal form with base 2.
    let c = || Expr::cbrt(Expr::int(2));
    let e = Expr::sub(
        Expr::pow(Expr::add(Expr::one(), c()), -1),
        Expr::mul(
            Expr::rat(1, 3),
            Expr::add_all(vec![
                Expr::cbrt(Expr::int(4)),
                Expr::neg(c()),
                Expr::one(),
            ]),
        ),
    );
    let d = decide_zero(&e, &ZeroCfg::default());
    assert_eq!(d.status, ZeroStatus::Zero);
    assert_eq!(d.method, ZeroMethod::ExactNormalForm);
}

#[test]
fn nonzero_verdicts_carry_witnesses() {
    // sqrt(x^2) - x is |x| - x: zero for positive x only, hence NonZero,
    // and the sampler must return a witness point.
    let e = Expr::sub(Expr::sqrt(Expr::pow(x(), 2)), x());
    let d = decide_zero(&e, &ZeroCfg::default());
    assert_eq!(d.status, ZeroStatus::NonZero);
    assert_eq!(d.method, ZeroMethod::Probabilistic);
    let w = d.witness.expect("witness for NonZero");
    assert!(w.value.abs() > 0.0);
}

#[test]
fn trig_identity_passes_sampling() {
    // sin^2 + cos^2 - 1 has no exact normal form here; sampling must
    // still call it zero.
    let arg = Expr::mul(x(), u());
    let e = Expr::add_all(vec![
        Expr::pow(Expr::func(Builtin::Sin, arg.clone()), 2),
        Expr::pow(Expr::func(Builtin::Cos, arg), 2),
        Expr::int(-1),
    ]);
    let d = decide_zero(&e, &ZeroCfg::default());
    assert_eq!(d.status, ZeroStatus::Zero);
    assert_eq!(d.method, ZeroMethod::Probabilistic);
}

#[test]
fn same_seed_reproduces_verdicts() {
    let e = Expr::sub(Expr::sqrt(Expr::pow(x(), 2)), x());
    let cfg = ZeroCfg { seed: 42, samples: 12 };
    let a = decide_zero(&e, &cfg);
    let b = decide_zero(&e, &cfg);
    assert_eq!(a.status, b.status);
    let (wa, wb) = (a.witness.unwrap(), b.witness.unwrap());
    assert_eq!(wa.point, wb.point);
    assert_eq!(is_zero(&Expr::zero(), &cfg), ZeroStatus::Zero);
}
