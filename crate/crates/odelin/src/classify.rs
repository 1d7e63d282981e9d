//! Symmetry-dimension verdicts for u''' = f(x, u, p, q).
//!
//! A linear third-order ODE admits a point symmetry algebra of dimension
//! exactly 7, 5 or 4, so an equation linearizable by a point transformation
//! inherits one of those three dimensions. Which one is decided entirely by
//! the zero/nonzero pattern of the relative invariants: W ≡ 0 gives the
//! maximal branch (equivalent to ū''' = 0), a constant K gives the
//! five-dimensional branch (equivalent to ū''' = s·ū' + ū with s = K), and
//! a genuinely varying K with the remaining obstructions vanishing gives
//! the four-dimensional branch. Anything else is not point-equivalent to a
//! linear equation at all. Whenever a deciding zero test cannot be settled
//! the verdict is `Indeterminate` rather than a guess.

use crate::expr::{decide_zero, Expr, ZeroCfg, ZeroStatus};
use crate::invariants::{compute_report, InvariantReport, JScaling};
use crate::jet::JetContext;
use crate::sym::Sym;
use std::fmt;

/// A named invariant expression cited by a verdict: the condition that
/// failed (for `NotLinearizable`) or could not be decided (for
/// `Indeterminate`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condition {
    pub name: String,
    pub expr: Expr,
}

impl Condition {
    fn new(name: &str, expr: &Expr) -> Self {
        Condition {
            name: name.to_string(),
            expr: expr.clone(),
        }
    }
}

/// Dimension of the point symmetry algebra of the linear equation the
/// input is equivalent to — or the reason no such equation exists, or the
/// invariants on which the decision got stuck.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SymmetryClass {
    /// Equivalent to ū''' = 0; seven-dimensional algebra.
    Seven,
    /// Equivalent to ū''' = s·ū' + ū with constant s; five-dimensional
    /// algebra. `s` is the invariant K, constant on this branch.
    Five { s: Expr },
    /// Equivalent to a linear equation admitting exactly four point
    /// symmetries; K and D_xK are carried for the construction step.
    Four { k: Expr, dxk: Expr },
    /// Not point-equivalent to any linear third-order equation.
    NotLinearizable { failing: Vec<Condition> },
    /// A deciding zero test returned Unknown; no sound verdict exists.
    Indeterminate { undecided: Vec<Condition> },
}

impl SymmetryClass {
    /// The symmetry dimension, when the verdict is a linearizable one.
    pub fn dimension(&self) -> Option<u32> {
        match self {
            SymmetryClass::Seven => Some(7),
            SymmetryClass::Five { .. } => Some(5),
            SymmetryClass::Four { .. } => Some(4),
            _ => None,
        }
    }
}

impl fmt::Display for SymmetryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymmetryClass::Seven => "seven",
            SymmetryClass::Five { .. } => "five",
            SymmetryClass::Four { .. } => "four",
            SymmetryClass::NotLinearizable { .. } => "not-linearizable",
            SymmetryClass::Indeterminate { .. } => "indeterminate",
        })
    }
}

/// Split a set of flagged conditions into the definitely-failing and the
/// undecided, where `want_zero` says which status counts as passing.
fn partition(
    report: &InvariantReport,
    entries: &[(&str, &Expr)],
    want_zero: bool,
) -> (Vec<Condition>, Vec<Condition>) {
    let mut failing = Vec::new();
    let mut undecided = Vec::new();
    for &(name, expr) in entries {
        match report.flag(name) {
            ZeroStatus::Unknown => undecided.push(Condition::new(name, expr)),
            ZeroStatus::Zero if !want_zero => failing.push(Condition::new(name, expr)),
            ZeroStatus::NonZero if want_zero => failing.push(Condition::new(name, expr)),
            _ => {}
        }
    }
    (failing, undecided)
}

/// Map an already-computed invariant report to its verdict.
///
/// The verdict itself does not depend on the report's J-scaling (the two
/// conventions differ by a nonzero constant factor); the expressions
/// embedded in `Five`/`Four` are taken from the report as is.
pub fn classify_report(report: &InvariantReport) -> SymmetryClass {
    // Either obstruction in the second-derivative dependence being nonzero
    // rules out every linear target.
    let head = [("I1", &report.i1), ("I2", &report.i2)];
    let (failing, undecided) = partition(report, &head, true);
    if !failing.is_empty() {
        return SymmetryClass::NotLinearizable { failing };
    }
    if !undecided.is_empty() {
        return SymmetryClass::Indeterminate { undecided };
    }

    // W separates the maximal branch from the two J-graded ones.
    match report.flag("W") {
        ZeroStatus::Unknown => {
            return SymmetryClass::Indeterminate {
                undecided: vec![Condition::new("W", &report.w)],
            }
        }
        ZeroStatus::Zero => {
            return match report.flag("I7") {
                ZeroStatus::Zero => SymmetryClass::Seven,
                ZeroStatus::NonZero => SymmetryClass::NotLinearizable {
                    failing: vec![Condition::new("I7", &report.i7)],
                },
                ZeroStatus::Unknown => SymmetryClass::Indeterminate {
                    undecided: vec![Condition::new("I7", &report.i7)],
                },
            };
        }
        ZeroStatus::NonZero => {}
    }

    // W ≠ 0: both remaining branches need these four to vanish.
    let jd = report.j_data.as_ref().expect("W nonzero implies J-data");
    let gate = [
        ("I4", &jd.i4),
        ("I5", &jd.i5),
        ("I6", &jd.i6),
        ("I7", &report.i7),
    ];
    let (failing, undecided) = partition(report, &gate, true);
    if !failing.is_empty() {
        return SymmetryClass::NotLinearizable { failing };
    }
    if !undecided.is_empty() {
        return SymmetryClass::Indeterminate { undecided };
    }

    // Five: K is a constant — all four partials vanish.
    let k_partials = [
        ("I9", &jd.i9),
        ("I10", &jd.i10),
        ("Ku", &jd.ku),
        ("I12", &jd.i12),
    ];
    let (k_varies, k_undecided) = partition(report, &k_partials, true);
    if k_varies.is_empty() && k_undecided.is_empty() {
        return SymmetryClass::Five { s: jd.k.clone() };
    }
    if k_varies.is_empty() {
        // Nothing proves K non-constant; the five/four choice is open.
        return SymmetryClass::Indeterminate {
            undecided: k_undecided,
        };
    }

    // Four: K genuinely varies; it must do so compatibly (I9, I10, I11
    // zero) and nondegenerately (I8 and D_xK nonzero).
    let must_vanish = [("I9", &jd.i9), ("I10", &jd.i10), ("I11", &jd.i11)];
    let (mut failing, mut undecided) = partition(report, &must_vanish, true);
    let must_not = [("I8", &jd.i8), ("DxK", &jd.dxk)];
    let (f2, u2) = partition(report, &must_not, false);
    failing.extend(f2);
    undecided.extend(u2);
    if !failing.is_empty() {
        return SymmetryClass::NotLinearizable { failing };
    }
    if !undecided.is_empty() {
        return SymmetryClass::Indeterminate { undecided };
    }
    SymmetryClass::Four {
        k: jd.k.clone(),
        dxk: jd.dxk.clone(),
    }
}

/// Classify an equation from scratch under the default J-scaling.
pub fn classify(ctx: &JetContext, cfg: &ZeroCfg) -> SymmetryClass {
    classify_report(&compute_report(ctx, JScaling::LaguerreForsyth, cfg))
}

/// The two expressions whose vanishing pattern partitions a parameterized
/// linear family: the verdict is Seven exactly where `w` vanishes, and on
/// the complement Five where `dxk` vanishes identically, Four where it
/// does not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionReport {
    pub w: Expr,
    pub dxk: Expr,
}

/// Verdict for a concrete linear equation, or the stratifying conditions
/// for a family with free parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinearClassification {
    Class(SymmetryClass),
    Stratified(ConditionReport),
}

/// The right-hand side c₁·u'' + c₂·u' + c₃·u + c₄ as one expression.
pub fn assemble_linear(coeffs: &[Expr; 4]) -> Expr {
    Expr::add_all(vec![
        Expr::mul(coeffs[0].clone(), Expr::sym(crate::sym::Q)),
        Expr::mul(coeffs[1].clone(), Expr::sym(crate::sym::P)),
        Expr::mul(coeffs[2].clone(), Expr::sym(crate::sym::U)),
        coeffs[3].clone(),
    ])
}

/// Classify the linear equation u''' = c₁·u'' + c₂·u' + c₃·u + c₄ with
/// coefficients depending on x and possibly on the given parameters.
///
/// Parameter-free coefficients give a definite verdict. When a parameter
/// actually occurs, the answer is a pair of stratifying expressions
/// instead: substituting parameter values into them and zero-testing
/// reproduces the verdict for that member of the family.
pub fn classify_linear(
    coeffs: &[Expr; 4],
    params: &[Sym],
    cfg: &ZeroCfg,
) -> LinearClassification {
    let f = assemble_linear(coeffs);
    let parameterized = params
        .iter()
        .any(|par| coeffs.iter().any(|c| c.free_symbols().contains(par)));
    let ctx = JetContext::new(f, params.to_vec());
    if !parameterized {
        return LinearClassification::Class(classify(&ctx, cfg));
    }
    let report = compute_report(&ctx, JScaling::LaguerreForsyth, cfg);
    // W ≡ 0 across the whole family leaves no J-branch; D_xK ≡ 0 then
    // holds vacuously and the report reads "Seven everywhere".
    let dxk = report
        .j_data
        .as_ref()
        .map(|jd| jd.dxk.clone())
        .unwrap_or_else(Expr::zero);
    LinearClassification::Stratified(ConditionReport { w: report.w, dxk })
}

/// Whether a rigidity profile satisfies the closed differential constraint
/// equivalent to the five-symmetry verdict for the vibrating-beam family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeamConstraint {
    Satisfied,
    Violated,
    /// The constraint's zero test returned Unknown, or the two decision
    /// routes (direct substitution vs. classification) disagreed.
    Undecided,
}

/// The bending-moment equation for a beam of flexural rigidity B(x) under
/// a distributed load: M''' = −(1 + c/B)·M' + (c·B'/B²)·M, with `load`
/// the combined load coefficient c.
pub fn beam_context(b: &Expr, load: &Sym) -> JetContext {
    let c = Expr::Symbol(load.clone());
    let xs = Sym::new(crate::sym::X);
    let c2 = Expr::neg(Expr::add(Expr::one(), Expr::div(c.clone(), b.clone())));
    let c3 = Expr::div(
        Expr::mul(c, crate::expr::diff(b, &xs)),
        Expr::pow(b.clone(), 2),
    );
    let f = assemble_linear(&[Expr::zero(), c2, c3, Expr::zero()]);
    JetContext::new(f, vec![load.clone()])
}

/// The closed constraint on B(x) whose vanishing characterizes the
/// five-symmetry members of the beam family (for non-constant B):
/// 18B³B′²B″ − 36B²B′⁴ + 18cB²B′²B″ − 9cBB′⁴ + 24BB′⁴B″ − 12B²B′²B″²
/// − 72B³B′B″B‴ + 18B³B′²B⁗ − 16B′⁶ + 56B³B″³, with B substituted in.
pub fn beam_constraint(b: &Expr, load: &Sym) -> Expr {
    let c = Expr::Symbol(load.clone());
    let xs = Sym::new(crate::sym::X);
    let b1 = crate::expr::diff(b, &xs);
    let b2 = crate::expr::diff(&b1, &xs);
    let b3 = crate::expr::diff(&b2, &xs);
    let b4 = crate::expr::diff(&b3, &xs);
    let pw = |e: &Expr, k: i64| Expr::pow(e.clone(), k);
    Expr::add_all(vec![
        Expr::mul_all(vec![Expr::int(18), pw(b, 3), pw(&b1, 2), b2.clone()]),
        Expr::mul_all(vec![Expr::int(-36), pw(b, 2), pw(&b1, 4)]),
        Expr::mul_all(vec![
            Expr::int(18),
            c.clone(),
            pw(b, 2),
            pw(&b1, 2),
            b2.clone(),
        ]),
        Expr::mul_all(vec![Expr::int(-9), c, b.clone(), pw(&b1, 4)]),
        Expr::mul_all(vec![Expr::int(24), b.clone(), pw(&b1, 4), b2.clone()]),
        Expr::mul_all(vec![Expr::int(-12), pw(b, 2), pw(&b1, 2), pw(&b2, 2)]),
        Expr::mul_all(vec![Expr::int(-72), pw(b, 3), b1.clone(), b2.clone(), b3]),
        Expr::mul_all(vec![Expr::int(18), pw(b, 3), pw(&b1, 2), b4]),
        Expr::mul(Expr::int(-16), pw(&b1, 6)),
        Expr::mul_all(vec![Expr::int(56), pw(b, 3), pw(&b2, 3)]),
    ])
}

/// Test a rigidity profile against the beam constraint, cross-checked by
/// classifying the assembled equation: a profile satisfies the constraint
/// exactly when the equation admits five symmetries — or degenerately
/// (constant B) the maximal seven. Disagreement between the two routes is
/// reported as `Undecided`, never papered over.
pub fn beam_constraint_check(b: &Expr, load: &Sym, cfg: &ZeroCfg) -> BeamConstraint {
    let direct = decide_zero(&beam_constraint(b, load), cfg).status;
    let class = classify(&beam_context(b, load), cfg);
    match (direct, &class) {
        (ZeroStatus::Zero, SymmetryClass::Five { .. }) => BeamConstraint::Satisfied,
        // Constant rigidity: every constraint term carries B′ or B″, so the
        // constraint holds trivially while the equation gains two symmetries.
        (ZeroStatus::Zero, SymmetryClass::Seven) => BeamConstraint::Satisfied,
        (ZeroStatus::NonZero, SymmetryClass::Four { .. }) => BeamConstraint::Violated,
        _ => BeamConstraint::Undecided,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::is_zero;
    use crate::invariants::JData;
    use crate::parse::parse_expr;

    fn ctx_of(src: &str) -> JetContext {
        JetContext::new(parse_expr(src, &[]).unwrap(), vec![])
    }

    fn assert_same_with(actual: &Expr, expected: &str, params: &[Sym]) {
        let want = parse_expr(expected, params).unwrap();
        assert_eq!(
            is_zero(&Expr::sub(actual.clone(), want.clone()), &ZeroCfg::default()),
            ZeroStatus::Zero,
            "expected {want}, got {actual}"
        );
    }

    fn assert_same(actual: &Expr, expected: &str) {
        assert_same_with(actual, expected, &[]);
    }

    fn names(conds: &[Condition]) -> Vec<&str> {
        conds.iter().map(|c| c.name.as_str()).collect()
    }

    /// A report with the given flag pattern and placeholder expressions;
    /// the tree reads flags only.
    fn synthetic(flags: &[(&'static str, ZeroStatus)], with_j: bool) -> InvariantReport {
        let e = Expr::sym("x");
        InvariantReport {
            scaling: JScaling::LaguerreForsyth,
            w: e.clone(),
            i1: e.clone(),
            i2: e.clone(),
            i7: e.clone(),
            j_data: with_j.then(|| JData {
                j: e.clone(),
                i4: e.clone(),
                i5: e.clone(),
                i6: e.clone(),
                i8: e.clone(),
                k: e.clone(),
                dxk: e.clone(),
                i9: e.clone(),
                i10: e.clone(),
                i11: e.clone(),
                ku: e.clone(),
                i12: e.clone(),
            }),
            zero_flags: flags.iter().copied().collect(),
        }
    }

    use ZeroStatus::{NonZero, Unknown, Zero};

    #[test]
    fn branch_logic_on_synthetic_flag_patterns() {
        // Maximal branch: W ≡ 0 decides on I7 alone.
        let base = [("I1", Zero), ("I2", Zero), ("W", Zero)];
        let with = |extra: &[(&'static str, ZeroStatus)], j: bool| {
            let mut flags = base.to_vec();
            flags.extend_from_slice(extra);
            classify_report(&synthetic(&flags, j))
        };
        assert_eq!(with(&[("I7", Zero)], false), SymmetryClass::Seven);
        match with(&[("I7", NonZero)], false) {
            SymmetryClass::NotLinearizable { failing } => {
                assert_eq!(names(&failing), ["I7"]);
            }
            other => panic!("expected NotLinearizable, got {other:?}"),
        }
        match with(&[("I7", Unknown)], false) {
            SymmetryClass::Indeterminate { undecided } => {
                assert_eq!(names(&undecided), ["I7"]);
            }
            other => panic!("expected Indeterminate, got {other:?}"),
        }

        // A nonzero obstruction beats an unknown one: the verdict is final.
        match classify_report(&synthetic(&[("I1", Unknown), ("I2", NonZero)], false)) {
            SymmetryClass::NotLinearizable { failing } => {
                assert_eq!(names(&failing), ["I2"]);
            }
            other => panic!("expected NotLinearizable, got {other:?}"),
        }
        // An undecided W blocks the branch choice itself.
        match classify_report(&synthetic(&[("I1", Zero), ("I2", Zero), ("W", Unknown)], false)) {
            SymmetryClass::Indeterminate { undecided } => {
                assert_eq!(names(&undecided), ["W"]);
            }
            other => panic!("expected Indeterminate, got {other:?}"),
        }
    }

    #[test]
    fn branch_logic_below_the_gate() {
        let gate = [
            ("I1", Zero),
            ("I2", Zero),
            ("W", NonZero),
            ("I4", Zero),
            ("I5", Zero),
            ("I6", Zero),
            ("I7", Zero),
        ];
        let run = |extra: &[(&'static str, ZeroStatus)]| {
            let mut flags = gate.to_vec();
            flags.extend_from_slice(extra);
            classify_report(&synthetic(&flags, true))
        };

        // All four K-partials vanish: the constant-K branch.
        let five = run(&[("I9", Zero), ("I10", Zero), ("Ku", Zero), ("I12", Zero)]);
        assert!(matches!(five, SymmetryClass::Five { .. }), "{five:?}");

        // K provably varies and the compatibility conditions hold.
        let four = run(&[
            ("I9", Zero),
            ("I10", Zero),
            ("Ku", NonZero),
            ("I12", NonZero),
            ("I11", Zero),
            ("I8", NonZero),
            ("DxK", NonZero),
        ]);
        assert!(matches!(four, SymmetryClass::Four { .. }), "{four:?}");

        // Nothing proves K non-constant: five vs. four stays open.
        match run(&[("I9", Zero), ("I10", Zero), ("Ku", Unknown), ("I12", Zero)]) {
            SymmetryClass::Indeterminate { undecided } => {
                assert_eq!(names(&undecided), ["Ku"]);
            }
            other => panic!("expected Indeterminate, got {other:?}"),
        }

        // K varies in a direction the four-symmetry branch forbids.
        match run(&[
            ("I9", NonZero),
            ("I10", Zero),
            ("Ku", Zero),
            ("I12", Zero),
            ("I11", Zero),
            ("I8", NonZero),
            ("DxK", NonZero),
        ]) {
            SymmetryClass::NotLinearizable { failing } => {
                assert_eq!(names(&failing), ["I9"]);
            }
            other => panic!("expected NotLinearizable, got {other:?}"),
        }

        // K varies yet its total derivative vanishes: degenerate, no branch.
        match run(&[
            ("I9", Zero),
            ("I10", Zero),
            ("Ku", NonZero),
            ("I12", NonZero),
            ("I11", Zero),
            ("I8", NonZero),
            ("DxK", Zero),
        ]) {
            SymmetryClass::NotLinearizable { failing } => {
                assert_eq!(names(&failing), ["DxK"]);
            }
            other => panic!("expected NotLinearizable, got {other:?}"),
        }

        // A gate invariant undecided blocks everything below it.
        let mut flags = gate.to_vec();
        flags[4] = ("I5", Unknown);
        match classify_report(&synthetic(&flags, true)) {
            SymmetryClass::Indeterminate { undecided } => {
                assert_eq!(names(&undecided), ["I5"]);
            }
            other => panic!("expected Indeterminate, got {other:?}"),
        }
    }

    #[test]
    fn the_trivial_equation_is_maximally_symmetric() {
        // Every invariant of u''' = 0 vanishes identically.
        let cfg = ZeroCfg::default();
        assert_eq!(classify(&ctx_of("0"), &cfg), SymmetryClass::Seven);
    }

    #[test]
    fn reference_equation_admits_four_symmetries() {
        let cfg = ZeroCfg::default();
        let verdict = classify(&ctx_of("3*q^2/p - x*u^3*p^4"), &cfg);
        match verdict {
            SymmetryClass::Four { k, dxk } => {
                // Oracle: direct evaluation of I8/J⁴ with J = u·p.
                assert_same(&k, "-3/u^4");
                assert_same(&dxk, "12*p/u^5");
            }
            other => panic!("expected Four, got {other:?}"),
        }
    }

    #[test]
    fn constant_coefficient_equation_with_five_symmetries() {
        // f = u: W = 54, J = 1, I8 = 0, so K = 0 — already in the canonical
        // form ū''' = s·ū' + ū at s = 0.
        let cfg = ZeroCfg::default();
        match classify(&ctx_of("u"), &cfg) {
            SymmetryClass::Five { s } => assert!(s.is_zero_const(), "s = {s}"),
            other => panic!("expected Five, got {other:?}"),
        }
        // A nonzero u'-coefficient survives into s.
        match classify(&ctx_of("2*p + u"), &cfg) {
            SymmetryClass::Five { s } => assert_same(&s, "2"),
            other => panic!("expected Five, got {other:?}"),
        }
    }

    #[test]
    fn cubic_coefficient_equation_admits_four_symmetries() {
        let cfg = ZeroCfg::default();
        match classify(&ctx_of("x^3*u"), &cfg) {
            SymmetryClass::Four { k, dxk } => {
                // Oracle: (2aa″ − 3a′²)/a⁴ at a = x, and its derivative.
                assert_same(&k, "-3/x^4");
                assert_same(&dxk, "12/x^5");
            }
            other => panic!("expected Four, got {other:?}"),
        }
    }

    #[test]
    fn second_derivative_nonlinearities_are_obstructions() {
        let cfg = ZeroCfg::default();
        // Cubic dependence on u'' leaves I1 = 6 and I2 = 36q² nonzero.
        match classify(&ctx_of("q^3"), &cfg) {
            SymmetryClass::NotLinearizable { failing } => {
                assert_eq!(names(&failing), ["I1", "I2"]);
            }
            other => panic!("expected NotLinearizable, got {other:?}"),
        }
        // f = p·q² has I1 = 0 but I2 = 4p² + 12 ≠ 0.
        match classify(&ctx_of("p*q^2"), &cfg) {
            SymmetryClass::NotLinearizable { failing } => {
                assert_eq!(names(&failing), ["I2"]);
            }
            other => panic!("expected NotLinearizable, got {other:?}"),
        }
    }

    #[test]
    fn undecidable_coefficients_yield_indeterminate() {
        // The square root never evaluates over the reals, so the zero tests
        // on I1 and I2 cannot run; the correction term keeps the rational
        // part of I2 at zero so neither obstruction resolves.
        let cfg = ZeroCfg::default();
        let f = parse_expr("sqrt(-x^2 - 1)*q^3 + (x^2 + 1)/2*p*q^4", &[]).unwrap();
        match classify(&JetContext::new(f, vec![]), &cfg) {
            SymmetryClass::Indeterminate { undecided } => {
                assert!(names(&undecided).contains(&"I1"), "{undecided:?}");
            }
            other => panic!("expected Indeterminate, got {other:?}"),
        }
    }

    #[test]
    fn cube_coefficient_verdicts_follow_the_closed_form() {
        // u''' = a³(x)·u: Seven for a ≡ 0, Five for nonzero constant a
        // (K = 0), Four for nonconstant polynomial a (K nonconstant).
        let cfg = ZeroCfg::default();
        assert_eq!(classify(&ctx_of("0"), &cfg), SymmetryClass::Seven);
        assert!(matches!(
            classify(&ctx_of("8*u"), &cfg),
            SymmetryClass::Five { .. }
        ));
        for a_cubed in ["(x+1)^3*u", "(x^2+1)^3*u"] {
            assert!(
                matches!(classify(&ctx_of(a_cubed), &cfg), SymmetryClass::Four { .. }),
                "{a_cubed} must classify Four"
            );
        }
    }

    #[test]
    fn constant_linear_coefficients_never_admit_exactly_four_symmetries() {
        // With constant coefficients K is constant, so D_xK ≡ 0 and the
        // four-symmetry conditions cannot all hold.
        let cfg = ZeroCfg::default();
        let consts = [
            [0, 0, 0, 0],
            [0, 0, 1, 0],
            [1, 1, 1, 0],
            [2, -1, 3, 5],
            [-3, 0, 7, 1],
        ];
        for c in consts {
            let coeffs = c.map(Expr::int);
            let verdict = match classify_linear(&coeffs, &[], &cfg) {
                LinearClassification::Class(v) => v,
                other => panic!("constants must classify directly, got {other:?}"),
            };
            assert!(
                !matches!(verdict, SymmetryClass::Four { .. }),
                "{c:?} classified Four"
            );
        }
    }

    #[test]
    fn variable_coefficient_linear_equation_classifies_directly() {
        let cfg = ZeroCfg::default();
        let coeffs = [
            Expr::zero(),
            Expr::zero(),
            parse_expr("x^3", &[]).unwrap(),
            Expr::zero(),
        ];
        match classify_linear(&coeffs, &[], &cfg) {
            LinearClassification::Class(SymmetryClass::Four { .. }) => {}
            other => panic!("expected Four, got {other:?}"),
        }
    }

    #[test]
    fn turbine_shaft_family_stratifies_on_a_parameter_threshold() {
        // Torsional oscillations of a shaft with friction f, stiffness k,
        // inertia i, mass m and control gain al:
        // y''' = −(f/m)y'' − (k/m)y' − (h·al/(i·m))y. All coefficients are
        // constant, so the family is never Four; it collapses to the
        // maximal branch exactly on the surface W = 0, solved for al below.
        let params: Vec<Sym> = ["f", "k", "h", "i", "m", "al"]
            .iter()
            .map(|s| Sym::new(*s))
            .collect();
        let cfg = ZeroCfg::default();
        let pe = |src: &str| parse_expr(src, &params).unwrap();
        let coeffs = [pe("-f/m"), pe("-k/m"), pe("-h*al/(i*m)"), Expr::zero()];
        let report = match classify_linear(&coeffs, &params, &cfg) {
            LinearClassification::Stratified(r) => r,
            other => panic!("parameters must stratify, got {other:?}"),
        };

        // Constant coefficients: K is constant along the whole family.
        assert_eq!(is_zero(&report.dxk, &cfg), Zero);
        // Generic parameters sit off the threshold surface.
        assert_eq!(is_zero(&report.w, &cfg), NonZero);
        // On the surface al = f·i·(9km − 2f²)/(27m²h) the W expression
        // vanishes identically — verified by substitution.
        let threshold = pe("f*i*(9*k*m - 2*f^2)/(27*m^2*h)");
        let on_surface = crate::expr::substitute_one(&report.w, &Sym::new("al"), &threshold);
        assert_eq!(is_zero(&on_surface, &cfg), Zero);

        // A concrete member on the surface classifies Seven outright:
        // f = 3, k = h = i = m = 1 puts the threshold at al = −1.
        let concrete = [
            Expr::int(-3),
            Expr::int(-1),
            Expr::int(1),
            Expr::zero(),
        ];
        assert_eq!(
            classify_linear(&concrete, &params, &cfg),
            LinearClassification::Class(SymmetryClass::Seven)
        );
    }

    #[test]
    fn varying_rigidity_profile_meets_the_flexure_constraint() {
        // B = −c·x²/(x² − 1) satisfies the constraint exactly, and the
        // assembled bending-moment equation admits five symmetries (the
        // load parameter cancels out of its coefficients entirely).
        let cfg = ZeroCfg::default();
        let load = Sym::new("c");
        let b = parse_expr("-c*x^2/(x^2 - 1)", &[load.clone()]).unwrap();
        assert_eq!(is_zero(&beam_constraint(&b, &load), &cfg), Zero);
        assert_eq!(beam_constraint_check(&b, &load, &cfg), BeamConstraint::Satisfied);
        match classify(&beam_context(&b, &load), &cfg) {
            SymmetryClass::Five { s } => assert!(s.is_zero_const(), "s = {s}"),
            other => panic!("expected Five, got {other:?}"),
        }
    }

    #[test]
    fn constant_rigidity_gives_the_maximal_algebra() {
        let cfg = ZeroCfg::default();
        let load = Sym::new("c");
        let b = Expr::int(2);
        assert_eq!(
            classify(&beam_context(&b, &load), &cfg),
            SymmetryClass::Seven
        );
        // Every constraint term carries a derivative of B, so the check
        // lands in the degenerate satisfied case.
        assert_eq!(beam_constraint_check(&b, &load, &cfg), BeamConstraint::Satisfied);
    }

    #[test]
    fn linear_rigidity_violates_the_constraint() {
        // Oracle: substituting B = x kills every term with B″ and above,
        // leaving −36x² − 9cx − 16 ≠ 0; the equation then admits exactly
        // four symmetries.
        let cfg = ZeroCfg::default();
        let load = Sym::new("c");
        let b = parse_expr("x", &[]).unwrap();
        assert_same_with(&beam_constraint(&b, &load), "-36*x^2 - 9*c*x - 16", &[load.clone()]);
        assert_eq!(beam_constraint_check(&b, &load, &cfg), BeamConstraint::Violated);
        assert!(matches!(
            classify(&beam_context(&b, &load), &cfg),
            SymmetryClass::Four { .. }
        ));
    }

    #[test]
    fn verdict_display_names_are_stable() {
        assert_eq!(SymmetryClass::Seven.to_string(), "seven");
        assert_eq!(SymmetryClass::Five { s: Expr::zero() }.to_string(), "five");
        let four = SymmetryClass::Four {
            k: Expr::zero(),
            dxk: Expr::zero(),
        };
        assert_eq!(four.to_string(), "four");
        let none = SymmetryClass::NotLinearizable { failing: vec![] };
        assert_eq!(none.to_string(), "not-linearizable");
        assert_eq!(none.dimension(), None);
        assert_eq!(SymmetryClass::Seven.dimension(), Some(7));
    }
}
