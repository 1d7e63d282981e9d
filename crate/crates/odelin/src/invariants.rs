//! Relative invariants of u''' = f(x, u, p, q) under point transformations.
//!
//! The fundamental quantity is W = 4f_q³ + 18f_q(f_p − D_xf_q) + 9D_x²f_q −
//! 27D_xf_p + 54f_u, whose vanishing separates the seven-symmetry branch
//! from the rest. Two conventional scalings of its cube root J are in use —
//! J³ = W/54 (Laguerre–Forsyth) and J³ = −W/27 (Yumaguzhin) — and the
//! remaining invariants I₁…I₁₂, I₈, K = I₈/J⁴ and D_xK are built on top of
//! J. Their zero/nonzero pattern is what classification consumes.

use crate::expr::{decide_zero, diff, diff_n, rational_simplify, Expr, ZeroCfg, ZeroStatus};
use crate::jet::{total_derivative, JetContext};
use crate::sym::{Sym, P, Q, U, X};
use std::collections::BTreeMap;

/// Normalization convention for J = ∛(scaled W).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JScaling {
    /// J³ = W/54; the classification and Laguerre–Forsyth construction
    /// default.
    LaguerreForsyth,
    /// J³ = −W/27; used by the alternative four-symmetry normal form.
    Yumaguzhin,
}

impl JScaling {
    /// The scaled cube J³ as a function of W.
    pub fn j_cubed(&self, w: &Expr) -> Expr {
        match self {
            JScaling::LaguerreForsyth => Expr::div(w.clone(), Expr::int(54)),
            JScaling::Yumaguzhin => Expr::div(Expr::neg(w.clone()), Expr::int(27)),
        }
    }
}

/// The J-dependent invariants; absent from a report when J³ ≡ 0, where
/// none of them are defined.
#[derive(Debug, Clone)]
pub struct JData {
    pub j: Expr,
    /// J_q.
    pub i4: Expr,
    /// f_qq·J − 6J_p.
    pub i5: Expr,
    /// J_u − D_xJ_p.
    pub i6: Expr,
    /// (1/3)[(f_q² + 3f_p − 3D_xf_q)J² + 6J·D_x²J − 9(D_xJ)²].
    pub i8: Expr,
    /// I₈/J⁴.
    pub k: Expr,
    pub dxk: Expr,
    /// K_q.
    pub i9: Expr,
    /// K_p.
    pub i10: Expr,
    /// f_qq·D_xK − 6K_u (the four-symmetry branch form).
    pub i11: Expr,
    /// K_u on its own (the five-symmetry branch lists it directly; the two
    /// forms are kept side by side rather than assumed interchangeable).
    pub ku: Expr,
    /// K_x.
    pub i12: Expr,
}

/// All invariants of one equation under one scaling, with a zero/nonzero
/// verdict per entry.
#[derive(Debug, Clone)]
pub struct InvariantReport {
    pub scaling: JScaling,
    pub w: Expr,
    /// f_qqq.
    pub i1: Expr,
    /// f_qq² + 6f_pqq.
    pub i2: Expr,
    /// f_qq(9f_p + f_q² − 3D_xf_q) − 9f_pp + 18f_uq − 6f_q·f_pq.
    pub i7: Expr,
    /// J and everything built from it; present only when W is provably
    /// nonzero (elsewhere the cube root is zero or undecidable and the
    /// derived quantities carry no information).
    pub j_data: Option<JData>,
    pub zero_flags: BTreeMap<&'static str, ZeroStatus>,
}

impl InvariantReport {
    /// Flag lookup; entries never computed (J-dependent ones when W ≡ 0)
    /// read as Unknown.
    pub fn flag(&self, name: &str) -> ZeroStatus {
        self.zero_flags.get(name).copied().unwrap_or(ZeroStatus::Unknown)
    }
}

/// W = 4f_q³ + 18f_q(f_p − D_xf_q) + 9D_x²f_q − 27D_xf_p + 54f_u.
pub fn compute_w(ctx: &JetContext) -> Expr {
    let (us, ps, qs) = (Sym::new(U), Sym::new(P), Sym::new(Q));
    let fq = diff(&ctx.f, &qs);
    let fp = diff(&ctx.f, &ps);
    let fu = diff(&ctx.f, &us);
    let dxfq = total_derivative(ctx, &fq, 1);
    Expr::add_all(vec![
        Expr::mul(Expr::int(4), Expr::pow(fq.clone(), 3)),
        Expr::mul_all(vec![
            Expr::int(18),
            fq,
            Expr::sub(fp.clone(), dxfq.clone()),
        ]),
        Expr::mul(Expr::int(9), total_derivative(ctx, &dxfq, 1)),
        Expr::mul(Expr::int(-27), total_derivative(ctx, &fp, 1)),
        Expr::mul(Expr::int(54), fu),
    ])
}

/// Compute the full invariant set and zero-test every entry.
///
/// Every J-dependent invariant is a rational function times J itself: from
/// J³ = s one gets D_xJ = (D_xs/3s)·J, and the radical propagates as a
/// single factor. The computation tracks those rational cofactors and only
/// multiplies J back in at the end — zero tests then run on radical-free
/// expressions (sound because J ≠ 0 wherever the cofactor flags are used),
/// and the reported expressions never accumulate nested cube roots.
pub fn compute_report(ctx: &JetContext, scaling: JScaling, cfg: &ZeroCfg) -> InvariantReport {
    let (xs, us, ps, qs) = (Sym::new(X), Sym::new(U), Sym::new(P), Sym::new(Q));
    let fq = diff(&ctx.f, &qs);
    let fp = diff(&ctx.f, &ps);
    let fqq = diff(&fq, &qs);
    let dxfq = total_derivative(ctx, &fq, 1);

    let w = rational_simplify(&compute_w(ctx));
    let i1 = diff_n(&ctx.f, &qs, 3);
    let i2 = Expr::add(
        Expr::pow(fqq.clone(), 2),
        Expr::mul(Expr::int(6), diff_n(&fp, &qs, 2)),
    );
    let i7 = Expr::add_all(vec![
        Expr::mul(
            fqq.clone(),
            Expr::add_all(vec![
                Expr::mul(Expr::int(9), fp.clone()),
                Expr::pow(fq.clone(), 2),
                Expr::mul(Expr::int(-3), dxfq.clone()),
            ]),
        ),
        Expr::mul(Expr::int(-9), diff(&fp, &ps)),
        Expr::mul(Expr::int(18), diff(&diff(&ctx.f, &us), &qs)),
        Expr::mul_all(vec![Expr::int(-6), fq.clone(), diff(&fp, &qs)]),
    ]);

    let mut zero_flags = BTreeMap::new();
    let w_status = decide_zero(&w, cfg).status;
    zero_flags.insert("W", w_status);
    zero_flags.insert("I1", decide_zero(&i1, cfg).status);
    zero_flags.insert("I2", decide_zero(&i2, cfg).status);
    zero_flags.insert("I7", decide_zero(&i7, cfg).status);

    // The radical branch makes sense only where W is provably nonzero: J³
    // would be zero (or of unknown sign of vanishing) otherwise, and every
    // flag derived below would be forced to Unknown regardless — so skip
    // the construction entirely instead of building unusable expressions.
    let j_data = if w_status != ZeroStatus::NonZero {
        None
    } else {
        let s = scaling.j_cubed(&w);
        let j = Expr::cbrt(s.clone());
        // Log-derivative of J: D_xJ = ell·J. Every cofactor is flattened
        // as it is built; otherwise each division by s stacks another
        // unmergeable denominator onto the next derivative.
        let ell = rational_simplify(&Expr::div(
            total_derivative(ctx, &s, 1),
            Expr::mul(Expr::int(3), s.clone()),
        ));
        // Cofactor of a partial of J: J_v = (s_v/3s)·J.
        let j_cof = |v: &Sym| {
            rational_simplify(&Expr::div(
                diff(&s, v),
                Expr::mul(Expr::int(3), s.clone()),
            ))
        };

        let i4_cof = j_cof(&qs);
        let i5_cof = rational_simplify(&Expr::sub(
            fqq.clone(),
            Expr::mul(Expr::int(6), j_cof(&ps)),
        ));
        let jp_cof = j_cof(&ps);
        let i6_cof = rational_simplify(&Expr::add_all(vec![
            j_cof(&us),
            Expr::neg(total_derivative(ctx, &jp_cof, 1)),
            Expr::neg(Expr::mul(jp_cof, ell.clone())),
        ]));
        // I₈ = m·J² with the radical-free m below (substitute D_xJ = ell·J
        // and D_x²J = (D_x(ell) + ell²)·J into the defining formula).
        let m = rational_simplify(&Expr::add_all(vec![
            Expr::div(
                Expr::add_all(vec![
                    Expr::pow(fq.clone(), 2),
                    Expr::mul(Expr::int(3), fp.clone()),
                    Expr::mul(Expr::int(-3), dxfq.clone()),
                ]),
                Expr::int(3),
            ),
            Expr::mul(Expr::int(2), total_derivative(ctx, &ell, 1)),
            Expr::neg(Expr::pow(ell.clone(), 2)),
        ]));
        let i8 = Expr::mul(m.clone(), Expr::pow(j.clone(), 2));
        // K = I₈/J⁴ = (m/s)·J.
        let k_cof = rational_simplify(&Expr::div(m.clone(), s.clone()));
        let k_partial = |v: &Sym| {
            rational_simplify(&Expr::add(
                diff(&k_cof, v),
                Expr::mul(k_cof.clone(), j_cof(v)),
            ))
        };
        let k = Expr::mul(k_cof.clone(), j.clone());
        let dxk_cof = rational_simplify(&Expr::add(
            total_derivative(ctx, &k_cof, 1),
            Expr::mul(k_cof.clone(), ell),
        ));
        let dxk = Expr::mul(dxk_cof.clone(), j.clone());
        let i9_cof = k_partial(&qs);
        let i10_cof = k_partial(&ps);
        let ku_cof = k_partial(&us);
        let i12_cof = k_partial(&xs);
        let i11_cof = rational_simplify(&Expr::sub(
            Expr::mul(fqq, dxk_cof.clone()),
            Expr::mul(Expr::int(6), ku_cof.clone()),
        ));

        let cofactors = [
            ("I4", &i4_cof),
            ("I5", &i5_cof),
            ("I6", &i6_cof),
            ("I8", &m),
            ("K", &k_cof),
            ("DxK", &dxk_cof),
            ("I9", &i9_cof),
            ("I10", &i10_cof),
            ("I11", &i11_cof),
            ("Ku", &ku_cof),
            ("I12", &i12_cof),
        ];
        for (name, cof) in cofactors {
            // Cofactor verdicts transfer to the invariants because J is
            // certainly nonzero on this branch.
            zero_flags.insert(name, decide_zero(cof, cfg).status);
        }

        Some(JData {
            i4: Expr::mul(i4_cof, j.clone()),
            i5: Expr::mul(i5_cof, j.clone()),
            i6: Expr::mul(i6_cof, j.clone()),
            i8,
            k,
            dxk,
            i9: Expr::mul(i9_cof, j.clone()),
            i10: Expr::mul(i10_cof, j.clone()),
            i11: Expr::mul(i11_cof, j.clone()),
            ku: Expr::mul(ku_cof, j.clone()),
            i12: Expr::mul(i12_cof, j.clone()),
            j,
        })
    };

    InvariantReport { scaling, w, i1, i2, i7, j_data, zero_flags }
}

/// Outcome of comparing a report's K against the closed form it must take
/// on u''' = a³(x)u.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KConsistency {
    Consistent,
    Inconsistent,
    /// The comparison could not be decided (K unavailable or the zero test
    /// returned Unknown).
    Undecided,
}

/// For a report computed on f = a³(x)·u, check K ≡ (2aa″ − 3a′²)/a⁴.
pub fn check_k_consistency(report: &InvariantReport, a: &Expr, cfg: &ZeroCfg) -> KConsistency {
    let Some(jd) = &report.j_data else {
        return KConsistency::Undecided;
    };
    let xs = Sym::new(X);
    let da = diff(a, &xs);
    let dda = diff(&da, &xs);
    let closed = Expr::div(
        Expr::sub(
            Expr::mul_all(vec![Expr::int(2), a.clone(), dda]),
            Expr::mul(Expr::int(3), Expr::pow(da, 2)),
        ),
        Expr::pow(a.clone(), 4),
    );
    match decide_zero(&Expr::sub(jd.k.clone(), closed), cfg).status {
        ZeroStatus::Zero => KConsistency::Consistent,
        ZeroStatus::NonZero => KConsistency::Inconsistent,
        ZeroStatus::Unknown => KConsistency::Undecided,
    }
}
