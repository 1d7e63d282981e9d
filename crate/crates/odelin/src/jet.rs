//! Jet-space calculus for u''' = f(x, u, p, q), where p and q stand for u'
//! and u''.
//!
//! The total derivative along solutions, D_x = ∂x + p ∂u + q ∂p + f ∂q,
//! turns point transformations (x̄, ū) = (φ(x,u), ψ(x,u)) into prolonged
//! maps on derivatives and lets a claimed equivalence between two
//! equations be checked exactly in source coordinates, without inverting
//! the transformation.

use crate::expr::zero::{find_nonzero_witness, Witness};
use crate::expr::{decide_zero, diff, is_zero, substitute, Expr, ZeroCfg, ZeroStatus};
use crate::sym::{Sym, P, Q, U, X};
use std::collections::BTreeMap;

/// An ODE u''' = f plus its parameter symbols and an optional factor whose
/// zero set is excluded when sampling (singular locus of the equation or
/// its transformations).
#[derive(Debug, Clone)]
pub struct JetContext {
    pub f: Expr,
    pub params: Vec<Sym>,
    pub singular_locus_hint: Option<Expr>,
}

impl JetContext {
    /// The right-hand side is flattened to one quotient up front: every
    /// quantity in the theory is built from f by differentiation and
    /// division, and a pre-cancelled f keeps all of them small.
    pub fn new(f: Expr, params: Vec<Sym>) -> Self {
        JetContext {
            f: crate::expr::rational_simplify(&f),
            params,
            singular_locus_hint: None,
        }
    }

    pub fn with_singular_locus(mut self, hint: Expr) -> Self {
        self.singular_locus_hint = Some(hint);
        self
    }
}

/// Failure modes of transformation construction and prolongation.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JetError {
    #[error("transformation components must depend on x and u only")]
    DependsOnDerivatives,
    #[error("transformation jacobian vanishes identically (not invertible)")]
    SingularJacobian,
    #[error("degenerate transformation: D_x(phi) vanishes identically")]
    DegenerateTransformation,
}

/// A point transformation x̄ = φ(x,u), ū = ψ(x,u) with its jacobian
/// φ_x ψ_u − φ_u ψ_x (nonzero for invertibility).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointTransformation {
    pub phi: Expr,
    pub psi: Expr,
    pub jacobian: Expr,
}

impl PointTransformation {
    /// Validate and build; rejects components involving p or q and
    /// identically-singular jacobians.
    pub fn new(phi: Expr, psi: Expr) -> Result<Self, JetError> {
        let derivs = [Sym::new(P), Sym::new(Q)];
        if phi.depends_on_any(&derivs) || psi.depends_on_any(&derivs) {
            return Err(JetError::DependsOnDerivatives);
        }
        let (xs, us) = (Sym::new(X), Sym::new(U));
        let jacobian = Expr::sub(
            Expr::mul(diff(&phi, &xs), diff(&psi, &us)),
            Expr::mul(diff(&phi, &us), diff(&psi, &xs)),
        );
        if is_zero(&jacobian, &ZeroCfg::default()) == ZeroStatus::Zero {
            return Err(JetError::SingularJacobian);
        }
        Ok(PointTransformation { phi, psi, jacobian })
    }

    /// The identity map (x, u).
    pub fn identity() -> Self {
        PointTransformation {
            phi: Expr::sym(X),
            psi: Expr::sym(U),
            jacobian: Expr::one(),
        }
    }

    /// Composition (outer ∘ self): apply self first, then outer;
    /// realized by substituting this map's components into the outer one.
    pub fn then(&self, outer: &PointTransformation) -> Result<Self, JetError> {
        let mut map = BTreeMap::new();
        map.insert(Sym::new(X), self.phi.clone());
        map.insert(Sym::new(U), self.psi.clone());
        PointTransformation::new(
            substitute(&outer.phi, &map),
            substitute(&outer.psi, &map),
        )
    }
}

/// n-fold total derivative D_x^n e with D_x = ∂x + p ∂u + q ∂p + f ∂q.
pub fn total_derivative(ctx: &JetContext, e: &Expr, n: u32) -> Expr {
    let (xs, us, ps, qs) = (Sym::new(X), Sym::new(U), Sym::new(P), Sym::new(Q));
    let mut acc = e.clone();
    for _ in 0..n {
        acc = Expr::add_all(vec![
            diff(&acc, &xs),
            Expr::mul(Expr::sym(P), diff(&acc, &us)),
            Expr::mul(Expr::sym(Q), diff(&acc, &ps)),
            Expr::mul(ctx.f.clone(), diff(&acc, &qs)),
        ]);
    }
    acc
}

/// First and second prolonged derivatives of a transformation:
/// ū' = D_xψ / D_xφ and ū'' = D_x(ū') / D_xφ, as functions on the jet.
pub fn prolong(ctx: &JetContext, t: &PointTransformation) -> Result<(Expr, Expr), JetError> {
    let dphi = total_derivative(ctx, &t.phi, 1);
    if is_zero(&dphi, &ZeroCfg::default()) == ZeroStatus::Zero {
        return Err(JetError::DegenerateTransformation);
    }
    let dpsi = total_derivative(ctx, &t.psi, 1);
    let ubar1 = Expr::div(dpsi, dphi.clone());
    let ubar2 = Expr::div(total_derivative(ctx, &ubar1, 1), dphi);
    Ok((ubar1, ubar2))
}

/// Outcome of checking that a transformation maps u''' = f to ū''' = f̄.
#[derive(Debug, Clone)]
pub enum VerifyOutcome {
    /// The pullback identity holds (exactly or with overwhelming sampling
    /// evidence).
    Verified,
    /// The identity fails; the witness is a sample point off the singular
    /// locus where the residual is visibly nonzero.
    Refuted(Option<Witness>),
    /// The residual could not be decided.
    Unknown,
}

/// Check R = D_x(ū'') − f̄(φ, ψ, ū', ū'')·D_xφ ≡ 0. The target f̄ is
/// written in the same four jet symbols, read as the barred variables.
pub fn verify_transformation(
    ctx: &JetContext,
    t: &PointTransformation,
    fbar: &Expr,
    cfg: &ZeroCfg,
) -> Result<VerifyOutcome, JetError> {
    let (ubar1, ubar2) = prolong(ctx, t)?;
    let dphi = total_derivative(ctx, &t.phi, 1);
    let mut sigma = BTreeMap::new();
    sigma.insert(Sym::new(X), t.phi.clone());
    sigma.insert(Sym::new(U), t.psi.clone());
    sigma.insert(Sym::new(P), ubar1.clone());
    sigma.insert(Sym::new(Q), ubar2.clone());
    let pulled = substitute(fbar, &sigma);
    let residual = Expr::sub(total_derivative(ctx, &ubar2, 1), Expr::mul(pulled, dphi));
    // Multiplying by the locus factor keeps Zero/NonZero verdicts intact
    // where the factor is nonzero, and forces any witness off the excluded
    // set (the product is only visibly nonzero where both factors are).
    let probe = match &ctx.singular_locus_hint {
        Some(h) => Expr::mul(residual.clone(), h.clone()),
        None => residual.clone(),
    };
    let decision = decide_zero(&probe, cfg);
    Ok(match decision.status {
        ZeroStatus::Zero => VerifyOutcome::Verified,
        ZeroStatus::NonZero => {
            let witness = decision
                .witness
                .or_else(|| find_nonzero_witness(&probe, cfg));
            VerifyOutcome::Refuted(witness)
        }
        ZeroStatus::Unknown => VerifyOutcome::Unknown,
    })
}
