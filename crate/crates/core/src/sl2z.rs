//! Integrality of hypergeometric monodromy.
//!
//! For `F(α, β; γ)` on `{0, 1, ∞}` the monodromy lies in SL(2, C) iff `γ`
//! and `α + β` are integers, and is then conjugate into SL(2, Z) iff
//! moreover `k = e^{2πiα} + e^{2πiβ} = tr G_∞` is an integer. The local
//! monodromies at 0 and 1 are unipotent in that case and reduce to the
//! normal forms `G₀ = [[1, 0], [1, 1]]`, `G₁ = [[1, b], [0, 1]]` with
//! `b = tr G_∞ − 2`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra2::{normalized_exponent, CMat2, C64};
use crate::equation::{HypergeometricParams, RiemannEquation};
use crate::representation::MonodromyRep;

/// Integer-distance tolerance for exact parameters.
pub const INTEGER_TOL: f64 = 1e-9;

/// Integer-distance tolerance for quantities read off numerical monodromy.
pub const NUMERIC_INTEGER_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Sl2zError {
    #[error("generators are not in a unipotent triangular normal form")]
    ShapeMismatch,
}

/// `|z − n|` for the nearest integer `n` to `Re z`.
pub fn integer_distance(z: C64) -> f64 {
    (z - z.re.round()).norm()
}

fn nearest_integer(z: C64) -> i64 {
    z.re.round() as i64
}

/// `e^{2πiα} + e^{2πiβ}`, the trace of the monodromy at infinity.
pub fn trace_at_infinity(h: &HypergeometricParams) -> C64 {
    let e = |x: C64| (C64::new(0.0, TAU) * x).exp();
    e(h.alpha) + e(h.beta)
}

pub fn sl2c_condition(h: &HypergeometricParams, tol: f64) -> bool {
    integer_distance(h.gamma) <= tol && integer_distance(h.alpha + h.beta) <= tol
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sl2zVerdict {
    pub in_sl2c: bool,
    pub in_sl2z: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<i64>,
    /// `tr G_∞ − 2`.
    pub b: C64,
    /// Distance of `tr G_∞` from the nearest integer.
    pub integer_defect: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjugator: Option<CMat2>,
}

pub fn sl2z_criterion(h: &HypergeometricParams, tol: f64) -> Sl2zVerdict {
    let trace = trace_at_infinity(h);
    let in_sl2c = sl2c_condition(h, tol);
    let integer_defect = integer_distance(trace);
    let in_sl2z = in_sl2c && integer_defect <= tol;
    Sl2zVerdict {
        in_sl2c,
        in_sl2z,
        k: in_sl2z.then(|| nearest_integer(trace)),
        b: trace - 2.0,
        integer_defect,
        conjugator: None,
    }
}

/// The criterion, with the conjugator taking a numerically computed
/// monodromy of the equation to integer normal form. The conjugator is
/// attached only when the conjugated generators are integral within
/// [`NUMERIC_INTEGER_TOL`].
pub fn sl2z_criterion_with_monodromy(h: &HypergeometricParams, rep: &MonodromyRep, tol: f64) -> Sl2zVerdict {
    let mut v = sl2z_criterion(h, tol);
    if v.in_sl2z {
        v.conjugator = reduce_to_normal_form(rep)
            .ok()
            .flatten()
            .filter(|s| conjugates_to_integers(rep, s, NUMERIC_INTEGER_TOL));
    }
    v
}

/// Whether every entry of `S·G_i·S⁻¹` is within `tol` of an integer.
pub fn conjugates_to_integers(rep: &MonodromyRep, s: &CMat2, tol: f64) -> bool {
    let Some(inv) = s.inverse() else {
        return false;
    };
    rep.g
        .iter()
        .all(|g| (*s * *g * inv).to_flat().iter().all(|&x| integer_distance(x) <= tol))
}

fn is_identity(m: &CMat2, tol: f64) -> bool {
    m.approx_eq(&CMat2::identity(), tol)
}

/// Integer conjugator for generators already in one of the triangular
/// normal forms:
///
/// - reducible: `G₀ = [[1, c], [0, 1]]`, `G₁ = I`; returns `diag(1/c, 1)`;
/// - irreducible: `G₀ = [[1, 0], [d, 1]]`, `G₁ = [[1, c], [0, 1]]`; returns
///   `diag(d, 1)` when `b = cd` is an integer, since `b` is a conjugation
///   invariant that must be integral.
pub fn integer_conjugator(rep: &MonodromyRep, tol: f64) -> Result<Option<CMat2>, Sl2zError> {
    let (g0, g1) = (rep.g[0], rep.g[1]);
    let one = C64::new(1.0, 0.0);
    let unit_diag = |m: &CMat2| (m.at(0, 0) - one).norm() <= tol && (m.at(1, 1) - one).norm() <= tol;
    let small = |z: C64| z.norm() <= tol;

    if !(unit_diag(&g0) && unit_diag(&g1)) {
        return Err(Sl2zError::ShapeMismatch);
    }
    if is_identity(&g1, tol) && small(g0.at(1, 0)) {
        let c = g0.at(0, 1);
        if small(c) {
            return Ok(Some(CMat2::identity()));
        }
        return Ok(Some(CMat2::diag(1.0 / c, one)));
    }
    if small(g0.at(0, 1)) && small(g1.at(1, 0)) && !small(g0.at(1, 0)) && !small(g1.at(0, 1)) {
        let d = g0.at(1, 0);
        let c = g1.at(0, 1);
        let b = c * d;
        return Ok((integer_distance(b) <= tol).then(|| CMat2::diag(d, one)));
    }
    Err(Sl2zError::ShapeMismatch)
}

/// Null vector of `G − I` for a unipotent, non-identity `G`.
fn fixed_vector(g: &CMat2) -> [C64; 2] {
    let n = *g - CMat2::identity();
    let (r0, r1) = ([n.at(0, 0), n.at(0, 1)], [n.at(1, 0), n.at(1, 1)]);
    let row = if r0[0].norm() + r0[1].norm() >= r1[0].norm() + r1[1].norm() {
        r0
    } else {
        r1
    };
    [-row[1], row[0]]
}

/// Conjugator taking a representation with unipotent `G₀`, `G₁` to one of
/// the triangular normal forms, composed with [`integer_conjugator`].
/// `Ok(None)` when the normal form exists but is not integral.
pub fn reduce_to_normal_form(rep: &MonodromyRep) -> Result<Option<CMat2>, Sl2zError> {
    let tol = NUMERIC_INTEGER_TOL;
    let unipotent = |g: &CMat2| {
        (g.trace() - 2.0).norm() <= tol * (1.0 + g.max_norm()) && (g.det() - 1.0).norm() <= tol
    };
    if !(unipotent(&rep.g[0]) && unipotent(&rep.g[1])) {
        return Err(Sl2zError::ShapeMismatch);
    }
    let id0 = is_identity(&rep.g[0], tol);
    let id1 = is_identity(&rep.g[1], tol);
    let p = match (id0, id1) {
        (true, true) => return Ok(Some(CMat2::identity())),
        (false, true) => {
            let v = fixed_vector(&rep.g[0]);
            CMat2::from_columns(v, [-v[1].conj(), v[0].conj()])
        }
        (true, false) => {
            // Swap roles: put G₁'s invariant line first and conjugate G₁
            // itself to upper-unipotent form.
            let v = fixed_vector(&rep.g[1]);
            let p = CMat2::from_columns(v, [-v[1].conj(), v[0].conj()]);
            let p_inv = p.inverse().ok_or(Sl2zError::ShapeMismatch)?;
            let g1 = p_inv * rep.g[1] * p;
            let c = g1.at(0, 1);
            if c.norm() <= tol {
                return Err(Sl2zError::ShapeMismatch);
            }
            return Ok(Some(CMat2::diag(1.0 / c, C64::new(1.0, 0.0)) * p_inv));
        }
        (false, false) => CMat2::from_columns(fixed_vector(&rep.g[1]), fixed_vector(&rep.g[0])),
    };
    let p_inv = p.inverse().ok_or(Sl2zError::ShapeMismatch)?;
    let scale = p.frobenius_norm() * p_inv.frobenius_norm();
    if scale > 1e8 {
        return Err(Sl2zError::ShapeMismatch);
    }
    let normal = MonodromyRep {
        divisor: rep.divisor,
        g: rep.g.map(|g| p_inv * g * p),
    };
    Ok(integer_conjugator(&normal, tol)?.map(|s| s * p_inv))
}

/// A member of the integral family: `α = log((k + √(k² − 4))/2) / 2πi`
/// with the principal square root and `arg ∈ [0, 2π)`, `β = −α`, `γ = l`.
///
/// For `|k| < 2`, `α` is real in `(0, 1/2)`. For `k ≥ 3` it is purely
/// imaginary; for `k ≤ −3` the root is a negative real and `α = 1/2 + it`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub k: i64,
    pub l: i64,
    #[serde(flatten)]
    pub params: HypergeometricParams,
    pub equation: RiemannEquation,
}

pub fn enumerate_family(k: i64, l: i64) -> FamilyMember {
    let kc = C64::new(k as f64, 0.0);
    // Built from a real discriminant so the imaginary part is +0 and the
    // principal root of a negative number is +i·√|·|.
    let root = C64::new((k * k - 4) as f64, 0.0).sqrt();
    let alpha = normalized_exponent((kc + root) / 2.0);
    let params = HypergeometricParams::new(alpha, -alpha, C64::new(l as f64, 0.0));
    FamilyMember {
        k,
        l,
        params,
        equation: params.equation(),
    }
}
