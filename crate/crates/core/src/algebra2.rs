//! Fixed-shape 2×2 complex linear algebra.
//!
//! Everything the monodromy code needs from linear algebra lives here:
//! eigen-analysis with an explicit Jordan/scalar dichotomy, the normalized
//! matrix logarithm (eigenvalue real parts in `[0, 1)`), and a test for
//! simultaneous conjugacy of two pairs of matrices.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub type C64 = Complex64;

/// A column vector of length two.
pub type CVec2 = [C64; 2];

const TWO_PI: f64 = 2.0 * PI;

/// Relative threshold below which two eigenvalues are treated as equal.
pub const EIGEN_MERGE_TOL: f64 = 1e-9;

/// Eigenvalues also merge when `|(a−d)²/4 + bc| ≤ DISCRIMINANT_TOL·(1+‖M‖)²`.
pub const DISCRIMINANT_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("matrix is singular (|det| = {0:e})")]
    Singular(f64),
    #[error("matrix has non-finite entries")]
    NonFinite,
}

/// A 2×2 complex matrix stored row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct CMat2(pub [[C64; 2]; 2]);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

impl CMat2 {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        CMat2([[a, b], [c, d]])
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Self {
        CMat2::new(r(a), r(b), r(c), r(d))
    }

    pub fn identity() -> Self {
        CMat2::scalar(r(1.0))
    }

    pub fn zero() -> Self {
        CMat2::scalar(r(0.0))
    }

    pub fn scalar(s: C64) -> Self {
        CMat2::new(s, r(0.0), r(0.0), s)
    }

    pub fn diag(a: C64, d: C64) -> Self {
        CMat2::new(a, r(0.0), r(0.0), d)
    }

    /// Matrix whose columns are `u` and `v`.
    pub fn from_columns(u: CVec2, v: CVec2) -> Self {
        CMat2::new(u[0], v[0], u[1], v[1])
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.0[i][j]
    }

    pub fn column(&self, j: usize) -> CVec2 {
        [self.0[0][j], self.0[1][j]]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn transpose(&self) -> Self {
        CMat2::new(self.0[0][0], self.0[1][0], self.0[0][1], self.0[1][1])
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        CMat2::new(s * m[0][0], s * m[0][1], s * m[1][0], s * m[1][1])
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Inverse, or `None` when `det` vanishes relative to the entry scale.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        let scale = self.max_norm();
        if !self.is_finite() || det.norm() <= f64::EPSILON * scale * scale || det.norm() == 0.0 {
            return None;
        }
        Some(self.adjugate().scale(det.inv()))
    }

    pub fn adjugate(&self) -> Self {
        let m = &self.0;
        CMat2::new(m[1][1], -m[0][1], -m[1][0], m[0][0])
    }

    pub fn try_inverse(&self) -> Result<Self, AlgebraError> {
        if !self.is_finite() {
            return Err(AlgebraError::NonFinite);
        }
        self.inverse()
            .ok_or_else(|| AlgebraError::Singular(self.det().norm()))
    }

    pub fn apply(&self, v: CVec2) -> CVec2 {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    /// `S · self · S⁻¹`.
    pub fn conjugate_by(&self, s: &CMat2) -> Option<Self> {
        Some(*s * *self * s.inverse()?)
    }

    /// True when the matrix is a multiple of the identity.
    pub fn is_scalar(&self, rel_tol: f64) -> bool {
        let half_trace = self.trace() * 0.5;
        let dev = (*self - CMat2::scalar(half_trace)).max_norm();
        dev <= rel_tol * (1.0 + self.max_norm())
    }

    /// Entrywise comparison relative to the scale of `other`.
    pub fn approx_eq(&self, other: &CMat2, rel_tol: f64) -> bool {
        (*self - *other).max_norm() <= rel_tol * (1.0 + other.max_norm())
    }

    /// Row-major flat view, mostly for serialization.
    pub fn to_flat(&self) -> [C64; 4] {
        [self.0[0][0], self.0[0][1], self.0[1][0], self.0[1][1]]
    }

    pub fn from_flat(v: [C64; 4]) -> Self {
        CMat2::new(v[0], v[1], v[2], v[3])
    }
}

impl fmt::Debug for CMat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.0;
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            m[0][0], m[0][1], m[1][0], m[1][1]
        )
    }
}

impl Mul for CMat2 {
    type Output = CMat2;

    fn mul(self, rhs: CMat2) -> CMat2 {
        let a = &self.0;
        let b = &rhs.0;
        CMat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Add for CMat2 {
    type Output = CMat2;

    fn add(self, rhs: CMat2) -> CMat2 {
        let (a, b) = (self.to_flat(), rhs.to_flat());
        CMat2::from_flat([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]])
    }
}

impl Sub for CMat2 {
    type Output = CMat2;

    fn sub(self, rhs: CMat2) -> CMat2 {
        self + (-rhs)
    }
}

impl Neg for CMat2 {
    type Output = CMat2;

    fn neg(self) -> CMat2 {
        self.scale(r(-1.0))
    }
}

impl Serialize for CMat2 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_flat().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CMat2 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let flat = <[C64; 4]>::deserialize(deserializer)?;
        Ok(CMat2::from_flat(flat))
    }
}

/// Orders complex numbers by real part, then imaginary part.
pub fn lex_cmp(a: &C64, b: &C64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Eigenbasis {
    /// Columns are eigenvectors, in eigenvalue order.
    Diagonal(CMat2),
    /// `(M − λ) generalized = principal`, `(M − λ) principal = 0`.
    Jordan { principal: CVec2, generalized: CVec2 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenData {
    pub eigenvalues: [C64; 2],
    pub diagonalizable: bool,
    pub basis: Eigenbasis,
}

impl EigenData {
    /// Eigenvectors spanning the eigenspaces: two for a diagonalizable
    /// matrix, one for a Jordan block.
    pub fn eigenvectors(&self) -> Vec<CVec2> {
        match self.basis {
            Eigenbasis::Diagonal(v) => vec![v.column(0), v.column(1)],
            Eigenbasis::Jordan { principal, .. } => vec![principal],
        }
    }
}

fn vec_norm(v: &CVec2) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

fn normalize(v: CVec2) -> CVec2 {
    let n = vec_norm(&v);
    [v[0] / n, v[1] / n]
}

/// Eigenvector of `m` for an eigenvalue `lambda` known to be simple.
fn eigenvector(m: &CMat2, lambda: C64) -> CVec2 {
    let a = m.0;
    // Two candidate kernel vectors of M − λ, one per row; keep the larger.
    let u = [a[0][1], lambda - a[0][0]];
    let v = [lambda - a[1][1], a[1][0]];
    if vec_norm(&u) >= vec_norm(&v) {
        normalize(u)
    } else {
        normalize(v)
    }
}

/// Eigen-analysis with tolerance `EIGEN_MERGE_TOL`.
pub fn eig2(m: &CMat2) -> EigenData {
    eig2_with_tol(m, EIGEN_MERGE_TOL)
}

/// Eigen-analysis of a 2×2 matrix.
///
/// Eigenvalues are returned in lexicographic `(Re, Im)` order. When they
/// coincide within `merge_tol · (1 + |λ₁| + |λ₂|)`, or the discriminant is
/// below [`DISCRIMINANT_TOL`], the residual `M − λI`
/// decides between a scalar matrix (diagonalizable, identity basis) and a
/// Jordan block.
pub fn eig2_with_tol(m: &CMat2, merge_tol: f64) -> EigenData {
    let a = m.0;
    let half_trace = m.trace() * 0.5;
    let delta = (a[0][0] - a[1][1]) * 0.5;
    let s = (delta * delta + a[0][1] * a[1][0]).sqrt();
    let mut ev = [half_trace - s, half_trace + s];
    ev.sort_by(lex_cmp);

    let gap = (ev[0] - ev[1]).norm();
    let scale = 1.0 + m.max_norm();
    // A rounding-level perturbation of a Jordan block splits its eigenvalue
    // by about √ε·‖M‖, far above any gap threshold; the discriminant moves
    // only linearly.
    let near_double = (s * s).norm() <= DISCRIMINANT_TOL * scale * scale;
    if gap <= merge_tol * (1.0 + ev[0].norm() + ev[1].norm()) || near_double {
        let nil = *m - CMat2::scalar(half_trace);
        if nil.max_norm() <= merge_tol * (1.0 + m.max_norm()) {
            return EigenData {
                eigenvalues: [half_trace, half_trace],
                diagonalizable: true,
                basis: Eigenbasis::Diagonal(CMat2::identity()),
            };
        }
        // Rank-one nilpotent part: its range is its kernel.
        let (col, k) = if vec_norm(&nil.column(0)) >= vec_norm(&nil.column(1)) {
            (nil.column(0), 0)
        } else {
            (nil.column(1), 1)
        };
        let mut generalized = [r(0.0), r(0.0)];
        generalized[k] = r(1.0);
        return EigenData {
            eigenvalues: [half_trace, half_trace],
            diagonalizable: false,
            basis: Eigenbasis::Jordan {
                principal: col,
                generalized,
            },
        };
    }

    let v0 = eigenvector(m, ev[0]);
    let v1 = eigenvector(m, ev[1]);
    EigenData {
        eigenvalues: ev,
        diagonalizable: true,
        basis: Eigenbasis::Diagonal(CMat2::from_columns(v0, v1)),
    }
}

/// `log(λ) / (2πi)` on the branch `arg λ ∈ [0, 2π)`, so the real part lies
/// in `[0, 1)`.
pub fn normalized_exponent(lambda: C64) -> C64 {
    let mut arg = lambda.im.atan2(lambda.re);
    if arg < 0.0 {
        arg += TWO_PI;
    }
    if arg >= TWO_PI {
        arg -= TWO_PI;
    }
    c(arg / TWO_PI, -lambda.norm().ln() / TWO_PI)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizedLog {
    pub e: CMat2,
    /// Eigenvalues of `e`, paired with the eigenvalue order of the input.
    pub rho: [C64; 2],
}

/// Normalized logarithm: `E` with `exp(2πi E) = G` and `Re ρ ∈ [0, 1)` for
/// every eigenvalue `ρ` of `E`.
pub fn normalized_log(g: &CMat2) -> Result<NormalizedLog, AlgebraError> {
    if !g.is_finite() {
        return Err(AlgebraError::NonFinite);
    }
    let det = g.det().norm();
    if det == 0.0 || det <= f64::EPSILON * g.max_norm().powi(2) {
        return Err(AlgebraError::Singular(det));
    }
    let eig = eig2(g);
    let [l1, l2] = eig.eigenvalues;
    let f1 = normalized_exponent(l1);
    let f2 = normalized_exponent(l2);

    let e = if l1 == l2 {
        let n = *g - CMat2::scalar(l1);
        if eig.diagonalizable {
            CMat2::scalar(f1)
        } else {
            // log(λ + N) = log λ + N/λ when N² = 0.
            CMat2::scalar(f1) + n.scale((c(0.0, TWO_PI) * l1).inv())
        }
    } else {
        // Sylvester interpolation through the two eigenvalues.
        let id = CMat2::identity();
        let p1 = (*g - id.scale(l2)).scale(f1);
        let p2 = (*g - id.scale(l1)).scale(f2);
        (p1 - p2).scale((l1 - l2).inv())
    };
    Ok(NormalizedLog { e, rho: [f1, f2] })
}

/// Finds an invertible `S` with `S·A_k·S⁻¹ = B_k` for `k = 1, 2`.
///
/// The linear system `S·A_k − B_k·S = 0` (eight equations in four unknowns)
/// is solved for its numerical null space; an invertible element of that
/// space is then checked entrywise against `tol` (relative to the scale of
/// the `B_k`). The returned matrix is scaled so its largest entry is 1.
pub fn simultaneous_conjugator(
    a1: &CMat2,
    a2: &CMat2,
    b1: &CMat2,
    b2: &CMat2,
    tol: f64,
) -> Option<CMat2> {
    let pairs = [(a1, b1), (a2, b2)];
    let fits = |s: &CMat2| -> bool {
        let Some(inv) = s.inverse() else {
            return false;
        };
        let cond = s.frobenius_norm().powi(2) / s.det().norm();
        // Both directions: an ill-conditioned S can squeeze a Jordan block
        // onto a scalar in one direction only.
        cond <= MAX_CONJUGATOR_CONDITION
            && pairs
                .iter()
                .all(|(a, b)| (*s * **a * inv).approx_eq(b, tol) && (inv * **b * *s).approx_eq(a, tol))
    };

    if fits(&CMat2::identity()) {
        return Some(CMat2::identity());
    }

    let mut sys = DMatrix::<C64>::zeros(8, 4);
    for (k, (a, b)) in pairs.iter().enumerate() {
        let w = 1.0 / (1.0 + a.max_norm() + b.max_norm());
        for i in 0..2 {
            for j in 0..2 {
                let row = 4 * k + 2 * i + j;
                for l in 0..2 {
                    // (S A)_{ij} = Σ_l s_{il} A_{lj}
                    sys[(row, 2 * i + l)] += a.at(l, j) * w;
                    // (B S)_{ij} = Σ_l B_{il} s_{lj}
                    sys[(row, 2 * l + j)] -= b.at(i, l) * w;
                }
            }
        }
    }
    let svd = sys.svd(false, true);
    let v_t = svd.v_t?;
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]));
    let null: Vec<CMat2> = order
        .iter()
        .filter(|&&k| svd.singular_values[k] <= tol)
        .map(|&k| {
            // Rows of Vᴴ are conjugated right singular vectors.
            let row = v_t.row(k);
            CMat2::from_flat([row[0].conj(), row[1].conj(), row[2].conj(), row[3].conj()])
        })
        .collect();
    if null.is_empty() {
        return None;
    }

    let best = best_invertible_combination(&null)?;
    let best = normalize_max_entry(&best);
    fits(&best).then_some(best)
}

const MAX_CONJUGATOR_CONDITION: f64 = 1e10;

/// Picks the combination of the basis with the best-conditioned determinant.
fn best_invertible_combination(basis: &[CMat2]) -> Option<CMat2> {
    let mut trials: Vec<Vec<C64>> = Vec::new();
    for k in 0..basis.len() {
        let mut unit = vec![r(0.0); basis.len()];
        unit[k] = r(1.0);
        trials.push(unit);
    }
    // A few fixed generic combinations; the determinant is a quadratic form
    // on the null space, so a generic point avoids its zero set.
    const GOLDEN: f64 = 0.618_033_988_749_894_9;
    for t in 1..=6 {
        trials.push(
            (0..basis.len())
                .map(|k| {
                    let phase = TWO_PI * GOLDEN * ((t * (k + 1)) as f64);
                    C64::from_polar(1.0 + 0.25 * k as f64, phase)
                })
                .collect(),
        );
    }
    trials
        .into_iter()
        .map(|coef| {
            basis
                .iter()
                .zip(coef)
                .fold(CMat2::zero(), |acc, (m, w)| acc + m.scale(w))
        })
        .filter(|s| s.frobenius_norm() > 0.0)
        .max_by(|x, y| {
            let qx = x.det().norm() / x.frobenius_norm().powi(2);
            let qy = y.det().norm() / y.frobenius_norm().powi(2);
            qx.total_cmp(&qy)
        })
}

fn normalize_max_entry(s: &CMat2) -> CMat2 {
    let flat = s.to_flat();
    let pivot = flat
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(r(1.0));
    s.scale(pivot.inv())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn eig2_diagonal_input() {
        let e = eig2(&CMat2::diag(r(3.0), r(2.0)));
        assert!(e.diagonalizable);
        assert_eq!(e.eigenvalues, [r(2.0), r(3.0)]);
    }

    #[test]
    fn eig2_jordan_block() {
        let e = eig2(&CMat2::from_real(1.0, 1.0, 0.0, 1.0));
        assert!(!e.diagonalizable);
        assert_eq!(e.eigenvalues, [r(1.0), r(1.0)]);
        let Eigenbasis::Jordan { principal, .. } = e.basis else {
            panic!("expected Jordan basis");
        };
        assert!(principal[1].norm() < 1e-15);
    }

    #[test]
    fn eig2_involution_and_scalar() {
        let e = eig2(&CMat2::from_real(0.0, 1.0, 1.0, 0.0));
        assert!(e.diagonalizable);
        assert!(close(e.eigenvalues[0], r(-1.0), 1e-15));
        assert!(close(e.eigenvalues[1], r(1.0), 1e-15));

        let s = eig2(&CMat2::scalar(c(0.0, 2.0)));
        assert!(s.diagonalizable);
        assert_eq!(s.basis, Eigenbasis::Diagonal(CMat2::identity()));
    }

    #[test]
    fn normalized_log_identity_and_minus_identity() {
        let l = normalized_log(&CMat2::identity()).unwrap();
        assert_eq!(l.e, CMat2::zero());
        let l = normalized_log(&CMat2::scalar(r(-1.0))).unwrap();
        assert!(l.e.approx_eq(&CMat2::scalar(r(0.5)), 1e-15));
        assert!(close(l.rho[0], r(0.5), 1e-15));
    }

    #[test]
    fn normalized_log_rejects_singular() {
        let err = normalized_log(&CMat2::from_real(1.0, 2.0, 2.0, 4.0)).unwrap_err();
        assert!(matches!(err, AlgebraError::Singular(_)));
    }

    #[test]
    fn branch_keeps_real_part_in_unit_interval() {
        for lambda in [r(1.0), c(1.0, -1e-300), c(1.0, 1e-12), r(-1.0), c(0.0, -3.0)] {
            let rho = normalized_exponent(lambda);
            assert!((0.0..1.0).contains(&rho.re), "{lambda} -> {rho}");
        }
    }

    #[test]
    fn conjugator_none_across_jordan_types() {
        let j = CMat2::from_real(1.0, 1.0, 0.0, 1.0);
        let id = CMat2::identity();
        assert!(simultaneous_conjugator(&j, &id, &id, &id, 1e-9).is_none());
    }

    #[test]
    fn conjugator_identity_for_identical_pairs() {
        let id = CMat2::identity();
        assert_eq!(
            simultaneous_conjugator(&id, &id, &id, &id, 1e-9),
            Some(CMat2::identity())
        );
    }
}
