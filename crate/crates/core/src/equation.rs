//! Riemann equations: second-order Fuchsian equations with three singular
//! points, determined by their divisor and exponent table.
//!
//! Coefficients are kept in structured partial-fraction form:
//!
//! ```text
//! p(z) = Σ r_k / (z − a_k)
//! q(z) = (Σ c_k / (z − a_k) + c_∞) / Π (z − a_k)
//! ```
//!
//! With all three points finite, `r_i = 1 − β_i¹ − β_i²`,
//! `c_i = β_i¹β_i² Π_{j≠i}(a_i − a_j)` and `c_∞ = 0`. With a point at
//! infinity the product runs over the two finite points and
//! `c_∞ = β_∞¹β_∞²`.
//!
//! Exponents at infinity are the roots of `β(β+1) − p₁β + q₂ = 0` where
//! `p ~ p₁/z` and `q ~ q₂/z²`, i.e. local solutions behave like `z^{−β}`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::algebra2::{lex_cmp, r, C64};
use crate::representation::{Divisor, Point, RepError};

/// Tolerance on the Fuchs relation `Σβ = 1`.
pub const FUCHS_TOL: f64 = 1e-9;

/// Tolerance for treating an exponent difference as an integer.
pub const RESONANCE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquationError {
    #[error("exponent sum is {0}, expected 1")]
    FuchsViolation(C64),
    #[error(transparent)]
    Divisor(#[from] RepError),
    #[error("point {0} is not a singular point of the equation")]
    PointNotInDivisor(Point),
    #[error("divisor point {0} is at infinity; a finite point is required")]
    InfinitePoint(usize),
    #[error("shear must compensate at a different point than it shifts")]
    SamePoint,
}

/// The six exponents `β_i^j`, one pair per divisor point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExponentTable {
    pub beta: [[C64; 2]; 3],
}

/// Integer part and fractional part of an exponent, `β = φ + ρ`,
/// `Re ρ ∈ [0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentSplit {
    pub valuation: i64,
    pub fractional: C64,
}

impl ExponentTable {
    pub fn new(beta: [[C64; 2]; 3]) -> Self {
        ExponentTable { beta }
    }

    pub fn from_real(beta: [[f64; 2]; 3]) -> Self {
        ExponentTable {
            beta: beta.map(|row| row.map(r)),
        }
    }

    pub fn pair(&self, i: usize) -> [C64; 2] {
        self.beta[i]
    }

    pub fn split(&self, i: usize, j: usize) -> ExponentSplit {
        let b = self.beta[i][j];
        let valuation = b.re.floor();
        ExponentSplit {
            valuation: valuation as i64,
            fractional: b - valuation,
        }
    }

    /// Whether the two exponents at point `i` differ by an integer.
    pub fn is_resonant_at(&self, i: usize) -> bool {
        let d = self.beta[i][0] - self.beta[i][1];
        d.im.abs() <= RESONANCE_TOL && (d.re - d.re.round()).abs() <= RESONANCE_TOL
    }

    pub fn resonant(&self) -> bool {
        (0..3).any(|i| self.is_resonant_at(i))
    }
}

/// `Σ_{i,j} β_i^j`.
pub fn fuchs_sum(t: &ExponentTable) -> C64 {
    t.beta.iter().flatten().sum()
}

/// The Fuchs relation for a Riemann equation: the exponent sum is 1.
pub fn satisfies_fuchs(t: &ExponentTable, tol: f64) -> bool {
    (fuchs_sum(t) - 1.0).norm() <= tol
}

/// `coeff / (z − pole)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplePole {
    pub pole: C64,
    pub coeff: C64,
}

/// `p(z) = Σ coeff / (z − pole)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PCoefficient {
    pub terms: Vec<SimplePole>,
}

impl PCoefficient {
    pub fn eval(&self, z: C64) -> C64 {
        self.terms.iter().map(|t| t.coeff / (z - t.pole)).sum()
    }

    /// Sum of residues, the coefficient of `1/z` at infinity.
    pub fn residue_sum(&self) -> C64 {
        self.terms.iter().map(|t| t.coeff).sum()
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.terms.iter().all(|t| t.coeff.norm() <= tol)
    }
}

/// `q(z) = (Σ coeff / (z − pole) + constant) / Π (z − d)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QCoefficient {
    pub numerator: Vec<SimplePole>,
    pub constant: C64,
    pub denominator: Vec<C64>,
}

impl QCoefficient {
    pub fn eval(&self, z: C64) -> C64 {
        let num: C64 = self
            .numerator
            .iter()
            .map(|t| t.coeff / (z - t.pole))
            .sum::<C64>()
            + self.constant;
        let den: C64 = self.denominator.iter().map(|d| z - d).product();
        num / den
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RiemannEquation {
    pub divisor: Divisor,
    pub exponents: ExponentTable,
    pub p: PCoefficient,
    pub q: QCoefficient,
}

fn same(a: C64, b: C64) -> bool {
    (a - b).norm() <= 1e-12 * (1.0 + a.norm())
}

impl RiemannEquation {
    pub fn p_at(&self, z: C64) -> C64 {
        self.p.eval(z)
    }

    pub fn q_at(&self, z: C64) -> C64 {
        self.q.eval(z)
    }

    pub fn resonant(&self) -> bool {
        self.exponents.resonant()
    }

    /// Leading Laurent coefficients `(p_{−1}, q_{−2})` at a finite point.
    pub fn laurent_leading(&self, a: C64) -> (C64, C64) {
        let p_res: C64 = self
            .p
            .terms
            .iter()
            .filter(|t| same(t.pole, a))
            .map(|t| t.coeff)
            .sum();
        let double = self.q.denominator.iter().any(|&d| same(d, a));
        let q_lead = if double {
            let c_a: C64 = self
                .q
                .numerator
                .iter()
                .filter(|t| same(t.pole, a))
                .map(|t| t.coeff)
                .sum();
            let rest: C64 = self
                .q
                .denominator
                .iter()
                .filter(|&&d| !same(d, a))
                .map(|&d| a - d)
                .product();
            c_a / rest
        } else {
            r(0.0)
        };
        (p_res, q_lead)
    }

    /// `(p₁, q₂)` with `p ~ p₁/z`, `q ~ q₂/z²` at infinity.
    pub fn infinity_leading(&self) -> (C64, C64) {
        let p1 = self.p.residue_sum();
        let q2 = match self.q.denominator.len() {
            0 => {
                // q = Σ c/(z − a) + constant; only the 1/z part could
                // contribute, and it is O(1/z) rather than O(1/z²).
                r(0.0)
            }
            1 => self.q.numerator.iter().map(|t| t.coeff).sum::<C64>(),
            2 => self.q.constant,
            _ => r(0.0),
        };
        (p1, q2)
    }
}

fn sorted_roots(b: C64, c0: C64) -> [C64; 2] {
    // β² + bβ + c0 = 0
    let disc = (b * b - c0 * 4.0).sqrt();
    let mut roots = [(-b - disc) * 0.5, (-b + disc) * 0.5];
    // Recompute the smaller-magnitude root from the product to avoid
    // cancellation.
    let (big, small) = if roots[0].norm() >= roots[1].norm() { (0, 1) } else { (1, 0) };
    if roots[big].norm() > 0.0 {
        roots[small] = c0 / roots[big];
    }
    roots.sort_by(lex_cmp);
    roots
}

/// Local exponents at any point of the sphere, singular or not.
pub fn local_exponents(eq: &RiemannEquation, point: &Point) -> [C64; 2] {
    match point {
        Point::Finite(a) => {
            let (p, q) = eq.laurent_leading(*a);
            sorted_roots(p - 1.0, q)
        }
        Point::Infinity => {
            let (p1, q2) = eq.infinity_leading();
            sorted_roots(1.0 - p1, q2)
        }
    }
}

/// Roots of the indicial equation at a divisor point, as a sorted pair.
pub fn indicial_exponents(eq: &RiemannEquation, point: &Point) -> Result<[C64; 2], EquationError> {
    eq.divisor
        .index_of(point)
        .ok_or(EquationError::PointNotInDivisor(*point))?;
    Ok(local_exponents(eq, point))
}

/// Assembles the coefficients of the Riemann equation with the given
/// divisor and exponents.
pub fn build_equation(divisor: Divisor, t: ExponentTable) -> Result<RiemannEquation, EquationError> {
    let sum = fuchs_sum(&t);
    if (sum - 1.0).norm() > FUCHS_TOL {
        return Err(EquationError::FuchsViolation(sum));
    }
    let finite = divisor.finite_points();
    let pair_sum = |i: usize| t.beta[i][0] + t.beta[i][1];
    let pair_prod = |i: usize| t.beta[i][0] * t.beta[i][1];

    let p = PCoefficient {
        terms: finite
            .iter()
            .map(|&(i, a)| SimplePole {
                pole: a,
                coeff: 1.0 - pair_sum(i),
            })
            .collect(),
    };

    let numerator = finite
        .iter()
        .map(|&(i, a)| {
            let others: C64 = finite
                .iter()
                .filter(|&&(j, _)| j != i)
                .map(|&(_, b)| a - b)
                .product();
            SimplePole {
                pole: a,
                coeff: pair_prod(i) * others,
            }
        })
        .collect();
    let constant = match divisor.infinity_index() {
        Some(k) => pair_prod(k),
        None => r(0.0),
    };
    let q = QCoefficient {
        numerator,
        constant,
        denominator: finite.iter().map(|&(_, a)| a).collect(),
    };

    Ok(RiemannEquation {
        divisor,
        exponents: t,
        p,
        q,
    })
}

/// An equation has no first-derivative term.
pub fn is_rsl(eq: &RiemannEquation) -> bool {
    let no_p = eq.p.is_zero(FUCHS_TOL);
    debug_assert_eq!(
        no_p,
        eq.divisor.infinity_index().is_some()
            && eq.divisor.finite_points().iter().all(|&(i, _)| {
                let s = eq.exponents.beta[i][0] + eq.exponents.beta[i][1];
                (s - 1.0).norm() <= FUCHS_TOL
            })
    );
    no_p
}

/// Moves the singular points to `images` (point `i` goes to `images[i]`).
/// Exponents are unchanged; coefficients are rebuilt.
pub fn mobius_relocate(eq: &RiemannEquation, images: [Point; 3]) -> Result<RiemannEquation, EquationError> {
    let divisor = Divisor::new(images)?;
    build_equation(divisor, eq.exponents)
}

/// Default compensating point for a shear at `i`: infinity if present,
/// otherwise the last point other than `i`.
pub fn default_compensating_point(divisor: &Divisor, i: usize) -> usize {
    match divisor.infinity_index() {
        Some(k) if k != i => k,
        _ => {
            if i == 2 {
                1
            } else {
                2
            }
        }
    }
}

/// Multiplies the solution space by `((z − a_i)/(z − a_j))^s` with the
/// default compensating point `j`.
pub fn integer_shear(eq: &RiemannEquation, i: usize, s: i32) -> Result<RiemannEquation, EquationError> {
    let j = default_compensating_point(&eq.divisor, i);
    integer_shear_with(eq, i, j, s)
}

/// Shifts both exponents at `a_i` by `+s` and both at `a_j` by `−s`.
pub fn integer_shear_with(
    eq: &RiemannEquation,
    i: usize,
    j: usize,
    s: i32,
) -> Result<RiemannEquation, EquationError> {
    if eq.divisor.point(i).is_infinite() {
        return Err(EquationError::InfinitePoint(i));
    }
    if i == j {
        return Err(EquationError::SamePoint);
    }
    let mut t = eq.exponents;
    let s = f64::from(s);
    for b in t.beta[i].iter_mut() {
        *b += s;
    }
    for b in t.beta[j].iter_mut() {
        *b -= s;
    }
    build_equation(eq.divisor, t)
}

/// Gauss hypergeometric parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypergeometricParams {
    pub alpha: C64,
    pub beta: C64,
    pub gamma: C64,
}

impl HypergeometricParams {
    pub fn new(alpha: C64, beta: C64, gamma: C64) -> Self {
        HypergeometricParams { alpha, beta, gamma }
    }

    pub fn real(alpha: f64, beta: f64, gamma: f64) -> Self {
        HypergeometricParams::new(r(alpha), r(beta), r(gamma))
    }

    /// Exponents at `0, 1, ∞`: `(0, 1−γ)`, `(0, γ−α−β)`, `(α, β)`.
    pub fn exponents(&self) -> ExponentTable {
        let z = r(0.0);
        ExponentTable::new([
            [z, 1.0 - self.gamma],
            [z, self.gamma - self.alpha - self.beta],
            [self.alpha, self.beta],
        ])
    }

    /// `z(1−z)u'' + [γ − (α+β+1)z]u' − αβu = 0` on `{0, 1, ∞}`.
    pub fn equation(&self) -> RiemannEquation {
        build_equation(Divisor::hypergeometric(), self.exponents())
            .expect("hypergeometric exponents always satisfy the Fuchs relation")
    }
}

#[derive(Serialize, Deserialize)]
struct EquationWire {
    divisor: Divisor,
    exponents: ExponentTable,
    #[serde(default)]
    resonant: bool,
    #[serde(default, skip_deserializing, skip_serializing_if = "Option::is_none")]
    coefficients: Option<CoefficientsWire>,
}

#[derive(Serialize, Deserialize)]
struct CoefficientsWire {
    p: PCoefficient,
    q: QCoefficient,
}

impl Serialize for RiemannEquation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        EquationWire {
            divisor: self.divisor,
            exponents: self.exponents,
            resonant: self.resonant(),
            coefficients: Some(CoefficientsWire {
                p: self.p.clone(),
                q: self.q.clone(),
            }),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RiemannEquation {
    /// Coefficients in the input, if any, are ignored and rebuilt.
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let w = EquationWire::deserialize(deserializer)?;
        build_equation(w.divisor, w.exponents).map_err(serde::de::Error::custom)
    }
}
