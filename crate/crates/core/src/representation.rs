//! Monodromy representations of the thrice-punctured sphere and the
//! realizability decision for Riemann equations.
//!
//! A representation is a triple of invertible generators `G1, G2, G3`, one
//! per puncture, subject to `G3·G2·G1 = I`. Generator `Gi` is the matrix of
//! continuation along a loop winding once counterclockwise around `a_i`,
//! acting on the right of a row of solutions (`Y ↦ Y·Gi`).

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::algebra2::{eig2, CMat2, CVec2, C64};

/// Minimum separation between finite divisor points.
pub const POINT_SEPARATION: f64 = 1e-9;

/// Relative tolerance for "is this matrix scalar".
pub const SCALAR_TOL: f64 = 1e-9;

/// Tolerance on `G3·G2·G1 = I` for caller-supplied third generators.
pub const RELATION_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RepError {
    #[error("divisor points {0} and {1} coincide")]
    CoincidentPoints(usize, usize),
    #[error("divisor contains more than one point at infinity")]
    SeveralInfinities,
    #[error("divisor point {0} is not finite")]
    NonFinitePoint(usize),
    #[error("generator G{0} is singular or non-finite")]
    SingularGenerator(usize),
    #[error("G3·G2·G1 differs from the identity by {0:e}")]
    RelationViolated(f64),
}

/// A point of the Riemann sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Point {
    Finite(C64),
    Infinity,
}

impl Point {
    pub fn finite(self) -> Option<C64> {
        match self {
            Point::Finite(z) => Some(z),
            Point::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Point::Infinity)
    }
}

impl From<C64> for Point {
    fn from(z: C64) -> Self {
        Point::Finite(z)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Finite(z) => write!(f, "{z}"),
            Point::Infinity => f.write_str("∞"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PointWire {
    Finite(C64),
    Tag(String),
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Point::Finite(z) => PointWire::Finite(*z).serialize(serializer),
            Point::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match PointWire::deserialize(deserializer)? {
            PointWire::Finite(z) => Ok(Point::Finite(z)),
            PointWire::Tag(s) if s == "inf" => Ok(Point::Infinity),
            PointWire::Tag(s) => Err(serde::de::Error::custom(format!(
                "expected [re, im] or \"inf\", found {s:?}"
            ))),
        }
    }
}

/// Three distinct labelled points of the Riemann sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Divisor {
    points: [Point; 3],
}

impl Divisor {
    pub fn new(points: [Point; 3]) -> Result<Self, RepError> {
        let mut infinities = 0;
        for (i, p) in points.iter().enumerate() {
            match p {
                Point::Infinity => infinities += 1,
                Point::Finite(z) if !(z.re.is_finite() && z.im.is_finite()) => {
                    return Err(RepError::NonFinitePoint(i))
                }
                _ => {}
            }
        }
        if infinities > 1 {
            return Err(RepError::SeveralInfinities);
        }
        for i in 0..3 {
            for j in i + 1..3 {
                if let (Point::Finite(a), Point::Finite(b)) = (points[i], points[j]) {
                    if (a - b).norm() <= POINT_SEPARATION {
                        return Err(RepError::CoincidentPoints(i, j));
                    }
                }
            }
        }
        Ok(Divisor { points })
    }

    /// `{-1, 1, ∞}`, the default divisor for synthesis.
    pub fn standard() -> Self {
        Divisor {
            points: [
                Point::Finite(C64::new(-1.0, 0.0)),
                Point::Finite(C64::new(1.0, 0.0)),
                Point::Infinity,
            ],
        }
    }

    /// `{0, 1, ∞}`, the hypergeometric divisor.
    pub fn hypergeometric() -> Self {
        Divisor {
            points: [
                Point::Finite(C64::new(0.0, 0.0)),
                Point::Finite(C64::new(1.0, 0.0)),
                Point::Infinity,
            ],
        }
    }

    pub fn finite(a1: C64, a2: C64, a3: C64) -> Result<Self, RepError> {
        Divisor::new([a1.into(), a2.into(), a3.into()])
    }

    pub fn points(&self) -> &[Point; 3] {
        &self.points
    }

    pub fn point(&self, i: usize) -> Point {
        self.points[i]
    }

    pub fn infinity_index(&self) -> Option<usize> {
        self.points.iter().position(|p| p.is_infinite())
    }

    /// Finite points with their indices, in index order.
    pub fn finite_points(&self) -> Vec<(usize, C64)> {
        self.points
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.finite().map(|z| (i, z)))
            .collect()
    }

    /// Index of `p` in the divisor, matching finite points within the
    /// separation tolerance.
    pub fn index_of(&self, p: &Point) -> Option<usize> {
        self.points.iter().position(|q| match (p, q) {
            (Point::Infinity, Point::Infinity) => true,
            (Point::Finite(a), Point::Finite(b)) => (a - b).norm() <= POINT_SEPARATION,
            _ => false,
        })
    }
}

impl<'de> Deserialize<'de> for Divisor {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let points = <[Point; 3]>::deserialize(deserializer)?;
        Divisor::new(points).map_err(serde::de::Error::custom)
    }
}

/// A monodromy representation: three generators with `G3·G2·G1 = I`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonodromyRep {
    pub divisor: Divisor,
    pub g: [CMat2; 3],
}

impl MonodromyRep {
    /// Builds a representation from all three generators, checking the
    /// product relation.
    pub fn from_generators(divisor: Divisor, g: [CMat2; 3]) -> Result<Self, RepError> {
        for (i, m) in g.iter().enumerate() {
            if m.inverse().is_none() {
                return Err(RepError::SingularGenerator(i + 1));
            }
        }
        let defect = relation_defect(&g);
        let scale = 1.0 + g.iter().map(|m| m.max_norm()).fold(0.0, f64::max);
        if defect > RELATION_TOL * scale.powi(3) {
            return Err(RepError::RelationViolated(defect));
        }
        Ok(MonodromyRep { divisor, g })
    }

    /// `S·Gi·S⁻¹` for every generator.
    pub fn conjugated(&self, s: &CMat2) -> Option<Self> {
        let inv = s.inverse()?;
        Some(MonodromyRep {
            divisor: self.divisor,
            g: self.g.map(|m| *s * m * inv),
        })
    }

    pub fn with_divisor(&self, divisor: Divisor) -> Self {
        MonodromyRep {
            divisor,
            g: self.g,
        }
    }

    pub fn relation_defect(&self) -> f64 {
        relation_defect(&self.g)
    }
}

/// `‖G3·G2·G1 − I‖_max`.
pub fn relation_defect(g: &[CMat2; 3]) -> f64 {
    (g[2] * g[1] * g[0] - CMat2::identity()).max_norm()
}

/// Completes `(G1, G2)` with `G3 = (G2·G1)⁻¹`.
pub fn make_rep(g1: CMat2, g2: CMat2, divisor: Divisor) -> Result<MonodromyRep, RepError> {
    if g1.inverse().is_none() {
        return Err(RepError::SingularGenerator(1));
    }
    if g2.inverse().is_none() {
        return Err(RepError::SingularGenerator(2));
    }
    let g3 = (g2 * g1)
        .inverse()
        .ok_or(RepError::SingularGenerator(3))?;
    Ok(MonodromyRep {
        divisor,
        g: [g1, g2, g3],
    })
}

#[derive(Serialize, Deserialize)]
struct RepWire {
    divisor: Divisor,
    #[serde(rename = "G1")]
    g1: CMat2,
    #[serde(rename = "G2")]
    g2: CMat2,
    #[serde(rename = "G3", default, skip_serializing_if = "Option::is_none")]
    g3: Option<CMat2>,
}

impl Serialize for MonodromyRep {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        RepWire {
            divisor: self.divisor,
            g1: self.g[0],
            g2: self.g[1],
            g3: Some(self.g[2]),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MonodromyRep {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let w = RepWire::deserialize(deserializer)?;
        let rep = match w.g3 {
            Some(g3) => MonodromyRep::from_generators(w.divisor, [w.g1, w.g2, g3]),
            None => make_rep(w.g1, w.g2, w.divisor),
        };
        rep.map_err(serde::de::Error::custom)
    }
}

/// Structural class of a representation. Indices are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class")]
pub enum RepClass {
    /// No common eigenvector.
    Irreducible,
    /// A common eigenbasis diagonalizes all three generators.
    Decomposable { scalar_indices: Vec<usize> },
    /// Common invariant line but no common eigenbasis; some generator is
    /// diagonalizable.
    IndecomposableDiagonalizableAt { indices: Vec<usize> },
    /// Common invariant line and every generator is a Jordan block.
    AllJordan,
}

impl RepClass {
    pub fn tag(&self) -> &'static str {
        match self {
            RepClass::Irreducible => "Irreducible",
            RepClass::Decomposable { .. } => "Decomposable",
            RepClass::IndecomposableDiagonalizableAt { .. } => "IndecomposableDiagonalizableAt",
            RepClass::AllJordan => "AllJordan",
        }
    }
}

fn is_eigenvector(m: &CMat2, v: &CVec2, tol: f64) -> bool {
    let w = m.apply(*v);
    let cross = v[0] * w[1] - v[1] * w[0];
    let vn = v[0].norm_sqr() + v[1].norm_sqr();
    cross.norm() <= tol * vn * (1.0 + m.max_norm())
}

/// Classifies with the default tolerance.
pub fn classify(rep: &MonodromyRep) -> RepClass {
    classify_with_tol(rep, SCALAR_TOL)
}

pub fn classify_with_tol(rep: &MonodromyRep, tol: f64) -> RepClass {
    let scalar: Vec<usize> = (0..3).filter(|&i| rep.g[i].is_scalar(tol)).collect();
    let Some(pivot) = (0..3).find(|i| !scalar.contains(i)) else {
        return RepClass::Decomposable {
            scalar_indices: vec![1, 2, 3],
        };
    };

    let eig = eig2(&rep.g[pivot]);
    let common: Vec<CVec2> = eig
        .eigenvectors()
        .into_iter()
        .filter(|v| rep.g.iter().all(|m| is_eigenvector(m, v, tol)))
        .collect();

    match common.len() {
        0 => RepClass::Irreducible,
        2 => RepClass::Decomposable {
            scalar_indices: scalar.iter().map(|i| i + 1).collect(),
        },
        _ => {
            let indices: Vec<usize> = (0..3)
                .filter(|&i| eig2(&rep.g[i]).diagonalizable)
                .map(|i| i + 1)
                .collect();
            if indices.is_empty() {
                RepClass::AllJordan
            } else {
                RepClass::IndecomposableDiagonalizableAt { indices }
            }
        }
    }
}

/// The theorem that decides realizability for each structural class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// Every irreducible rank-two representation is realizable.
    IrreducibleRankTwo,
    /// Diagonal monodromy is realizable iff some generator is scalar.
    DiagonalRequiresScalar,
    /// Reducible indecomposable monodromy diagonalizable at a point is
    /// realizable.
    DiagonalizableAtPoint,
    /// Realizable monodromy is diagonalizable at some point.
    NowhereDiagonalizable,
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Theorem::IrreducibleRankTwo => "irreducible-rank-two",
            Theorem::DiagonalRequiresScalar => "diagonal-requires-scalar",
            Theorem::DiagonalizableAtPoint => "diagonalizable-at-point",
            Theorem::NowhereDiagonalizable => "nowhere-diagonalizable",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizabilityVerdict {
    pub realizable: bool,
    #[serde(rename = "theorem")]
    pub citation: Theorem,
    #[serde(rename = "reason")]
    pub detail: String,
    #[serde(skip)]
    pub class: Option<RepClass>,
}

pub fn is_realizable(rep: &MonodromyRep) -> RealizabilityVerdict {
    verdict_for_class(classify(rep))
}

pub fn verdict_for_class(class: RepClass) -> RealizabilityVerdict {
    let (realizable, citation, detail) = match &class {
        RepClass::Irreducible => (
            true,
            Theorem::IrreducibleRankTwo,
            "irreducible: every irreducible rank-two representation with three punctures is \
             the monodromy of a Riemann equation"
                .to_string(),
        ),
        RepClass::Decomposable { scalar_indices } if scalar_indices.is_empty() => (
            false,
            Theorem::DiagonalRequiresScalar,
            "diagonal monodromy with no scalar generator: a global basis of power functions \
             would violate the Fuchs relation"
                .to_string(),
        ),
        RepClass::Decomposable { scalar_indices } => (
            true,
            Theorem::DiagonalRequiresScalar,
            format!("diagonal monodromy with scalar generator(s) {scalar_indices:?}"),
        ),
        RepClass::IndecomposableDiagonalizableAt { indices } => (
            true,
            Theorem::DiagonalizableAtPoint,
            format!("reducible, indecomposable, diagonalizable at generator(s) {indices:?}"),
        ),
        RepClass::AllJordan => (
            false,
            Theorem::NowhereDiagonalizable,
            "every generator is a Jordan block: exponent sums along the invariant line force \
             the Fuchs sum to be non-positive"
                .to_string(),
        ),
    };
    RealizabilityVerdict {
        realizable,
        citation,
        detail,
        class: Some(class),
    }
}

/// True iff every generator has determinant 1 within `tol`.
pub fn is_sl(rep: &MonodromyRep, tol: f64) -> bool {
    rep.g.iter().all(|m| (m.det() - 1.0).norm() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra2::{c, r};

    fn upper_unipotent(x: f64) -> CMat2 {
        CMat2::from_real(1.0, x, 0.0, 1.0)
    }

    #[test]
    fn make_rep_completes_third_generator() {
        let rep = make_rep(upper_unipotent(1.0), upper_unipotent(1.0), Divisor::standard()).unwrap();
        assert!(rep.g[2].approx_eq(&upper_unipotent(-2.0), 1e-15));

        let rep = make_rep(
            CMat2::diag(r(2.0), r(3.0)),
            CMat2::diag(r(5.0), r(7.0)),
            Divisor::standard(),
        )
        .unwrap();
        assert!(rep.g[2].approx_eq(&CMat2::diag(r(0.1), r(1.0 / 21.0)), 1e-15));
    }

    #[test]
    fn make_rep_rejects_singular() {
        let err = make_rep(CMat2::zero(), CMat2::identity(), Divisor::standard()).unwrap_err();
        assert_eq!(err, RepError::SingularGenerator(1));
    }

    #[test]
    fn divisor_validation() {
        let z = C64::new(0.5, 0.0);
        assert_eq!(
            Divisor::finite(z, z, r(2.0)).unwrap_err(),
            RepError::CoincidentPoints(0, 1)
        );
        assert_eq!(
            Divisor::new([Point::Infinity, Point::Infinity, z.into()]).unwrap_err(),
            RepError::SeveralInfinities
        );
    }

    #[test]
    fn classify_examples() {
        let id = CMat2::identity();
        let rep = make_rep(id, id, Divisor::standard()).unwrap();
        assert_eq!(
            classify(&rep),
            RepClass::Decomposable {
                scalar_indices: vec![1, 2, 3]
            }
        );

        let lower = CMat2::from_real(1.0, 0.0, 1.0, 1.0);
        let rep = make_rep(lower, upper_unipotent(1.0), Divisor::standard()).unwrap();
        assert_eq!(classify(&rep), RepClass::Irreducible);
        assert!(is_realizable(&rep).realizable);
        assert!(is_sl(&rep, 1e-12));

        let rep = make_rep(upper_unipotent(1.0), upper_unipotent(1.0), Divisor::standard()).unwrap();
        assert_eq!(classify(&rep), RepClass::AllJordan);
        let v = is_realizable(&rep);
        assert!(!v.realizable);
        assert_eq!(v.citation, Theorem::NowhereDiagonalizable);
    }

    #[test]
    fn scalar_free_diagonal_is_refused() {
        let rep = make_rep(
            CMat2::diag(r(2.0), r(3.0)),
            CMat2::diag(r(5.0), r(7.0)),
            Divisor::standard(),
        )
        .unwrap();
        let v = is_realizable(&rep);
        assert!(!v.realizable);
        assert_eq!(v.citation, Theorem::DiagonalRequiresScalar);
        assert!(!is_sl(&make_rep(CMat2::diag(r(2.0), r(3.0)), CMat2::identity(), Divisor::standard()).unwrap(), 1e-9));
    }

    #[test]
    fn indecomposable_with_diagonal_point() {
        let g1 = CMat2::diag(c(0.0, 1.0), c(0.0, -1.0));
        let g2 = CMat2::new(c(0.0, -1.0), r(1.0), r(0.0), c(0.0, 1.0));
        let rep = make_rep(g1, g2, Divisor::standard()).unwrap();
        assert!(matches!(
            classify(&rep),
            RepClass::IndecomposableDiagonalizableAt { .. }
        ));
        assert_eq!(is_realizable(&rep).citation, Theorem::DiagonalizableAtPoint);
    }

    #[test]
    fn rep_json_round_trip_and_g3_recomputed() {
        let json = r#"{"divisor": [[-1,0],[1,0],"inf"], "G1": [[1,0],[1,0],[0,0],[1,0]], "G2": [[1,0],[0,0],[0,0],[1,0]]}"#;
        let rep: MonodromyRep = serde_json::from_str(json).unwrap();
        assert!(rep.g[2].approx_eq(&upper_unipotent(-1.0), 1e-15));
        let back: MonodromyRep = serde_json::from_str(&serde_json::to_string(&rep).unwrap()).unwrap();
        assert_eq!(back, rep);
    }

    #[test]
    fn rep_json_rejects_bad_relation() {
        let json = r#"{"divisor": [[-1,0],[1,0],"inf"], "G1": [[2,0],[0,0],[0,0],[1,0]], "G2": [[1,0],[0,0],[0,0],[1,0]], "G3": [[1,0],[0,0],[0,0],[1,0]]}"#;
        assert!(serde_json::from_str::<MonodromyRep>(json).is_err());
    }
}
