//! Analytic continuation of solutions of `y'' + p y' + q y = 0` along
//! loops, and extraction of monodromy generators.
//!
//! The fundamental matrix `Φ = [[y₁, y₂], [y₁', y₂']]` starts as the
//! identity at the base point and is carried along a path by the companion
//! system `Φ' = AΦ`, `A = [[0, 1], [−q, −p]]`. For a closed loop the final
//! `Φ` is the generator acting on the row of solutions (`Y ↦ Y·G`). Loop
//! products compose as `G_{γ₁γ₂} = G₂·G₁`.

pub mod integrator;
pub mod path;

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra2::{eig2, lex_cmp, CMat2, C64};
use crate::equation::RiemannEquation;
use crate::representation::{relation_defect, Divisor, MonodromyRep};

pub use integrator::{IntegrationError, StepStats};
pub use path::{Path, Piece};

/// Default local error tolerance for transports.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Tails of a lasso keep at least this multiple of the other loops' radii
/// away from the other singular points.
const TAIL_CLEARANCE: f64 = 1.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContinuationError {
    #[error("integration failed on piece {piece} of the path")]
    Integration {
        piece: usize,
        #[source]
        source: IntegrationError,
    },
    #[error("path passes within {0:e} of a singular point")]
    TooClose(f64),
    #[error("plan was made for a different divisor")]
    PlanMismatch,
}

/// Coefficients of `y'' + p(z) y' + q(z) y = 0`.
pub trait Coefficients {
    fn p(&self, z: C64) -> C64;
    fn q(&self, z: C64) -> C64;
    /// Finite singular points, used to guard paths.
    fn poles(&self) -> Vec<C64>;
}

impl Coefficients for RiemannEquation {
    fn p(&self, z: C64) -> C64 {
        self.p_at(z)
    }

    fn q(&self, z: C64) -> C64 {
        self.q_at(z)
    }

    fn poles(&self) -> Vec<C64> {
        self.divisor.finite_points().into_iter().map(|(_, a)| a).collect()
    }
}

/// The equation rewritten in `w = 1/(z − center)`:
/// `u'' + (2/w − p(z)/w²) u' + q(z)/w⁴ u = 0`.
pub struct InfinityChart<'a> {
    pub eq: &'a RiemannEquation,
    pub center: C64,
}

impl InfinityChart<'_> {
    fn z(&self, w: C64) -> C64 {
        self.center + 1.0 / w
    }
}

impl Coefficients for InfinityChart<'_> {
    fn p(&self, w: C64) -> C64 {
        2.0 / w - self.eq.p_at(self.z(w)) / (w * w)
    }

    fn q(&self, w: C64) -> C64 {
        let w2 = w * w;
        self.eq.q_at(self.z(w)) / (w2 * w2)
    }

    fn poles(&self) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0)];
        out.extend(self.eq.poles().into_iter().map(|a| 1.0 / (a - self.center)));
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    Z,
    W,
}

/// One accepted integration step, for path dumps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    /// 1-based divisor index of the encircled point.
    pub generator: usize,
    pub chart: Chart,
    pub piece: usize,
    pub z: C64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transport {
    pub matrix: CMat2,
    pub steps: StepStats,
}

fn companion<C: Coefficients>(coef: &C, piece: &Piece, s: f64, y: &[C64; 4]) -> [C64; 4] {
    let z = piece.point(s);
    let dz = piece.tangent(s);
    let (p, q) = (coef.p(z), coef.q(z));
    [
        dz * y[2],
        dz * y[3],
        -dz * (q * y[0] + p * y[2]),
        -dz * (q * y[1] + p * y[3]),
    ]
}

/// Transfer matrix of the companion system along `path`.
pub fn transport<C: Coefficients>(coef: &C, path: &Path, tol: f64) -> Result<CMat2, ContinuationError> {
    transport_observed(coef, path, tol, &mut |_, _| {}).map(|t| t.matrix)
}

/// Like [`transport`], reporting every accepted step as `(piece, z)`.
pub fn transport_observed<C: Coefficients>(
    coef: &C,
    path: &Path,
    tol: f64,
    observe: &mut dyn FnMut(usize, C64),
) -> Result<Transport, ContinuationError> {
    let margin = coef
        .poles()
        .into_iter()
        .map(|a| path.distance_to(a))
        .fold(f64::INFINITY, f64::min);
    if margin <= 1e-9 * (1.0 + path.length()) {
        return Err(ContinuationError::TooClose(margin));
    }

    let mut y = CMat2::identity().to_flat();
    let mut steps = StepStats::default();
    for (k, piece) in path.pieces.iter().enumerate() {
        let (y_end, stats) = integrator::integrate(
            |s, y| companion(coef, piece, s, y),
            0.0,
            piece.length(),
            y,
            tol,
            |s, _| observe(k, piece.point(s)),
        )
        .map_err(|source| ContinuationError::Integration { piece: k, source })?;
        y = y_end;
        steps += stats;
    }
    Ok(Transport {
        matrix: CMat2::from_flat(y),
        steps,
    })
}

/// A loop around one finite divisor point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopPlan {
    /// 0-based divisor index.
    pub index: usize,
    pub center: C64,
    pub radius: f64,
    pub path: Path,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathPlan {
    pub divisor: Divisor,
    pub base: C64,
    /// Loops in divisor-index order.
    pub loops: Vec<LoopPlan>,
    /// Divisor indices in counterclockwise order as seen from the base,
    /// the point at infinity (if any) last.
    pub order: [usize; 3],
}

impl PathPlan {
    pub fn loop_for(&self, index: usize) -> Option<&LoopPlan> {
        self.loops.iter().find(|l| l.index == index)
    }

    /// Whether the counterclockwise order is a cyclic rotation of (0, 1, 2),
    /// in which case the loops compose to `G3·G2·G1 = I` directly.
    pub fn is_cyclic(&self) -> bool {
        is_cyclic(&self.order)
    }
}

fn is_cyclic(order: &[usize; 3]) -> bool {
    (0..3).any(|k| (0..3).all(|j| order[(j + k) % 3] == j))
}

fn centroid_and_spread(divisor: &Divisor) -> (C64, f64) {
    let finite = divisor.finite_points();
    let n = finite.len() as f64;
    let centroid = finite.iter().map(|&(_, a)| a).sum::<C64>() / n;
    let mut spread: f64 = 0.0;
    for &(_, a) in &finite {
        for &(_, b) in &finite {
            spread = spread.max((a - b).norm());
        }
    }
    (centroid, spread)
}

fn build_plan(divisor: &Divisor, base: C64) -> PathPlan {
    let finite = divisor.finite_points();
    let (centroid, _) = centroid_and_spread(divisor);
    let loops: Vec<LoopPlan> = finite
        .iter()
        .map(|&(i, a)| {
            let nearest = finite
                .iter()
                .filter(|&&(j, _)| j != i)
                .map(|&(_, b)| (a - b).norm())
                .fold((a - base).norm(), f64::min);
            let radius = nearest / 3.0;
            LoopPlan {
                index: i,
                center: a,
                radius,
                path: Path::lasso(base, a, radius, true),
            }
        })
        .collect();

    let heading = if (centroid - base).norm() > 0.0 {
        centroid - base
    } else {
        C64::new(1.0, 0.0)
    };
    let mut by_angle: Vec<(f64, usize)> = finite
        .iter()
        .map(|&(i, a)| (((a - base) / heading).arg(), i))
        .collect();
    by_angle.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let mut order = [0usize; 3];
    for (k, &(_, i)) in by_angle.iter().enumerate() {
        order[k] = i;
    }
    if let Some(inf) = divisor.infinity_index() {
        order[2] = inf;
    }
    PathPlan {
        divisor: *divisor,
        base,
        loops,
        order,
    }
}

fn has_clearance(plan: &PathPlan) -> bool {
    plan.loops.iter().all(|l| {
        plan.loops
            .iter()
            .filter(|o| o.index != l.index)
            .all(|o| l.path.distance_to(o.center) >= TAIL_CLEARANCE * o.radius)
    })
}

fn base_is_admissible(divisor: &Divisor, base: C64) -> bool {
    let (_, spread) = centroid_and_spread(divisor);
    base.re.is_finite()
        && base.im.is_finite()
        && divisor
            .finite_points()
            .iter()
            .all(|&(_, a)| (a - base).norm() > 1e-6 * (1.0 + spread))
}

/// Plans one counterclockwise lasso per finite divisor point from a common
/// base. A requested base that sits on (or next to) a divisor point is
/// ignored in favour of the default.
pub fn plan_loops(divisor: &Divisor, base: Option<C64>) -> PathPlan {
    if let Some(b) = base {
        if base_is_admissible(divisor, b) {
            return build_plan(divisor, b);
        }
    }
    default_plan(divisor)
}

fn default_plan(divisor: &Divisor) -> PathPlan {
    let (centroid, spread) = centroid_and_spread(divisor);
    let offset = 1.5 * spread;
    let mut angles = vec![FRAC_PI_2, -FRAC_PI_2];
    angles.extend((1..24).map(|j| FRAC_PI_2 + j as f64 * PI / 12.0).filter(|a| (a - 1.5 * PI).abs() > 1e-9));

    let plans: Vec<PathPlan> = angles
        .iter()
        .map(|&t| build_plan(divisor, centroid + C64::from_polar(offset, t)))
        .collect();
    plans
        .iter()
        .find(|p| p.is_cyclic() && has_clearance(p))
        .or_else(|| plans.iter().find(|p| has_clearance(p)))
        .unwrap_or(&plans[0])
        .clone()
}

/// Numerically computed monodromy with diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericMonodromy {
    pub divisor: Divisor,
    #[serde(rename = "G1")]
    pub g1: CMat2,
    #[serde(rename = "G2")]
    pub g2: CMat2,
    #[serde(rename = "G3")]
    pub g3: CMat2,
    /// `‖G3·G2·G1 − I‖_max` of the returned matrices.
    pub residual: f64,
    pub tol_used: f64,
    pub steps: usize,
    /// Largest mismatch between the spectrum of each generator and
    /// `{e^{2πiβ}}` over its exponents.
    pub eigenvalue_defect: f64,
    /// Relative difference between the generator at infinity derived from
    /// the product relation and one integrated in the `w = 1/(z − c)` chart.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infinity_check: Option<f64>,
}

impl NumericMonodromy {
    pub fn generators(&self) -> [CMat2; 3] {
        [self.g1, self.g2, self.g3]
    }

    /// The generators as a representation, without re-checking the product
    /// relation.
    pub fn rep(&self) -> MonodromyRep {
        MonodromyRep {
            divisor: self.divisor,
            g: self.generators(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MonodromyOptions {
    pub verify_infinity: bool,
}

/// Monodromy generators of `eq` along the plan's loops.
pub fn monodromy_of(eq: &RiemannEquation, plan: &PathPlan, tol: f64) -> Result<NumericMonodromy, ContinuationError> {
    monodromy_with(eq, plan, tol, MonodromyOptions::default(), &mut |_| {})
}

pub fn monodromy_with(
    eq: &RiemannEquation,
    plan: &PathPlan,
    tol: f64,
    opts: MonodromyOptions,
    trace: &mut dyn FnMut(TracePoint),
) -> Result<NumericMonodromy, ContinuationError> {
    if plan.divisor != eq.divisor {
        return Err(ContinuationError::PlanMismatch);
    }
    let mut m = [CMat2::identity(); 3];
    let mut steps = 0;
    for l in &plan.loops {
        let t = transport_observed(eq, &l.path, tol, &mut |piece, z| {
            trace(TracePoint {
                generator: l.index + 1,
                chart: Chart::Z,
                piece,
                z,
            })
        })?;
        m[l.index] = t.matrix;
        steps += t.steps.accepted + t.steps.rejected;
    }

    let [t0, t1, t2] = plan.order;
    if let Some(inf) = plan.divisor.infinity_index() {
        m[inf] = (m[t1] * m[t0]).inverse().unwrap_or_else(|| CMat2::scalar(C64::new(f64::NAN, 0.0)));
    }
    let mut g = m;
    if !is_cyclic(&plan.order) {
        // The loops satisfy M_{t2}·M_{t1}·M_{t0} = I; conjugating one of
        // them restores the G3·G2·G1 = I ordering.
        if let Some(inv) = m[t2].inverse() {
            g[t1] = m[t2] * m[t1] * inv;
        }
    }

    let infinity_check = match (opts.verify_infinity, plan.divisor.infinity_index()) {
        (true, Some(inf)) => match infinity_generator(eq, plan, tol, trace)? {
            Some((g_inf, n)) => {
                steps += n;
                Some((g_inf - g[inf]).max_norm() / (1.0 + g[inf].max_norm()))
            }
            None => None,
        },
        _ => None,
    };

    Ok(NumericMonodromy {
        divisor: plan.divisor,
        g1: g[0],
        g2: g[1],
        g3: g[2],
        residual: relation_defect(&g),
        tol_used: tol,
        steps,
        eigenvalue_defect: eigenvalue_defect(eq, &g),
        infinity_check,
    })
}

/// Generator at infinity integrated directly in the chart
/// `w = 1/(z − c)`, `c` the centroid of the finite points. `None` when the
/// chart loop cannot keep clear of the other singular points.
fn infinity_generator(
    eq: &RiemannEquation,
    plan: &PathPlan,
    tol: f64,
    trace: &mut dyn FnMut(TracePoint),
) -> Result<Option<(CMat2, usize)>, ContinuationError> {
    let inf = plan.divisor.infinity_index().expect("caller checked");
    let (center, _) = centroid_and_spread(&plan.divisor);
    let chart = InfinityChart { eq, center };
    let wb = 1.0 / (plan.base - center);
    let images: Vec<C64> = eq.poles().into_iter().map(|a| 1.0 / (a - center)).collect();
    let radius = images.iter().map(|w| w.norm()).fold(wb.norm(), f64::min) / 3.0;
    let path = Path::lasso(wb, C64::new(0.0, 0.0), radius, true);
    if images.iter().any(|&w| path.distance_to(w) < TAIL_CLEARANCE * radius) {
        return Ok(None);
    }
    let t = transport_observed(&chart, &path, tol, &mut |piece, w| {
        trace(TracePoint {
            generator: inf + 1,
            chart: Chart::W,
            piece,
            z: w,
        })
    })?;
    // Φ_z = D·Φ_w with D = diag(1, dw/dz) = diag(1, −w²) at the base.
    let d = CMat2::diag(C64::new(1.0, 0.0), -wb * wb);
    let d_inv = d.inverse().expect("base is finite and away from the centroid");
    Ok(Some((d * t.matrix * d_inv, t.steps.accepted + t.steps.rejected)))
}

fn eigenvalue_defect(eq: &RiemannEquation, g: &[CMat2; 3]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, m) in g.iter().enumerate() {
        let got = eig2(m).eigenvalues;
        let mut want = eq.exponents.pair(i).map(|b| (C64::new(0.0, TAU) * b).exp());
        want.sort_by(lex_cmp);
        let direct = (got[0] - want[0]).norm().max((got[1] - want[1]).norm());
        let swapped = (got[0] - want[1]).norm().max((got[1] - want[0]).norm());
        worst = worst.max(direct.min(swapped));
    }
    worst
}

/// `|det T − exp(−∫p dz)| / |exp(−∫p dz)|` along `path`, where `T` is the
/// transport: the Wronskian of the companion system obeys Liouville's
/// formula.
pub fn liouville_defect(eq: &RiemannEquation, path: &Path, tol: f64) -> Result<f64, ContinuationError> {
    let t = transport(eq, path, tol)?;
    let expected = wronskian_factor(eq, path);
    Ok((t.det() - expected).norm() / expected.norm())
}

/// `exp(−∫p dz)` along `path`: the determinant of the exact transport.
fn wronskian_factor(eq: &RiemannEquation, path: &Path) -> C64 {
    let integral: C64 = eq.p.terms.iter().map(|term| term.coeff * path.log_increment(term.pole)).sum();
    (-integral).exp()
}
