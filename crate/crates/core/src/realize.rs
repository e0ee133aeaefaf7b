//! Witness equations for realizable representations.
//!
//! Realizable diagonal representations are built directly from a basis of
//! power functions. Everything else goes through a bounded search: the
//! fractional parts of the exponents are fixed by the eigenvalues, the
//! integer parts are enumerated, and each candidate is accepted only if
//! its numerically computed monodromy is simultaneously conjugate to the
//! target.
//!
//! Integer shears (shift both exponents at one point by `s`, both at
//! another by `−s`) multiply solutions by a single-valued function, so
//! candidates related by a shear have conjugate monodromy. The search
//! computes one monodromy per shear class and caches it.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra2::{eig2, normalized_exponent, normalized_log, simultaneous_conjugator, AlgebraError, CMat2, C64};
use crate::continuation::{monodromy_of, plan_loops, ContinuationError, NumericMonodromy, PathPlan};
use crate::equation::{build_equation, is_rsl, ExponentTable, RiemannEquation};
use crate::representation::{is_realizable, is_sl, Divisor, MonodromyRep, Point, RealizabilityVerdict, RepClass};

/// Relative residual below which a conjugator is accepted.
pub const WITNESS_TOL: f64 = 1e-6;

/// Determinant tolerance for the SL(2, C) precondition.
pub const SL_TOL: f64 = 1e-8;

const RHO_QUANTUM: f64 = 1e9;

/// Largest offset of `Σρ` from an integer that is treated as round-off.
const CONGRUENCE_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub shear_bound: u32,
    pub tol: f64,
    pub max_candidates: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            shear_bound: 4,
            tol: 1e-8,
            max_candidates: 5000,
        }
    }
}

impl SearchConfig {
    /// No cap on the number of candidates.
    pub fn exhaustive(self) -> Self {
        SearchConfig {
            max_candidates: usize::MAX,
            ..self
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RealizeError {
    #[error("no witness among {tried} candidates (unresolved, not a proof of non-realizability)")]
    SearchExhausted { tried: usize },
    #[error("exponent fractional parts sum to {0}, which is not an integer")]
    NoCandidates(C64),
    #[error("representation is not in SL(2, C)")]
    NotSl,
    #[error("invalid search configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Continuation(#[from] ContinuationError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub equation: RiemannEquation,
    /// `S` with `S·G_i·S⁻¹` equal to the equation's computed generators.
    pub conjugator: CMat2,
    pub residual: f64,
    pub candidates_tried: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RealizationWitness {
    Found(Witness),
    Refused { refusal: RealizabilityVerdict },
}

impl RealizationWitness {
    pub fn witness(&self) -> Option<&Witness> {
        match self {
            RealizationWitness::Found(w) => Some(w),
            RealizationWitness::Refused { .. } => None,
        }
    }
}

/// Fractional parts `ρ` of the exponents and the integer `Σφ` they force.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FractionalParts {
    pub rho: [[C64; 2]; 3],
    pub phi_sum: i64,
}

/// Normalized-log eigenvalues of each generator, nudged so that their sum
/// is exactly an integer. `Err(NoCandidates)` when the sum is not close to
/// an integer.
pub fn fractional_parts(rep: &MonodromyRep) -> Result<FractionalParts, RealizeError> {
    let mut rho = [[C64::new(0.0, 0.0); 2]; 3];
    for (i, g) in rep.g.iter().enumerate() {
        rho[i] = normalized_log(g)?.rho;
    }
    let total: C64 = rho.iter().flatten().sum();
    let n = total.re.round();
    let eps = total - n;
    if eps.norm() > CONGRUENCE_TOL {
        return Err(RealizeError::NoCandidates(total));
    }
    for v in rho.iter_mut().flatten() {
        *v -= eps / 6.0;
    }
    Ok(FractionalParts {
        rho,
        phi_sum: 1 - n as i64,
    })
}

/// A candidate: fractional parts plus integer parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Candidate {
    pub rho: [[C64; 2]; 3],
    pub phi: [[i64; 2]; 3],
}

impl Candidate {
    pub fn table(&self) -> ExponentTable {
        let mut beta = self.rho;
        for i in 0..3 {
            for j in 0..2 {
                beta[i][j] += self.phi[i][j] as f64;
            }
        }
        ExponentTable::new(beta)
    }

    /// Representative of the shear class: integer parts of the first
    /// exponent at points 0 and 1 moved to point 2.
    fn shear_canonical(&self) -> Candidate {
        let mut phi = self.phi;
        for i in 0..2 {
            let s = phi[i][0];
            phi[i][0] -= s;
            phi[i][1] -= s;
            phi[2][0] += s;
            phi[2][1] += s;
        }
        Candidate { rho: self.rho, phi }
    }
}

/// Per-point constraint on `φ_i^1 + φ_i^2`.
type PairSums = Option<[i64; 3]>;

fn same_rho(a: C64, b: C64) -> bool {
    (a - b).norm() <= 1e-12
}

fn enumerate(parts: &FractionalParts, bound: i64, sums: PairSums) -> Vec<Candidate> {
    let range = -bound..=bound;
    let mut out = Vec::new();
    let mut phi = [[0i64; 2]; 3];
    for a in range.clone() {
        for b in range.clone() {
            for c in range.clone() {
                for d in range.clone() {
                    for e in range.clone() {
                        let f = parts.phi_sum - (a + b + c + d + e);
                        if f.abs() > bound {
                            continue;
                        }
                        phi[0] = [a, b];
                        phi[1] = [c, d];
                        phi[2] = [e, f];
                        if let Some(s) = sums {
                            if (0..3).any(|i| phi[i][0] + phi[i][1] != s[i]) {
                                continue;
                            }
                        }
                        // Swapping the integer parts of equal fractional
                        // parts gives the same table.
                        if (0..3).any(|i| same_rho(parts.rho[i][0], parts.rho[i][1]) && phi[i][0] < phi[i][1]) {
                            continue;
                        }
                        out.push(Candidate { rho: parts.rho, phi });
                    }
                }
            }
        }
    }
    let weight = |c: &Candidate| c.phi.iter().flatten().map(|v| v.abs()).sum::<i64>();
    out.sort_by(|x, y| weight(x).cmp(&weight(y)).then(x.phi.cmp(&y.phi)));
    out
}

/// Candidate exponent tables in search order: increasing `Σ|φ|`, then
/// lexicographic in `φ`. Empty when the fractional parts cannot sum to 1
/// modulo integers.
pub fn candidate_exponents(rep: &MonodromyRep, cfg: &SearchConfig) -> Vec<ExponentTable> {
    match fractional_parts(rep) {
        Ok(parts) => enumerate(&parts, cfg.shear_bound as i64, None)
            .iter()
            .map(Candidate::table)
            .collect(),
        Err(_) => Vec::new(),
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct CacheKey {
    divisor: [u64; 6],
    rho: [i64; 12],
    phi: [[i64; 2]; 3],
    tol: u64,
}

fn divisor_bits(d: &Divisor) -> [u64; 6] {
    let mut out = [u64::MAX; 6];
    for (i, p) in d.points().iter().enumerate() {
        if let Point::Finite(z) = p {
            out[2 * i] = z.re.to_bits();
            out[2 * i + 1] = z.im.to_bits();
        }
    }
    out
}

/// Computed monodromies of shear-class representatives, shared across
/// searches. `None` records a continuation failure.
#[derive(Default)]
pub struct MonodromyCache {
    entries: HashMap<CacheKey, Option<NumericMonodromy>>,
    plans: HashMap<[u64; 6], PathPlan>,
}

impl MonodromyCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn plan(&mut self, divisor: &Divisor) -> PathPlan {
        self.plans
            .entry(divisor_bits(divisor))
            .or_insert_with(|| plan_loops(divisor, None))
            .clone()
    }

    fn class_monodromy(&mut self, divisor: &Divisor, cand: &Candidate, tol: f64) -> Option<NumericMonodromy> {
        let key = class_key(divisor, cand, tol);
        if let Some(hit) = self.entries.get(&key) {
            return hit.clone();
        }
        let canon = cand.shear_canonical();
        let plan = self.plan(divisor);
        let value = build_equation(*divisor, canon.table())
            .ok()
            .and_then(|eq| monodromy_of(&eq, &plan, tol).ok());
        self.entries.insert(key, value.clone());
        value
    }
}

fn class_key(divisor: &Divisor, cand: &Candidate, tol: f64) -> CacheKey {
    let canon = cand.shear_canonical();
    // Fractional parts are quantized so that representations sharing
    // eigenvalues up to round-off share cache entries.
    let quantize = |x: f64| (x * RHO_QUANTUM).round() as i64;
    let mut rho = [0i64; 12];
    for (k, v) in canon.rho.iter().flatten().enumerate() {
        rho[2 * k] = quantize(v.re);
        rho[2 * k + 1] = quantize(v.im);
    }
    CacheKey {
        divisor: divisor_bits(divisor),
        rho,
        phi: canon.phi,
        tol: tol.to_bits(),
    }
}

/// Larger of `max_i ‖S·A_i·S⁻¹ − B_i‖_max / (1 + ‖B_i‖_max)` and the same
/// quantity with the roles of `A` and `B` exchanged.
pub fn conjugation_residual(s: &CMat2, a: &[CMat2; 3], b: &[CMat2; 3]) -> f64 {
    let Some(inv) = s.inverse() else {
        return f64::INFINITY;
    };
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let forward = (*s * *x * inv - *y).max_norm() / (1.0 + y.max_norm());
            let backward = (inv * *y * *s - *x).max_norm() / (1.0 + x.max_norm());
            forward.max(backward)
        })
        .fold(0.0, f64::max)
}

/// A conjugator taking `target` to `computed`, with its residual, if one
/// exists within [`WITNESS_TOL`].
pub fn match_generators(target: &[CMat2; 3], computed: &[CMat2; 3]) -> Option<(CMat2, f64)> {
    let s = simultaneous_conjugator(&target[0], &target[1], &computed[0], &computed[1], WITNESS_TOL)?;
    let res = conjugation_residual(&s, target, computed);
    (res < WITNESS_TOL).then_some((s, res))
}

/// Result of re-checking a witness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub residual: f64,
    pub conjugator: Option<CMat2>,
    /// Largest mismatch of `tr G_i` and `tr G_iG_j` between target and
    /// recomputed generators.
    pub trace_defect: f64,
    pub relation_residual: f64,
    pub tol: f64,
}

/// Traces of `G_1, G_2, G_3, G_1G_2, G_1G_3, G_2G_3`: conjugation invariants.
pub fn trace_invariants(g: &[CMat2; 3]) -> [C64; 6] {
    [
        g[0].trace(),
        g[1].trace(),
        g[2].trace(),
        (g[0] * g[1]).trace(),
        (g[0] * g[2]).trace(),
        (g[1] * g[2]).trace(),
    ]
}

pub fn trace_defect(a: &[CMat2; 3], b: &[CMat2; 3]) -> f64 {
    trace_invariants(a)
        .iter()
        .zip(trace_invariants(b))
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Recomputes the witness equation's monodromy at `tol` and re-derives the
/// conjugator against `rep`.
pub fn verify_witness(w: &Witness, rep: &MonodromyRep, tol: f64) -> VerificationReport {
    let plan = plan_loops(&w.equation.divisor, None);
    let mono = match monodromy_of(&w.equation, &plan, tol) {
        Ok(m) => m,
        Err(_) => {
            return VerificationReport {
                passed: false,
                residual: f64::INFINITY,
                conjugator: None,
                trace_defect: f64::INFINITY,
                relation_residual: f64::INFINITY,
                tol,
            }
        }
    };
    let computed = mono.generators();
    let found = match_generators(&rep.g, &computed);
    let residual = match &found {
        Some((_, r)) => *r,
        None => conjugation_residual(&w.conjugator, &rep.g, &computed),
    };
    VerificationReport {
        passed: found.is_some(),
        residual,
        conjugator: found.map(|(s, _)| s),
        trace_defect: trace_defect(&rep.g, &computed),
        relation_residual: mono.residual,
        tol,
    }
}

fn confirm(
    rep: &MonodromyRep,
    eq: RiemannEquation,
    cfg: &SearchConfig,
    tried: usize,
) -> Result<Option<Witness>, RealizeError> {
    let plan = plan_loops(&eq.divisor, None);
    let mono = monodromy_of(&eq, &plan, cfg.tol / 10.0)?;
    Ok(match_generators(&rep.g, &mono.generators()).map(|(conjugator, residual)| Witness {
        equation: eq,
        conjugator,
        residual,
        candidates_tried: tried,
    }))
}

/// Outcome of a bounded search.
#[derive(Clone, Debug, PartialEq)]
pub enum SearchOutcome {
    Found(Witness),
    Exhausted { tried: usize },
}

fn search(
    rep: &MonodromyRep,
    divisor: &Divisor,
    candidates: &[Candidate],
    cfg: &SearchConfig,
    cache: &mut MonodromyCache,
    tried_before: usize,
) -> Result<SearchOutcome, RealizeError> {
    let mut tried = tried_before;
    // Shear classes already known not to match this representation.
    let mut rejected = HashSet::new();
    for cand in candidates.iter().take(cfg.max_candidates.saturating_sub(tried_before)) {
        tried += 1;
        let key = class_key(divisor, cand, cfg.tol);
        if rejected.contains(&key) {
            continue;
        }
        let Some(mono) = cache.class_monodromy(divisor, cand, cfg.tol) else {
            rejected.insert(key);
            continue;
        };
        if match_generators(&rep.g, &mono.generators()).is_none() {
            rejected.insert(key);
            continue;
        }
        let Ok(eq) = build_equation(*divisor, cand.table()) else {
            continue;
        };
        if let Some(w) = confirm(rep, eq, cfg, tried)? {
            return Ok(SearchOutcome::Found(w));
        }
    }
    Ok(SearchOutcome::Exhausted { tried })
}

fn check_config(cfg: &SearchConfig) -> Result<(), RealizeError> {
    if !(cfg.tol > 0.0 && cfg.tol.is_finite()) {
        return Err(RealizeError::InvalidConfig("tol must be positive"));
    }
    if cfg.max_candidates == 0 {
        return Err(RealizeError::InvalidConfig("max_candidates must be positive"));
    }
    Ok(())
}

/// Bounded search for a Riemann equation on the representation's own
/// divisor, regardless of what the realizability theorems predict.
pub fn search_riemann(
    rep: &MonodromyRep,
    cfg: &SearchConfig,
    cache: &mut MonodromyCache,
) -> Result<SearchOutcome, RealizeError> {
    check_config(cfg)?;
    let parts = fractional_parts(rep)?;
    let candidates = enumerate(&parts, cfg.shear_bound as i64, None);
    search(rep, &rep.divisor, &candidates, cfg, cache, 0)
}

fn common_eigenbasis(rep: &MonodromyRep) -> CMat2 {
    match rep.g.iter().find(|g| !g.is_scalar(crate::representation::SCALAR_TOL)) {
        Some(g) => {
            let v = eig2(g).eigenvectors();
            CMat2::from_columns(v[0], v[1])
        }
        None => CMat2::identity(),
    }
}

/// Exponents of a power-function basis realizing a diagonal representation
/// whose generator `s` is scalar. With `rsl`, the table has pair sums 1 at
/// the other points and `(0, −1)` at `s`, which requires `G_s = I`.
fn diagonal_table(rep: &MonodromyRep, s: usize, rsl: bool) -> Option<ExponentTable> {
    let p = common_eigenbasis(rep);
    let p_inv = p.inverse()?;
    let d: Vec<CMat2> = rep.g.iter().map(|g| p_inv * *g * p).collect();
    let others: Vec<usize> = (0..3).filter(|&i| i != s).collect();
    let (a, b) = (others[0], others[1]);
    let ev = |i: usize, j: usize| d[i].at(j, j);
    let mut beta = [[C64::new(0.0, 0.0); 2]; 3];

    if rsl {
        if !d[s].approx_eq(&CMat2::identity(), 1e-9) {
            return None;
        }
        let x = normalized_exponent(ev(a, 0)) + 2.0;
        beta[a] = [x, 1.0 - x];
        beta[b] = [1.0 - x, x];
        beta[s] = [C64::new(0.0, 0.0), C64::new(-1.0, 0.0)];
    } else {
        let mut lambda = [normalized_exponent(ev(a, 0)), normalized_exponent(ev(a, 1))];
        let mut mu = [normalized_exponent(ev(b, 0)), normalized_exponent(ev(b, 1))];
        let shift = (lambda[0] + mu[0] - lambda[1] - mu[1]).re.round();
        mu[1] += shift;
        if same_rho(lambda[0], lambda[1]) && same_rho(mu[0], mu[1]) {
            lambda = [lambda[0] + 2.0, lambda[1] - 1.0];
            mu = [mu[0] - 1.0, mu[1] + 2.0];
        }
        let nu = -(lambda[0] + mu[0]);
        beta[a] = lambda;
        beta[b] = mu;
        beta[s] = [nu + 1.0, nu];
    }
    Some(ExponentTable::new(beta))
}

/// A Riemann equation realizing `rep` on its own divisor, or a refusal
/// citing the theorem that rules one out.
pub fn realize_riemann(rep: &MonodromyRep, cfg: &SearchConfig) -> Result<RealizationWitness, RealizeError> {
    realize_riemann_cached(rep, cfg, &mut MonodromyCache::new())
}

pub fn realize_riemann_cached(
    rep: &MonodromyRep,
    cfg: &SearchConfig,
    cache: &mut MonodromyCache,
) -> Result<RealizationWitness, RealizeError> {
    check_config(cfg)?;
    let verdict = is_realizable(rep);
    if !verdict.realizable {
        return Ok(RealizationWitness::Refused { refusal: verdict });
    }
    if let Some(RepClass::Decomposable { scalar_indices }) = &verdict.class {
        // Prefer the scalar generator at infinity, then the last one.
        let inf = rep.divisor.infinity_index().map(|i| i + 1);
        let s = match inf {
            Some(i) if scalar_indices.contains(&i) => i - 1,
            _ => scalar_indices[scalar_indices.len() - 1] - 1,
        };
        if let Some(t) = diagonal_table(rep, s, false) {
            if let Ok(eq) = build_equation(rep.divisor, t) {
                if let Some(w) = confirm(rep, eq, cfg, 1)? {
                    return Ok(RealizationWitness::Found(w));
                }
            }
        }
    }
    match search_riemann(rep, cfg, cache)? {
        SearchOutcome::Found(w) => Ok(RealizationWitness::Found(w)),
        SearchOutcome::Exhausted { tried } => Err(RealizeError::SearchExhausted { tried }),
    }
}

/// Divisor with point `inf` at infinity and the other two at −1 and 1.
fn rsl_divisor(inf: usize) -> Divisor {
    let mut points = [Point::Infinity; 3];
    let mut finite = [C64::new(-1.0, 0.0), C64::new(1.0, 0.0)].into_iter();
    for (i, p) in points.iter_mut().enumerate() {
        if i != inf {
            *p = Point::Finite(finite.next().expect("two finite points"));
        }
    }
    Divisor::new(points).expect("distinct points")
}

/// An equation `y'' + q y = 0` realizing an SL(2, C) representation. The
/// divisor is moved so that one point sits at infinity and the other two
/// at −1 and 1, keeping their labels.
pub fn realize_rsl(rep: &MonodromyRep, cfg: &SearchConfig) -> Result<RealizationWitness, RealizeError> {
    realize_rsl_cached(rep, cfg, &mut MonodromyCache::new())
}

pub fn realize_rsl_cached(
    rep: &MonodromyRep,
    cfg: &SearchConfig,
    cache: &mut MonodromyCache,
) -> Result<RealizationWitness, RealizeError> {
    check_config(cfg)?;
    if !is_sl(rep, SL_TOL) {
        return Err(RealizeError::NotSl);
    }
    let verdict = is_realizable(rep);
    if !verdict.realizable {
        return Ok(RealizationWitness::Refused { refusal: verdict });
    }
    let parts = fractional_parts(rep)?;

    let mut order: Vec<usize> = rep.divisor.infinity_index().into_iter().collect();
    for i in [2, 1, 0] {
        if !order.contains(&i) {
            order.push(i);
        }
    }

    let mut tried = 0;
    for inf in order {
        let divisor = rsl_divisor(inf);
        let target = rep.with_divisor(divisor);

        if matches!(verdict.class, Some(RepClass::Decomposable { .. })) {
            if let Some(t) = diagonal_table(rep, inf, true) {
                if let Ok(eq) = build_equation(divisor, t) {
                    tried += 1;
                    if let Some(w) = confirm(&target, eq, cfg, tried)? {
                        return Ok(RealizationWitness::Found(w));
                    }
                }
            }
        }

        // Pair sums 1 at finite points and −1 at infinity.
        let mut sums = [0i64; 3];
        let mut consistent = true;
        for i in 0..3 {
            let want = if i == inf { -1.0 } else { 1.0 };
            let need = want - (parts.rho[i][0] + parts.rho[i][1]);
            if need.norm() > 1e6 || (need - need.re.round()).norm() > CONGRUENCE_TOL {
                consistent = false;
            }
            sums[i] = need.re.round() as i64;
        }
        if !consistent {
            continue;
        }
        let candidates = enumerate(&parts, cfg.shear_bound as i64, Some(sums));
        match search(&target, &divisor, &candidates, cfg, cache, tried)? {
            SearchOutcome::Found(w) => {
                debug_assert!(is_rsl(&w.equation));
                return Ok(RealizationWitness::Found(w));
            }
            SearchOutcome::Exhausted { tried: t } => tried = t,
        }
        if tried >= cfg.max_candidates {
            break;
        }
    }
    Err(RealizeError::SearchExhausted { tried })
}
