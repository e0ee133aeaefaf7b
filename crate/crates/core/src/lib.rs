//! Monodromy of second-order Fuchsian equations with three singular points:
//! classification, realization by Riemann equations, numerical
//! continuation, and integrality of hypergeometric monodromy.

pub mod algebra2;
pub mod continuation;
pub mod equation;
pub mod realize;
pub mod representation;
pub mod sl2z;

pub use algebra2::{c, eig2, normalized_log, r, simultaneous_conjugator, CMat2, EigenData, NormalizedLog, C64};
pub use continuation::{monodromy_of, plan_loops, transport, NumericMonodromy, PathPlan};
pub use equation::{
    build_equation, fuchs_sum, indicial_exponents, integer_shear, is_rsl, mobius_relocate, ExponentTable,
    HypergeometricParams, RiemannEquation,
};
pub use realize::{
    candidate_exponents, realize_riemann, realize_riemann_cached, realize_rsl, realize_rsl_cached, search_riemann,
    verify_witness, MonodromyCache, RealizationWitness, RealizeError, SearchConfig, SearchOutcome, Witness,
};
pub use representation::{
    classify, is_realizable, is_sl, make_rep, Divisor, MonodromyRep, Point, RealizabilityVerdict, RepClass, Theorem,
};
pub use sl2z::{enumerate_family, integer_conjugator, sl2c_condition, sl2z_criterion, FamilyMember, Sl2zVerdict};
