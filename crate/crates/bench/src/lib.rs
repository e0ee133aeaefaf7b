//! Shared inputs for the benchmarks.

use rmono::{build_equation, c, make_rep, CMat2, Divisor, ExponentTable, HypergeometricParams, MonodromyRep, RiemannEquation};

/// `y'' − 8/(z²−1)²·y = 0`, whose monodromy is trivial.
pub fn golden_equation() -> RiemannEquation {
    build_equation(Divisor::standard(), ExponentTable::from_real([[2.0, -1.0], [-1.0, 2.0], [0.0, -1.0]]))
        .expect("exponents sum to 1")
}

/// A non-resonant hypergeometric equation.
pub fn hypergeometric_equation() -> RiemannEquation {
    HypergeometricParams::real(0.3, -0.45, 0.6).equation()
}

/// A fixed irreducible representation on `{−1, 1, ∞}`.
pub fn irreducible_rep() -> MonodromyRep {
    let g1 = CMat2::new(c(0.3, 0.2), c(1.1, -0.4), c(0.5, 0.1), c(-0.7, 0.6));
    let g2 = CMat2::new(c(0.9, -0.3), c(0.2, 0.8), c(-1.2, 0.1), c(0.4, 0.5));
    make_rep(g1, g2, Divisor::standard()).expect("generators are invertible")
}
