//! Seeded generators shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rmono::{c, classify, r, CMat2, Divisor, ExponentTable, HypergeometricParams, MonodromyRep, RepClass, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

pub fn cplx(rng: &mut ChaCha8Rng, scale: f64) -> C64 {
    c(unit(rng, -scale, scale), unit(rng, -scale, scale))
}

/// Random matrix with `|det| ≥ 0.3` and entries in the unit box.
pub fn invertible(rng: &mut ChaCha8Rng) -> CMat2 {
    loop {
        let m = CMat2::new(cplx(rng, 1.0), cplx(rng, 1.0), cplx(rng, 1.0), cplx(rng, 1.0));
        if m.det().norm() >= 0.3 {
            return m;
        }
    }
}

pub fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, TAU * theta)
}

/// Distance from `x` to the nearest integer, as a complex number.
pub fn integer_gap(x: C64) -> f64 {
    c(x.re - x.re.round(), x.im).norm()
}

fn normalized(lambda: C64) -> C64 {
    rmono::normalized_log(&CMat2::scalar(lambda)).unwrap().rho[0]
}

/// Eigenvalue exponents of `g` are at least `gap` apart modulo integers,
/// with imaginary parts bounded by `im`.
pub fn safe_generator(g: &CMat2, gap: f64, im: f64) -> bool {
    let ev = rmono::eig2(g).eigenvalues;
    let (a, b) = (normalized(ev[0]), normalized(ev[1]));
    integer_gap(a - b) >= gap && a.im.abs() <= im && b.im.abs() <= im
}

fn conj(p: &CMat2, m: CMat2) -> CMat2 {
    *p * m * p.inverse().unwrap()
}

/// Irreducible representation on `{−1, 1, ∞}` whose generators all have
/// exponents at least 0.05 from resonance.
pub fn irreducible_rep(rng: &mut ChaCha8Rng) -> MonodromyRep {
    loop {
        let d1 = CMat2::diag(cis(unit(rng, 0.0, 1.0)), cis(unit(rng, 0.0, 1.0)));
        let d2 = CMat2::diag(cis(unit(rng, 0.0, 1.0)), cis(unit(rng, 0.0, 1.0)));
        let g1 = conj(&invertible(rng), d1);
        let g2 = conj(&invertible(rng), d2);
        let Ok(rep) = rmono::make_rep(g1, g2, Divisor::standard()) else {
            continue;
        };
        if rep.g.iter().all(|g| safe_generator(g, 0.05, 0.5))
            && classify(&rep) == RepClass::Irreducible
            && irreducibility_margin(&rep) > 0.05
        {
            return rep;
        }
    }
}

/// Smallest eigenvector defect of `G2` along the eigenvectors of `G1`;
/// zero when the two share an eigenvector.
pub fn irreducibility_margin(rep: &MonodromyRep) -> f64 {
    rmono::eig2(&rep.g[0])
        .eigenvectors()
        .iter()
        .map(|v| {
            let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
            let w = rep.g[1].apply(*v);
            (v[0] * w[1] - v[1] * w[0]).norm() / (n * n * (1.0 + rep.g[1].max_norm()))
        })
        .fold(f64::INFINITY, f64::min)
}

/// Eigenvalues `(a_i, b_i)` of a diagonal representation with no scalar
/// generator.
pub fn scalar_free_spectrum(rng: &mut ChaCha8Rng) -> [[C64; 2]; 2] {
    loop {
        let t: [f64; 4] = std::array::from_fn(|_| unit(rng, 0.0, 1.0));
        let gaps = [t[0] - t[1], t[2] - t[3], (t[0] + t[2]) - (t[1] + t[3])];
        if gaps.iter().all(|g| integer_gap(r(*g)) >= 0.05) {
            return [[cis(t[0]), cis(t[1])], [cis(t[2]), cis(t[3])]];
        }
    }
}

pub fn diagonal_rep(rng: &mut ChaCha8Rng, spectrum: &[[C64; 2]; 2]) -> MonodromyRep {
    let p = invertible(rng);
    let g1 = conj(&p, CMat2::diag(spectrum[0][0], spectrum[0][1]));
    let g2 = conj(&p, CMat2::diag(spectrum[1][0], spectrum[1][1]));
    rmono::make_rep(g1, g2, Divisor::standard()).unwrap()
}

/// Eigenvalues `λ1, λ2` for an all-Jordan representation.
pub fn jordan_spectrum(rng: &mut ChaCha8Rng) -> [C64; 2] {
    [cis(unit(rng, 0.0, 1.0)), cis(unit(rng, 0.0, 1.0))]
}

/// Three Jordan blocks sharing one eigenvector.
pub fn all_jordan_rep(rng: &mut ChaCha8Rng, spectrum: &[C64; 2]) -> MonodromyRep {
    loop {
        let [l1, l2] = *spectrum;
        let (x1, x2) = (cplx(rng, 1.0), cplx(rng, 1.0));
        // The product G2·G1 must stay a Jordan block.
        if (l2 * x1 + l1 * x2).norm() < 0.2 || x1.norm() < 0.2 || x2.norm() < 0.2 {
            continue;
        }
        let p = invertible(rng);
        let g1 = conj(&p, CMat2::new(l1, x1, r(0.0), l1));
        let g2 = conj(&p, CMat2::new(l2, x2, r(0.0), l2));
        let rep = rmono::make_rep(g1, g2, Divisor::standard()).unwrap();
        if classify(&rep) == RepClass::AllJordan {
            return rep;
        }
    }
}

/// Upper-triangular generators with distinct eigenvalues and no common
/// eigenbasis.
pub fn indecomposable_rep(rng: &mut ChaCha8Rng) -> MonodromyRep {
    loop {
        let [[a1, b1], [a2, b2]] = scalar_free_spectrum(rng);
        let (x1, x2) = (cplx(rng, 1.0), cplx(rng, 1.0));
        let p = invertible(rng);
        let g1 = conj(&p, CMat2::new(a1, x1, r(0.0), b1));
        let g2 = conj(&p, CMat2::new(a2, x2, r(0.0), b2));
        let rep = rmono::make_rep(g1, g2, Divisor::standard()).unwrap();
        // Off-diagonal of G1 in the basis diagonalizing G2: zero means a
        // common eigenbasis.
        let coupling = (x1 * (a2 - b2) - x2 * (a1 - b1)).norm();
        if coupling > 0.2 && matches!(classify(&rep), RepClass::IndecomposableDiagonalizableAt { .. }) {
            return rep;
        }
    }
}

/// Representation in SL(2, C): generators with eigenvalues `λ, 1/λ`.
pub fn sl_rep(rng: &mut ChaCha8Rng) -> MonodromyRep {
    loop {
        let g1 = conj(&invertible(rng), CMat2::diag(cis(unit(rng, 0.0, 1.0)), r(1.0)));
        let g2 = conj(&invertible(rng), CMat2::diag(cis(unit(rng, 0.0, 1.0)), r(1.0)));
        let g1 = g1.scale(g1.det().sqrt().inv());
        let g2 = g2.scale(g2.det().sqrt().inv());
        let Ok(rep) = rmono::make_rep(g1, g2, Divisor::standard()) else {
            continue;
        };
        if rep.g.iter().all(|g| safe_generator(g, 0.05, 0.5)) && classify(&rep) == RepClass::Irreducible {
            return rep;
        }
    }
}

/// Admissible table: uniform fractional parts, integer parts in `[−3, 3]`,
/// last exponent chosen so the sum is exactly 1.
pub fn admissible_table(rng: &mut ChaCha8Rng) -> ExponentTable {
    let mut beta = [[r(0.0); 2]; 3];
    for v in beta.iter_mut().flatten() {
        *v = r(unit(rng, 0.0, 1.0) + rng.random_range(-3i32..=3) as f64);
    }
    let rest: C64 = beta.iter().flatten().take(5).sum();
    beta[2][1] = r(1.0) - rest;
    ExponentTable::new(beta)
}

/// Hypergeometric parameters whose exponents `0, 1−γ; 0, γ−α−β; α, β`
/// stay at least `gap` from resonance at every point.
pub fn hypergeometric_params(rng: &mut ChaCha8Rng, gap: f64) -> HypergeometricParams {
    loop {
        let (a, b, g) = (unit(rng, -1.5, 1.5), unit(rng, -1.5, 1.5), unit(rng, -1.5, 1.5));
        let diffs = [1.0 - g, g - a - b, a - b];
        if diffs.iter().all(|d| integer_gap(r(*d)) >= gap) {
            return HypergeometricParams::real(a, b, g);
        }
    }
}

/// Real hypergeometric corpus plus a few tables on other divisors.
pub fn corpus(rng: &mut ChaCha8Rng, size: usize) -> Vec<rmono::RiemannEquation> {
    let mut out = vec![
        rmono::build_equation(Divisor::standard(), ExponentTable::from_real([[2.0, -1.0], [-1.0, 2.0], [0.0, -1.0]])).unwrap(),
        HypergeometricParams::real(0.5, -0.5, 1.0).equation(),
    ];
    while out.len() < size {
        let divisor = match out.len() % 3 {
            0 => Divisor::hypergeometric(),
            1 => Divisor::standard(),
            _ => Divisor::finite(r(0.0), r(1.0), c(0.3, 1.1)).unwrap(),
        };
        let mut t = admissible_table(rng);
        // Shift integer parts back into a small window so the loops stay
        // well conditioned.
        for i in 0..3 {
            for j in 0..2 {
                let v = t.beta[i][j];
                t.beta[i][j] = v - v.re.floor();
            }
        }
        let rest: C64 = t.beta.iter().flatten().take(5).sum();
        t.beta[2][1] = r(1.0) - rest;
        if let Ok(eq) = rmono::build_equation(divisor, t) {
            out.push(eq);
        }
    }
    out
}
