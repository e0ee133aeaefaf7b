mod common;

use proptest::prelude::*;
use rmono::representation::relation_defect;
use rmono::{c, classify, eig2, is_realizable, make_rep, r, CMat2, Divisor, MonodromyRep, RepClass, C64};

fn entry() -> impl Strategy<Value = C64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| c(re, im))
}

fn invertible() -> impl Strategy<Value = CMat2> {
    (entry(), entry(), entry(), entry())
        .prop_map(|(a, b, c, d)| CMat2::new(a, b, c, d))
        .prop_filter("near-singular", |m| m.det().norm() > 0.05)
}

/// A representation of each structural kind, chosen by `kind`, built from a
/// seed so that every class appears.
fn rep_of_kind(kind: u8, seed: u64) -> MonodromyRep {
    let mut rng = common::rng(seed);
    match kind % 5 {
        0 => common::irreducible_rep(&mut rng),
        1 => {
            let s = common::scalar_free_spectrum(&mut rng);
            common::diagonal_rep(&mut rng, &s)
        }
        2 => {
            let s = common::jordan_spectrum(&mut rng);
            common::all_jordan_rep(&mut rng, &s)
        }
        3 => common::indecomposable_rep(&mut rng),
        _ => {
            // Diagonal with a scalar third generator.
            let p = common::invertible(&mut rng);
            let inv = p.inverse().unwrap();
            let a = common::cis(common::unit(&mut rng, 0.0, 1.0));
            let b = common::cis(common::unit(&mut rng, 0.0, 1.0));
            let g1 = p * CMat2::diag(a, b) * inv;
            let g2 = p * CMat2::diag(a.inv(), b.inv()) * inv;
            make_rep(g1, g2, Divisor::standard()).unwrap()
        }
    }
}

fn has_common_eigenbasis(rep: &MonodromyRep) -> bool {
    let Some(g) = rep.g.iter().find(|g| !g.is_scalar(1e-9)) else {
        return true;
    };
    let e = eig2(g);
    if !e.diagonalizable {
        return false;
    }
    let p = CMat2::from_columns(e.eigenvectors()[0], e.eigenvectors()[1]);
    let inv = p.inverse().unwrap();
    rep.g.iter().all(|m| {
        let d = inv * *m * p;
        d.at(0, 1).norm() + d.at(1, 0).norm() < 1e-7 * (1.0 + m.max_norm())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn classification_is_conjugation_invariant(kind in 0u8..5, seed in any::<u64>(), s in invertible()) {
        let rep = rep_of_kind(kind, seed);
        prop_assume!(s.frobenius_norm().powi(2) / s.det().norm() < 50.0);
        let moved = rep.conjugated(&s).unwrap();
        let (a, b) = (classify(&rep), classify(&moved));
        prop_assert_eq!(a.tag(), b.tag());
        prop_assert_eq!(is_realizable(&rep).realizable, is_realizable(&moved).realizable);
    }

    #[test]
    fn class_tags_match_their_definitions(kind in 0u8..5, seed in any::<u64>()) {
        let rep = rep_of_kind(kind, seed);
        match classify(&rep) {
            RepClass::Decomposable { .. } => prop_assert!(has_common_eigenbasis(&rep)),
            RepClass::AllJordan => prop_assert!(rep.g.iter().all(|g| !eig2(g).diagonalizable)),
            RepClass::IndecomposableDiagonalizableAt { indices } => {
                prop_assert!(!has_common_eigenbasis(&rep));
                prop_assert!(indices.iter().all(|&i| eig2(&rep.g[i - 1]).diagonalizable));
            }
            RepClass::Irreducible => prop_assert!(!has_common_eigenbasis(&rep)),
        }
    }

    #[test]
    fn make_rep_satisfies_product_relation(g1 in invertible(), g2 in invertible()) {
        let rep = make_rep(g1, g2, Divisor::standard()).unwrap();
        prop_assert!(relation_defect(&rep.g) <= 1e-12 * (1.0 + rep.g[2].max_norm()));
    }

    #[test]
    fn unipotent_reps_are_not_realizable(x in entry(), y in entry(), s in invertible()) {
        prop_assume!(x.norm() > 1e-3 && y.norm() > 1e-3 && (x + y).norm() > 1e-3);
        let inv = s.inverse().unwrap();
        let g1 = s * CMat2::new(r(1.0), x, r(0.0), r(1.0)) * inv;
        let g2 = s * CMat2::new(r(1.0), y, r(0.0), r(1.0)) * inv;
        let rep = make_rep(g1, g2, Divisor::standard()).unwrap();
        prop_assert!(!is_realizable(&rep).realizable);
    }
}
