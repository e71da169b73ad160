use lagindex::hermitian_forms::{relative_morse_index, FiniteHermitianForm};
use lagindex::index_theory::{triple_identity_checks, triple_index};
use lagindex::linalg::Subspace;
use lagindex::random::{
    complex_gaussian, random_boundary, random_hermitian, random_lagrangian, random_lagrangian_meeting,
    random_symplectic,
};
use lagindex::sturm_liouville::{boundary_from_canonical, morse_index_discretized, named_boundary, BoundaryKind, CoefficientPath};
use lagindex::symplectic_core::{apply, intersection_dim, SymplecticSpace};
use lagindex::Tolerances;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn triple_identities_hold(seed in any::<u64>(), n in 1usize..4) {
        let tol = Tolerances::default();
        let mut r = rng(seed);
        let space = SymplecticSpace::standard(n);
        let a = random_lagrangian(&mut r, space);
        let b = random_lagrangian(&mut r, space);
        let k = random_lagrangian(&mut r, space);
        for c in triple_identity_checks(&a, &b, &k, &tol).unwrap() {
            prop_assert!(c.holds, "{} {} {}", c.name, c.lhs, c.rhs);
        }
    }

    #[test]
    fn triple_index_is_symplectic_invariant(seed in any::<u64>(), n in 1usize..4, meet in 0usize..2) {
        let tol = Tolerances::default();
        let mut r = rng(seed);
        let space = SymplecticSpace::standard(n);
        let a = random_lagrangian(&mut r, space);
        let b = random_lagrangian_meeting(&mut r, &a, meet.min(n));
        let k = random_lagrangian(&mut r, space);
        let m = random_symplectic(&mut r, n, 0.5);
        let before = triple_index(&a, &b, &k, &tol).unwrap();
        let after = triple_index(
            &apply(&m, &a, &tol).unwrap(),
            &apply(&m, &b, &tol).unwrap(),
            &apply(&m, &k, &tol).unwrap(),
            &tol,
        ).unwrap();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn intersection_dim_is_symmetric_and_exact(seed in any::<u64>(), n in 1usize..4, meet in 0usize..4) {
        let tol = Tolerances::default();
        let mut r = rng(seed);
        let a = random_lagrangian(&mut r, SymplecticSpace::standard(n));
        let k = meet.min(n);
        let b = random_lagrangian_meeting(&mut r, &a, k);
        prop_assert_eq!(intersection_dim(&a, &b, &tol).unwrap(), k);
        prop_assert_eq!(intersection_dim(&b, &a, &tol).unwrap(), k);
    }

    #[test]
    fn canonical_boundary_round_trips(seed in any::<u64>(), n in 1usize..4) {
        let tol = Tolerances::default();
        let mut r = rng(seed);
        let bc = random_boundary(&mut r, n);
        prop_assert!(bc.rebuild_residual < 1e-8);
        prop_assert_eq!(bc.k, 2 * n - bc.v.ncols());
        let again = boundary_from_canonical(&bc.v, &bc.a, &tol).unwrap();
        prop_assert_eq!(intersection_dim(&bc.raw, &again.raw, &tol).unwrap(), 2 * n);
    }

    #[test]
    fn relative_morse_index_matches_difference(seed in any::<u64>(), size in 1usize..7, d in 0usize..7, rank in 0usize..7) {
        let tol = Tolerances::default();
        let mut r = rng(seed);
        let q = FiniteHermitianForm::new(random_hermitian(&mut r, size, rank.min(size)), &tol).unwrap();
        let v = Subspace::span(&complex_gaussian(&mut r, size, d.min(size)), tol.rank);
        let rel = relative_morse_index(&q, &v, &tol).unwrap();
        prop_assert_eq!(rel.value, rel.morse_difference);
        prop_assert!(rel.double_orthogonal_holds);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn morse_index_decreases_with_potential(r1 in -12.0f64..2.0, shift in 0.0f64..6.0, len in 1.0f64..4.0) {
        let tol = Tolerances::default();
        let bc = named_boundary(1, BoundaryKind::Dirichlet, &tol).unwrap();
        let low = CoefficientPath::oscillator(1, r1, len).unwrap();
        let high = CoefficientPath::oscillator(1, r1 + shift, len).unwrap();
        let m_low = morse_index_discretized(&low, &bc, 192, &tol).unwrap();
        let m_high = morse_index_discretized(&high, &bc, 192, &tol).unwrap();
        prop_assert!(m_high.negative <= m_low.negative);
    }

    #[test]
    fn problem_parser_never_panics(text in "\\PC{0,200}") {
        let _ = lagindex::problem::parse(&text);
        let _ = lagindex::problem::load(&text);
    }
}
