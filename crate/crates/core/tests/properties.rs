//! Randomized invariants. Each case draws a seed and sizes from proptest and
//! builds its objects from the library's own seeded streams.

use proptest::prelude::*;

use expandlab::constructions::{haar_unitary_tuple, random_prime_tuple, TupleLog};
use expandlab::dimension::{enumerate_subspaces, restriction_ranks, subspace_count};
use expandlab::field::FieldSpec;
use expandlab::graph::{check_graph_relations, Graph};
use expandlab::linalg::{self, c, CMat};
use expandlab::matrix::Matrix;
use expandlab::quantum::{self, apply_phi, projector_form, quantum_edge_bracket, restriction_form};
use expandlab::report::{parse_tuple, to_canonical_json, tuple_to_json};
use expandlab::rng;
use expandlab::subspace::{annihilator, canonical_basis, Subspace};
use expandlab::verify::{prop31_exhaustive, random_subspace};

const PRIMES: [u64; 3] = [2, 3, 5];

fn prime_subspace(n: usize, r: usize, p: u64, seed: u64) -> Subspace {
    let mut g = rng::stream(seed, "prop", &[]);
    random_subspace(n, r, FieldSpec::prime(p).unwrap(), &mut g).unwrap()
}

fn complex_subspace(n: usize, r: usize, seed: u64) -> Subspace {
    let mut g = rng::stream(seed, "prop", &[]);
    random_subspace(n, r, FieldSpec::complex(), &mut g).unwrap()
}

fn max_diff(a: &CMat, b: &CMat) -> f64 {
    linalg::max_abs(&(a - b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn canonical_form_is_idempotent_over_fp(n in 2usize..7, r0 in 1usize..7, pi in 0usize..3, seed: u64) {
        let r = r0.min(n);
        let v = prime_subspace(n, r, PRIMES[pi], seed);
        let again = canonical_basis(v.basis(), v.field()).unwrap();
        prop_assert_eq!(&again, &v);
    }

    #[test]
    fn canonical_form_is_idempotent_over_c(n in 2usize..7, r0 in 1usize..7, seed: u64) {
        let r = r0.min(n);
        let v = complex_subspace(n, r, seed);
        let again = v.canonicalized().unwrap();
        prop_assert!(max_diff(again.complex_basis().unwrap(), v.complex_basis().unwrap()) < 1e-9);
    }

    #[test]
    fn annihilator_dimension_is_complementary(n in 2usize..7, r0 in 1usize..7, pi in 0usize..4, seed: u64) {
        let r = r0.min(n - 1);
        let v = if pi == 3 { complex_subspace(n, r, seed) } else { prime_subspace(n, r, PRIMES[pi], seed) };
        prop_assert_eq!(annihilator(&v).unwrap().dim() + v.dim(), n);
    }

    #[test]
    fn double_annihilator_is_identity_over_fp(n in 2usize..7, r0 in 1usize..7, pi in 0usize..3, seed: u64) {
        let r = r0.min(n - 1);
        let v = prime_subspace(n, r, PRIMES[pi], seed);
        let back = annihilator(&annihilator(&v).unwrap()).unwrap();
        prop_assert_eq!(back, v);
    }

    #[test]
    fn ranks_ignore_the_choice_of_basis(n in 2usize..7, d in 1usize..4, pi in 0usize..3, seed: u64) {
        let p = PRIMES[pi];
        let b = random_prime_tuple(n, d, p, false, seed).unwrap();
        let v = prime_subspace(n, (n / 2).max(1), p, seed ^ 1);
        // Shuffle the basis by an invertible change of coordinates.
        let t = v.prime_basis().unwrap();
        let g = random_prime_tuple(v.dim(), 1, p, true, seed ^ 2).unwrap();
        let mixed = t.mul(&g.prime_matrices().unwrap()[0]).unwrap();
        let w = canonical_basis(&Matrix::Prime(mixed), v.field()).unwrap();
        prop_assert_eq!(restriction_ranks(&b, &w).unwrap(), restriction_ranks(&b, &v).unwrap());
    }

    #[test]
    fn edge_value_forms_agree(n in 2usize..8, d in 1usize..4, seed: u64) {
        let b = haar_unitary_tuple(n, d, seed).unwrap();
        let v = complex_subspace(n, (n / 2).max(1), seed ^ 3);
        let lhs = projector_form(&b, &v).unwrap();
        let rhs = restriction_form(b.complex_matrices().unwrap(), &v).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * n as f64);
    }

    #[test]
    fn phi_is_unital_and_trace_preserving(n in 2usize..7, d in 1usize..4, seed: u64) {
        let b = haar_unitary_tuple(n, d, seed).unwrap();
        let mut g = rng::stream(seed, "prop-x", &[]);
        let x = linalg::gaussian_matrix(n, n, &mut g);
        let y = apply_phi(&b, &x).unwrap();
        prop_assert!((y.trace() - x.trace()).norm() < 1e-10 * (1.0 + x.trace().norm()));
        let id = apply_phi(&b, &CMat::identity(n, n)).unwrap();
        prop_assert!(max_diff(&id, &CMat::identity(n, n)) < 1e-12);
    }

    #[test]
    fn graph_relations_hold(k in 0usize..3, deg in 2usize..4, seed: u64) {
        let n = [6, 8, 10][k];
        let mut g = rng::stream(seed, "prop-graph", &[]);
        let graph = Graph::random_regular(n, deg, &mut g).unwrap();
        prop_assert!(check_graph_relations(&graph).unwrap().passed());
    }

    #[test]
    fn log_then_exp_recovers_the_tuple(n in 1usize..7, d in 1usize..4, seed: u64) {
        let u = haar_unitary_tuple(n, d, seed).unwrap();
        let back = TupleLog::new(&u).unwrap().power(1.0).unwrap();
        for (a, b) in u.complex_matrices().unwrap().iter().zip(back.complex_matrices().unwrap()) {
            prop_assert!(max_diff(a, b) < 1e-9);
        }
    }

    #[test]
    fn powers_form_a_semigroup(n in 1usize..7, s in -2.0f64..2.0, t in -2.0f64..2.0, seed: u64) {
        let u = haar_unitary_tuple(n, 1, seed).unwrap();
        let log = &TupleLog::new(&u).unwrap().logs()[0].clone();
        let lhs = log.power(s) * log.power(t);
        prop_assert!(max_diff(&lhs, &log.power(s + t)) < 1e-9);
    }

    #[test]
    fn tuple_json_roundtrip_is_stable(n in 1usize..5, d in 1usize..3, prime: bool, seed: u64) {
        let b = if prime { random_prime_tuple(n, d, 3, false, seed).unwrap() } else { haar_unitary_tuple(n, d, seed).unwrap() };
        let once = to_canonical_json(&tuple_to_json(&b)).unwrap();
        let reloaded = parse_tuple(&once).unwrap();
        prop_assert_eq!(&reloaded, &b);
        prop_assert_eq!(to_canonical_json(&tuple_to_json(&reloaded)).unwrap(), once);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bracket_lower_bound_is_sound(n in 2usize..7, d in 1usize..4, seed: u64) {
        let b = haar_unitary_tuple(n, d, seed).unwrap();
        let est = quantum_edge_bracket(&b, 300, seed).unwrap();
        let gap = quantum::quantum_expansion(&b).unwrap().gap;
        prop_assert!(gap / 2.0 - 1e-9 <= est.best_value);
    }

    #[test]
    fn dimension_chains_hold_on_every_f2_subspace(n in 2usize..6, d in 1usize..4, seed: u64) {
        let b = random_prime_tuple(n, d, 2, false, seed).unwrap();
        let rep = prop31_exhaustive(&b).unwrap();
        prop_assert!(rep.passed, "{:?}", rep.failures);
    }
}

#[test]
fn enumeration_matches_gaussian_binomials() {
    for (n, p, max_dim) in [(2, 2, 1), (3, 3, 1), (4, 2, 2), (5, 2, 2), (4, 3, 2), (5, 2, 5)] {
        let all = enumerate_subspaces(n, p, max_dim).unwrap();
        assert_eq!(all.len() as u128, subspace_count(n, p, max_dim));
        let mut seen = std::collections::BTreeSet::new();
        for v in &all {
            assert!(seen.insert(format!("{:?}", v.basis())), "duplicate subspace");
        }
    }
    assert_eq!(subspace_count(3, 3, 1), 13);
}

#[test]
fn complex_units_in_span_do_not_change_the_space() {
    let v = Subspace::span_complex(&[vec![c(1.0, 0.0), c(1.0, 0.0)]], FieldSpec::complex()).unwrap();
    let w = Subspace::span_complex(&[vec![c(0.0, 2.0), c(0.0, 2.0)]], FieldSpec::complex()).unwrap();
    assert!(v.same_space(&w, 1e-12));
}
