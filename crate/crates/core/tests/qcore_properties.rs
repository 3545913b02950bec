use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qflow::models::random::{random_density, random_hermitian, random_lindblad};
use qflow::qcore::{
    kron, matrix_exp, max_abs, partial_trace, trace_distance, CMatrix, DensityMatrix, Subsystem,
    C64,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `ρ − σ` for qubits is traceless with eigenvalues `±sqrt(−det)`.
fn qubit_trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let d = a.matrix() - b.matrix();
    let det = (d[(0, 0)] * d[(1, 1)] - d[(0, 1)] * d[(1, 0)]).re;
    (-det).max(0.0).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_distance_is_a_metric(seed in any::<u64>(), n in 2usize..5) {
        let mut r = rng(seed);
        let (a, b, c) = (random_density(&mut r, n), random_density(&mut r, n), random_density(&mut r, n));
        let ab = trace_distance(&a, &b).unwrap();
        prop_assert!((ab - trace_distance(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!(trace_distance(&a, &a).unwrap() < 1e-12);
        prop_assert!(ab > 1e-9);
        prop_assert!(ab <= trace_distance(&a, &c).unwrap() + trace_distance(&c, &b).unwrap() + 1e-12);
        prop_assert!(ab <= 1.0 + 1e-12);
    }

    #[test]
    fn qubit_trace_distance_matches_determinant_formula(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b) = (random_density(&mut r, 2), random_density(&mut r, 2));
        prop_assert!((trace_distance(&a, &b).unwrap() - qubit_trace_distance(&a, &b)).abs() < 1e-12);
    }

    #[test]
    fn lindblad_evolution_is_contractive(seed in any::<u64>(), n in 2usize..4, t in 0.0f64..3.0) {
        let mut r = rng(seed);
        let map = random_lindblad(&mut r, n, 2).exp(t).unwrap();
        let (a, b) = (random_density(&mut r, n), random_density(&mut r, n));
        let fa = DensityMatrix::from_matrix(map.apply_matrix(a.matrix()).unwrap()).unwrap();
        let fb = DensityMatrix::from_matrix(map.apply_matrix(b.matrix()).unwrap()).unwrap();
        prop_assert!(trace_distance(&fa, &fb).unwrap() <= trace_distance(&a, &b).unwrap() + 1e-9);
    }

    #[test]
    fn partial_trace_recovers_product_factors(seed in any::<u64>(), ds in 2usize..4, de in 2usize..4) {
        let mut r = rng(seed);
        let (s, e) = (random_density(&mut r, ds), random_density(&mut r, de));
        let joint = DensityMatrix::new(kron(s.op(), e.op())).unwrap();
        let s_back = partial_trace(&joint, (ds, de), Subsystem::System).unwrap();
        let e_back = partial_trace(&joint, (ds, de), Subsystem::Environment).unwrap();
        prop_assert!(max_abs(&(s_back.matrix() - s.matrix())) < 1e-14);
        prop_assert!(max_abs(&(e_back.matrix() - e.matrix())) < 1e-14);
    }

    #[test]
    fn exponential_of_commuting_sum_factorizes(seed in any::<u64>(), n in 2usize..5, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        // Polynomials in one Hermitian matrix commute.
        let h = random_hermitian(&mut rng(seed), n, 1.0).into_matrix();
        let x = &h * C64::new(0.0, a);
        let y = &h * &h * C64::new(b, 0.0);
        let lhs = matrix_exp(&(&x + &y)).unwrap();
        let rhs = matrix_exp(&x).unwrap() * matrix_exp(&y).unwrap();
        prop_assert!(max_abs(&(&lhs - rhs)) < 1e-9 * max_abs(&lhs).max(1.0));
    }
}

#[test]
fn exponential_of_nilpotent_is_polynomial() {
    let mut n = CMatrix::zeros(3, 3);
    n[(0, 1)] = C64::new(2.0, 0.0);
    n[(1, 2)] = C64::new(0.0, 1.0);
    let expected = CMatrix::identity(3, 3) + &n + &n * &n * C64::new(0.5, 0.0);
    assert!(max_abs(&(matrix_exp(&n).unwrap() - expected)) < 1e-14);
}
