use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qflow::evolve::Evolution;
use qflow::models::random::{
    random_classical_mixture, random_density, random_quantum_bystander, random_stochastic_env,
    random_unitary_model,
};
use qflow::models::{
    assemble_generator, check_casual_bystander, damping_born_markov, BipartiteModel,
    BipartiteState, DepolarizingModel, Modulation,
};
use qflow::qcore::{max_abs, DensityMatrix};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn evolve(model: &BipartiteModel, rho: &DensityMatrix, t: f64) -> BipartiteState {
    let start = BipartiteState::product(model.layout(), rho.matrix(), model.initial_env().matrix())
        .unwrap();
    Evolution::for_model(model, None)
        .unwrap()
        .evolve(&start, 0.0, t)
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_generator_preserves_trace(seed in any::<u64>(), dim in 2usize..4, t in 0.0f64..5.0) {
        let mut r = rng(seed);
        let models: Vec<BipartiteModel> = vec![
            random_classical_mixture(&mut r, 2, dim).unwrap().into(),
            random_stochastic_env(&mut r, 2, dim).unwrap().into(),
            random_quantum_bystander(&mut r, 2, dim).unwrap().into(),
            random_unitary_model(&mut r, 2, dim).unwrap().into(),
            damping_born_markov(1.3).unwrap().into(),
            DepolarizingModel::stationary(1.0, 0.4).unwrap().into(),
            DepolarizingModel::from_rest(0.7, 1.2, 3.0).unwrap().into(),
            DepolarizingModel::stationary(1.0, 1.0).unwrap()
                .with_modulation(Modulation::sine(0.6, 0.8).unwrap()).unwrap().into(),
        ];
        for m in &models {
            prop_assert!(assemble_generator(m, t).unwrap().trace_residual() < 1e-9, "{}", m.class_name());
        }
    }

    #[test]
    fn bystander_classes_pass_the_bystander_check(seed in any::<u64>(), dim in 2usize..4) {
        let mut r = rng(seed);
        let models: Vec<BipartiteModel> = vec![
            random_classical_mixture(&mut r, 2, dim).unwrap().into(),
            random_stochastic_env(&mut r, 3, dim).unwrap().into(),
            random_quantum_bystander(&mut r, 2, dim).unwrap().into(),
        ];
        for m in &models {
            let report = check_casual_bystander(m).unwrap();
            prop_assert!(report.holds, "{} residual {}", m.class_name(), report.residual);
        }
    }

    #[test]
    fn stochastic_populations_follow_the_rate_equation(seed in any::<u64>(), nc in 2usize..4, t in 0.0f64..4.0) {
        let mut r = rng(seed);
        let sm = random_stochastic_env(&mut r, 2, nc).unwrap();
        let p0 = DVector::from_column_slice(sm.populations());
        let rates = sm.rate_matrix();
        let expected: DVector<f64> = (rates * t).exp() * p0;
        let model: BipartiteModel = sm.into();
        let (a, b) = (random_density(&mut r, 2), random_density(&mut r, 2));
        let (sa, sb) = (evolve(&model, &a, t), evolve(&model, &b, t));
        for c in 0..nc {
            let pa = sa.block(c).unwrap().trace().re;
            let pb = sb.block(c).unwrap().trace().re;
            prop_assert!((pa - pb).abs() < 1e-9);
            prop_assert!((pa - expected[c]).abs() < 1e-9);
        }
    }

    #[test]
    fn bystander_environment_follows_its_own_lindblad(seed in any::<u64>(), de in 2usize..4, t in 0.0f64..4.0) {
        let mut r = rng(seed);
        let qb = random_quantum_bystander(&mut r, 2, de).unwrap();
        let direct = qb.environment_generator().exp(t).unwrap().apply_matrix(qb.initial_env().matrix()).unwrap();
        let model: BipartiteModel = qb.into();
        let full = evolve(&model, &random_density(&mut r, 2), t);
        prop_assert!(max_abs(&(full.env_marginal() - direct)) < 1e-8);
    }

    #[test]
    fn mixture_weights_are_frozen(seed in any::<u64>(), nc in 2usize..4, t in 0.0f64..4.0) {
        let mut r = rng(seed);
        let cm = random_classical_mixture(&mut r, 2, nc).unwrap();
        let weights = cm.weights().to_vec();
        let model: BipartiteModel = cm.into();
        let s = evolve(&model, &random_density(&mut r, 2), t);
        for (c, w) in weights.iter().enumerate() {
            prop_assert!((s.block(c).unwrap().trace().re - w).abs() < 1e-10);
        }
    }
}

#[test]
fn rate_matrix_columns_sum_to_zero() {
    let sm = random_stochastic_env(&mut rng(3), 2, 3).unwrap();
    let q: DMatrix<f64> = sm.rate_matrix();
    for col in q.column_iter() {
        assert!(col.sum().abs() < 1e-14);
    }
}
