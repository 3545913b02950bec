//! Bipartite model classes, all reduced to a linear [`Generator`] on a
//! [`Layout`].

mod classes;
mod depolarizing;
pub mod file;
mod layout;
mod presets;
pub mod random;
mod unitary;

#[cfg(test)]
pub(crate) use classes::classical_rate_matrix;
pub use classes::{
    BornMarkovModel, ClassicalMixtureModel, Collision, QuantumBystanderModel, StochasticEnvModel,
    UnitaryModel,
};
pub use depolarizing::{drive_hamiltonian, DepolarizingModel, DepolarizingParts, Modulation, REST};
pub use layout::{BipartiteState, Generator, Layout};
pub use presets::{commuting_model, damping_born_markov, exchange_model};
pub use unitary::{
    check_commuting_exception, ensemble_state, random_unitary_decomposition, UnitaryBranch,
};

use crate::error::Result;
use crate::qcore::{c, max_abs, DensityMatrix, Superoperator, PROPAGATION_TOL};

#[derive(Clone, Debug)]
pub enum BipartiteModel {
    ClassicalMixture(ClassicalMixtureModel),
    StochasticEnv(StochasticEnvModel),
    QuantumBystander(QuantumBystanderModel),
    Unitary(UnitaryModel),
    Depolarizing(DepolarizingModel),
    BornMarkov(BornMarkovModel),
}

impl BipartiteModel {
    pub fn layout(&self) -> Layout {
        match self {
            BipartiteModel::ClassicalMixture(m) => m.layout(),
            BipartiteModel::StochasticEnv(m) => m.layout(),
            BipartiteModel::QuantumBystander(m) => m.layout(),
            BipartiteModel::Unitary(m) => m.layout(),
            BipartiteModel::Depolarizing(m) => m.layout(),
            BipartiteModel::BornMarkov(m) => m.layout(),
        }
    }

    pub fn system_dim(&self) -> usize {
        self.layout().system_dim()
    }

    pub fn initial_env(&self) -> DensityMatrix {
        match self {
            BipartiteModel::ClassicalMixture(m) => m.initial_env().expect("validated weights"),
            BipartiteModel::StochasticEnv(m) => m.initial_env().expect("validated populations"),
            BipartiteModel::QuantumBystander(m) => m.initial_env().clone(),
            BipartiteModel::Unitary(m) => m.initial_env().clone(),
            BipartiteModel::Depolarizing(m) => m.initial_env(),
            BipartiteModel::BornMarkov(m) => m.initial_env().clone(),
        }
    }

    pub fn is_time_dependent(&self) -> bool {
        matches!(self, BipartiteModel::Depolarizing(m) if m.modulation().is_some())
    }

    /// Generator at time `t`; every class except a modulated depolarizing
    /// model ignores `t`.
    pub fn generator_at(&self, t: f64) -> Result<Generator> {
        match self {
            BipartiteModel::ClassicalMixture(m) => m.generator(),
            BipartiteModel::StochasticEnv(m) => m.generator(),
            BipartiteModel::QuantumBystander(m) => m.generator(),
            BipartiteModel::Unitary(m) => m.generator(),
            BipartiteModel::Depolarizing(m) => m.generator_at(t),
            BipartiteModel::BornMarkov(m) => m.generator(),
        }
    }

    /// A characteristic inverse time, at least 1.
    pub fn rate_scale(&self) -> f64 {
        let s = match self {
            BipartiteModel::Depolarizing(m) => m.rate_scale(),
            _ => self
                .generator_at(0.0)
                .map(|g| spectral_bound(g.matrix()))
                .unwrap_or(1.0),
        };
        s.max(1.0)
    }

    pub fn class_name(&self) -> &'static str {
        match self {
            BipartiteModel::ClassicalMixture(_) => "classical_mixture",
            BipartiteModel::StochasticEnv(_) => "stochastic_env",
            BipartiteModel::QuantumBystander(_) => "quantum_bystander",
            BipartiteModel::Unitary(_) => "unitary",
            BipartiteModel::Depolarizing(_) => "depolarizing",
            BipartiteModel::BornMarkov(_) => "born_markov",
        }
    }
}

fn spectral_bound(m: &crate::qcore::CMatrix) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

impl From<ClassicalMixtureModel> for BipartiteModel {
    fn from(m: ClassicalMixtureModel) -> Self {
        BipartiteModel::ClassicalMixture(m)
    }
}

impl From<StochasticEnvModel> for BipartiteModel {
    fn from(m: StochasticEnvModel) -> Self {
        BipartiteModel::StochasticEnv(m)
    }
}

impl From<QuantumBystanderModel> for BipartiteModel {
    fn from(m: QuantumBystanderModel) -> Self {
        BipartiteModel::QuantumBystander(m)
    }
}

impl From<UnitaryModel> for BipartiteModel {
    fn from(m: UnitaryModel) -> Self {
        BipartiteModel::Unitary(m)
    }
}

impl From<DepolarizingModel> for BipartiteModel {
    fn from(m: DepolarizingModel) -> Self {
        BipartiteModel::Depolarizing(m)
    }
}

impl From<BornMarkovModel> for BipartiteModel {
    fn from(m: BornMarkovModel) -> Self {
        BipartiteModel::BornMarkov(m)
    }
}

/// Generator of `model` at time `t`, checked for trace preservation.
pub fn assemble_generator(model: &BipartiteModel, t: f64) -> Result<Generator> {
    let g = model.generator_at(t)?;
    let r = g.trace_residual();
    if r > PROPAGATION_TOL {
        return Err(crate::QflowError::Invariant(format!(
            "{} generator is not trace preserving ({r:e})",
            model.class_name()
        )));
    }
    Ok(g)
}

/// Product-form control model with a frozen environment.
pub fn born_markov_model(system: Superoperator, env: DensityMatrix) -> Result<BipartiteModel> {
    Ok(BornMarkovModel::new(system, env)?.into())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BystanderReport {
    pub holds: bool,
    pub residual: f64,
}

/// Whether `X ↦ Tr_s(𝓛[X])` vanishes on the kernel of `Tr_s`, i.e. whether
/// the environment marginal evolves independently of the system.
///
/// With `P` the matrix of `Tr_s` (so `P P† = ds·I`), the kernel projector is
/// `I − P†P/ds` and the residual is `max |P 𝓛 (I − P†P/ds)|`. Modulated models
/// are checked at `t = 0`.
pub fn check_casual_bystander(model: &BipartiteModel) -> Result<BystanderReport> {
    let g = model.generator_at(0.0)?;
    let layout = g.layout();
    let p = layout.system_trace_map();
    let pl = &p * g.matrix();
    let q = p.adjoint() * &p * c(1.0 / layout.system_dim() as f64);
    let residual = max_abs(&(&pl - &pl * q));
    Ok(BystanderReport {
        holds: residual < PROPAGATION_TOL,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{kron, lindblad_superoperator, pauli, QOperator};

    #[test]
    fn depolarizing_is_bystander_with_and_without_drive() {
        for omega in [0.0, 2.5] {
            let m: BipartiteModel = DepolarizingModel::from_rest(1.0, 0.5, omega)
                .unwrap()
                .into();
            let r = check_casual_bystander(&m).unwrap();
            assert!(r.holds, "omega {omega}: residual {}", r.residual);
        }
    }

    #[test]
    fn exchange_coupling_breaks_bystander() {
        let g = 0.8;
        let h_i = kron(&pauli::sigma_x(), &pauli::sigma_x()).scale(g);
        let m = UnitaryModel::new(
            QOperator::zeros(2),
            pauli::sigma_z().scale(1.3),
            h_i,
            DensityMatrix::basis(2, 0).unwrap(),
        )
        .unwrap();
        let r = check_casual_bystander(&m.into()).unwrap();
        assert!(!r.holds);
        assert!(r.residual > 1e-3 * g);
    }

    #[test]
    fn mixture_generator_is_block_diagonal() {
        let l1 = lindblad_superoperator(&pauli::sigma_z(), &[(pauli::sigma_minus(), 0.3)]).unwrap();
        let l2 = lindblad_superoperator(&pauli::sigma_x(), &[]).unwrap();
        let m = ClassicalMixtureModel::new(vec![l1.clone(), l2.clone()], vec![0.25, 0.75]).unwrap();
        let g = assemble_generator(&m.into(), 0.0).unwrap();
        let blk = g.matrix().view((0, 4), (4, 4));
        assert!(max_abs(&blk.clone_owned()) == 0.0);
        assert_eq!(g.matrix().view((4, 4), (4, 4)).clone_owned(), *l2.matrix());
    }

    #[test]
    fn unitary_generator_exponentiates_to_unitary() {
        let h_i = kron(&pauli::sigma_y(), &pauli::sigma_z()).scale(0.4);
        let m = UnitaryModel::new(
            pauli::sigma_x(),
            pauli::sigma_z(),
            h_i,
            DensityMatrix::maximally_mixed(2),
        )
        .unwrap();
        let g = m.generator().unwrap().as_superoperator().unwrap();
        let e = g.exp(0.9).unwrap();
        let u = crate::qcore::matrix_exp(
            &(m.total_hamiltonian().matrix() * crate::qcore::C64::new(0.0, -0.9)),
        )
        .unwrap();
        let expected = Superoperator::sandwich(
            &QOperator::new(u.clone()).unwrap(),
            &QOperator::new(u.adjoint()).unwrap(),
        );
        assert!(max_abs(&(e.matrix() - expected.matrix())) < 1e-10);
    }
}
