//! Trace-distance and conditional past-future (CPF) diagnostics of memory.

mod cpf;
mod measurement;
mod td;

pub use cpf::{
    cpf_correlation, cpf_joint, cpf_joint_deterministic, cpf_joint_random, cpf_surface,
    markov_factorization_gap, reference_preparation, CpfResult, JointDistribution, Scheme,
    SchemeTag, UNDEFINED_CONDITIONAL,
};
pub use measurement::{CpfSpecs, MeasurementSpec, RandomSchemePolicy};
pub use td::{td_bound_terms, td_series, td_series_with_bounds, BoundTerms, TdTrace, REVIVAL_TOL};

use crate::error::{QflowError, Result};
use crate::evolve::{Evolution, TimeGrid};
use crate::models::{BipartiteModel, BipartiteState};
use crate::qcore::CMatrix;

/// A model together with its propagator, shared by all witness evaluations.
#[derive(Clone, Debug)]
pub struct WitnessEngine {
    model: BipartiteModel,
    evolution: Evolution,
}

impl WitnessEngine {
    /// Exact propagation for static models; RK4 with `max_step` (or the
    /// default step) for modulated ones.
    pub fn new(model: BipartiteModel, max_step: Option<f64>) -> Result<Self> {
        let evolution = Evolution::for_model(&model, max_step)?;
        Ok(Self { model, evolution })
    }

    pub fn with_evolution(model: BipartiteModel, evolution: Evolution) -> Result<Self> {
        if evolution.layout() != model.layout() {
            return Err(QflowError::InvalidInput(
                "evolution does not match model".into(),
            ));
        }
        Ok(Self { model, evolution })
    }

    pub fn model(&self) -> &BipartiteModel {
        &self.model
    }

    pub fn evolution(&self) -> &Evolution {
        &self.evolution
    }

    pub fn product(&self, system: &CMatrix, env: &CMatrix) -> Result<BipartiteState> {
        BipartiteState::product(self.model.layout(), system, env)
    }

    pub fn evolve(&self, state: &BipartiteState, t0: f64, t1: f64) -> Result<BipartiteState> {
        self.evolution.evolve(state, t0, t1)
    }

    pub fn propagate(
        &self,
        initial: &BipartiteState,
        grid: &TimeGrid,
    ) -> Result<Vec<BipartiteState>> {
        crate::evolve::propagate_with(&self.evolution, initial, grid)
    }

    fn check_system(&self, m: &CMatrix) -> Result<()> {
        let ds = self.model.system_dim();
        if m.nrows() != ds || m.ncols() != ds {
            return Err(QflowError::DimensionMismatch {
                expected: ds,
                found: m.nrows(),
            });
        }
        Ok(())
    }

    fn check_env(&self, m: &CMatrix) -> Result<()> {
        let de = self.model.layout().env_dim();
        if m.nrows() != de || m.ncols() != de {
            return Err(QflowError::DimensionMismatch {
                expected: de,
                found: m.nrows(),
            });
        }
        Ok(())
    }
}
