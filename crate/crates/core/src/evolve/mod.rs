//! Propagation of bipartite states and the depolarizing-model oracles.
//!
//! Time-independent generators are propagated with cached matrix
//! exponentials. Modulated depolarizing models use fixed-step RK4.

mod analytic;
mod cache;
mod grid;
mod rk4;

pub use analytic::{
    adiabatic_w, analytic_td_factor, analytic_w, coherent_w, solve_g_coefficients,
    stationary_env_populations, stationary_populations, td_factor_from_w, GCoefficients,
    SLOWNESS_LIMIT,
};
pub use cache::PropagatorCache;
pub use grid::TimeGrid;
pub use rk4::{rk4_integrate, rk4_step};

use crate::error::{QflowError, Result};
use crate::models::{
    assemble_generator, BipartiteModel, BipartiteState, DepolarizingModel, Layout,
};
use crate::qcore::{c, CMatrix, CVector, TRACE_DRIFT_TOL};

#[derive(Clone, Debug)]
enum StepRhs {
    Fixed(CMatrix),
    Modulated {
        model: DepolarizingModel,
        gamma_part: CMatrix,
        phi_part: CMatrix,
        drive: CMatrix,
    },
}

impl StepRhs {
    fn apply(&self, t: f64, v: &CVector) -> CVector {
        match self {
            StepRhs::Fixed(m) => m * v,
            StepRhs::Modulated {
                model,
                gamma_part,
                phi_part,
                drive,
            } => {
                let (g, p) = model.rates_at(t);
                gamma_part * v * c(g) + phi_part * v * c(p) + drive * v
            }
        }
    }
}

/// Two-time propagator `𝓖_{t1,t0}` of a model.
#[derive(Clone, Debug)]
pub enum Evolution {
    Exact {
        layout: Layout,
        cache: PropagatorCache,
    },
    Stepped {
        layout: Layout,
        rhs: StepRhsHandle,
        max_step: f64,
    },
}

/// Opaque right-hand side of a stepped evolution.
#[derive(Clone, Debug)]
pub struct StepRhsHandle(StepRhs);

impl Evolution {
    /// Exact exponentials for static models, RK4 with substeps no longer than
    /// `max_step` (default `0.01/rate_scale`) for modulated ones.
    pub fn for_model(model: &BipartiteModel, max_step: Option<f64>) -> Result<Self> {
        match model {
            BipartiteModel::Depolarizing(m) if m.modulation().is_some() => {
                let parts = m.parts();
                let safe = TimeGrid::default_step(model.rate_scale());
                Ok(Evolution::Stepped {
                    layout: m.layout(),
                    rhs: StepRhsHandle(StepRhs::Modulated {
                        model: m.clone(),
                        gamma_part: parts.gamma_part.matrix().clone(),
                        phi_part: parts.phi_part.matrix().clone(),
                        drive: parts.drive.matrix().clone(),
                    }),
                    max_step: max_step.map_or(safe, |h| h.min(safe)),
                })
            }
            _ => {
                let g = assemble_generator(model, 0.0)?;
                Ok(Evolution::Exact {
                    layout: g.layout(),
                    cache: PropagatorCache::new(g.matrix().clone()),
                })
            }
        }
    }

    /// RK4 for any model, including static ones.
    pub fn stepped(model: &BipartiteModel, max_step: f64) -> Result<Self> {
        if !max_step.is_finite() || max_step <= 0.0 {
            return Err(QflowError::InvalidInput(format!(
                "step must be positive, got {max_step}"
            )));
        }
        match Self::for_model(model, Some(max_step))? {
            Evolution::Exact { layout, cache } => Ok(Evolution::Stepped {
                layout,
                rhs: StepRhsHandle(StepRhs::Fixed(cache.generator().clone())),
                max_step,
            }),
            stepped => Ok(stepped),
        }
    }

    pub fn layout(&self) -> Layout {
        match self {
            Evolution::Exact { layout, .. } | Evolution::Stepped { layout, .. } => *layout,
        }
    }

    /// Applies `𝓖_{t1,t0}` to a state given at `t0`.
    pub fn evolve(&self, state: &BipartiteState, t0: f64, t1: f64) -> Result<BipartiteState> {
        if state.layout() != self.layout() {
            return Err(QflowError::InvalidInput(
                "state layout does not match the model".into(),
            ));
        }
        if t1 < t0 {
            return Err(QflowError::InvalidInput(format!(
                "cannot evolve backwards from {t0} to {t1}"
            )));
        }
        let data = if t1 == t0 {
            state.data().clone()
        } else {
            match self {
                Evolution::Exact { cache, .. } => cache.get(t1 - t0)?.as_ref() * state.data(),
                Evolution::Stepped { rhs, max_step, .. } => {
                    let f = |t: f64, v: &CVector| rhs.0.apply(t, v);
                    rk4_integrate(&f, t0, t1, state.data(), *max_step)
                }
            }
        };
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QflowError::NonFinite("propagated state"));
        }
        Ok(BipartiteState::from_vector(self.layout(), data)?.symmetrized())
    }
}

/// Errors when the trace of `state` has drifted from `reference` by more than
/// the propagation tolerance.
pub fn check_trace(state: &BipartiteState, reference: f64) -> Result<()> {
    let drift = state.trace() - reference;
    if drift.abs() > TRACE_DRIFT_TOL {
        return Err(QflowError::TraceDrift { drift });
    }
    Ok(())
}

/// States on every grid point, with `initial` taken to be the state at the
/// first grid time.
pub fn propagate(
    model: &BipartiteModel,
    initial: &BipartiteState,
    grid: &TimeGrid,
) -> Result<Vec<BipartiteState>> {
    let evolution = Evolution::for_model(model, grid.step())?;
    propagate_with(&evolution, initial, grid)
}

pub fn propagate_with(
    evolution: &Evolution,
    initial: &BipartiteState,
    grid: &TimeGrid,
) -> Result<Vec<BipartiteState>> {
    let reference = initial.trace();
    let times = grid.times();
    let mut out = Vec::with_capacity(times.len());
    let mut current = initial.symmetrized();
    out.push(current.clone());
    for w in times.windows(2) {
        current = evolution.evolve(&current, w[0], w[1])?;
        check_trace(&current, reference)?;
        out.push(current.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::random::{random_density, random_unitary_model};
    use crate::models::{BornMarkovModel, DepolarizingModel, Modulation};
    use crate::qcore::{max_abs, trace_distance_matrix, DensityMatrix, Superoperator};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_generator_keeps_state_constant() {
        let rho = random_density(&mut ChaCha8Rng::seed_from_u64(2), 2);
        let m: BipartiteModel =
            BornMarkovModel::new(Superoperator::zero(2), DensityMatrix::maximally_mixed(3))
                .unwrap()
                .into();
        let s0 =
            BipartiteState::product(m.layout(), rho.matrix(), m.initial_env().matrix()).unwrap();
        let grid = TimeGrid::uniform(2.0, 0.1).unwrap();
        for s in propagate(&m, &s0, &grid).unwrap() {
            assert!(max_abs(&(s.data() - s0.data())) < 1e-14);
        }
    }

    #[test]
    fn unitary_model_conserves_purity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m: BipartiteModel = random_unitary_model(&mut rng, 2, 3).unwrap().into();
        let rho = random_density(&mut rng, 2);
        let s0 =
            BipartiteState::product(m.layout(), rho.matrix(), m.initial_env().matrix()).unwrap();
        let purity = |s: &BipartiteState| {
            let x = s.to_matrix();
            (&x * &x).trace().re
        };
        let p0 = purity(&s0);
        let grid = TimeGrid::uniform(3.0, 0.25).unwrap();
        for s in propagate(&m, &s0, &grid).unwrap() {
            assert!((purity(&s) - p0).abs() < 1e-9);
        }
    }

    #[test]
    fn stepped_and_exact_agree_for_static_depolarizing() {
        let m: BipartiteModel = DepolarizingModel::stationary(1.0, 0.25).unwrap().into();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rho = random_density(&mut rng, 2);
        let s0 =
            BipartiteState::product(m.layout(), rho.matrix(), m.initial_env().matrix()).unwrap();
        let grid = TimeGrid::uniform(6.0, 0.01).unwrap();
        let exact = propagate(&m, &s0, &grid).unwrap();
        let stepped = propagate_with(&Evolution::stepped(&m, 0.01).unwrap(), &s0, &grid).unwrap();
        for (a, b) in exact.iter().zip(&stepped) {
            let d = trace_distance_matrix(&a.system_marginal(), &b.system_marginal());
            assert!(d < 1e-8);
        }
    }

    #[test]
    fn modulation_with_zero_amplitude_matches_static() {
        let base = DepolarizingModel::stationary(1.0, 1.0).unwrap();
        let modulated: BipartiteModel = base
            .clone()
            .with_modulation(Modulation::sine(0.0, 0.3).unwrap())
            .unwrap()
            .into();
        let fixed: BipartiteModel = base.into();
        let s0 = BipartiteState::product(
            fixed.layout(),
            DensityMatrix::basis(2, 0).unwrap().matrix(),
            fixed.initial_env().matrix(),
        )
        .unwrap();
        let grid = TimeGrid::uniform(2.0, 0.05).unwrap();
        let a = propagate(&fixed, &s0, &grid).unwrap();
        let b = propagate(&modulated, &s0, &grid).unwrap();
        assert!(max_abs(&(a.last().unwrap().data() - b.last().unwrap().data())) < 1e-10);
    }
}
