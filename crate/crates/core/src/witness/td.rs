use super::WitnessEngine;
use crate::error::{QflowError, Result};
use crate::evolve::TimeGrid;
use crate::models::BipartiteState;
use crate::qcore::{trace_distance_matrix, DensityMatrix, PROPAGATION_TOL};

/// Smallest step-to-step increase of `D` reported as a revival.
pub const REVIVAL_TOL: f64 = 1e-6;

/// Environment and correlation terms bounding a trace-distance increase.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundTerms {
    /// `D(ρ_{t+τ}, σ_{t+τ}) − D(ρ_t, σ_t)` on the system.
    pub increment: f64,
    /// `D(ρ_t^e, σ_t^e)`.
    pub env_distance: f64,
    /// `D(ρ_t^{se}, ρ_t^s ⊗ ρ_t^e)`.
    pub corr_rho: f64,
    /// `D(σ_t^{se}, σ_t^s ⊗ σ_t^e)`.
    pub corr_sigma: f64,
    /// Sum of the three terms minus the increment; never below `−1e-9`.
    pub slack: f64,
}

/// `D(ρ_t^s, σ_t^s)` on a grid with revival flags.
#[derive(Clone, Debug, PartialEq)]
pub struct TdTrace {
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
    /// `revivals[i]` is set when `D(t_{i+1}) − D(t_i) > REVIVAL_TOL`; the last entry is always false.
    pub revivals: Vec<bool>,
    /// Per grid time `(D_env, corr_ρ, corr_σ)`, when requested.
    pub bound: Option<Vec<(f64, f64, f64)>>,
}

impl TdTrace {
    fn new(times: Vec<f64>, distances: Vec<f64>, bound: Option<Vec<(f64, f64, f64)>>) -> Self {
        let mut revivals: Vec<bool> = distances
            .windows(2)
            .map(|w| w[1] - w[0] > REVIVAL_TOL)
            .collect();
        revivals.push(false);
        Self {
            times,
            distances,
            revivals,
            bound,
        }
    }

    pub fn has_revival(&self) -> bool {
        self.revivals.iter().any(|&r| r)
    }

    /// Largest step-to-step increase (`≤ 0` for a monotone trace).
    pub fn max_increase(&self) -> f64 {
        self.distances
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn system_distance(a: &BipartiteState, b: &BipartiteState) -> f64 {
    trace_distance_matrix(&a.system_marginal(), &b.system_marginal()).min(1.0)
}

fn bound_snapshot(a: &BipartiteState, b: &BipartiteState) -> (f64, f64, f64) {
    (
        trace_distance_matrix(&a.env_marginal(), &b.env_marginal()),
        trace_distance_matrix(&a.to_matrix(), &a.marginal_product()),
        trace_distance_matrix(&b.to_matrix(), &b.marginal_product()),
    )
}

fn initial_pair(
    engine: &WitnessEngine,
    rho0s: &DensityMatrix,
    sigma0s: &DensityMatrix,
    env0: &DensityMatrix,
) -> Result<(BipartiteState, BipartiteState)> {
    engine.check_system(rho0s.matrix())?;
    engine.check_system(sigma0s.matrix())?;
    engine.check_env(env0.matrix())?;
    Ok((
        engine.product(rho0s.matrix(), env0.matrix())?,
        engine.product(sigma0s.matrix(), env0.matrix())?,
    ))
}

fn series(
    engine: &WitnessEngine,
    rho0s: &DensityMatrix,
    sigma0s: &DensityMatrix,
    env0: &DensityMatrix,
    grid: &TimeGrid,
    with_bounds: bool,
) -> Result<TdTrace> {
    let (r0, s0) = initial_pair(engine, rho0s, sigma0s, env0)?;
    let rs = engine.propagate(&r0, grid)?;
    let ss = engine.propagate(&s0, grid)?;
    let distances = rs
        .iter()
        .zip(&ss)
        .map(|(a, b)| system_distance(a, b))
        .collect();
    let bound = with_bounds.then(|| {
        rs.iter()
            .zip(&ss)
            .map(|(a, b)| bound_snapshot(a, b))
            .collect()
    });
    Ok(TdTrace::new(grid.times().to_vec(), distances, bound))
}

/// `D(ρ_t^s, σ_t^s)` for two system states sharing the environment state `env0`.
pub fn td_series(
    engine: &WitnessEngine,
    rho0s: &DensityMatrix,
    sigma0s: &DensityMatrix,
    env0: &DensityMatrix,
    grid: &TimeGrid,
) -> Result<TdTrace> {
    series(engine, rho0s, sigma0s, env0, grid, false)
}

/// [`td_series`] plus the environment and correlation terms at every grid time.
pub fn td_series_with_bounds(
    engine: &WitnessEngine,
    rho0s: &DensityMatrix,
    sigma0s: &DensityMatrix,
    env0: &DensityMatrix,
    grid: &TimeGrid,
) -> Result<TdTrace> {
    series(engine, rho0s, sigma0s, env0, grid, true)
}

/// Increment of `D` between `t` and `t + τ` with its bounding terms at `t`.
pub fn td_bound_terms(
    engine: &WitnessEngine,
    rho0s: &DensityMatrix,
    sigma0s: &DensityMatrix,
    env0: &DensityMatrix,
    t: f64,
    tau: f64,
) -> Result<BoundTerms> {
    let (r0, s0) = initial_pair(engine, rho0s, sigma0s, env0)?;
    let rt = engine.evolve(&r0, 0.0, t)?;
    let st = engine.evolve(&s0, 0.0, t)?;
    let rtt = engine.evolve(&rt, t, t + tau)?;
    let stt = engine.evolve(&st, t, t + tau)?;
    let increment = system_distance(&rtt, &stt) - system_distance(&rt, &st);
    let (env_distance, corr_rho, corr_sigma) = bound_snapshot(&rt, &st);
    let slack = env_distance + corr_rho + corr_sigma - increment;
    if slack < -PROPAGATION_TOL {
        return Err(QflowError::Invariant(format!(
            "trace-distance bound violated by {:e}",
            -slack
        )));
    }
    Ok(BoundTerms {
        increment,
        env_distance,
        corr_rho,
        corr_sigma,
        slack,
    })
}
