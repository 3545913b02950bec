//! Closed forms and reduced solvers for the depolarizing model.
//!
//! Environment arrays use model order `[p₁, p₂, p₃, p₄]` (index 3 is the rest
//! state) unless stated otherwise.

use nalgebra::DVector;

use super::cache::PropagatorCache;
use super::grid::TimeGrid;
use super::rk4::rk4_integrate;
use crate::error::{QflowError, Result};
use crate::models::{drive_hamiltonian, Modulation, REST};
use crate::qcore::{lindblad_superoperator, CVector, QOperator, C64};

fn check_rates(gamma: f64, phi: f64) -> Result<()> {
    if !(gamma > 0.0 && phi > 0.0) || !gamma.is_finite() || !phi.is_finite() {
        return Err(QflowError::InvalidInput(format!(
            "rates must be positive, got gamma = {gamma}, phi = {phi}"
        )));
    }
    Ok(())
}

/// Depolarizing weight for a stationary environment:
/// `(γ²+3φ²)/(3(γ+φ)²) + 4γφ e^{−(γ+φ)t}/(3(γ+φ)²) + 2γ e^{−φt}/(3(γ+φ))`.
pub fn analytic_w(gamma: f64, phi: f64, t: f64) -> Result<f64> {
    check_rates(gamma, phi)?;
    let s = gamma + phi;
    Ok((gamma * gamma + 3.0 * phi * phi) / (3.0 * s * s)
        + 4.0 * gamma * phi * (-s * t).exp() / (3.0 * s * s)
        + 2.0 * gamma * (-phi * t).exp() / (3.0 * s))
}

/// Trace-distance contraction factor `d = |4w − 1| / 3`.
pub fn td_factor_from_w(w: f64) -> f64 {
    (4.0 * w - 1.0).abs() / 3.0
}

pub fn analytic_td_factor(gamma: f64, phi: f64, t: f64) -> Result<f64> {
    Ok(td_factor_from_w(analytic_w(gamma, phi, t)?))
}

/// `(p₄, p₁, p₂, p₃)` with `p₄ = φ/(γ+φ)` and `p_k = γ/(3(γ+φ))`.
pub fn stationary_populations(gamma: f64, phi: f64) -> Result<[f64; 4]> {
    check_rates(gamma, phi)?;
    let s = gamma + phi;
    let pk = gamma / (3.0 * s);
    Ok([phi / s, pk, pk, pk])
}

/// [`stationary_populations`] in model order `[p₁, p₂, p₃, p₄]`.
pub fn stationary_env_populations(gamma: f64, phi: f64) -> Result<[f64; 4]> {
    let [p4, p1, p2, p3] = stationary_populations(gamma, phi)?;
    Ok([p1, p2, p3, p4])
}

/// Pauli product label: `σ_a σ_b ∝ σ_{a∘b}` on zero-based indices, 3 = identity.
fn pauli_product(a: usize, b: usize) -> usize {
    match (a, b) {
        (REST, x) | (x, REST) => x,
        (x, y) if x == y => REST,
        (x, y) => 3 - x - y,
    }
}

/// `g[k][j](t)` such that `ρ̃_k(t) = Σ_j g_k^j(t) σ_j ρ₀ σ_j`, on a time grid.
#[derive(Clone, Debug)]
pub struct GCoefficients {
    times: Vec<f64>,
    values: Vec<[[f64; 4]; 4]>,
}

impl GCoefficients {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// `g[k][j]` at grid index `i`.
    pub fn at(&self, i: usize) -> &[[f64; 4]; 4] {
        &self.values[i]
    }

    /// `w = Σ_k g_k^4`.
    pub fn w(&self, i: usize) -> f64 {
        self.values[i].iter().map(|row| row[REST]).sum()
    }

    pub fn w_series(&self) -> Vec<f64> {
        (0..self.times.len()).map(|i| self.w(i)).collect()
    }

    /// `p_k = Σ_j g_k^j`.
    pub fn populations(&self, i: usize) -> [f64; 4] {
        let g = &self.values[i];
        [0, 1, 2, 3].map(|k| g[k].iter().sum())
    }

    /// `Σ_k g_k^j` for Pauli label `j`.
    pub fn channel_weight(&self, i: usize, j: usize) -> f64 {
        self.values[i].iter().map(|row| row[j]).sum()
    }
}

fn g_rhs(gamma: f64, phi: f64, y: &DVector<f64>) -> DVector<f64> {
    let g = |k: usize, j: usize| y[4 * k + j];
    DVector::from_fn(16, |idx, _| {
        let (k, m) = (idx / 4, idx % 4);
        if k == REST {
            -gamma * g(REST, m) + phi * (0..REST).map(|q| g(q, pauli_product(q, m))).sum::<f64>()
        } else {
            -phi * g(k, m) + gamma / 3.0 * g(REST, pauli_product(k, m))
        }
    })
}

/// Integrates the sixteen coupled equations for `g_k^j` with RK4, starting from
/// `g_k^4(0) = p_k(0)`, `g_k^j(0) = 0`. Substeps never exceed `0.01/max(γ,φ,1)`.
pub fn solve_g_coefficients(
    gamma: f64,
    phi: f64,
    p0: [f64; 4],
    grid: &TimeGrid,
) -> Result<GCoefficients> {
    check_rates(gamma, phi)?;
    if p0.iter().any(|&p| p < 0.0) || (p0.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(QflowError::InvalidInput(format!(
            "initial populations {p0:?} are not a distribution"
        )));
    }
    let max_step = 0.01 / gamma.max(phi).max(1.0);
    let rhs = |_t: f64, y: &DVector<f64>| g_rhs(gamma, phi, y);
    let mut y = DVector::zeros(16);
    for k in 0..4 {
        y[4 * k + REST] = p0[k];
    }
    let mut t = 0.0;
    let mut values = Vec::with_capacity(grid.len());
    for &tn in grid.times() {
        y = rk4_integrate(&rhs, t, tn, &y, max_step);
        t = tn;
        let total: f64 = y.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(QflowError::TraceDrift { drift: total - 1.0 });
        }
        values.push([0, 1, 2, 3].map(|k| [0, 1, 2, 3].map(|j| y[4 * k + j])));
    }
    Ok(GCoefficients {
        times: grid.times().to_vec(),
        values,
    })
}

/// Slow-modulation ratio accepted by [`adiabatic_w`].
pub const SLOWNESS_LIMIT: f64 = 0.01;

/// Adiabatic estimate `w(t) ≈ p₄(t)² + Σ_k p_k(t)²` with the instantaneous
/// populations `p₄ = φ(1−b)/(γ+φ)` and `p_k = γ(1+b)/(3(γ+φ))`.
///
/// Meant for `γt, φt ≫ 1`. Errors if `|b(t)| ≥ 1` or `sup|b'|/min(γ,φ)`
/// exceeds [`SLOWNESS_LIMIT`]; warns when `|γ−φ|/(γ+φ) > 0.2`.
pub fn adiabatic_w(gamma: f64, phi: f64, modulation: &Modulation, t: f64) -> Result<f64> {
    check_rates(gamma, phi)?;
    let b = modulation.value(t);
    if b.is_nan() || b.abs() >= 1.0 {
        return Err(QflowError::InvalidInput(format!(
            "|b(t)| = {} is not below 1",
            b.abs()
        )));
    }
    let ratio = modulation.max_slope() / gamma.min(phi);
    if ratio > SLOWNESS_LIMIT {
        return Err(QflowError::InvalidInput(format!(
            "modulation too fast: |b'|/min(gamma, phi) = {ratio} > {SLOWNESS_LIMIT}"
        )));
    }
    let asym = (gamma - phi).abs() / (gamma + phi);
    if asym > 0.2 {
        log::warn!(
            "adiabatic estimate assumes gamma ≈ phi; |gamma - phi|/(gamma + phi) = {asym:.3}"
        );
    }
    let s = gamma + phi;
    let p4 = phi * (1.0 - b) / s;
    let pk = gamma * (1.0 + b) / (3.0 * s);
    Ok(p4 * p4 + 3.0 * pk * pk)
}

/// `⟨4|ρ_e(t)|4⟩` for the driven four-level environment started in `|4⟩⟨4|`,
/// with jumps `|k⟩⟨4|` at `γ/3`, `|4⟩⟨k|` at `φ` and the drive Hamiltonian.
pub fn coherent_w(gamma: f64, phi: f64, omega: f64, grid: &TimeGrid) -> Result<Vec<f64>> {
    check_rates(gamma, phi)?;
    if !omega.is_finite() || omega < 0.0 {
        return Err(QflowError::InvalidInput(format!(
            "omega must be non-negative, got {omega}"
        )));
    }
    let mut jumps = Vec::new();
    for k in 0..REST {
        let down = QOperator::transition(4, k, REST);
        jumps.push((down.adjoint(), phi));
        jumps.push((down, gamma / 3.0));
    }
    let l = lindblad_superoperator(&drive_hamiltonian(omega), &jumps)?;
    let cache = PropagatorCache::new(l.into_matrix());
    let rest = REST + 4 * REST;
    let mut v = CVector::zeros(16);
    v[rest] = C64::new(1.0, 0.0);
    let mut t = 0.0;
    let mut out = Vec::with_capacity(grid.len());
    for &tn in grid.times() {
        if tn > t {
            v = cache.get(tn - t)?.as_ref() * &v;
            t = tn;
        }
        let trace: f64 = (0..4).map(|k| v[k + 4 * k].re).sum();
        if (trace - 1.0).abs() > crate::qcore::TRACE_DRIFT_TOL {
            return Err(QflowError::TraceDrift { drift: trace - 1.0 });
        }
        out.push(v[rest].re);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::classical_rate_matrix;

    #[test]
    fn w_starts_at_one_and_reduces_for_equal_rates() {
        for (g, p) in [(1.0, 0.25), (1.0, 1.0), (2.0, 7.0)] {
            assert!((analytic_w(g, p, 0.0).unwrap() - 1.0).abs() < 1e-15);
        }
        for t in [0.0f64, 0.3, 1.0, 4.0] {
            let e = (-t).exp();
            let expected = (1.0 + e * e + e) / 3.0;
            assert!((analytic_w(1.0, 1.0, t).unwrap() - expected).abs() < 1e-15);
        }
        assert!((analytic_w(1.0, 1.0, 60.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn td_factor_values() {
        assert!((analytic_td_factor(1.0, 1.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        let e = (-1.0f64).exp();
        let expected = 1.0 / 9.0 + 4.0 / 9.0 * (e + e * e);
        assert!((analytic_td_factor(1.0, 1.0, 1.0).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.33476).abs() < 1e-5);
        assert!((analytic_td_factor(1.0, 1.0, 80.0).unwrap() - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn stationary_populations_span_rate_matrix_kernel() {
        let p = stationary_populations(1.0, 1.0).unwrap();
        assert_eq!(p, [0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]);
        let big = stationary_populations(1.0, 1e12).unwrap();
        assert!((big[0] - 1.0).abs() < 1e-11 && big[1] < 1e-12);

        let (g, f) = (0.8, 2.3);
        let mut rates = vec![vec![0.0; 4]; 4];
        for k in 0..3 {
            rates[k][3] = g / 3.0;
            rates[3][k] = f;
        }
        let w = classical_rate_matrix(&rates);
        // kernel by replacing one balance row with normalization
        let mut a = w.clone();
        a.row_mut(3).fill(1.0);
        let mut rhs = nalgebra::DVector::zeros(4);
        rhs[3] = 1.0;
        let kernel = a.lu().solve(&rhs).unwrap();
        let expected = stationary_env_populations(g, f).unwrap();
        for k in 0..4 {
            assert!((kernel[k] - expected[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn g_coefficients_match_closed_form() {
        let grid = TimeGrid::uniform(6.0, 0.01).unwrap();
        for (g, p) in [(1.0, 0.25), (1.0, 1.0), (1.0, 4.0)] {
            let coeffs =
                solve_g_coefficients(g, p, stationary_env_populations(g, p).unwrap(), &grid)
                    .unwrap();
            for (i, &t) in grid.times().iter().enumerate() {
                let w = coeffs.w(i);
                assert!((w - analytic_w(g, p, t).unwrap()).abs() < 1e-8);
                for j in 0..3 {
                    assert!(((1.0 - w) / 3.0 - coeffs.channel_weight(i, j)).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn pauli_products() {
        assert_eq!(pauli_product(0, 1), 2);
        assert_eq!(pauli_product(2, 2), REST);
        assert_eq!(pauli_product(1, REST), 1);
        assert_eq!(pauli_product(REST, REST), REST);
    }

    #[test]
    fn undriven_coherent_w_matches_incoherent_solution() {
        let grid = TimeGrid::uniform(10.0, 0.005).unwrap();
        let w = coherent_w(1.0, 1.0, 0.0, &grid).unwrap();
        let g = solve_g_coefficients(1.0, 1.0, [0.0, 0.0, 0.0, 1.0], &grid).unwrap();
        assert_eq!(w[0], 1.0);
        for i in 0..grid.len() {
            assert!(
                (w[i] - g.w(i)).abs() < 1e-8,
                "t {}: {} vs {}",
                grid.times()[i],
                w[i],
                g.w(i)
            );
        }
    }

    #[test]
    fn adiabatic_without_modulation_is_static_limit() {
        let m = Modulation::sine(0.0, 0.01).unwrap();
        let w = adiabatic_w(1.0, 1.0, &m, 50.0).unwrap();
        assert!((w - analytic_w(1.0, 1.0, 1e3).unwrap()).abs() < 1e-15);
        let fast = Modulation::sine(0.5, 1.0).unwrap();
        assert!(adiabatic_w(1.0, 1.0, &fast, 1.0).is_err());
    }
}
