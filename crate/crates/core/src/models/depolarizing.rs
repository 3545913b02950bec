//! Qubit coupled to a four-state environment that applies Pauli kicks.
//!
//! Environment index `k = 0, 1, 2` is the state labelled by `σ_x, σ_y, σ_z`,
//! index 3 is the "rest" state. Jumps `rest → k` happen at rate `γ/3`, jumps
//! `k → rest` at rate `φ`, and both apply `σ_k · σ_k` to the system. A non-zero
//! `Ω` adds the coherent environment drive
//! `H_e = (Ω/2) Σ_k (|k⟩⟨rest| + |rest⟩⟨k|)`, which forces the quantum layout.

use std::fmt;
use std::sync::Arc;

use super::classes::{
    collision_superoperator, Collision, QuantumBystanderModel, StochasticEnvModel,
};
use super::layout::{lift_env, Generator, Layout};
use crate::error::{QflowError, Result};
use crate::qcore::{c, pauli, CMatrix, DensityMatrix, KrausMap, QOperator, Superoperator};

/// Index of the rest state in the environment basis.
pub const REST: usize = 3;

/// Relative rate modulation `b(t)`: `γ(t) = γ(1 + b)`, `φ(t) = φ(1 − b)`.
#[derive(Clone)]
pub enum Modulation {
    /// `b(t) = amplitude · sin(frequency · t)`.
    Sine { amplitude: f64, frequency: f64 },
    /// Arbitrary `b(t)` with caller-declared bounds `sup |b| ≤ sup_norm` and
    /// `sup |b'| ≤ max_slope`.
    Custom {
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        sup_norm: f64,
        max_slope: f64,
    },
}

impl Modulation {
    pub fn sine(amplitude: f64, frequency: f64) -> Result<Self> {
        let m = Modulation::Sine {
            amplitude,
            frequency,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn custom(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        sup_norm: f64,
        max_slope: f64,
    ) -> Result<Self> {
        let m = Modulation::Custom {
            f: Arc::new(f),
            sup_norm,
            max_slope,
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        let (norm, slope) = (self.sup_norm(), self.max_slope());
        if !norm.is_finite() || !slope.is_finite() || slope < 0.0 {
            return Err(QflowError::InvalidInput(
                "non-finite modulation bounds".into(),
            ));
        }
        if norm >= 1.0 {
            return Err(QflowError::InvalidInput(format!(
                "modulation amplitude {norm} must stay below 1"
            )));
        }
        Ok(())
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Modulation::Sine {
                amplitude,
                frequency,
            } => amplitude * (frequency * t).sin(),
            Modulation::Custom { f, .. } => f(t),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            Modulation::Sine { amplitude, .. } => amplitude.abs(),
            Modulation::Custom { sup_norm, .. } => *sup_norm,
        }
    }

    pub fn max_slope(&self) -> f64 {
        match self {
            Modulation::Sine {
                amplitude,
                frequency,
            } => (amplitude * frequency).abs(),
            Modulation::Custom { max_slope, .. } => *max_slope,
        }
    }
}

impl fmt::Debug for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modulation::Sine {
                amplitude,
                frequency,
            } => write!(
                f,
                "Sine {{ amplitude: {amplitude}, frequency: {frequency} }}"
            ),
            Modulation::Custom {
                sup_norm,
                max_slope,
                ..
            } => write!(
                f,
                "Custom {{ sup_norm: {sup_norm}, max_slope: {max_slope} }}"
            ),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DepolarizingModel {
    gamma: f64,
    phi: f64,
    omega: f64,
    modulation: Option<Modulation>,
    populations: [f64; 4],
}

/// Generator split `L(t) = γ(t)·A + φ(t)·B + C`.
#[derive(Clone, Debug)]
pub struct DepolarizingParts {
    pub gamma_part: Generator,
    pub phi_part: Generator,
    pub drive: Generator,
}

impl DepolarizingModel {
    pub fn new(
        gamma: f64,
        phi: f64,
        omega: f64,
        modulation: Option<Modulation>,
        populations: [f64; 4],
    ) -> Result<Self> {
        for (name, r) in [("gamma", gamma), ("phi", phi)] {
            if !r.is_finite() || r <= 0.0 {
                return Err(QflowError::InvalidInput(format!(
                    "{name} must be positive, got {r}"
                )));
            }
        }
        if !omega.is_finite() || omega < 0.0 {
            return Err(QflowError::InvalidInput(format!(
                "omega must be non-negative, got {omega}"
            )));
        }
        if let Some(m) = &modulation {
            m.validate()?;
        }
        if populations.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(QflowError::InvalidInput(
                "negative environment population".into(),
            ));
        }
        let total: f64 = populations.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(QflowError::InvalidInput(format!(
                "environment populations sum to {total}"
            )));
        }
        Ok(Self {
            gamma,
            phi,
            omega,
            modulation,
            populations,
        })
    }

    /// Static rates, no drive, environment started in its stationary state.
    pub fn stationary(gamma: f64, phi: f64) -> Result<Self> {
        let s = gamma + phi;
        let pk = gamma / (3.0 * s);
        Self::new(gamma, phi, 0.0, None, [pk, pk, pk, phi / s])
    }

    /// Environment started in the rest state `|4⟩⟨4|`.
    pub fn from_rest(gamma: f64, phi: f64, omega: f64) -> Result<Self> {
        Self::new(gamma, phi, omega, None, [0.0, 0.0, 0.0, 1.0])
    }

    pub fn with_modulation(mut self, modulation: Modulation) -> Result<Self> {
        modulation.validate()?;
        self.modulation = Some(modulation);
        Ok(self)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn modulation(&self) -> Option<&Modulation> {
        self.modulation.as_ref()
    }

    pub fn populations(&self) -> [f64; 4] {
        self.populations
    }

    pub fn layout(&self) -> Layout {
        if self.omega == 0.0 {
            Layout::Classical { ds: 2, nc: 4 }
        } else {
            Layout::Quantum { ds: 2, de: 4 }
        }
    }

    pub fn initial_env(&self) -> DensityMatrix {
        DensityMatrix::diagonal(&self.populations).expect("validated populations")
    }

    /// Instantaneous `(γ(t), φ(t))`.
    pub fn rates_at(&self, t: f64) -> (f64, f64) {
        let b = self.modulation.as_ref().map_or(0.0, |m| m.value(t));
        (self.gamma * (1.0 + b), self.phi * (1.0 - b))
    }

    pub fn parts(&self) -> DepolarizingParts {
        parts_for(self.layout(), self.omega)
    }

    pub fn generator_at(&self, t: f64) -> Result<Generator> {
        let (g, p) = self.rates_at(t);
        if !(g > 0.0 && p > 0.0) {
            return Err(QflowError::Invariant(format!(
                "modulated rates ({g}, {p}) not positive at t = {t}"
            )));
        }
        let parts = self.parts();
        let m = parts.gamma_part.matrix() * c(g)
            + parts.phi_part.matrix() * c(p)
            + parts.drive.matrix();
        Generator::new(self.layout(), m)
    }

    /// The unmodulated, undriven model as a classical stochastic environment.
    pub fn stochastic_model(&self) -> Result<StochasticEnvModel> {
        let mut rates = vec![vec![0.0; 4]; 4];
        let mut jumps = Vec::new();
        for k in 0..REST {
            rates[k][REST] = self.gamma / 3.0;
            rates[REST][k] = self.phi;
            let kick = KrausMap::unitary(pauli::sigma(k + 1))?;
            jumps.push(((k, REST), kick.clone()));
            jumps.push(((REST, k), kick));
        }
        StochasticEnvModel::with_kraus(
            vec![Superoperator::zero(2); 4],
            rates,
            jumps,
            self.populations.to_vec(),
        )
    }

    /// The unmodulated model as a quantum casual bystander on the full space.
    pub fn bystander_model(&self) -> Result<QuantumBystanderModel> {
        QuantumBystanderModel::new(
            Superoperator::zero(2),
            Superoperator::hamiltonian(&drive_hamiltonian(self.omega)),
            collisions(self.gamma, self.phi)?,
            self.initial_env(),
        )
    }

    /// Largest rate entering the dynamics, used to size time steps.
    pub fn rate_scale(&self) -> f64 {
        let b = self.modulation.as_ref().map_or(0.0, |m| m.sup_norm());
        (self.gamma * (1.0 + b))
            .max(self.phi * (1.0 + b))
            .max(self.omega)
    }
}

/// `H_e = (Ω/2) Σ_k (|k⟩⟨rest| + |rest⟩⟨k|)`.
pub fn drive_hamiltonian(omega: f64) -> QOperator {
    let mut h = CMatrix::zeros(4, 4);
    for k in 0..REST {
        h[(k, REST)] = c(omega / 2.0);
        h[(REST, k)] = c(omega / 2.0);
    }
    QOperator::new(h).expect("finite")
}

fn collisions(gamma: f64, phi: f64) -> Result<Vec<Collision>> {
    let mut out = Vec::new();
    for k in 0..REST {
        let kick = KrausMap::unitary(pauli::sigma(k + 1))?;
        let down = QOperator::transition(4, k, REST);
        out.push(Collision {
            op: down.clone(),
            rate: gamma / 3.0,
            map: kick.clone(),
        });
        out.push(Collision {
            op: down.adjoint(),
            rate: phi,
            map: kick,
        });
    }
    Ok(out)
}

fn parts_for(layout: Layout, omega: f64) -> DepolarizingParts {
    match layout {
        Layout::Classical { .. } => {
            let b = 4;
            let id = CMatrix::identity(b, b);
            let mut a = CMatrix::zeros(16, 16);
            let mut p = CMatrix::zeros(16, 16);
            for k in 0..REST {
                let kick = KrausMap::unitary(pauli::sigma(k + 1))
                    .expect("Pauli is unitary")
                    .to_superoperator();
                let mut blk = a.view_mut((k * b, REST * b), (b, b));
                blk += kick.matrix() * c(1.0 / 3.0);
                let mut blk = p.view_mut((REST * b, k * b), (b, b));
                blk += kick.matrix();
                let mut blk = p.view_mut((k * b, k * b), (b, b));
                blk -= &id;
            }
            let mut blk = a.view_mut((REST * b, REST * b), (b, b));
            blk -= &id;
            DepolarizingParts {
                gamma_part: Generator::new(layout, a).expect("16x16"),
                phi_part: Generator::new(layout, p).expect("16x16"),
                drive: Generator::new(layout, CMatrix::zeros(16, 16)).expect("16x16"),
            }
        }
        Layout::Quantum { ds, de } => {
            let sum = |cols: Vec<Collision>| {
                cols.iter()
                    .map(|col| collision_superoperator(col).into_matrix())
                    .fold(CMatrix::zeros(64, 64), |acc, m| acc + m)
            };
            let a = sum(collisions(1.0, 0.0).expect("Pauli kicks"));
            let p = sum(collisions(0.0, 1.0).expect("Pauli kicks"));
            let drive = lift_env(&Superoperator::hamiltonian(&drive_hamiltonian(omega)), ds);
            DepolarizingParts {
                gamma_part: Generator::from_superoperator(
                    ds,
                    de,
                    Superoperator::new(ds * de, a).expect("64x64"),
                )
                .expect("dims"),
                phi_part: Generator::from_superoperator(
                    ds,
                    de,
                    Superoperator::new(ds * de, p).expect("64x64"),
                )
                .expect("dims"),
                drive: Generator::from_superoperator(ds, de, drive).expect("dims"),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::max_abs;

    #[test]
    fn classical_generator_matches_stochastic_builder() {
        let m = DepolarizingModel::stationary(0.7, 1.9).unwrap();
        let direct = m.generator_at(0.0).unwrap();
        let built = m.stochastic_model().unwrap().generator().unwrap();
        assert!(max_abs(&(direct.matrix() - built.matrix())) < 1e-14);
        assert!(direct.trace_residual() < 1e-14);
    }

    #[test]
    fn quantum_generator_matches_bystander_builder() {
        let m = DepolarizingModel::from_rest(1.0, 2.0, 3.0).unwrap();
        let direct = m.generator_at(0.0).unwrap();
        let built = m.bystander_model().unwrap().generator().unwrap();
        assert!(max_abs(&(direct.matrix() - built.matrix())) < 1e-13);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(DepolarizingModel::stationary(0.0, 1.0).is_err());
        assert!(DepolarizingModel::stationary(1.0, -1.0).is_err());
        assert!(DepolarizingModel::new(1.0, 1.0, 0.0, None, [0.5, 0.5, 0.5, 0.0]).is_err());
        assert!(Modulation::sine(1.0, 0.1).is_err());
    }

    #[test]
    fn modulated_rates() {
        let m = DepolarizingModel::stationary(2.0, 1.0)
            .unwrap()
            .with_modulation(Modulation::sine(0.5, 1.0).unwrap())
            .unwrap();
        let t = std::f64::consts::FRAC_PI_2;
        let (g, p) = m.rates_at(t);
        assert!((g - 3.0).abs() < 1e-14);
        assert!((p - 0.5).abs() < 1e-14);
    }
}
