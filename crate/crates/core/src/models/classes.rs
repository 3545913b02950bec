use super::layout::{env_op, lift_env, lift_system, Generator, Layout};
use crate::error::{QflowError, Result};
use crate::qcore::{
    c, kron, CMatrix, DensityMatrix, KrausMap, QOperator, Superoperator, PROPAGATION_TOL,
};

fn check_generator(gen: &Superoperator, ds: usize, what: &str) -> Result<()> {
    if gen.dim() != ds {
        return Err(QflowError::DimensionMismatch {
            expected: ds,
            found: gen.dim(),
        });
    }
    let r = gen.generator_trace_residual();
    if r > PROPAGATION_TOL {
        return Err(QflowError::Invariant(format!(
            "{what} is not trace preserving (residual {r:e})"
        )));
    }
    Ok(())
}

fn check_map(map: &Superoperator, ds: usize) -> Result<()> {
    if map.dim() != ds {
        return Err(QflowError::DimensionMismatch {
            expected: ds,
            found: map.dim(),
        });
    }
    let r = map.map_trace_residual();
    if r > PROPAGATION_TOL {
        return Err(QflowError::Invariant(format!(
            "jump map is not trace preserving (residual {r:e})"
        )));
    }
    Ok(())
}

fn check_distribution(p: &[f64], tol: f64) -> Result<()> {
    if p.is_empty() {
        return Err(QflowError::InvalidInput("empty distribution".into()));
    }
    if let Some(&bad) = p.iter().find(|&&x| x < 0.0 || !x.is_finite()) {
        return Err(QflowError::InvalidInput(format!("negative weight {bad}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > tol {
        return Err(QflowError::InvalidInput(format!(
            "weights sum to {total}, not 1"
        )));
    }
    Ok(())
}

/// Statistical mixture of Markovian system evolutions `Σ_c p_c e^{t𝓛_c}[ρ] ⊗ |c⟩⟨c|`.
#[derive(Clone, Debug)]
pub struct ClassicalMixtureModel {
    generators: Vec<Superoperator>,
    weights: Vec<f64>,
}

impl ClassicalMixtureModel {
    pub fn new(generators: Vec<Superoperator>, weights: Vec<f64>) -> Result<Self> {
        if generators.len() != weights.len() {
            return Err(QflowError::DimensionMismatch {
                expected: generators.len(),
                found: weights.len(),
            });
        }
        check_distribution(&weights, 1e-12)?;
        let ds = generators
            .first()
            .ok_or_else(|| QflowError::InvalidInput("no generators".into()))?
            .dim();
        for g in &generators {
            check_generator(g, ds, "mixture generator")?;
        }
        Ok(Self {
            generators,
            weights,
        })
    }

    pub fn generators(&self) -> &[Superoperator] {
        &self.generators
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn layout(&self) -> Layout {
        Layout::Classical {
            ds: self.generators[0].dim(),
            nc: self.generators.len(),
        }
    }

    pub fn initial_env(&self) -> Result<DensityMatrix> {
        DensityMatrix::diagonal(&self.weights)
    }

    pub fn generator(&self) -> Result<Generator> {
        let layout = self.layout();
        let b = layout.system_dim().pow(2);
        let mut m = CMatrix::zeros(layout.state_len(), layout.state_len());
        for (k, g) in self.generators.iter().enumerate() {
            m.view_mut((k * b, k * b), (b, b)).copy_from(g.matrix());
        }
        Generator::new(layout, m)
    }
}

/// System driven by a classical Markov chain on `nc` states.
///
/// `rates[to][from]` is the jump rate `from → to`; `jump_maps[to][from]` is the
/// system map applied on that jump.
#[derive(Clone, Debug)]
pub struct StochasticEnvModel {
    generators: Vec<Superoperator>,
    rates: Vec<Vec<f64>>,
    jump_maps: Vec<Vec<Superoperator>>,
    populations: Vec<f64>,
}

impl StochasticEnvModel {
    pub fn new(
        generators: Vec<Superoperator>,
        rates: Vec<Vec<f64>>,
        jump_maps: Vec<Vec<Superoperator>>,
        populations: Vec<f64>,
    ) -> Result<Self> {
        let nc = generators.len();
        let ds = generators
            .first()
            .ok_or_else(|| QflowError::InvalidInput("no generators".into()))?
            .dim();
        for g in &generators {
            check_generator(g, ds, "conditional generator")?;
        }
        if rates.len() != nc || rates.iter().any(|r| r.len() != nc) {
            return Err(QflowError::InvalidInput(format!("rates must be {nc}x{nc}")));
        }
        if jump_maps.len() != nc || jump_maps.iter().any(|r| r.len() != nc) {
            return Err(QflowError::InvalidInput(format!(
                "jump maps must be {nc}x{nc}"
            )));
        }
        if let Some(&r) = rates.iter().flatten().find(|&&r| r < 0.0 || !r.is_finite()) {
            return Err(QflowError::NegativeRate(r));
        }
        for m in jump_maps.iter().flatten() {
            check_map(m, ds)?;
        }
        if populations.len() != nc {
            return Err(QflowError::DimensionMismatch {
                expected: nc,
                found: populations.len(),
            });
        }
        check_distribution(&populations, 1e-12)?;
        Ok(Self {
            generators,
            rates,
            jump_maps,
            populations,
        })
    }

    /// Jump maps given in Kraus form; missing entries default to the identity.
    pub fn with_kraus(
        generators: Vec<Superoperator>,
        rates: Vec<Vec<f64>>,
        jumps: Vec<((usize, usize), KrausMap)>,
        populations: Vec<f64>,
    ) -> Result<Self> {
        let nc = generators.len();
        let ds = generators.first().map(|g| g.dim()).unwrap_or(1);
        let mut maps = vec![vec![Superoperator::identity(ds); nc]; nc];
        for ((to, from), k) in jumps {
            if to >= nc || from >= nc {
                return Err(QflowError::InvalidInput(format!(
                    "jump ({to}, {from}) out of range"
                )));
            }
            maps[to][from] = k.to_superoperator();
        }
        Self::new(generators, rates, maps, populations)
    }

    pub fn layout(&self) -> Layout {
        Layout::Classical {
            ds: self.generators[0].dim(),
            nc: self.generators.len(),
        }
    }

    pub fn populations(&self) -> &[f64] {
        &self.populations
    }

    pub fn rates(&self) -> &[Vec<f64>] {
        &self.rates
    }

    pub fn initial_env(&self) -> Result<DensityMatrix> {
        DensityMatrix::diagonal(&self.populations)
    }

    /// Classical master-equation matrix `W` with `dp/dt = W p`.
    pub fn rate_matrix(&self) -> nalgebra::DMatrix<f64> {
        classical_rate_matrix(&self.rates)
    }

    pub fn generator(&self) -> Result<Generator> {
        let layout = self.layout();
        let ds = layout.system_dim();
        let nc = self.generators.len();
        let b = ds * ds;
        let id = CMatrix::identity(b, b);
        let mut m = CMatrix::zeros(b * nc, b * nc);
        for to in 0..nc {
            let outflow: f64 = (0..nc).map(|k| self.rates[k][to]).sum();
            let diag = self.generators[to].matrix() - &id * c(outflow);
            let mut block = m.view_mut((to * b, to * b), (b, b));
            block += diag;
            for from in 0..nc {
                let rate = self.rates[to][from];
                if rate != 0.0 {
                    let mut block = m.view_mut((to * b, from * b), (b, b));
                    block += self.jump_maps[to][from].matrix() * c(rate);
                }
            }
        }
        Generator::new(layout, m)
    }
}

pub(crate) fn classical_rate_matrix(rates: &[Vec<f64>]) -> nalgebra::DMatrix<f64> {
    let nc = rates.len();
    nalgebra::DMatrix::from_fn(nc, nc, |to, from| {
        if to == from {
            rates[to][to] - (0..nc).map(|k| rates[k][from]).sum::<f64>()
        } else {
            rates[to][from]
        }
    })
}

/// Collision term `Γ (B 𝕊[ρ] B† − ½{B†B, ρ})` in a quantum bystander model.
#[derive(Clone, Debug)]
pub struct Collision {
    pub op: QOperator,
    pub rate: f64,
    pub map: KrausMap,
}

/// Quantum environment with self-dynamics independent of the system.
#[derive(Clone, Debug)]
pub struct QuantumBystanderModel {
    system: Superoperator,
    environment: Superoperator,
    collisions: Vec<Collision>,
    initial_env: DensityMatrix,
}

impl QuantumBystanderModel {
    pub fn new(
        system: Superoperator,
        environment: Superoperator,
        collisions: Vec<Collision>,
        initial_env: DensityMatrix,
    ) -> Result<Self> {
        let ds = system.dim();
        let de = environment.dim();
        check_generator(&system, ds, "system generator")?;
        check_generator(&environment, de, "environment generator")?;
        if initial_env.dim() != de {
            return Err(QflowError::DimensionMismatch {
                expected: de,
                found: initial_env.dim(),
            });
        }
        for col in &collisions {
            if col.rate < 0.0 || !col.rate.is_finite() {
                return Err(QflowError::NegativeRate(col.rate));
            }
            if col.op.dim() != de {
                return Err(QflowError::DimensionMismatch {
                    expected: de,
                    found: col.op.dim(),
                });
            }
            if col.map.dim() != ds {
                return Err(QflowError::DimensionMismatch {
                    expected: ds,
                    found: col.map.dim(),
                });
            }
        }
        let model = Self {
            system,
            environment,
            collisions,
            initial_env,
        };
        let r = model.generator()?.trace_residual();
        if r > PROPAGATION_TOL {
            return Err(QflowError::Invariant(format!(
                "composite generator is not trace preserving ({r:e})"
            )));
        }
        Ok(model)
    }

    pub fn layout(&self) -> Layout {
        Layout::Quantum {
            ds: self.system.dim(),
            de: self.environment.dim(),
        }
    }

    pub fn initial_env(&self) -> &DensityMatrix {
        &self.initial_env
    }

    pub fn collisions(&self) -> &[Collision] {
        &self.collisions
    }

    /// The system-independent environment generator `𝓛_e + Σ Γ_α D[B_α]`.
    pub fn environment_generator(&self) -> Superoperator {
        let mut m = self.environment.matrix().clone();
        for col in &self.collisions {
            m += Superoperator::dissipator(&col.op).matrix() * c(col.rate);
        }
        Superoperator::new(self.environment.dim(), m).expect("dims consistent")
    }

    pub fn generator(&self) -> Result<Generator> {
        let ds = self.system.dim();
        let de = self.environment.dim();
        let mut m = lift_system(&self.system, de).into_matrix()
            + lift_env(&self.environment, ds).into_matrix();
        for col in &self.collisions {
            m += collision_superoperator(col).matrix();
        }
        Generator::new(Layout::Quantum { ds, de }, m)
    }
}

/// `X ↦ Γ [Σ_k (K_k⊗B) X (K_k⊗B)† − ½{I⊗B†B, X}]`.
pub(crate) fn collision_superoperator(col: &Collision) -> Superoperator {
    let ds = col.map.dim();
    let bdb = &col.op.adjoint() * &col.op;
    let anti = env_op(ds, &bdb);
    let mut m = -(Superoperator::left(&anti).into_matrix()
        + Superoperator::right(&anti).into_matrix())
        * c(0.5);
    for k in col.map.ops() {
        let j = kron(k, &col.op);
        m += Superoperator::sandwich(&j, &j.adjoint()).into_matrix();
    }
    Superoperator::new(ds * col.op.dim(), m * c(col.rate)).expect("dims consistent")
}

/// Closed bipartite evolution under `H_T = H_s ⊗ I + I ⊗ H_e + H_I`.
#[derive(Clone, Debug)]
pub struct UnitaryModel {
    h_s: QOperator,
    h_e: QOperator,
    h_i: QOperator,
    initial_env: DensityMatrix,
}

impl UnitaryModel {
    pub fn new(
        h_s: QOperator,
        h_e: QOperator,
        h_i: QOperator,
        initial_env: DensityMatrix,
    ) -> Result<Self> {
        for h in [&h_s, &h_e, &h_i] {
            h.ensure_hermitian()?;
        }
        let n = h_s.dim() * h_e.dim();
        if h_i.dim() != n {
            return Err(QflowError::DimensionMismatch {
                expected: n,
                found: h_i.dim(),
            });
        }
        if initial_env.dim() != h_e.dim() {
            return Err(QflowError::DimensionMismatch {
                expected: h_e.dim(),
                found: initial_env.dim(),
            });
        }
        Ok(Self {
            h_s,
            h_e,
            h_i,
            initial_env,
        })
    }

    pub fn system_hamiltonian(&self) -> &QOperator {
        &self.h_s
    }

    pub fn env_hamiltonian(&self) -> &QOperator {
        &self.h_e
    }

    pub fn interaction(&self) -> &QOperator {
        &self.h_i
    }

    pub fn initial_env(&self) -> &DensityMatrix {
        &self.initial_env
    }

    pub fn layout(&self) -> Layout {
        Layout::Quantum {
            ds: self.h_s.dim(),
            de: self.h_e.dim(),
        }
    }

    pub fn total_hamiltonian(&self) -> QOperator {
        let ds = self.h_s.dim();
        let de = self.h_e.dim();
        let hs = kron(&self.h_s, &QOperator::identity(de));
        let he = kron(&QOperator::identity(ds), &self.h_e);
        &(&hs + &he) + &self.h_i
    }

    pub fn generator(&self) -> Result<Generator> {
        let l = Superoperator::hamiltonian(&self.total_hamiltonian());
        Generator::from_superoperator(self.h_s.dim(), self.h_e.dim(), l)
    }
}

/// Product-form dynamics `e^{t𝓛_s}[ρ_s] ⊗ ρ_e` with a frozen environment.
#[derive(Clone, Debug)]
pub struct BornMarkovModel {
    system: Superoperator,
    env: DensityMatrix,
}

impl BornMarkovModel {
    pub fn new(system: Superoperator, env: DensityMatrix) -> Result<Self> {
        check_generator(&system, system.dim(), "system generator")?;
        Ok(Self { system, env })
    }

    pub fn system_generator(&self) -> &Superoperator {
        &self.system
    }

    pub fn initial_env(&self) -> &DensityMatrix {
        &self.env
    }

    pub fn layout(&self) -> Layout {
        Layout::Quantum {
            ds: self.system.dim(),
            de: self.env.dim(),
        }
    }

    pub fn generator(&self) -> Result<Generator> {
        let de = self.env.dim();
        Generator::from_superoperator(self.system.dim(), de, lift_system(&self.system, de))
    }
}
