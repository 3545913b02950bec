use rayon::prelude::*;

use super::measurement::{CpfSpecs, RandomSchemePolicy};
use super::WitnessEngine;
use crate::error::{QflowError, Result};
use crate::qcore::{CMatrix, CVector, DensityMatrix, C64};

/// Conditionals with `P(y̆)` below this are reported as undefined.
pub const UNDEFINED_CONDITIONAL: f64 = 1e-12;
const NEGATIVE_TOL: f64 = 1e-10;
const NORMALIZATION_TOL: f64 = 1e-9;

/// How the system is re-prepared after the intermediate measurement.
#[derive(Clone, Debug, PartialEq)]
pub enum Scheme {
    /// `y̆ = y`; the environment is conditioned on the observed outcome.
    Deterministic,
    /// `y̆` drawn from `℘(y̆|x)`; the environment is left unconditioned.
    Random(RandomSchemePolicy),
}

impl Scheme {
    pub fn tag(&self) -> SchemeTag {
        match self {
            Scheme::Deterministic => SchemeTag::Deterministic,
            Scheme::Random(_) => SchemeTag::Random,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeTag {
    Deterministic,
    Random,
}

impl SchemeTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeTag::Deterministic => "d",
            SchemeTag::Random => "r",
        }
    }
}

/// Joint distribution `P(z, y̆, x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    nz: usize,
    ny: usize,
    nx: usize,
    data: Vec<f64>,
}

impl JointDistribution {
    fn zeros(nz: usize, ny: usize, nx: usize) -> Self {
        Self {
            nz,
            ny,
            nx,
            data: vec![0.0; nz * ny * nx],
        }
    }

    /// Builds a distribution from `f(z, y, x)`, checking positivity and
    /// normalization.
    pub fn from_fn(
        nz: usize,
        ny: usize,
        nx: usize,
        f: impl Fn(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut j = Self::zeros(nz, ny, nx);
        for z in 0..nz {
            for y in 0..ny {
                for x in 0..nx {
                    j.data[(z * ny + y) * nx + x] = f(z, y, x);
                }
            }
        }
        j.validate()?;
        Ok(j)
    }

    fn validate(&self) -> Result<()> {
        if let Some(&p) = self
            .data
            .iter()
            .find(|&&p| p < -NEGATIVE_TOL || !p.is_finite())
        {
            return Err(QflowError::NegativeProbability(p));
        }
        let total = self.total();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(QflowError::Invariant(format!(
                "joint distribution sums to {total}"
            )));
        }
        Ok(())
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.nz, self.ny, self.nx)
    }

    pub fn get(&self, z: usize, y: usize, x: usize) -> f64 {
        self.data[(z * self.ny + y) * self.nx + x]
    }

    fn add(&mut self, z: usize, y: usize, x: usize, p: f64) {
        self.data[(z * self.ny + y) * self.nx + x] += p;
    }

    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn p_y(&self, y: usize) -> f64 {
        (0..self.nz)
            .flat_map(|z| (0..self.nx).map(move |x| (z, x)))
            .map(|(z, x)| self.get(z, y, x))
            .sum()
    }

    pub fn p_x(&self, x: usize) -> f64 {
        (0..self.nz)
            .flat_map(|z| (0..self.ny).map(move |y| (z, y)))
            .map(|(z, y)| self.get(z, y, x))
            .sum()
    }

    fn p_zy(&self, z: usize, y: usize) -> f64 {
        (0..self.nx).map(|x| self.get(z, y, x)).sum()
    }

    fn p_yx(&self, y: usize, x: usize) -> f64 {
        (0..self.nz).map(|z| self.get(z, y, x)).sum()
    }
}

/// A CPF evaluation at one `(t, τ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CpfResult {
    pub t: f64,
    pub tau: f64,
    pub scheme: SchemeTag,
    pub joint: JointDistribution,
    /// `C_pf(t, τ)|_y̆` per intermediate label; `None` when `P(y̆)` vanishes.
    pub correlations: Vec<Option<f64>>,
}

/// Preparation used with all-`σ_z` measurements in the depolarizing example:
/// the `+1` eigenstate of `σ_x`.
pub fn reference_preparation() -> DensityMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DensityMatrix::pure(&CVector::from_vec(vec![C64::new(s, 0.0), C64::new(s, 0.0)]))
        .expect("normalized")
}

fn check_inputs(
    engine: &WitnessEngine,
    rho0s: &DensityMatrix,
    env0: &DensityMatrix,
    specs: &CpfSpecs,
    t: f64,
    tau: f64,
) -> Result<()> {
    engine.check_system(rho0s.matrix())?;
    engine.check_env(env0.matrix())?;
    if specs.dim() != engine.model().system_dim() {
        return Err(QflowError::DimensionMismatch {
            expected: engine.model().system_dim(),
            found: specs.dim(),
        });
    }
    if !(t >= 0.0 && tau >= 0.0) {
        return Err(QflowError::InvalidInput(format!(
            "times must be non-negative, got t = {t}, tau = {tau}"
        )));
    }
    Ok(())
}

fn joint(
    engine: &WitnessEngine,
    rho0s: &DensityMatrix,
    env0: &DensityMatrix,
    specs: &CpfSpecs,
    scheme: &Scheme,
    t: f64,
    tau: f64,
) -> Result<JointDistribution> {
    check_inputs(engine, rho0s, env0, specs, t, tau)?;
    let (nz, ny, nx) = (specs.z.len(), specs.y.len(), specs.x.len());
    if let Scheme::Random(policy) = scheme {
        if policy.shape() != (nx, ny) {
            return Err(QflowError::InvalidInput(format!(
                "policy shape {:?} does not match ({nx}, {ny})",
                policy.shape()
            )));
        }
    }
    let effects_z: Vec<CMatrix> = (0..nz).map(|z| specs.z.projector(z)).collect();
    let mut out = JointDistribution::zeros(nz, ny, nx);
    for x in 0..nx {
        let ket = specs.x.ket(x);
        let px = (ket.adjoint() * rho0s.matrix() * ket)[(0, 0)].re;
        if px == 0.0 {
            continue;
        }
        let start = engine.product(&specs.x.projector(x), env0.matrix())?;
        let at_t = engine.evolve(&start, 0.0, t)?;
        let unconditioned = matches!(scheme, Scheme::Random(_)).then(|| at_t.env_marginal());
        for y in 0..ny {
            let (env_y, weight) = match (scheme, &unconditioned) {
                (Scheme::Random(policy), Some(env)) => (env.clone(), policy.prob(y, x)),
                _ => (at_t.condition_system(specs.y.ket(y))?, 1.0),
            };
            if weight == 0.0 {
                continue;
            }
            let restart = engine.product(&specs.y.projector(y), &env_y)?;
            let later = engine.evolve(&restart, t, t + tau)?;
            for (z, e) in effects_z.iter().enumerate() {
                out.add(z, y, x, px * weight * later.system_expectation(e).re);
            }
        }
    }
    out.validate()?;
    Ok(out)
}

/// `P(z,y,x) = P(x) Tr[E_z 𝓖_{t+τ,t}(ρ_y ⊗ Tr_s[E_y 𝓖_{t,0}(ρ_x ⊗ ρ_e)])]`.
pub fn cpf_joint_deterministic(
    engine: &WitnessEngine,
    rho0s: &DensityMatrix,
    env0: &DensityMatrix,
    specs: &CpfSpecs,
    t: f64,
    tau: f64,
) -> Result<JointDistribution> {
    joint(engine, rho0s, env0, specs, &Scheme::Deterministic, t, tau)
}

/// `P(z,y̆,x) = P(x) ℘(y̆|x) Tr[E_z 𝓖_{t+τ,t}(ρ_y̆ ⊗ Tr_s[𝓖_{t,0}(ρ_x ⊗ ρ_e)])]`.
pub fn cpf_joint_random(
    engine: &WitnessEngine,
    rho0s: &DensityMatrix,
    env0: &DensityMatrix,
    specs: &CpfSpecs,
    policy: &RandomSchemePolicy,
    t: f64,
    tau: f64,
) -> Result<JointDistribution> {
    joint(
        engine,
        rho0s,
        env0,
        specs,
        &Scheme::Random(policy.clone()),
        t,
        tau,
    )
}

/// Joint distribution and correlations for either scheme.
pub fn cpf_joint(
    engine: &WitnessEngine,
    rho0s: &DensityMatrix,
    env0: &DensityMatrix,
    specs: &CpfSpecs,
    scheme: &Scheme,
    t: f64,
    tau: f64,
) -> Result<CpfResult> {
    let joint = joint(engine, rho0s, env0, specs, scheme, t, tau)?;
    let correlations = cpf_correlation(&joint, specs);
    Ok(CpfResult {
        t,
        tau,
        scheme: scheme.tag(),
        joint,
        correlations,
    })
}

/// [`cpf_joint`] over every `(t, τ)` pair, evaluated on the rayon pool and
/// returned in row-major `(t, τ)` order.
pub fn cpf_surface(
    engine: &WitnessEngine,
    rho0s: &DensityMatrix,
    env0: &DensityMatrix,
    specs: &CpfSpecs,
    scheme: &Scheme,
    ts: &[f64],
    taus: &[f64],
) -> Result<Vec<CpfResult>> {
    let pairs: Vec<(f64, f64)> = ts
        .iter()
        .flat_map(|&t| taus.iter().map(move |&tau| (t, tau)))
        .collect();
    pairs
        .par_iter()
        .map(|&(t, tau)| cpf_joint(engine, rho0s, env0, specs, scheme, t, tau))
        .collect()
}

/// `Σ_{z,x} z·x [P(z,x|y̆) − P(z|y̆) P(x|y̆)]` for every `y̆`.
pub fn cpf_correlation(joint: &JointDistribution, specs: &CpfSpecs) -> Vec<Option<f64>> {
    let (nz, ny, nx) = joint.shape();
    let zs = specs.z.outcomes();
    let xs = specs.x.outcomes();
    (0..ny)
        .map(|y| {
            let py = joint.p_y(y);
            if py < UNDEFINED_CONDITIONAL {
                return None;
            }
            let mut ezx = 0.0;
            let mut ez = 0.0;
            let mut ex = 0.0;
            for z in 0..nz {
                for x in 0..nx {
                    let p = joint.get(z, y, x) / py;
                    ezx += zs[z] * xs[x] * p;
                    ez += zs[z] * p;
                    ex += xs[x] * p;
                }
            }
            Some(ezx - ez * ex)
        })
        .collect()
}

/// `max |P(z,y,x) − P(z|y) P(y|x) P(x)|`.
pub fn markov_factorization_gap(joint: &JointDistribution) -> f64 {
    let (nz, ny, nx) = joint.shape();
    let mut gap: f64 = 0.0;
    for y in 0..ny {
        let py = joint.p_y(y);
        for x in 0..nx {
            let pyx = joint.p_yx(y, x);
            for z in 0..nz {
                let markov = if py > 0.0 {
                    joint.p_zy(z, y) / py * pyx
                } else {
                    0.0
                };
                gap = gap.max((joint.get(z, y, x) - markov).abs());
            }
        }
    }
    gap
}
