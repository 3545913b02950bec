//! Seeded random operators, states and models for property tests and sweeps.
//!
//! Jump operators have independent standard complex Gaussian entries
//! (`E|z|² = 1`) and rates drawn uniformly from `[0, 1]`.

use rand::Rng;
use rand_distr::StandardNormal;

use super::classes::{
    ClassicalMixtureModel, Collision, QuantumBystanderModel, StochasticEnvModel, UnitaryModel,
};
use crate::error::Result;
use crate::qcore::{
    c, lindblad_superoperator, CMatrix, CVector, DensityMatrix, KrausMap, QOperator, Superoperator,
    C64,
};

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(s * re, s * im)
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> QOperator {
    let g = ginibre(rng, n, n);
    QOperator::new((&g + g.adjoint()) * c(0.5 * scale)).expect("finite")
}

pub fn random_jump<R: Rng + ?Sized>(rng: &mut R, n: usize) -> QOperator {
    QOperator::new(ginibre(rng, n, n)).expect("finite")
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase fix).
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> QOperator {
    let qr = ginibre(rng, n, n).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0) };
        let col = q.column(j) * phase;
        q.set_column(j, &col);
    }
    QOperator::new(q).expect("finite")
}

/// Orthonormal basis given by the columns of a random unitary.
pub fn random_basis<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<CVector> {
    let u = random_unitary(rng, n);
    (0..n).map(|j| u.matrix().column(j).into_owned()).collect()
}

pub fn random_pure<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    let v = CVector::from_fn(n, |_, _| complex_gaussian(rng));
    let norm = v.norm();
    v / c(norm)
}

/// Full-rank density matrix `G G† / Tr(G G†)`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DensityMatrix {
    let g = ginibre(rng, n, n);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::from_matrix(m / c(tr)).expect("positive by construction")
}

/// Probability vector with strictly positive entries.
pub fn random_probabilities<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| 0.05 + rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    let mut p: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let drift: f64 = 1.0 - p.iter().sum::<f64>();
    p[0] += drift;
    p
}

/// Random Lindblad generator with `jumps` Gaussian jump operators.
pub fn random_lindblad<R: Rng + ?Sized>(rng: &mut R, n: usize, jumps: usize) -> Superoperator {
    let h = random_hermitian(rng, n, 1.0);
    let ls: Vec<(QOperator, f64)> = (0..jumps)
        .map(|_| (random_jump(rng, n), rng.random::<f64>()))
        .collect();
    lindblad_superoperator(&h, &ls).expect("valid by construction")
}

/// Random CPTP map with `rank` Kraus operators, cut from a Haar isometry.
pub fn random_kraus<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> KrausMap {
    let g = ginibre(rng, n * rank, n);
    let v = g.qr().q();
    let ops = (0..rank)
        .map(|k| QOperator::new(v.rows(k * n, n).into_owned()).expect("finite"))
        .collect();
    KrausMap::new(ops).expect("isometry blocks are complete")
}

pub fn random_classical_mixture<R: Rng + ?Sized>(
    rng: &mut R,
    ds: usize,
    nc: usize,
) -> Result<ClassicalMixtureModel> {
    let gens = (0..nc).map(|_| random_lindblad(rng, ds, 2)).collect();
    ClassicalMixtureModel::new(gens, random_probabilities(rng, nc))
}

pub fn random_stochastic_env<R: Rng + ?Sized>(
    rng: &mut R,
    ds: usize,
    nc: usize,
) -> Result<StochasticEnvModel> {
    let gens = (0..nc).map(|_| random_lindblad(rng, ds, 1)).collect();
    let mut rates = vec![vec![0.0; nc]; nc];
    let mut maps = vec![vec![Superoperator::identity(ds); nc]; nc];
    for to in 0..nc {
        for from in 0..nc {
            if to != from {
                rates[to][from] = rng.random::<f64>();
                maps[to][from] = random_kraus(rng, ds, 2).to_superoperator();
            }
        }
    }
    StochasticEnvModel::new(gens, rates, maps, random_probabilities(rng, nc))
}

pub fn random_quantum_bystander<R: Rng + ?Sized>(
    rng: &mut R,
    ds: usize,
    de: usize,
) -> Result<QuantumBystanderModel> {
    let system = random_lindblad(rng, ds, 1);
    let environment = random_lindblad(rng, de, 1);
    let collisions = (0..2)
        .map(|_| Collision {
            op: random_jump(rng, de),
            rate: rng.random::<f64>(),
            map: random_kraus(rng, ds, 2),
        })
        .collect();
    QuantumBystanderModel::new(system, environment, collisions, random_density(rng, de))
}

/// Random closed model with a generic interaction of unit scale.
pub fn random_unitary_model<R: Rng + ?Sized>(
    rng: &mut R,
    ds: usize,
    de: usize,
) -> Result<UnitaryModel> {
    UnitaryModel::new(
        random_hermitian(rng, ds, 1.0),
        random_hermitian(rng, de, 1.0),
        random_hermitian(rng, ds * de, 1.0),
        random_density(rng, de),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::max_abs;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary(&mut rng, 4);
        let prod = u.matrix().adjoint() * u.matrix();
        assert!(max_abs(&(prod - CMatrix::identity(4, 4))) < 1e-12);
    }

    #[test]
    fn seeded_draws_are_reproducible() {
        let a = random_lindblad(&mut ChaCha8Rng::seed_from_u64(9), 3, 2);
        let b = random_lindblad(&mut ChaCha8Rng::seed_from_u64(9), 3, 2);
        assert_eq!(a, b);
    }

    #[test]
    fn random_models_construct() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        random_classical_mixture(&mut rng, 2, 3).unwrap();
        random_stochastic_env(&mut rng, 2, 3).unwrap();
        random_quantum_bystander(&mut rng, 2, 3).unwrap();
        random_unitary_model(&mut rng, 2, 2).unwrap();
        assert!(
            random_kraus(&mut rng, 3, 4)
                .to_superoperator()
                .map_trace_residual()
                < 1e-12
        );
    }
}
