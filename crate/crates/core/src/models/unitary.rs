//! Random-unitary ensembles hidden inside closed bipartite dynamics.

use super::classes::UnitaryModel;
use super::layout::env_op;
use crate::error::{QflowError, Result};
use crate::qcore::{
    matrix_exp, max_abs, CMatrix, CVector, DensityMatrix, QOperator, Superoperator, C64,
    CONSTRUCTION_TOL, PROPAGATION_TOL,
};

/// `‖[I ⊗ H_e, H_I]‖_max < 1e-10`.
pub fn check_commuting_exception(model: &UnitaryModel) -> bool {
    let ds = model.system_hamiltonian().dim();
    let he = env_op(ds, model.env_hamiltonian());
    let comm =
        he.matrix() * model.interaction().matrix() - model.interaction().matrix() * he.matrix();
    max_abs(&comm) < CONSTRUCTION_TOL
}

/// One member `(⟨e|ρ_e|e⟩, 𝒯^{(e)}_t)` of a random-unitary ensemble.
#[derive(Clone, Debug)]
pub struct UnitaryBranch {
    weight: f64,
    env_state: Option<CVector>,
    hamiltonian: QOperator,
    /// `I_s ⊗ ⟨e|`, absent for the interaction-free single branch.
    bra: Option<CMatrix>,
}

impl UnitaryBranch {
    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// The environment basis vector labelling this branch.
    pub fn env_state(&self) -> Option<&CVector> {
        self.env_state.as_ref()
    }

    /// System propagator `𝒯^{(e)}_{t,0}`.
    pub fn propagator(&self, t: f64) -> Result<Superoperator> {
        let u = QOperator::new(matrix_exp(
            &(self.hamiltonian.matrix() * C64::new(0.0, -t)),
        )?)?;
        let full = Superoperator::sandwich(&u, &u.adjoint());
        match &self.bra {
            None => Ok(full),
            Some(a) => {
                let (project, embed) = block_maps(a);
                Superoperator::new(a.nrows(), project * full.matrix() * embed)
            }
        }
    }
}

/// `(Π_e, J_e)`: the maps `X ↦ A X A†` and `ρ ↦ A† ρ A` for `A = I ⊗ ⟨e|`.
fn block_maps(a: &CMatrix) -> (CMatrix, CMatrix) {
    let ad = a.adjoint();
    (a.conjugate().kronecker(a), a.transpose().kronecker(&ad))
}

fn check_basis(basis: &[CVector], de: usize) -> Result<()> {
    if basis.len() != de || basis.iter().any(|v| v.len() != de) {
        return Err(QflowError::DimensionMismatch {
            expected: de,
            found: basis.len(),
        });
    }
    let mut gram = CMatrix::zeros(de, de);
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            gram[(i, j)] = a.dotc(b);
        }
    }
    let residual = max_abs(&(gram - CMatrix::identity(de, de)));
    if residual > CONSTRUCTION_TOL {
        return Err(QflowError::NonProjective { residual });
    }
    Ok(())
}

/// Splits the reduced dynamics of `model` into `Σ_e ⟨e|ρ_e|e⟩ 𝒯^{(e)}_t` over
/// the environment `basis`.
///
/// The diagonal condition `⟨e|𝓖_t[X]|e⟩ = 𝒯^{(e)}_t ⟨e|X|e⟩` is checked at every
/// sample time; a residual above `1e-9` is an error. Without interaction the
/// ensemble collapses to the single branch `exp(−itH_s)`.
pub fn random_unitary_decomposition(
    model: &UnitaryModel,
    basis: &[CVector],
    sample_times: &[f64],
) -> Result<Vec<UnitaryBranch>> {
    let ds = model.system_hamiltonian().dim();
    let de = model.env_hamiltonian().dim();
    check_basis(basis, de)?;

    if max_abs(model.interaction().matrix()) == 0.0 {
        return Ok(vec![UnitaryBranch {
            weight: 1.0,
            env_state: None,
            hamiltonian: model.system_hamiltonian().clone(),
            bra: None,
        }]);
    }

    let rho_e = model.initial_env().matrix();
    let total = model.total_hamiltonian();
    let branches: Vec<UnitaryBranch> = basis
        .iter()
        .map(|e| {
            let bra_e = e.adjoint();
            let a = CMatrix::identity(ds, ds).kronecker(&bra_e);
            let weight = (bra_e.clone() * rho_e * e)[(0, 0)].re;
            UnitaryBranch {
                weight,
                env_state: Some(e.clone()),
                hamiltonian: total.clone(),
                bra: Some(a),
            }
        })
        .collect();

    for &t in sample_times {
        let u = QOperator::new(matrix_exp(&(total.matrix() * C64::new(0.0, -t)))?)?;
        let full = Superoperator::sandwich(&u, &u.adjoint()).into_matrix();
        for b in &branches {
            let a = b.bra.as_ref().expect("interacting branch");
            let (project, embed) = block_maps(a);
            let diag = &project * &full;
            let factored = &diag * &embed * &project;
            let residual = max_abs(&(diag - factored));
            if residual > PROPAGATION_TOL {
                return Err(QflowError::DecompositionInvalid { residual });
            }
        }
    }
    Ok(branches)
}

/// `Σ_e w_e 𝒯^{(e)}_t[ρ_s]`.
pub fn ensemble_state(
    branches: &[UnitaryBranch],
    rho_s: &DensityMatrix,
    t: f64,
) -> Result<CMatrix> {
    let mut out = CMatrix::zeros(rho_s.dim(), rho_s.dim());
    for b in branches {
        out += b.propagator(t)?.apply_matrix(rho_s.matrix())? * C64::new(b.weight, 0.0);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{kron, partial_trace, pauli, Subsystem};

    fn z_basis() -> Vec<CVector> {
        (0..2)
            .map(|k| {
                let mut v = CVector::zeros(2);
                v[k] = C64::new(1.0, 0.0);
                v
            })
            .collect()
    }

    fn exact_reduced(model: &UnitaryModel, rho_s: &DensityMatrix, t: f64) -> CMatrix {
        let u = matrix_exp(&(model.total_hamiltonian().matrix() * C64::new(0.0, -t))).unwrap();
        let full = kron(rho_s.op(), model.initial_env().op());
        let evolved = &u * full.matrix() * u.adjoint();
        let rho = DensityMatrix::from_matrix(evolved).unwrap();
        partial_trace(&rho, (2, 2), Subsystem::System)
            .unwrap()
            .matrix()
            .clone()
    }

    fn rho_s() -> DensityMatrix {
        let mut v = CVector::zeros(2);
        v[0] = C64::new(0.6, 0.0);
        v[1] = C64::new(0.0, 0.8);
        DensityMatrix::pure(&v).unwrap()
    }

    #[test]
    fn dephasing_ensemble_matches_partial_trace() {
        let h_i = kron(&pauli::sigma_z(), &pauli::sigma_z()).scale(0.9);
        let env = DensityMatrix::diagonal(&[0.3, 0.7]).unwrap();
        let m = UnitaryModel::new(
            pauli::sigma_x().scale(0.4),
            pauli::sigma_z().scale(1.1),
            h_i,
            env,
        )
        .unwrap();
        assert!(check_commuting_exception(&m));
        let times = [0.3, 1.0, 2.7];
        let branches = random_unitary_decomposition(&m, &z_basis(), &times).unwrap();
        assert_eq!(branches.len(), 2);
        assert!((branches[0].weight() - 0.3).abs() < 1e-15);
        for &t in &times {
            let ens = ensemble_state(&branches, &rho_s(), t).unwrap();
            assert!(max_abs(&(ens - exact_reduced(&m, &rho_s(), t))) < 1e-9);
        }
    }

    #[test]
    fn no_interaction_gives_single_branch() {
        let m = UnitaryModel::new(
            pauli::sigma_y(),
            pauli::sigma_x(),
            QOperator::zeros(4),
            DensityMatrix::maximally_mixed(2),
        )
        .unwrap();
        assert!(check_commuting_exception(&m));
        let branches = random_unitary_decomposition(&m, &z_basis(), &[1.0]).unwrap();
        assert_eq!(branches.len(), 1);
        let ens = ensemble_state(&branches, &rho_s(), 1.3).unwrap();
        assert!(max_abs(&(ens - exact_reduced(&m, &rho_s(), 1.3))) < 1e-12);
    }

    #[test]
    fn anticommuting_coupling_fails_diagonal_condition() {
        let h_i = kron(&pauli::sigma_x(), &pauli::sigma_z());
        let m = UnitaryModel::new(
            QOperator::zeros(2),
            pauli::sigma_x(),
            h_i,
            DensityMatrix::basis(2, 0).unwrap(),
        )
        .unwrap();
        assert!(!check_commuting_exception(&m));
        let err = random_unitary_decomposition(&m, &z_basis(), &[0.7]).unwrap_err();
        assert!(matches!(err, QflowError::DecompositionInvalid { .. }));
    }
}
