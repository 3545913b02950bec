//! Small named models used by the command line and the reproduction checks.

use super::classes::{BornMarkovModel, UnitaryModel};
use crate::error::Result;
use crate::qcore::{kron, lindblad_superoperator, pauli, DensityMatrix, QOperator};

/// Qubit–qubit exchange `H_I = g(σ₊⊗σ₋ + σ₋⊗σ₊)` with the environment in `|1⟩⟨1|`.
pub fn exchange_model(g: f64) -> Result<UnitaryModel> {
    let h_i = &kron(&pauli::sigma_plus(), &pauli::sigma_minus())
        + &kron(&pauli::sigma_minus(), &pauli::sigma_plus());
    UnitaryModel::new(
        QOperator::zeros(2),
        QOperator::zeros(2),
        h_i.scale(g),
        DensityMatrix::basis(2, 1)?,
    )
}

/// Commuting coupling `H_I = g σ_x ⊗ |1⟩⟨1|`, `H_e = ω σ_z`, environment `diag(0.3, 0.7)`.
pub fn commuting_model(g: f64, omega: f64) -> Result<UnitaryModel> {
    UnitaryModel::new(
        QOperator::zeros(2),
        pauli::sigma_z().scale(omega),
        kron(&pauli::sigma_x(), &QOperator::transition(2, 1, 1)).scale(g),
        DensityMatrix::diagonal(&[0.3, 0.7])?,
    )
}

/// Amplitude damping at rate `gamma` with a frozen maximally mixed qubit environment.
pub fn damping_born_markov(gamma: f64) -> Result<BornMarkovModel> {
    let l = lindblad_superoperator(&QOperator::zeros(2), &[(pauli::sigma_minus(), gamma)])?;
    BornMarkovModel::new(l, DensityMatrix::maximally_mixed(2))
}
