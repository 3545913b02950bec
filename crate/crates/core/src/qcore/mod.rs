//! Dense complex linear algebra and quantum primitives.
//!
//! Everything here works on `nalgebra::DMatrix<Complex64>`. Superoperators act
//! on column-stacked operators: `vec(A X B) = (Bᵀ ⊗ A) vec(X)`, and the
//! composite ordering is `system ⊗ environment`.

mod expm;
mod operator;
pub mod pauli;
mod superop;

pub use expm::matrix_exp;
pub use operator::{
    hermitian_eigenvalues, kron, partial_trace, partial_trace_matrix, trace_distance,
    trace_distance_matrix, trace_norm, DensityMatrix, QOperator, Subsystem,
};
pub use superop::{lindblad_superoperator, unvectorize, vectorize, KrausMap, Superoperator};

pub use num_complex::Complex64 as C64;

pub type CMatrix = nalgebra::DMatrix<C64>;
pub type CVector = nalgebra::DVector<C64>;

/// Hermiticity, trace and positivity tolerance applied when a state is built.
pub const CONSTRUCTION_TOL: f64 = 1e-10;
/// Tolerance for drift accumulated during propagation.
pub const PROPAGATION_TOL: f64 = 1e-9;
/// Largest trace drift tolerated before propagation fails.
pub const TRACE_DRIFT_TOL: f64 = 1e-8;

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest entry modulus.
pub fn max_abs<R, C, S>(m: &nalgebra::Matrix<C64, R, C, S>) -> f64
where
    R: nalgebra::Dim,
    C: nalgebra::Dim,
    S: nalgebra::RawStorage<C64, R, C>,
{
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `(m + m†)/2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5)
}

/// `|v⟩⟨v|`.
pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}
