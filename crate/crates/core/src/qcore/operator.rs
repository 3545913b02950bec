use nalgebra::DVector;

use super::{c, hermitian_part, max_abs, outer, CMatrix, CVector, C64, CONSTRUCTION_TOL};
use crate::error::{QflowError, Result};

/// Square complex operator with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct QOperator(CMatrix);

impl QOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(QflowError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QflowError::NonFinite("operator"));
        }
        Ok(Self(m))
    }

    /// Builds a `dim × dim` operator from row-major real entries.
    pub fn from_real_rows(dim: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != dim * dim {
            return Err(QflowError::DimensionMismatch {
                expected: dim * dim,
                found: rows.len(),
            });
        }
        Self::new(CMatrix::from_row_iterator(
            dim,
            dim,
            rows.iter().map(|&x| c(x)),
        ))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    /// `|i⟩⟨j|` in a `dim`-dimensional space.
    pub fn transition(dim: usize, i: usize, j: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(i, j)] = c(1.0);
        Self(m)
    }

    pub fn projector(ket: &CVector) -> Self {
        Self(outer(ket))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * c(s))
    }

    /// Largest entry of `|A − A†|`.
    pub fn hermitian_residual(&self) -> f64 {
        max_abs(&(&self.0 - self.0.adjoint()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_residual() <= tol
    }

    pub fn ensure_hermitian(&self) -> Result<()> {
        let residual = self.hermitian_residual();
        if residual > CONSTRUCTION_TOL {
            return Err(QflowError::NotHermitian { residual });
        }
        Ok(())
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        same_dim(self.dim(), other.dim())?;
        Ok(Self(&self.0 * &other.0 - &other.0 * &self.0))
    }
}

impl std::ops::Add for &QOperator {
    type Output = QOperator;
    fn add(self, rhs: &QOperator) -> QOperator {
        QOperator(&self.0 + &rhs.0)
    }
}

impl std::ops::Mul for &QOperator {
    type Output = QOperator;
    fn mul(self, rhs: &QOperator) -> QOperator {
        QOperator(&self.0 * &rhs.0)
    }
}

impl AsRef<CMatrix> for QOperator {
    fn as_ref(&self) -> &CMatrix {
        &self.0
    }
}

/// Positive, unit-trace Hermitian operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(QOperator);

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity at construction tolerance.
    pub fn new(op: QOperator) -> Result<Self> {
        Self::with_tolerance(op, CONSTRUCTION_TOL)
    }

    /// Symmetrizes and validates a state produced by propagation. Only trace
    /// drift above `trace_tol` and negativity below `-tol` are rejected.
    pub fn from_propagated(m: CMatrix, tol: f64, trace_tol: f64) -> Result<Self> {
        let op = QOperator::new(hermitian_part(&m))?;
        let drift = (op.trace().re - 1.0).abs();
        if drift > trace_tol {
            return Err(QflowError::TraceDrift { drift });
        }
        check_positive(&op, tol)?;
        Ok(Self(op))
    }

    pub fn with_tolerance(op: QOperator, tol: f64) -> Result<Self> {
        let residual = op.hermitian_residual();
        if residual > tol {
            return Err(QflowError::NotHermitian { residual });
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(QflowError::InvalidState(format!(
                "trace {tr} differs from 1"
            )));
        }
        check_positive(&op, tol)?;
        Ok(Self(op))
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(QOperator::new(m)?)
    }

    /// Pure state `|ψ⟩⟨ψ|`; the ket must be normalized.
    pub fn pure(ket: &CVector) -> Result<Self> {
        let norm = ket.norm();
        if (norm - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(QflowError::InvalidState(format!(
                "ket norm {norm} differs from 1"
            )));
        }
        Self::new(QOperator::projector(ket))
    }

    /// Computational basis projector `|k⟩⟨k|`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(QflowError::InvalidInput(format!(
                "basis index {k} out of range for dimension {dim}"
            )));
        }
        Ok(Self(QOperator::transition(dim, k, k)))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(QOperator::identity(dim).scale(1.0 / dim as f64))
    }

    /// Diagonal state with the given populations.
    pub fn diagonal(populations: &[f64]) -> Result<Self> {
        let d = DVector::from_iterator(populations.len(), populations.iter().map(|&p| c(p)));
        Self::from_matrix(CMatrix::from_diagonal(&d))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn op(&self) -> &QOperator {
        &self.0
    }

    pub fn matrix(&self) -> &CMatrix {
        self.0.matrix()
    }

    pub fn purity(&self) -> f64 {
        (self.matrix() * self.matrix()).trace().re
    }

    /// Real diagonal entries.
    pub fn populations(&self) -> Vec<f64> {
        self.matrix().diagonal().iter().map(|z| z.re).collect()
    }
}

impl AsRef<CMatrix> for DensityMatrix {
    fn as_ref(&self) -> &CMatrix {
        self.0.matrix()
    }
}

fn check_positive(op: &QOperator, tol: f64) -> Result<()> {
    let min = hermitian_eigenvalues(op.matrix())
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min < -tol {
        return Err(QflowError::InvalidState(format!(
            "negative eigenvalue {min:e}"
        )));
    }
    Ok(())
}

fn same_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(QflowError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Which factor of `system ⊗ environment` a partial trace keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    System,
    Environment,
}

/// Kronecker product, first factor outermost.
pub fn kron(a: &QOperator, b: &QOperator) -> QOperator {
    QOperator(a.matrix().kronecker(b.matrix()))
}

/// Partial trace of a `(ds·de)`-dimensional matrix.
pub fn partial_trace_matrix(m: &CMatrix, ds: usize, de: usize, keep: Subsystem) -> Result<CMatrix> {
    same_dim(ds * de, m.nrows())?;
    same_dim(ds * de, m.ncols())?;
    Ok(match keep {
        Subsystem::System => CMatrix::from_fn(ds, ds, |s1, s2| {
            (0..de).map(|e| m[(s1 * de + e, s2 * de + e)]).sum()
        }),
        Subsystem::Environment => CMatrix::from_fn(de, de, |e1, e2| {
            (0..ds).map(|s| m[(s * de + e1, s * de + e2)]).sum()
        }),
    })
}

pub fn partial_trace(
    rho: &DensityMatrix,
    dims: (usize, usize),
    keep: Subsystem,
) -> Result<DensityMatrix> {
    let m = partial_trace_matrix(rho.matrix(), dims.0, dims.1, keep)?;
    DensityMatrix::with_tolerance(
        QOperator::new(m)?,
        CONSTRUCTION_TOL * (dims.0 * dims.1) as f64,
    )
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = hermitian_part(m)
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).iter().map(|x| x.abs()).sum()
}

/// `D(ρ, σ) = ½ Tr|ρ − σ|`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho.dim(), sigma.dim())?;
    Ok(trace_distance_matrix(rho.matrix(), sigma.matrix()).min(1.0))
}

pub fn trace_distance_matrix(a: &CMatrix, b: &CMatrix) -> f64 {
    0.5 * trace_norm(&(a - b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::pauli;
    use approx::assert_abs_diff_eq;

    fn ket(re: &[f64]) -> CVector {
        CVector::from_iterator(re.len(), re.iter().map(|&x| c(x)))
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i4 = kron(&QOperator::identity(2), &QOperator::identity(2));
        assert_eq!(i4, QOperator::identity(4));
    }

    #[test]
    fn kron_of_basis_projectors() {
        let p0 = QOperator::transition(2, 0, 0);
        let p1 = QOperator::transition(2, 1, 1);
        let k = kron(&p0, &p1);
        let expected = QOperator::transition(4, 1, 1);
        assert_eq!(k, expected);
    }

    #[test]
    fn squared_pauli_tensor_is_identity() {
        let xx = kron(&pauli::sigma_x(), &pauli::sigma_x());
        assert_eq!(&xx * &xx, QOperator::identity(4));
    }

    #[test]
    fn partial_trace_of_product_recovers_factors() {
        let rho = DensityMatrix::diagonal(&[0.3, 0.7]).unwrap();
        let sigma = DensityMatrix::pure(&ket(&[0.6, 0.0, 0.8])).unwrap();
        let joint = DensityMatrix::new(kron(rho.op(), sigma.op())).unwrap();
        let s = partial_trace(&joint, (2, 3), Subsystem::System).unwrap();
        let e = partial_trace(&joint, (2, 3), Subsystem::Environment).unwrap();
        assert_abs_diff_eq!(max_abs(&(s.matrix() - rho.matrix())), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            max_abs(&(e.matrix() - sigma.matrix())),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn partial_trace_of_bell_state_is_maximally_mixed() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = DensityMatrix::pure(&ket(&[h, 0.0, 0.0, h])).unwrap();
        let s = partial_trace(&bell, (2, 2), Subsystem::System).unwrap();
        let mixed = DensityMatrix::maximally_mixed(2);
        assert_abs_diff_eq!(
            max_abs(&(s.matrix() - mixed.matrix())),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(matches!(
            partial_trace(&rho, (2, 3), Subsystem::System),
            Err(QflowError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn trace_distance_values() {
        let a = DensityMatrix::basis(2, 0).unwrap();
        let b = DensityMatrix::basis(2, 1).unwrap();
        assert_abs_diff_eq!(trace_distance(&a, &a).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(trace_distance(&a, &b).unwrap(), 1.0, epsilon = 1e-15);
        let mixed = DensityMatrix::maximally_mixed(2);
        let tilted = DensityMatrix::diagonal(&[0.75, 0.25]).unwrap();
        assert_abs_diff_eq!(
            trace_distance(&mixed, &tilted).unwrap(),
            0.25,
            epsilon = 1e-15
        );
    }

    #[test]
    fn trace_distance_dimension_mismatch() {
        let a = DensityMatrix::maximally_mixed(2);
        let b = DensityMatrix::maximally_mixed(3);
        assert!(trace_distance(&a, &b).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::diagonal(&[0.5, 0.6]).is_err());
        assert!(DensityMatrix::diagonal(&[1.2, -0.2]).is_err());
        let non_herm = CMatrix::from_row_slice(2, 2, &[c(0.5), c(0.1), c(0.0), c(0.5)]);
        assert!(matches!(
            DensityMatrix::from_matrix(non_herm),
            Err(QflowError::NotHermitian { .. })
        ));
        assert!(QOperator::new(CMatrix::from_element(2, 3, c(0.0))).is_err());
        assert!(QOperator::new(CMatrix::from_element(2, 2, c(f64::NAN))).is_err());
    }
}
