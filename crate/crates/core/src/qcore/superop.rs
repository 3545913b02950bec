use super::{
    c, matrix_exp, max_abs, CMatrix, CVector, QOperator, C64, CONSTRUCTION_TOL, PROPAGATION_TOL,
};
use crate::error::{QflowError, Result};

/// Column-stacking `vec(X)`.
pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vectorize`] for a `dim × dim` operator.
pub fn unvectorize(v: &CVector, dim: usize) -> Result<CMatrix> {
    if v.len() != dim * dim {
        return Err(QflowError::DimensionMismatch {
            expected: dim * dim,
            found: v.len(),
        });
    }
    Ok(CMatrix::from_column_slice(dim, dim, v.as_slice()))
}

/// Linear map on `dim × dim` operators stored as a `dim² × dim²` matrix acting
/// on `vec(X)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: CMatrix,
}

impl Superoperator {
    pub fn new(dim: usize, matrix: CMatrix) -> Result<Self> {
        let n = dim * dim;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(QflowError::DimensionMismatch {
                expected: n,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        if matrix
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(QflowError::NonFinite("superoperator"));
        }
        Ok(Self { dim, matrix })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            matrix: CMatrix::zeros(dim * dim, dim * dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: CMatrix::identity(dim * dim, dim * dim),
        }
    }

    /// `X ↦ A X B`, i.e. `Bᵀ ⊗ A`.
    pub fn sandwich(a: &QOperator, b: &QOperator) -> Self {
        Self {
            dim: a.dim(),
            matrix: b.matrix().transpose().kronecker(a.matrix()),
        }
    }

    /// `X ↦ A X`.
    pub fn left(a: &QOperator) -> Self {
        Self::sandwich(a, &QOperator::identity(a.dim()))
    }

    /// `X ↦ X B`.
    pub fn right(b: &QOperator) -> Self {
        Self::sandwich(&QOperator::identity(b.dim()), b)
    }

    /// `X ↦ −i[H, X]`.
    pub fn hamiltonian(h: &QOperator) -> Self {
        let m = (Self::left(h).matrix - Self::right(h).matrix) * C64::new(0.0, -1.0);
        Self {
            dim: h.dim(),
            matrix: m,
        }
    }

    /// `X ↦ L X L† − ½{L†L, X}`.
    pub fn dissipator(l: &QOperator) -> Self {
        let ldl = &l.adjoint() * l;
        let m = Self::sandwich(l, &l.adjoint()).matrix
            - (Self::left(&ldl).matrix + Self::right(&ldl).matrix) * c(0.5);
        Self {
            dim: l.dim(),
            matrix: m,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn apply(&self, x: &QOperator) -> Result<QOperator> {
        QOperator::new(self.apply_matrix(x.matrix())?)
    }

    pub fn apply_matrix(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.nrows() != self.dim || x.ncols() != self.dim {
            return Err(QflowError::DimensionMismatch {
                expected: self.dim,
                found: x.nrows(),
            });
        }
        unvectorize(&(&self.matrix * vectorize(x)), self.dim)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            dim: self.dim,
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            dim: self.dim,
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            matrix: &self.matrix * c(s),
        }
    }

    /// `exp(t · self)`.
    pub fn exp(&self, t: f64) -> Result<Self> {
        Ok(Self {
            dim: self.dim,
            matrix: matrix_exp(&(&self.matrix * c(t)))?,
        })
    }

    /// Row vector `vec(I)†`, so that `Tr X = trace_functional · vec(X)`.
    pub fn trace_functional(dim: usize) -> CVector {
        let mut t = CVector::zeros(dim * dim);
        for i in 0..dim {
            t[i + dim * i] = c(1.0);
        }
        t
    }

    /// `max |Trᵀ · L|`; zero for a trace-preserving generator.
    pub fn generator_trace_residual(&self) -> f64 {
        let t = Self::trace_functional(self.dim);
        max_abs(&(t.transpose() * &self.matrix))
    }

    /// `max |Trᵀ · S − Trᵀ|`; zero for a trace-preserving map.
    pub fn map_trace_residual(&self) -> f64 {
        let t = Self::trace_functional(self.dim);
        max_abs(&(t.transpose() * &self.matrix - t.transpose()))
    }

    /// Superoperator of `A ⊗ B` on the composite space with `self` = A acting on
    /// the first factor.
    pub fn tensor(&self, b: &Self) -> Self {
        let (da, db) = (self.dim, b.dim);
        let n = da * db;
        let mut out = CMatrix::zeros(n * n, n * n);
        let composite = |ia: usize, ib: usize| {
            let (ar, ac) = (ia % da, ia / da);
            let (br, bc) = (ib % db, ib / db);
            (ar * db + br) + n * (ac * db + bc)
        };
        let nz_b: Vec<(usize, usize, C64)> = (0..db * db)
            .flat_map(|o| (0..db * db).map(move |i| (o, i)))
            .filter_map(|(o, i)| {
                let v = b.matrix[(o, i)];
                (v != C64::new(0.0, 0.0)).then_some((o, i, v))
            })
            .collect();
        for ao in 0..da * da {
            for ai in 0..da * da {
                let va = self.matrix[(ao, ai)];
                if va == C64::new(0.0, 0.0) {
                    continue;
                }
                for &(bo, bi, vb) in &nz_b {
                    out[(composite(ao, bo), composite(ai, bi))] += va * vb;
                }
            }
        }
        Self {
            dim: n,
            matrix: out,
        }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(QflowError::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }
}

/// Completely positive trace-preserving map in Kraus form.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausMap {
    ops: Vec<QOperator>,
}

impl KrausMap {
    /// Accepts the operators when `Σ K†K = I` within `1e-9`.
    pub fn new(ops: Vec<QOperator>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| QflowError::InvalidInput("empty Kraus list".into()))?;
        let d = first.dim();
        let mut sum = CMatrix::zeros(d, d);
        for k in &ops {
            if k.dim() != d {
                return Err(QflowError::DimensionMismatch {
                    expected: d,
                    found: k.dim(),
                });
            }
            sum += k.matrix().adjoint() * k.matrix();
        }
        let residual = max_abs(&(sum - CMatrix::identity(d, d)));
        if residual > PROPAGATION_TOL {
            return Err(QflowError::IncompleteKraus { residual });
        }
        Ok(Self { ops })
    }

    pub fn unitary(u: QOperator) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            ops: vec![QOperator::identity(dim)],
        }
    }

    pub fn dim(&self) -> usize {
        self.ops[0].dim()
    }

    pub fn ops(&self) -> &[QOperator] {
        &self.ops
    }

    pub fn to_superoperator(&self) -> Superoperator {
        let d = self.dim();
        let mut m = CMatrix::zeros(d * d, d * d);
        for k in &self.ops {
            m += Superoperator::sandwich(k, &k.adjoint()).matrix;
        }
        Superoperator { dim: d, matrix: m }
    }
}

/// Generator `−i[H, ·] + Σ γ (L · L† − ½{L†L, ·})`.
pub fn lindblad_superoperator(h: &QOperator, jumps: &[(QOperator, f64)]) -> Result<Superoperator> {
    let residual = h.hermitian_residual();
    if residual > CONSTRUCTION_TOL {
        return Err(QflowError::NotHermitian { residual });
    }
    let mut gen = Superoperator::hamiltonian(h);
    for (l, rate) in jumps {
        if *rate < 0.0 || !rate.is_finite() {
            return Err(QflowError::NegativeRate(*rate));
        }
        if l.dim() != h.dim() {
            return Err(QflowError::DimensionMismatch {
                expected: h.dim(),
                found: l.dim(),
            });
        }
        if *rate > 0.0 {
            gen.matrix += Superoperator::dissipator(l).matrix * c(*rate);
        }
    }
    Ok(gen)
}
