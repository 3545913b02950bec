use crate::error::{QflowError, Result};
use crate::qcore::{
    c, hermitian_part, kron, max_abs, partial_trace_matrix, unvectorize, vectorize, CMatrix,
    CVector, QOperator, Subsystem, Superoperator, C64, CONSTRUCTION_TOL,
};

/// How a bipartite state is stored.
///
/// `Quantum` keeps the full `vec(ρ_se)` of length `(ds·de)²`. `Classical` keeps
/// one unnormalized system block `ρ̃_c` per classical environment state, stacked
/// as `[vec(ρ̃_0); vec(ρ̃_1); …]` (length `ds²·nc`); such states carry no
/// coherences between environment labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    Quantum { ds: usize, de: usize },
    Classical { ds: usize, nc: usize },
}

impl Layout {
    pub fn system_dim(&self) -> usize {
        match *self {
            Layout::Quantum { ds, .. } | Layout::Classical { ds, .. } => ds,
        }
    }

    /// Environment Hilbert-space dimension (number of classical states for
    /// [`Layout::Classical`]).
    pub fn env_dim(&self) -> usize {
        match *self {
            Layout::Quantum { de, .. } => de,
            Layout::Classical { nc, .. } => nc,
        }
    }

    pub fn bipartite_dim(&self) -> usize {
        self.system_dim() * self.env_dim()
    }

    pub fn state_len(&self) -> usize {
        match *self {
            Layout::Quantum { ds, de } => (ds * de).pow(2),
            Layout::Classical { ds, nc } => ds * ds * nc,
        }
    }

    /// Row functional returning the total trace of a stored state.
    pub fn trace_functional(&self) -> CVector {
        match *self {
            Layout::Quantum { ds, de } => Superoperator::trace_functional(ds * de),
            Layout::Classical { ds, nc } => {
                let block = Superoperator::trace_functional(ds);
                let mut t = CVector::zeros(ds * ds * nc);
                for c in 0..nc {
                    t.rows_mut(c * ds * ds, ds * ds).copy_from(&block);
                }
                t
            }
        }
    }

    /// Matrix of the linear map `state ↦ Tr_s(state)` (onto `vec(ρ_e)` for
    /// quantum layouts, onto the population vector for classical ones).
    pub fn system_trace_map(&self) -> CMatrix {
        match *self {
            Layout::Quantum { ds, de } => {
                let n = ds * de;
                let mut p = CMatrix::zeros(de * de, n * n);
                for e1 in 0..de {
                    for e2 in 0..de {
                        for s in 0..ds {
                            let (r, col) = (s * de + e1, s * de + e2);
                            p[(e1 + de * e2, r + n * col)] = c(1.0);
                        }
                    }
                }
                p
            }
            Layout::Classical { ds, nc } => {
                let mut p = CMatrix::zeros(nc, ds * ds * nc);
                for k in 0..nc {
                    for i in 0..ds {
                        p[(k, k * ds * ds + i + ds * i)] = c(1.0);
                    }
                }
                p
            }
        }
    }
}

/// A bipartite state (or unnormalized bipartite operator) in a given layout.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteState {
    layout: Layout,
    data: CVector,
}

impl BipartiteState {
    pub fn from_vector(layout: Layout, data: CVector) -> Result<Self> {
        if data.len() != layout.state_len() {
            return Err(QflowError::DimensionMismatch {
                expected: layout.state_len(),
                found: data.len(),
            });
        }
        Ok(Self { layout, data })
    }

    /// `ρ_s ⊗ ρ_e`. Classical layouts require a diagonal `ρ_e`.
    pub fn product(layout: Layout, system: &CMatrix, env: &CMatrix) -> Result<Self> {
        let ds = layout.system_dim();
        let de = layout.env_dim();
        check_square(system, ds)?;
        check_square(env, de)?;
        let data = match layout {
            Layout::Quantum { .. } => vectorize(&system.kronecker(env)),
            Layout::Classical { ds, nc } => {
                let off = max_abs(&(env - CMatrix::from_diagonal(&env.diagonal())));
                if off > CONSTRUCTION_TOL {
                    return Err(QflowError::InvalidInput(format!(
                        "classical environment state has coherences ({off:e})"
                    )));
                }
                let vs = vectorize(system);
                let mut v = CVector::zeros(ds * ds * nc);
                for k in 0..nc {
                    v.rows_mut(k * ds * ds, ds * ds)
                        .copy_from(&(&vs * env[(k, k)]));
                }
                v
            }
        };
        Ok(Self { layout, data })
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn data(&self) -> &CVector {
        &self.data
    }

    pub fn into_data(self) -> CVector {
        self.data
    }

    pub fn trace(&self) -> f64 {
        self.layout.trace_functional().dot(&self.data).re
    }

    /// Unnormalized system block `ρ̃_c` of a classical layout.
    pub fn block(&self, k: usize) -> Option<CMatrix> {
        match self.layout {
            Layout::Classical { ds, nc } if k < nc => Some(CMatrix::from_column_slice(
                ds,
                ds,
                self.data.rows(k * ds * ds, ds * ds).as_slice(),
            )),
            _ => None,
        }
    }

    /// Full `(ds·de) × (ds·de)` operator.
    pub fn to_matrix(&self) -> CMatrix {
        match self.layout {
            Layout::Quantum { ds, de } => {
                unvectorize(&self.data, ds * de).expect("length checked at construction")
            }
            Layout::Classical { ds, nc } => {
                let mut m = CMatrix::zeros(ds * nc, ds * nc);
                for k in 0..nc {
                    let b = self.block(k).expect("in range");
                    for s1 in 0..ds {
                        for s2 in 0..ds {
                            m[(s1 * nc + k, s2 * nc + k)] = b[(s1, s2)];
                        }
                    }
                }
                m
            }
        }
    }

    /// `Tr_e`.
    pub fn system_marginal(&self) -> CMatrix {
        match self.layout {
            Layout::Quantum { ds, de } => {
                partial_trace_matrix(&self.to_matrix(), ds, de, Subsystem::System)
                    .expect("dims consistent")
            }
            Layout::Classical { ds, nc } => (0..nc)
                .map(|k| self.block(k).expect("in range"))
                .fold(CMatrix::zeros(ds, ds), |acc, b| acc + b),
        }
    }

    /// `Tr_s`.
    pub fn env_marginal(&self) -> CMatrix {
        match self.layout {
            Layout::Quantum { ds, de } => {
                partial_trace_matrix(&self.to_matrix(), ds, de, Subsystem::Environment)
                    .expect("dims consistent")
            }
            Layout::Classical { nc, .. } => {
                let p = CVector::from_iterator(
                    nc,
                    (0..nc).map(|k| self.block(k).expect("in range").trace()),
                );
                CMatrix::from_diagonal(&p)
            }
        }
    }

    /// `Tr_s(E_y X) = ⟨y|X|y⟩` as an environment operator.
    pub fn condition_system(&self, ket: &CVector) -> Result<CMatrix> {
        let ds = self.layout.system_dim();
        if ket.len() != ds {
            return Err(QflowError::DimensionMismatch {
                expected: ds,
                found: ket.len(),
            });
        }
        Ok(match self.layout {
            Layout::Quantum { de, .. } => {
                let x = self.to_matrix();
                CMatrix::from_fn(de, de, |e1, e2| {
                    let mut acc = C64::new(0.0, 0.0);
                    for s1 in 0..ds {
                        for s2 in 0..ds {
                            acc += ket[s1].conj() * x[(s1 * de + e1, s2 * de + e2)] * ket[s2];
                        }
                    }
                    acc
                })
            }
            Layout::Classical { nc, .. } => {
                let p = CVector::from_iterator(
                    nc,
                    (0..nc).map(|k| {
                        let b = self.block(k).expect("in range");
                        (ket.adjoint() * b * ket)[(0, 0)]
                    }),
                );
                CMatrix::from_diagonal(&p)
            }
        })
    }

    /// `Tr((E ⊗ I) X)` for a system operator `E`.
    pub fn system_expectation(&self, effect: &CMatrix) -> C64 {
        (effect * self.system_marginal()).trace()
    }

    /// Replaces the stored operator by its Hermitian part.
    pub fn symmetrized(&self) -> Self {
        let data = match self.layout {
            Layout::Quantum { .. } => vectorize(&hermitian_part(&self.to_matrix())),
            Layout::Classical { ds, nc } => {
                let mut v = CVector::zeros(self.data.len());
                for k in 0..nc {
                    let b = hermitian_part(&self.block(k).expect("in range"));
                    v.rows_mut(k * ds * ds, ds * ds).copy_from(&vectorize(&b));
                }
                v
            }
        };
        Self {
            layout: self.layout,
            data,
        }
    }

    /// `ρ_s ⊗ ρ_e` built from this state's own marginals.
    pub fn marginal_product(&self) -> CMatrix {
        self.system_marginal().kronecker(&self.env_marginal())
    }
}

fn check_square(m: &CMatrix, dim: usize) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(QflowError::DimensionMismatch {
            expected: dim,
            found: m.nrows(),
        });
    }
    Ok(())
}

/// Linear generator of a bipartite model on its [`Layout`].
#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    layout: Layout,
    matrix: CMatrix,
}

impl Generator {
    pub fn new(layout: Layout, matrix: CMatrix) -> Result<Self> {
        let n = layout.state_len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(QflowError::DimensionMismatch {
                expected: n,
                found: matrix.nrows(),
            });
        }
        Ok(Self { layout, matrix })
    }

    pub fn from_superoperator(ds: usize, de: usize, s: Superoperator) -> Result<Self> {
        Self::new(Layout::Quantum { ds, de }, s.into_matrix())
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// The generator as a superoperator on `(ds·de)`-dimensional operators;
    /// `None` for classical layouts.
    pub fn as_superoperator(&self) -> Option<Superoperator> {
        match self.layout {
            Layout::Quantum { ds, de } => Superoperator::new(ds * de, self.matrix.clone()).ok(),
            Layout::Classical { .. } => None,
        }
    }

    /// `max |Trᵀ · L|`.
    pub fn trace_residual(&self) -> f64 {
        max_abs(&(self.layout.trace_functional().transpose() * &self.matrix))
    }

    pub fn apply(&self, state: &BipartiteState) -> Result<BipartiteState> {
        if state.layout != self.layout {
            return Err(QflowError::InvalidInput("layout mismatch".into()));
        }
        BipartiteState::from_vector(self.layout, &self.matrix * &state.data)
    }
}

/// Superoperator acting as `map` on the system factor and identity on the environment.
pub(crate) fn lift_system(map: &Superoperator, de: usize) -> Superoperator {
    map.tensor(&Superoperator::identity(de))
}

pub(crate) fn lift_env(map: &Superoperator, ds: usize) -> Superoperator {
    Superoperator::identity(ds).tensor(map)
}

/// `I_s ⊗ op`.
pub(crate) fn env_op(ds: usize, op: &QOperator) -> QOperator {
    kron(&QOperator::identity(ds), op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::DensityMatrix;

    #[test]
    fn classical_and_quantum_layouts_agree_on_marginals() {
        let rho = DensityMatrix::from_matrix(CMatrix::from_row_slice(
            2,
            2,
            &[c(0.7), C64::new(0.1, 0.2), C64::new(0.1, -0.2), c(0.3)],
        ))
        .unwrap();
        let env = DensityMatrix::diagonal(&[0.2, 0.5, 0.3]).unwrap();
        let q =
            BipartiteState::product(Layout::Quantum { ds: 2, de: 3 }, rho.matrix(), env.matrix())
                .unwrap();
        let k = BipartiteState::product(
            Layout::Classical { ds: 2, nc: 3 },
            rho.matrix(),
            env.matrix(),
        )
        .unwrap();
        assert!(max_abs(&(q.to_matrix() - k.to_matrix())) < 1e-15);
        assert!(max_abs(&(q.system_marginal() - k.system_marginal())) < 1e-15);
        assert!(max_abs(&(q.env_marginal() - k.env_marginal())) < 1e-15);
        let ket = CVector::from_vec(vec![c(0.6), C64::new(0.0, 0.8)]);
        let cq = q.condition_system(&ket).unwrap();
        let ck = k.condition_system(&ket).unwrap();
        assert!(max_abs(&(cq - ck)) < 1e-15);
        assert!((q.trace() - 1.0).abs() < 1e-15 && (k.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn classical_product_rejects_coherent_env() {
        let env = CMatrix::from_element(2, 2, c(0.5));
        let rho = CMatrix::identity(2, 2) * c(0.5);
        assert!(BipartiteState::product(Layout::Classical { ds: 2, nc: 2 }, &rho, &env).is_err());
    }

    #[test]
    fn system_trace_map_matches_partial_trace() {
        let layout = Layout::Quantum { ds: 2, de: 3 };
        let m = CMatrix::from_fn(6, 6, |i, j| {
            C64::new(i as f64 + 0.1 * j as f64, j as f64 - i as f64)
        });
        let v = vectorize(&m);
        let via_map = unvectorize(&(layout.system_trace_map() * v), 3).unwrap();
        let direct = partial_trace_matrix(&m, 2, 3, Subsystem::Environment).unwrap();
        assert!(max_abs(&(via_map - direct)) < 1e-13);
    }
}
