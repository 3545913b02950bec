use rand::Rng;

use crate::error::{QflowError, Result};
use crate::models::random::random_basis;
use crate::qcore::{max_abs, outer, CMatrix, CVector, C64, CONSTRUCTION_TOL};

/// Projective measurement: an orthonormal basis `{|m⟩}` with a real outcome per
/// vector. Effects and post-measurement states are both `|m⟩⟨m|`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSpec {
    basis: Vec<CVector>,
    outcomes: Vec<f64>,
}

impl MeasurementSpec {
    pub fn new(basis: Vec<CVector>, outcomes: Vec<f64>) -> Result<Self> {
        let d = basis.len();
        if d == 0 {
            return Err(QflowError::InvalidInput("empty measurement basis".into()));
        }
        if outcomes.len() != d {
            return Err(QflowError::DimensionMismatch {
                expected: d,
                found: outcomes.len(),
            });
        }
        if basis.iter().any(|v| v.len() != d) {
            return Err(QflowError::InvalidInput(format!(
                "basis vectors must have length {d}"
            )));
        }
        if outcomes.iter().any(|o| !o.is_finite()) {
            return Err(QflowError::NonFinite("measurement outcome"));
        }
        let gram = CMatrix::from_fn(d, d, |i, j| basis[i].dotc(&basis[j]));
        let residual = max_abs(&(gram - CMatrix::identity(d, d)));
        if residual > CONSTRUCTION_TOL {
            return Err(QflowError::NonProjective { residual });
        }
        Ok(Self { basis, outcomes })
    }

    /// Basis with default outcomes: `±1` for qubits, `0, 1, …` otherwise.
    pub fn with_default_outcomes(basis: Vec<CVector>) -> Result<Self> {
        let outcomes = default_outcomes(basis.len());
        Self::new(basis, outcomes)
    }

    /// Computational basis of dimension `d` with default outcomes.
    pub fn computational(d: usize) -> Self {
        let basis = (0..d)
            .map(|k| {
                let mut v = CVector::zeros(d);
                v[k] = C64::new(1.0, 0.0);
                v
            })
            .collect();
        Self::with_default_outcomes(basis).expect("orthonormal")
    }

    /// `σ_z`: `|0⟩ → +1`, `|1⟩ → −1`.
    pub fn pauli_z() -> Self {
        Self::computational(2)
    }

    /// `σ_x`: `|+⟩ → +1`, `|−⟩ → −1`.
    pub fn pauli_x() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = CVector::from_vec(vec![C64::new(s, 0.0), C64::new(s, 0.0)]);
        let minus = CVector::from_vec(vec![C64::new(s, 0.0), C64::new(-s, 0.0)]);
        Self::new(vec![plus, minus], vec![1.0, -1.0]).expect("orthonormal")
    }

    /// Haar-random basis with default outcomes.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Self {
        Self::with_default_outcomes(random_basis(rng, d)).expect("orthonormal")
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[CVector] {
        &self.basis
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn ket(&self, m: usize) -> &CVector {
        &self.basis[m]
    }

    /// `|m⟩⟨m|`, both the effect and the post-measurement state.
    pub fn projector(&self, m: usize) -> CMatrix {
        outer(&self.basis[m])
    }
}

fn default_outcomes(d: usize) -> Vec<f64> {
    if d == 2 {
        vec![1.0, -1.0]
    } else {
        (0..d).map(|k| k as f64).collect()
    }
}

/// Past, present and future measurements.
#[derive(Clone, Debug, PartialEq)]
pub struct CpfSpecs {
    pub x: MeasurementSpec,
    pub y: MeasurementSpec,
    pub z: MeasurementSpec,
}

impl CpfSpecs {
    pub fn new(x: MeasurementSpec, y: MeasurementSpec, z: MeasurementSpec) -> Result<Self> {
        if x.dim() != y.dim() || y.dim() != z.dim() {
            return Err(QflowError::InvalidInput(
                "all three measurements must act on the same system".into(),
            ));
        }
        Ok(Self { x, y, z })
    }

    pub fn uniform(spec: MeasurementSpec) -> Self {
        Self {
            x: spec.clone(),
            y: spec.clone(),
            z: spec,
        }
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Self {
        Self {
            x: MeasurementSpec::random(rng, d),
            y: MeasurementSpec::random(rng, d),
            z: MeasurementSpec::random(rng, d),
        }
    }
}

/// Resampling rule `℘(y̆|x)` of the random scheme: rows are past outcomes,
/// columns intermediate labels.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomSchemePolicy {
    rows: Vec<Vec<f64>>,
}

impl RandomSchemePolicy {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let ny = rows.first().map_or(0, |r| r.len());
        if rows.is_empty() || ny == 0 || rows.iter().any(|r| r.len() != ny) {
            return Err(QflowError::InvalidInput(
                "policy must be a non-empty rectangular matrix".into(),
            ));
        }
        for (x, r) in rows.iter().enumerate() {
            if let Some(&p) = r.iter().find(|&&p| p < 0.0 || !p.is_finite()) {
                return Err(QflowError::NegativeProbability(p));
            }
            let total: f64 = r.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(QflowError::InvalidInput(format!(
                    "policy row {x} sums to {total}"
                )));
            }
        }
        Ok(Self { rows })
    }

    /// `℘(y̆|x) = 1/ny`.
    pub fn uniform(nx: usize, ny: usize) -> Self {
        Self {
            rows: vec![vec![1.0 / ny as f64; ny]; nx],
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, nx: usize, ny: usize) -> Self {
        let rows = (0..nx)
            .map(|_| crate::models::random::random_probabilities(rng, ny))
            .collect();
        Self::new(rows).expect("normalized rows")
    }

    pub fn prob(&self, y: usize, x: usize) -> f64 {
        self.rows[x][y]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.rows[0].len())
    }
}
