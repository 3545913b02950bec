//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! (Higham 2005). The approximant degree is the smallest of 3, 5, 7, 9, 13
//! whose backward-error threshold covers `‖A‖₁`; otherwise `A` is scaled by
//! `2^-s` into the degree-13 region and the result squared `s` times.

use super::{c, CMatrix};
use crate::error::{QflowError, Result};

const THETA: [(usize, f64); 4] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068),
];
const THETA_13: f64 = 5.371_920_351_148_152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1512.0,
    56.0,
    1.0,
];
const B9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

fn one_norm(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(m)` for a square complex matrix.
pub fn matrix_exp(m: &CMatrix) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(QflowError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(QflowError::NonFinite("matrix exponential input"));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let norm = one_norm(m);
    if norm == 0.0 {
        return Ok(CMatrix::identity(n, n));
    }

    for &(degree, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match degree {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            return pade_low(m, coeffs);
        }
    }

    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = m * c(2f64.powi(-s));
    let mut r = pade13(&scaled)?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

fn pade_low(a: &CMatrix, b: &[f64]) -> Result<CMatrix> {
    let n = a.nrows();
    let id = CMatrix::identity(n, n);
    let a2 = a * a;
    // powers A^0, A^2, A^4, ...
    let mut even_powers = vec![id.clone()];
    for k in 1..b.len().div_ceil(2) {
        let next = &even_powers[k - 1] * &a2;
        even_powers.push(next);
    }
    let mut u_inner = CMatrix::zeros(n, n);
    let mut v = CMatrix::zeros(n, n);
    for (j, &bj) in b.iter().enumerate() {
        let p = &even_powers[j / 2];
        if j % 2 == 1 {
            u_inner += p * c(bj);
        } else {
            v += p * c(bj);
        }
    }
    let u = a * u_inner;
    solve_pade(&u, &v)
}

fn pade13(a: &CMatrix) -> Result<CMatrix> {
    let n = a.nrows();
    let id = CMatrix::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &B13;
    let u_hi = &a6 * c(b[13]) + &a4 * c(b[11]) + &a2 * c(b[9]);
    let u_inner = &a6 * u_hi + &a6 * c(b[7]) + &a4 * c(b[5]) + &a2 * c(b[3]) + &id * c(b[1]);
    let u = a * u_inner;
    let v_hi = &a6 * c(b[12]) + &a4 * c(b[10]) + &a2 * c(b[8]);
    let v = &a6 * v_hi + &a6 * c(b[6]) + &a4 * c(b[4]) + &a2 * c(b[2]) + &id * c(b[0]);
    solve_pade(&u, &v)
}

/// Solves `(V − U) R = V + U`.
fn solve_pade(u: &CMatrix, v: &CMatrix) -> Result<CMatrix> {
    let q = v - u;
    let p = v + u;
    q.lu()
        .solve(&p)
        .ok_or_else(|| QflowError::Invariant("singular Padé denominator".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{max_abs, pauli, C64};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// exp(-i t H) through the eigendecomposition of a Hermitian H.
    fn unitary_oracle(h: &CMatrix, t: f64) -> CMatrix {
        let eig = h.clone().symmetric_eigen();
        let v = &eig.eigenvectors;
        let phases = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            h.nrows(),
            eig.eigenvalues.iter().map(|&l| C64::new(0.0, -l * t).exp()),
        ));
        v * phases * v.adjoint()
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMatrix {
        let g = CMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        (&g + g.adjoint()) * c(0.5 * scale)
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let z = CMatrix::zeros(3, 3);
        assert_eq!(matrix_exp(&z).unwrap(), CMatrix::identity(3, 3));
    }

    #[test]
    fn diagonal_phase_rotation() {
        let theta = 0.731;
        let gen = pauli::sigma_z().matrix() * C64::new(0.0, -theta);
        let u = matrix_exp(&gen).unwrap();
        assert!((u[(0, 0)] - C64::new(0.0, -theta).exp()).norm() < 1e-14);
        assert!((u[(1, 1)] - C64::new(0.0, theta).exp()).norm() < 1e-14);
        assert!(u[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn matches_eigendecomposition_oracle_across_norms() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &scale in &[1e-3, 0.05, 0.4, 1.5, 4.0, 30.0, 200.0] {
            for n in [2, 4, 8] {
                let h = random_hermitian(&mut rng, n, scale);
                let exact = unitary_oracle(&h, 1.0);
                let approx = matrix_exp(&(&h * C64::new(0.0, -1.0))).unwrap();
                let rel = max_abs(&(&approx - &exact)) / max_abs(&exact);
                assert!(rel < 1e-10, "scale {scale} n {n}: rel residual {rel:e}");
            }
        }
    }

    #[test]
    fn commuting_sum_factorizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = random_hermitian(&mut rng, 4, 1.0);
        // polynomials in h commute with h
        let a = &h * C64::new(0.3, -0.7);
        let b = &h * &h * C64::new(-0.2, 0.1);
        let lhs = matrix_exp(&(&a + &b)).unwrap();
        let rhs = matrix_exp(&a).unwrap() * matrix_exp(&b).unwrap();
        assert!(max_abs(&(lhs - rhs)) < 1e-9);
    }

    #[test]
    fn rejects_non_finite() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(f64::INFINITY, 0.0);
        assert!(matrix_exp(&m).is_err());
    }
}
