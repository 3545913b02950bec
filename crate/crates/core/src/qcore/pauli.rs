//! Qubit operators. `|0⟩` is the `+1` eigenstate of `σ_z` (the excited level),
//! so `σ₋ = |1⟩⟨0|` lowers it.

use super::{CMatrix, QOperator, C64};

fn from_entries(e: [C64; 4]) -> QOperator {
    QOperator::new(CMatrix::from_row_slice(2, 2, &e)).expect("finite 2x2")
}

const O: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

pub fn sigma_x() -> QOperator {
    from_entries([O, ONE, ONE, O])
}

pub fn sigma_y() -> QOperator {
    from_entries([O, -I, I, O])
}

pub fn sigma_z() -> QOperator {
    from_entries([ONE, O, O, -ONE])
}

/// `|0⟩⟨1|`.
pub fn sigma_plus() -> QOperator {
    from_entries([O, ONE, O, O])
}

/// `|1⟩⟨0|`.
pub fn sigma_minus() -> QOperator {
    from_entries([O, O, ONE, O])
}

/// `σ_1, σ_2, σ_3, σ_4 = x, y, z, I`.
pub fn sigma(k: usize) -> QOperator {
    match k {
        1 => sigma_x(),
        2 => sigma_y(),
        3 => sigma_z(),
        4 => QOperator::identity(2),
        _ => panic!("Pauli index {k} outside 1..=4"),
    }
}
