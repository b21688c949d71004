use serde::Serialize;

use crate::modem::ModMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrthogonalityMetrics {
    /// Largest off-diagonal Gram magnitude (real part for OQAM matrices).
    pub gram_max_offdiag: f64,
    /// `σ_max/σ_min`, infinite when rank-deficient.
    pub condition_number: f64,
    pub rank: usize,
    pub inputs: usize,
}

pub fn orthogonality_metrics(matrix: &ModMatrix) -> OrthogonalityMetrics {
    let gram = matrix.gram();
    let mut offdiag: f64 = 0.0;
    for c in 0..gram.ncols() {
        for r in 0..gram.nrows() {
            if r != c {
                offdiag = offdiag.max(gram[(r, c)].abs());
            }
        }
    }
    let sv = matrix.singular_values();
    let inputs = matrix.input_len();
    let condition_number = if matrix.rank() < inputs {
        f64::INFINITY
    } else {
        sv[0] / sv[sv.len() - 1]
    };
    OrthogonalityMetrics {
        gram_max_offdiag: offdiag,
        condition_number,
        rank: matrix.rank(),
        inputs,
    }
}
