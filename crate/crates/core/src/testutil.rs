//! Independent oracles and helpers for unit tests.
//!
//! The determinant oracle deliberately uses cofactor expansion so that it
//! shares no code path with the Cholesky-based `logdet`.

use nalgebra::DMatrix;

use crate::matcore::{PartitionedMatrix, SymMatrix};

/// Cofactor-expansion determinant. Exponential cost; fine for dim <= 8.
pub fn det_bruteforce(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    if n == 0 {
        return 1.0;
    }
    if n == 1 {
        return m[(0, 0)];
    }
    let mut det = 0.0;
    for j in 0..n {
        let minor = DMatrix::from_fn(n - 1, n - 1, |r, c| {
            m[(r + 1, if c < j { c } else { c + 1 })]
        });
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        det += sign * m[(0, j)] * det_bruteforce(&minor);
    }
    det
}

/// The scalar three-block matrix with A = B = C = 1, Y = Z = 1/2 and the
/// A–B coupling `x`; saturated for x = 1/4, generic otherwise.
pub fn scalar_three_block(x: f64) -> PartitionedMatrix {
    let m = DMatrix::from_row_slice(
        3,
        3,
        &[1.0, x, 0.5, x, 1.0, 0.5, 0.5, 0.5, 1.0],
    );
    PartitionedMatrix::new(SymMatrix::new(m).unwrap(), vec![("A", 1), ("B", 1), ("C", 1)])
        .unwrap()
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).abs());
        }
    }
    worst
}
