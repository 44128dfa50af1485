//! Matrix means on the positive definite cone.
//!
//! The geometric mean `A#B = A^{1/2}(A^{-1/2} B A^{-1/2})^{1/2} A^{1/2}` is
//! the midpoint of the trace-metric geodesic
//! `A#ₜB = A^{1/2}(A^{-1/2} B A^{-1/2})^t A^{1/2}`, whose determinant obeys
//! `det(A#ₜB) = (det A)^{1−t}(det B)^t`. The harmonic mean is
//! `A!B = 2(A⁻¹ + B⁻¹)⁻¹` and satisfies `A!B ≤ A#B`.

use super::SymMatrix;
use crate::error::{Error, Result};

fn check_pair(a: &SymMatrix, b: &SymMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(())
}

/// Geometric mean `A#B` of two positive definite matrices.
pub fn geometric_mean(a: &SymMatrix, b: &SymMatrix) -> Result<SymMatrix> {
    weighted_geometric_mean(a, b, 0.5)
}

/// Weighted geometric mean `A#ₜB` for `t ∈ [0, 1]` (the trace-metric
/// geodesic from `A` at `t = 0` to `B` at `t = 1`).
pub fn weighted_geometric_mean(a: &SymMatrix, b: &SymMatrix, t: f64) -> Result<SymMatrix> {
    check_pair(a, b)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfRange(format!("geodesic parameter t = {t}")));
    }
    let a_half = a.sqrt_pd()?;
    let a_inv_half = a.powf(-0.5)?;
    let inner = b.congruence(a_inv_half.mat());
    let inner_pow = inner.powf(t)?;
    Ok(inner_pow.congruence(a_half.mat()))
}

/// Harmonic mean `A!B = 2(A⁻¹ + B⁻¹)⁻¹`.
pub fn harmonic_mean(a: &SymMatrix, b: &SymMatrix) -> Result<SymMatrix> {
    check_pair(a, b)?;
    let sum = a.inverse()?.add(&b.inverse()?)?;
    Ok(sum.inverse()?.scale(2.0))
}
