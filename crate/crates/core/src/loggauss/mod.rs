//! Log-det information quantities and classical Gaussian channels.
//!
//! For `V > 0` the log-det entropy is `M(V) = ½ ln det V` (nats). On a
//! partitioned matrix the log-det mutual information and its conditional
//! version are the balanced combinations
//!
//! ```text
//! I_M(A:B)   = M(V_A) + M(V_B) − M(V_AB)
//! I_M(A:B|C) = M(V_AC) + M(V_BC) − M(V_C) − M(V_ABC)
//! ```
//!
//! The conditional quantity admits two equivalent forms, both exposed as
//! first-class operations so the identity can be cross-checked
//! numerically: `I_M(A:B|C)_V = I_M(A:B)_{V_ABC/V_C} = I_M(A:B)_{V⁻¹}`.
//!
//! A classical Gaussian channel acts on covariance matrices as
//! `V ↦ H V Hᵀ + K` with `K ⪰ 0`; its transpose acts on inverse
//! covariances as `V⁻¹ ↦ Hᵀ (V + K)⁻¹ H`. The Gaussian specialization of
//! the Petz recovery map and the saturation diagnostics built on it live
//! in the [`recovery`] submodule, re-exported here.
//!
//! Conditional mutual information is returned as the raw signed value;
//! tiny negatives of order roundoff are possible and clamping is the
//! caller's choice, so tests can see residuals.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matcore::{harmonic_mean, PartitionedMatrix, SymMatrix};

mod recovery;

pub use recovery::{
    check_saturation, cmi_lower_bounds, fidelity_recovery_bound, petz_recovery_channel,
    petz_recovery_composed, recovered_extension, SaturationReport,
};

/// Log-det entropy `M(V) = ½ ln det V` in nats.
pub fn logdet_entropy(v: &SymMatrix) -> Result<f64> {
    Ok(0.5 * v.logdet()?)
}

/// Log-det mutual information `I_M(A:B) = M(V_A) + M(V_B) − M(V_AB)`.
///
/// Nonnegative for positive definite `V` up to roundoff; zero exactly when
/// the off-diagonal coupling block vanishes.
pub fn mutual_information(v: &PartitionedMatrix, a: &str, b: &str) -> Result<f64> {
    let va = v.diagonal_block(a)?;
    let vb = v.diagonal_block(b)?;
    let vab = v.project(&[a, b])?;
    Ok(logdet_entropy(&va)? + logdet_entropy(&vb)? - logdet_entropy(vab.base())?)
}

/// Log-det conditional mutual information
/// `I_M(A:B|C) = ½ ln (det V_AC det V_BC) / (det V_C det V_ABC)`,
/// computed from the log-determinants of the four principal submatrices.
pub fn conditional_mutual_information(
    v: &PartitionedMatrix,
    a: &str,
    b: &str,
    c: &str,
) -> Result<f64> {
    let ld_ac = v.project(&[a, c])?.base().logdet()?;
    let ld_bc = v.project(&[b, c])?.base().logdet()?;
    let ld_c = v.diagonal_block(c)?.logdet()?;
    let ld_abc = v.project(&[a, b, c])?.base().logdet()?;
    Ok(0.5 * (ld_ac + ld_bc - ld_c - ld_abc))
}

/// `I_M(A:B|C)` through the Schur-complement identity
/// `I_M(A:B|C)_V = I_M(A:B)_{V_ABC/V_C}`.
pub fn cmi_via_schur(v: &PartitionedMatrix, a: &str, b: &str, c: &str) -> Result<f64> {
    let reduced = v.project(&[a, b, c])?.schur_complement(&[c])?;
    mutual_information(&reduced, a, b)
}

/// `I_M(A:B|C)` through the inverse identity
/// `I_M(A:B|C)_V = I_M(A:B)_{V⁻¹}` (blocks of the inverse, not inverses
/// of blocks).
pub fn cmi_via_inverse(v: &PartitionedMatrix, a: &str, b: &str, c: &str) -> Result<f64> {
    let inv = v.project(&[a, b, c])?.block_inverse()?;
    mutual_information(&inv, a, b)
}

/// Classical Gaussian channel `V ↦ H V Hᵀ + K`.
#[derive(Debug, Clone)]
pub struct GaussianChannel {
    h: DMatrix<f64>,
    k: SymMatrix,
}

impl GaussianChannel {
    /// Builds the channel, checking that the noise block `K` is positive
    /// semidefinite up to tolerance and shaped consistently with `H`.
    pub fn new(h: DMatrix<f64>, k: SymMatrix) -> Result<Self> {
        if k.dim() != h.nrows() {
            return Err(Error::DimensionMismatch {
                left: h.nrows(),
                right: k.dim(),
            });
        }
        let scale = 1.0 + k.spectral_norm();
        let min_eig = k.min_eigenvalue();
        if k.dim() > 0 && min_eig <= -1e-10 * scale {
            return Err(Error::NotPositiveDefinite { min_eig });
        }
        Ok(Self { h, k })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn noise(&self) -> &SymMatrix {
        &self.k
    }

    pub fn input_dim(&self) -> usize {
        self.h.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.h.nrows()
    }
}

/// Applies the channel to a covariance matrix: `H V Hᵀ + K`.
pub fn apply_channel(channel: &GaussianChannel, v: &SymMatrix) -> Result<SymMatrix> {
    if v.dim() != channel.input_dim() {
        return Err(Error::DimensionMismatch {
            left: channel.input_dim(),
            right: v.dim(),
        });
    }
    let scale = 1.0 + v.spectral_norm();
    if v.dim() > 0 && v.min_eigenvalue() <= -1e-10 * scale {
        return Err(Error::NotPositiveDefinite {
            min_eig: v.min_eigenvalue(),
        });
    }
    v.congruence(&channel.h).add(&channel.k)
}

/// Transpose channel on inverse-covariance representations: given the
/// covariance `V` of the input, returns the output inverse covariance
/// `Hᵀ (V + K)⁻¹ H`.
pub fn apply_transpose_channel(channel: &GaussianChannel, v: &SymMatrix) -> Result<SymMatrix> {
    if v.dim() != channel.output_dim() {
        return Err(Error::DimensionMismatch {
            left: channel.output_dim(),
            right: v.dim(),
        });
    }
    let sum = v.add(&channel.k)?;
    let inv = sum
        .mat()
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::Singular("transpose channel: V + K"))?;
    Ok(SymMatrix::symmetrized(
        channel.h.transpose() * inv * &channel.h,
    ))
}

/// Relative entropy between centered Gaussians with covariances `A`, `B`:
/// `D(p_A‖p_B) = ½ ln(det B/det A) + ½ Tr(B⁻¹A) − n/2`. Nonnegative; zero
/// iff `A = B`.
pub fn gaussian_relative_entropy(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let n = a.dim() as f64;
    let ld_a = a.logdet()?;
    let ld_b = b.logdet()?;
    let chol_b = b.cholesky_pd()?;
    let trace = chol_b.solve(a.mat()).trace();
    Ok(0.5 * (ld_b - ld_a) + 0.5 * trace - 0.5 * n)
}

/// Squared fidelity between centered Gaussians:
/// `F²(p_A, p_B) = det(A!B) / √(det A det B)` with `A!B` the harmonic
/// mean. Lies in `(0, 1]`, equals one iff `A = B`, and satisfies
/// `−ln F² ≤ D(A‖B)`.
pub fn gaussian_fidelity_sq(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    let hm = harmonic_mean(a, b)?;
    let log_f2 = hm.logdet()? - 0.5 * (a.logdet()? + b.logdet()?);
    Ok(log_f2.exp())
}

/// Lower bound on the log-det mutual information:
/// `I_M(A:B) ≥ ½ Tr[A⁻¹ X B⁻¹ Xᵀ] = ½ ‖A^{−1/2} X B^{−1/2}‖₂²`.
pub fn mi_lower_bound(v: &PartitionedMatrix, a: &str, b: &str) -> Result<f64> {
    let block_a = v.diagonal_block(a)?;
    let block_b = v.diagonal_block(b)?;
    let x = v.off_diagonal_block(a, b)?;
    let a_inv_x = block_a.cholesky_pd()?.solve(&x);
    let b_inv_xt = block_b.cholesky_pd()?.solve(&x.transpose());
    Ok(0.5 * (a_inv_x * b_inv_xt).trace())
}

#[cfg(test)]
mod tests;
