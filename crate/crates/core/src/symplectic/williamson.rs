//! Williamson normal form `V = S Δ Sᵀ`.
//!
//! The symplectic congruence bringing a positive definite matrix to its
//! diagonal normal form is computed from the antisymmetric matrix
//! `W = V^{1/2} Ω V^{1/2}`: a real orthogonal `Q` brings `W` to the
//! canonical block shape `Qᵀ W Q = [[0, D], [-D, 0]]` with `D > 0`
//! diagonal, and then `S = V^{1/2} Q Δ^{-1/2}` with `Δ = D ⊕ D` satisfies
//! `SΩSᵀ = Ω` and `SΔSᵀ = V`. The invariant planes of `W` are extracted
//! from the symmetric eigendecomposition of `−W²` with deterministic
//! deflation, so the output is reproducible for a fixed input.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::matcore::SymMatrix;

use super::{global_ordering, inverse_permutation, permute, symplectic_form, Qcm};

/// Result of the Williamson decomposition of a QCM, expressed in the
/// party-blocked basis of the input: `V = S Δ Sᵀ` with `S` symplectic for
/// the party-blocked form and `Δ` diagonal, carrying each symplectic
/// eigenvalue on both slots of its mode.
#[derive(Debug, Clone)]
pub struct WilliamsonDecomposition {
    mode_counts: Vec<usize>,
    s: DMatrix<f64>,
    nu: Vec<f64>,
}

impl WilliamsonDecomposition {
    pub fn s(&self) -> &DMatrix<f64> {
        &self.s
    }

    /// Symplectic eigenvalues, sorted descending; mode `i` of the
    /// concatenated mode order carries `nu[i]`.
    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    /// The diagonal normal form in the party-blocked basis.
    pub fn delta(&self) -> SymMatrix {
        let n: usize = self.mode_counts.iter().sum();
        // perm[g] = b maps global coordinate g to party-blocked b, so the
        // party-blocked slot b carries the eigenvalue of global mode
        // inv[b] mod n.
        let perm = global_ordering(&self.mode_counts);
        let inv = inverse_permutation(&perm);
        let mut diag = DVector::zeros(2 * n);
        for b in 0..2 * n {
            diag[b] = self.nu[inv[b] % n];
        }
        SymMatrix::from_diagonal(diag.as_slice())
    }

    /// `S Δ Sᵀ`, for residual checks.
    pub fn reconstruct(&self) -> SymMatrix {
        self.delta().congruence(&self.s)
    }

    /// `‖SΩSᵀ − Ω‖_F` for the party-blocked form.
    pub fn symplectic_residual(&self) -> f64 {
        let omega = symplectic_form(&self.mode_counts);
        (&self.s * &omega * self.s.transpose() - &omega).norm()
    }
}

/// Canonical planes of an antisymmetric matrix `W`: orthonormal pairs
/// `(a, b)` with `aᵀ W b = ν > 0`, sorted by `ν` descending.
fn antisymmetric_planes(w: &DMatrix<f64>) -> Result<Vec<(f64, DVector<f64>, DVector<f64>)>> {
    let dim = w.nrows();
    let p = SymMatrix::symmetrized(w.transpose() * w);
    let eig = p.mat().clone().symmetric_eigen();

    // Eigenvectors sorted by eigenvalue descending; index tie-break keeps
    // the order deterministic.
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap()
            .then(i.cmp(&j))
    });
    let mut basis: Vec<DVector<f64>> = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();

    let mut planes = Vec::with_capacity(dim / 2);
    while !basis.is_empty() {
        let mut u = basis.remove(0);
        // Deterministic sign: largest-magnitude entry positive.
        let lead = u
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap_or(0);
        if u[lead] < 0.0 {
            u = -u;
        }
        u /= u.norm();
        let wu = w * &u;
        let nu = wu.norm();
        if nu <= 1e-14 {
            return Err(Error::Singular("antisymmetric canonical form"));
        }
        let v = wu / nu;
        // Deflate the remaining basis against the plane span{u, v}.
        let mut reduced: Vec<DVector<f64>> = Vec::with_capacity(basis.len().saturating_sub(1));
        for mut r in basis {
            r -= &u * u.dot(&r) + &v * v.dot(&r);
            for q in &reduced {
                r -= q * q.dot(&r);
            }
            let norm = r.norm();
            if norm > 1e-6 {
                reduced.push(r / norm);
            }
        }
        basis = reduced;
        // (a, b) = (u, −v): aᵀWb = −uᵀWv = ν, and canonical diagonal
        // inputs come out with Q = 1.
        planes.push((nu, u, -v));
    }
    if planes.len() != dim / 2 {
        return Err(Error::Singular("antisymmetric canonical form: plane count"));
    }
    planes.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    Ok(planes)
}

/// Williamson decomposition for a positive definite matrix with respect to
/// the single-space global `xxpp` form.
pub(crate) fn williamson_global(v: &SymMatrix) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let dim = v.dim();
    let modes = dim / 2;
    if dim % 2 != 0 {
        return Err(Error::Shape(format!("odd dimension {dim}")));
    }
    if dim == 0 {
        return Ok((DMatrix::zeros(0, 0), Vec::new()));
    }
    let root = v.sqrt_pd()?;
    let omega = symplectic_form(&[modes]);
    let w_raw = root.mat() * &omega * root.mat();
    // Exact antisymmetrization of the roundoff part.
    let w = (&w_raw - w_raw.transpose()) * 0.5;

    let planes = antisymmetric_planes(&w)?;
    let mut q = DMatrix::zeros(dim, dim);
    let mut nu = Vec::with_capacity(modes);
    for (i, (v_i, a, b)) in planes.iter().enumerate() {
        nu.push(*v_i);
        q.set_column(i, a);
        q.set_column(modes + i, b);
    }
    let mut delta_inv_sqrt = DVector::zeros(dim);
    for i in 0..modes {
        delta_inv_sqrt[i] = 1.0 / nu[i].sqrt();
        delta_inv_sqrt[modes + i] = 1.0 / nu[i].sqrt();
    }
    let s = root.mat() * q * DMatrix::from_diagonal(&delta_inv_sqrt);
    Ok((s, nu))
}

/// Williamson decomposition of a QCM in its party-blocked basis.
///
/// Computed in the global `xxpp` ordering and permuted back, so the
/// returned `S` is symplectic for the party-blocked form of the input.
pub fn williamson(v: &Qcm) -> Result<WilliamsonDecomposition> {
    let mode_counts = v.mode_counts();
    let perm = global_ordering(&mode_counts);
    let v_global = SymMatrix::symmetrized(permute(v.mat(), &perm));
    let (s_global, nu) = williamson_global(&v_global)?;
    // S_pb = Pᵀ S_g P, entrywise S_pb[i, j] = S_g[inv[i], inv[j]].
    let inv = inverse_permutation(&perm);
    let s = permute(&s_global, &inv);
    Ok(WilliamsonDecomposition { mode_counts, s, nu })
}
