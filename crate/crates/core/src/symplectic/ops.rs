//! Operations on quantum covariance matrices: the canonical dominated
//! pure state, purification, pure/mixed factorization, Gaussian
//! measurements, the purified steering inequality and a two-mode PPT
//! check.

use std::ops::AddAssign;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::matcore::{geometric_mean, SymMatrix};

use super::williamson::{williamson, williamson_global};
use super::{
    global_ordering, inverse_permutation, permute, symplectic_form, Qcm, PURITY_BAND, QCM_TOL,
};

/// `γ#_K = K # (Ω K⁻¹ Ωᵀ)` for the form `Ω` of the given mode counts.
/// Pure for every `K > 0`; dominated by `K` exactly when `K > iΩ`.
pub(crate) fn gamma_sharp_with_omega(k: &SymMatrix, omega: &DMatrix<f64>) -> Result<SymMatrix> {
    let partner = k.inverse()?.congruence(omega);
    geometric_mean(k, &partner)
}

/// The canonical pure QCM `γ# = K#(ΩK⁻¹Ωᵀ)` built from any positive
/// definite `K` carried by a party structure. Equals `SSᵀ` for the
/// Williamson `S` of `K`.
pub fn gamma_sharp(k: &Qcm) -> Result<Qcm> {
    let sharp = gamma_sharp_with_omega(k.base(), &k.omega())?;
    Qcm::new(
        sharp,
        k.parties()
            .iter()
            .map(|p| (p.label.clone(), p.modes))
            .collect::<Vec<_>>(),
    )
}

fn fresh_label(taken: &[&str], stem: &str) -> String {
    if !taken.contains(&stem) {
        return stem.to_string();
    }
    let mut i = 0usize;
    loop {
        let candidate = format!("{stem}{i}");
        if !taken.contains(&candidate.as_str()) {
            return candidate;
        }
        i += 1;
    }
}

/// Purification: extends a valid QCM `V` on `A` with an ancilla `E` of
/// `n_E = n_A` modes to a pure QCM `γ_AE` whose reduction to `A` is
/// exactly `V`.
///
/// The construction works in the Williamson basis of `V`: each mode of
/// eigenvalue `ν` is coupled to one ancilla mode by the two-mode squeezed
/// thermal block with off-diagonal `√(ν²−1)·diag(1, −1)`; the ancilla is
/// left in its Williamson basis (its block is the diagonal normal form of
/// `V`).
pub fn purify(v: &Qcm) -> Result<Qcm> {
    v.require_valid()?;
    let n = v.total_modes();
    let dim = 2 * n;
    let counts = v.mode_counts();
    let perm = global_ordering(&counts);
    let inv = inverse_permutation(&perm);

    // Work in the single-space global ordering.
    let v_global = SymMatrix::symmetrized(permute(v.mat(), &perm));
    let (s_global, nu) = williamson_global(&v_global)?;

    // Coupling √(ν²−1) on positions, −√(ν²−1) on momenta.
    let mut gamma_diag = DVector::zeros(dim);
    for (i, &nu_i) in nu.iter().enumerate() {
        let g = (nu_i * nu_i - 1.0).max(0.0).sqrt();
        gamma_diag[i] = g;
        gamma_diag[n + i] = -g;
    }
    let coupling_global = &s_global * DMatrix::from_diagonal(&gamma_diag);

    let mut delta_diag = DVector::zeros(dim);
    for (i, &nu_i) in nu.iter().enumerate() {
        delta_diag[i] = nu_i;
        delta_diag[n + i] = nu_i;
    }

    // Assemble [A | E] with A rows permuted back to the party-blocked
    // basis; E keeps its own (global = single-party) ordering.
    let mut out = DMatrix::zeros(2 * dim, 2 * dim);
    out.view_mut((0, 0), (dim, dim)).copy_from(v.mat());
    let coupling_pb = DMatrix::from_fn(dim, dim, |b, e| coupling_global[(inv[b], e)]);
    out.view_mut((0, dim), (dim, dim)).copy_from(&coupling_pb);
    out.view_mut((dim, 0), (dim, dim))
        .copy_from(&coupling_pb.transpose());
    out.view_mut((dim, dim), (dim, dim))
        .copy_from(&DMatrix::from_diagonal(&delta_diag));

    let labels: Vec<&str> = v.parties().iter().map(|p| p.label.as_str()).collect();
    let ancilla = fresh_label(&labels, "E");
    let mut parties: Vec<(String, usize)> = v
        .parties()
        .iter()
        .map(|p| (p.label.clone(), p.modes))
        .collect();
    parties.push((ancilla, n));
    Qcm::new(SymMatrix::symmetrized(out), parties)
}

/// Pure/mixed factorization of a valid QCM.
#[derive(Debug, Clone)]
pub struct FactorOut {
    /// Strictly mixed core (all `ν > 1 +` band), single party `R`.
    pub core: Qcm,
    /// Pure factor (all `ν` within the band of 1). For an input that is
    /// entirely pure this is the input itself, untouched.
    pub pure_part: Qcm,
    /// Symplectic basis change with `V = T (core ⊕ pure) Tᵀ`.
    pub transform: DMatrix<f64>,
    pub core_modes: usize,
    pub pure_modes: usize,
}

impl FactorOut {
    /// `T (core ⊕ pure) Tᵀ`, for residual checks against the input.
    pub fn recombine(&self) -> SymMatrix {
        self.core
            .base()
            .direct_sum(self.pure_part.base())
            .congruence(&self.transform)
    }
}

/// Splits the modes of a valid QCM into a strictly mixed core and a pure
/// factor after a Williamson rotation. Modes with `ν` inside the
/// `1 ± 1e-7` band are assigned to the pure factor.
pub fn factor_out(v: &Qcm) -> Result<FactorOut> {
    v.require_valid()?;
    let n = v.total_modes();
    let wd = williamson(v)?;
    let k = wd.nu().iter().filter(|&&nu| nu > 1.0 + PURITY_BAND).count();

    if k == n || k == 0 {
        // Nothing to split; keep the input basis.
        let empty = Qcm::new(SymMatrix::zeros(0), Vec::<(String, usize)>::new())?;
        let (core, pure_part) = if k == n {
            (v.clone(), empty)
        } else {
            (empty, v.clone())
        };
        return Ok(FactorOut {
            core,
            pure_part,
            transform: DMatrix::identity(2 * n, 2 * n),
            core_modes: k,
            pure_modes: n - k,
        });
    }

    let nu = wd.nu();
    let core_diag: Vec<f64> = nu[..k].iter().chain(nu[..k].iter()).cloned().collect();
    let pure_diag: Vec<f64> = nu[k..].iter().chain(nu[k..].iter()).cloned().collect();
    let core = Qcm::new(SymMatrix::from_diagonal(&core_diag), vec![("R", k)])?;
    let pure_part = Qcm::new(SymMatrix::from_diagonal(&pure_diag), vec![("P", n - k)])?;

    // T = S_pb · Pᵀ · Q_split, column rp of the permutation part selecting
    // the party-blocked column perm[σ(rp)] of S; σ maps split coordinates
    // (R xxpp, then P xxpp) to global xxpp ones.
    let counts = v.mode_counts();
    let perm = global_ordering(&counts);
    let mut sigma = Vec::with_capacity(2 * n);
    for i in 0..k {
        sigma.push(i); // R positions
    }
    for i in 0..k {
        sigma.push(n + i); // R momenta
    }
    for j in 0..n - k {
        sigma.push(k + j); // P positions
    }
    for j in 0..n - k {
        sigma.push(n + k + j); // P momenta
    }
    let s = wd.s();
    let mut transform = DMatrix::zeros(2 * n, 2 * n);
    for (rp, &g) in sigma.iter().enumerate() {
        transform.set_column(rp, &s.column(perm[g]));
    }
    Ok(FactorOut {
        core,
        pure_part,
        transform,
        core_modes: k,
        pure_modes: n - k,
    })
}

/// Gaussian measurement of one party with a valid seed QCM.
///
/// Returns the post-measurement QCM of the remaining parties,
/// `(V + 0 ⊕ σ) / (V_B + σ)`, and the classical covariance of the
/// measurement outcomes, `(V_B + σ)/2`.
pub fn gaussian_measurement(
    v: &Qcm,
    measured: &str,
    seed: &Qcm,
) -> Result<(Qcm, SymMatrix)> {
    v.require_valid()?;
    seed.require_valid()?;
    let range = v.party_range(measured)?;
    if seed.dim() != range.len() {
        return Err(Error::DimensionMismatch {
            left: seed.dim(),
            right: range.len(),
        });
    }

    let mut m = v.mat().clone();
    m.view_mut((range.start, range.start), (range.len(), range.len()))
        .add_assign(seed.mat());
    let shifted = Qcm::new(
        SymMatrix::symmetrized(m),
        v.parties()
            .iter()
            .map(|p| (p.label.clone(), p.modes))
            .collect::<Vec<_>>(),
    )?;
    let post = shifted.as_partitioned().schur_complement(&[measured])?;
    let remaining: Vec<(String, usize)> = v
        .parties()
        .iter()
        .filter(|p| p.label != measured)
        .map(|p| (p.label.clone(), p.modes))
        .collect();
    let post_qcm = Qcm::new(post.base().clone(), remaining)?;

    let v_b = v.project(&[measured])?;
    let outcome_cov = v_b.base().add(seed.base())?.scale(0.5);
    Ok((post_qcm, outcome_cov))
}

/// Purified steering inequality
/// `M(V_AC) + M(V_BC) − M(V_A) − M(V_B) ≥ 0` for valid tripartite QCMs.
/// Returns the left-hand side; invalid inputs are refused because the
/// inequality fails for general positive matrices.
pub fn steering_inequality(v: &Qcm) -> Result<f64> {
    if v.parties().len() != 3 {
        return Err(Error::Shape(format!(
            "steering inequality needs three parties, got {}",
            v.parties().len()
        )));
    }
    v.require_valid()?;
    let labels: Vec<String> = v.parties().iter().map(|p| p.label.clone()).collect();
    let (a, b, c) = (labels[0].as_str(), labels[1].as_str(), labels[2].as_str());
    let m_ac = v.project(&[a, c])?.base().logdet()?;
    let m_bc = v.project(&[b, c])?.base().logdet()?;
    let m_a = v.project(&[a])?.base().logdet()?;
    let m_b = v.project(&[b])?.base().logdet()?;
    Ok(0.5 * (m_ac + m_bc - m_a - m_b))
}

/// Smallest symplectic eigenvalue of the momentum-flipped `Ṽ = ΛVΛ` of a
/// `1 × 1`-mode valid QCM. Values below one witness entanglement (Simon
/// criterion); the distance from one measures how far the instance sits
/// from the separability boundary.
pub fn ppt_flipped_min_nu(v: &Qcm) -> Result<f64> {
    if v.parties().len() != 2 || v.parties().iter().any(|p| p.modes != 1) {
        return Err(Error::Shape(
            "PPT check needs two parties of one mode each".into(),
        ));
    }
    v.require_valid()?;
    // Λ flips the momentum of the second party: index 3 in (x_A p_A x_B p_B).
    // Sign flip of row and column 3; the diagonal entry flips twice and
    // stays put.
    let mut m = v.mat().clone();
    for i in 0..4 {
        m[(i, 3)] = -m[(i, 3)];
        m[(3, i)] = -m[(3, i)];
    }
    let flipped = SymMatrix::symmetrized(m);
    let nu = super::symplectic_eigenvalues_with_omega(&flipped, &symplectic_form(&[1, 1]))?;
    Ok(nu.iter().cloned().fold(f64::INFINITY, f64::min))
}

/// Two-mode PPT separability check (Simon criterion): a `1 × 1`-mode
/// valid QCM is separable iff the momentum-flipped `Ṽ = ΛVΛ` is again a
/// valid QCM.
pub fn ppt_two_mode_separable(v: &Qcm) -> Result<bool> {
    Ok(ppt_flipped_min_nu(v)? >= 1.0 - QCM_TOL)
}
