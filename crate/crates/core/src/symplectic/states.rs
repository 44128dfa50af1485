//! Canonical states and seeded generators at the covariance level.

use nalgebra::DMatrix;

use crate::matcore::SymMatrix;
use crate::rng::GaussStream;

use super::{symplectic_form, Qcm};

/// Vacuum: the identity QCM.
pub fn vacuum(parties: Vec<(impl Into<String>, usize)>) -> Qcm {
    let parties: Vec<(String, usize)> = parties
        .into_iter()
        .map(|(l, m)| (l.into(), m))
        .collect();
    let total: usize = parties.iter().map(|(_, m)| m).sum();
    Qcm::new(SymMatrix::identity(2 * total), parties).expect("consistent by construction")
}

/// Single-party thermal state with the given symplectic eigenvalues.
pub fn thermal(label: impl Into<String>, nu: &[f64]) -> Qcm {
    let n = nu.len();
    let mut diag = Vec::with_capacity(2 * n);
    diag.extend_from_slice(nu);
    diag.extend_from_slice(nu);
    Qcm::new(SymMatrix::from_diagonal(&diag), vec![(label.into(), n)])
        .expect("consistent by construction")
}

/// Two-mode squeezed vacuum with squeezing `r`, on parties `A` and `B` of
/// one mode each: local blocks `cosh(2r)·1`, coupling
/// `sinh(2r)·diag(1, −1)`. Pure, with local entropy `ln cosh 2r`.
pub fn tmsv(r: f64) -> Qcm {
    let c = (2.0 * r).cosh();
    let s = (2.0 * r).sinh();
    let m = DMatrix::from_row_slice(
        4,
        4,
        &[
            c, 0.0, s, 0.0, //
            0.0, c, 0.0, -s, //
            s, 0.0, c, 0.0, //
            0.0, -s, 0.0, c,
        ],
    );
    Qcm::new(SymMatrix::symmetrized(m), vec![("A", 1), ("B", 1)])
        .expect("consistent by construction")
}

/// Random symplectic matrix `exp(Ω Q)` for the party-blocked form of the
/// given mode counts, with `Q` symmetric of the given spread.
pub fn random_symplectic(rng: &mut GaussStream, mode_counts: &[usize], spread: f64) -> DMatrix<f64> {
    let dim: usize = 2 * mode_counts.iter().sum::<usize>();
    let q = rng.symmetric(dim, spread);
    (symplectic_form(mode_counts) * q.mat()).exp()
}

/// Random valid QCM `S Δ Sᵀ` with symplectic eigenvalues in
/// `[1 + margin, 1 + margin + nu_spread]` and squeezing controlled by
/// `spread`. Strictly valid by construction when `margin > 0`.
pub fn random_valid_qcm(
    rng: &mut GaussStream,
    parties: Vec<(impl Into<String>, usize)>,
    margin: f64,
    nu_spread: f64,
    spread: f64,
) -> Qcm {
    let parties: Vec<(String, usize)> = parties
        .into_iter()
        .map(|(l, m)| (l.into(), m))
        .collect();
    let counts: Vec<usize> = parties.iter().map(|(_, m)| *m).collect();
    let n: usize = counts.iter().sum();
    let s = random_symplectic(rng, &counts, spread);

    // Party-blocked diagonal normal form.
    let mut diag = vec![0.0; 2 * n];
    let mut offset = 0;
    for &np in &counts {
        for j in 0..np {
            let nu = 1.0 + margin + nu_spread * rng.uniform();
            diag[offset + j] = nu;
            diag[offset + np + j] = nu;
        }
        offset += 2 * np;
    }
    let delta = SymMatrix::from_diagonal(&diag);
    Qcm::new(delta.congruence(&s), parties).expect("consistent by construction")
}

/// Random `1 × 1`-mode valid QCM whose momentum-flipped spectrum stays at
/// least `boundary_margin` away from the separability boundary, so PPT
/// classification is unambiguous. Draws are rejected until the margin
/// holds; both classes occur with substantial probability.
pub fn random_two_mode_away_from_boundary(rng: &mut GaussStream, boundary_margin: f64) -> Qcm {
    loop {
        let v = random_valid_qcm(rng, vec![("A", 1), ("B", 1)], 0.05, 1.2, 0.5);
        let flipped = super::ops::ppt_flipped_min_nu(&v).expect("valid by construction");
        if (flipped - 1.0).abs() >= boundary_margin {
            return v;
        }
    }
}

/// Random pure QCM `S Sᵀ`.
pub fn random_pure_qcm(
    rng: &mut GaussStream,
    parties: Vec<(impl Into<String>, usize)>,
    spread: f64,
) -> Qcm {
    let parties: Vec<(String, usize)> = parties
        .into_iter()
        .map(|(l, m)| (l.into(), m))
        .collect();
    let counts: Vec<usize> = parties.iter().map(|(_, m)| *m).collect();
    let s = random_symplectic(rng, &counts, spread);
    Qcm::new(
        SymMatrix::symmetrized(&s * s.transpose()),
        parties,
    )
    .expect("consistent by construction")
}
