use approx::assert_relative_eq;
use nalgebra::DMatrix;

use super::*;
use crate::loggauss;
use crate::rng::GaussStream;
use crate::testutil::max_abs_diff;

#[test]
fn symplectic_form_shapes() {
    // One mode.
    let omega = symplectic_form(&[1]);
    assert_eq!(omega, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));

    // Two one-mode parties: direct sum of two 2x2 forms.
    let omega = symplectic_form(&[1, 1]);
    let block = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    let mut expected = DMatrix::zeros(4, 4);
    expected.view_mut((0, 0), (2, 2)).copy_from(&block);
    expected.view_mut((2, 2), (2, 2)).copy_from(&block);
    assert_eq!(omega, expected);

    // Orthogonality of the standard form.
    let omega = symplectic_form(&[3]);
    assert!(max_abs_diff(&(&omega * omega.transpose()), &DMatrix::identity(6, 6)) < 1e-15);
}

#[test]
fn party_blocked_form_matches_global_by_permutation() {
    let counts = [2, 1, 3];
    let omega_pb = symplectic_form(&counts);
    let total: usize = counts.iter().sum();
    let omega_g = symplectic_form(&[total]);
    let perm = global_ordering(&counts);
    assert_eq!(permute(&omega_pb, &perm), omega_g);
}

#[test]
fn symplectic_eigenvalues_known_cases() {
    // Canonical thermal mode diag(ν, ν).
    let v = thermal("A", &[3.0]);
    let nu = v.symplectic_eigenvalues().unwrap();
    assert_eq!(nu.len(), 1);
    assert_relative_eq!(nu[0], 3.0, max_relative = 1e-12);

    // Single squeezed mode: ν = √det = 2.
    let v = Qcm::new(SymMatrix::from_diagonal(&[4.0, 1.0]), vec![("A", 1)]).unwrap();
    assert_relative_eq!(v.symplectic_eigenvalues().unwrap()[0], 2.0, max_relative = 1e-12);

    // Pure two-mode squeezed vacuum: both ν = 1.
    let v = tmsv(0.7);
    let nu = v.symplectic_eigenvalues().unwrap();
    assert_relative_eq!(nu[0], 1.0, max_relative = 1e-9);
    assert_relative_eq!(nu[1], 1.0, max_relative = 1e-9);
    assert_relative_eq!(v.base().logdet().unwrap(), 0.0, epsilon = 1e-10);
}

#[test]
fn validity_and_purity_reports() {
    let below = Qcm::new(SymMatrix::from_diagonal(&[0.5, 0.5]), vec![("A", 1)]).unwrap();
    let (valid, residual) = below.validity().unwrap();
    assert!(!valid);
    assert_relative_eq!(residual, -0.5, max_relative = 1e-12);

    let vac = vacuum(vec![("A", 2)]);
    assert!(vac.is_valid());
    assert!(vac.is_pure());

    let hot = thermal("A", &[2.0]);
    assert!(hot.is_valid());
    assert!(!hot.is_pure());
    assert!(hot.require_strictly_valid(0.5).is_ok());
    assert!(hot.require_strictly_valid(1.5).is_err());
}

#[test]
fn williamson_canonical_cases() {
    // Already canonical: S = 1, ν = [2].
    let v = thermal("A", &[2.0]);
    let wd = williamson(&v).unwrap();
    assert_eq!(wd.nu().len(), 1);
    assert_relative_eq!(wd.nu()[0], 2.0, max_relative = 1e-12);
    assert!(max_abs_diff(wd.s(), &DMatrix::identity(2, 2)) < 1e-9);

    // Single-mode squeeze-scaling: diag(4,1) = S diag(2,2) Sᵀ with
    // S = diag(√2, 1/√2).
    let v = Qcm::new(SymMatrix::from_diagonal(&[4.0, 1.0]), vec![("A", 1)]).unwrap();
    let wd = williamson(&v).unwrap();
    assert_relative_eq!(wd.nu()[0], 2.0, max_relative = 1e-12);
    let expected = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&[
        2.0f64.sqrt(),
        0.5f64.sqrt(),
    ]));
    assert!(max_abs_diff(wd.s(), &expected) < 1e-9);
}

#[test]
fn williamson_reconstruction_on_random_qcms() {
    let mut rng = GaussStream::new(101);
    for trial in 0..30 {
        let modes = 1 + trial % 3;
        let v = random_valid_qcm(&mut rng, vec![("A", modes)], 0.05, 1.5, 0.4);
        let wd = williamson(&v).unwrap();
        let norm = v.base().spectral_norm();
        assert!((wd.reconstruct().mat() - v.mat()).norm() <= 1e-8 * norm);
        assert!(wd.symplectic_residual() <= 1e-8);
        // Sorted descending.
        for w in wd.nu().windows(2) {
            assert!(w[0] >= w[1] - 1e-12);
        }
        // det V = Π νᵢ².
        let logdet = v.base().logdet().unwrap();
        let from_nu: f64 = wd.nu().iter().map(|nu| 2.0 * nu.ln()).sum();
        assert_relative_eq!(logdet, from_nu, max_relative = 1e-9, epsilon = 1e-9);
        // Deterministic for a fixed input.
        let wd2 = williamson(&v).unwrap();
        assert_eq!(wd.s(), wd2.s());
    }
}

#[test]
fn williamson_multiparty_uses_party_blocked_form() {
    let mut rng = GaussStream::new(103);
    let v = random_valid_qcm(&mut rng, vec![("A", 1), ("B", 2)], 0.1, 1.0, 0.5);
    let wd = williamson(&v).unwrap();
    let omega = v.omega();
    assert!((wd.s() * &omega * wd.s().transpose() - &omega).norm() <= 1e-8);
    assert!((wd.reconstruct().mat() - v.mat()).norm() <= 1e-8 * v.base().spectral_norm());
}

#[test]
fn gamma_sharp_cases() {
    // Commuting case: diag(2,2) → identity.
    let k = thermal("A", &[2.0]);
    let sharp = gamma_sharp(&k).unwrap();
    assert!(max_abs_diff(sharp.mat(), &DMatrix::identity(2, 2)) < 1e-10);

    // A pure input is its own γ#.
    let mut rng = GaussStream::new(107);
    let pure = random_pure_qcm(&mut rng, vec![("A", 1), ("B", 1)], 0.5);
    let sharp = gamma_sharp(&pure).unwrap();
    assert!(max_abs_diff(sharp.mat(), pure.mat()) < 1e-8 * (1.0 + pure.base().spectral_norm()));

    // Lemma equivalences for random K > 0: K ≻ iΩ ⟺ K ≻ ΩK⁻¹Ωᵀ ⟺ K ≻ γ#,
    // and γ# is always pure.
    for trial in 0..40 {
        let dim = 4;
        let k_mat = rng.positive_definite(dim, 0.3 + 0.2 * (trial % 3) as f64);
        let k = Qcm::new(k_mat, vec![("A", 1), ("B", 1)]).unwrap();
        let sharp = gamma_sharp(&k).unwrap();
        let (pure, residual) = sharp.purity().unwrap();
        assert!(pure, "gamma_sharp not pure: residual {residual}");
        assert!(sharp.base().logdet().unwrap().abs() <= 1e-9);

        let margin_band = 1e-7;
        let min_nu = k
            .symplectic_eigenvalues()
            .unwrap()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let rotated = k.base().inverse().unwrap().congruence(&k.omega());
        let cond_rot = k.base().sub(&rotated).unwrap().min_eigenvalue();
        let cond_sharp = k.base().sub(sharp.base()).unwrap().min_eigenvalue();
        // Compare verdicts only away from the tolerance band.
        if (min_nu - 1.0).abs() > margin_band
            && cond_rot.abs() > margin_band
            && cond_sharp.abs() > margin_band
        {
            let above = min_nu > 1.0;
            assert_eq!(above, cond_rot > 0.0);
            assert_eq!(above, cond_sharp > 0.0);
        }
    }
}

#[test]
fn purify_thermal_mode_gives_two_mode_squeezed_block() {
    // diag(2,2) purifies with coupling √3·diag(1,−1) and det 1.
    let v = thermal("A", &[2.0]);
    let gamma = purify(&v).unwrap();
    assert_eq!(gamma.total_modes(), 2);
    let s3 = 3.0f64.sqrt();
    let expected = DMatrix::from_row_slice(
        4,
        4,
        &[
            2.0, 0.0, s3, 0.0, //
            0.0, 2.0, 0.0, -s3, //
            s3, 0.0, 2.0, 0.0, //
            0.0, -s3, 0.0, 2.0,
        ],
    );
    assert!(max_abs_diff(gamma.mat(), &expected) < 1e-9);
    assert!(gamma.is_pure());
}

#[test]
fn purify_round_trip() {
    let mut rng = GaussStream::new(109);
    for trial in 0..20 {
        let modes = 1 + trial % 2;
        let v = random_valid_qcm(&mut rng, vec![("A", modes)], 0.05, 1.2, 0.4);
        let gamma = purify(&v).unwrap();
        assert_eq!(gamma.parties().len(), 2);
        assert_eq!(gamma.parties()[1].modes, v.total_modes());
        let marginal = gamma.project(&["A"]).unwrap();
        assert!(max_abs_diff(marginal.mat(), v.mat()) <= 1e-9 * (1.0 + v.base().spectral_norm()));
        let (pure, residual) = gamma.purity().unwrap();
        assert!(pure, "purification impure: residual {residual}");
    }

    // A pure state purifies with an uncorrelated ancilla.
    let pure = tmsv(0.4).merge_parties(&[("A", &["A", "B"])]).unwrap();
    let gamma = purify(&pure).unwrap();
    let coupling = gamma.mat().view((0, 4), (4, 4)).norm();
    assert!(coupling < 1e-7);
    assert!(max_abs_diff(gamma.project(&["A"]).unwrap().mat(), pure.mat()) < 1e-9);
}

#[test]
fn factor_out_cases() {
    // Entirely pure input: empty core, η = V.
    let pure = tmsv(0.3);
    let f = factor_out(&pure).unwrap();
    assert_eq!(f.core_modes, 0);
    assert_eq!(f.pure_modes, 2);
    assert_eq!(f.pure_part.mat(), pure.mat());

    // Canonical mixed ⊕ vacuum split.
    let v = thermal("A", &[2.0])
        .direct_sum(&vacuum(vec![("B", 1)]))
        .unwrap();
    let f = factor_out(&v).unwrap();
    assert_eq!(f.core_modes, 1);
    assert_eq!(f.pure_modes, 1);
    assert!(max_abs_diff(&f.recombine().into_inner(), v.mat()) < 1e-9);

    // Build-then-split on a rotated composite.
    let mut rng = GaussStream::new(113);
    for _ in 0..10 {
        let mixed = random_valid_qcm(&mut rng, vec![("M", 2)], 0.2, 1.0, 0.3);
        let pure = random_pure_qcm(&mut rng, vec![("Q", 1)], 0.3);
        let composite = mixed
            .direct_sum(&pure)
            .unwrap()
            .merge_parties(&[("A", &["M", "Q"])])
            .unwrap();
        let s = random_symplectic(&mut rng, &[3], 0.2);
        let rotated = Qcm::new(composite.base().congruence(&s), vec![("A", 3)]).unwrap();
        let f = factor_out(&rotated).unwrap();
        assert_eq!(f.core_modes, 2, "expected two strictly mixed modes");
        assert_eq!(f.pure_modes, 1);
        let scale = 1.0 + rotated.base().spectral_norm();
        assert!(max_abs_diff(&f.recombine().into_inner(), rotated.mat()) < 1e-7 * scale);
        // The core is strictly above the uncertainty bound.
        assert!(f.core.require_strictly_valid(PURITY_BAND).is_ok());
        let (pure_ok, _) = f.pure_part.purity().unwrap();
        assert!(pure_ok);
    }
}

#[test]
fn pure_marginal_decouples() {
    // Lemma-style check: if the A marginal of a valid QCM is pure, the
    // A-B coupling vanishes. Construct such states directly.
    let mut rng = GaussStream::new(127);
    for _ in 0..10 {
        let pure_a = random_pure_qcm(&mut rng, vec![("A", 1)], 0.4);
        let mixed_b = random_valid_qcm(&mut rng, vec![("B", 2)], 0.1, 1.0, 0.4);
        let v = pure_a.direct_sum(&mixed_b).unwrap();
        let coupling = v.mat().view((0, 2), (2, 4)).norm();
        assert!(coupling <= 1e-8 * (1.0 + v.base().spectral_norm()));
        // And the marginal is indeed pure.
        assert!(v.project(&["A"]).unwrap().is_pure());
    }
}

#[test]
fn measurement_cases() {
    // Product state: measuring B leaves A untouched.
    let a = thermal("A", &[1.7]);
    let b = thermal("B", &[1.3]);
    let v = a.direct_sum(&b).unwrap();
    let seed = vacuum(vec![("B", 1)]);
    let (post, outcome) = gaussian_measurement(&v, "B", &seed).unwrap();
    assert!(max_abs_diff(post.mat(), a.mat()) < 1e-12);
    // Outcome covariance (V_B + σ)/2 = diag(1.15, 1.15).
    assert_relative_eq!(outcome.mat()[(0, 0)], 1.15, max_relative = 1e-12);

    // Heterodyne on a two-mode squeezed vacuum: post-measurement state is
    // a valid single-mode QCM purer than the thermal marginal.
    let v = tmsv(0.5);
    let (post, _) = gaussian_measurement(&v, "B", &vacuum(vec![("B", 1)])).unwrap();
    assert!(post.is_valid());
    let det_post = post.base().logdet().unwrap();
    let det_marginal = v.project(&["A"]).unwrap().base().logdet().unwrap();
    assert!(det_post < det_marginal);

    // Vacuum seed on vacuum outcome: (I + I)/2 = I.
    let v = vacuum(vec![("A", 1), ("B", 1)]);
    let (_, outcome) = gaussian_measurement(&v, "B", &vacuum(vec![("B", 1)])).unwrap();
    assert!(max_abs_diff(outcome.mat(), &DMatrix::identity(2, 2)) < 1e-12);

    // Invalid seeds are refused.
    let bad_seed = Qcm::new(SymMatrix::from_diagonal(&[0.2, 0.2]), vec![("B", 1)]).unwrap();
    assert!(gaussian_measurement(&v, "B", &bad_seed).is_err());

    // Random instances: post-measurement state is always valid.
    let mut rng = GaussStream::new(131);
    for _ in 0..10 {
        let v = random_valid_qcm(&mut rng, vec![("A", 1), ("B", 1)], 0.05, 1.0, 0.4);
        let seed = random_pure_qcm(&mut rng, vec![("B", 1)], 0.4);
        let (post, _) = gaussian_measurement(&v, "B", &seed).unwrap();
        assert!(post.is_valid());
    }
}

#[test]
fn steering_inequality_cases() {
    let v = vacuum(vec![("A", 1), ("B", 1), ("C", 1)]);
    assert_relative_eq!(steering_inequality(&v).unwrap(), 0.0, epsilon = 1e-12);

    let mut rng = GaussStream::new(137);
    for _ in 0..20 {
        let v = random_valid_qcm(&mut rng, vec![("A", 1), ("B", 1), ("C", 1)], 0.02, 1.0, 0.5);
        assert!(steering_inequality(&v).unwrap() >= -1e-9);
    }

    // A scaled-down positive matrix stops being a QCM and violates the
    // unbalanced combination: the operation refuses it, and the raw
    // log-det combination indeed goes negative.
    let v = random_valid_qcm(&mut rng, vec![("A", 1), ("B", 1), ("C", 1)], 0.05, 0.5, 0.3);
    let k = 0.05;
    let scaled = Qcm::new(v.base().scale(k), vec![("A", 1), ("B", 1), ("C", 1)]).unwrap();
    assert!(matches!(
        steering_inequality(&scaled),
        Err(crate::Error::InvalidQcm { .. })
    ));
    let p = scaled.as_partitioned();
    let lhs = loggauss::logdet_entropy(p.project(&["A", "C"]).unwrap().base()).unwrap()
        + loggauss::logdet_entropy(p.project(&["B", "C"]).unwrap().base()).unwrap()
        - loggauss::logdet_entropy(p.project(&["A"]).unwrap().base()).unwrap()
        - loggauss::logdet_entropy(p.project(&["B"]).unwrap().base()).unwrap();
    assert!(lhs < 0.0, "scaled-down counterexample should violate: {lhs}");
}

#[test]
fn ppt_two_mode_cases() {
    // Product state: separable.
    let v = thermal("A", &[1.5]).direct_sum(&thermal("B", &[2.0])).unwrap();
    assert!(ppt_two_mode_separable(&v).unwrap());

    // Vacuum: separable.
    assert!(ppt_two_mode_separable(&vacuum(vec![("A", 1), ("B", 1)])).unwrap());

    // Two-mode squeezed vacuum: entangled.
    assert!(!ppt_two_mode_separable(&tmsv(0.5)).unwrap());

    // Wrong shape is refused.
    assert!(ppt_two_mode_separable(&vacuum(vec![("A", 2), ("B", 1)])).is_err());
}

#[test]
fn merge_and_project_orderings() {
    let mut rng = GaussStream::new(139);
    let v = random_valid_qcm(&mut rng, vec![("A", 1), ("B", 1), ("C", 1)], 0.1, 1.0, 0.4);

    // Merging B and C then projecting back to A gives the A marginal.
    let merged = v.merge_parties(&[("A", &["A"]), ("BC", &["B", "C"])]).unwrap();
    assert_eq!(merged.parties().len(), 2);
    assert_eq!(merged.parties()[1].modes, 2);
    let a1 = v.project(&["A"]).unwrap();
    let a2 = merged.project(&["A"]).unwrap();
    assert!(max_abs_diff(a1.mat(), a2.mat()) < 1e-14);

    // Merging is a symplectic permutation: the spectrum is unchanged.
    let nu1 = v.symplectic_eigenvalues().unwrap();
    let nu2 = merged.symplectic_eigenvalues().unwrap();
    for (a, b) in nu1.iter().zip(nu2.iter()) {
        assert_relative_eq!(a, b, max_relative = 1e-9);
    }

    // Determinant of the merged matrix is preserved.
    assert_relative_eq!(
        v.base().logdet().unwrap(),
        merged.base().logdet().unwrap(),
        max_relative = 1e-10,
        epsilon = 1e-12
    );
}

#[test]
fn zero_mode_party_is_harmless() {
    let v = Qcm::new(SymMatrix::identity(2), vec![("A", 1), ("C", 0)]).unwrap();
    assert!(v.is_valid());
    let p = v.as_partitioned();
    assert_eq!(p.project(&["C"]).unwrap().dim(), 0);
}
