//! Quantum-covariance suite: Williamson reconstruction, the dominated
//! pure state γ#, purification, pure/mixed factorization, Gaussian
//! measurements and the purified steering inequality.

use crate::loggauss::logdet_entropy;
use crate::rng::{substream_seed, GaussStream};
use crate::symplectic::{
    factor_out, gamma_sharp, gaussian_measurement, purify, random_pure_qcm, random_symplectic,
    random_valid_qcm, steering_inequality, williamson, Qcm,
};

use super::{aggregate, parallel_map, Check, InstanceSnapshot, PropertyStats, ReplayRecord, SuiteConfig};

/// Deterministic random single-party valid QCM with `1..=max_modes`
/// modes.
pub fn random_qcm_instance(instance_seed: u64, max_modes: usize) -> Qcm {
    let mut rng = GaussStream::new(instance_seed);
    let modes = rng.integer_in(1, max_modes);
    random_valid_qcm(&mut rng, vec![("A", modes)], 0.05, 1.5, 0.4)
}

/// Deterministic random positive definite matrix carried as a (not
/// necessarily valid) QCM of `1..=max_modes` modes.
pub fn random_positive_instance(instance_seed: u64, max_modes: usize) -> Qcm {
    let mut rng = GaussStream::new(instance_seed);
    let modes = rng.integer_in(1, max_modes);
    // Spread around the uncertainty boundary so both verdict classes of
    // the dominance equivalences occur.
    let scale = 0.4 + 1.2 * rng.uniform();
    let k = rng.positive_definite(2 * modes, 0.3).scale(scale);
    Qcm::new(k, vec![("A", modes)]).expect("even dimension")
}

fn evaluate(instance_seed: u64, max_modes: usize) -> Vec<Check> {
    let mut checks = Vec::new();

    // Williamson block.
    let v = random_qcm_instance(instance_seed, max_modes);
    let snapshot = || InstanceSnapshot::from_qcm(&v);
    let norm = v.base().spectral_norm();
    let wd = williamson(&v).expect("valid instance");
    checks.push(Check::new(
        "williamson_reconstruction",
        (wd.reconstruct().mat() - v.mat()).norm() / norm,
        1e-8,
        snapshot,
    ));
    checks.push(Check::new(
        "williamson_symplectic",
        wd.symplectic_residual(),
        1e-8,
        snapshot,
    ));
    let logdet = v.base().logdet().expect("PD");
    let from_nu: f64 = wd.nu().iter().map(|nu| 2.0 * nu.ln()).sum();
    checks.push(Check::new(
        "williamson_determinant",
        (logdet - from_nu).abs() / (1.0 + logdet.abs()),
        1e-9,
        snapshot,
    ));

    // γ# block on a random positive (not necessarily valid) matrix.
    let k = random_positive_instance(substream_seed(instance_seed, 0x6a), max_modes);
    let k_snapshot = || InstanceSnapshot::from_qcm(&k);
    let sharp = gamma_sharp(&k).expect("PD instance");
    checks.push(Check::new(
        "gamma_sharp_purity",
        sharp.base().logdet().expect("PD").abs(),
        1e-9,
        k_snapshot,
    ));
    {
        // Three-way equivalence of K ≻ iΩ, K ≻ ΩK⁻¹Ωᵀ, K ≻ γ#, compared
        // only outside a margin band around the boundary.
        let band = 1e-7;
        let min_nu = k
            .symplectic_eigenvalues()
            .expect("PD")
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let rotated = k
            .base()
            .inverse()
            .expect("PD")
            .congruence(&k.omega());
        let margin_rot = k.base().sub(&rotated).expect("shape").min_eigenvalue();
        let margin_sharp = k.base().sub(sharp.base()).expect("shape").min_eigenvalue();
        let outside_band = (min_nu - 1.0).abs() > band
            && margin_rot.abs() > band
            && margin_sharp.abs() > band;
        let coherent = !outside_band
            || ((min_nu > 1.0) == (margin_rot > 0.0) && (min_nu > 1.0) == (margin_sharp > 0.0));
        checks.push(Check::new(
            "gamma_sharp_equivalence",
            if coherent { 0.0 } else { 1.0 },
            0.5,
            k_snapshot,
        ));
    }

    // Purification block.
    let gamma = purify(&v).expect("valid instance");
    let marginal = gamma.project(&["A"]).expect("label exists");
    checks.push(Check::new(
        "purification_marginal",
        (marginal.mat() - v.mat()).norm() / (1.0 + norm),
        1e-9,
        snapshot,
    ));
    let (_, purity_residual) = gamma.purity().expect("PD");
    checks.push(Check::new(
        "purification_purity",
        purity_residual,
        1e-8,
        snapshot,
    ));
    checks.push(Check::new(
        "purification_mode_count",
        if gamma.parties()[1].modes == v.total_modes() {
            0.0
        } else {
            1.0
        },
        0.5,
        snapshot,
    ));

    // Factor-out on a constructed mixed ⊕ pure composite.
    {
        let mut rng = GaussStream::new(substream_seed(instance_seed, 0xfa));
        let mixed_modes = rng.integer_in(1, max_modes.saturating_sub(1).max(1));
        let mixed = random_valid_qcm(&mut rng, vec![("M", mixed_modes)], 0.2, 1.0, 0.3);
        let pure = random_pure_qcm(&mut rng, vec![("Q", 1)], 0.3);
        let composite = mixed
            .direct_sum(&pure)
            .expect("labels distinct")
            .merge_parties(&[("A", &["M", "Q"])])
            .expect("consistent");
        let s = random_symplectic(&mut rng, &[mixed_modes + 1], 0.2);
        let rotated = Qcm::new(
            composite.base().congruence(&s),
            vec![("A", mixed_modes + 1)],
        )
        .expect("even dimension");
        let rot_snapshot = || InstanceSnapshot::from_qcm(&rotated);
        let f = factor_out(&rotated).expect("valid instance");
        let recombine_residual = (f.recombine().mat() - rotated.mat()).norm()
            / (1.0 + rotated.base().spectral_norm());
        checks.push(Check::new(
            "factor_out_recombination",
            recombine_residual,
            1e-7,
            rot_snapshot,
        ));
        checks.push(Check::new(
            "factor_out_split",
            if f.pure_modes >= 1 { 0.0 } else { 1.0 },
            0.5,
            rot_snapshot,
        ));
    }

    // Measurement block on a bipartite instance.
    {
        let mut rng = GaussStream::new(substream_seed(instance_seed, 0x3e));
        let v2 = random_valid_qcm(&mut rng, vec![("A", 1), ("B", 1)], 0.05, 1.0, 0.4);
        let seed_qcm = random_pure_qcm(&mut rng, vec![("B", 1)], 0.4);
        let v2_snapshot = || InstanceSnapshot::from_qcm(&v2);
        let (post, _) = gaussian_measurement(&v2, "B", &seed_qcm).expect("valid inputs");
        let (_, post_validity) = post.validity().expect("PD");
        checks.push(Check::new(
            "measurement_validity",
            -post_validity,
            1e-8,
            v2_snapshot,
        ));
    }

    // Steering inequality on a tripartite instance.
    {
        let mut rng = GaussStream::new(substream_seed(instance_seed, 0x57));
        let v3 = random_valid_qcm(
            &mut rng,
            vec![("A", 1), ("B", 1), ("C", 1)],
            0.02,
            1.0,
            0.5,
        );
        let v3_snapshot = || InstanceSnapshot::from_qcm(&v3);
        let lhs = steering_inequality(&v3).expect("valid instance");
        checks.push(Check::new("steering_inequality", -lhs, 1e-9, v3_snapshot));
    }

    // Pure marginal decoupling on a constructed instance.
    {
        let mut rng = GaussStream::new(substream_seed(instance_seed, 0x9d));
        let pure_a = random_pure_qcm(&mut rng, vec![("A", 1)], 0.4);
        let mixed_b = random_valid_qcm(&mut rng, vec![("B", 1)], 0.1, 1.0, 0.4);
        let v2 = pure_a.direct_sum(&mixed_b).expect("labels distinct");
        let v2_snapshot = || InstanceSnapshot::from_qcm(&v2);
        let coupling = v2.mat().view((0, 2), (2, 2)).norm();
        checks.push(Check::new(
            "pure_reduction",
            coupling / (1.0 + v2.base().spectral_norm()),
            1e-8,
            v2_snapshot,
        ));
    }

    checks
}

/// The scaling counterexample for the steering inequality: a valid QCM
/// shrunk below the uncertainty bound violates the raw log-det
/// combination, confirming the QCM precondition is necessary. Returns
/// the (negative) left-hand side.
pub fn steering_counterexample(seed: u64) -> f64 {
    let mut rng = GaussStream::new(seed);
    let v = random_valid_qcm(&mut rng, vec![("A", 1), ("B", 1), ("C", 1)], 0.05, 0.5, 0.3);
    let scaled = v.base().scale(0.05);
    let p = Qcm::new(scaled, vec![("A", 1), ("B", 1), ("C", 1)])
        .expect("even dimension")
        .as_partitioned();
    let m = |labels: &[&str]| {
        logdet_entropy(p.project(labels).expect("labels").base()).expect("PD")
    };
    m(&["A", "C"]) + m(&["B", "C"]) - m(&["A"]) - m(&["B"])
}

fn fixed_checks(seed: u64) -> Vec<Check> {
    let lhs = steering_counterexample(substream_seed(seed, 0xce));
    // The counterexample must genuinely violate the inequality.
    vec![Check {
        name: "steering_counterexample_violates",
        residual: if lhs < 0.0 { 0.0 } else { 1.0 },
        threshold: 0.5,
        snapshot: None,
    }]
}

/// Quantum suite at the configured instance count (modes ≤ 3).
pub fn run(config: &SuiteConfig) -> (Vec<PropertyStats>, Vec<ReplayRecord>) {
    let seed = config.seed;
    let mut per_instance = parallel_map(config.count, config.threads, |index| {
        evaluate(substream_seed(seed, index as u64), 3)
    });
    per_instance.push(fixed_checks(seed));
    aggregate(seed, per_instance)
}
