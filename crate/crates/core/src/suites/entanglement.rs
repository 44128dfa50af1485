//! Entanglement suite: exactness anchors, faithfulness against the PPT
//! oracle, the conditional-mutual-information bound, squashed
//! certificates, monogamy and additivity.

use crate::entangle::{
    additivity_check, cmi_entanglement_bound, eof_optimize, monogamy_check,
    squashed_entanglement, EofConfig,
};
use crate::matcore::SymMatrix;
use crate::rng::{substream_seed, GaussStream};
use crate::symplectic::{
    ppt_two_mode_separable, random_two_mode_away_from_boundary, random_valid_qcm, thermal, tmsv,
    Qcm,
};

use super::{aggregate, parallel_map, Check, InstanceSnapshot, PropertyStats, ReplayRecord, SuiteConfig};

/// Margin kept from the separability boundary by the faithfulness
/// generator, so the PPT verdict and the value threshold cannot straddle
/// an instance.
pub const FAITHFULNESS_BOUNDARY_MARGIN: f64 = 0.05;

/// Deterministic two-mode instance for faithfulness testing.
pub fn faithfulness_instance(instance_seed: u64) -> Qcm {
    let mut rng = GaussStream::new(instance_seed);
    random_two_mode_away_from_boundary(&mut rng, FAITHFULNESS_BOUNDARY_MARGIN)
}

/// Deterministic random valid three-party (1+1+1 mode) QCM.
pub fn tripartite_qcm_instance(instance_seed: u64) -> Qcm {
    let mut rng = GaussStream::new(instance_seed);
    random_valid_qcm(&mut rng, vec![("A", 1), ("B", 1), ("C", 1)], 0.05, 1.0, 0.4)
}

/// Deterministic mixed two-mode instance (noisy two-mode squeezed
/// vacuum) for certificate runs.
pub fn mixed_two_mode_instance(instance_seed: u64) -> Qcm {
    let mut rng = GaussStream::new(instance_seed);
    let r = 0.2 + 0.5 * rng.uniform();
    let noise = 0.05 + 0.25 * rng.uniform();
    Qcm::new(
        tmsv(r)
            .base()
            .add(&SymMatrix::identity(4).scale(noise))
            .expect("same shape"),
        vec![("A", 1), ("B", 1)],
    )
    .expect("even dimension")
}

/// Fixed exactness anchors: pure two-mode squeezed vacua with local
/// entropy `ln cosh 2r`, and thermal products with no entanglement.
pub fn anchor_checks(eof: &EofConfig) -> Vec<Vec<Check>> {
    let mut per_instance = Vec::new();
    for &r in &[0.25, 0.5, 1.0] {
        let v = tmsv(r);
        let result = eof_optimize(&v, eof).expect("valid instance");
        let expected = (2.0 * r).cosh().ln();
        per_instance.push(vec![Check::new(
            "eof_pure_anchor",
            (result.value - expected).abs(),
            1e-6,
            || InstanceSnapshot::from_qcm(&v),
        )]);
    }
    for &(nu_a, nu_b) in &[(1.5, 1.2), (2.5, 1.05)] {
        let v = thermal("A", &[nu_a])
            .direct_sum(&thermal("B", &[nu_b]))
            .expect("labels distinct");
        let result = eof_optimize(&v, eof).expect("valid instance");
        per_instance.push(vec![Check::new(
            "eof_product_zero",
            result.value,
            1e-6,
            || InstanceSnapshot::from_qcm(&v),
        )]);
    }
    per_instance
}

fn faithfulness_check(instance_seed: u64, eof: &EofConfig) -> Vec<Check> {
    let v = faithfulness_instance(instance_seed);
    let snapshot = || InstanceSnapshot::from_qcm(&v);
    let separable = ppt_two_mode_separable(&v).expect("valid instance");
    let result = eof_optimize(&v, eof).expect("valid instance");
    let classified_separable = result.value <= 1e-5;
    let mut checks = vec![Check::new(
        "eof_faithfulness_vs_ppt",
        if separable == classified_separable {
            0.0
        } else {
            1.0
        },
        0.5,
        snapshot,
    )];
    // The mutual-information upper bound holds on every instance ever
    // evaluated, as does seed dominance.
    checks.push(Check::new(
        "eof_mi_upper_bound",
        result.value - result.upper_bound_mi,
        1e-6,
        snapshot,
    ));
    checks.push(Check::new(
        "eof_seed_dominance",
        result.value - result.ansatz_value,
        1e-12,
        snapshot,
    ));
    checks.push(Check::new(
        "eof_feasibility",
        -result.feasibility_residual / (1.0 + v.base().spectral_norm()),
        1e-8,
        snapshot,
    ));
    checks
}

fn cmi_bound_check(instance_seed: u64, eof: &EofConfig) -> Vec<Check> {
    let v = tripartite_qcm_instance(instance_seed);
    let snapshot = || InstanceSnapshot::from_qcm(&v);
    let report = cmi_entanglement_bound(&v, eof).expect("valid instance");
    vec![Check::new(
        "cmi_entanglement_bound",
        -report.slack,
        eof.optimizer_tol,
        snapshot,
    )]
}

fn certificate_check(instance_seed: u64, eof: &EofConfig) -> Vec<Check> {
    let v = mixed_two_mode_instance(instance_seed);
    let snapshot = || InstanceSnapshot::from_qcm(&v);
    let result = squashed_entanglement(&v, eof).expect("valid instance");
    let gaps: Vec<f64> = result.history.iter().map(|(_, g)| *g).collect();
    let best_gap = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    let steps = gaps.len().saturating_sub(1);
    let increasing = gaps.windows(2).filter(|w| w[1] > w[0] + 1e-12).count();
    let increase_fraction = if steps == 0 {
        0.0
    } else {
        increasing as f64 / steps as f64
    };
    vec![
        Check::new("squashed_certificate_gap", best_gap, 1e-3, snapshot),
        Check::new(
            "squashed_gap_monotone",
            increase_fraction,
            0.05 + 1e-12,
            snapshot,
        ),
        Check::new(
            "squashed_marginal",
            result.certificate.marginal_residual / (1.0 + v.base().spectral_norm()),
            1e-8,
            snapshot,
        ),
    ]
}

fn monogamy_instance_check(instance_seed: u64, index: usize, eof: &EofConfig) -> Vec<Check> {
    // Index 0 is the constructed near-tie: B2 decoupled, slack ≈ 0, which
    // must route through the escalation path.
    if index == 0 {
        let mut rng = GaussStream::new(instance_seed);
        let noisy = Qcm::new(
            tmsv(0.4)
                .base()
                .add(&SymMatrix::identity(4).scale(0.1 + 0.1 * rng.uniform()))
                .expect("same shape"),
            vec![("A", 1), ("B1", 1)],
        )
        .expect("even dimension");
        let v = noisy
            .direct_sum(&thermal("B2", &[1.5]))
            .expect("labels distinct");
        let snapshot = || InstanceSnapshot::from_qcm(&v);
        let report = monogamy_check(&v, eof).expect("valid instance");
        return vec![
            Check::new("monogamy_slack", -report.slack, report.tolerance, snapshot),
            Check::new(
                "monogamy_escalation_exercised",
                if report.escalated { 0.0 } else { 1.0 },
                0.5,
                snapshot,
            ),
        ];
    }
    let v = tripartite_qcm_instance(instance_seed)
        .relabel(&["A", "B1", "B2"])
        .expect("three parties");
    let snapshot = || InstanceSnapshot::from_qcm(&v);
    let report = monogamy_check(&v, eof).expect("valid instance");
    vec![Check::new(
        "monogamy_slack",
        -report.slack,
        report.tolerance.max(1e-3),
        snapshot,
    )]
}

fn additivity_instance_check(instance_seed: u64, eof: &EofConfig) -> Vec<Check> {
    let mut rng = GaussStream::new(instance_seed);
    let v = random_valid_qcm(&mut rng, vec![("A", 1), ("B", 1)], 0.08, 0.8, 0.45);
    let w = random_valid_qcm(&mut rng, vec![("A", 1), ("B", 1)], 0.08, 0.8, 0.45);
    let snapshot = || InstanceSnapshot::from_qcm(&v);
    let report = additivity_check(&v, &w, eof).expect("valid instances");
    vec![Check::new(
        "additivity_difference",
        report.difference,
        report.tolerance,
        snapshot,
    )]
}

/// Faithfulness + bound checks at full count.
pub fn faithfulness_suite(
    seed: u64,
    count: usize,
    threads: usize,
    eof: &EofConfig,
) -> (Vec<PropertyStats>, Vec<ReplayRecord>) {
    let per_instance = parallel_map(count, threads, |index| {
        faithfulness_check(substream_seed(seed, index as u64), eof)
    });
    aggregate(seed, per_instance)
}

/// Theorem-level conditional-mutual-information bound at full count.
pub fn cmi_bound_suite(
    seed: u64,
    count: usize,
    threads: usize,
    eof: &EofConfig,
) -> (Vec<PropertyStats>, Vec<ReplayRecord>) {
    let per_instance = parallel_map(count, threads, |index| {
        cmi_bound_check(substream_seed(seed, index as u64), eof)
    });
    aggregate(seed, per_instance)
}

/// Squashed-entanglement certificates.
pub fn certificate_suite(
    seed: u64,
    count: usize,
    threads: usize,
    eof: &EofConfig,
) -> (Vec<PropertyStats>, Vec<ReplayRecord>) {
    let per_instance = parallel_map(count, threads, |index| {
        certificate_check(substream_seed(seed, index as u64), eof)
    });
    aggregate(seed, per_instance)
}

/// Monogamy checks; instance 0 is the constructed near-tie.
pub fn monogamy_suite(
    seed: u64,
    count: usize,
    threads: usize,
    eof: &EofConfig,
) -> (Vec<PropertyStats>, Vec<ReplayRecord>) {
    let per_instance = parallel_map(count, threads, |index| {
        monogamy_instance_check(substream_seed(seed, index as u64), index, eof)
    });
    aggregate(seed, per_instance)
}

/// Additivity checks on pairs of mixed instances.
pub fn additivity_suite(
    seed: u64,
    count: usize,
    threads: usize,
    eof: &EofConfig,
) -> (Vec<PropertyStats>, Vec<ReplayRecord>) {
    let per_instance = parallel_map(count, threads, |index| {
        additivity_instance_check(substream_seed(seed, index as u64), eof)
    });
    aggregate(seed, per_instance)
}

/// Composite entanglement suite: anchors once, faithfulness and the CMI
/// bound at full count, the optimizer-heavy groups at a tenth.
pub fn run(config: &SuiteConfig) -> (Vec<PropertyStats>, Vec<ReplayRecord>) {
    let seed = config.seed;
    let heavy = (config.count / 10).max(1);

    let anchors = aggregate(seed, anchor_checks(&config.eof));
    let faith = faithfulness_suite(
        substream_seed(seed, 0xfa17),
        config.count,
        config.threads,
        &config.eof,
    );
    let bound = cmi_bound_suite(
        substream_seed(seed, 0xcb0d),
        config.count,
        config.threads,
        &config.eof,
    );
    let certs = certificate_suite(
        substream_seed(seed, 0x5c3d),
        heavy,
        config.threads,
        &config.eof,
    );
    let mono = monogamy_suite(
        substream_seed(seed, 0x303a),
        heavy,
        config.threads,
        &config.eof,
    );
    let add = additivity_suite(
        substream_seed(seed, 0xadd1),
        heavy,
        config.threads,
        &config.eof,
    );

    let mut stats = anchors.0;
    let mut failures = anchors.1;
    for (s, f) in [faith, bound, certs, mono, add] {
        stats.extend(s);
        failures.extend(f);
    }
    (stats, failures)
}
