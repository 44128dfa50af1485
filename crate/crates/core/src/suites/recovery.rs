//! Recovery suite: the closed-form identity `I_M(A:B|C) = D(V‖Ṽ)` at
//! scale, plus Monte Carlo confirmation of the sampled relative entropy
//! on a subset of instances.

use crate::loggauss::{conditional_mutual_information, gaussian_relative_entropy, recovered_extension};
use crate::mcverify::verify_recovery_identity;
use crate::rng::{substream_seed, GaussStream};
use crate::matcore::PartitionedMatrix;

use super::{aggregate, parallel_map, Check, InstanceSnapshot, PropertyStats, ReplayRecord, SuiteConfig};

/// Deterministic random scalar-block (1+1+1) instance; small enough that
/// a million-sample Monte Carlo run stays fast.
pub fn recovery_instance(instance_seed: u64) -> PartitionedMatrix {
    let mut rng = GaussStream::new(instance_seed);
    let v = rng.positive_definite(3, 0.35);
    PartitionedMatrix::new(v, vec![("A", 1), ("B", 1), ("C", 1)]).expect("sizes consistent")
}

fn evaluate(instance_seed: u64, mc_samples: Option<usize>) -> Vec<Check> {
    let mut checks = Vec::new();
    let v = recovery_instance(instance_seed);
    let snapshot = || InstanceSnapshot::from_partitioned(&v);

    let cmi = conditional_mutual_information(&v, "A", "B", "C").expect("PD instance");
    let tilde = recovered_extension(&v, "A", "B", "C").expect("PD instance");
    let relative = gaussian_relative_entropy(v.base(), tilde.base()).expect("PD pair");
    checks.push(Check::new(
        "recovery_closed_form",
        (cmi - relative).abs(),
        1e-9,
        snapshot,
    ));

    if let Some(samples) = mc_samples {
        let report = verify_recovery_identity(
            &v,
            "A",
            "B",
            "C",
            samples,
            substream_seed(instance_seed, 0x3c),
        )
        .expect("PD instance");
        // Distance from the closed form in standard-error units; three
        // sigma is the acceptance band.
        let sigma_distance = (report.estimate.value - report.cmi).abs()
            / (report.estimate.stderr + 1e-13);
        checks.push(Check::new(
            "recovery_monte_carlo",
            sigma_distance,
            3.0,
            snapshot,
        ));
    }
    checks
}

/// Recovery suite: closed form on every instance, Monte Carlo on the
/// first `mc_instances`.
pub fn run(config: &SuiteConfig) -> (Vec<PropertyStats>, Vec<ReplayRecord>) {
    let seed = config.seed;
    let mc_instances = config.mc_instances.min(config.count);
    let mc_samples = config.mc_samples;
    let per_instance = parallel_map(config.count, config.threads, |index| {
        let mc = if index < mc_instances {
            Some(mc_samples)
        } else {
            None
        };
        evaluate(substream_seed(seed, index as u64), mc)
    });
    aggregate(seed, per_instance)
}
