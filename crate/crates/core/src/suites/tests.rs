use super::*;

#[test]
fn classical_suite_passes_and_is_deterministic() {
    let config = SuiteConfig {
        seed: 7,
        count: 40,
        ..SuiteConfig::default()
    };
    let report = run_suite(SuiteKind::Classical, &config).unwrap();
    assert!(report.passed(), "failures: {:?}", report.failures);
    assert!(report.properties.len() >= 10);
    for p in &report.properties {
        assert_eq!(p.instances, 40, "{} ran {} instances", p.name, p.instances);
    }

    let again = run_suite(SuiteKind::Classical, &config).unwrap();
    for (a, b) in report.properties.iter().zip(again.properties.iter()) {
        assert_eq!(a.name, b.name);
        assert_eq!(a.worst_residual, b.worst_residual);
        assert_eq!(a.worst_index, b.worst_index);
    }
}

#[test]
fn classical_suite_is_schedule_independent() {
    let sequential = SuiteConfig {
        seed: 11,
        count: 24,
        threads: 1,
        ..SuiteConfig::default()
    };
    let threaded = SuiteConfig {
        threads: 4,
        ..sequential.clone()
    };
    let a = run_suite(SuiteKind::Classical, &sequential).unwrap();
    let b = run_suite(SuiteKind::Classical, &threaded).unwrap();
    for (x, y) in a.properties.iter().zip(b.properties.iter()) {
        assert_eq!(x.name, y.name);
        assert_eq!(x.worst_residual, y.worst_residual);
        assert_eq!(x.failures, y.failures);
    }
}

#[test]
fn quantum_suite_passes() {
    let config = SuiteConfig {
        seed: 3,
        count: 25,
        ..SuiteConfig::default()
    };
    let report = run_suite(SuiteKind::Quantum, &config).unwrap();
    assert!(report.passed(), "failures: {:?}", report.failures);
    assert!(report
        .properties
        .iter()
        .any(|p| p.name == "steering_counterexample_violates"));
}

#[test]
fn recovery_suite_passes_with_small_mc() {
    let config = SuiteConfig {
        seed: 5,
        count: 10,
        mc_samples: 60_000,
        mc_instances: 3,
        ..SuiteConfig::default()
    };
    let report = run_suite(SuiteKind::Recovery, &config).unwrap();
    assert!(report.passed(), "failures: {:?}", report.failures);
    let mc = report
        .properties
        .iter()
        .find(|p| p.name == "recovery_monte_carlo")
        .expect("monte carlo property present");
    assert_eq!(mc.instances, 3);
}

#[test]
fn entanglement_suite_passes_at_small_count() {
    let mut config = SuiteConfig {
        seed: 13,
        count: 6,
        ..SuiteConfig::default()
    };
    config.eof.n_starts = 3;
    let report = run_suite(SuiteKind::Entanglement, &config).unwrap();
    assert!(report.passed(), "failures: {:?}", report.failures);
    assert!(report
        .properties
        .iter()
        .any(|p| p.name == "monogamy_escalation_exercised"));
}

#[test]
fn forced_failure_produces_replayable_record() {
    // An impossible threshold forces failures; the replay record must
    // reproduce the failing instance exactly from its recorded seed.
    let seed = 21;
    let per_instance: Vec<Vec<Check>> = (0..5)
        .map(|index| {
            let instance_seed = crate::rng::substream_seed(seed, index as u64);
            let v = classical::tripartite_instance(instance_seed, 3);
            vec![Check::new("impossible", 1.0, -1.0, || {
                InstanceSnapshot::from_partitioned(&v)
            })]
        })
        .collect();
    let (stats, replays) = aggregate(seed, per_instance);
    assert_eq!(stats[0].failures, 5);
    assert_eq!(replays.len(), 1);
    let record = &replays[0];
    let regenerated = classical::tripartite_instance(record.instance_seed, 3);
    assert_eq!(
        record.snapshot,
        InstanceSnapshot::from_partitioned(&regenerated),
        "replay record must match the regenerated instance"
    );
}
