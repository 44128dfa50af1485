use approx::assert_relative_eq;

use super::*;
use crate::rng::GaussStream;
use crate::symplectic::{
    ppt_two_mode_separable, random_pure_qcm, random_two_mode_away_from_boundary,
    random_valid_qcm, thermal, tmsv, vacuum,
};

fn quick_config() -> EofConfig {
    EofConfig {
        n_starts: 4,
        ..EofConfig::default()
    }
}

/// Independent search oracle: blind seeded sampling of feasible pure
/// states in the full chart around several centers. The optimizer must
/// not be beaten by blind search.
fn random_search_oracle(v: &Qcm, samples: usize, seed: u64) -> f64 {
    let a_dim = 2 * v.parties()[0].modes;
    let problem = optimizer::BipartiteProblem::new(v.base().clone(), v.omega(), a_dim);
    let sharp = crate::symplectic::gamma_sharp(v).unwrap();
    let center = problem.chart_of(sharp.base()).unwrap();
    let mut rng = GaussStream::new(seed);
    let mut best = f64::INFINITY;
    for _ in 0..samples {
        let spread = 0.05 + 0.6 * rng.uniform();
        let candidate = nalgebra::DVector::from_fn(center.len(), |i, _| {
            center[i] + spread * rng.normal()
        });
        let gamma = problem.gamma(&candidate);
        if v.base().sub(&gamma).unwrap().mat().clone().cholesky().is_some() {
            if let Some(value) = problem.half_mi(&gamma) {
                best = best.min(value);
            }
        }
    }
    best
}

#[test]
fn pure_states_are_exact() {
    for &r in &[0.25, 0.5, 1.0] {
        let v = tmsv(r);
        let result = eof_optimize(&v, &quick_config()).unwrap();
        let expected = (2.0 * r).cosh().ln();
        assert!(
            (result.value - expected).abs() <= 1e-6,
            "r = {r}: {} vs ln cosh 2r = {expected}",
            result.value
        );
        // The optimizer must return γ = V for pure inputs.
        assert!((result.gamma_opt.mat() - v.mat()).norm() < 1e-12);
        // M(V_A) and ½ I_M agree on pure states.
        let m_a = crate::loggauss::logdet_entropy(v.project(&["A"]).unwrap().base()).unwrap();
        assert_relative_eq!(m_a, result.value, max_relative = 1e-9, epsilon = 1e-12);
    }
}

#[test]
fn ansatz_cases() {
    // Pure input: the ansatz is the state itself.
    let v = tmsv(0.5);
    let (gamma, value) = eof_feasible_ansatz(&v).unwrap();
    assert!((gamma.mat() - v.mat()).norm() < 1e-12);
    assert_relative_eq!(value, 1.0f64.cosh().ln(), max_relative = 1e-9);

    // Thermal product: γ# factorizes and carries no correlations.
    let v = thermal("A", &[1.8]).direct_sum(&thermal("B", &[1.4])).unwrap();
    let (gamma, value) = eof_feasible_ansatz(&v).unwrap();
    assert!(value.abs() <= 1e-10);
    assert!(gamma.is_pure());
    // Off-diagonal block vanishes.
    assert!(gamma.mat().view((0, 2), (2, 2)).norm() < 1e-10);

    // Ansatz dominates the optimizer output and is feasible.
    let mut rng = GaussStream::new(211);
    for _ in 0..5 {
        let v = random_valid_qcm(&mut rng, vec![("A", 1), ("B", 1)], 0.05, 1.0, 0.45);
        let (gamma, ansatz) = eof_feasible_ansatz(&v).unwrap();
        assert!(v.base().sub(gamma.base()).unwrap().min_eigenvalue() >= -1e-9);
        let result = eof_optimize(&v, &quick_config()).unwrap();
        assert!(result.value <= ansatz + 1e-12);
        assert_relative_eq!(result.ansatz_value, ansatz, max_relative = 1e-9, epsilon = 1e-12);
    }
}

#[test]
fn product_states_have_no_entanglement() {
    let v = thermal("A", &[1.5]).direct_sum(&thermal("B", &[2.2])).unwrap();
    let result = eof_optimize(&v, &quick_config()).unwrap();
    assert!(result.value <= 1e-6, "product value {}", result.value);
    assert!(result.converged);
}

#[test]
fn mixed_tmsv_between_zero_and_pure_value() {
    // TMSV(r) + 0.1·1: strictly mixed, still entangled.
    let r = 0.5;
    let noisy = Qcm::new(
        tmsv(r).base().add(&SymMatrix::identity(4).scale(0.1)).unwrap(),
        vec![("A", 1), ("B", 1)],
    )
    .unwrap();
    let config = quick_config();
    let result = eof_optimize(&noisy, &config).unwrap();
    let pure_value = (2.0 * r).cosh().ln();
    assert!(result.value > 1e-3, "noisy TMSV should stay entangled");
    assert!(result.value < pure_value, "noise cannot increase entanglement");
    assert!(result.value <= result.ansatz_value + 1e-12);
    assert!(result.value <= result.upper_bound_mi + 1e-9);
    assert!(result.feasibility_residual >= -1e-8 * (1.0 + noisy.base().spectral_norm()));
    assert!(result.gamma_opt.is_pure());

    // Blind random search over the same chart must not beat the
    // optimizer.
    let oracle = random_search_oracle(&noisy, 3000, 97);
    assert!(
        result.value <= oracle + 1e-6,
        "optimizer {} beaten by random search {}",
        result.value,
        oracle
    );

    // Determinism for a fixed config.
    let again = eof_optimize(&noisy, &config).unwrap();
    assert_eq!(result.value, again.value);
}

#[test]
fn local_pure_modes_are_factored_out() {
    // Append an uncorrelated vacuum mode to B: the marginal gets a pure
    // mode, the entanglement must not change.
    let r = 0.4;
    let noisy = Qcm::new(
        tmsv(r).base().add(&SymMatrix::identity(4).scale(0.15)).unwrap(),
        vec![("A", 1), ("B", 1)],
    )
    .unwrap();
    let config = quick_config();
    let base = eof_optimize(&noisy, &config).unwrap();

    let padded = noisy
        .relabel(&["A", "B1"])
        .unwrap()
        .direct_sum(&vacuum(vec![("B2", 1)]))
        .unwrap()
        .merge_parties(&[("A", &["A"]), ("B", &["B1", "B2"])])
        .unwrap();
    let lifted = eof_optimize(&padded, &config).unwrap();
    assert!(
        (lifted.value - base.value).abs() <= 1e-5,
        "padded {} vs base {}",
        lifted.value,
        base.value
    );
    // The lifted optimum stays feasible and pure.
    assert!(lifted.feasibility_residual >= -1e-8 * (1.0 + padded.base().spectral_norm()));
    let (pure, residual) = lifted.gamma_opt.purity().unwrap();
    assert!(pure, "lifted gamma impure: {residual}");
}

#[test]
fn faithfulness_matches_ppt_on_random_instances() {
    let mut rng = GaussStream::new(223);
    let config = quick_config();
    let mut separable_seen = 0;
    let mut entangled_seen = 0;
    for _ in 0..20 {
        let v = random_two_mode_away_from_boundary(&mut rng, 0.05);
        let separable = ppt_two_mode_separable(&v).unwrap();
        let value = eof_optimize(&v, &config).unwrap().value;
        if separable {
            separable_seen += 1;
            assert!(value <= 1e-5, "separable instance got value {value}");
        } else {
            entangled_seen += 1;
            assert!(value > 1e-5, "entangled instance got value {value}");
        }
    }
    assert!(separable_seen > 0 && entangled_seen > 0, "generator should hit both classes");
}

#[test]
fn squashed_certificates_close_the_gap() {
    // Pure input: trivial certificate with an empty extension party.
    let v = tmsv(0.5);
    let result = squashed_entanglement(&v, &quick_config()).unwrap();
    assert_relative_eq!(result.value, 1.0f64.cosh().ln(), max_relative = 1e-9);
    assert_eq!(result.certificate.sigma_c.total_modes(), 0);
    assert!(result.history[0].1 <= 1e-9);

    // Mixed instance: the certificate gap shrinks along the schedule.
    let noisy = Qcm::new(
        tmsv(0.3).base().add(&SymMatrix::identity(4).scale(0.2)).unwrap(),
        vec![("A", 1), ("B", 1)],
    )
    .unwrap();
    let result = squashed_entanglement(&noisy, &quick_config()).unwrap();
    assert!(
        result.history.len() >= 2,
        "schedule should evaluate several t values"
    );
    let gaps: Vec<f64> = result.history.iter().map(|(_, g)| *g).collect();
    let non_increasing = gaps.windows(2).filter(|w| w[1] <= w[0] + 1e-12).count();
    assert!(
        non_increasing * 100 >= (gaps.len() - 1) * 95,
        "gap trend not monotone: {gaps:?}"
    );
    let best_gap = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(best_gap <= 1e-3, "certificate gap {best_gap}");
    // Certificate invariants.
    let cert = &result.certificate;
    assert!(cert.marginal_residual <= 1e-8 * (1.0 + noisy.base().spectral_norm()));
    assert!(0.5 * cert.cmi_value >= result.value - quick_config().certificate_tol);
    assert!(cert.sigma_c.is_valid());
    assert!(cert.sigma_purity_residual <= 1e-6);
    assert!(cert.extension.is_valid());
}

#[test]
fn squashed_extension_post_state_converges() {
    let noisy = Qcm::new(
        tmsv(0.3).base().add(&SymMatrix::identity(4).scale(0.2)).unwrap(),
        vec![("A", 1), ("B", 1)],
    )
    .unwrap();
    let eof = eof_optimize(&noisy, &quick_config()).unwrap();
    let mut last = f64::INFINITY;
    for &t in &[0.5, 0.2, 0.05] {
        let cert = squashed_extension(&noisy, &eof.gamma_opt, t).unwrap();
        assert!(
            cert.post_vs_target <= last + 1e-12,
            "post-measurement residual must shrink with t"
        );
        last = cert.post_vs_target;
    }
    assert!(last < 0.1, "post state should approach the target");
}

#[test]
fn monogamy_cases() {
    let config = quick_config();

    // Full product: all terms vanish.
    let v = thermal("A", &[1.5])
        .direct_sum(&thermal("B1", &[1.3]))
        .unwrap()
        .direct_sum(&thermal("B2", &[1.8]))
        .unwrap();
    let report = monogamy_check(&v, &config).unwrap();
    assert!(report.joint.abs() <= 1e-6);
    assert!(report.slack.abs() <= 1e-6);
    assert!(report.passed);
    // Slack ~ 0 is a near-tie: the escalation path must have fired.
    assert!(report.escalated);

    // B2 decoupled: joint reduces to E(A:B1).
    let noisy = Qcm::new(
        tmsv(0.4).base().add(&SymMatrix::identity(4).scale(0.1)).unwrap(),
        vec![("A", 1), ("B1", 1)],
    )
    .unwrap();
    let v = noisy.direct_sum(&thermal("B2", &[1.6])).unwrap();
    let report = monogamy_check(&v, &config).unwrap();
    let pair = eof_optimize(&noisy.relabel(&["A", "B"]).unwrap(), &config).unwrap();
    assert!(
        (report.joint - pair.value).abs() <= 5e-4,
        "joint {} vs pair {}",
        report.joint,
        pair.value
    );
    assert!(report.passed, "slack {}", report.slack);

    // Random tripartite instances.
    let mut rng = GaussStream::new(227);
    for _ in 0..3 {
        let v = random_valid_qcm(
            &mut rng,
            vec![("A", 1), ("B1", 1), ("B2", 1)],
            0.05,
            1.0,
            0.4,
        );
        let report = monogamy_check(&v, &config).unwrap();
        assert!(
            report.slack >= -report.tolerance,
            "monogamy slack {} below tolerance {}",
            report.slack,
            report.tolerance
        );
    }
}

#[test]
fn additivity_cases() {
    let config = quick_config();

    // Two pure states: additivity is exact through the analytic path.
    let v = tmsv(0.3);
    let w = tmsv(0.6);
    let report = additivity_check(&v, &w, &config).unwrap();
    assert!(
        report.difference <= 1e-6,
        "pure additivity difference {}",
        report.difference
    );
    assert!(report.passed);

    // Second factor a product: reduces to E(V).
    let product = thermal("A", &[1.4]).direct_sum(&thermal("B", &[1.2])).unwrap();
    let noisy = Qcm::new(
        tmsv(0.4).base().add(&SymMatrix::identity(4).scale(0.1)).unwrap(),
        vec![("A", 1), ("B", 1)],
    )
    .unwrap();
    let report = additivity_check(&noisy, &product, &config).unwrap();
    assert!(report.second.abs() <= 1e-6);
    assert!(report.passed, "difference {}", report.difference);

    // Two mixed instances.
    let mut rng = GaussStream::new(229);
    let v = random_valid_qcm(&mut rng, vec![("A", 1), ("B", 1)], 0.08, 0.8, 0.45);
    let w = random_valid_qcm(&mut rng, vec![("A", 1), ("B", 1)], 0.08, 0.8, 0.45);
    let report = additivity_check(&v, &w, &config).unwrap();
    assert!(
        report.passed,
        "additivity difference {} over tolerance {}",
        report.difference,
        report.tolerance
    );
}

#[test]
fn cmi_bound_cases() {
    let config = quick_config();

    // Decoupled C: the bound reduces to ½ I_M(A:B) ≥ E.
    let noisy = Qcm::new(
        tmsv(0.4).base().add(&SymMatrix::identity(4).scale(0.1)).unwrap(),
        vec![("A", 1), ("B", 1)],
    )
    .unwrap();
    let v = noisy.direct_sum(&thermal("C", &[1.5])).unwrap();
    let report = cmi_entanglement_bound(&v, &config).unwrap();
    let mi = crate::loggauss::mutual_information(&noisy.as_partitioned(), "A", "B").unwrap();
    assert_relative_eq!(report.half_cmi, 0.5 * mi, max_relative = 1e-9, epsilon = 1e-12);
    assert!(report.passed, "slack {}", report.slack);

    // Random tripartite instances.
    let mut rng = GaussStream::new(233);
    for _ in 0..4 {
        let v = random_valid_qcm(
            &mut rng,
            vec![("A", 1), ("B", 1), ("C", 1)],
            0.05,
            1.0,
            0.4,
        );
        let report = cmi_entanglement_bound(&v, &config).unwrap();
        assert!(report.passed, "slack {}", report.slack);
    }
}

#[test]
fn pure_factor_contributes_its_exact_entanglement() {
    // A cross-cut pure factor (the whole state pure) goes through the
    // analytic path even when marginals are strictly mixed.
    let v = random_pure_qcm(&mut GaussStream::new(239), vec![("A", 1), ("B", 1)], 0.5);
    let result = eof_optimize(&v, &quick_config()).unwrap();
    let m_a = crate::loggauss::logdet_entropy(v.project(&["A"]).unwrap().base()).unwrap();
    assert!((result.value - m_a.max(0.0)).abs() <= 1e-7);
    assert_eq!(result.iterations, 0);
}
