//! Subcommand implementations. Every command is a thin adapter: parse
//! inputs, call the library, render the result. No numerical logic lives
//! here.

use logdet_gauss::entangle::{
    additivity_check, eof_optimize, monogamy_check, squashed_entanglement, EofConfig, EofResult,
};
use logdet_gauss::loggauss::{
    check_saturation, cmi_via_inverse, cmi_via_schur, conditional_mutual_information,
    logdet_entropy, mutual_information,
};
use logdet_gauss::suites::{run_suite, InstanceSnapshot, SuiteConfig, SuiteKind, SuiteReport};
use logdet_gauss::symplectic::{gamma_sharp, gaussian_measurement, purify, williamson};
use logdet_gauss::PartitionedMatrix;

use crate::io::{parse_block_arg, row_major, BlockArg, MatrixFile};
use crate::json::Json;
use crate::CliError;

fn math(e: logdet_gauss::Error) -> CliError {
    CliError::from_core(e)
}

fn emit(json: &Json) {
    println!("{}", json.render());
}

/// Resolves `--blocks` into a partitioned matrix plus the role labels
/// (A, B and optionally C).
fn resolve_blocks(
    file: &MatrixFile,
    blocks: &str,
) -> Result<(PartitionedMatrix, Vec<String>), CliError> {
    match parse_block_arg(blocks)? {
        BlockArg::Select(labels) => {
            let v = file.partitioned(None)?;
            Ok((v, labels))
        }
        BlockArg::Define(defs) => {
            let labels = defs.iter().map(|(l, _)| l.clone()).collect();
            let v = file.partitioned(Some(&defs))?;
            Ok((v, labels))
        }
    }
}

pub fn cmd_info(path: &str, blocks: &str, json: bool, csv: bool) -> Result<(), CliError> {
    let file = MatrixFile::load(path, csv)?;
    let (v, labels) = resolve_blocks(&file, blocks)?;
    if labels.len() < 2 || labels.len() > 3 {
        return Err(CliError::Parse(format!(
            "--blocks needs two or three labels, got {}",
            labels.len()
        )));
    }
    let m = logdet_entropy(v.base()).map_err(math)?;
    let (a, b) = (labels[0].as_str(), labels[1].as_str());
    let mi = mutual_information(&v, a, b).map_err(math)?;
    let cmi_values = if labels.len() == 3 {
        let c = labels[2].as_str();
        Some((
            conditional_mutual_information(&v, a, b, c).map_err(math)?,
            cmi_via_schur(&v, a, b, c).map_err(math)?,
            cmi_via_inverse(&v, a, b, c).map_err(math)?,
        ))
    } else {
        None
    };

    if json {
        let mut fields = vec![
            ("schema", Json::Int(1)),
            ("m", Json::Num(m)),
            ("mi", Json::Num(mi)),
        ];
        match cmi_values {
            Some((cmi, schur, inverse)) => {
                fields.push(("cmi", Json::Num(cmi)));
                fields.push(("cmi_via_schur", Json::Num(schur)));
                fields.push(("cmi_via_inverse", Json::Num(inverse)));
            }
            None => {
                fields.push(("cmi", Json::Null));
                fields.push(("cmi_via_schur", Json::Null));
                fields.push(("cmi_via_inverse", Json::Null));
            }
        }
        emit(&Json::obj(fields));
    } else {
        println!("M(V)           = {m:+.12e}");
        println!("I_M({a}:{b})      = {mi:+.12e}");
        if let Some((cmi, schur, inverse)) = cmi_values {
            let c = labels[2].as_str();
            println!("I_M({a}:{b}|{c})    = {cmi:+.12e}");
            println!("  via Schur    = {schur:+.12e}  |d| = {:.3e}", (cmi - schur).abs());
            println!("  via inverse  = {inverse:+.12e}  |d| = {:.3e}", (cmi - inverse).abs());
        }
    }
    Ok(())
}

pub fn cmd_saturation(
    path: &str,
    blocks: Option<&str>,
    tol: f64,
    emit_recovered: Option<&str>,
    json: bool,
    csv: bool,
) -> Result<(), CliError> {
    let file = MatrixFile::load(path, csv)?;
    let (v, labels) = match blocks {
        Some(blocks) => resolve_blocks(&file, blocks)?,
        None => {
            let v = file.partitioned(None)?;
            let labels = v.labels().iter().map(|s| s.to_string()).collect();
            (v, labels)
        }
    };
    if labels.len() != 3 {
        return Err(CliError::Parse(format!(
            "saturation needs three blocks, got {}",
            labels.len()
        )));
    }
    let (a, b, c) = (labels[0].as_str(), labels[1].as_str(), labels[2].as_str());
    let report = check_saturation(&v, a, b, c, tol).map_err(math)?;

    if let Some(out) = emit_recovered {
        MatrixFile::from_partitioned(&report.recovered_extension).save(out)?;
    }

    const CONDITIONS: [&str; 5] = [
        "cmi_zero",
        "schur_equality",
        "inverse_block_zero",
        "coupling_factorizes",
        "recovery_fixes_state",
    ];
    if json {
        let conditions = CONDITIONS
            .iter()
            .zip(report.residuals.iter().zip(report.flags.iter()))
            .map(|(name, (residual, flag))| {
                Json::obj(vec![
                    ("name", Json::Str(name.to_string())),
                    ("residual", Json::Num(*residual)),
                    ("saturated", Json::Bool(*flag)),
                ])
            })
            .collect();
        emit(&Json::obj(vec![
            ("schema", Json::Int(1)),
            ("cmi", Json::Num(report.cmi_value)),
            ("tol", Json::Num(report.tol)),
            ("scale", Json::Num(report.scale)),
            ("conditions", Json::Arr(conditions)),
            ("saturated", Json::Bool(report.all_saturated())),
        ]));
    } else {
        println!("I_M({a}:{b}|{c}) = {:+.12e}", report.cmi_value);
        for (name, (residual, flag)) in CONDITIONS
            .iter()
            .zip(report.residuals.iter().zip(report.flags.iter()))
        {
            println!(
                "{:>22}  residual {:.3e}  {}",
                name,
                residual,
                if *flag { "PASS" } else { "FAIL" }
            );
        }
    }
    Ok(())
}

fn override_modes(modes: Option<&str>) -> Result<Option<Vec<(String, usize)>>, CliError> {
    match modes {
        None => Ok(None),
        Some(arg) => match parse_block_arg(arg)? {
            BlockArg::Define(defs) => Ok(Some(defs)),
            BlockArg::Select(_) => Err(CliError::Parse(
                "--modes needs label=count pairs".into(),
            )),
        },
    }
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_qcm(
    path: &str,
    action: &str,
    party: Option<&str>,
    seed_file: Option<&str>,
    out: Option<&str>,
    modes: Option<&str>,
    json: bool,
    csv: bool,
) -> Result<(), CliError> {
    let file = MatrixFile::load(path, csv)?;
    let mode_defs = override_modes(modes)?;
    let v = file.qcm(mode_defs.as_deref())?;

    match action {
        "validate" => {
            let (valid, validity_residual) = v.validity().map_err(math)?;
            let (pure, purity_residual) = v.purity().map_err(math)?;
            let nu = v.symplectic_eigenvalues().map_err(math)?;
            if json {
                emit(&Json::obj(vec![
                    ("schema", Json::Int(1)),
                    ("valid", Json::Bool(valid)),
                    ("pure", Json::Bool(pure)),
                    ("min_nu_minus_one", Json::Num(validity_residual)),
                    ("purity_residual", Json::Num(purity_residual)),
                    ("nu", Json::floats(nu)),
                ]));
            } else {
                println!("valid: {valid}  (min nu - 1 = {validity_residual:+.3e})");
                println!("pure:  {pure}  (max |nu - 1| = {purity_residual:.3e})");
                println!("nu:    {nu:?}");
            }
        }
        "williamson" => {
            let wd = williamson(&v).map_err(math)?;
            let reconstruction = (wd.reconstruct().mat() - v.mat()).norm();
            let payload = Json::obj(vec![
                ("schema", Json::Int(1)),
                ("nu", Json::floats(wd.nu().iter().cloned())),
                ("s", Json::floats(row_major(wd.s()))),
                ("dim", Json::Int(v.dim() as i64)),
                ("residual_reconstruction", Json::Num(reconstruction)),
                ("residual_symplectic", Json::Num(wd.symplectic_residual())),
            ]);
            match out {
                Some(path) => std::fs::write(path, payload.render())
                    .map_err(|e| CliError::Parse(format!("cannot write {path}: {e}")))?,
                None => emit(&payload),
            }
            if !json && out.is_some() {
                println!("nu: {:?}", wd.nu());
            }
        }
        "purify" => {
            let gamma = purify(&v).map_err(math)?;
            let out_file = MatrixFile::from_qcm(&gamma);
            match out {
                Some(path) => out_file.save(path)?,
                None => emit(&out_file.to_json()),
            }
        }
        "gamma-sharp" => {
            let sharp = gamma_sharp(&v).map_err(math)?;
            let out_file = MatrixFile::from_qcm(&sharp);
            match out {
                Some(path) => out_file.save(path)?,
                None => emit(&out_file.to_json()),
            }
        }
        "measure" => {
            let seed_path = seed_file.ok_or_else(|| {
                CliError::Parse("measure needs --seed-file with the seed QCM".into())
            })?;
            let seed = MatrixFile::load(seed_path, false)?.qcm(None)?;
            let measured = party
                .map(|p| p.to_string())
                .or_else(|| v.parties().last().map(|p| p.label.clone()))
                .ok_or_else(|| CliError::Parse("no party to measure".into()))?;
            let (post, outcome) = gaussian_measurement(&v, &measured, &seed).map_err(math)?;
            let payload = Json::obj(vec![
                ("schema", Json::Int(1)),
                ("measured", Json::Str(measured.clone())),
                ("post", MatrixFile::from_qcm(&post).to_json()),
                ("outcome_cov", Json::floats(row_major(outcome.mat()))),
            ]);
            match out {
                Some(path) => std::fs::write(path, payload.render())
                    .map_err(|e| CliError::Parse(format!("cannot write {path}: {e}")))?,
                None => emit(&payload),
            }
        }
        other => {
            return Err(CliError::Parse(format!(
                "unknown qcm action `{other}` (validate|williamson|purify|gamma-sharp|measure)"
            )))
        }
    }
    Ok(())
}

fn load_config(path: Option<&str>, seed: Option<u64>) -> Result<EofConfig, CliError> {
    let mut config: EofConfig = match path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Parse(format!("cannot read {path}: {e}")))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Parse(format!("cannot parse {path}: {e}")))?
        }
        None => EofConfig::default(),
    };
    if let Some(seed) = seed {
        config.seed = seed;
    }
    Ok(config)
}

fn eof_result_json(result: &EofResult) -> Json {
    Json::obj(vec![
        ("value", Json::Num(result.value)),
        ("upper_bound_mi", Json::Num(result.upper_bound_mi)),
        ("ansatz_value", Json::Num(result.ansatz_value)),
        (
            "feasibility_residual",
            Json::Num(result.feasibility_residual),
        ),
        ("iterations", Json::Int(result.iterations as i64)),
        ("starts", Json::Int(result.starts as i64)),
        ("converged", Json::Bool(result.converged)),
        ("gamma_opt", MatrixFile::from_qcm(&result.gamma_opt).to_json()),
    ])
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_entangle(
    path: &str,
    action: &str,
    other: Option<&str>,
    config_path: Option<&str>,
    seed: Option<u64>,
    modes: Option<&str>,
    json: bool,
    csv: bool,
) -> Result<(), CliError> {
    let file = MatrixFile::load(path, csv)?;
    let mode_defs = override_modes(modes)?;
    let v = file.qcm(mode_defs.as_deref())?;
    let config = load_config(config_path, seed)?;

    match action {
        "eof" => {
            let result = eof_optimize(&v, &config).map_err(math)?;
            if json {
                let mut fields = vec![("schema".to_string(), Json::Int(1))];
                if let Json::Obj(inner) = eof_result_json(&result) {
                    fields.extend(inner);
                }
                emit(&Json::Obj(fields));
            } else {
                println!("E(A:B)            = {:.12e}", result.value);
                println!("1/2 I_M upper bound = {:.12e}", result.upper_bound_mi);
                println!("ansatz value      = {:.12e}", result.ansatz_value);
                println!("converged         = {}", result.converged);
            }
        }
        "squashed" => {
            let result = squashed_entanglement(&v, &config).map_err(math)?;
            let gap = (0.5 * result.certificate.cmi_value - result.value).abs();
            if json {
                emit(&Json::obj(vec![
                    ("schema", Json::Int(1)),
                    ("value", Json::Num(result.value)),
                    ("certificate_t", Json::Num(result.certificate.t)),
                    ("certificate_cmi", Json::Num(result.certificate.cmi_value)),
                    ("certificate_gap", Json::Num(gap)),
                    (
                        "marginal_residual",
                        Json::Num(result.certificate.marginal_residual),
                    ),
                    (
                        "history",
                        Json::Arr(
                            result
                                .history
                                .iter()
                                .map(|(t, g)| Json::floats([*t, *g]))
                                .collect(),
                        ),
                    ),
                    (
                        "extension",
                        MatrixFile::from_qcm(&result.certificate.extension).to_json(),
                    ),
                ]));
            } else {
                println!("E_sq(A:B)        = {:.12e}", result.value);
                println!("certificate t    = {}", result.certificate.t);
                println!("certificate CMI  = {:.12e}", result.certificate.cmi_value);
                println!("certificate gap  = {gap:.3e}");
            }
        }
        "monogamy" => {
            let report = monogamy_check(&v, &config).map_err(math)?;
            if json {
                emit(&Json::obj(vec![
                    ("schema", Json::Int(1)),
                    ("joint", Json::Num(report.joint)),
                    (
                        "pairwise",
                        Json::Arr(
                            report
                                .pairwise
                                .iter()
                                .map(|(label, value)| {
                                    Json::obj(vec![
                                        ("label", Json::Str(label.clone())),
                                        ("value", Json::Num(*value)),
                                    ])
                                })
                                .collect(),
                        ),
                    ),
                    ("slack", Json::Num(report.slack)),
                    ("tolerance", Json::Num(report.tolerance)),
                    ("passed", Json::Bool(report.passed)),
                    ("escalated", Json::Bool(report.escalated)),
                ]));
            } else {
                println!("E(A:B*) joint  = {:.12e}", report.joint);
                for (label, value) in &report.pairwise {
                    println!("E(A:{label})       = {value:.12e}");
                }
                println!(
                    "slack          = {:+.3e}  ({})",
                    report.slack,
                    if report.passed { "PASS" } else { "FAIL" }
                );
            }
        }
        "additivity" => {
            let other_path = other.ok_or_else(|| {
                CliError::Parse("additivity needs --other with the second QCM".into())
            })?;
            let w = MatrixFile::load(other_path, false)?.qcm(None)?;
            let report = additivity_check(&v, &w, &config).map_err(math)?;
            if json {
                emit(&Json::obj(vec![
                    ("schema", Json::Int(1)),
                    ("combined", Json::Num(report.combined)),
                    ("first", Json::Num(report.first)),
                    ("second", Json::Num(report.second)),
                    ("difference", Json::Num(report.difference)),
                    ("tolerance", Json::Num(report.tolerance)),
                    ("passed", Json::Bool(report.passed)),
                    ("escalated", Json::Bool(report.escalated)),
                ]));
            } else {
                println!("E(V ⊕ W)  = {:.12e}", report.combined);
                println!("E(V)      = {:.12e}", report.first);
                println!("E(W)      = {:.12e}", report.second);
                println!(
                    "difference = {:.3e}  ({})",
                    report.difference,
                    if report.passed { "PASS" } else { "FAIL" }
                );
            }
        }
        other => {
            return Err(CliError::Parse(format!(
                "unknown entangle action `{other}` (eof|squashed|monogamy|additivity)"
            )))
        }
    }
    Ok(())
}

fn snapshot_json(snapshot: &InstanceSnapshot) -> Json {
    let mut fields = vec![("dim", Json::Int(snapshot.dim as i64))];
    if !snapshot.blocks.is_empty() {
        fields.push((
            "blocks",
            Json::Arr(
                snapshot
                    .blocks
                    .iter()
                    .map(|(label, size)| {
                        Json::obj(vec![
                            ("label", Json::Str(label.clone())),
                            ("size", Json::Int(*size as i64)),
                        ])
                    })
                    .collect(),
            ),
        ));
    }
    if !snapshot.modes.is_empty() {
        fields.push((
            "modes",
            Json::Arr(
                snapshot
                    .modes
                    .iter()
                    .map(|(label, n)| {
                        Json::obj(vec![
                            ("label", Json::Str(label.clone())),
                            ("n", Json::Int(*n as i64)),
                        ])
                    })
                    .collect(),
            ),
        ));
    }
    fields.push(("data", Json::floats(snapshot.data.iter().cloned())));
    Json::obj(fields)
}

pub fn suite_report_json(report: &SuiteReport) -> Json {
    Json::obj(vec![
        ("schema", Json::Int(report.schema as i64)),
        ("suite", Json::Str(report.suite.clone())),
        ("seed", Json::Int(report.seed as i64)),
        ("count", Json::Int(report.count as i64)),
        (
            "properties",
            Json::Arr(
                report
                    .properties
                    .iter()
                    .map(|p| {
                        Json::obj(vec![
                            ("name", Json::Str(p.name.clone())),
                            ("instances", Json::Int(p.instances as i64)),
                            ("failures", Json::Int(p.failures as i64)),
                            ("worst_residual", Json::Num(p.worst_residual)),
                            ("worst_index", Json::Int(p.worst_index as i64)),
                            ("threshold", Json::Num(p.threshold)),
                            ("passed", Json::Bool(p.passed())),
                        ])
                    })
                    .collect(),
            ),
        ),
        (
            "failures",
            Json::Arr(
                report
                    .failures
                    .iter()
                    .map(|f| {
                        Json::obj(vec![
                            ("property", Json::Str(f.property.clone())),
                            ("instance_index", Json::Int(f.instance_index as i64)),
                            ("instance_seed", Json::Int(f.instance_seed as i64)),
                            ("residual", Json::Num(f.residual)),
                            ("instance", snapshot_json(&f.snapshot)),
                        ])
                    })
                    .collect(),
            ),
        ),
        ("passed", Json::Bool(report.passed())),
    ])
}

pub fn worker_threads() -> usize {
    let detected = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(8);
    match std::env::var("LOGDET_GAUSS_THREADS") {
        Ok(value) => value.parse::<usize>().map(|n| n.clamp(1, 64)).unwrap_or(detected),
        Err(_) => detected,
    }
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_verify(
    suite: &str,
    seed: u64,
    count: usize,
    mc_samples: Option<usize>,
    mc_instances: Option<usize>,
    out: Option<&str>,
    config_path: Option<&str>,
) -> Result<(), CliError> {
    let kind = SuiteKind::parse(suite).ok_or_else(|| {
        CliError::Parse(format!(
            "unknown suite `{suite}` (classical|quantum|recovery|entanglement|all)"
        ))
    })?;
    let mut config = SuiteConfig {
        seed,
        count,
        threads: worker_threads(),
        eof: load_config(config_path, Some(seed))?,
        ..SuiteConfig::default()
    };
    if let Some(samples) = mc_samples {
        config.mc_samples = samples;
    }
    if let Some(instances) = mc_instances {
        config.mc_instances = instances;
    }

    let start = std::time::Instant::now();
    let report = run_suite(kind, &config).map_err(math)?;
    let elapsed = start.elapsed();
    // Wall time goes to stderr: the JSON report must stay byte-identical
    // across runs with the same inputs and seed.
    eprintln!(
        "suite {} ({} instances): {:.2}s, {}",
        report.suite,
        report.count,
        elapsed.as_secs_f64(),
        if report.passed() { "all passed" } else { "FAILURES" }
    );

    let rendered = suite_report_json(&report).render();
    match out {
        Some(path) => std::fs::write(path, &rendered)
            .map_err(|e| CliError::Parse(format!("cannot write {path}: {e}")))?,
        None => println!("{rendered}"),
    }
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::PropertyFailure)
    }
}
