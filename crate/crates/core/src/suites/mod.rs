//! Seeded randomized property suites.
//!
//! Each suite draws instances deterministically from a base seed (one
//! substream per instance index), evaluates a fixed list of named
//! properties, and aggregates pass/fail counts with worst residuals. A
//! property passes an instance when `residual ≤ threshold`. Failing
//! instances are captured as replay records carrying the instance seed,
//! index and matrix, so the exact offender can be reproduced.
//!
//! Instance evaluation may shard across worker threads; the aggregation
//! is indexed by instance and therefore independent of scheduling.

use crate::entangle::EofConfig;
use crate::error::Result;
use crate::matcore::PartitionedMatrix;
use crate::rng::substream_seed;
use crate::symplectic::Qcm;

pub mod classical;
pub mod entanglement;
pub mod quantum;
pub mod recovery;

/// Version tag embedded in serialized reports.
pub const SCHEMA_VERSION: u32 = 1;

/// Suite selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteKind {
    Classical,
    Quantum,
    Recovery,
    Entanglement,
    All,
}

impl SuiteKind {
    pub fn name(&self) -> &'static str {
        match self {
            SuiteKind::Classical => "classical",
            SuiteKind::Quantum => "quantum",
            SuiteKind::Recovery => "recovery",
            SuiteKind::Entanglement => "entanglement",
            SuiteKind::All => "all",
        }
    }

    pub fn parse(name: &str) -> Option<SuiteKind> {
        match name {
            "classical" => Some(SuiteKind::Classical),
            "quantum" => Some(SuiteKind::Quantum),
            "recovery" => Some(SuiteKind::Recovery),
            "entanglement" => Some(SuiteKind::Entanglement),
            "all" => Some(SuiteKind::All),
            _ => None,
        }
    }
}

/// Knobs for a suite run.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    pub count: usize,
    /// Sample count for the Monte Carlo recovery checks.
    pub mc_samples: usize,
    /// Instances receiving the Monte Carlo treatment.
    pub mc_instances: usize,
    /// Worker thread cap (1 = sequential).
    pub threads: usize,
    pub eof: EofConfig,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            count: 100,
            mc_samples: 1_000_000,
            mc_instances: 20,
            threads: 1,
            eof: EofConfig::default(),
        }
    }
}

/// A serializable instance for replay: the matrix plus its partition or
/// mode structure.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSnapshot {
    pub dim: usize,
    /// Row-major entries.
    pub data: Vec<f64>,
    pub blocks: Vec<(String, usize)>,
    pub modes: Vec<(String, usize)>,
}

impl InstanceSnapshot {
    pub fn from_partitioned(v: &PartitionedMatrix) -> Self {
        Self {
            dim: v.dim(),
            data: row_major(v.mat()),
            blocks: v
                .blocks()
                .iter()
                .map(|b| (b.label.clone(), b.size))
                .collect(),
            modes: Vec::new(),
        }
    }

    pub fn from_qcm(v: &Qcm) -> Self {
        Self {
            dim: v.dim(),
            data: row_major(v.mat()),
            blocks: Vec::new(),
            modes: v
                .parties()
                .iter()
                .map(|p| (p.label.clone(), p.modes))
                .collect(),
        }
    }
}

fn row_major(m: &nalgebra::DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// One property evaluation on one instance.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
    pub threshold: f64,
    /// Attached by evaluators when the check fails, for replay.
    pub snapshot: Option<InstanceSnapshot>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.residual <= self.threshold
    }

    /// A check that attaches the instance snapshot only on failure.
    pub fn new(
        name: &'static str,
        residual: f64,
        threshold: f64,
        snapshot: impl FnOnce() -> InstanceSnapshot,
    ) -> Self {
        let snapshot = if residual > threshold {
            Some(snapshot())
        } else {
            None
        };
        Self {
            name,
            residual,
            threshold,
            snapshot,
        }
    }
}

/// Aggregated outcome of one named property over a suite run.
#[derive(Debug, Clone)]
pub struct PropertyStats {
    pub name: String,
    pub instances: usize,
    pub failures: usize,
    pub worst_residual: f64,
    pub worst_index: usize,
    pub threshold: f64,
}

impl PropertyStats {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Replayable record of the worst failing instance of a property.
#[derive(Debug, Clone)]
pub struct ReplayRecord {
    pub property: String,
    pub instance_index: usize,
    /// Substream seed the instance was generated from.
    pub instance_seed: u64,
    pub residual: f64,
    pub snapshot: InstanceSnapshot,
}

/// Full report of a suite run.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub schema: u32,
    pub suite: String,
    pub seed: u64,
    pub count: usize,
    pub properties: Vec<PropertyStats>,
    pub failures: Vec<ReplayRecord>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(|p| p.passed())
    }

    fn merge(mut self, other: SuiteReport) -> SuiteReport {
        self.properties.extend(other.properties);
        self.failures.extend(other.failures);
        self
    }
}

/// Maps instance indices over a closure, optionally on worker threads.
/// Results are collected by index, so the output does not depend on
/// scheduling.
pub(crate) fn parallel_map<T: Send>(
    count: usize,
    threads: usize,
    f: impl Fn(usize) -> T + Sync,
) -> Vec<T> {
    if threads <= 1 || count <= 1 {
        return (0..count).map(f).collect();
    }
    let workers = threads.min(count);
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots: Vec<std::sync::Mutex<Option<T>>> =
        (0..count).map(|_| std::sync::Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if index >= count {
                    break;
                }
                let value = f(index);
                *slots[index].lock().unwrap() = Some(value);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.into_inner().unwrap().expect("worker filled the slot"))
        .collect()
}

/// Folds per-instance checks into per-property statistics and replay
/// records for the worst failures.
pub(crate) fn aggregate(
    base_seed: u64,
    per_instance: Vec<Vec<Check>>,
) -> (Vec<PropertyStats>, Vec<ReplayRecord>) {
    let mut order: Vec<&'static str> = Vec::new();
    let mut stats: std::collections::HashMap<&'static str, PropertyStats> =
        std::collections::HashMap::new();
    let mut replays: std::collections::HashMap<&'static str, ReplayRecord> =
        std::collections::HashMap::new();

    for (index, checks) in per_instance.iter().enumerate() {
        for check in checks {
            if !stats.contains_key(check.name) {
                order.push(check.name);
                stats.insert(
                    check.name,
                    PropertyStats {
                        name: check.name.to_string(),
                        instances: 0,
                        failures: 0,
                        worst_residual: f64::NEG_INFINITY,
                        worst_index: 0,
                        threshold: check.threshold,
                    },
                );
            }
            let entry = stats.get_mut(check.name).unwrap();
            entry.instances += 1;
            if check.residual > entry.worst_residual {
                entry.worst_residual = check.residual;
                entry.worst_index = index;
            }
            if !check.passed() {
                entry.failures += 1;
                let is_worse = replays
                    .get(check.name)
                    .map(|r| check.residual > r.residual)
                    .unwrap_or(true);
                if is_worse {
                    if let Some(snapshot) = &check.snapshot {
                        replays.insert(
                            check.name,
                            ReplayRecord {
                                property: check.name.to_string(),
                                instance_index: index,
                                instance_seed: substream_seed(base_seed, index as u64),
                                residual: check.residual,
                                snapshot: snapshot.clone(),
                            },
                        );
                    }
                }
            }
        }
    }

    let stats_vec = order.iter().map(|name| stats[name].clone()).collect();
    let replay_vec = order
        .iter()
        .filter_map(|name| replays.remove(name))
        .collect();
    (stats_vec, replay_vec)
}

fn report_from(
    kind: SuiteKind,
    config: &SuiteConfig,
    stats: Vec<PropertyStats>,
    failures: Vec<ReplayRecord>,
) -> SuiteReport {
    SuiteReport {
        schema: SCHEMA_VERSION,
        suite: kind.name().to_string(),
        seed: config.seed,
        count: config.count,
        properties: stats,
        failures,
    }
}

/// Runs a suite (or all of them) and aggregates the report.
pub fn run_suite(kind: SuiteKind, config: &SuiteConfig) -> Result<SuiteReport> {
    match kind {
        SuiteKind::Classical => {
            let (stats, failures) = classical::run(config);
            Ok(report_from(kind, config, stats, failures))
        }
        SuiteKind::Quantum => {
            let (stats, failures) = quantum::run(config);
            Ok(report_from(kind, config, stats, failures))
        }
        SuiteKind::Recovery => {
            let (stats, failures) = recovery::run(config);
            Ok(report_from(kind, config, stats, failures))
        }
        SuiteKind::Entanglement => {
            let (stats, failures) = entanglement::run(config);
            Ok(report_from(kind, config, stats, failures))
        }
        SuiteKind::All => {
            let mut report = run_suite(SuiteKind::Classical, config)?;
            report = report.merge(run_suite(SuiteKind::Quantum, config)?);
            report = report.merge(run_suite(SuiteKind::Recovery, config)?);
            report = report.merge(run_suite(SuiteKind::Entanglement, config)?);
            report.suite = SuiteKind::All.name().to_string();
            Ok(report)
        }
    }
}

#[cfg(test)]
mod tests;
