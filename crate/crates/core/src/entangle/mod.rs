//! Gaussian Rényi-2 entanglement of formation and squashed entanglement.
//!
//! For a bipartite QCM `V_AB` the entanglement of formation is
//!
//! ```text
//! E(A:B) = inf { M(γ_A) : γ pure QCM, γ ≤ V }
//!        = inf { ½ I_M(A:B)_γ : γ pure QCM, γ ≤ V },
//! ```
//!
//! a nonconvex problem solved here by multi-start quasi-Newton descent
//! under a logarithmic barrier for `γ ≤ V` (see `optimizer`). The
//! canonical seed and rigorous upper bound is `γ# = V#(ΩV⁻¹Ωᵀ)`, which
//! every strictly valid `V` dominates.
//!
//! Before optimizing, pure modes of the *marginals* are factored out:
//! a pure local mode decouples from everything, contributes nothing
//! across the cut, and would pin the barrier to the boundary. A globally
//! pure input needs no optimization at all (`E = M(V_A)` exactly). What
//! remains is strictly above `iΩ`, where the barrier has an interior.
//!
//! The squashed-entanglement side ([`squashed_extension`],
//! [`squashed_entanglement`]) builds explicit tripartite extensions
//! whose conditional mutual information converges to twice the
//! entanglement of formation, witnessing the equality of the two
//! measures; monogamy and additivity checks live in `checks`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loggauss::mutual_information;
use crate::matcore::SymMatrix;
use crate::symplectic::{gamma_sharp, williamson, Qcm, PURITY_BAND};

mod checks;
mod optimizer;
mod squashed;

pub use checks::{
    additivity_check, cmi_entanglement_bound, monogamy_check, AdditivityReport, CmiBoundReport,
    MonogamyReport,
};
pub use squashed::{
    squashed_entanglement, squashed_extension, SquashedCertificate, SquashedResult,
};

use optimizer::BipartiteProblem;

/// Tuning for the entanglement optimizer and certificates. All randomness
/// flows from `seed`; a run is deterministic for a fixed config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EofConfig {
    /// Starts: the γ# ansatz plus `n_starts − 1` perturbations of it.
    pub n_starts: usize,
    pub seed: u64,
    /// Barrier continuation: `barrier_stages` stages from `barrier_mu0`,
    /// each multiplying μ by `barrier_factor`.
    pub barrier_stages: usize,
    pub barrier_mu0: f64,
    pub barrier_factor: f64,
    /// BFGS iteration cap per barrier stage.
    pub max_iterations: usize,
    pub gradient_tol: f64,
    /// Scale of the random start perturbations in chart coordinates.
    pub start_spread: f64,
    /// Strictness margin on `min ν − 1` below which the interior method
    /// is not attempted.
    pub strict_margin: f64,
    /// Accuracy attributed to optimizer outputs by the theorem checks.
    pub optimizer_tol: f64,
    /// Target gap for squashed-entanglement certificates.
    pub certificate_tol: f64,
    /// Geodesic parameters tried for the certificate, largest first.
    pub t_schedule: Vec<f64>,
    /// Tolerance for the additivity and monogamy comparisons.
    pub additivity_tol: f64,
    /// Slack below which monogamy/additivity re-run at higher effort
    /// before reporting.
    pub escalation_threshold: f64,
}

impl Default for EofConfig {
    fn default() -> Self {
        Self {
            n_starts: 8,
            seed: 1,
            barrier_stages: 6,
            barrier_mu0: 1e-3,
            barrier_factor: 0.2,
            max_iterations: 80,
            gradient_tol: 1e-7,
            start_spread: 0.25,
            strict_margin: 1e-7,
            optimizer_tol: 1e-5,
            certificate_tol: 1e-4,
            t_schedule: vec![0.5, 0.2, 0.1, 0.05, 0.02],
            additivity_tol: 1e-3,
            escalation_threshold: 1e-4,
        }
    }
}

impl EofConfig {
    /// Higher-effort variant used by the escalation paths.
    pub fn escalated(&self) -> Self {
        let mut boosted = self.clone();
        boosted.n_starts = self.n_starts * 2;
        boosted.barrier_stages = self.barrier_stages + 2;
        boosted.max_iterations = self.max_iterations * 2;
        boosted
    }
}

/// Entanglement-of-formation optimizer output.
#[derive(Debug, Clone)]
pub struct EofResult {
    /// `inf M(γ_A)` over the explored feasible set (nats); an upper bound
    /// on the true value.
    pub value: f64,
    /// The optimal pure QCM found.
    pub gamma_opt: Qcm,
    /// `min eig(V − γ)`; small negatives of roundoff size can occur.
    pub feasibility_residual: f64,
    /// `½ I_M(A:B)_V`, the mutual-information upper bound.
    pub upper_bound_mi: f64,
    /// Value of the γ# seed; the optimizer never exceeds it.
    pub ansatz_value: f64,
    pub iterations: usize,
    pub starts: usize,
    pub converged: bool,
}

impl EofResult {
    fn validated(self) -> Result<Self> {
        if !(self.value >= 0.0 && self.value <= self.upper_bound_mi + 1e-6) {
            return Err(Error::Optimizer(format!(
                "entanglement value {} outside [0, {} + 1e-6]",
                self.value, self.upper_bound_mi
            )));
        }
        Ok(self)
    }
}

fn bipartite_labels(v: &Qcm) -> Result<(String, String)> {
    if v.parties().len() != 2 {
        return Err(Error::Shape(format!(
            "entanglement needs a bipartite system, got {} parties",
            v.parties().len()
        )));
    }
    Ok((v.parties()[0].label.clone(), v.parties()[1].label.clone()))
}

fn half_mutual_information(v: &Qcm) -> Result<f64> {
    let (a, b) = bipartite_labels(v)?;
    Ok(0.5 * mutual_information(&v.as_partitioned(), &a, &b)?)
}

fn party_spec(v: &Qcm) -> Vec<(String, usize)> {
    v.parties()
        .iter()
        .map(|p| (p.label.clone(), p.modes))
        .collect()
}

/// Exact result for a globally pure input: the infimum is attained at
/// `γ = V` itself, with value `M(V_A) = ½ I_M(A:B)_V`.
fn pure_exact(v: &Qcm) -> Result<EofResult> {
    let value = half_mutual_information(v)?.max(0.0);
    EofResult {
        value,
        gamma_opt: v.clone(),
        feasibility_residual: 0.0,
        upper_bound_mi: value,
        ansatz_value: value,
        iterations: 0,
        starts: 0,
        converged: true,
    }
    .validated()
}

/// Feasible ansatz `γ# = V#(ΩV⁻¹Ωᵀ)` and its value `½ I_M(A:B)_{γ#}`.
/// Serves as the optimizer seed and as a rigorous upper bound.
///
/// Requires `V` strictly above `iΩ` after pure marginal modes are
/// factored out; for a pure input the ansatz is `V` itself.
pub fn eof_feasible_ansatz(v: &Qcm) -> Result<(Qcm, f64)> {
    bipartite_labels(v)?;
    v.require_valid()?;
    if v.is_pure() {
        let value = half_mutual_information(v)?.max(0.0);
        return Ok((v.clone(), value));
    }
    let margin = EofConfig::default().strict_margin;
    if let Some(reduction) = LocalReduction::compute(v)? {
        let gamma_core = if reduction.core.is_pure() {
            reduction.core.base().clone()
        } else {
            reduction.core.require_strictly_valid(margin)?;
            gamma_sharp(&reduction.core)?.base().clone()
        };
        let gamma = reduction.lift(&gamma_core)?;
        let value = half_mutual_information(&gamma)?.max(0.0);
        return Ok((gamma, value));
    }
    v.require_strictly_valid(margin)?;
    let sharp = gamma_sharp(v)?;
    let value = half_mutual_information(&sharp)?.max(0.0);
    Ok((sharp, value))
}

/// Minimizes `½ I_M(A:B)_γ` over pure `γ ≤ V`.
///
/// Deterministic for a fixed config; the result is always feasible and
/// never exceeds the γ# ansatz value. Inputs exactly on the uncertainty
/// boundary (no barrier interior) return the ansatz with
/// `converged = false` rather than an error.
pub fn eof_optimize(v: &Qcm, config: &EofConfig) -> Result<EofResult> {
    eof_optimize_seeded(v, config, &[])
}

/// As [`eof_optimize`] with extra warm-start candidates for γ.
pub(crate) fn eof_optimize_seeded(
    v: &Qcm,
    config: &EofConfig,
    extra_gamma_seeds: &[SymMatrix],
) -> Result<EofResult> {
    bipartite_labels(v)?;
    v.require_valid()?;
    if v.is_pure() {
        return pure_exact(v);
    }
    if let Some(reduction) = LocalReduction::compute(v)? {
        let core_result = optimize_core(&reduction.core, config, &[])?;
        let gamma_full = reduction.lift(core_result.gamma_opt.base())?;
        let value = half_mutual_information(&gamma_full)?.max(0.0);
        let feasibility = v.base().sub(gamma_full.base())?.min_eigenvalue();
        return EofResult {
            value,
            upper_bound_mi: half_mutual_information(v)?,
            gamma_opt: gamma_full,
            feasibility_residual: feasibility,
            ansatz_value: core_result.ansatz_value,
            iterations: core_result.iterations,
            starts: core_result.starts,
            converged: core_result.converged,
        }
        .validated();
    }
    optimize_core(v, config, extra_gamma_seeds)
}

/// Optimization on a system whose marginals are strictly mixed.
fn optimize_core(
    v: &Qcm,
    config: &EofConfig,
    extra_gamma_seeds: &[SymMatrix],
) -> Result<EofResult> {
    if v.is_pure() {
        return pure_exact(v);
    }
    let upper_bound_mi = half_mutual_information(v)?;
    let sharp = gamma_sharp(v)?;
    let ansatz_value = half_mutual_information(&sharp)?.max(0.0);

    let strict = v.require_strictly_valid(config.strict_margin).is_ok();
    if !strict || ansatz_value <= 1e-12 {
        // On the boundary the barrier has no interior; and a zero ansatz
        // cannot be improved. Either way the ansatz is the answer.
        let feasibility = v.base().sub(sharp.base())?.min_eigenvalue();
        return EofResult {
            value: ansatz_value,
            gamma_opt: sharp,
            feasibility_residual: feasibility,
            upper_bound_mi,
            ansatz_value,
            iterations: 0,
            starts: 0,
            converged: strict,
        }
        .validated();
    }

    let a_dim = 2 * v.parties()[0].modes;
    let problem = BipartiteProblem::new(v.base().clone(), v.omega(), a_dim);
    let mut seeds = vec![problem.chart_of(sharp.base())?];
    for gamma in extra_gamma_seeds {
        if let Ok(chart) = problem.chart_of(gamma) {
            seeds.push(chart);
        }
    }
    let outcome = problem.optimize(&seeds, config)?;

    // Seed dominance: never report worse than the ansatz.
    let (value, gamma_opt) = if outcome.value <= ansatz_value {
        (
            outcome.value.max(0.0),
            Qcm::new(outcome.gamma, party_spec(v))?,
        )
    } else {
        (ansatz_value, sharp)
    };
    let feasibility = v.base().sub(gamma_opt.base())?.min_eigenvalue();
    EofResult {
        value,
        gamma_opt,
        feasibility_residual: feasibility,
        upper_bound_mi,
        ansatz_value,
        iterations: outcome.iterations,
        starts: config.n_starts,
        converged: outcome.converged,
    }
    .validated()
}

/// Factoring of pure *marginal* modes: a pure local mode decouples from
/// the rest of the state, so the entanglement problem restricts to the
/// strictly mixed marginal core.
struct LocalReduction {
    core: Qcm,
    /// `S_A ⊕ S_B` with each factor the local Williamson congruence.
    s_local: DMatrix<f64>,
    core_idx: Vec<usize>,
    pure_idx: Vec<usize>,
    /// Diagonal of the rotated input on the pure coordinates.
    pure_diag: Vec<f64>,
    /// Full per-party mode counts of the input system.
    full_modes: (usize, usize),
    labels: (String, String),
}

impl LocalReduction {
    /// `None` when both marginals are already strictly mixed.
    fn compute(v: &Qcm) -> Result<Option<LocalReduction>> {
        let (a, b) = bipartite_labels(v)?;
        let n_a = v.parties()[0].modes;
        let n_b = v.parties()[1].modes;
        let wd_a = williamson(&v.project(&[&a])?)?;
        let wd_b = williamson(&v.project(&[&b])?)?;
        let mixed = |nu: &[f64]| nu.iter().filter(|&&x| x > 1.0 + PURITY_BAND).count();
        let k_a = mixed(wd_a.nu());
        let k_b = mixed(wd_b.nu());
        if k_a == n_a && k_b == n_b {
            return Ok(None);
        }

        let dim = v.dim();
        let mut s_local = DMatrix::zeros(dim, dim);
        s_local
            .view_mut((0, 0), (2 * n_a, 2 * n_a))
            .copy_from(wd_a.s());
        s_local
            .view_mut((2 * n_a, 2 * n_a), (2 * n_b, 2 * n_b))
            .copy_from(wd_b.s());
        // Symplectic inverse S⁻¹ = Ω Sᵀ Ωᵀ.
        let omega = v.omega();
        let s_inv = &omega * s_local.transpose() * omega.transpose();
        let rotated = v.base().congruence(&s_inv);

        // Local Williamson order is ν descending, so mixed modes lead.
        let mut core_idx = Vec::new();
        let mut pure_idx = Vec::new();
        let layout = [(0usize, n_a, k_a), (2 * n_a, n_b, k_b)];
        for &(offset, n, k) in &layout {
            core_idx.extend((0..k).map(|j| offset + j));
            core_idx.extend((0..k).map(|j| offset + n + j));
        }
        for &(offset, n, k) in &layout {
            pure_idx.extend((k..n).map(|j| offset + j));
            pure_idx.extend((k..n).map(|j| offset + n + j));
        }

        let core_mat = DMatrix::from_fn(core_idx.len(), core_idx.len(), |i, j| {
            rotated.mat()[(core_idx[i], core_idx[j])]
        });
        let core = Qcm::new(
            SymMatrix::symmetrized(core_mat),
            vec![(a.clone(), k_a), (b.clone(), k_b)],
        )?;
        let pure_diag: Vec<f64> = pure_idx.iter().map(|&i| rotated.mat()[(i, i)]).collect();
        Ok(Some(LocalReduction {
            core,
            s_local,
            core_idx,
            pure_idx,
            pure_diag,
            full_modes: (n_a, n_b),
            labels: (a, b),
        }))
    }

    /// Embeds a core γ back into the full system: pure local modes ride
    /// along unchanged, `γ_full = S_loc (γ_core ⊕ pure diag) S_locᵀ`.
    fn lift(&self, gamma_core: &SymMatrix) -> Result<Qcm> {
        let dim = self.core_idx.len() + self.pure_idx.len();
        let mut embedded = DMatrix::zeros(dim, dim);
        for (i, &gi) in self.core_idx.iter().enumerate() {
            for (j, &gj) in self.core_idx.iter().enumerate() {
                embedded[(gi, gj)] = gamma_core.mat()[(i, j)];
            }
        }
        for (k, &g) in self.pure_idx.iter().enumerate() {
            embedded[(g, g)] = self.pure_diag[k];
        }
        let full = SymMatrix::symmetrized(embedded).congruence(&self.s_local);
        Qcm::new(
            full,
            vec![
                (self.labels.0.clone(), self.full_modes.0),
                (self.labels.1.clone(), self.full_modes.1),
            ],
        )
    }
}

#[cfg(test)]
mod tests;
