//! Log-determinant information quantities on positive definite block
//! matrices and Gaussian quantum covariance matrices.
//!
//! For a covariance matrix `V > 0` the log-det entropy is
//! `M(V) = ½ ln det V`; balanced combinations of it over principal
//! submatrices give the log-det mutual information `I_M(A:B)` and its
//! conditional version `I_M(A:B|C)`, which is nonnegative (strong
//! subadditivity of log-det entropy). This crate implements, at desk
//! scale:
//!
//! * block-matrix primitives — Schur complements, block inverses, matrix
//!   means and trace-metric geodesics ([`matcore`]);
//! * the information quantities, classical Gaussian channels, the Gaussian
//!   transpose (Petz recovery) channel, saturation diagnostics for the
//!   strong subadditivity inequality, and faithful lower bounds on the
//!   conditional mutual information ([`loggauss`]);
//! * quantum covariance matrices: Williamson normal form, purity and
//!   validity checks, purification, Gaussian measurements, and the
//!   canonical dominated pure state `γ# = K#(ΩK⁻¹Ωᵀ)` ([`symplectic`]);
//! * the Gaussian Rényi-2 entanglement of formation via barrier
//!   optimization over pure covariance matrices, squashed-entanglement
//!   certificates, monogamy and additivity checks ([`entangle`]);
//! * Monte Carlo validation of the closed-form entropy and recovery
//!   identities ([`mcverify`]);
//! * seeded randomized property suites used by the CLI ([`suites`]).
//!
//! All entropic quantities are in nats. All public operations are pure
//! functions of their inputs and safe to share across threads.

pub mod entangle;
pub mod error;
pub mod loggauss;
pub mod matcore;
pub mod mcverify;
pub mod rng;
pub mod suites;
pub mod symplectic;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use matcore::{PartitionedMatrix, SymMatrix};
pub use symplectic::Qcm;
