//! Positive definite and block matrix primitives.
//!
//! Everything downstream is built from a small set of operations on dense
//! real symmetric matrices: Schur complements `V/A = B - Xᵀ A⁻¹ X`, block
//! inversion, log-determinants via triangular factorization, and the matrix
//! means (geometric, weighted geometric, harmonic) of the trace-metric
//! geometry on the positive definite cone.
//!
//! Two carrier types live here:
//!
//! * [`SymMatrix`] — a dense real symmetric matrix, validated and
//!   symmetrized on construction.
//! * [`PartitionedMatrix`] — a [`SymMatrix`] together with an ordered,
//!   labeled partition into blocks, e.g. the three-block covariance
//!   `V_ABC` with off-diagonal couplings `X` (A–B), `Y` (A–C), `Z` (B–C).
//!
//! Positive definiteness is decided with a relative tolerance: a matrix is
//! accepted when its minimum eigenvalue exceeds `-1e-10 · (1 + ‖V‖)`, and
//! factorizations retry once after lifting the diagonal to a `1e-12` jitter
//! floor. Schur complement chains amplify roundoff, so exact Cholesky
//! failure alone is not treated as a hard error.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

mod means;

pub use means::{geometric_mean, harmonic_mean, weighted_geometric_mean};

/// Relative positive-definiteness acceptance: min eigenvalue above
/// `-PD_ACCEPT_REL · (1 + ‖V‖)` still counts as positive definite.
pub const PD_ACCEPT_REL: f64 = 1e-10;

/// Diagonal jitter floor applied when a factorization of an accepted
/// matrix fails due to roundoff.
pub const PD_JITTER: f64 = 1e-12;

/// Relative symmetry tolerance enforced by [`SymMatrix::new`].
pub const SYMMETRY_REL: f64 = 1e-12;

/// Dense real symmetric matrix.
///
/// Construction checks symmetry to a relative `1e-12` tolerance and then
/// stores the exactly symmetrized part `(M + Mᵀ)/2`, so all downstream
/// arithmetic sees a bit-exact symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    mat: DMatrix<f64>,
}

impl SymMatrix {
    /// Validates squareness and symmetry, then symmetrizes.
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        Self::with_symmetry_tol(mat, SYMMETRY_REL)
    }

    /// As [`SymMatrix::new`] with a caller-chosen relative symmetry tolerance.
    pub fn with_symmetry_tol(mat: DMatrix<f64>, rel_tol: f64) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        let mut max_abs: f64 = 0.0;
        let mut max_asym: f64 = 0.0;
        for i in 0..mat.nrows() {
            for j in 0..mat.ncols() {
                max_abs = max_abs.max(mat[(i, j)].abs());
                if j > i {
                    max_asym = max_asym.max((mat[(i, j)] - mat[(j, i)]).abs());
                }
            }
        }
        if max_asym > rel_tol * (1.0 + max_abs) {
            return Err(Error::NotSymmetric { asymmetry: max_asym });
        }
        Ok(Self::symmetrized(mat))
    }

    /// Wraps a matrix that is symmetric by construction, symmetrizing the
    /// roundoff part without any check.
    pub fn symmetrized(mat: DMatrix<f64>) -> Self {
        let sym = (&mat + mat.transpose()) * 0.5;
        Self { mat: sym }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: DMatrix::zeros(dim, dim),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self {
            mat: DMatrix::from_diagonal(&DVector::from_row_slice(diag)),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.mat
    }

    /// Largest eigenvalue magnitude (spectral norm of a symmetric matrix).
    pub fn spectral_norm(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        self.eigenvalues().iter().fold(0.0f64, |m, &l| m.max(l.abs()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        if self.dim() == 0 {
            return f64::INFINITY;
        }
        self.eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Eigenvalues of the symmetric matrix, unordered.
    pub fn eigenvalues(&self) -> DVector<f64> {
        self.mat.clone().symmetric_eigen().eigenvalues
    }

    /// Positive definiteness up to the relative acceptance band.
    pub fn is_positive_definite(&self) -> bool {
        if self.dim() == 0 {
            return true;
        }
        self.min_eigenvalue() > -PD_ACCEPT_REL * (1.0 + self.spectral_norm())
    }

    /// Cholesky factorization treating near-semidefinite inputs inside the
    /// acceptance band as definite (one retry on a jittered diagonal).
    /// Failure is the positive-definiteness error signal.
    pub fn cholesky_pd(&self) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
        if let Some(chol) = self.mat.clone().cholesky() {
            // Exactly-zero pivots slip through the factorization; route
            // them through the jitter path instead of returning ±inf.
            let l = chol.l_dirty();
            if (0..self.dim()).all(|i| l[(i, i)] > f64::MIN_POSITIVE.sqrt()) {
                return Ok(chol);
            }
        }
        let min_eig = self.min_eigenvalue();
        let scale = 1.0 + self.spectral_norm();
        if min_eig <= -PD_ACCEPT_REL * scale {
            return Err(Error::NotPositiveDefinite { min_eig });
        }
        let shift = PD_JITTER * scale + (-min_eig).max(0.0);
        let jittered = &self.mat + DMatrix::identity(self.dim(), self.dim()) * shift;
        jittered
            .cholesky()
            .ok_or(Error::NotPositiveDefinite { min_eig })
    }

    /// `ln det V` as a sum of log pivots of the triangular factor.
    pub fn logdet(&self) -> Result<f64> {
        let chol = self.cholesky_pd()?;
        let l = chol.l();
        let mut acc = 0.0;
        for i in 0..self.dim() {
            acc += l[(i, i)].ln();
        }
        Ok(2.0 * acc)
    }

    /// Inverse of a positive definite matrix.
    pub fn inverse(&self) -> Result<SymMatrix> {
        let chol = self.cholesky_pd()?;
        Ok(SymMatrix::symmetrized(chol.inverse()))
    }

    /// Fractional power through the symmetric eigendecomposition, with
    /// eigenvalues clamped at the jitter floor before the power is taken.
    pub fn powf(&self, exponent: f64) -> Result<SymMatrix> {
        let eig = self.mat.clone().symmetric_eigen();
        let scale = 1.0 + eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
        let needs_pd = exponent.fract() != 0.0 || exponent < 0.0;
        let floor = PD_JITTER * scale;
        let mut powered = eig.eigenvalues.clone();
        for l in powered.iter_mut() {
            if needs_pd {
                if *l <= -PD_ACCEPT_REL * scale {
                    return Err(Error::NotPositiveDefinite { min_eig: *l });
                }
                *l = l.max(floor);
            }
            *l = l.powf(exponent);
        }
        let q = &eig.eigenvectors;
        let rebuilt = q * DMatrix::from_diagonal(&powered) * q.transpose();
        Ok(SymMatrix::symmetrized(rebuilt))
    }

    pub fn sqrt_pd(&self) -> Result<SymMatrix> {
        self.powf(0.5)
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace()
    }

    /// Congruence `S V Sᵀ`.
    pub fn congruence(&self, s: &DMatrix<f64>) -> SymMatrix {
        SymMatrix::symmetrized(s * &self.mat * s.transpose())
    }

    pub fn scale(&self, k: f64) -> SymMatrix {
        SymMatrix {
            mat: &self.mat * k,
        }
    }

    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(SymMatrix {
            mat: &self.mat + &other.mat,
        })
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(SymMatrix {
            mat: &self.mat - &other.mat,
        })
    }

    /// Direct sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &SymMatrix) -> SymMatrix {
        let n = self.dim();
        let m = other.dim();
        let mut out = DMatrix::zeros(n + m, n + m);
        out.view_mut((0, 0), (n, n)).copy_from(&self.mat);
        out.view_mut((n, n), (m, m)).copy_from(&other.mat);
        SymMatrix { mat: out }
    }
}

/// One labeled block of a partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub label: String,
    pub size: usize,
}

/// Symmetric matrix with an ordered, labeled partition into blocks.
///
/// Partitions preserve the user-given label order everywhere; no internal
/// reordering takes place, so block indices are reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedMatrix {
    base: SymMatrix,
    blocks: Vec<Block>,
}

impl PartitionedMatrix {
    pub fn new(base: SymMatrix, blocks: Vec<(impl Into<String>, usize)>) -> Result<Self> {
        let blocks: Vec<Block> = blocks
            .into_iter()
            .map(|(label, size)| Block {
                label: label.into(),
                size,
            })
            .collect();
        let total: usize = blocks.iter().map(|b| b.size).sum();
        if total != base.dim() {
            return Err(Error::PartitionSizeMismatch {
                total,
                dim: base.dim(),
            });
        }
        for (i, b) in blocks.iter().enumerate() {
            if blocks[..i].iter().any(|p| p.label == b.label) {
                return Err(Error::DuplicateLabel(b.label.clone()));
            }
        }
        Ok(Self { base, blocks })
    }

    pub fn base(&self) -> &SymMatrix {
        &self.base
    }

    pub fn mat(&self) -> &DMatrix<f64> {
        self.base.mat()
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn labels(&self) -> Vec<&str> {
        self.blocks.iter().map(|b| b.label.as_str()).collect()
    }

    fn block_position(&self, label: &str) -> Result<usize> {
        self.blocks
            .iter()
            .position(|b| b.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Row/column range occupied by a block.
    pub fn block_range(&self, label: &str) -> Result<std::ops::Range<usize>> {
        let pos = self.block_position(label)?;
        let start: usize = self.blocks[..pos].iter().map(|b| b.size).sum();
        Ok(start..start + self.blocks[pos].size)
    }

    /// Indices covered by a label set, in the original block order.
    fn indices_of(&self, labels: &[&str]) -> Result<Vec<usize>> {
        let mut positions = Vec::with_capacity(labels.len());
        for label in labels {
            positions.push(self.block_position(label)?);
        }
        positions.sort_unstable();
        positions.dedup();
        let mut idx = Vec::new();
        for pos in positions {
            let start: usize = self.blocks[..pos].iter().map(|b| b.size).sum();
            idx.extend(start..start + self.blocks[pos].size);
        }
        Ok(idx)
    }

    fn submatrix(&self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| {
            self.base.mat[(rows[i], cols[j])]
        })
    }

    /// Principal submatrix on the selected blocks, in the original relative
    /// order, with the partition restricted accordingly.
    pub fn project(&self, labels: &[&str]) -> Result<PartitionedMatrix> {
        let idx = self.indices_of(labels)?;
        let sub = self.submatrix(&idx, &idx);
        let kept: Vec<(String, usize)> = self
            .blocks
            .iter()
            .filter(|b| labels.contains(&b.label.as_str()))
            .map(|b| (b.label.clone(), b.size))
            .collect();
        PartitionedMatrix::new(SymMatrix::symmetrized(sub), kept)
    }

    /// Diagonal block for a single label.
    pub fn diagonal_block(&self, label: &str) -> Result<SymMatrix> {
        let range = self.block_range(label)?;
        let idx: Vec<usize> = range.collect();
        Ok(SymMatrix::symmetrized(self.submatrix(&idx, &idx)))
    }

    /// Off-diagonal coupling block with rows from `row_label` and columns
    /// from `col_label`. Label-pair driven to keep transposition
    /// conventions out of calling code.
    pub fn off_diagonal_block(&self, row_label: &str, col_label: &str) -> Result<DMatrix<f64>> {
        let rows: Vec<usize> = self.block_range(row_label)?.collect();
        let cols: Vec<usize> = self.block_range(col_label)?.collect();
        Ok(self.submatrix(&rows, &cols))
    }

    /// Schur complement of the matrix with respect to the `out_labels`
    /// block: the complement lives on the remaining labels (original
    /// order). For `V = [[A, X], [Xᵀ, B]]` and `out = {A}` this is
    /// `V/A = B − Xᵀ A⁻¹ X`. If `V > 0` the result is positive definite.
    pub fn schur_complement(&self, out_labels: &[&str]) -> Result<PartitionedMatrix> {
        for label in out_labels {
            self.block_position(label)?;
        }
        let keep_blocks: Vec<(String, usize)> = self
            .blocks
            .iter()
            .filter(|b| !out_labels.contains(&b.label.as_str()))
            .map(|b| (b.label.clone(), b.size))
            .collect();
        let keep_labels: Vec<&str> = keep_blocks.iter().map(|(l, _)| l.as_str()).collect();
        let out_idx = self.indices_of(out_labels)?;
        let keep_idx = self.indices_of(&keep_labels)?;

        let v_out = SymMatrix::symmetrized(self.submatrix(&out_idx, &out_idx));
        let v_keep = self.submatrix(&keep_idx, &keep_idx);
        let coupling = self.submatrix(&out_idx, &keep_idx);

        let chol = v_out.cholesky_pd()?;
        let solved = chol.solve(&coupling);
        let complement = v_keep - coupling.transpose() * solved;
        PartitionedMatrix::new(SymMatrix::symmetrized(complement), keep_blocks)
    }

    /// Full inverse carrying the same partition. The diagonal block of the
    /// inverse on a label set `S` equals `(V / complement(S))⁻¹`.
    pub fn block_inverse(&self) -> Result<PartitionedMatrix> {
        let inv = self.base.inverse()?;
        PartitionedMatrix::new(
            inv,
            self.blocks
                .iter()
                .map(|b| (b.label.clone(), b.size))
                .collect::<Vec<_>>(),
        )
    }

    /// Replaces the underlying matrix, keeping the partition.
    pub fn with_base(&self, base: SymMatrix) -> Result<PartitionedMatrix> {
        PartitionedMatrix::new(
            base,
            self.blocks
                .iter()
                .map(|b| (b.label.clone(), b.size))
                .collect::<Vec<_>>(),
        )
    }
}

/// Woodbury identity `(S + U T V)⁻¹ = S⁻¹ − S⁻¹U (V S⁻¹ U + T⁻¹)⁻¹ V S⁻¹`.
///
/// `S` and `T` must be invertible; shapes must chain as
/// `S: n×n`, `U: n×k`, `T: k×k`, `V: k×n`.
pub fn woodbury_inverse(
    s: &DMatrix<f64>,
    u: &DMatrix<f64>,
    t: &DMatrix<f64>,
    v: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = s.nrows();
    let k = t.nrows();
    if s.ncols() != n || t.ncols() != k || u.nrows() != n || u.ncols() != k || v.nrows() != k || v.ncols() != n {
        return Err(Error::Shape(format!(
            "woodbury: S {}x{}, U {}x{}, T {}x{}, V {}x{}",
            s.nrows(),
            s.ncols(),
            u.nrows(),
            u.ncols(),
            t.nrows(),
            t.ncols(),
            v.nrows(),
            v.ncols()
        )));
    }
    let s_lu = s.clone().lu();
    let s_inv = s_lu.try_inverse().ok_or(Error::Singular("woodbury: S"))?;
    let t_inv = t
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::Singular("woodbury: T"))?;
    let core = v * &s_inv * u + t_inv;
    let core_inv = core.lu().try_inverse().ok_or(Error::Singular("woodbury: core"))?;
    Ok(&s_inv - &s_inv * u * core_inv * v * &s_inv)
}

/// Numerical rank: singular values above `rel_tol` times the largest one.
pub fn rank_with_tol(mat: &DMatrix<f64>, rel_tol: f64) -> usize {
    if mat.is_empty() {
        return 0;
    }
    let sv = mat.clone().singular_values();
    let largest = sv.iter().fold(0.0f64, |m, &s| m.max(s));
    if largest == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * largest).count()
}
