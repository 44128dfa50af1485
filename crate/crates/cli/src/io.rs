//! Matrix file loading and saving.
//!
//! The interchange format is a JSON document
//!
//! ```json
//! { "dim": 3,
//!   "blocks": [{"label": "A", "size": 1}, ...],   // classical partition
//!   "modes":  [{"label": "A", "n": 1}, ...],      // quantum mode counts
//!   "data": [ ... dim*dim row-major reals ... ] }
//! ```
//!
//! with exactly one of `blocks`/`modes` used per command. Symmetry is
//! enforced on load within `1e-9` and the matrix is then symmetrized.
//! With `--csv`, the file is instead plain row-major comma-separated
//! values and the partition comes from the command line.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use logdet_gauss::matcore::SymMatrix;
use logdet_gauss::{PartitionedMatrix, Qcm};

use crate::json::Json;
use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockSpec {
    pub label: String,
    pub size: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeSpec {
    pub label: String,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<BlockSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<ModeSpec>>,
    pub data: Vec<f64>,
}

/// Symmetry tolerance applied to loaded matrices.
const LOAD_SYMMETRY_TOL: f64 = 1e-9;

impl MatrixFile {
    pub fn load(path: &str, csv: bool) -> Result<MatrixFile, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("cannot read {path}: {e}")))?;
        if csv {
            Self::from_csv(&text)
        } else {
            serde_json::from_str(&text)
                .map_err(|e| CliError::Parse(format!("cannot parse {path}: {e}")))
        }
    }

    /// Plain row-major CSV: one matrix row per line.
    fn from_csv(text: &str) -> Result<MatrixFile, CliError> {
        let mut data = Vec::new();
        let mut rows = 0;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            rows += 1;
            for cell in line.split(',') {
                let value: f64 = cell
                    .trim()
                    .parse()
                    .map_err(|e| CliError::Parse(format!("bad CSV value `{cell}`: {e}")))?;
                data.push(value);
            }
        }
        if rows * rows != data.len() {
            return Err(CliError::Parse(format!(
                "CSV is not square: {rows} rows, {} values",
                data.len()
            )));
        }
        Ok(MatrixFile {
            dim: rows,
            blocks: None,
            modes: None,
            data,
        })
    }

    pub fn matrix(&self) -> Result<SymMatrix, CliError> {
        if self.data.len() != self.dim * self.dim {
            return Err(CliError::Parse(format!(
                "data length {} does not match dim² = {}",
                self.data.len(),
                self.dim * self.dim
            )));
        }
        let mat = DMatrix::from_row_slice(self.dim, self.dim, &self.data);
        SymMatrix::with_symmetry_tol(mat, LOAD_SYMMETRY_TOL)
            .map_err(|e| CliError::Math(e.to_string()))
    }

    /// Partitioned view; `override_blocks` (label=size pairs) replaces the
    /// file's partition when present.
    pub fn partitioned(
        &self,
        override_blocks: Option<&[(String, usize)]>,
    ) -> Result<PartitionedMatrix, CliError> {
        let matrix = self.matrix()?;
        let blocks: Vec<(String, usize)> = match override_blocks {
            Some(blocks) => blocks.to_vec(),
            None => self
                .blocks
                .as_ref()
                .ok_or_else(|| {
                    CliError::Parse("matrix file carries no blocks; pass label=size pairs".into())
                })?
                .iter()
                .map(|b| (b.label.clone(), b.size))
                .collect(),
        };
        PartitionedMatrix::new(matrix, blocks).map_err(|e| CliError::Math(e.to_string()))
    }

    /// Quantum view; `override_modes` replaces the file's mode list.
    pub fn qcm(&self, override_modes: Option<&[(String, usize)]>) -> Result<Qcm, CliError> {
        let matrix = self.matrix()?;
        let modes: Vec<(String, usize)> = match override_modes {
            Some(modes) => modes.to_vec(),
            None => self
                .modes
                .as_ref()
                .ok_or_else(|| {
                    CliError::Parse("matrix file carries no modes; pass label=count pairs".into())
                })?
                .iter()
                .map(|m| (m.label.clone(), m.n))
                .collect(),
        };
        Qcm::new(matrix, modes).map_err(|e| CliError::Math(e.to_string()))
    }

    pub fn from_partitioned(v: &PartitionedMatrix) -> MatrixFile {
        MatrixFile {
            dim: v.dim(),
            blocks: Some(
                v.blocks()
                    .iter()
                    .map(|b| BlockSpec {
                        label: b.label.clone(),
                        size: b.size,
                    })
                    .collect(),
            ),
            modes: None,
            data: row_major(v.mat()),
        }
    }

    pub fn from_qcm(v: &Qcm) -> MatrixFile {
        MatrixFile {
            dim: v.dim(),
            blocks: None,
            modes: Some(
                v.parties()
                    .iter()
                    .map(|p| ModeSpec {
                        label: p.label.clone(),
                        n: p.modes,
                    })
                    .collect(),
            ),
            data: row_major(v.mat()),
        }
    }

    /// Deterministic JSON form (fixed key order, 17 significant digits).
    pub fn to_json(&self) -> Json {
        let mut fields = vec![("dim", Json::Int(self.dim as i64))];
        if let Some(blocks) = &self.blocks {
            fields.push((
                "blocks",
                Json::Arr(
                    blocks
                        .iter()
                        .map(|b| {
                            Json::obj(vec![
                                ("label", Json::Str(b.label.clone())),
                                ("size", Json::Int(b.size as i64)),
                            ])
                        })
                        .collect(),
                ),
            ));
        }
        if let Some(modes) = &self.modes {
            fields.push((
                "modes",
                Json::Arr(
                    modes
                        .iter()
                        .map(|m| {
                            Json::obj(vec![
                                ("label", Json::Str(m.label.clone())),
                                ("n", Json::Int(m.n as i64)),
                            ])
                        })
                        .collect(),
                ),
            ));
        }
        fields.push(("data", Json::floats(self.data.iter().cloned())));
        Json::obj(fields)
    }

    pub fn save(&self, path: &str) -> Result<(), CliError> {
        std::fs::write(path, self.to_json().render())
            .map_err(|e| CliError::Parse(format!("cannot write {path}: {e}")))
    }
}

pub fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Parses `A,B,C` (label selection) or `A=1,B=2` (partition definition).
pub enum BlockArg {
    Select(Vec<String>),
    Define(Vec<(String, usize)>),
}

pub fn parse_block_arg(arg: &str) -> Result<BlockArg, CliError> {
    if arg.contains('=') {
        let mut defs = Vec::new();
        for part in arg.split(',') {
            let (label, size) = part
                .split_once('=')
                .ok_or_else(|| CliError::Parse(format!("bad block spec `{part}`")))?;
            let size: usize = size
                .trim()
                .parse()
                .map_err(|e| CliError::Parse(format!("bad block size in `{part}`: {e}")))?;
            defs.push((label.trim().to_string(), size));
        }
        Ok(BlockArg::Define(defs))
    } else {
        Ok(BlockArg::Select(
            arg.split(',').map(|s| s.trim().to_string()).collect(),
        ))
    }
}
