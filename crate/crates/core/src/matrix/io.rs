//! JSON matrix files: `{"dim": n, "entries": [[re, im], ...]}` in row-major order.
//!
//! Rectangular matrices (Kraus operators of a partial trace) add an optional
//! `"cols"` field; when absent the matrix is square.

use serde::{Deserialize, Serialize};

use super::{c64, ComplexMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixFile {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self {
            dim: m.rows(),
            cols: (!m.is_square()).then_some(m.cols()),
            entries: m.as_slice().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    /// Converts back, validating shape and finiteness.
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let cols = self.cols.unwrap_or(self.dim);
        if self.entries.len() != self.dim * cols {
            return Err(Error::mismatch(
                "matrix file",
                self.dim * cols,
                self.entries.len(),
            ));
        }
        ComplexMatrix::from_row_major(
            self.dim,
            cols,
            self.entries.iter().map(|&[re, im]| c64(re, im)).collect(),
        )
    }

    pub fn parse(json: &str) -> Result<ComplexMatrix> {
        serde_json::from_str::<MatrixFile>(json)?.to_matrix()
    }

    pub fn render(m: &ComplexMatrix) -> String {
        serde_json::to_string(&Self::from_matrix(m)).expect("matrix file serialises")
    }
}
