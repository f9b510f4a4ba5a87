//! Recoding of mixed-type columns into the nonnegative matrix `Z`.
//!
//! Every source variable becomes a contiguous block of columns whose
//! entries sum to one on each row, so each row of `Z` sums to the number of
//! variables.

mod barycentric;
mod fuzzy;
mod ordinal;

pub use barycentric::{
    barycentric_tuple, decode_tuple, decode_values, BarycentricTuple, EXACT_DECODE_TOLERANCE,
};
pub use fuzzy::{default_hinges, escofier_pair, escofier_values, mean_sd, triangular_tuple};
pub use ordinal::{decode_ordinal, discretize, OrdinalScale, FLOOR_GUARD};

use crate::data::{ColumnData, DataError, Dataset, VariableKind, VariableSchema, DEFAULT_N_CATEGORIES};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::ops::Range;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CodingError {
    #[error("column is empty")]
    EmptyColumn,
    #[error("column is constant; exclude it, it carries no information for clustering")]
    ConstantColumn,
    #[error("non-finite value {0} in column")]
    NonFinite(f64),
    #[error("level {level} outside the scale 1..={m}")]
    LevelOutOfRange { level: u64, m: u64 },
    #[error("tuple width {0} is too small; at least 2 categories are required")]
    BadTupleWidth(usize),
    #[error("tuple does not correspond to any level of the scale")]
    NoPreimage,
    #[error("value {x} outside hinge range {hinges:?}")]
    OutOfHingeRange { x: f64, hinges: (f64, f64, f64) },
    #[error("hinges {hinges:?} are not strictly increasing")]
    DegenerateHinges { hinges: (f64, f64, f64) },
    #[error("column `{column}`: {source}")]
    InColumn {
        column: String,
        #[source]
        source: Box<CodingError>,
    },
    #[error(transparent)]
    Schema(#[from] DataError),
}

impl CodingError {
    fn in_column(self, column: &str) -> Self {
        CodingError::InColumn {
            column: column.to_string(),
            source: Box::new(self),
        }
    }
}

/// How ordinal and continuous columns are spread into fuzzy categories.
/// Nominal columns are dummy-coded under every method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodingMethod {
    Barycentric,
    Triangular,
    Escofier,
}

impl CodingMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            CodingMethod::Barycentric => "barycentric",
            CodingMethod::Triangular => "triangular",
            CodingMethod::Escofier => "escofier",
        }
    }

    /// Whether the coded matrix is guaranteed nonnegative, i.e. usable as a
    /// contingency table.
    pub fn is_nonnegative(self) -> bool {
        !matches!(self, CodingMethod::Escofier)
    }
}

impl std::str::FromStr for CodingMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "barycentric" => Ok(CodingMethod::Barycentric),
            "triangular" => Ok(CodingMethod::Triangular),
            "escofier" => Ok(CodingMethod::Escofier),
            other => Err(format!("unknown coding method `{other}`")),
        }
    }
}

/// What produced a block, with everything needed to decode it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "coding", rename_all = "snake_case")]
pub enum BlockEncoding {
    Dummy {
        categories: Vec<String>,
    },
    Barycentric {
        /// Present for continuous columns only.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<OrdinalScale>,
        m: u64,
        n: usize,
    },
    Triangular {
        hinges: (f64, f64, f64),
    },
    Escofier {
        mean: f64,
        sd: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub variable: String,
    pub kind: VariableKind,
    pub columns: Range<usize>,
    pub encoding: BlockEncoding,
}

/// A row-major block of coded values for one source variable.
#[derive(Debug, Clone, PartialEq)]
pub struct CodedBlock {
    pub width: usize,
    pub values: Vec<f64>,
}

impl CodedBlock {
    pub fn rows(&self) -> usize {
        self.values.len().checked_div(self.width).unwrap_or(0)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.width..(i + 1) * self.width]
    }
}

/// Dummy coding, one column per category in order of first appearance.
/// Returns the categories alongside the block.
pub fn encode_nominal<S: AsRef<str>>(column: &[S]) -> (Vec<String>, CodedBlock) {
    let mut categories: Vec<String> = Vec::new();
    let codes: Vec<usize> = column
        .iter()
        .map(|v| {
            let v = v.as_ref();
            match categories.iter().position(|c| c == v) {
                Some(p) => p,
                None => {
                    categories.push(v.to_string());
                    categories.len() - 1
                }
            }
        })
        .collect();
    let width = categories.len();
    let mut values = vec![0.0; column.len() * width];
    for (i, c) in codes.into_iter().enumerate() {
        values[i * width + c] = 1.0;
    }
    (categories, CodedBlock { width, values })
}

/// Barycentric coding of ordinal levels on an `m`-point scale.
pub fn encode_ordinal(levels: &[u64], m: u64, n: usize) -> Result<CodedBlock, CodingError> {
    barycentric_tuple(1, m.max(1), n)?;
    let mut values = vec![0.0; levels.len() * n];
    for (row, &level) in values.chunks_mut(n).zip(levels) {
        if level == 0 || level > m {
            return Err(CodingError::LevelOutOfRange { level, m });
        }
        barycentric::fill_tuple(level, m, row);
    }
    Ok(CodedBlock { width: n, values })
}

/// The coded matrix `Z` with per-variable block bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct CodedMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    pub blocks: Vec<Block>,
    pub column_labels: Vec<String>,
    pub method: CodingMethod,
    /// Non-fatal observations, e.g. single-category nominal columns.
    pub warnings: Vec<String>,
}

impl CodedMatrix {
    /// Wraps row-major entries without block bookkeeping, for callers that
    /// already hold `Z`.
    pub fn from_rows(rows: usize, cols: usize, entries: Vec<f64>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entries do not match the shape");
        CodedMatrix {
            rows,
            cols,
            entries,
            blocks: Vec::new(),
            column_labels: (1..=cols).map(|j| format!("c{j}")).collect(),
            method: CodingMethod::Barycentric,
            warnings: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn has_negative(&self) -> bool {
        self.entries.iter().any(|&v| v < 0.0)
    }

    /// Drops columns whose total is zero, keeping block ranges consistent.
    /// Returns the labels of the removed columns.
    pub fn prune_empty_columns(&mut self) -> Vec<String> {
        let keep: Vec<bool> = (0..self.cols)
            .map(|j| (0..self.rows).any(|i| self.get(i, j) != 0.0))
            .collect();
        if keep.iter().all(|&k| k) {
            return Vec::new();
        }
        let removed = self
            .column_labels
            .iter()
            .zip(&keep)
            .filter(|(_, &k)| !k)
            .map(|(l, _)| l.clone())
            .collect();
        let new_cols = keep.iter().filter(|&&k| k).count();
        let mut entries = Vec::with_capacity(self.rows * new_cols);
        for i in 0..self.rows {
            entries.extend(self.row(i).iter().zip(&keep).filter(|(_, &k)| k).map(|(v, _)| *v));
        }
        let mut new_index = Vec::with_capacity(self.cols);
        let mut next = 0;
        for &k in &keep {
            new_index.push(next);
            if k {
                next += 1;
            }
        }
        for block in &mut self.blocks {
            let start = new_index.get(block.columns.start).copied().unwrap_or(next);
            let width = keep[block.columns.clone()].iter().filter(|&&k| k).count();
            block.columns = start..start + width;
        }
        self.column_labels = self
            .column_labels
            .drain(..)
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(l, _)| l)
            .collect();
        self.entries = entries;
        self.cols = new_cols;
        removed
    }
}

struct EncodedColumn {
    block: CodedBlock,
    encoding: BlockEncoding,
    labels: Vec<String>,
    warning: Option<String>,
}

fn numbered_labels(name: &str, width: usize) -> Vec<String> {
    (1..=width).map(|k| format!("{name}_{k}")).collect()
}

fn rows_block<const W: usize>(rows: Vec<[f64; W]>) -> CodedBlock {
    CodedBlock {
        width: W,
        values: rows.into_iter().flatten().collect(),
    }
}

fn encode_column(
    name: &str,
    data: &ColumnData,
    levels: Option<u64>,
    n: usize,
    method: CodingMethod,
) -> Result<EncodedColumn, CodingError> {
    match data {
        ColumnData::Nominal(values) => {
            let (categories, block) = encode_nominal(values);
            let warning = (categories.len() == 1)
                .then(|| format!("column `{name}` has a single category; its block has zero variance"));
            let labels = categories.iter().map(|c| format!("{name}_{c}")).collect();
            Ok(EncodedColumn {
                block,
                encoding: BlockEncoding::Dummy { categories },
                labels,
                warning,
            })
        }
        ColumnData::Continuous(values) => match method {
            CodingMethod::Barycentric => {
                let (lv, scale) = discretize(values)?;
                let block = encode_ordinal(&lv, scale.m, n)?;
                Ok(EncodedColumn {
                    block,
                    encoding: BlockEncoding::Barycentric {
                        scale: Some(scale),
                        m: scale.m,
                        n,
                    },
                    labels: numbered_labels(name, n),
                    warning: None,
                })
            }
            CodingMethod::Triangular => {
                let hinges = default_hinges(values)?;
                let rows = values
                    .iter()
                    .map(|&x| triangular_tuple(x, hinges))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(EncodedColumn {
                    block: rows_block(rows),
                    encoding: BlockEncoding::Triangular { hinges },
                    labels: numbered_labels(name, 3),
                    warning: None,
                })
            }
            CodingMethod::Escofier => escofier_column(name, values),
        },
        ColumnData::Ordinal(lv) => {
            let m = levels.unwrap_or_else(|| lv.iter().copied().max().unwrap_or(1));
            match method {
                CodingMethod::Barycentric => Ok(EncodedColumn {
                    block: encode_ordinal(lv, m, n)?,
                    encoding: BlockEncoding::Barycentric { scale: None, m, n },
                    labels: numbered_labels(name, n),
                    warning: None,
                }),
                CodingMethod::Triangular => {
                    let hinges = (1.0, (m as f64 + 1.0) / 2.0, m as f64);
                    let rows = lv
                        .iter()
                        .map(|&l| triangular_tuple(l as f64, hinges))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(EncodedColumn {
                        block: rows_block(rows),
                        encoding: BlockEncoding::Triangular { hinges },
                        labels: numbered_labels(name, 3),
                        warning: None,
                    })
                }
                CodingMethod::Escofier => {
                    let as_real: Vec<f64> = lv.iter().map(|&l| l as f64).collect();
                    escofier_column(name, &as_real)
                }
            }
        }
    }
}

fn escofier_column(name: &str, values: &[f64]) -> Result<EncodedColumn, CodingError> {
    let (mean, sd) = mean_sd(values)?;
    let block = rows_block(escofier_pair(values)?);
    let warning = block
        .values
        .iter()
        .any(|&v| v < 0.0)
        .then(|| format!("column `{name}`: bipolar coding produced negative entries"));
    Ok(EncodedColumn {
        block,
        encoding: BlockEncoding::Escofier { mean, sd },
        labels: vec![format!("{name}_plus"), format!("{name}_minus")],
        warning,
    })
}

/// Codes every schema column of `data` and concatenates the blocks in
/// schema order. Continuous and ordinal columns without an explicit
/// `n_categories` use [`DEFAULT_N_CATEGORIES`].
pub fn build_coded_matrix(
    data: &Dataset,
    schema: &VariableSchema,
    method: CodingMethod,
) -> Result<CodedMatrix, CodingError> {
    schema.validate()?;
    for col in data.columns() {
        if schema.get(&col.name).is_none() {
            return Err(DataError::UnknownColumn(col.name.clone()).into());
        }
    }
    let mut sources = Vec::with_capacity(schema.columns.len());
    for spec in &schema.columns {
        let col = data
            .column(&spec.name)
            .ok_or_else(|| DataError::MissingColumn(spec.name.clone()))?;
        if col.data.kind() != spec.kind {
            return Err(DataError::SchemaMismatch {
                column: spec.name.clone(),
                declared: spec.kind.as_str(),
                found: col.data.kind().as_str(),
            }
            .into());
        }
        sources.push((spec, col));
    }

    let encoded: Vec<EncodedColumn> = sources
        .par_iter()
        .map(|(spec, col)| {
            let n = spec.n_categories_or(DEFAULT_N_CATEGORIES);
            encode_column(&spec.name, &col.data, spec.levels, n, method)
                .map_err(|e| e.in_column(&spec.name))
        })
        .collect::<Result<_, _>>()?;

    let rows = data.rows();
    let cols: usize = encoded.iter().map(|e| e.block.width).sum();
    let mut entries = vec![0.0; rows * cols];
    let mut blocks = Vec::with_capacity(encoded.len());
    let mut column_labels = Vec::with_capacity(cols);
    let mut warnings = Vec::new();
    let mut start = 0;
    for ((spec, _), enc) in sources.iter().zip(encoded) {
        let w = enc.block.width;
        for i in 0..rows {
            entries[i * cols + start..i * cols + start + w].copy_from_slice(enc.block.row(i));
        }
        blocks.push(Block {
            variable: spec.name.clone(),
            kind: spec.kind,
            columns: start..start + w,
            encoding: enc.encoding,
        });
        column_labels.extend(enc.labels);
        warnings.extend(enc.warning);
        start += w;
    }
    Ok(CodedMatrix {
        rows,
        cols,
        entries,
        blocks,
        column_labels,
        method,
        warnings,
    })
}
