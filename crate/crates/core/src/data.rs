//! Column schemas and typed tables.

use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use thiserror::Error;

/// Measurement level of a source variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableKind {
    Nominal,
    Ordinal,
    Continuous,
}

impl VariableKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VariableKind::Nominal => "nominal",
            VariableKind::Ordinal => "ordinal",
            VariableKind::Continuous => "continuous",
        }
    }
}

/// Width of the fuzzy tuple used for ordinal and continuous columns when the
/// schema does not say otherwise.
pub const DEFAULT_N_CATEGORIES: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: VariableKind,
    /// Number of points of the rating scale; required for ordinal columns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<u64>,
    /// Fuzzy tuple width; ignored for nominal columns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_categories: Option<usize>,
}

impl ColumnSpec {
    pub fn new(name: impl Into<String>, kind: VariableKind) -> Self {
        ColumnSpec {
            name: name.into(),
            kind,
            levels: None,
            n_categories: None,
        }
    }

    pub fn ordinal(name: impl Into<String>, levels: u64) -> Self {
        ColumnSpec {
            levels: Some(levels),
            ..ColumnSpec::new(name, VariableKind::Ordinal)
        }
    }

    pub fn with_n_categories(mut self, n: usize) -> Self {
        self.n_categories = Some(n);
        self
    }

    pub fn n_categories_or(&self, default: usize) -> usize {
        self.n_categories.unwrap_or(default)
    }
}

/// Per-column description of a table. Serialized as
/// `{"columns":[{"name":…,"kind":…,"levels":…,"n_categories":…}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSchema {
    pub columns: Vec<ColumnSpec>,
}

#[derive(Debug, Error, PartialEq)]
pub enum DataError {
    #[error("schema lists column `{0}` more than once")]
    DuplicateColumn(String),
    #[error("column `{0}` is not described by the schema")]
    UnknownColumn(String),
    #[error("schema column `{0}` is missing from the data")]
    MissingColumn(String),
    #[error("ordinal column `{0}` needs a `levels` entry in the schema")]
    MissingLevels(String),
    #[error("column `{name}` has n_categories = {n}; at least 2 are required")]
    BadCategoryCount { name: String, n: usize },
    #[error("missing value at row {row}, column `{column}`")]
    MissingValue { row: usize, column: String },
    #[error("row {row}, column `{column}`: cannot parse `{value}` as {expected}")]
    Parse {
        row: usize,
        column: String,
        value: String,
        expected: &'static str,
    },
    #[error("row {row}, column `{column}`: ordinal level {level} outside 1..={levels}")]
    LevelOutOfScale {
        row: usize,
        column: String,
        level: u64,
        levels: u64,
    },
    #[error("row {row} has {found} fields, header has {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("column `{name}` has {found} values, expected {expected}")]
    LengthMismatch {
        name: String,
        found: usize,
        expected: usize,
    },
    #[error("column `{column}` is {found} in the data but {declared} in the schema")]
    SchemaMismatch {
        column: String,
        declared: &'static str,
        found: &'static str,
    },
    #[error("table has no rows")]
    Empty,
}

impl VariableSchema {
    pub fn new(columns: Vec<ColumnSpec>) -> Result<Self, DataError> {
        let schema = VariableSchema { columns };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let mut seen = HashSet::new();
        for col in &self.columns {
            if !seen.insert(col.name.as_str()) {
                return Err(DataError::DuplicateColumn(col.name.clone()));
            }
            if col.kind == VariableKind::Ordinal && col.levels.is_none() {
                return Err(DataError::MissingLevels(col.name.clone()));
            }
            if let Some(n) = col.n_categories {
                if n < 2 && col.kind != VariableKind::Nominal {
                    return Err(DataError::BadCategoryCount {
                        name: col.name.clone(),
                        n,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&ColumnSpec> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Same schema with every unset `n_categories` filled with `n`.
    pub fn with_default_categories(&self, n: usize) -> Self {
        let columns = self
            .columns
            .iter()
            .map(|c| ColumnSpec {
                n_categories: c.n_categories.or(Some(n)),
                ..c.clone()
            })
            .collect();
        VariableSchema { columns }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Continuous(Vec<f64>),
    Ordinal(Vec<u64>),
    Nominal(Vec<String>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Continuous(v) => v.len(),
            ColumnData::Ordinal(v) => v.len(),
            ColumnData::Nominal(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> VariableKind {
        match self {
            ColumnData::Continuous(_) => VariableKind::Continuous,
            ColumnData::Ordinal(_) => VariableKind::Ordinal,
            ColumnData::Nominal(_) => VariableKind::Nominal,
        }
    }

    fn select(&self, rows: &[usize]) -> ColumnData {
        match self {
            ColumnData::Continuous(v) => ColumnData::Continuous(rows.iter().map(|&i| v[i]).collect()),
            ColumnData::Ordinal(v) => ColumnData::Ordinal(rows.iter().map(|&i| v[i]).collect()),
            ColumnData::Nominal(v) => {
                ColumnData::Nominal(rows.iter().map(|&i| v[i].clone()).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

/// A typed, complete table: every column has the same length and no
/// missing entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    rows: usize,
}

impl Dataset {
    pub fn new(columns: Vec<Column>) -> Result<Self, DataError> {
        let rows = columns.first().map(|c| c.data.len()).unwrap_or(0);
        for c in &columns {
            if c.data.len() != rows {
                return Err(DataError::LengthMismatch {
                    name: c.name.clone(),
                    found: c.data.len(),
                    expected: rows,
                });
            }
        }
        Ok(Dataset { columns, rows })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Sub-table restricted to the given row indices, in that order.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            columns: self
                .columns
                .iter()
                .map(|c| Column {
                    name: c.name.clone(),
                    data: c.data.select(rows),
                })
                .collect(),
            rows: rows.len(),
        }
    }
}

/// Untyped table as read from a delimited file.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Tokens read as a missing value.
const MISSING_TOKENS: [&str; 4] = ["", "NA", "NaN", "?"];

fn is_missing(s: &str) -> bool {
    MISSING_TOKENS.contains(&s.trim())
}

impl RawTable {
    /// Types the table according to `schema`. Row numbers in errors are
    /// 1-based data rows (the header is not counted).
    ///
    /// With `drop_incomplete`, rows holding a missing value in any schema
    /// column are removed instead of failing.
    pub fn typed(&self, schema: &VariableSchema, drop_incomplete: bool) -> Result<Dataset, DataError> {
        self.typed_with_rows(schema, drop_incomplete).map(|(ds, _)| ds)
    }

    /// [`RawTable::typed`], also returning the 0-based indices of the rows
    /// that were kept.
    pub fn typed_with_rows(
        &self,
        schema: &VariableSchema,
        drop_incomplete: bool,
    ) -> Result<(Dataset, Vec<usize>), DataError> {
        schema.validate()?;
        for (row, r) in self.rows.iter().enumerate() {
            if r.len() != self.header.len() {
                return Err(DataError::RaggedRow {
                    row: row + 1,
                    found: r.len(),
                    expected: self.header.len(),
                });
            }
        }
        for h in &self.header {
            if schema.get(h).is_none() {
                return Err(DataError::UnknownColumn(h.clone()));
            }
        }
        let mut positions = Vec::with_capacity(schema.columns.len());
        for spec in &schema.columns {
            let pos = self
                .header
                .iter()
                .position(|h| h == &spec.name)
                .ok_or_else(|| DataError::MissingColumn(spec.name.clone()))?;
            positions.push(pos);
        }

        let mut keep = Vec::with_capacity(self.rows.len());
        for (row, r) in self.rows.iter().enumerate() {
            let missing = schema
                .columns
                .iter()
                .zip(&positions)
                .find(|(_, &p)| is_missing(&r[p]));
            match missing {
                Some(_) if drop_incomplete => {}
                Some((spec, _)) => {
                    return Err(DataError::MissingValue {
                        row: row + 1,
                        column: spec.name.clone(),
                    })
                }
                None => keep.push(row),
            }
        }
        if keep.is_empty() {
            return Err(DataError::Empty);
        }

        let mut columns = Vec::with_capacity(schema.columns.len());
        for (spec, &pos) in schema.columns.iter().zip(&positions) {
            let cells = keep.iter().map(|&row| (row + 1, self.rows[row][pos].trim()));
            let data = match spec.kind {
                VariableKind::Continuous => ColumnData::Continuous(
                    cells
                        .map(|(row, s)| {
                            s.parse::<f64>()
                                .ok()
                                .filter(|v| v.is_finite())
                                .ok_or_else(|| DataError::Parse {
                                    row,
                                    column: spec.name.clone(),
                                    value: s.to_string(),
                                    expected: "a finite real number",
                                })
                        })
                        .collect::<Result<_, _>>()?,
                ),
                VariableKind::Ordinal => {
                    let levels = spec.levels.expect("validated");
                    ColumnData::Ordinal(
                        cells
                            .map(|(row, s)| {
                                let level = s.parse::<u64>().map_err(|_| DataError::Parse {
                                    row,
                                    column: spec.name.clone(),
                                    value: s.to_string(),
                                    expected: "a positive integer level",
                                })?;
                                if level == 0 || level > levels {
                                    return Err(DataError::LevelOutOfScale {
                                        row,
                                        column: spec.name.clone(),
                                        level,
                                        levels,
                                    });
                                }
                                Ok(level)
                            })
                            .collect::<Result<_, _>>()?,
                    )
                }
                VariableKind::Nominal => ColumnData::Nominal(cells.map(|(_, s)| s.to_string()).collect()),
            };
            columns.push(Column {
                name: spec.name.clone(),
                data,
            });
        }
        Ok((Dataset::new(columns)?, keep))
    }
}
