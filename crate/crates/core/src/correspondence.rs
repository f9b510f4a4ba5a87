//! Correspondence-analysis geometry of a coded matrix: relative
//! frequencies, masses, row profiles and the chi-square metric.

use crate::coding::CodedMatrix;
use rayon::prelude::*;
use thiserror::Error;

/// Above this many rows, [`CorrespondenceView::distances`] computes
/// distances on demand instead of filling an I x I matrix.
pub const DENSE_DISTANCE_LIMIT: usize = 5_000;

#[derive(Debug, Error, PartialEq)]
pub enum CorrespondenceError {
    #[error("negative entry {value} at ({row}, {col}); chi-square geometry needs a nonnegative matrix")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("row {0} sums to zero")]
    ZeroRow(usize),
    #[error("column {0} sums to zero; prune empty columns first")]
    ZeroColumnMass(usize),
    #[error("matrix has no rows or no columns")]
    Empty,
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
}

/// Correspondence matrix `P = Z / sum(Z)` with its margins and row profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceView {
    rows: usize,
    cols: usize,
    p: Vec<f64>,
    row_masses: Vec<f64>,
    col_masses: Vec<f64>,
    profiles: Vec<f64>,
}

impl CorrespondenceView {
    pub fn from_coded(z: &CodedMatrix) -> Result<Self, CorrespondenceError> {
        Self::new(z.rows(), z.cols(), z.entries())
    }

    /// Builds the view from a row-major nonnegative matrix.
    pub fn new(rows: usize, cols: usize, entries: &[f64]) -> Result<Self, CorrespondenceError> {
        assert_eq!(entries.len(), rows * cols, "entries do not match the shape");
        if rows == 0 || cols == 0 {
            return Err(CorrespondenceError::Empty);
        }
        for (idx, &v) in entries.iter().enumerate() {
            if !v.is_finite() {
                return Err(CorrespondenceError::NonFinite {
                    row: idx / cols,
                    col: idx % cols,
                });
            }
            if v < 0.0 {
                return Err(CorrespondenceError::NegativeEntry {
                    row: idx / cols,
                    col: idx % cols,
                    value: v,
                });
            }
        }
        let row_totals: Vec<f64> = entries.chunks(cols).map(|r| r.iter().sum()).collect();
        if let Some(i) = row_totals.iter().position(|&t| t == 0.0) {
            return Err(CorrespondenceError::ZeroRow(i));
        }
        let mut col_totals = vec![0.0; cols];
        for r in entries.chunks(cols) {
            for (c, v) in col_totals.iter_mut().zip(r) {
                *c += v;
            }
        }
        if let Some(j) = col_totals.iter().position(|&t| t == 0.0) {
            return Err(CorrespondenceError::ZeroColumnMass(j));
        }
        let total: f64 = row_totals.iter().sum();
        let p: Vec<f64> = entries.iter().map(|v| v / total).collect();
        let row_masses: Vec<f64> = row_totals.iter().map(|t| t / total).collect();
        let col_masses: Vec<f64> = col_totals.iter().map(|t| t / total).collect();
        // profiles from Z directly: a_ij = z_ij / z_i.
        let profiles = entries
            .chunks(cols)
            .zip(&row_totals)
            .flat_map(|(r, t)| r.iter().map(move |v| v / t))
            .collect();
        Ok(CorrespondenceView {
            rows,
            cols,
            p,
            row_masses,
            col_masses,
            profiles,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry `p_ij` of the correspondence matrix.
    pub fn p(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.cols + j]
    }

    pub fn row_masses(&self) -> &[f64] {
        &self.row_masses
    }

    pub fn col_masses(&self) -> &[f64] {
        &self.col_masses
    }

    pub fn profile(&self, i: usize) -> &[f64] {
        &self.profiles[i * self.cols..(i + 1) * self.cols]
    }

    /// Chi-square quadratic form between two arbitrary profile vectors.
    pub fn profile_distance_sq(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .zip(&self.col_masses)
            .map(|((x, y), c)| (x - y) * (x - y) / c)
            .sum()
    }

    /// `(a_i - a_j)^T D_{1/c} (a_i - a_j)`.
    pub fn chi2_distance_sq(&self, i: usize, j: usize) -> f64 {
        self.profile_distance_sq(self.profile(i), self.profile(j))
    }

    pub fn chi2_distance(&self, i: usize, j: usize) -> f64 {
        self.chi2_distance_sq(i, j).sqrt()
    }

    /// Total inertia `sum_ij (p_ij - r_i c_j)^2 / (r_i c_j)`.
    pub fn total_inertia(&self) -> f64 {
        let mut total = 0.0;
        for i in 0..self.rows {
            let r = self.row_masses[i];
            for j in 0..self.cols {
                let e = r * self.col_masses[j];
                let d = self.p(i, j) - e;
                total += d * d / e;
            }
        }
        total
    }

    /// Total inertia as the mass-weighted sum of squared chi-square
    /// distances from each profile to the centroid `c`.
    pub fn total_inertia_from_profiles(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row_masses[i] * self.profile_distance_sq(self.profile(i), &self.col_masses))
            .sum()
    }

    /// Pairwise chi-square distances, dense when `rows <= DENSE_DISTANCE_LIMIT`.
    pub fn distances(&self) -> Distances<'_> {
        if self.rows <= DENSE_DISTANCE_LIMIT {
            Distances::Dense {
                n: self.rows,
                values: self.distance_matrix(),
            }
        } else {
            Distances::Lazy(self)
        }
    }

    /// Full row-major I x I matrix of chi-square distances.
    pub fn distance_matrix(&self) -> Vec<f64> {
        let n = self.rows;
        let mut values = vec![0.0; n * n];
        values.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for (j, v) in row.iter_mut().enumerate() {
                // same argument order for (i, j) and (j, i) keeps it exactly symmetric
                let (a, b) = if i < j { (i, j) } else { (j, i) };
                *v = if i == j { 0.0 } else { self.chi2_distance(a, b) };
            }
        });
        values
    }
}

/// Pairwise distances, stored or computed on demand. Both variants return
/// the same values.
pub enum Distances<'a> {
    Dense { n: usize, values: Vec<f64> },
    Lazy(&'a CorrespondenceView),
}

impl Distances<'_> {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            Distances::Dense { n, values } => values[i * n + j],
            Distances::Lazy(view) => {
                let (a, b) = if i < j { (i, j) } else { (j, i) };
                if a == b {
                    0.0
                } else {
                    view.chi2_distance(a, b)
                }
            }
        }
    }
}
