//! Gower dissimilarity followed by Partitioning Around Medoids, the
//! distance-based reference method for mixed data.

use crate::data::{ColumnData, Dataset, VariableSchema};
use crate::partition::Partition;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BaselineError {
    #[error("column `{0}` has zero range; Gower scaling is undefined")]
    ConstantContinuousColumn(String),
    #[error("K = {k} outside 1..={n}")]
    BadK { k: usize, n: usize },
    #[error("schema column `{0}` is missing from the data")]
    MissingColumn(String),
    #[error("dissimilarity matrix is {0} x {1}, expected square")]
    NotSquare(usize, usize),
}

/// Symmetric matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    n: usize,
    values: Vec<f64>,
}

impl DissimilarityMatrix {
    /// Wraps a row-major matrix; symmetry and the zero diagonal are enforced
    /// by mirroring the upper triangle.
    pub fn from_full(n: usize, values: Vec<f64>) -> Result<Self, BaselineError> {
        if values.len() != n * n {
            return Err(BaselineError::NotSquare(n, values.len() / n.max(1)));
        }
        let mut m = DissimilarityMatrix { n, values };
        for i in 0..n {
            m.values[i * n + i] = 0.0;
            for j in i + 1..n {
                m.values[j * n + i] = m.values[i * n + j];
            }
        }
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

enum GowerTerm<'a> {
    Numeric { values: Vec<f64>, range: f64 },
    Nominal(&'a [String]),
}

/// Gower dissimilarity: range-scaled absolute differences for continuous
/// and ordinal variables (ordinals as integer levels), simple mismatch for
/// nominal ones, averaged with equal weights.
pub fn gower(data: &Dataset, schema: &VariableSchema) -> Result<DissimilarityMatrix, BaselineError> {
    let mut terms = Vec::with_capacity(schema.columns.len());
    for spec in &schema.columns {
        let col = data
            .column(&spec.name)
            .ok_or_else(|| BaselineError::MissingColumn(spec.name.clone()))?;
        let numeric = match &col.data {
            ColumnData::Continuous(v) => Some(v.clone()),
            ColumnData::Ordinal(v) => Some(v.iter().map(|&l| l as f64).collect()),
            ColumnData::Nominal(v) => {
                terms.push(GowerTerm::Nominal(v));
                None
            }
        };
        if let Some(values) = numeric {
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let range = hi - lo;
            if range.is_nan() || range <= 0.0 {
                return Err(BaselineError::ConstantContinuousColumn(spec.name.clone()));
            }
            terms.push(GowerTerm::Numeric { values, range });
        }
    }
    let n = data.rows();
    let p = terms.len() as f64;
    let mut values = vec![0.0; n * n];
    values.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, v) in row.iter_mut().enumerate().skip(i + 1) {
            let total: f64 = terms
                .iter()
                .map(|t| match t {
                    GowerTerm::Numeric { values, range } => (values[i] - values[j]).abs() / range,
                    GowerTerm::Nominal(labels) => (labels[i] != labels[j]) as u8 as f64,
                })
                .sum();
            *v = total / p;
        }
    });
    DissimilarityMatrix::from_full(n, values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PamResult {
    pub partition: Partition,
    /// Medoid row indices, in the order the clusters are labelled.
    pub medoids: Vec<usize>,
    pub cost: f64,
    pub build_cost: f64,
    pub swaps: usize,
}

/// `a` beats `b` by more than rounding noise.
fn clearly_less(a: f64, b: f64) -> bool {
    a < b && (b - a) > 1e-12 * a.abs().max(b.abs())
}

fn total_cost(d: &DissimilarityMatrix, medoids: &[usize]) -> f64 {
    (0..d.len())
        .map(|i| medoids.iter().map(|&m| d.get(i, m)).fold(f64::INFINITY, f64::min))
        .sum()
}

/// Nearest and second-nearest medoid distance for every point.
fn nearest_two(d: &DissimilarityMatrix, medoids: &[usize]) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    let n = d.len();
    let mut near = vec![0usize; n];
    let mut dn = vec![f64::INFINITY; n];
    let mut ds = vec![f64::INFINITY; n];
    for i in 0..n {
        for (slot, &m) in medoids.iter().enumerate() {
            let v = d.get(i, m);
            if v < dn[i] {
                ds[i] = dn[i];
                dn[i] = v;
                near[i] = slot;
            } else if v < ds[i] {
                ds[i] = v;
            }
        }
    }
    (near, dn, ds)
}

/// Classic PAM: greedy BUILD, then best-improvement SWAP until no swap
/// lowers the total distance to the nearest medoid. Gains equal up to a
/// relative 1e-12 are ties and go to the lowest index, so the result is
/// deterministic.
pub fn pam(d: &DissimilarityMatrix, k: usize) -> Result<PamResult, BaselineError> {
    let n = d.len();
    if k == 0 || k > n {
        return Err(BaselineError::BadK { k, n });
    }

    // BUILD
    let mut medoids: Vec<usize> = Vec::with_capacity(k);
    let mut is_medoid = vec![false; n];
    let mut nearest = vec![f64::INFINITY; n];
    let first = (0..n)
        .map(|i| (i, (0..n).map(|j| d.get(i, j)).sum::<f64>()))
        .fold((usize::MAX, f64::INFINITY), |best, (i, s)| {
            if best.0 == usize::MAX || clearly_less(s, best.1) {
                (i, s)
            } else {
                best
            }
        });
    medoids.push(first.0);
    is_medoid[first.0] = true;
    for (j, near) in nearest.iter_mut().enumerate() {
        *near = d.get(j, first.0);
    }
    while medoids.len() < k {
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for c in (0..n).filter(|&c| !is_medoid[c]) {
            let gain: f64 = (0..n).map(|j| (nearest[j] - d.get(j, c)).max(0.0)).sum();
            if best.0 == usize::MAX || clearly_less(best.1, gain) {
                best = (c, gain);
            }
        }
        medoids.push(best.0);
        is_medoid[best.0] = true;
        for (j, near) in nearest.iter_mut().enumerate() {
            *near = near.min(d.get(j, best.0));
        }
    }
    let build_cost = total_cost(d, &medoids);

    // SWAP
    let mut swaps = 0;
    loop {
        let (near, dn, ds) = nearest_two(d, &medoids);
        let mut best = (0usize, 0usize, 0.0f64);
        for (slot, _) in medoids.iter().enumerate() {
            for h in (0..n).filter(|&h| !is_medoid[h]) {
                let mut delta = 0.0;
                for j in 0..n {
                    let djh = d.get(j, h);
                    delta += if near[j] == slot {
                        djh.min(ds[j]) - dn[j]
                    } else {
                        (djh - dn[j]).min(0.0)
                    };
                }
                if clearly_less(delta, best.2) {
                    best = (slot, h, delta);
                }
            }
        }
        // relative guard against accepting rounding noise as improvement
        let current: f64 = dn.iter().sum();
        if best.2.is_nan() || best.2 >= -1e-12 * current.max(f64::MIN_POSITIVE) {
            break;
        }
        let (slot, h, _) = best;
        is_medoid[medoids[slot]] = false;
        is_medoid[h] = true;
        medoids[slot] = h;
        swaps += 1;
    }

    let (near, dn, _) = nearest_two(d, &medoids);
    let partition = Partition::from_labels(&near).expect("non-empty");
    // reorder medoids to match first-appearance labels
    let mut ordered = vec![usize::MAX; k];
    for (i, &slot) in near.iter().enumerate() {
        let label = partition.labels()[i] - 1;
        ordered[label] = medoids[slot];
    }
    Ok(PamResult {
        partition,
        medoids: ordered,
        cost: dn.iter().sum(),
        build_cost,
        swaps,
    })
}
