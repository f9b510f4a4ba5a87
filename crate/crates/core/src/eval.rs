//! Partition agreement and cluster descriptions.

use crate::data::{ColumnData, Dataset};
use crate::partition::Partition;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("partitions have different lengths ({0} and {1})")]
    LengthMismatch(usize, usize),
}

/// Cross-tabulation of two partitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    /// Row-major `k1 x k2` counts.
    pub counts: Vec<u64>,
    pub k1: usize,
    pub k2: usize,
    pub row_sums: Vec<u64>,
    pub col_sums: Vec<u64>,
    pub total: u64,
}

impl ContingencyTable {
    pub fn new(p: &Partition, q: &Partition) -> Result<Self, EvalError> {
        if p.len() != q.len() {
            return Err(EvalError::LengthMismatch(p.len(), q.len()));
        }
        let (k1, k2) = (p.k(), q.k());
        let mut counts = vec![0u64; k1 * k2];
        for (&a, &b) in p.labels().iter().zip(q.labels()) {
            counts[(a - 1) * k2 + (b - 1)] += 1;
        }
        let row_sums = counts.chunks(k2).map(|r| r.iter().sum()).collect();
        let col_sums = (0..k2).map(|j| (0..k1).map(|i| counts[i * k2 + j]).sum()).collect();
        Ok(ContingencyTable {
            counts,
            k1,
            k2,
            row_sums,
            col_sums,
            total: p.len() as u64,
        })
    }
}

fn pairs(n: u64) -> i128 {
    let n = n as i128;
    n * (n - 1) / 2
}

/// Adjusted Rand index with its degenerate-case flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AriOutcome {
    pub value: f64,
    /// The chance-corrected denominator vanished (e.g. both partitions are
    /// all-singletons or single-cluster). `value` is then 1 for identical
    /// partitions and 0 otherwise.
    pub degenerate: bool,
}

/// Hubert-Arabie adjusted Rand index from pair counts. The counts are kept
/// as integers and the index is formed by a single final division, so
/// rational values such as -1/2 come out exactly.
pub fn ari_detailed(p: &Partition, q: &Partition) -> Result<AriOutcome, EvalError> {
    let t = ContingencyTable::new(p, q)?;
    let index: i128 = t.counts.iter().map(|&c| pairs(c)).sum();
    let sum_a: i128 = t.row_sums.iter().map(|&c| pairs(c)).sum();
    let sum_b: i128 = t.col_sums.iter().map(|&c| pairs(c)).sum();
    let total = pairs(t.total);
    // (index - a b / T) / ((a + b) / 2 - a b / T), scaled by 2T
    let num = 2 * total * index - 2 * sum_a * sum_b;
    let den = total * (sum_a + sum_b) - 2 * sum_a * sum_b;
    if den == 0 {
        let identical = p.canonical() == q.canonical();
        return Ok(AriOutcome {
            value: if identical { 1.0 } else { 0.0 },
            degenerate: true,
        });
    }
    Ok(AriOutcome {
        value: num as f64 / den as f64,
        degenerate: false,
    })
}

pub fn ari(p: &Partition, q: &Partition) -> Result<f64, EvalError> {
    ari_detailed(p, q).map(|o| o.value)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanComparison {
    pub variable: String,
    pub cluster_mean: f64,
    pub overall_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryFrequency {
    pub category: String,
    pub within: f64,
    pub overall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyComparison {
    pub variable: String,
    pub categories: Vec<CategoryFrequency>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterSummary {
    pub cluster: usize,
    pub size: usize,
    pub share: f64,
    pub means: Vec<MeanComparison>,
    pub frequencies: Vec<FrequencyComparison>,
}

/// Per-cluster size and share, means of continuous variables, and category
/// frequencies of nominal and ordinal variables, each next to the overall
/// value.
pub fn cluster_profile(p: &Partition, data: &Dataset) -> Result<Vec<ClusterSummary>, EvalError> {
    if p.len() != data.rows() {
        return Err(EvalError::LengthMismatch(p.len(), data.rows()));
    }
    let n = data.rows() as f64;
    let sizes = p.sizes();
    let mut out: Vec<ClusterSummary> = sizes
        .iter()
        .enumerate()
        .map(|(c, &size)| ClusterSummary {
            cluster: c + 1,
            size,
            share: size as f64 / n,
            means: Vec::new(),
            frequencies: Vec::new(),
        })
        .collect();
    let k = p.k();
    for col in data.columns() {
        match &col.data {
            ColumnData::Continuous(values) => {
                let overall = values.iter().sum::<f64>() / n;
                let mut sums = vec![0.0; k];
                for (&l, v) in p.labels().iter().zip(values) {
                    sums[l - 1] += v;
                }
                for (c, summary) in out.iter_mut().enumerate() {
                    summary.means.push(MeanComparison {
                        variable: col.name.clone(),
                        cluster_mean: sums[c] / sizes[c] as f64,
                        overall_mean: overall,
                    });
                }
            }
            ColumnData::Ordinal(levels) => {
                let labels: Vec<String> = levels.iter().map(|l| l.to_string()).collect();
                push_frequencies(&mut out, p, &col.name, &labels, &sizes);
            }
            ColumnData::Nominal(labels) => push_frequencies(&mut out, p, &col.name, labels, &sizes),
        }
    }
    Ok(out)
}

fn push_frequencies(out: &mut [ClusterSummary], p: &Partition, name: &str, values: &[String], sizes: &[usize]) {
    let mut categories: Vec<&str> = Vec::new();
    let codes: Vec<usize> = values
        .iter()
        .map(|v| match categories.iter().position(|c| *c == v) {
            Some(i) => i,
            None => {
                categories.push(v);
                categories.len() - 1
            }
        })
        .collect();
    let w = categories.len();
    let mut within = vec![0usize; p.k() * w];
    let mut overall = vec![0usize; w];
    for (&l, &c) in p.labels().iter().zip(&codes) {
        within[(l - 1) * w + c] += 1;
        overall[c] += 1;
    }
    let n = values.len() as f64;
    for (cl, summary) in out.iter_mut().enumerate() {
        summary.frequencies.push(FrequencyComparison {
            variable: name.to_string(),
            categories: categories
                .iter()
                .enumerate()
                .map(|(c, cat)| CategoryFrequency {
                    category: cat.to_string(),
                    within: within[cl * w + c] as f64 / sizes[cl] as f64,
                    overall: overall[c] as f64 / n,
                })
                .collect(),
        });
    }
}
