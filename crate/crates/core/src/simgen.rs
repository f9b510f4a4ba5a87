//! Synthetic mixed-type data: spherical Gaussian clusters with a target
//! pairwise overlap, some of whose columns are cut at empirical quantiles
//! into categorical variables.
//!
//! The overlap of two equal-weight unit-variance spherical clusters whose
//! centers are `delta` apart is the sum of both misclassification
//! probabilities of the Bayes rule, `2 Phi(-delta / 2)`. Centers sit on a
//! regular simplex with edge `delta`, randomly rotated so that the separation
//! is shared by all variables, continuous and categorical alike.

use crate::data::{Column, ColumnData, ColumnSpec, Dataset, VariableKind, VariableSchema};
use crate::eval;
use crate::partition::Partition;
use crate::pipeline::{Method, PipelineError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("overlap must lie in (0, 1), got {0}")]
    BadOmega(f64),
    #[error("sigma must be positive, got {0}")]
    BadSigma(f64),
    #[error("infeasible design: {0}")]
    InfeasibleDesign(String),
    #[error("{method} failed on scenario {scenario}, replicate {replicate}: {message}")]
    Method {
        method: &'static str,
        scenario: usize,
        replicate: usize,
        message: String,
    },
}

/// How cluster sizes are set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Density {
    /// N/K rows per cluster.
    Equal,
    /// 10% of the rows in cluster 1, the rest split equally.
    One10,
    /// 60% of the rows in cluster 1, the rest split equally.
    One60,
}

impl Density {
    pub const ALL: [Density; 3] = [Density::Equal, Density::One10, Density::One60];

    pub fn as_str(self) -> &'static str {
        match self {
            Density::Equal => "equal",
            Density::One10 => "one10",
            Density::One60 => "one60",
        }
    }
}

impl std::str::FromStr for Density {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Density::ALL
            .into_iter()
            .find(|d| d.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown density `{s}` (expected equal, one10 or one60)"))
    }
}

fn default_dims() -> usize {
    10
}

fn default_cat_levels() -> usize {
    4
}

fn default_categorical_kind() -> VariableKind {
    VariableKind::Nominal
}

/// One simulation scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimDesign {
    pub k: usize,
    pub n: usize,
    pub density: Density,
    /// Pairwise overlap target.
    pub overlap: f64,
    /// Share of the variables that are discretized.
    pub cat_fraction: f64,
    #[serde(default = "default_dims")]
    pub dims: usize,
    #[serde(default = "default_cat_levels")]
    pub cat_levels: usize,
    /// Kind given to discretized columns in the schema.
    #[serde(default = "default_categorical_kind")]
    pub categorical_kind: VariableKind,
    #[serde(default)]
    pub seed: u64,
}

impl SimDesign {
    pub fn new(k: usize, n: usize, density: Density, overlap: f64, cat_fraction: f64) -> Self {
        SimDesign {
            k,
            n,
            density,
            overlap,
            cat_fraction,
            dims: default_dims(),
            cat_levels: default_cat_levels(),
            categorical_kind: default_categorical_kind(),
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn categorical_columns(&self) -> usize {
        (self.cat_fraction * self.dims as f64).round() as usize
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InfeasibleDesign(msg));
        if !(self.overlap > 0.0 && self.overlap < 1.0) {
            return Err(SimError::BadOmega(self.overlap));
        }
        if self.k == 0 {
            return bad("K must be at least 1".into());
        }
        if self.n < self.k {
            return bad(format!("N = {} is smaller than K = {}", self.n, self.k));
        }
        if self.dims == 0 {
            return bad("dims must be at least 1".into());
        }
        if self.k > self.dims {
            return bad(format!("K = {} centers need at least {} dimensions, got {}", self.k, self.k, self.dims));
        }
        if !(0.0..=1.0).contains(&self.cat_fraction) {
            return bad(format!("cat_fraction {} outside [0, 1]", self.cat_fraction));
        }
        if self.cat_levels < 2 {
            return bad(format!("cat_levels must be at least 2, got {}", self.cat_levels));
        }
        if self.categorical_kind == VariableKind::Continuous {
            return bad("discretized columns cannot be continuous".into());
        }
        if cluster_sizes(self.n, self.k, self.density).contains(&0) {
            return bad(format!(
                "density {} leaves an empty cluster with N = {}, K = {}",
                self.density.as_str(),
                self.n,
                self.k
            ));
        }
        Ok(())
    }
}

/// Rows per cluster. Uneven splits give the extra rows to the earliest
/// clusters of the equally divided part.
pub fn cluster_sizes(n: usize, k: usize, density: Density) -> Vec<usize> {
    if k == 0 {
        return Vec::new();
    }
    let split = |total: usize, parts: usize| -> Vec<usize> {
        let base = total / parts;
        let extra = total % parts;
        (0..parts).map(|i| base + (i < extra) as usize).collect()
    };
    let first_share = match density {
        Density::Equal => return split(n, k),
        Density::One10 => 0.1,
        Density::One60 => 0.6,
    };
    if k == 1 {
        return vec![n];
    }
    let first = ((n as f64 * first_share).round() as usize).min(n);
    let mut sizes = vec![first];
    sizes.extend(split(n - first, k - 1));
    sizes
}

/// Centroid distance giving overlap `omega` between two spherical clusters
/// with standard deviation `sigma`.
pub fn overlap_to_separation(omega: f64, sigma: f64) -> Result<f64, SimError> {
    if !(omega > 0.0 && omega < 1.0) {
        return Err(SimError::BadOmega(omega));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(SimError::BadSigma(sigma));
    }
    let std = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(-2.0 * sigma * std.inverse_cdf(omega / 2.0))
}

/// Inverse of [`overlap_to_separation`].
pub fn separation_to_overlap(delta: f64, sigma: f64) -> f64 {
    let std = Normal::new(0.0, 1.0).expect("standard normal");
    2.0 * std.cdf(-delta / (2.0 * sigma))
}

/// Generated table with its ground truth.
#[derive(Debug, Clone)]
pub struct SimDataset {
    pub dataset: Dataset,
    pub schema: VariableSchema,
    pub true_labels: Partition,
    pub metadata: SimMetadata,
    /// Row-major `n x dims` Gaussian draws before discretization.
    pub latent: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimMetadata {
    pub design: SimDesign,
    pub separation: f64,
    pub sizes: Vec<usize>,
    /// Row-major `k x dims` cluster centers.
    pub centers: Vec<f64>,
    pub categorical_columns: Vec<String>,
    pub generator: String,
}

const GENERATOR_NOTE: &str =
    "spherical unit-variance Gaussian clusters, rotated regular-simplex centers, closed-form pairwise overlap";

/// Random orthonormal `dims x dims` matrix (Gram-Schmidt on Gaussian draws).
fn random_rotation(rng: &mut ChaCha8Rng, dims: usize) -> Vec<f64> {
    loop {
        let mut q: Vec<f64> = (0..dims * dims).map(|_| rng.sample(StandardNormal)).collect();
        let mut ok = true;
        for i in 0..dims {
            for j in 0..i {
                let dot: f64 = (0..dims).map(|c| q[i * dims + c] * q[j * dims + c]).sum();
                for c in 0..dims {
                    q[i * dims + c] -= dot * q[j * dims + c];
                }
            }
            let norm = (0..dims).map(|c| q[i * dims + c].powi(2)).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            for c in 0..dims {
                q[i * dims + c] /= norm;
            }
        }
        if ok {
            return q;
        }
    }
}

/// Regular simplex with edge `delta`: `delta / sqrt(2) e_k`, rotated.
fn simplex_centers(k: usize, dims: usize, delta: f64, rotation: &[f64]) -> Vec<f64> {
    let scale = delta / std::f64::consts::SQRT_2;
    let mut centers = vec![0.0; k * dims];
    for g in 0..k {
        for c in 0..dims {
            centers[g * dims + c] = scale * rotation[g * dims + c];
        }
    }
    centers
}

/// Ranks values (ties by position) and cuts the ranks into `levels` groups
/// of as equal size as possible, labelled 1..=levels.
pub fn quantile_discretize(values: &[f64], levels: usize) -> Vec<u64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut out = vec![0u64; n];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = (rank * levels / n) as u64 + 1;
    }
    out
}

fn column_name(index: usize, dims: usize) -> String {
    let width = dims.to_string().len();
    format!("v{:0width$}", index + 1)
}

/// Draws one dataset. Categorical columns come first.
pub fn generate(design: &SimDesign) -> Result<SimDataset, SimError> {
    design.validate()?;
    let (k, n, dims) = (design.k, design.n, design.dims);
    let delta = overlap_to_separation(design.overlap, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(design.seed);
    let rotation = random_rotation(&mut rng, dims);
    let centers = simplex_centers(k, dims, delta, &rotation);
    let sizes = cluster_sizes(n, k, design.density);

    let mut latent = Vec::with_capacity(n * dims);
    let mut labels = Vec::with_capacity(n);
    for (g, &size) in sizes.iter().enumerate() {
        for _ in 0..size {
            for c in 0..dims {
                let z: f64 = rng.sample(StandardNormal);
                latent.push(centers[g * dims + c] + z);
            }
            labels.push(g + 1);
        }
    }

    let n_cat = design.categorical_columns();
    let mut columns = Vec::with_capacity(dims);
    let mut specs = Vec::with_capacity(dims);
    let mut categorical_columns = Vec::with_capacity(n_cat);
    for c in 0..dims {
        let name = column_name(c, dims);
        let values: Vec<f64> = (0..n).map(|i| latent[i * dims + c]).collect();
        if c < n_cat {
            let levels = quantile_discretize(&values, design.cat_levels);
            let (data, spec) = match design.categorical_kind {
                VariableKind::Ordinal => (
                    ColumnData::Ordinal(levels),
                    ColumnSpec::ordinal(name.clone(), design.cat_levels as u64),
                ),
                _ => (
                    ColumnData::Nominal(levels.iter().map(|l| l.to_string()).collect()),
                    ColumnSpec::new(name.clone(), VariableKind::Nominal),
                ),
            };
            categorical_columns.push(name.clone());
            columns.push(Column { name, data });
            specs.push(spec);
        } else {
            specs.push(ColumnSpec::new(name.clone(), VariableKind::Continuous));
            columns.push(Column {
                name,
                data: ColumnData::Continuous(values),
            });
        }
    }
    let dataset = Dataset::new(columns).map_err(|e| SimError::InfeasibleDesign(e.to_string()))?;
    let schema = VariableSchema::new(specs).map_err(|e| SimError::InfeasibleDesign(e.to_string()))?;
    let true_labels = Partition::new(labels).map_err(|e| SimError::InfeasibleDesign(e.to_string()))?;
    Ok(SimDataset {
        dataset,
        schema,
        true_labels,
        metadata: SimMetadata {
            design: design.clone(),
            separation: delta,
            sizes,
            centers,
            categorical_columns,
            generator: GENERATOR_NOTE.to_string(),
        },
        latent,
    })
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one (scenario, replicate) cell, independent of scheduling.
pub fn replicate_seed(master: u64, scenario: usize, replicate: usize) -> u64 {
    splitmix(splitmix(splitmix(master) ^ scenario as u64) ^ replicate as u64)
}

/// One line of the benchmark table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub k: usize,
    pub n: usize,
    pub density: Density,
    pub overlap: f64,
    pub cat_fraction: f64,
    pub dims: usize,
    pub cat_levels: usize,
    pub method: String,
    pub replicate: usize,
    pub ari: f64,
}

/// Partitions found by every method on one replicate.
#[derive(Debug, Clone)]
pub struct ReplicateOutcome {
    pub scenario: usize,
    pub replicate: usize,
    pub seed: u64,
    pub truth: Partition,
    pub partitions: Vec<(Method, Partition)>,
}

fn method_error(method: Method, scenario: usize, replicate: usize, e: PipelineError) -> SimError {
    SimError::Method {
        method: method.as_str(),
        scenario,
        replicate,
        message: e.to_string(),
    }
}

/// Runs every method on every replicate of every design, giving each method
/// the true K. Output is ordered by scenario, replicate, then method.
pub fn run_replicates(
    designs: &[SimDesign],
    methods: &[Method],
    replicates: usize,
    master_seed: u64,
) -> Result<Vec<ReplicateOutcome>, SimError> {
    for d in designs {
        d.validate()?;
    }
    let cells: Vec<(usize, usize)> = (0..designs.len())
        .flat_map(|s| (0..replicates).map(move |r| (s, r)))
        .collect();
    cells
        .into_par_iter()
        .map(|(s, r)| {
            let seed = replicate_seed(master_seed, s, r);
            let sim = generate(&designs[s].clone().with_seed(seed))?;
            let partitions = methods
                .iter()
                .map(|&m| {
                    m.cluster(&sim.dataset, &sim.schema, designs[s].k)
                        .map(|p| (m, p))
                        .map_err(|e| method_error(m, s, r, e))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(ReplicateOutcome {
                scenario: s,
                replicate: r,
                seed,
                truth: sim.true_labels,
                partitions,
            })
        })
        .collect()
}

/// ARI of every method against the truth, one row per
/// (scenario, replicate, method).
pub fn run_grid(
    designs: &[SimDesign],
    methods: &[Method],
    replicates: usize,
    master_seed: u64,
) -> Result<Vec<ResultRow>, SimError> {
    let outcomes = run_replicates(designs, methods, replicates, master_seed)?;
    Ok(result_rows(designs, &outcomes))
}

pub fn result_rows(designs: &[SimDesign], outcomes: &[ReplicateOutcome]) -> Vec<ResultRow> {
    let mut rows = Vec::new();
    for o in outcomes {
        let d = &designs[o.scenario];
        for (m, p) in &o.partitions {
            rows.push(ResultRow {
                k: d.k,
                n: d.n,
                density: d.density,
                overlap: d.overlap,
                cat_fraction: d.cat_fraction,
                dims: d.dims,
                cat_levels: d.cat_levels,
                method: m.as_str().to_string(),
                replicate: o.replicate,
                ari: eval::ari(&o.truth, p).expect("same length"),
            });
        }
    }
    rows
}
