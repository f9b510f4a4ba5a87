//! Clustering of mixed-type tabular data through barycentric coding and
//! mass-weighted Ward agglomeration under the chi-square distance.
//!
//! The pipeline is:
//!
//! 1. [`coding`] turns every column of a [`Dataset`] into a block of
//!    nonnegative columns. Nominal variables become dummy (0/1) blocks,
//!    continuous variables are first mapped onto an m-point ordinal scale
//!    and then, like ordinal variables, spread into n fuzzy categories whose
//!    memberships sum to one.
//! 2. [`correspondence`] treats the coded matrix as a contingency table and
//!    exposes masses, row profiles and chi-square distances.
//! 3. [`ward`] agglomerates rows with the mass-weighted Ward criterion,
//!    producing a [`Dendrogram`] whose merge costs decompose the total
//!    inertia; [`ward::select_k`] picks a cluster count from the gains.
//!
//! [`baselines`] (Gower + PAM), [`eval`] (adjusted Rand index, profiles) and
//! [`simgen`] (Gaussian mixtures with controlled overlap) support method
//! comparison.

pub mod baselines;
pub mod coding;
pub mod correspondence;
pub mod data;
pub mod eval;
pub mod partition;
pub mod pipeline;
pub mod simgen;
pub mod ward;

pub use coding::{build_coded_matrix, CodedMatrix, CodingMethod};
pub use correspondence::CorrespondenceView;
pub use data::{ColumnData, ColumnSpec, Dataset, RawTable, VariableKind, VariableSchema};
pub use partition::Partition;
pub use pipeline::Method;
pub use ward::{ward_cluster, Dendrogram};
