//! End-to-end clustering methods compared in benchmarks.

use crate::baselines::{self, BaselineError};
use crate::coding::{build_coded_matrix, CodingError, CodingMethod};
use crate::correspondence::{CorrespondenceError, CorrespondenceView};
use crate::data::{Dataset, VariableSchema};
use crate::partition::Partition;
use crate::ward::{self, Dendrogram, WardError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Coding(#[from] CodingError),
    #[error(transparent)]
    Correspondence(#[from] CorrespondenceError),
    #[error(transparent)]
    Ward(#[from] WardError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error("{0} coding can produce negative entries and cannot feed the chi-square metric")]
    IncompatibleCoding(&'static str),
}

/// A clustering method that takes a table and a cluster count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Barycentric coding + chi-square Ward.
    MixedHierarchicalB,
    /// Triangular fuzzy coding + chi-square Ward.
    MixedHierarchicalT,
    /// Gower dissimilarity + PAM.
    GowerPam,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::MixedHierarchicalB, Method::MixedHierarchicalT, Method::GowerPam];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::MixedHierarchicalB => "mixed-hierarchical-B",
            Method::MixedHierarchicalT => "mixed-hierarchical-T",
            Method::GowerPam => "gower-pam",
        }
    }

    pub fn cluster(self, data: &Dataset, schema: &VariableSchema, k: usize) -> Result<Partition, PipelineError> {
        match self {
            Method::MixedHierarchicalB => {
                Ok(hierarchy(data, schema, CodingMethod::Barycentric)?.cut(k)?)
            }
            Method::MixedHierarchicalT => {
                Ok(hierarchy(data, schema, CodingMethod::Triangular)?.cut(k)?)
            }
            Method::GowerPam => {
                let d = baselines::gower(data, schema)?;
                Ok(baselines::pam(&d, k)?.partition)
            }
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

/// Codes the table and builds the chi-square Ward hierarchy.
pub fn hierarchy(data: &Dataset, schema: &VariableSchema, coding: CodingMethod) -> Result<Dendrogram, PipelineError> {
    if !coding.is_nonnegative() {
        return Err(PipelineError::IncompatibleCoding(coding.as_str()));
    }
    let z = build_coded_matrix(data, schema, coding)?;
    let view = CorrespondenceView::from_coded(&z)?;
    Ok(ward::ward_cluster(&view)?)
}
