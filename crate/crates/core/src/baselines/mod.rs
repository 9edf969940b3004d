//! Classical variable-clustering baselines: K-means on the transposed data,
//! PAM with Manhattan distance, and agglomerative clustering on correlation
//! distance.

pub mod hierarchical;
pub mod kmeans;
pub mod pam;

pub use hierarchical::{
    agglomerate, correlation_distance, hierarchical_variables, Dendrogram, HierarchicalFit,
    Linkage, Merge,
};
pub use kmeans::{kmeans_variables, KMeansFit};
pub use pam::{manhattan_distance, pam, pam_variables, PamFit};

use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    KMeans,
    Pam,
    Hierarchical,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::KMeans => "kmeans",
            Method::Pam => "pam",
            Method::Hierarchical => "hierarchical",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Method::KMeans, Method::Pam, Method::Hierarchical]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineSpec {
    pub method: Method,
    /// Target number of clusters.
    pub m: usize,
    /// Only used by the hierarchical method.
    pub linkage: Linkage,
    /// Lloyd iterations for K-means, swaps for PAM.
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl BaselineSpec {
    pub fn new(method: Method, m: usize) -> Self {
        Self {
            method,
            m,
            linkage: Linkage::Average,
            max_iter: 300,
            restarts: 10,
            seed: 1,
        }
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if self.m == 0 || self.m > k {
            return Err(Error::Config(format!("m = {} must lie in 1..={k}", self.m)));
        }
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be positive".into()));
        }
        Ok(())
    }
}

/// Labels from whichever method `spec` names.
pub fn cluster_variables(data: &crate::model::Dataset, spec: &BaselineSpec) -> Result<Vec<usize>> {
    Ok(match spec.method {
        Method::KMeans => kmeans_variables(data, spec)?.labels,
        Method::Pam => pam_variables(data, spec)?.labels,
        Method::Hierarchical => hierarchical_variables(data, spec)?.labels,
    })
}
