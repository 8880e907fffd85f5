//! Density-based clustering (HDBSCAN) of post vectors and cluster labeling.
//!
//! Stages: core distances → mutual-reachability MST (Prim) → single-linkage
//! hierarchy → condensed tree → excess-of-mass cluster selection.

mod labeling;
mod mst;
mod space;
mod tree;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use labeling::{label_clusters, ClusterSummary, DEFAULT_TOP_K};
pub use mst::{mutual_reachability, MstEdge};
pub use tree::{condense_tree, extract_clusters, stabilities, CondensedEdge, CondensedTree, Extraction};

use space::PointSpace;

pub const DEFAULT_MIN_CLUSTER_SIZE: usize = 15;
pub const DEFAULT_LAMBDA_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
    /// Euclidean distance between L2-normalized vectors.
    Cosine,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Euclidean => "euclidean",
            Metric::Cosine => "cosine",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "euclidean" => Ok(Metric::Euclidean),
            "cosine" => Ok(Metric::Cosine),
            other => Err(Error::Config(format!("unknown metric `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HdbscanParams {
    pub min_cluster_size: usize,
    /// Neighbour rank for core distances; defaults to `min_cluster_size`.
    pub min_samples: Option<usize>,
    pub metric: Metric,
    /// Distances at or below this are treated as this value when converted
    /// to λ = 1/distance.
    pub lambda_epsilon: f64,
}

impl Default for HdbscanParams {
    fn default() -> Self {
        HdbscanParams {
            min_cluster_size: DEFAULT_MIN_CLUSTER_SIZE,
            min_samples: None,
            metric: Metric::Euclidean,
            lambda_epsilon: DEFAULT_LAMBDA_EPSILON,
        }
    }
}

impl HdbscanParams {
    pub fn new(min_cluster_size: usize) -> Self {
        HdbscanParams { min_cluster_size, ..Self::default() }
    }

    pub fn with_min_samples(mut self, k: usize) -> Self {
        self.min_samples = Some(k);
        self
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }

    pub fn min_samples(&self) -> usize {
        self.min_samples.unwrap_or(self.min_cluster_size)
    }

    pub fn lambda_max(&self) -> f64 {
        1.0 / self.lambda_epsilon
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.min_cluster_size < 2 {
            return Err(Error::Parameter(format!(
                "min_cluster_size must be >= 2, got {}",
                self.min_cluster_size
            )));
        }
        if !(self.lambda_epsilon > 0.0 && self.lambda_epsilon.is_finite()) {
            return Err(Error::Parameter(format!(
                "lambda_epsilon must be positive, got {}",
                self.lambda_epsilon
            )));
        }
        let k = self.min_samples();
        if k == 0 || k >= n {
            return Err(Error::Parameter(format!(
                "min_samples must be in 1..{n} for {n} points, got {k}"
            )));
        }
        Ok(())
    }
}

/// Euclidean distance from each vector to its k-th nearest other vector.
pub fn core_distances(vectors: &[Vec<f64>], k: usize) -> Result<Vec<f64>> {
    mst::core_distances_in(&PointSpace::new(vectors, Metric::Euclidean)?, k)
}

/// Minimum spanning tree of the mutual-reachability graph, in Prim order.
pub fn build_mst(vectors: &[Vec<f64>], params: &HdbscanParams) -> Result<Vec<MstEdge>> {
    params.validate(vectors.len())?;
    let space = PointSpace::new(vectors, params.metric)?;
    let core = mst::core_distances_in(&space, params.min_samples())?;
    Ok(mst::prim_in(&space, &core))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub params: HdbscanParams,
    /// Per input vector: cluster index `0..k`, or −1 for noise.
    pub labels: Vec<i64>,
    pub root_lambda: f64,
    pub condensed_tree: Vec<CondensedEdge>,
    /// Stability of every condensed-tree cluster, keyed by tree id.
    pub stabilities: BTreeMap<usize, f64>,
    /// Tree ids of the selected clusters; position = label.
    pub selected: Vec<usize>,
    pub mst_edges: Vec<MstEdge>,
    pub summaries: Vec<ClusterSummary>,
}

impl ClusterModel {
    pub fn n_clusters(&self) -> usize {
        self.selected.len()
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l < 0).count()
    }

    pub fn cluster_sizes(&self) -> BTreeMap<i64, usize> {
        let mut out = BTreeMap::new();
        for &l in self.labels.iter().filter(|&&l| l >= 0) {
            *out.entry(l).or_insert(0) += 1;
        }
        out
    }

    pub fn condensed(&self) -> CondensedTree {
        CondensedTree {
            n_points: self.labels.len(),
            root_lambda: self.root_lambda,
            edges: self.condensed_tree.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Internal(format!("serializing cluster model: {e}")))
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut s = self.to_json()?;
        s.push('\n');
        fs::write(path, s).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&s).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
    }
}

/// Full HDBSCAN run. Summaries are left empty; see [`label_clusters`].
pub fn hdbscan(vectors: &[Vec<f64>], params: &HdbscanParams) -> Result<ClusterModel> {
    let n = vectors.len();
    let mst_edges = build_mst(vectors, params)?;
    let tree = condense_tree(&mst_edges, n, params.min_cluster_size, params.lambda_max());
    let ex = extract_clusters(&tree, params.min_cluster_size);
    log::info!(
        "hdbscan: {n} points, {} clusters, {} noise",
        ex.selected.len(),
        ex.labels.iter().filter(|&&l| l < 0).count()
    );
    Ok(ClusterModel {
        params: *params,
        labels: ex.labels,
        root_lambda: tree.root_lambda,
        condensed_tree: tree.edges,
        stabilities: ex.stabilities,
        selected: ex.selected,
        mst_edges,
        summaries: Vec::new(),
    })
}
