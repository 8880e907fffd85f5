//! Class-based TF-IDF cluster labels.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textprep::CleanPost;

pub const DEFAULT_TOP_K: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub cluster_id: i64,
    pub name: String,
    pub top_terms: Vec<(String, f64)>,
    pub size: usize,
}

/// score(t, c) = tf(t, c) · ln(1 + A / tf_all(t)) where A is the mean number
/// of term occurrences per cluster. Ties rank lexicographically.
pub fn label_clusters(posts: &[CleanPost], labels: &[i64], k: usize) -> Result<Vec<ClusterSummary>> {
    if posts.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} posts but {} cluster labels",
            posts.len(),
            labels.len()
        )));
    }
    let mut tf: BTreeMap<i64, HashMap<&str, usize>> = BTreeMap::new();
    let mut sizes: BTreeMap<i64, usize> = BTreeMap::new();
    for (post, &label) in posts.iter().zip(labels) {
        if label < 0 {
            continue;
        }
        *sizes.entry(label).or_insert(0) += 1;
        let counts = tf.entry(label).or_default();
        for t in post.terms() {
            *counts.entry(t).or_insert(0) += 1;
        }
    }
    if sizes.is_empty() {
        return Ok(Vec::new());
    }
    let mut tf_all: HashMap<&str, usize> = HashMap::new();
    for counts in tf.values() {
        for (t, c) in counts {
            *tf_all.entry(t).or_insert(0) += c;
        }
    }
    let total: usize = tf_all.values().sum();
    let avg = total as f64 / sizes.len() as f64;

    let mut out = Vec::with_capacity(sizes.len());
    for (&cluster, &size) in &sizes {
        if size == 0 {
            return Err(Error::Internal(format!("cluster {cluster} has no members")));
        }
        let mut scored: Vec<(String, f64)> = tf[&cluster]
            .iter()
            .map(|(t, &c)| (t.to_string(), c as f64 * (1.0 + avg / tf_all[t] as f64).ln()))
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        scored.truncate(k);
        out.push(ClusterSummary {
            cluster_id: cluster,
            name: scored.first().map(|(t, _)| t.clone()).unwrap_or_default(),
            top_terms: scored,
            size,
        });
    }
    Ok(out)
}
