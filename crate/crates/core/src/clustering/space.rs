//! Point storage with a sparse index so distances between mostly-zero
//! vectors cost O(non-zeros) instead of O(dimension).

use rayon::prelude::*;

use super::Metric;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) struct PointSpace {
    values: Vec<Vec<f64>>,
    nonzero: Vec<Vec<u32>>,
}

impl PointSpace {
    pub(crate) fn new(vectors: &[Vec<f64>], metric: Metric) -> Result<Self> {
        let dim = vectors.first().map_or(0, Vec::len);
        if let Some(i) = vectors.iter().position(|v| v.len() != dim) {
            return Err(Error::InvalidInput(format!(
                "vector {i} has dimension {} but vector 0 has {dim}",
                vectors[i].len()
            )));
        }
        if let Some(i) = vectors.iter().position(|v| v.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidInput(format!("vector {i} contains a non-finite value")));
        }
        let values: Vec<Vec<f64>> = vectors
            .par_iter()
            .map(|v| match metric {
                Metric::Euclidean => v.clone(),
                Metric::Cosine => {
                    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if n == 0.0 {
                        v.clone()
                    } else {
                        v.iter().map(|x| x / n).collect()
                    }
                }
            })
            .collect();
        let nonzero = values
            .iter()
            .map(|v| {
                v.iter()
                    .enumerate()
                    .filter(|(_, x)| **x != 0.0)
                    .map(|(i, _)| i as u32)
                    .collect()
            })
            .collect();
        Ok(PointSpace { values, nonzero })
    }

    pub(crate) fn len(&self) -> usize {
        self.values.len()
    }

    /// Euclidean distance. Terms are summed in coordinate order over the union
    /// of non-zero coordinates, which gives the same value as the dense sum
    /// and is symmetric in its arguments.
    pub(crate) fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (&self.values[i], &self.values[j]);
        let (na, nb) = (&self.nonzero[i], &self.nonzero[j]);
        let (mut x, mut y) = (0, 0);
        let mut sum = 0.0;
        while x < na.len() || y < nb.len() {
            let k = match (na.get(x), nb.get(y)) {
                (Some(&p), Some(&q)) if p == q => {
                    x += 1;
                    y += 1;
                    p
                }
                (Some(&p), Some(&q)) if p < q => {
                    x += 1;
                    p
                }
                (Some(&p), None) => {
                    x += 1;
                    p
                }
                (_, Some(&q)) => {
                    y += 1;
                    q
                }
                (None, None) => unreachable!(),
            } as usize;
            let d = a[k] - b[k];
            sum += d * d;
        }
        sum.sqrt()
    }
}
