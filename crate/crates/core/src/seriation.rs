//! Reordering by mean distance and min-max normalisation.

use alloc::string::String;
use alloc::vec::Vec;

use crate::dtw::{DistanceMatrix, LocalMetric};
use crate::error::{Error, Result};

/// Distance matrix in seriated order, scaled into `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeriatedMatrix {
    /// `order[k]` is the original index of the asset shown at position `k`.
    pub order: Vec<usize>,
    /// Labels in seriated order.
    pub labels: Vec<String>,
    pub metric: LocalMetric,
    /// Raw maximum distance used as the denominator.
    pub max_raw: f64,
    values: Vec<f64>,
}

impl SeriatedMatrix {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Normalised distance at seriated position `(i, j)`, zero-based.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.len() + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.values.chunks(self.len()).map(|r| r.iter().sum()).collect()
    }

    /// The normalised values as a distance matrix in seriated order.
    pub fn to_distance_matrix(&self) -> DistanceMatrix {
        DistanceMatrix::from_rows(self.labels.clone(), self.metric, self.values.clone())
            .expect("normalised matrix keeps distance-matrix invariants")
    }
}

/// Permutation sorting assets by ascending row sum; the asset with the
/// largest mean distance to all others comes last. Ties keep input order.
pub fn order_by_mean_distance(d: &DistanceMatrix) -> Vec<usize> {
    let sums: Vec<f64> = (0..d.len()).map(|i| d.row(i).iter().sum()).collect();
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| sums[a].total_cmp(&sums[b]));
    order
}

/// Applies `order` to rows and columns and divides by the largest entry.
pub fn normalize_minmax(d: &DistanceMatrix, order: &[usize]) -> Result<SeriatedMatrix> {
    let n = d.len();
    let mut seen = alloc::vec![false; n];
    if order.len() != n || !order.iter().all(|&k| k < n && !core::mem::replace(&mut seen[k], true)) {
        return Err(Error::InvalidParameter {
            name: "order",
            value: order.len() as f64,
            expected: "a permutation of the matrix indices",
        });
    }
    let max_raw = d.max();
    if !(max_raw > 0.0) {
        return Err(Error::DegenerateMatrix);
    }
    let mut values = Vec::with_capacity(n * n);
    for &i in order {
        values.extend(order.iter().map(|&j| d.get(i, j) / max_raw));
    }
    Ok(SeriatedMatrix {
        order: order.to_vec(),
        labels: order.iter().map(|&i| d.labels()[i].clone()).collect(),
        metric: d.metric(),
        max_raw,
        values,
    })
}

/// [`order_by_mean_distance`] followed by [`normalize_minmax`].
pub fn seriate(d: &DistanceMatrix) -> Result<SeriatedMatrix> {
    if d.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "matrix size",
            value: d.len() as f64,
            expected: "at least 2",
        });
    }
    normalize_minmax(d, &order_by_mean_distance(d))
}
