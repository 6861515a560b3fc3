//! Clustering back ends over feature vectors.
//!
//! * [`kmeans`]: Lloyd iterations with k-means++ seeding, multiple restarts and
//!   a minimum-cluster-size repair.
//! * [`single_linkage_threshold`]: threshold graph on the non-overlapping grid,
//!   connected components, patch fill and nearest-seed propagation.
//! * [`agglomerative`]: single or Ward linkage cut at `k` clusters under a size floor.

mod kmeans;
mod linkage;
mod union_find;

pub use kmeans::{
    eval_linf_objective, eval_sq_euclid_objective, kmeans, ClusterResult, KMeansParams,
};
pub use linkage::{
    agglomerative, single_linkage_dendrogram, single_linkage_threshold, theoretical_threshold,
    threshold_components, ward_dendrogram, Dendrogram, Linkage, LinkageMode, LinkageParams, Merge,
};
pub use union_find::UnionFind;

use crate::error::{Error, Result};

/// Borrowed row-major point matrix.
#[derive(Clone, Copy, Debug)]
pub struct Points<'a> {
    data: &'a [f64],
    dim: usize,
}

impl<'a> Points<'a> {
    pub fn new(data: &'a [f64], dim: usize) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::invalid(format!(
                "{} values do not split into points of dimension {dim}",
                data.len()
            )));
        }
        Ok(Self { data, dim })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize) -> &'a [f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &'a [f64]> + 'a {
        self.data.chunks_exact(self.dim)
    }
}

/// Distance between feature vectors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Metric {
    #[default]
    Linf,
    L2,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Linf => a
                .iter()
                .zip(b)
                .fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs())),
            Metric::L2 => sq_dist(a, b).sqrt(),
        }
    }
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// One-hot `n x k` membership matrix, bijective with a label list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembershipMatrix {
    k: usize,
    data: Vec<u8>,
}

impl MembershipMatrix {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.k
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    pub fn to_labels(&self) -> Vec<u32> {
        self.data
            .chunks_exact(self.k)
            .map(|row| row.iter().position(|&v| v == 1).expect("one-hot row") as u32)
            .collect()
    }
}

pub fn labels_to_membership(labels: &[u32], k: usize) -> Result<MembershipMatrix> {
    if k == 0 {
        return Err(Error::invalid("membership matrix needs k >= 1"));
    }
    let mut data = vec![0u8; labels.len() * k];
    for (i, &l) in labels.iter().enumerate() {
        if l as usize >= k {
            return Err(Error::invalid(format!(
                "label {l} out of range for k = {k}"
            )));
        }
        data[i * k + l as usize] = 1;
    }
    Ok(MembershipMatrix { k, data })
}
