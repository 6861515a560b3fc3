//! Field in, label map out: feature extraction plus one clustering back end.

use crate::clustering::{
    agglomerative, kmeans, single_linkage_threshold, theoretical_threshold, ClusterResult,
    KMeansParams, Linkage, LinkageParams, Metric, Points,
};
use crate::error::{Error, Result};
use crate::features::{all_features, feature_vector, subsample_grid, Padding, PatchParams};
use crate::grid::{Field, LabelMap};
use crate::seed::Seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// k-means over every pixel's feature.
    KMeans,
    /// Threshold single linkage on the non-overlapping grid.
    SingleLinkThreshold,
    /// Single linkage cut at `k`, on a regular pixel sample.
    SingleLinkK,
    /// Ward linkage cut at `k`, on a regular pixel sample.
    Ward,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::KMeans,
        Algorithm::SingleLinkThreshold,
        Algorithm::SingleLinkK,
        Algorithm::Ward,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::KMeans => "kmeans",
            Algorithm::SingleLinkThreshold => "slink-threshold",
            Algorithm::SingleLinkK => "slink-k",
            Algorithm::Ward => "ward",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SegmentParams {
    pub algorithm: Algorithm,
    pub k: usize,
    /// Patch half-width; `None` picks `round(sqrt(max(rows, cols)))`.
    pub half_width: Option<usize>,
    pub padding: Padding,
    pub with_location: bool,
    /// Threshold for [`Algorithm::SingleLinkThreshold`]; `None` uses the theoretical value for `beta`.
    pub threshold: Option<f64>,
    pub beta: f64,
    /// `None` picks a quarter of the balanced cluster size.
    pub min_cluster_size: Option<usize>,
    pub restarts: usize,
    pub seed: Seed,
    pub metric: Metric,
    /// Upper bound on the pixel sample used by the two dendrogram algorithms.
    pub linkage_points: usize,
    /// Spacing of that sample; `None` uses `ceil(2 (2m + 1) / 3)` so that
    /// neighbouring samples share at most a third of their patch width.
    pub sample_stride: Option<usize>,
}

impl SegmentParams {
    pub fn new(algorithm: Algorithm, k: usize) -> Self {
        Self {
            algorithm,
            k,
            half_width: None,
            padding: Padding::Reflect,
            with_location: true,
            threshold: None,
            beta: 1.5,
            min_cluster_size: None,
            restarts: 10,
            seed: Seed(0),
            metric: Metric::Linf,
            linkage_points: 1024,
            sample_stride: None,
        }
    }

    pub fn patch_params(&self, rows: usize, cols: usize) -> PatchParams {
        let m = self
            .half_width
            .unwrap_or_else(|| PatchParams::default_half_width(rows.max(cols)));
        PatchParams::new(m, self.padding)
    }

    fn floor_for(&self, points: usize) -> usize {
        self.min_cluster_size
            .unwrap_or(points / (4 * self.k.max(1)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Segmentation {
    pub labels: LabelMap,
    /// Present for k-means.
    pub cluster: Option<ClusterResult>,
    /// The threshold actually used by threshold single linkage.
    pub threshold: Option<f64>,
    pub half_width: usize,
    /// Number of points handed to the clustering back end.
    pub clustered_points: usize,
}

pub fn segment(field: &Field, params: &SegmentParams) -> Result<Segmentation> {
    let (rows, cols) = field.shape();
    let patch = params.patch_params(rows, cols);
    let m = patch.half_width;
    let n = rows.max(cols);
    if params.k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    match params.algorithm {
        Algorithm::KMeans => {
            let feats = all_features(field, &patch, params.with_location)?;
            let points = Points::new(feats.data(), feats.dim())?;
            let kp = KMeansParams {
                k: params.k,
                restarts: params.restarts.max(1),
                min_cluster_size: params.floor_for(points.len()),
                seed: params.seed,
                ..KMeansParams::default()
            };
            let result = kmeans(points, &kp)?;
            Ok(Segmentation {
                labels: LabelMap::new(rows, cols, result.labels.clone())?,
                cluster: Some(result),
                threshold: None,
                half_width: m,
                clustered_points: rows * cols,
            })
        }
        Algorithm::SingleLinkThreshold => {
            let grid = subsample_grid(rows, cols, m)?;
            let data: Vec<f64> = grid
                .coords
                .iter()
                .flat_map(|&t| {
                    feature_vector(field, t, &patch, params.with_location, n)
                        .as_slice()
                        .to_vec()
                })
                .collect();
            let dim = data.len() / grid.len();
            let b = params
                .threshold
                .unwrap_or_else(|| theoretical_threshold(n, params.beta));
            let lp = LinkageParams::threshold(b).with_metric(params.metric);
            let labels =
                single_linkage_threshold(&grid, Points::new(&data, dim)?, &lp, (rows, cols), m)?;
            Ok(Segmentation {
                labels,
                cluster: None,
                threshold: Some(b),
                half_width: m,
                clustered_points: grid.len(),
            })
        }
        Algorithm::SingleLinkK | Algorithm::Ward => {
            let stride = params
                .sample_stride
                .unwrap_or((2 * patch.side()).div_ceil(3));
            let sample = PixelSample::new(rows, cols, stride, params.linkage_points);
            let coords = sample.coords();
            let data: Vec<f64> = coords
                .iter()
                .flat_map(|&t| {
                    feature_vector(field, t, &patch, params.with_location, n)
                        .as_slice()
                        .to_vec()
                })
                .collect();
            let dim = data.len() / coords.len();
            if coords.len() < params.k {
                return Err(Error::invalid(format!(
                    "pixel sample of {} points is smaller than k = {}",
                    coords.len(),
                    params.k
                )));
            }
            let lp = LinkageParams::cut_to_k(params.k)
                .with_metric(params.metric)
                .with_min_cluster_size(params.floor_for(coords.len()));
            let linkage = if params.algorithm == Algorithm::Ward {
                Linkage::Ward
            } else {
                Linkage::Single
            };
            let point_labels = agglomerative(Points::new(&data, dim)?, &lp, linkage)?;
            let labels = LabelMap::from_fn(rows, cols, |r, c| point_labels[sample.nearest(r, c)]);
            Ok(Segmentation {
                labels,
                cluster: None,
                threshold: None,
                half_width: m,
                clustered_points: coords.len(),
            })
        }
    }
}

/// Regular lattice of pixels with stride `s`, offset `s / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct PixelSample {
    stride: usize,
    rows: usize,
    cols: usize,
    sample_rows: usize,
    sample_cols: usize,
}

impl PixelSample {
    fn new(rows: usize, cols: usize, min_stride: usize, budget: usize) -> Self {
        let budget = budget.max(1);
        let mut stride = min_stride.clamp(1, rows.min(cols).max(1));
        while rows.div_ceil(stride) * cols.div_ceil(stride) > budget {
            stride += 1;
        }
        let off = stride / 2;
        Self {
            stride,
            rows,
            cols,
            sample_rows: (rows - off).div_ceil(stride),
            sample_cols: (cols - off).div_ceil(stride),
        }
    }

    fn coords(&self) -> Vec<(usize, usize)> {
        let off = self.stride / 2;
        (0..self.sample_rows)
            .flat_map(|i| {
                (0..self.sample_cols).map(move |j| (off + i * self.stride, off + j * self.stride))
            })
            .collect()
    }

    /// Index of the nearest sample pixel; ties go to the smaller coordinate.
    fn nearest(&self, r: usize, c: usize) -> usize {
        let axis = |x: usize, count: usize| {
            let off = self.stride / 2;
            if x <= off {
                0
            } else {
                // rounding half down keeps ties on the smaller coordinate
                ((x - off + (self.stride - 1) / 2) / self.stride).min(count - 1)
            }
        };
        debug_assert!(r < self.rows && c < self.cols);
        axis(r, self.sample_rows) * self.sample_cols + axis(c, self.sample_cols)
    }
}
