use crate::error::{Error, Result};
use crate::features::{lags, SubsampleGrid};
use crate::grid::LabelMap;
use crate::mosaic::{KernelSizes, TextureSource};
use crate::synth::{self, KernelSize};

/// Where a pixel's patch (clipped to the image) falls relative to the regions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PixelClass {
    /// The whole patch lies in this region.
    Interior(u32),
    /// The patch meets more than one region.
    Boundary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundarySets {
    pub rows: usize,
    pub cols: usize,
    pub half_width: usize,
    pub classes: Vec<PixelClass>,
}

impl BoundarySets {
    pub fn get(&self, r: usize, c: usize) -> PixelClass {
        self.classes[r * self.cols + c]
    }

    /// Interior pixel count per region label.
    pub fn interior_counts(&self, regions: usize) -> Vec<usize> {
        let mut counts = vec![0; regions];
        for class in &self.classes {
            if let PixelClass::Interior(l) = class {
                if (*l as usize) < regions {
                    counts[*l as usize] += 1;
                }
            }
        }
        counts
    }

    pub fn boundary_count(&self) -> usize {
        self.classes
            .iter()
            .filter(|c| **c == PixelClass::Boundary)
            .count()
    }
}

/// Separation between two textures alongside the interior/boundary split of the image.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparationReport {
    /// `None` when either texture has no analytic autocovariance.
    pub delta: Option<f64>,
    pub interior_counts: Vec<usize>,
    pub boundary_count: usize,
}

impl SeparationReport {
    pub fn new(sets: &BoundarySets, regions: usize, delta: Option<f64>) -> Self {
        Self {
            delta,
            interior_counts: sets.interior_counts(regions),
            boundary_count: sets.boundary_count(),
        }
    }
}

/// Classifies every pixel by the labels inside its `(2m + 1)²` window.
pub fn boundary_sets(mask: &LabelMap, m: usize) -> BoundarySets {
    let (rows, cols) = mask.shape();
    // per-row running min/max over the column window, then over the row window
    let window = |x: usize, len: usize| (x.saturating_sub(m), (x + m).min(len - 1));
    let mut row_min = vec![0u32; rows * cols];
    let mut row_max = vec![0u32; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            let (lo, hi) = window(c, cols);
            let slice = &mask.labels()[r * cols + lo..=r * cols + hi];
            row_min[r * cols + c] = *slice.iter().min().expect("non-empty window");
            row_max[r * cols + c] = *slice.iter().max().expect("non-empty window");
        }
    }
    let classes = (0..rows * cols)
        .map(|i| {
            let (r, c) = (i / cols, i % cols);
            let (lo, hi) = window(r, rows);
            let mn = (lo..=hi)
                .map(|rr| row_min[rr * cols + c])
                .min()
                .expect("window");
            let mx = (lo..=hi)
                .map(|rr| row_max[rr * cols + c])
                .max()
                .expect("window");
            if mn == mx {
                PixelClass::Interior(mn)
            } else {
                PixelClass::Boundary
            }
        })
        .collect();
    BoundarySets {
        rows,
        cols,
        half_width: m,
        classes,
    }
}

/// Pixels belonging to the patch of some grid point whose patch lies inside one region.
pub fn covered_set(grid: &SubsampleGrid, mask: &LabelMap) -> Vec<bool> {
    let (rows, cols) = mask.shape();
    let m = grid.half_width;
    let sets = boundary_sets(mask, m);
    let mut covered = vec![false; rows * cols];
    for &(ur, uc) in &grid.coords {
        if sets.get(ur, uc) == PixelClass::Boundary {
            continue;
        }
        for r in ur.saturating_sub(m)..(ur + m + 1).min(rows) {
            for c in uc.saturating_sub(m)..(uc + m + 1).min(cols) {
                covered[r * cols + c] = true;
            }
        }
    }
    covered
}

/// True feature of a texture after standardization to unit variance.
///
/// Defined for moving-average models and constant-size kernel textures
/// (`n` sets the default kernel coordinate scale `1 / n`).
pub fn standardized_true_feature(source: &TextureSource, m: usize, n: usize) -> Result<Vec<f64>> {
    match source {
        TextureSource::Ma(model) => Ok(lags(m)
            .into_iter()
            .map(|l| synth::ma_true_autocov(model, l))
            .collect()),
        TextureSource::Kernel(k) => {
            let KernelSizes::Constant(size) = &k.sizes else {
                return Err(Error::NoOracle);
            };
            let scale = k.scale.unwrap_or(1.0 / n.max(1) as f64);
            stationary_kernel_correlation(size, m, scale)
        }
        TextureSource::ImageFile(_) | TextureSource::Field(_) => Err(Error::NoOracle),
    }
}

fn stationary_kernel_correlation(size: &KernelSize, m: usize, scale: f64) -> Result<Vec<f64>> {
    let origin = (m, m);
    let c0 = synth::kernel_covariance(size, size, origin, origin, scale)?;
    lags(m)
        .into_iter()
        .map(|(i1, i2)| {
            let t = ((m as isize + i1) as usize, (m as isize + i2) as usize);
            Ok(synth::kernel_covariance(size, size, origin, t, scale)? / c0)
        })
        .collect()
}

/// `max` over lags `|i| <= m` of the gap between the two true features.
pub fn separation_delta(a: &TextureSource, b: &TextureSource, m: usize, n: usize) -> Result<f64> {
    let fa = standardized_true_feature(a, m, n)?;
    let fb = standardized_true_feature(b, m, n)?;
    Ok(fa
        .iter()
        .zip(&fb)
        .fold(0.0, |acc, (x, y)| f64::max(acc, (x - y).abs())))
}
