//! Synthetic Gaussian textures.
//!
//! Two families are provided:
//!
//! * moving-average fields, where each pixel sums `2m + 1` white-noise values
//!   along a fixed direction (diagonal, anti-diagonal, along a row or along a
//!   column), with an exact autocovariance oracle;
//! * the kernel-convolution model, where pixel `t` smooths white noise with a
//!   Gaussian kernel of covariance `Σ_t`. The covariance between two pixels has
//!   the closed form `N(t - s; 0, Σ_t + Σ_s)`, and letting `Σ_t` vary over the
//!   image makes the field non-stationary.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::linalg;
use crate::seed::Seed;

/// Largest field (in pixels) the dense kernel sampler accepts: 64 x 64.
pub const DENSE_PIXEL_LIMIT: usize = 64 * 64;

pub const DEFAULT_JITTER: f64 = 1e-10;

const JITTER_RETRIES: usize = 3;

/// Draws i.i.d. standard normal pixels, row-major from the seeded stream.
pub fn sample_white_noise(rows: usize, cols: usize, seed: Seed) -> Field {
    assert!(rows > 0 && cols > 0, "white noise needs a non-empty shape");
    let mut rng = seed.rng();
    let values = (0..rows * cols)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    Field::from_raw(rows, cols, values)
}

/// Stencil direction of a moving-average texture.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MaDirection {
    /// Model 1: offsets `(i, i)`.
    Diag,
    /// Model 2: offsets `(-i, i)`.
    AntiDiag,
    /// Model 3: offsets `(0, i)`.
    Vert,
    /// Model 4: offsets `(i, 0)`.
    Horiz,
}

impl MaDirection {
    pub const ALL: [MaDirection; 4] = [
        MaDirection::Diag,
        MaDirection::AntiDiag,
        MaDirection::Vert,
        MaDirection::Horiz,
    ];

    /// Unit step `(row, col)` of the stencil.
    pub fn step(self) -> (isize, isize) {
        match self {
            MaDirection::Diag => (1, 1),
            MaDirection::AntiDiag => (-1, 1),
            MaDirection::Vert => (0, 1),
            MaDirection::Horiz => (1, 0),
        }
    }

    /// 1-based model number.
    pub fn model_number(self) -> usize {
        match self {
            MaDirection::Diag => 1,
            MaDirection::AntiDiag => 2,
            MaDirection::Vert => 3,
            MaDirection::Horiz => 4,
        }
    }

    pub fn from_model_number(n: usize) -> Option<Self> {
        Self::ALL.get(n.checked_sub(1)?).copied()
    }
}

/// Moving-average texture `X_t = Σ_{|i| <= m} Z_{t + i·step}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MAModel {
    pub direction: MaDirection,
    pub half_width: usize,
    /// Divide by `sqrt(2m + 1)` so every pixel has unit variance.
    pub standardized: bool,
}

impl MAModel {
    pub fn new(direction: MaDirection, half_width: usize) -> Result<Self> {
        if half_width == 0 {
            return Err(Error::invalid("moving-average half width must be >= 1"));
        }
        Ok(Self {
            direction,
            half_width,
            standardized: true,
        })
    }

    pub fn unstandardized(self) -> Self {
        Self {
            standardized: false,
            ..self
        }
    }

    pub fn window_len(&self) -> usize {
        2 * self.half_width + 1
    }
}

/// Samples a moving-average texture. The noise grid is padded by `m` on every
/// side so each output pixel sees a full stencil.
pub fn sample_ma_field(model: &MAModel, rows: usize, cols: usize, seed: Seed) -> Field {
    let m = model.half_width;
    let noise = sample_white_noise(rows + 2 * m, cols + 2 * m, seed);
    apply_ma_stencil(model, &noise).expect("padded noise has the stencil's shape")
}

/// Applies the stencil to a caller-supplied noise grid of shape
/// `(rows + 2m) x (cols + 2m)`, producing a `rows x cols` field.
pub fn apply_ma_stencil(model: &MAModel, noise: &Field) -> Result<Field> {
    let m = model.half_width;
    if noise.rows() <= 2 * m || noise.cols() <= 2 * m {
        return Err(Error::invalid(format!(
            "noise grid {}x{} too small for half width {m}",
            noise.rows(),
            noise.cols()
        )));
    }
    let rows = noise.rows() - 2 * m;
    let cols = noise.cols() - 2 * m;
    let (dr, dc) = model.direction.step();
    let norm = if model.standardized {
        1.0 / (model.window_len() as f64).sqrt()
    } else {
        1.0
    };
    let mi = m as isize;
    let field = Field::from_fn(rows, cols, |r, c| {
        let (pr, pc) = ((r + m) as isize, (c + m) as isize);
        let sum: f64 = (-mi..=mi)
            .map(|i| noise.get((pr + i * dr) as usize, (pc + i * dc) as usize))
            .sum();
        sum * norm
    });
    Ok(field)
}

/// Exact lag autocovariance of a moving-average texture.
///
/// Nonzero only for lags that are a multiple `j` of the stencil step with
/// `|j| <= 2m`, where it equals the window overlap `2m + 1 - |j|` (divided by
/// `2m + 1` when standardized).
pub fn ma_true_autocov(model: &MAModel, lag: (isize, isize)) -> f64 {
    let (dr, dc) = model.direction.step();
    let (i1, i2) = lag;
    let j = match (dr, dc) {
        (0, _) if i1 == 0 => i2,
        (_, 0) if i2 == 0 => i1,
        (1, 1) if i1 == i2 => i1,
        (-1, 1) if i1 == -i2 => i2,
        _ => return 0.0,
    };
    let w = model.window_len() as isize;
    let overlap = w - j.abs();
    if overlap <= 0 {
        return 0.0;
    }
    if model.standardized {
        overlap as f64 / w as f64
    } else {
        overlap as f64
    }
}

/// Kernel covariance `Σ_t = [[a, b], [c, d]]` of one pixel's smoothing kernel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelSize {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl KernelSize {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    /// `v · I`.
    pub fn isotropic(v: f64) -> Self {
        Self::new(v, 0.0, 0.0, v)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn is_spd(&self) -> bool {
        self.b == self.c
            && self.a > 0.0
            && self.det() > 0.0
            && self.a.is_finite()
            && self.d.is_finite()
    }

    fn add(&self, o: &KernelSize) -> KernelSize {
        KernelSize::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }

    fn max_abs_diff(&self, o: &KernelSize) -> f64 {
        (self.a - o.a)
            .abs()
            .max((self.b - o.b).abs())
            .max((self.c - o.c).abs())
            .max((self.d - o.d).abs())
    }
}

/// Per-pixel kernel sizes for the kernel-convolution model.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSizeField {
    rows: usize,
    cols: usize,
    entries: Vec<KernelSize>,
}

impl KernelSizeField {
    /// Validates that every entry is symmetric positive definite.
    pub fn new(rows: usize, cols: usize, entries: Vec<KernelSize>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::invalid(format!(
                "kernel size field {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(pos) = entries.iter().position(|s| !s.is_spd()) {
            return Err(Error::NotPositiveDefinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn constant(rows: usize, cols: usize, size: KernelSize) -> Result<Self> {
        Self::new(rows, cols, vec![size; rows * cols])
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> KernelSize,
    ) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        Self::new(rows, cols, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> &KernelSize {
        &self.entries[row * self.cols + col]
    }

    /// Coordinate scale `1 / max(rows, cols)`, i.e. pixel `i` sits at `i / n`.
    pub fn default_scale(&self) -> f64 {
        1.0 / self.rows.max(self.cols) as f64
    }
}

/// Closed-form covariance between pixels `t` and `s` of the kernel model:
/// the bivariate normal density of `scale·(t - s)` with covariance `Σ_t + Σ_s`.
pub fn kernel_covariance(
    sigma_t: &KernelSize,
    sigma_s: &KernelSize,
    t: (usize, usize),
    s: (usize, usize),
    scale: f64,
) -> Result<f64> {
    let sum = sigma_t.add(sigma_s);
    let det = sum.det();
    if !(det > 0.0) || !(sum.a > 0.0) {
        return Err(Error::SingularCovariance { det });
    }
    let dx = scale * (t.0 as f64 - s.0 as f64);
    let dy = scale * (t.1 as f64 - s.1 as f64);
    // δᵀ (Σ_t + Σ_s)⁻¹ δ with the adjugate inverse
    let q = (sum.d * dx * dx - (sum.b + sum.c) * dx * dy + sum.a * dy * dy) / det;
    Ok((-0.5 * q).exp() / (2.0 * std::f64::consts::PI * det.sqrt()))
}

/// Row-major Gram matrix of the kernel model over every pixel pair.
pub fn kernel_gram(sizes: &KernelSizeField, scale: f64) -> Result<Vec<f64>> {
    let (rows, cols) = (sizes.rows(), sizes.cols());
    let dim = rows * cols;
    if dim > DENSE_PIXEL_LIMIT {
        return Err(Error::TooLarge {
            pixels: dim,
            limit: DENSE_PIXEL_LIMIT,
        });
    }
    let coord = |k: usize| (k / cols, k % cols);
    let mut gram = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let v = kernel_covariance(
                &sizes.entries[i],
                &sizes.entries[j],
                coord(i),
                coord(j),
                scale,
            )?;
            gram[i * dim + j] = v;
            gram[j * dim + i] = v;
        }
    }
    Ok(gram)
}

/// Smallest eigenvalue of the kernel Gram matrix, without jitter.
pub fn gram_min_eigenvalue(sizes: &KernelSizeField, scale: f64) -> Result<f64> {
    let gram = kernel_gram(sizes, scale)?;
    Ok(linalg::min_eigenvalue(&gram, sizes.rows() * sizes.cols()))
}

/// Exact sampler for the kernel-convolution field: one Cholesky factor of the
/// Gram matrix, reused for any number of draws.
///
/// Assembly and factorization are dense (`O(N²)` memory, `O(N³)` time in the
/// pixel count `N`), so the sampler is capped at [`DENSE_PIXEL_LIMIT`]; a 64 x 64
/// field takes a few seconds to factor.
#[derive(Clone, Debug)]
pub struct NonstationarySampler {
    rows: usize,
    cols: usize,
    factor: Vec<f64>,
    jitter: f64,
}

impl NonstationarySampler {
    /// Factors `K + jitter·I`, multiplying the jitter by 10 up to three times on failure.
    pub fn new(sizes: &KernelSizeField, scale: f64, jitter: f64) -> Result<Self> {
        if !(jitter >= 0.0) {
            return Err(Error::invalid("jitter must be non-negative"));
        }
        if !(scale > 0.0) {
            return Err(Error::invalid("coordinate scale must be positive"));
        }
        let gram = kernel_gram(sizes, scale)?;
        let dim = sizes.rows() * sizes.cols();
        let mut jitter = jitter;
        let mut last_pivot = 0.0;
        for attempt in 0..=JITTER_RETRIES {
            if attempt > 0 {
                jitter = if jitter > 0.0 {
                    jitter * 10.0
                } else {
                    DEFAULT_JITTER
                };
            }
            let mut factor = gram.clone();
            for k in 0..dim {
                factor[k * dim + k] += jitter;
            }
            match linalg::cholesky_in_place(&mut factor, dim) {
                Ok(()) => {
                    return Ok(Self {
                        rows: sizes.rows(),
                        cols: sizes.cols(),
                        factor,
                        jitter,
                    })
                }
                Err((_, pivot)) => last_pivot = pivot,
            }
        }
        // an exact eigen-solve is affordable up to ~1500 pixels; beyond that
        // the failing Schur pivot stands in as the estimate
        let min_eigenvalue = if dim <= 1500 {
            linalg::min_eigenvalue(&gram, dim)
        } else {
            last_pivot
        };
        Err(Error::Factorization {
            jitter,
            min_eigenvalue,
        })
    }

    /// Jitter that was finally added to the diagonal.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn sample(&self, seed: Seed) -> Field {
        let dim = self.rows * self.cols;
        let z = sample_white_noise(1, dim, seed);
        let x = linalg::lower_mul(&self.factor, dim, z.values());
        Field::from_raw(self.rows, self.cols, x)
    }
}

/// One exact draw from the kernel-convolution model with coordinate scale `1/n`.
pub fn sample_nonstationary_field(
    sizes: &KernelSizeField,
    seed: Seed,
    jitter: f64,
) -> Result<Field> {
    Ok(NonstationarySampler::new(sizes, sizes.default_scale(), jitter)?.sample(seed))
}

/// Largest absolute difference between the kernel-size entries at `s` and `t`.
pub fn kernel_size_metric(sizes: &KernelSizeField, s: (usize, usize), t: (usize, usize)) -> f64 {
    sizes.get(s.0, s.1).max_abs_diff(sizes.get(t.0, t.1))
}

/// Euclidean distance between pixel coordinates divided by `n`.
pub fn pixel_distance(s: (usize, usize), t: (usize, usize), n: usize) -> f64 {
    let n = n as f64;
    let d1 = (s.0 as f64 - t.0 as f64) / n;
    let d2 = (s.1 as f64 - t.1 as f64) / n;
    d1.hypot(d2)
}
