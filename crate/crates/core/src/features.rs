//! Patch autocovariance features.
//!
//! Every pixel `t` is described by the sample autocovariances of the
//! `(2m + 1) x (2m + 1)` patch centred on it, one value per lag in
//! `M = {-m..m}²` (row-major lag order), optionally followed by the pixel's
//! normalized location `(t1 / n, t2 / n)`.

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::synth::{self, KernelSizeField, MAModel};

/// How patch pixels falling outside the image are resolved.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Padding {
    /// Mirror across the edge without repeating the edge pixel.
    #[default]
    Reflect,
    /// Toroidal indexing.
    Wrap,
    /// Clip the window to the image; divisors use the clipped pair counts.
    Shrink,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PatchParams {
    pub half_width: usize,
    pub padding: Padding,
}

impl PatchParams {
    pub fn new(half_width: usize, padding: Padding) -> Self {
        Self {
            half_width,
            padding,
        }
    }

    /// `round(sqrt(n))`, the half width matched to an `n x n` image.
    pub fn default_half_width(n: usize) -> usize {
        ((n as f64).sqrt().round() as usize).max(1)
    }

    pub fn side(&self) -> usize {
        2 * self.half_width + 1
    }

    /// `(2m + 1)²`.
    pub fn lag_count(&self) -> usize {
        self.side() * self.side()
    }

    fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        let m = self.half_width;
        match self.padding {
            Padding::Wrap if 2 * m > rows.min(cols) => Err(Error::invalid(format!(
                "wrap padding needs m <= min(rows, cols)/2, got m = {m} on {rows}x{cols}"
            ))),
            Padding::Reflect if m > 0 && (rows < 2 || cols < 2) => Err(Error::invalid(
                "reflect padding needs at least two rows and columns",
            )),
            _ => Ok(()),
        }
    }
}

/// All lags of `M = {-m..m}²` in row-major order.
pub fn lags(m: usize) -> Vec<(isize, isize)> {
    let m = m as isize;
    (-m..=m)
        .flat_map(|i1| (-m..=m).map(move |i2| (i1, i2)))
        .collect()
}

/// Position of `lag` in the row-major lag order.
pub fn lag_index(m: usize, lag: (isize, isize)) -> usize {
    let side = 2 * m as isize + 1;
    let m = m as isize;
    ((lag.0 + m) * side + (lag.1 + m)) as usize
}

/// A rectangular window of pixels (`(2m + 1)²` unless clipped by [`Padding::Shrink`]).
#[derive(Clone, Debug, PartialEq)]
pub struct Patch {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Patch {
    pub fn from_values(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols || rows == 0 || cols == 0 {
            return Err(Error::invalid("patch values do not match its shape"));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }
}

fn reflect(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let k = i.rem_euclid(period);
    if k < n as isize {
        k as usize
    } else {
        (period - k) as usize
    }
}

fn resolve(i: isize, n: usize, padding: Padding) -> usize {
    match padding {
        Padding::Reflect => reflect(i, n),
        Padding::Wrap => i.rem_euclid(n as isize) as usize,
        Padding::Shrink => unreachable!("shrink never indexes outside the image"),
    }
}

/// The window centred at `t`, with out-of-image pixels resolved by the padding policy.
pub fn extract_patch(field: &Field, t: (usize, usize), params: &PatchParams) -> Patch {
    let m = params.half_width as isize;
    let (tr, tc) = (t.0 as isize, t.1 as isize);
    match params.padding {
        Padding::Shrink => {
            let r0 = (tr - m).max(0) as usize;
            let r1 = ((tr + m) as usize).min(field.rows() - 1);
            let c0 = (tc - m).max(0) as usize;
            let c1 = ((tc + m) as usize).min(field.cols() - 1);
            let rows = r1 - r0 + 1;
            let cols = c1 - c0 + 1;
            let mut values = Vec::with_capacity(rows * cols);
            for r in r0..=r1 {
                for c in c0..=c1 {
                    values.push(field.get(r, c));
                }
            }
            Patch { rows, cols, values }
        }
        padding => {
            let side = params.side();
            let mut values = Vec::with_capacity(side * side);
            for dr in -m..=m {
                let r = resolve(tr + dr, field.rows(), padding);
                for dc in -m..=m {
                    values.push(field.get(r, resolve(tc + dc, field.cols(), padding)));
                }
            }
            Patch {
                rows: side,
                cols: side,
                values,
            }
        }
    }
}

/// Mean of `x_s · x_{s+lag}` over every position `s` with both pixels in the patch.
/// For a full patch the divisor is `(2m + 1 - |i1|)(2m + 1 - |i2|)`. Zero when no pair fits.
pub fn sample_autocov(patch: &Patch, lag: (isize, isize)) -> f64 {
    let (i1, i2) = lag;
    let h = patch.rows as isize - i1.abs();
    let w = patch.cols as isize - i2.abs();
    if h <= 0 || w <= 0 {
        return 0.0;
    }
    let r0 = (-i1).max(0);
    let c0 = (-i2).max(0);
    let mut sum = 0.0;
    for r in r0..r0 + h {
        for c in c0..c0 + w {
            sum +=
                patch.get(r as usize, c as usize) * patch.get((r + i1) as usize, (c + i2) as usize);
        }
    }
    sum / (h * w) as f64
}

/// One pixel's descriptor: autocovariances over `M`, then the optional location pair.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    half_width: usize,
    values: Vec<f64>,
    has_location: bool,
}

impl FeatureVector {
    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// The full vector (autocovariances followed by the location, if any).
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn autocov(&self) -> &[f64] {
        let n = (2 * self.half_width + 1).pow(2);
        &self.values[..n]
    }

    pub fn location(&self) -> Option<(f64, f64)> {
        self.has_location.then(|| {
            let n = self.values.len();
            (self.values[n - 2], self.values[n - 1])
        })
    }

    pub fn at(&self, lag: (isize, isize)) -> f64 {
        self.values[lag_index(self.half_width, lag)]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Autocovariance feature of pixel `t`; appends `(t1 / n, t2 / n)` when `with_location`.
pub fn feature_vector(
    field: &Field,
    t: (usize, usize),
    params: &PatchParams,
    with_location: bool,
    n: usize,
) -> FeatureVector {
    let patch = extract_patch(field, t, params);
    let m = params.half_width;
    let all = lags(m);
    let count = all.len();
    let mut values = vec![0.0; count + if with_location { 2 } else { 0 }];
    // lag i and lag -i share the same pair set; compute once and mirror
    for idx in count / 2..count {
        let v = sample_autocov(&patch, all[idx]);
        values[idx] = v;
        values[count - 1 - idx] = v;
    }
    if with_location {
        values[count] = t.0 as f64 / n as f64;
        values[count + 1] = t.1 as f64 / n as f64;
    }
    FeatureVector {
        half_width: m,
        values,
        has_location: with_location,
    }
}

/// Per-pixel features for a whole image, stored as a dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureField {
    rows: usize,
    cols: usize,
    dim: usize,
    params: PatchParams,
    with_location: bool,
    data: Vec<f64>,
}

impl FeatureField {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Length of each feature vector.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> &PatchParams {
        &self.params
    }

    pub fn with_location(&self) -> bool {
        self.with_location
    }

    pub fn get(&self, r: usize, c: usize) -> &[f64] {
        let start = (r * self.cols + c) * self.dim;
        &self.data[start..start + self.dim]
    }

    /// All vectors back to back, pixel-major.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }
}

/// Features at every pixel. Matches [`feature_vector`] per pixel up to
/// floating-point summation order; lag symmetry holds exactly.
pub fn all_features(
    field: &Field,
    params: &PatchParams,
    with_location: bool,
) -> Result<FeatureField> {
    let (rows, cols) = field.shape();
    params.validate(rows, cols)?;
    let m = params.half_width;
    let all = lags(m);
    let count = all.len();
    let dim = count + if with_location { 2 } else { 0 };
    let pixels = rows * cols;
    let half: Vec<usize> = (count / 2..count).collect();

    let source = SourceGrid::new(field, params);
    let lag_column = |&idx: &usize| source.lag_map(all[idx]);
    #[cfg(feature = "parallel")]
    let columns: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        half.par_iter().map(lag_column).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let columns: Vec<Vec<f64>> = half.iter().map(lag_column).collect();

    let mut data = vec![0.0; pixels * dim];
    for (&idx, column) in half.iter().zip(&columns) {
        let mirror = count - 1 - idx;
        for (p, &v) in column.iter().enumerate() {
            data[p * dim + idx] = v;
            data[p * dim + mirror] = v;
        }
    }
    if with_location {
        let n = rows.max(cols) as f64;
        for r in 0..rows {
            for c in 0..cols {
                let base = (r * cols + c) * dim + count;
                data[base] = r as f64 / n;
                data[base + 1] = c as f64 / n;
            }
        }
    }
    Ok(FeatureField {
        rows,
        cols,
        dim,
        params: *params,
        with_location,
        data,
    })
}

/// The image the pair products are taken over: padded by `m` for Reflect/Wrap,
/// the raw image for Shrink.
struct SourceGrid {
    rows: usize,
    cols: usize,
    offset: usize,
    m: usize,
    shrink: bool,
    values: Vec<f64>,
    image_rows: usize,
    image_cols: usize,
}

impl SourceGrid {
    fn new(field: &Field, params: &PatchParams) -> Self {
        let m = params.half_width;
        let (image_rows, image_cols) = field.shape();
        if params.padding == Padding::Shrink {
            return Self {
                rows: image_rows,
                cols: image_cols,
                offset: 0,
                m,
                shrink: true,
                values: field.values().to_vec(),
                image_rows,
                image_cols,
            };
        }
        let rows = image_rows + 2 * m;
        let cols = image_cols + 2 * m;
        let mut values = Vec::with_capacity(rows * cols);
        for pr in 0..rows {
            let r = resolve(pr as isize - m as isize, image_rows, params.padding);
            for pc in 0..cols {
                values.push(field.get(
                    r,
                    resolve(pc as isize - m as isize, image_cols, params.padding),
                ));
            }
        }
        Self {
            rows,
            cols,
            offset: m,
            m,
            shrink: false,
            values,
            image_rows,
            image_cols,
        }
    }

    /// Autocovariance at `lag` for every image pixel, via a summed-area table of pair products.
    fn lag_map(&self, lag: (isize, isize)) -> Vec<f64> {
        let (i1, i2) = lag;
        let (rows, cols) = (self.rows as isize, self.cols as isize);
        let sat_cols = self.cols + 1;
        let mut sat = vec![0.0; (self.rows + 1) * sat_cols];
        for r in 0..rows {
            let mut running = 0.0;
            for c in 0..cols {
                let (r2, c2) = (r + i1, c + i2);
                if (0..rows).contains(&r2) && (0..cols).contains(&c2) {
                    running += self.values[(r * cols + c) as usize]
                        * self.values[(r2 * cols + c2) as usize];
                }
                let k = (r as usize + 1) * sat_cols + c as usize + 1;
                sat[k] = sat[k - sat_cols] + running;
            }
        }
        let box_sum = |r0: isize, r1: isize, c0: isize, c1: isize| {
            // inclusive bounds in source coordinates
            let (r0, r1, c0, c1) = (r0 as usize, r1 as usize + 1, c0 as usize, c1 as usize + 1);
            sat[r1 * sat_cols + c1] - sat[r0 * sat_cols + c1] - sat[r1 * sat_cols + c0]
                + sat[r0 * sat_cols + c0]
        };
        let m = self.m as isize;
        let mut out = Vec::with_capacity(self.image_rows * self.image_cols);
        for tr in 0..self.image_rows as isize {
            for tc in 0..self.image_cols as isize {
                // window in source coordinates
                let (w_r0, w_r1, w_c0, w_c1) = if self.shrink {
                    (
                        (tr - m).max(0),
                        (tr + m).min(rows - 1),
                        (tc - m).max(0),
                        (tc + m).min(cols - 1),
                    )
                } else {
                    let (pr, pc) = (tr + self.offset as isize, tc + self.offset as isize);
                    (pr - m, pr + m, pc - m, pc + m)
                };
                let r0 = w_r0 + (-i1).max(0);
                let r1 = w_r1 - i1.max(0);
                let c0 = w_c0 + (-i2).max(0);
                let c1 = w_c1 - i2.max(0);
                if r1 < r0 || c1 < c0 {
                    out.push(0.0);
                    continue;
                }
                let pairs = ((r1 - r0 + 1) * (c1 - c0 + 1)) as f64;
                out.push(box_sum(r0, r1, c0, c1) / pairs);
            }
        }
        out
    }
}

/// Non-overlapping grid points `u = ((2m + 1) t1, (2m + 1) t2)` for
/// `t ∈ {1..⌊n / (2m + 1)⌋}²`, shifted to 0-based pixel indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsampleGrid {
    pub half_width: usize,
    /// Row-major grid points.
    pub coords: Vec<(usize, usize)>,
    pub grid_rows: usize,
    pub grid_cols: usize,
}

impl SubsampleGrid {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

pub fn subsample_grid(rows: usize, cols: usize, m: usize) -> Result<SubsampleGrid> {
    let side = 2 * m + 1;
    let shortest = rows.min(cols);
    if shortest < side {
        return Err(Error::EmptyGrid {
            side: shortest,
            patch: side,
        });
    }
    let (qr, qc) = (rows / side, cols / side);
    let coords = (1..=qr)
        .flat_map(|t1| (1..=qc).map(move |t2| (side * t1 - 1, side * t2 - 1)))
        .collect();
    Ok(SubsampleGrid {
        half_width: m,
        coords,
        grid_rows: qr,
        grid_cols: qc,
    })
}

/// True feature of a standardized moving-average texture (the same at every pixel).
pub fn ma_true_feature(model: &MAModel, m: usize) -> Vec<f64> {
    lags(m)
        .into_iter()
        .map(|l| synth::ma_true_autocov(model, l))
        .collect()
}

/// True feature of the kernel model at `t`: for each lag, the mean closed-form
/// covariance over pixel pairs inside the patch (pairs are clipped to the grid).
pub fn kernel_true_feature(
    sizes: &KernelSizeField,
    t: (usize, usize),
    m: usize,
    scale: f64,
) -> Result<Vec<f64>> {
    let (rows, cols) = (sizes.rows() as isize, sizes.cols() as isize);
    let mi = m as isize;
    let (tr, tc) = (t.0 as isize, t.1 as isize);
    let (r_lo, r_hi) = ((tr - mi).max(0), (tr + mi).min(rows - 1));
    let (c_lo, c_hi) = ((tc - mi).max(0), (tc + mi).min(cols - 1));
    lags(m)
        .into_iter()
        .map(|(i1, i2)| {
            let (mut sum, mut count) = (0.0, 0usize);
            for r in r_lo.max(r_lo - i1)..=r_hi.min(r_hi - i1) {
                for c in c_lo.max(c_lo - i2)..=c_hi.min(c_hi - i2) {
                    let s = (r as usize, c as usize);
                    let u = ((r + i1) as usize, (c + i2) as usize);
                    sum += synth::kernel_covariance(
                        sizes.get(s.0, s.1),
                        sizes.get(u.0, u.1),
                        s,
                        u,
                        scale,
                    )?;
                    count += 1;
                }
            }
            Ok(if count == 0 { 0.0 } else { sum / count as f64 })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::Seed;
    use crate::synth::{sample_white_noise, MaDirection};

    fn grid9() -> Field {
        Field::from_fn(9, 9, |r, c| (r * 9 + c) as f64)
    }

    #[test]
    fn interior_patch_is_the_neighbourhood() {
        let f = grid9();
        let p = extract_patch(&f, (4, 5), &PatchParams::new(1, Padding::Reflect));
        for dr in 0..3 {
            for dc in 0..3 {
                assert_eq!(p.get(dr, dc), f.get(3 + dr, 4 + dc));
            }
        }
    }

    #[test]
    fn corner_reflect_and_wrap() {
        let f = grid9();
        let p = extract_patch(&f, (0, 0), &PatchParams::new(1, Padding::Reflect));
        assert_eq!(p.get(0, 0), f.get(1, 1));
        assert_eq!(p.get(1, 1), f.get(0, 0));
        let g = Field::from_fn(4, 4, |r, c| (r * 4 + c) as f64);
        let w = extract_patch(&g, (0, 0), &PatchParams::new(1, Padding::Wrap));
        assert_eq!(w.get(0, 0), g.get(3, 3));
        let s = extract_patch(&g, (0, 0), &PatchParams::new(1, Padding::Shrink));
        assert_eq!((s.rows(), s.cols()), (2, 2));
        assert_eq!(s.get(0, 0), g.get(0, 0));
    }

    #[test]
    fn reflect_index_arithmetic() {
        assert_eq!(reflect(-1, 5), 1);
        assert_eq!(reflect(-2, 5), 2);
        assert_eq!(reflect(5, 5), 3);
        assert_eq!(reflect(6, 5), 2);
        assert_eq!(reflect(0, 1), 0);
        assert_eq!(reflect(-7, 3), 1);
    }

    #[test]
    fn autocov_constant_patches() {
        let ones = Patch::from_values(3, 3, vec![1.0; 9]).unwrap();
        let zeros = Patch::from_values(3, 3, vec![0.0; 9]).unwrap();
        for lag in lags(1).into_iter().chain([(2, 2), (-2, 1)]) {
            assert_eq!(sample_autocov(&ones, lag), 1.0);
            assert_eq!(sample_autocov(&zeros, lag), 0.0);
        }
    }

    #[test]
    fn autocov_two_by_two_window() {
        // pairs at lag (0,1): (1,2) and (3,4)
        let p = Patch::from_values(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(sample_autocov(&p, (0, 1)), 7.0);
        assert_eq!(sample_autocov(&p, (1, 1)), 4.0);
        assert_eq!(sample_autocov(&p, (0, 2)), 0.0);
    }

    #[test]
    fn feature_vector_basics() {
        let f = Field::filled(8, 8, 1.0);
        let params = PatchParams::new(2, Padding::Reflect);
        let v = feature_vector(&f, (3, 3), &params, false, 8);
        assert_eq!(v.len(), 25);
        assert!(v.as_slice().iter().all(|&x| x == 1.0));
        let w = feature_vector(&f, (4, 4), &params, true, 8);
        assert_eq!(w.len(), 27);
        assert_eq!(w.location(), Some((0.5, 0.5)));
    }

    #[test]
    fn feature_vector_lag_symmetry_brute_force() {
        let f = sample_white_noise(12, 10, Seed(3));
        for padding in [Padding::Reflect, Padding::Wrap, Padding::Shrink] {
            let params = PatchParams::new(2, padding);
            for t in [(0, 0), (5, 4), (11, 9)] {
                let v = feature_vector(&f, t, &params, false, 12);
                let patch = extract_patch(&f, t, &params);
                for lag in lags(2) {
                    // independent enumeration of the pair set for lag -i
                    let neg = (-lag.0, -lag.1);
                    let (mut sum, mut count) = (0.0, 0);
                    for r in 0..patch.rows() as isize {
                        for c in 0..patch.cols() as isize {
                            let (r2, c2) = (r + neg.0, c + neg.1);
                            if r2 >= 0
                                && c2 >= 0
                                && (r2 as usize) < patch.rows()
                                && (c2 as usize) < patch.cols()
                            {
                                sum += patch.get(r as usize, c as usize)
                                    * patch.get(r2 as usize, c2 as usize);
                                count += 1;
                            }
                        }
                    }
                    let expect = if count == 0 { 0.0 } else { sum / count as f64 };
                    assert!((v.at(lag) - expect).abs() < 1e-12);
                    assert_eq!(v.at(lag), v.at(neg));
                }
            }
        }
    }

    #[test]
    fn all_features_match_per_pixel() {
        let f = sample_white_noise(11, 13, Seed(8));
        for padding in [Padding::Reflect, Padding::Wrap, Padding::Shrink] {
            let params = PatchParams::new(2, padding);
            let ff = all_features(&f, &params, true).unwrap();
            assert_eq!(ff.dim(), 27);
            for r in 0..11 {
                for c in 0..13 {
                    let v = feature_vector(&f, (r, c), &params, true, 13);
                    for (a, b) in ff.get(r, c).iter().zip(v.as_slice()) {
                        assert!((a - b).abs() < 1e-12, "{padding:?} ({r},{c}): {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn all_features_constant_field() {
        let f = Field::filled(8, 8, 1.0);
        let ff = all_features(&f, &PatchParams::new(1, Padding::Reflect), true).unwrap();
        for r in 0..8 {
            for c in 0..8 {
                let v = ff.get(r, c);
                assert!(v[..9].iter().all(|&x| (x - 1.0).abs() < 1e-12));
                assert_eq!(&v[9..], &[r as f64 / 8.0, c as f64 / 8.0]);
            }
        }
    }

    #[test]
    fn wrap_requires_small_half_width() {
        let f = Field::filled(4, 4, 1.0);
        assert!(all_features(&f, &PatchParams::new(3, Padding::Wrap), false).is_err());
        assert!(all_features(&f, &PatchParams::new(2, Padding::Wrap), false).is_ok());
    }

    #[test]
    fn subsample_grid_examples() {
        let g = subsample_grid(9, 9, 1).unwrap();
        let expect: Vec<(usize, usize)> = [2, 5, 8]
            .iter()
            .flat_map(|&r| [2, 5, 8].iter().map(move |&c| (r, c)))
            .collect();
        assert_eq!(g.coords, expect);
        assert_eq!(subsample_grid(6, 6, 1).unwrap().len(), 4);
        assert!(matches!(
            subsample_grid(2, 9, 1),
            Err(Error::EmptyGrid { .. })
        ));
    }

    #[test]
    fn ma_true_feature_layout() {
        let model = MAModel::new(MaDirection::Vert, 2).unwrap();
        let c = ma_true_feature(&model, 2);
        assert_eq!(c.len(), 25);
        assert_eq!(c[lag_index(2, (0, 0))], 1.0);
        assert_eq!(c[lag_index(2, (0, -1))], 0.8);
        assert_eq!(c[lag_index(2, (1, 0))], 0.0);
    }

    #[test]
    fn kernel_true_feature_constant_sizes() {
        use crate::synth::KernelSize;
        let sigma = KernelSize::isotropic(0.3);
        let sizes = KernelSizeField::constant(9, 9, sigma).unwrap();
        let c = kernel_true_feature(&sizes, (4, 4), 2, 0.5).unwrap();
        for lag in lags(2) {
            let want = synth::kernel_covariance(
                &sigma,
                &sigma,
                (0, 0),
                (lag.0.unsigned_abs(), lag.1.unsigned_abs()),
                0.5,
            )
            .unwrap();
            assert!((c[lag_index(2, lag)] - want).abs() < 1e-15);
        }
    }
}
