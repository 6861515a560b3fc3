use rand::Rng;

use super::boundary::{covered_set, separation_delta};
use super::matching::{best_injective_match, best_permutation_match};
use super::table::Table;
use crate::error::{Error, Result};
use crate::features::{
    feature_vector, kernel_true_feature, ma_true_feature, subsample_grid, Padding, PatchParams,
};
use crate::mosaic::{region_mask, KernelSizes, MosaicGenerator, RegionGeometry, TextureSource};
use crate::pipeline::{segment, Algorithm, SegmentParams};
use crate::seed::Seed;
use crate::synth::{
    kernel_size_metric, sample_ma_field, KernelSize, KernelSizeField, MAModel,
    NonstationarySampler, DEFAULT_JITTER,
};

/// Runs `f(0..count)` (in parallel when enabled) and returns results in index order.
fn replicates<T: Send>(count: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConcentrationRow {
    pub n: usize,
    pub half_width: usize,
    pub exceedances: usize,
    pub replicates: usize,
    pub frequency: f64,
}

/// Frequency with which the centre pixel's feature misses the true feature by
/// more than `a` in sup norm, for `n x n` fields with `m = round(sqrt(n))`.
pub fn concentration_experiment(
    model: &MAModel,
    sizes: &[usize],
    a: f64,
    replicate_count: usize,
    seed: Seed,
) -> Result<Vec<ConcentrationRow>> {
    if replicate_count == 0 {
        return Err(Error::invalid("need at least one replicate"));
    }
    sizes
        .iter()
        .map(|&n| {
            let m = PatchParams::default_half_width(n);
            let params = PatchParams::new(m, Padding::Reflect);
            let truth = ma_true_feature(model, m);
            let center = (n / 2, n / 2);
            let base = seed.derive(n as u64);
            let hits = replicates(replicate_count, |r| {
                let field = sample_ma_field(model, n, n, base.offset(r as u64));
                let est = feature_vector(&field, center, &params, false, n);
                let dev = est
                    .autocov()
                    .iter()
                    .zip(&truth)
                    .fold(0.0, |acc, (x, y)| f64::max(acc, (x - y).abs()));
                dev > a
            });
            let exceedances = hits.into_iter().filter(|&h| h).count();
            Ok(ConcentrationRow {
                n,
                half_width: m,
                exceedances,
                replicates: replicate_count,
                frequency: exceedances as f64 / replicate_count as f64,
            })
        })
        .collect()
}

pub fn concentration_table(rows: &[ConcentrationRow]) -> Table {
    let mut t = Table::new(&["n", "m", "exceedances", "replicates", "frequency"]);
    for r in rows {
        t.push(vec![
            r.n.to_string(),
            r.half_width.to_string(),
            r.exceedances.to_string(),
            r.replicates.to_string(),
            fmt(r.frequency),
        ]);
    }
    t
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyParams {
    pub replicates: usize,
    pub beta: f64,
    pub restarts: usize,
    pub with_location: bool,
    /// `None` uses `round(sqrt(n))` per size.
    pub half_width: Option<usize>,
}

impl Default for ConsistencyParams {
    fn default() -> Self {
        Self {
            replicates: 20,
            beta: 1.5,
            restarts: 3,
            with_location: false,
            half_width: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyRow {
    pub n: usize,
    pub half_width: usize,
    pub mean_error: f64,
    pub max_error: f64,
    pub delta: f64,
    /// `(ln n)^β / (Δ² n)`; `None` when `Δ = 0`.
    pub envelope: Option<f64>,
    /// `envelope` times the constant fitted over all rows (least squares in log space).
    pub fitted_envelope: Option<f64>,
    pub degenerate: bool,
}

/// Mean k-means error rate on two-texture vertical-split mosaics for each size.
pub fn consistency_experiment(
    model0: &MAModel,
    model1: &MAModel,
    sizes: &[usize],
    params: &ConsistencyParams,
    seed: Seed,
) -> Result<Vec<ConsistencyRow>> {
    if params.replicates == 0 {
        return Err(Error::invalid("need at least one replicate"));
    }
    let sources = [TextureSource::Ma(*model0), TextureSource::Ma(*model1)];
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let m = params
            .half_width
            .unwrap_or_else(|| PatchParams::default_half_width(n));
        let gen = MosaicGenerator::new(&sources, &RegionGeometry::VSplit, n, n)?;
        let delta = separation_delta(&sources[0], &sources[1], m, n)?;
        let base = seed.derive(n as u64);
        let errors = replicates(params.replicates, |r| -> Result<f64> {
            let s = base.offset(r as u64);
            let field = gen.generate(s)?;
            let mut sp = SegmentParams::new(Algorithm::KMeans, 2);
            sp.half_width = Some(m);
            sp.with_location = params.with_location;
            sp.restarts = params.restarts;
            sp.seed = s;
            let seg = segment(&field, &sp)?;
            Ok(best_permutation_match(&seg.labels, gen.truth(), 2)?.error_rate)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let mean_error = errors.iter().sum::<f64>() / errors.len() as f64;
        let max_error = errors.iter().copied().fold(0.0, f64::max);
        let degenerate = delta == 0.0;
        let envelope =
            (!degenerate).then(|| (n as f64).ln().powf(params.beta) / (delta * delta * n as f64));
        rows.push(ConsistencyRow {
            n,
            half_width: m,
            mean_error,
            max_error,
            delta,
            envelope,
            fitted_envelope: None,
            degenerate,
        });
    }
    let logs: Vec<f64> = rows
        .iter()
        .filter_map(|r| {
            r.envelope
                .filter(|_| r.mean_error > 0.0)
                .map(|e| r.mean_error.ln() - e.ln())
        })
        .collect();
    if !logs.is_empty() {
        let c = (logs.iter().sum::<f64>() / logs.len() as f64).exp();
        for r in &mut rows {
            r.fitted_envelope = r.envelope.map(|e| c * e);
        }
    }
    Ok(rows)
}

pub fn consistency_table(rows: &[ConsistencyRow]) -> Table {
    let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), fmt);
    let mut t = Table::new(&[
        "n",
        "m",
        "mean_error",
        "max_error",
        "delta",
        "envelope",
        "fitted_envelope",
        "degenerate",
    ]);
    for r in rows {
        t.push(vec![
            r.n.to_string(),
            r.half_width.to_string(),
            fmt(r.mean_error),
            fmt(r.max_error),
            fmt(r.delta),
            opt(r.envelope),
            opt(r.fitted_envelope),
            r.degenerate.to_string(),
        ]);
    }
    t
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct Theorem2Params {
    /// Kernel sizes used on region 0 pixels.
    pub sizes0: KernelSizes,
    /// Kernel sizes used on region 1 pixels.
    pub sizes1: KernelSizes,
    pub n: usize,
    /// Kernel coordinate scale; `None` means `1 / n`.
    pub scale: Option<f64>,
    /// `None` uses `round(sqrt(n))`.
    pub half_width: Option<usize>,
    pub beta: f64,
    /// `None` uses the theoretical threshold for `beta`.
    pub threshold: Option<f64>,
    pub with_location: bool,
    pub replicates: usize,
    pub geometry: RegionGeometry,
}

impl Theorem2Params {
    pub fn new(sizes0: KernelSize, sizes1: KernelSize, n: usize) -> Self {
        Self {
            sizes0: KernelSizes::Constant(sizes0),
            sizes1: KernelSizes::Constant(sizes1),
            n,
            scale: None,
            half_width: None,
            beta: 1.5,
            threshold: None,
            with_location: false,
            replicates: 10,
            geometry: RegionGeometry::VSplit,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Theorem2Replicate {
    pub fraction: f64,
    pub covered: usize,
    pub components: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Theorem2Report {
    pub threshold: f64,
    pub half_width: usize,
    pub replicates: Vec<Theorem2Replicate>,
    /// Correct pixels over covered pixels, pooled across replicates.
    pub pooled_fraction: f64,
    pub degenerate: bool,
}

fn size_at(sizes: &KernelSizes, r: usize, c: usize) -> Result<KernelSize> {
    match sizes {
        KernelSizes::Constant(s) => Ok(*s),
        KernelSizes::PerPixel(f) => {
            if r < f.rows() && c < f.cols() {
                Ok(*f.get(r, c))
            } else {
                Err(Error::invalid(format!(
                    "per-pixel kernel sizes are {}x{}, smaller than the mosaic",
                    f.rows(),
                    f.cols()
                )))
            }
        }
    }
}

/// Threshold single linkage on one non-stationary kernel-convolution field
/// whose size field switches with the region mask, scored on the pixels
/// covered by boundary-free grid patches. The field is not standardized, so
/// the regions differ in both variance and correlation length.
pub fn theorem2_experiment(params: &Theorem2Params, seed: Seed) -> Result<Theorem2Report> {
    let n = params.n;
    if params.replicates == 0 {
        return Err(Error::invalid("need at least one replicate"));
    }
    let truth = region_mask(&params.geometry, n, n)?;
    if truth.num_labels() != 2 {
        return Err(Error::invalid("the experiment needs a two-region geometry"));
    }
    let mut entries = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            let sizes = if truth.get(r, c) == 0 {
                &params.sizes0
            } else {
                &params.sizes1
            };
            entries.push(size_at(sizes, r, c)?);
        }
    }
    let size_field = KernelSizeField::new(n, n, entries)?;
    let scale = params.scale.unwrap_or_else(|| size_field.default_scale());
    let sampler = NonstationarySampler::new(&size_field, scale, DEFAULT_JITTER)?;
    let m = params
        .half_width
        .unwrap_or_else(|| PatchParams::default_half_width(n));
    let grid = subsample_grid(n, n, m)?;
    let covered = covered_set(&grid, &truth);
    let mut sp = SegmentParams::new(Algorithm::SingleLinkThreshold, 2);
    sp.half_width = Some(m);
    sp.with_location = params.with_location;
    sp.threshold = params.threshold;
    sp.beta = params.beta;
    let runs = replicates(
        params.replicates,
        |r| -> Result<(Theorem2Replicate, usize, f64)> {
            let field = sampler.sample(seed.offset(r as u64));
            let seg = segment(&field, &sp)?;
            let report = best_injective_match(&seg.labels, &truth, Some(&covered))?;
            let correct = report.total - report.mismatched_count;
            Ok((
                Theorem2Replicate {
                    fraction: report.accuracy,
                    covered: report.total,
                    components: seg.labels.num_labels(),
                },
                correct,
                seg.threshold.expect("threshold mode reports its threshold"),
            ))
        },
    )
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let covered_total: usize = runs.iter().map(|r| r.0.covered).sum();
    let correct_total: usize = runs.iter().map(|r| r.1).sum();
    Ok(Theorem2Report {
        threshold: runs[0].2,
        half_width: m,
        pooled_fraction: if covered_total == 0 {
            1.0
        } else {
            correct_total as f64 / covered_total as f64
        },
        replicates: runs.into_iter().map(|r| r.0).collect(),
        degenerate: params.sizes0 == params.sizes1,
    })
}

pub fn theorem2_table(report: &Theorem2Report) -> Table {
    let mut t = Table::new(&[
        "replicate",
        "threshold",
        "m",
        "components",
        "covered",
        "fraction",
        "degenerate",
    ]);
    let row = |name: String, comps: String, covered: usize, fraction: f64| {
        vec![
            name,
            fmt(report.threshold),
            report.half_width.to_string(),
            comps,
            covered.to_string(),
            fmt(fraction),
            report.degenerate.to_string(),
        ]
    };
    for (i, r) in report.replicates.iter().enumerate() {
        t.push(row(
            i.to_string(),
            r.components.to_string(),
            r.covered,
            r.fraction,
        ));
    }
    let covered: usize = report.replicates.iter().map(|r| r.covered).sum();
    t.push(row(
        "pooled".into(),
        "NA".into(),
        covered,
        report.pooled_fraction,
    ));
    t
}

// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lemma3Row {
    pub n: usize,
    pub half_width: usize,
    pub pairs: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
}

/// Kernel sizes growing linearly with `(row + col) / n` from `I` to `3I`.
pub fn linear_kernel_sizes(n: usize) -> Result<KernelSizeField> {
    KernelSizeField::from_fn(n, n, |r, c| {
        KernelSize::isotropic(1.0 + (r + c) as f64 / n as f64)
    })
}

/// Ratio of the true-feature gap `‖C_t − C_s‖∞` to the kernel-size distance
/// `d(s, t)` over random pixel pairs, on [`linear_kernel_sizes`] with scale `1 / n`.
pub fn lemma3_experiment(sizes: &[usize], pairs: usize, seed: Seed) -> Result<Vec<Lemma3Row>> {
    if pairs == 0 {
        return Err(Error::invalid("need at least one pixel pair"));
    }
    sizes
        .iter()
        .map(|&n| {
            let field = linear_kernel_sizes(n)?;
            let m = PatchParams::default_half_width(n);
            let scale = 1.0 / n as f64;
            let mut rng = seed.derive(n as u64).rng();
            let mut picks = Vec::with_capacity(pairs);
            while picks.len() < pairs {
                let s = (rng.gen_range(0..n), rng.gen_range(0..n));
                let t = (rng.gen_range(0..n), rng.gen_range(0..n));
                if kernel_size_metric(&field, s, t) > 0.0 {
                    picks.push((s, t));
                }
            }
            let ratios = replicates(pairs, |i| -> Result<f64> {
                let (s, t) = picks[i];
                let cs = kernel_true_feature(&field, s, m, scale)?;
                let ct = kernel_true_feature(&field, t, m, scale)?;
                let gap = cs
                    .iter()
                    .zip(&ct)
                    .fold(0.0, |acc, (x, y)| f64::max(acc, (x - y).abs()));
                Ok(gap / kernel_size_metric(&field, s, t))
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
            Ok(Lemma3Row {
                n,
                half_width: m,
                pairs,
                max_ratio: ratios.iter().copied().fold(0.0, f64::max),
                mean_ratio: ratios.iter().sum::<f64>() / pairs as f64,
            })
        })
        .collect()
}

pub fn lemma3_table(rows: &[Lemma3Row]) -> Table {
    let mut t = Table::new(&["n", "m", "pairs", "max_ratio", "mean_ratio"]);
    for r in rows {
        t.push(vec![
            r.n.to_string(),
            r.half_width.to_string(),
            r.pairs.to_string(),
            fmt(r.max_ratio),
            fmt(r.mean_ratio),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::MaDirection;

    fn ma(d: MaDirection) -> MAModel {
        MAModel::new(d, 1).unwrap()
    }

    #[test]
    fn huge_deviation_never_exceeded() {
        let rows =
            concentration_experiment(&ma(MaDirection::Vert), &[16, 25], 10.0, 5, Seed(1)).unwrap();
        assert!(rows.iter().all(|r| r.frequency == 0.0));
    }

    #[test]
    fn single_replicate_is_zero_or_one() {
        let rows =
            concentration_experiment(&ma(MaDirection::Vert), &[16], 0.3, 1, Seed(2)).unwrap();
        assert!(rows[0].frequency == 0.0 || rows[0].frequency == 1.0);
    }

    #[test]
    fn identical_models_are_degenerate() {
        let p = ConsistencyParams {
            replicates: 2,
            ..ConsistencyParams::default()
        };
        let m = ma(MaDirection::Diag);
        let rows = consistency_experiment(&m, &m, &[16], &p, Seed(3)).unwrap();
        assert!(rows[0].degenerate);
        assert_eq!(rows[0].envelope, None);
        assert!((0.0..=1.0).contains(&rows[0].mean_error));
        let table = consistency_table(&rows).to_csv(Seed(3));
        assert!(table.contains(",NA,NA,true"));
    }

    #[test]
    fn identical_kernel_fields_are_degenerate() {
        let mut p = Theorem2Params::new(KernelSize::isotropic(1.0), KernelSize::isotropic(1.0), 12);
        p.replicates = 1;
        p.half_width = Some(1);
        p.scale = Some(1.0);
        let r = theorem2_experiment(&p, Seed(4)).unwrap();
        assert!(r.degenerate);
        assert!((0.0..=1.0).contains(&r.pooled_fraction));
    }

    #[test]
    fn lemma3_ratio_is_finite() {
        let rows = lemma3_experiment(&[8], 10, Seed(5)).unwrap();
        assert!(rows[0].max_ratio.is_finite() && rows[0].max_ratio > 0.0);
    }
}
