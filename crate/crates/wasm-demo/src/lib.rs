//! Browser bindings: generate a mosaic, segment it, inspect one pixel's feature.
//!
//! Logic sits in plain functions that return `Result<_, String>` so it can be
//! tested natively; the `#[wasm_bindgen]` layer only converts errors.

use texseg::evaluation::best_permutation_match;
use texseg::features::{feature_vector, ma_true_feature, Padding, PatchParams};
use texseg::io::field_to_pgm;
use texseg::mosaic::{MosaicGenerator, RegionGeometry, TextureSource};
use texseg::pipeline::{segment, Algorithm, SegmentParams};
use texseg::synth::{MAModel, MaDirection};
use texseg::{Field, LabelMap, Seed};
use wasm_bindgen::prelude::*;

/// Largest side the demo accepts; keeps a k-means run under a second or so.
pub const MAX_SIDE: usize = 128;

#[wasm_bindgen]
pub struct Mosaic {
    field: Field,
    truth: LabelMap,
    models: Vec<MAModel>,
}

#[wasm_bindgen]
pub struct Segmented {
    labels: LabelMap,
    accuracy: f64,
    clusters: usize,
    half_width: usize,
}

fn parse_model(name: &str, ma_width: usize) -> Result<MAModel, String> {
    let number = name
        .strip_prefix("ma")
        .and_then(|n| n.parse::<usize>().ok())
        .and_then(MaDirection::from_model_number)
        .ok_or_else(|| format!("unknown model '{name}'; expected ma1..ma4"))?;
    MAModel::new(number, ma_width).map_err(|e| e.to_string())
}

fn parse_geometry(name: &str) -> Result<RegionGeometry, String> {
    match name {
        "vsplit" => Ok(RegionGeometry::VSplit),
        "hsplit" => Ok(RegionGeometry::HSplit),
        "disk" => Ok(RegionGeometry::disk()),
        "quadrants" => Ok(RegionGeometry::Quadrants),
        _ => Err(format!("unknown geometry '{name}'")),
    }
}

/// `models` is a comma-separated list of `ma1`..`ma4`, one per region.
pub fn build_mosaic(
    models: &str,
    geometry: &str,
    size: usize,
    ma_width: usize,
    seed: u64,
) -> Result<Mosaic, String> {
    if !(8..=MAX_SIDE).contains(&size) {
        return Err(format!("size must be between 8 and {MAX_SIDE}"));
    }
    let parsed = models
        .split(',')
        .map(|m| parse_model(m.trim(), ma_width))
        .collect::<Result<Vec<_>, _>>()?;
    let sources: Vec<TextureSource> = parsed.iter().map(|&m| TextureSource::Ma(m)).collect();
    let gen = MosaicGenerator::new(&sources, &parse_geometry(geometry)?, size, size)
        .map_err(|e| e.to_string())?;
    let field = gen.generate(Seed(seed)).map_err(|e| e.to_string())?;
    Ok(Mosaic {
        field,
        truth: gen.truth().clone(),
        models: parsed,
    })
}

pub fn run_segmentation(
    mosaic: &Mosaic,
    algorithm: &str,
    k: usize,
    half_width: usize,
    with_location: bool,
    seed: u64,
) -> Result<Segmented, String> {
    let algorithm = Algorithm::from_name(algorithm)
        .ok_or_else(|| format!("unknown algorithm '{algorithm}'"))?;
    let mut params = SegmentParams::new(algorithm, k);
    params.half_width = (half_width > 0).then_some(half_width);
    params.with_location = with_location;
    params.seed = Seed(seed);
    params.restarts = 3;
    let seg = segment(&mosaic.field, &params).map_err(|e| e.to_string())?;
    let labels_k = seg.labels.num_labels().max(mosaic.truth.num_labels());
    // threshold linkage can return many components; score only small label sets
    let accuracy = if labels_k <= texseg::evaluation::MAX_PERMUTATION_K {
        best_permutation_match(&seg.labels, &mosaic.truth, labels_k)
            .map_err(|e| e.to_string())?
            .accuracy
    } else {
        f64::NAN
    };
    Ok(Segmented {
        clusters: seg.labels.num_labels(),
        labels: seg.labels,
        accuracy,
        half_width: seg.half_width,
    })
}

/// Gray levels spread evenly over `0..=255` so labels are visible.
fn spread_labels(labels: &LabelMap) -> Vec<u8> {
    let k = labels.num_labels().max(2) as u32;
    labels
        .labels()
        .iter()
        .map(|&l| (l.min(k - 1) * 255 / (k - 1)) as u8)
        .collect()
}

#[wasm_bindgen]
impl Mosaic {
    pub fn side(&self) -> usize {
        self.field.rows()
    }

    /// Field rescaled to 8-bit gray, row-major.
    pub fn gray(&self) -> Vec<u8> {
        field_to_pgm(&self.field).pixels
    }

    /// Ground truth as spread gray levels.
    pub fn truth_gray(&self) -> Vec<u8> {
        spread_labels(&self.truth)
    }

    /// Observed autocovariances at `(row, col)` over lags `{-m..m}^2`, row-major by lag.
    pub fn feature_at(&self, row: usize, col: usize, half_width: usize) -> Vec<f64> {
        let n = self.field.rows();
        let (row, col) = (row.min(n - 1), col.min(n - 1));
        let params = PatchParams::new(half_width, Padding::Reflect);
        feature_vector(&self.field, (row, col), &params, false, n)
            .as_slice()
            .to_vec()
    }

    /// True autocovariances of the texture that owns `(row, col)`.
    pub fn true_feature_at(&self, row: usize, col: usize, half_width: usize) -> Vec<f64> {
        let n = self.field.rows();
        let region = self.truth.get(row.min(n - 1), col.min(n - 1)) as usize;
        match self.models.get(region) {
            Some(model) => ma_true_feature(model, half_width),
            None => Vec::new(),
        }
    }

    pub fn region_at(&self, row: usize, col: usize) -> u32 {
        let n = self.field.rows();
        self.truth.get(row.min(n - 1), col.min(n - 1))
    }
}

#[wasm_bindgen]
impl Segmented {
    pub fn gray(&self) -> Vec<u8> {
        spread_labels(&self.labels)
    }

    /// Label per pixel, row-major.
    pub fn labels(&self) -> Vec<u32> {
        self.labels.labels().to_vec()
    }

    /// Best-permutation accuracy against the truth; NaN when there are more than eight labels.
    pub fn accuracy(&self) -> f64 {
        self.accuracy
    }

    pub fn clusters(&self) -> usize {
        self.clusters
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }
}

#[wasm_bindgen(js_name = generateMosaic)]
pub fn generate_mosaic(
    models: &str,
    geometry: &str,
    size: usize,
    ma_width: usize,
    seed: u32,
) -> Result<Mosaic, JsError> {
    build_mosaic(models, geometry, size, ma_width, u64::from(seed)).map_err(|e| JsError::new(&e))
}

/// `half_width = 0` picks `round(sqrt(size))`.
#[wasm_bindgen(js_name = segmentMosaic)]
pub fn segment_mosaic(
    mosaic: &Mosaic,
    algorithm: &str,
    k: usize,
    half_width: usize,
    with_location: bool,
    seed: u32,
) -> Result<Segmented, JsError> {
    run_segmentation(
        mosaic,
        algorithm,
        k,
        half_width,
        with_location,
        u64::from(seed),
    )
    .map_err(|e| JsError::new(&e))
}
