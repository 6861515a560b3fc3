//! Multi-texture mosaics with ground-truth label masks.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::grid::{Field, LabelMap};
use crate::io;
use crate::seed::Seed;
use crate::synth::{self, KernelSize, KernelSizeField, MAModel, NonstationarySampler};

/// How the image plane is split into regions.
#[derive(Clone, Debug, PartialEq)]
pub enum RegionGeometry {
    /// Left half 0, right half 1 (split at `cols / 2`).
    VSplit,
    /// Top half 0, bottom half 1 (split at `rows / 2`).
    HSplit,
    /// Label 1 strictly inside the circle, 0 outside. Defaults: image center,
    /// radius `min(rows, cols) / 4`.
    Disk {
        center: Option<(f64, f64)>,
        radius: Option<f64>,
    },
    /// Labels 0..4 row-major by half.
    Quadrants,
    /// Labels read verbatim from a PGM/TEXF mask.
    MaskFile(PathBuf),
    /// A mask already in memory.
    Mask(LabelMap),
}

impl RegionGeometry {
    pub fn disk() -> Self {
        RegionGeometry::Disk {
            center: None,
            radius: None,
        }
    }

    /// Number of regions, or `None` when it is only known after loading the mask.
    pub fn region_count(&self) -> Option<usize> {
        match self {
            RegionGeometry::VSplit | RegionGeometry::HSplit | RegionGeometry::Disk { .. } => {
                Some(2)
            }
            RegionGeometry::Quadrants => Some(4),
            RegionGeometry::MaskFile(_) => None,
            RegionGeometry::Mask(m) => Some(m.num_labels()),
        }
    }
}

/// Rasterizes `geom` into a label map.
pub fn region_mask(geom: &RegionGeometry, rows: usize, cols: usize) -> Result<LabelMap> {
    if rows < 2 || cols < 2 {
        return Err(Error::invalid(format!(
            "mosaic must be at least 2x2, got {rows}x{cols}"
        )));
    }
    let mask = match geom {
        RegionGeometry::VSplit => LabelMap::from_fn(rows, cols, |_, c| u32::from(c >= cols / 2)),
        RegionGeometry::HSplit => LabelMap::from_fn(rows, cols, |r, _| u32::from(r >= rows / 2)),
        RegionGeometry::Quadrants => LabelMap::from_fn(rows, cols, |r, c| {
            2 * u32::from(r >= rows / 2) + u32::from(c >= cols / 2)
        }),
        RegionGeometry::Disk { center, radius } => {
            let (cr, cc) = center.unwrap_or(((rows as f64 - 1.0) / 2.0, (cols as f64 - 1.0) / 2.0));
            let radius = radius.unwrap_or(rows.min(cols) as f64 / 4.0);
            if !(radius > 0.0) {
                return Err(Error::invalid("disk radius must be positive"));
            }
            LabelMap::from_fn(rows, cols, |r, c| {
                u32::from((r as f64 - cr).hypot(c as f64 - cc) < radius)
            })
        }
        RegionGeometry::MaskFile(path) => checked_mask(io::load_label_map(path)?, rows, cols)?,
        RegionGeometry::Mask(m) => checked_mask(m.clone(), rows, cols)?,
    };
    Ok(mask)
}

fn checked_mask(mask: LabelMap, rows: usize, cols: usize) -> Result<LabelMap> {
    if mask.shape() != (rows, cols) {
        return Err(Error::ShapeMismatch {
            expected_rows: rows,
            expected_cols: cols,
            rows: mask.rows(),
            cols: mask.cols(),
        });
    }
    if let Some(missing) = mask.histogram().iter().position(|&n| n == 0) {
        return Err(Error::invalid(format!(
            "mask labels must be contiguous from 0; label {missing} is unused"
        )));
    }
    Ok(mask)
}

/// Shifts and scales to sample mean 0 and unbiased sample variance 1.
pub fn standardize_texture(field: &Field) -> Result<Field> {
    let n = field.len();
    if n < 2 {
        return Err(Error::ZeroVariance);
    }
    let mean = field.values().iter().sum::<f64>() / n as f64;
    let ss: f64 = field.values().iter().map(|v| (v - mean).powi(2)).sum();
    let var = ss / (n - 1) as f64;
    if !(var > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let sd = var.sqrt();
    Ok(Field::from_raw(
        field.rows(),
        field.cols(),
        field.values().iter().map(|v| (v - mean) / sd).collect(),
    ))
}

/// Kernel sizes of a kernel-convolution texture.
#[derive(Clone, Debug, PartialEq)]
pub enum KernelSizes {
    /// The same `Σ` at every pixel (a stationary texture).
    Constant(KernelSize),
    /// Per-pixel sizes; must match the mosaic shape.
    PerPixel(KernelSizeField),
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelTexture {
    pub sizes: KernelSizes,
    /// Coordinate scale; `None` means `1 / n`.
    pub scale: Option<f64>,
}

impl KernelTexture {
    pub fn isotropic(v: f64, scale: Option<f64>) -> Self {
        Self {
            sizes: KernelSizes::Constant(KernelSize::isotropic(v)),
            scale,
        }
    }

    pub fn size_field(&self, rows: usize, cols: usize) -> Result<KernelSizeField> {
        match &self.sizes {
            KernelSizes::Constant(s) => KernelSizeField::constant(rows, cols, *s),
            KernelSizes::PerPixel(f) if f.rows() == rows && f.cols() == cols => Ok(f.clone()),
            KernelSizes::PerPixel(f) => Err(Error::ShapeMismatch {
                expected_rows: rows,
                expected_cols: cols,
                rows: f.rows(),
                cols: f.cols(),
            }),
        }
    }
}

/// Where a region's pixels come from.
#[derive(Clone, Debug, PartialEq)]
pub enum TextureSource {
    Ma(MAModel),
    Kernel(KernelTexture),
    /// Grayscale PGM or TEXF image; the top-left `rows x cols` window is used.
    ImageFile(PathBuf),
    /// An in-memory image, used like `ImageFile`.
    Field(Field),
}

enum Prepared {
    Ma(MAModel),
    Kernel(Box<NonstationarySampler>),
    Fixed(Field),
}

/// Reusable mosaic generator: loads images and factors kernel covariances once.
pub struct MosaicGenerator {
    rows: usize,
    cols: usize,
    truth: LabelMap,
    sources: Vec<Prepared>,
    standardize: bool,
}

impl MosaicGenerator {
    pub fn new(
        sources: &[TextureSource],
        geom: &RegionGeometry,
        rows: usize,
        cols: usize,
    ) -> Result<Self> {
        let truth = region_mask(geom, rows, cols)?;
        let regions = truth.num_labels().max(geom.region_count().unwrap_or(0));
        if sources.len() != regions {
            return Err(Error::invalid(format!(
                "geometry has {regions} regions but {} texture sources were given",
                sources.len()
            )));
        }
        let prepared = sources
            .iter()
            .map(|s| prepare(s, rows, cols))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            rows,
            cols,
            truth,
            sources: prepared,
            standardize: true,
        })
    }

    /// Turns per-source standardization on or off (on by default).
    pub fn standardize(mut self, on: bool) -> Self {
        self.standardize = on;
        self
    }

    pub fn truth(&self) -> &LabelMap {
        &self.truth
    }

    /// Draws every source at full size, standardizes it, and takes region `k`'s
    /// pixels from source `k`. Source `k` uses the sub-stream `seed.derive(k)`.
    pub fn generate(&self, seed: Seed) -> Result<Field> {
        let textures = self
            .sources
            .iter()
            .enumerate()
            .map(|(k, src)| {
                let raw = match src {
                    Prepared::Ma(model) => {
                        synth::sample_ma_field(model, self.rows, self.cols, seed.derive(k as u64))
                    }
                    Prepared::Kernel(sampler) => sampler.sample(seed.derive(k as u64)),
                    Prepared::Fixed(f) => f.clone(),
                };
                if self.standardize {
                    standardize_texture(&raw)
                } else {
                    Ok(raw)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Field::from_fn(self.rows, self.cols, |r, c| {
            textures[self.truth.get(r, c) as usize].get(r, c)
        }))
    }
}

fn prepare(source: &TextureSource, rows: usize, cols: usize) -> Result<Prepared> {
    Ok(match source {
        TextureSource::Ma(m) => Prepared::Ma(*m),
        TextureSource::Kernel(k) => {
            let sizes = k.size_field(rows, cols)?;
            let scale = k.scale.unwrap_or_else(|| sizes.default_scale());
            Prepared::Kernel(Box::new(NonstationarySampler::new(
                &sizes,
                scale,
                synth::DEFAULT_JITTER,
            )?))
        }
        TextureSource::ImageFile(path) => {
            Prepared::Fixed(crop(&io::load_grayscale_image(path)?, rows, cols)?)
        }
        TextureSource::Field(f) => Prepared::Fixed(crop(f, rows, cols)?),
    })
}

fn crop(image: &Field, rows: usize, cols: usize) -> Result<Field> {
    if image.rows() < rows || image.cols() < cols {
        return Err(Error::invalid(format!(
            "texture source {}x{} is smaller than the {rows}x{cols} mosaic",
            image.rows(),
            image.cols()
        )));
    }
    Ok(Field::from_fn(rows, cols, |r, c| image.get(r, c)))
}

/// One-shot mosaic: the composed field and its ground-truth labels.
pub fn compose_mosaic(
    sources: &[TextureSource],
    geom: &RegionGeometry,
    rows: usize,
    cols: usize,
    seed: Seed,
) -> Result<(Field, LabelMap)> {
    let gen = MosaicGenerator::new(sources, geom, rows, cols)?;
    let field = gen.generate(seed)?;
    Ok((field, gen.truth))
}
