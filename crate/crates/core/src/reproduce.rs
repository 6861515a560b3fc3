//! Accuracy tables: synthetic moving-average mosaics and Brodatz mosaics.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::evaluation::{best_permutation_match, Table};
use crate::mosaic::{MosaicGenerator, RegionGeometry, TextureSource};
use crate::pipeline::{segment, Algorithm, SegmentParams};
use crate::seed::Seed;
use crate::synth::{MAModel, MaDirection};

/// Model-number pairs of the six synthetic mosaics.
pub const MA_PAIRS: [(usize, usize); 6] = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];

/// Brodatz textures needed by the natural-image tables.
pub const BRODATZ_TEXTURES: [&str; 8] = ["D4", "D6", "D20", "D21", "D34", "D52", "D55", "D77"];

const BRODATZ_PAIRS: [[&str; 2]; 3] = [["D21", "D55"], ["D21", "D77"], ["D55", "D77"]];
const BRODATZ_QUADS: [[&str; 4]; 3] = [
    ["D4", "D6", "D20", "D52"],
    ["D21", "D34", "D55", "D77"],
    ["D6", "D21", "D34", "D77"],
];

/// Column order of every table.
pub const TABLE_ALGORITHMS: [Algorithm; 3] =
    [Algorithm::SingleLinkK, Algorithm::Ward, Algorithm::KMeans];

#[derive(Clone, Debug, PartialEq)]
pub struct ReproduceParams {
    /// 1: synthetic; 2: Brodatz split; 3: Brodatz disk; 4: Brodatz quadrants.
    pub table: u8,
    pub seeds: Vec<Seed>,
    /// Half-width of the moving-average models.
    pub ma_half_width: usize,
    /// Mosaic side; `None` gives 128 for the synthetic table and 160 otherwise.
    pub size: Option<usize>,
    pub half_width: usize,
    pub with_location: bool,
    pub restarts: usize,
    pub linkage_points: usize,
    pub brodatz_dir: Option<PathBuf>,
}

impl ReproduceParams {
    pub fn new(table: u8) -> Self {
        Self {
            table,
            seeds: vec![Seed(1)],
            ma_half_width: 2,
            size: None,
            half_width: 11,
            with_location: true,
            restarts: 10,
            linkage_points: 1024,
            brodatz_dir: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MosaicRow {
    pub name: String,
    /// `per_seed[s][a]`: accuracy of `TABLE_ALGORITHMS[a]` under seed `s`.
    pub per_seed: Vec<[f64; 3]>,
    /// Mean over seeds, in `TABLE_ALGORITHMS` order.
    pub accuracy: [f64; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReproduceReport {
    pub table: u8,
    pub rows: Vec<MosaicRow>,
    pub mean: [f64; 3],
}

struct MosaicSpec {
    name: String,
    sources: Vec<TextureSource>,
    geometry: RegionGeometry,
}

/// Locates `D<n>.pgm` (or the zero-padded `D0<n>.pgm`) in `dir`.
pub fn find_brodatz(dir: &Path, name: &str) -> Option<PathBuf> {
    let number = &name[1..];
    [format!("{name}.pgm"), format!("D{number:0>2}.pgm")]
        .into_iter()
        .map(|f| dir.join(f))
        .find(|p| p.is_file())
}

fn brodatz_sources(params: &ReproduceParams, names: &[&str]) -> Result<Vec<TextureSource>> {
    let dir = params.brodatz_dir.as_deref().ok_or_else(|| {
        Error::invalid(format!(
            "table {} needs --brodatz-dir with {} as PGM files",
            params.table,
            BRODATZ_TEXTURES.map(|n| format!("{n}.pgm")).join(", ")
        ))
    })?;
    names
        .iter()
        .map(|n| {
            find_brodatz(dir, n)
                .map(TextureSource::ImageFile)
                .ok_or_else(|| Error::invalid(format!("missing {n}.pgm in {}", dir.display())))
        })
        .collect()
}

fn mosaic_specs(params: &ReproduceParams) -> Result<Vec<MosaicSpec>> {
    let ma = |model: usize| -> Result<TextureSource> {
        let dir = MaDirection::from_model_number(model).expect("model numbers 1..=4");
        Ok(TextureSource::Ma(MAModel::new(dir, params.ma_half_width)?))
    };
    match params.table {
        1 => MA_PAIRS
            .iter()
            .map(|&(a, b)| {
                Ok(MosaicSpec {
                    name: format!("Model {a} vs Model {b}"),
                    sources: vec![ma(a)?, ma(b)?],
                    geometry: RegionGeometry::VSplit,
                })
            })
            .collect(),
        2 | 3 => {
            let geometry = if params.table == 2 {
                RegionGeometry::VSplit
            } else {
                RegionGeometry::disk()
            };
            BRODATZ_PAIRS
                .iter()
                .map(|pair| {
                    Ok(MosaicSpec {
                        name: pair.join(" vs "),
                        sources: brodatz_sources(params, pair)?,
                        geometry: geometry.clone(),
                    })
                })
                .collect()
        }
        4 => BRODATZ_QUADS
            .iter()
            .map(|quad| {
                Ok(MosaicSpec {
                    name: quad.join(" & "),
                    sources: brodatz_sources(params, quad)?,
                    geometry: RegionGeometry::Quadrants,
                })
            })
            .collect(),
        t => Err(Error::invalid(format!(
            "unknown table {t}; expected 1, 2, 3 or 4"
        ))),
    }
}

pub fn reproduce_table(params: &ReproduceParams) -> Result<ReproduceReport> {
    if params.seeds.is_empty() {
        return Err(Error::invalid("need at least one seed"));
    }
    let specs = mosaic_specs(params)?;
    let size = params
        .size
        .unwrap_or(if params.table == 1 { 128 } else { 160 });
    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let gen = MosaicGenerator::new(&spec.sources, &spec.geometry, size, size)?;
        let k = spec.sources.len();
        let mut per_seed = Vec::with_capacity(params.seeds.len());
        for &seed in &params.seeds {
            let field = gen.generate(seed)?;
            let mut acc = [0.0; 3];
            for (slot, &algorithm) in acc.iter_mut().zip(&TABLE_ALGORITHMS) {
                let mut sp = SegmentParams::new(algorithm, k);
                sp.half_width = Some(params.half_width);
                sp.with_location = params.with_location;
                sp.restarts = params.restarts;
                sp.seed = seed;
                sp.linkage_points = params.linkage_points;
                let seg = segment(&field, &sp)?;
                *slot = best_permutation_match(&seg.labels, gen.truth(), k)?.accuracy;
            }
            per_seed.push(acc);
        }
        let accuracy = mean_columns(&per_seed);
        rows.push(MosaicRow {
            name: spec.name,
            per_seed,
            accuracy,
        });
    }
    let mean = mean_columns(&rows.iter().map(|r| r.accuracy).collect::<Vec<_>>());
    Ok(ReproduceReport {
        table: params.table,
        rows,
        mean,
    })
}

fn mean_columns(rows: &[[f64; 3]]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for row in rows {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v / rows.len() as f64;
        }
    }
    out
}

/// One row per mosaic plus a mean row; accuracies to four decimals.
pub fn report_table(report: &ReproduceReport) -> Table {
    let mut t = Table::new(&["mosaic", "single_linkage", "ward_linkage", "kmeans"]);
    let cells = |name: &str, acc: &[f64; 3]| {
        std::iter::once(name.to_string())
            .chain(acc.iter().map(|a| format!("{a:.4}")))
            .collect()
    };
    for row in &report.rows {
        t.push(cells(&row.name, &row.accuracy));
    }
    t.push(cells("Mean Value", &report.mean));
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brodatz_tables_need_a_directory() {
        let err = reproduce_table(&ReproduceParams::new(2))
            .unwrap_err()
            .to_string();
        for name in BRODATZ_TEXTURES {
            assert!(err.contains(&format!("{name}.pgm")), "{err}");
        }
        assert!(reproduce_table(&ReproduceParams::new(7)).is_err());
    }

    #[test]
    fn small_synthetic_table_has_six_rows_and_a_mean() {
        let mut p = ReproduceParams::new(1);
        p.size = Some(24);
        p.half_width = 2;
        p.ma_half_width = 1;
        p.restarts = 2;
        p.linkage_points = 64;
        let report = reproduce_table(&p).unwrap();
        let csv = report_table(&report).to_csv(Seed(1));
        assert_eq!(csv.lines().count(), 1 + 6 + 1 + 1);
        assert!(csv.contains("Model 1 vs Model 2,"));
        assert!(csv.contains("Mean Value,"));
        assert!(report.mean.iter().all(|a| (0.0..=1.0).contains(a)));
    }
}
