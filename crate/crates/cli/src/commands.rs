use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use serde_json::json;
use texseg::evaluation::{
    best_injective_match, best_permutation_match, concentration_experiment, concentration_table,
    consistency_experiment, consistency_table, lemma3_experiment, lemma3_table,
    theorem2_experiment, theorem2_table, ConsistencyParams, MatchReport, Table, Theorem2Params,
    MAX_PERMUTATION_K,
};
use texseg::features::{all_features, feature_vector, PatchParams};
use texseg::io::{self, FeatureDump};
use texseg::mosaic::{KernelSizes, MosaicGenerator, TextureSource};
use texseg::pipeline::{segment as run_segment, Algorithm, SegmentParams};
use texseg::reproduce::{report_table, reproduce_table, ReproduceParams, TABLE_ALGORITHMS};
use texseg::synth::KernelSize;
use texseg::{LabelMap, Seed};

use crate::manifest::ManifestBuilder;
use crate::{
    spec, EvaluateArgs, Experiment, FeaturesArgs, GenerateArgs, ReproduceArgs, SegmentArgs,
    TheoryArgs,
};

fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn labels_csv(labels: &LabelMap) -> String {
    let mut out = String::from("row,col,label\n");
    for r in 0..labels.rows() {
        for c in 0..labels.cols() {
            writeln!(out, "{r},{c},{}", labels.get(r, c)).expect("writing to a String");
        }
    }
    out
}

/// Exhaustive matching when both maps use at most `MAX_PERMUTATION_K` labels,
/// otherwise the injective matcher (extra estimated labels count as errors).
fn match_labels(est: &LabelMap, truth: &LabelMap) -> Result<MatchReport> {
    let k = est.num_labels().max(truth.num_labels());
    if k <= MAX_PERMUTATION_K {
        Ok(best_permutation_match(est, truth, k)?)
    } else {
        Ok(best_injective_match(est, truth, None)?)
    }
}

fn match_csv(report: &MatchReport) -> String {
    let permutation = report
        .permutation
        .iter()
        .enumerate()
        .map(|(from, to)| match to {
            Some(t) => format!("{from}>{t}"),
            None => format!("{from}>NA"),
        })
        .collect::<Vec<_>>()
        .join(";");
    format!(
        "accuracy,error_rate,mismatched_count,total,permutation\n{:.4},{:.4},{},{},{permutation}\n",
        report.accuracy, report.error_rate, report.mismatched_count, report.total
    )
}

pub fn generate(a: GenerateArgs) -> Result<()> {
    let rows = a.rows.unwrap_or(a.size);
    let cols = a.cols.unwrap_or(a.size);
    let geometry = spec::geometry(&a.geom)?;
    let sources = a
        .models
        .iter()
        .map(|m| spec::texture_source(m, a.ma_width, a.kernel_scale))
        .collect::<Result<Vec<_>>>()?;
    let gen = MosaicGenerator::new(&sources, &geometry, rows, cols)?.standardize(!a.no_standardize);
    let seed = Seed(a.seed);
    let field = gen.generate(seed)?;

    prepare_dir(&a.out)?;
    let mut manifest = ManifestBuilder::new(
        "generate",
        Some(a.seed),
        json!({
            "models": a.models, "geom": a.geom, "rows": rows, "cols": cols,
            "ma_width": a.ma_width, "kernel_scale": a.kernel_scale, "standardize": !a.no_standardize,
        }),
    );
    for s in &sources {
        if let TextureSource::ImageFile(p) = s {
            manifest.input(p);
        }
    }
    let texf = a.out.join("mosaic.texf");
    io::save_texf(&texf, &field)?;
    let preview = a.out.join("mosaic.pgm");
    io::save_pgm(&preview, &io::field_to_pgm(&field))?;
    let truth = a.out.join("truth.pgm");
    io::save_pgm(&truth, &io::labels_to_pgm(gen.truth())?)?;
    for p in [&texf, &preview, &truth] {
        manifest.output(p);
    }
    manifest.finish(&a.out)?;
    println!(
        "generate: {rows}x{cols} mosaic with {} regions -> {}",
        sources.len(),
        a.out.display()
    );
    Ok(())
}

pub fn features(a: FeaturesArgs) -> Result<()> {
    let field = io::load_grayscale_image(&a.input)
        .with_context(|| format!("reading {}", a.input.display()))?;
    let (rows, cols) = field.shape();
    let m =
        a.m.unwrap_or_else(|| PatchParams::default_half_width(rows.max(cols)));
    let params = PatchParams::new(m, a.padding.into());
    let feats = all_features(&field, &params, a.with_location)?;
    if let Some(at) = &a.at {
        ensure!(at.len() == 2, "--at takes row,col");
        let (r, c) = (at[0], at[1]);
        ensure!(
            r < rows && c < cols,
            "pixel ({r}, {c}) is outside the {rows}x{cols} image"
        );
        let v = feature_vector(&field, (r, c), &params, a.with_location, rows.max(cols));
        let cells: Vec<String> = v.as_slice().iter().map(|x| format!("{x:.6}")).collect();
        println!("feature at ({r},{c}): {}", cells.join(" "));
    }
    prepare_dir(&a.out)?;
    let mut manifest = ManifestBuilder::new(
        "features",
        None,
        json!({ "m": m, "padding": format!("{:?}", a.padding).to_lowercase(), "with_location": a.with_location }),
    );
    manifest.input(&a.input);
    let path = a.out.join("features.texc");
    let dim = feats.dim();
    io::save_texc(
        &path,
        &FeatureDump {
            rows,
            cols,
            feature_len: dim,
            values: feats.into_data(),
        },
    )?;
    manifest.output(&path);
    manifest.finish(&a.out)?;
    println!(
        "features: {rows}x{cols} pixels, {dim} values each (m = {m}) -> {}",
        path.display()
    );
    Ok(())
}

pub fn segment(a: SegmentArgs) -> Result<()> {
    let algorithm: Algorithm = a.algo.into();
    let k = match (algorithm, a.k) {
        (_, Some(k)) => k,
        (Algorithm::SingleLinkThreshold, None) => 2,
        (_, None) => bail!("--k is required for --algo {}", algorithm.name()),
    };
    let field = io::load_grayscale_image(&a.input)
        .with_context(|| format!("reading {}", a.input.display()))?;
    let truth = a
        .truth
        .as_ref()
        .map(|p| io::load_label_map(p).with_context(|| format!("reading {}", p.display())))
        .transpose()?;
    let mut params = SegmentParams::new(algorithm, k);
    params.half_width = a.m;
    params.padding = a.padding.into();
    params.with_location = a.with_location;
    params.threshold = a.b;
    params.beta = a.beta;
    params.min_cluster_size = a.min_size;
    params.restarts = a.restarts;
    params.seed = Seed(a.seed);
    params.metric = a.metric.into();
    params.linkage_points = a.linkage_points;
    let seg = run_segment(&field, &params)?;

    prepare_dir(&a.out)?;
    let mut manifest = ManifestBuilder::new(
        "segment",
        Some(a.seed),
        json!({
            "algo": algorithm.name(), "k": k, "m": seg.half_width, "with_location": a.with_location,
            "b": seg.threshold, "beta": a.beta, "min_size": a.min_size, "restarts": a.restarts,
            "padding": format!("{:?}", a.padding).to_lowercase(), "metric": format!("{:?}", a.metric).to_lowercase(),
            "linkage_points": a.linkage_points,
        }),
    );
    manifest.input(&a.input);
    let csv = a.out.join("labels.csv");
    write_text(&csv, &labels_csv(&seg.labels))?;
    let summary = a.out.join("cluster.csv");
    let mut text =
        String::from("objective_sq_euclid,objective_sq_linf,iterations,restart_index,seed\n");
    match &seg.cluster {
        Some(c) => writeln!(
            text,
            "{},{},{},{},{}",
            c.objective_sq_euclid, c.objective_sq_linf, c.iterations, c.restart_index, c.seed.0
        ),
        None => writeln!(text, "NA,NA,NA,NA,{}", a.seed),
    }
    .expect("writing to a String");
    write_text(&summary, &text)?;
    let pgm = a.out.join("labels.pgm");
    io::save_pgm(&pgm, &io::labels_to_pgm(&seg.labels)?)?;
    for p in [&pgm, &csv, &summary] {
        manifest.output(p);
    }
    if let Some(truth) = &truth {
        let report = match_labels(&seg.labels, truth)?;
        let path = a.out.join("match.csv");
        write_text(&path, &match_csv(&report))?;
        manifest.output(&path);
        println!("accuracy: {:.4}", report.accuracy);
    }
    if let Some(p) = &a.truth {
        manifest.input(p);
    }
    manifest.finish(&a.out)?;
    println!(
        "segment: {} produced {} clusters (m = {}) -> {}",
        algorithm.name(),
        seg.labels.num_labels(),
        seg.half_width,
        a.out.display()
    );
    Ok(())
}

pub fn evaluate(a: EvaluateArgs) -> Result<()> {
    let est =
        io::load_label_map(&a.labels).with_context(|| format!("reading {}", a.labels.display()))?;
    let truth =
        io::load_label_map(&a.truth).with_context(|| format!("reading {}", a.truth.display()))?;
    let report = match_labels(&est, &truth)?;
    println!("accuracy: {:.4}", report.accuracy);
    println!("error_rate: {:.4}", report.error_rate);
    if let Some(out) = &a.out {
        prepare_dir(out)?;
        let mut manifest = ManifestBuilder::new("evaluate", None, json!({}));
        manifest.input(&a.labels);
        manifest.input(&a.truth);
        let path = out.join("match.csv");
        write_text(&path, &match_csv(&report))?;
        manifest.output(&path);
        manifest.finish(out)?;
    }
    Ok(())
}

pub fn reproduce(a: ReproduceArgs) -> Result<()> {
    let mut params = ReproduceParams::new(a.table);
    params.seeds = a.seed.iter().map(|&s| Seed(s)).collect();
    params.ma_half_width = a.ma_width;
    params.size = a.size;
    params.half_width = a.m;
    params.with_location = a.with_location;
    params.restarts = a.restarts;
    params.linkage_points = a.linkage_points;
    params.brodatz_dir = a.brodatz_dir.clone();
    let report = reproduce_table(&params)?;

    prepare_dir(&a.out)?;
    let first_seed = params.seeds[0];
    let mut manifest = ManifestBuilder::new(
        "reproduce",
        Some(first_seed.0),
        json!({
            "table": a.table, "seeds": a.seed, "size": a.size, "m": a.m, "ma_width": a.ma_width,
            "with_location": a.with_location, "restarts": a.restarts, "linkage_points": a.linkage_points,
        }),
    );
    if let Some(dir) = &a.brodatz_dir {
        manifest.input(dir);
    }
    let table = report_table(&report);
    let path = a.out.join(format!("table{}.csv", a.table));
    table.write(&path, first_seed)?;
    manifest.output(&path);

    let mut per_seed = Table::new(&["mosaic", "seed", "algorithm", "accuracy"]);
    for row in &report.rows {
        for (seed, acc) in params.seeds.iter().zip(&row.per_seed) {
            for (algo, value) in TABLE_ALGORITHMS.iter().zip(acc) {
                per_seed.push(vec![
                    row.name.clone(),
                    seed.0.to_string(),
                    algo.name().to_string(),
                    format!("{value:.4}"),
                ]);
            }
        }
    }
    let per_seed_path = a.out.join(format!("table{}_per_seed.csv", a.table));
    per_seed.write(&per_seed_path, first_seed)?;
    manifest.output(&per_seed_path);
    manifest.finish(&a.out)?;
    print!("{}", table.to_csv(first_seed));
    Ok(())
}

fn default_sizes(sizes: &Option<Vec<usize>>, fallback: &[usize]) -> Vec<usize> {
    sizes.clone().unwrap_or_else(|| fallback.to_vec())
}

pub fn theory(a: TheoryArgs) -> Result<()> {
    let seed = Seed(a.seed);
    let (name, table, parameters) = match a.experiment {
        Experiment::Concentration => {
            let width = a.ma_width.unwrap_or(1);
            let models = a.models.clone().unwrap_or_else(|| vec!["ma3".into()]);
            ensure!(
                models.len() == 1,
                "concentration takes one model, got {}",
                models.len()
            );
            let model = spec::ma_model(&models[0], width)?;
            let sizes = default_sizes(&a.sizes, &[36, 64, 100, 144]);
            let replicates = a.replicates.unwrap_or(200);
            let rows = concentration_experiment(&model, &sizes, a.a, replicates, seed)?;
            let params = json!({ "model": models[0], "ma_width": width, "sizes": sizes, "a": a.a, "replicates": replicates });
            ("concentration", concentration_table(&rows), params)
        }
        Experiment::Consistency => {
            let width = a.ma_width.unwrap_or(2);
            let models = a
                .models
                .clone()
                .unwrap_or_else(|| vec!["ma1".into(), "ma2".into()]);
            ensure!(
                models.len() == 2,
                "consistency takes two models, got {}",
                models.len()
            );
            let m0 = spec::ma_model(&models[0], width)?;
            let m1 = spec::ma_model(&models[1], width)?;
            let sizes = default_sizes(&a.sizes, &[36, 64, 100, 144]);
            let params = ConsistencyParams {
                replicates: a.replicates.unwrap_or(20),
                beta: a.beta,
                restarts: a.restarts,
                with_location: a.with_location,
                half_width: a.m,
            };
            let rows = consistency_experiment(&m0, &m1, &sizes, &params, seed)?;
            let json = json!({
                "models": models, "ma_width": width, "sizes": sizes, "replicates": params.replicates,
                "beta": a.beta, "restarts": a.restarts, "with_location": a.with_location, "m": a.m,
            });
            ("consistency", consistency_table(&rows), json)
        }
        Experiment::Theorem2 => {
            ensure!(
                a.kernels.len() == 2,
                "theorem2 takes two kernel sizes, got {}",
                a.kernels.len()
            );
            let size_of = |s: &str| -> Result<KernelSizes> {
                match spec::texture_source(s, 1, None)? {
                    TextureSource::Kernel(k) => Ok(k.sizes),
                    _ => bail!("'{s}' is not a kernel size (kernel:<v>)"),
                }
            };
            let sizes = default_sizes(&a.sizes, &[49]);
            ensure!(
                sizes.len() == 1,
                "theorem2 takes one size, got {}",
                sizes.len()
            );
            let mut params = Theorem2Params {
                sizes0: size_of(&a.kernels[0])?,
                sizes1: size_of(&a.kernels[1])?,
                ..Theorem2Params::new(
                    KernelSize::isotropic(1.0),
                    KernelSize::isotropic(1.0),
                    sizes[0],
                )
            };
            params.scale = Some(a.kernel_scale);
            params.half_width = a.m;
            params.beta = a.beta;
            params.threshold = Some(a.b);
            params.with_location = a.with_location;
            params.replicates = a.replicates.unwrap_or(10);
            let report = theorem2_experiment(&params, seed)?;
            let json = json!({
                "kernels": a.kernels, "n": sizes[0], "kernel_scale": a.kernel_scale, "m": report.half_width,
                "b": a.b, "with_location": a.with_location, "replicates": params.replicates,
            });
            ("theorem2", theorem2_table(&report), json)
        }
        Experiment::Lemma3 => {
            let sizes = default_sizes(&a.sizes, &[16, 32]);
            let rows = lemma3_experiment(&sizes, a.pairs, seed)?;
            (
                "lemma3",
                lemma3_table(&rows),
                json!({ "sizes": sizes, "pairs": a.pairs }),
            )
        }
    };
    prepare_dir(&a.out)?;
    let mut manifest = ManifestBuilder::new(
        "theory",
        Some(a.seed),
        json!({ "experiment": name, "settings": parameters }),
    );
    let path: PathBuf = a.out.join(format!("{name}.csv"));
    table.write(&path, seed)?;
    manifest.output(&path);
    manifest.finish(&a.out)?;
    print!("{}", table.to_csv(seed));
    Ok(())
}
