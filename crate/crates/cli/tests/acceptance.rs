//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use tempfile::TempDir;
use texseg::clustering::{kmeans, KMeansParams, Points};
use texseg::evaluation::{
    best_permutation_match, concentration_experiment, consistency_experiment, theorem2_experiment,
    ConsistencyParams, Theorem2Params,
};
use texseg::io::{field_to_pgm, save_pgm};
use texseg::reproduce::BRODATZ_TEXTURES;
use texseg::synth::{
    gram_min_eigenvalue, ma_true_autocov, sample_ma_field, KernelSize, KernelSizeField, MAModel,
    MaDirection,
};
use texseg::{LabelMap, Seed};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn texseg_bin(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_texseg"))
        .args(args)
        .env_remove("TEXSEG_THREADS")
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(String::from_utf8_lossy(&out.stdout).into_owned())
    } else {
        Err(format!(
            "texseg {args:?}: {}",
            String::from_utf8_lossy(&out.stderr).trim()
        ))
    }
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

/// Data rows of a table CSV: name plus numeric columns.
fn table_rows(csv: &str) -> Vec<(String, Vec<f64>)> {
    csv.lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let mut cells = l.split(',');
            let name = cells.next().unwrap_or_default().to_string();
            (name, cells.map(|c| c.parse().unwrap_or(f64::NAN)).collect())
        })
        .collect()
}

// 1 -------------------------------------------------------------------------

fn table1(tmp: &Path) -> Outcome {
    let out = tmp.join("table1");
    let start = Instant::now();
    let csv = match texseg_bin(&[
        "reproduce",
        "--table",
        "1",
        "--seed",
        "1,2,3,4,5",
        "--m",
        "11",
        "--out",
        s(&out),
    ]) {
        Ok(c) => c,
        Err(e) => return outcome(false, e),
    };
    let elapsed = start.elapsed();
    let rows = table_rows(&csv);
    let Some((_, mean)) = rows.iter().find(|(n, _)| n == "Mean Value") else {
        return outcome(false, "no mean row");
    };
    let (single, ward, km) = (mean[0], mean[1], mean[2]);
    let pass = rows.len() == 7
        && km >= 0.95
        && ward >= 0.90
        && single >= 0.70
        && elapsed <= Duration::from_secs(600);
    outcome(
        pass,
        format!(
            "mean accuracy single {single:.4} (>= 0.70), ward {ward:.4} (>= 0.90), k-means {km:.4} (>= 0.95); {:.0} s (<= 600 s)",
            elapsed.as_secs_f64()
        ),
    )
}

// 2 -------------------------------------------------------------------------

fn concentration() -> Outcome {
    let model = MAModel::new(MaDirection::Vert, 1).expect("valid model");
    let rows = match concentration_experiment(&model, &[36, 64, 100, 144], 0.3, 400, Seed(2)) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let freqs: Vec<f64> = rows.iter().map(|r| r.frequency).collect();
    let monotone = freqs.windows(2).all(|w| w[1] <= w[0]);
    let halved = freqs[3] <= 0.5 * freqs[0];
    outcome(
        monotone && halved,
        format!("frequencies {freqs:?} over 400 replicates; non-increasing {monotone}; n=144 at most half of n=36 {halved}"),
    )
}

// 3 -------------------------------------------------------------------------

fn consistency() -> Outcome {
    let m1 = MAModel::new(MaDirection::Diag, 2).expect("valid model");
    let m2 = MAModel::new(MaDirection::AntiDiag, 2).expect("valid model");
    let params = ConsistencyParams {
        replicates: 20,
        ..ConsistencyParams::default()
    };
    let start = Instant::now();
    let rows = match consistency_experiment(&m1, &m2, &[36, 144], &params, Seed(3)) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let elapsed = start.elapsed();
    let (small, large) = (rows[0].mean_error, rows[1].mean_error);
    outcome(
        large < small && elapsed <= Duration::from_secs(300),
        format!(
            "mean error n=36 {small:.4}, n=144 {large:.4} (20 replicates each); {:.0} s (<= 300 s)",
            elapsed.as_secs_f64()
        ),
    )
}

// 4 -------------------------------------------------------------------------

fn theorem2() -> Outcome {
    let mut params =
        Theorem2Params::new(KernelSize::isotropic(1.0), KernelSize::isotropic(9.0), 49);
    params.scale = Some(3.0);
    params.threshold = Some(0.04);
    params.with_location = false;
    params.replicates = 10;
    match theorem2_experiment(&params, Seed(4)) {
        Ok(r) => outcome(
            r.pooled_fraction >= 0.95,
            format!(
                "covered-set fraction {:.4} (>= 0.95) over {} replicates, b = {}, m = {}",
                r.pooled_fraction,
                r.replicates.len(),
                r.threshold,
                r.half_width
            ),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

// 5 -------------------------------------------------------------------------

fn oracle_ma_autocov() -> Outcome {
    const REPLICATES: usize = 100_000;
    let mut worst = 0.0f64;
    for m in [1usize, 2] {
        for dir in MaDirection::ALL {
            let model = MAModel::new(dir, m).expect("valid model");
            let reach = 2 * m as isize;
            let side = 4 * m + 1;
            let center = 2 * m;
            let lags: Vec<(isize, isize)> = (-reach..=reach)
                .flat_map(|a| (-reach..=reach).map(move |b| (a, b)))
                .collect();
            let mut sums = vec![0.0; lags.len()];
            let base = Seed(500 + 10 * m as u64 + dir.model_number() as u64);
            for r in 0..REPLICATES {
                let f = sample_ma_field(&model, side, side, base.offset(r as u64));
                let x0 = f.get(center, center);
                for (sum, &(a, b)) in sums.iter_mut().zip(&lags) {
                    let y = f.get(
                        (center as isize + a) as usize,
                        (center as isize + b) as usize,
                    );
                    *sum += x0 * y;
                }
            }
            for (sum, &lag) in sums.iter().zip(&lags) {
                worst = worst.max((sum / REPLICATES as f64 - ma_true_autocov(&model, lag)).abs());
            }
        }
    }
    outcome(
        worst <= 0.02,
        format!("max |Monte-Carlo - analytic| = {worst:.4} (<= 0.02) over 4 models, m in {{1,2}}, |lag| <= 2m"),
    )
}

fn oracle_gram() -> Outcome {
    let mut rng = Seed(55).rng();
    let mut worst = f64::INFINITY;
    let mut count = 0;
    for n in [4usize, 8, 12, 16] {
        for trial in 0..3 {
            let sizes = KernelSizeField::from_fn(n, n, |r, c| match trial {
                0 => KernelSize::isotropic(1.0 + (r + c) as f64 / n as f64),
                _ => {
                    let a: f64 = rng.gen_range(0.2..3.0);
                    let d: f64 = rng.gen_range(0.2..3.0);
                    let b = rng.gen_range(-0.9..0.9) * (a * d).sqrt();
                    KernelSize::new(a, b, b, d)
                }
            })
            .expect("valid sizes");
            for scale in [1.0 / n as f64, 1.0] {
                match gram_min_eigenvalue(&sizes, scale) {
                    Ok(v) => worst = worst.min(v),
                    Err(e) => return outcome(false, e.to_string()),
                }
                count += 1;
            }
        }
    }
    outcome(
        worst >= -1e-8,
        format!(
            "smallest eigenvalue {worst:.3e} (>= -1e-8) over {count} Gram matrices with n <= 16"
        ),
    )
}

fn exhaustive_two_means(points: &[[f64; 3]]) -> f64 {
    let n = points.len();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << n) - 1 {
        let mut cost = 0.0;
        for side in [true, false] {
            let members: Vec<&[f64; 3]> = (0..n)
                .filter(|&i| ((mask >> i) & 1 == 1) == side)
                .map(|i| &points[i])
                .collect();
            let mut mean = [0.0; 3];
            for p in &members {
                for d in 0..3 {
                    mean[d] += p[d] / members.len() as f64;
                }
            }
            cost += members
                .iter()
                .map(|p| (0..3).map(|d| (p[d] - mean[d]).powi(2)).sum::<f64>())
                .sum::<f64>();
        }
        best = best.min(cost);
    }
    best
}

fn oracle_kmeans() -> Outcome {
    let mut rng = Seed(66).rng();
    let mut misses = 0;
    for case in 0..100 {
        let points: Vec<[f64; 3]> = (0..12)
            .map(|_| {
                let shift = if rng.gen_bool(0.5) {
                    rng.gen_range(0.0..3.0)
                } else {
                    0.0
                };
                [
                    rng.gen::<f64>() + shift,
                    rng.gen::<f64>(),
                    rng.gen::<f64>() - shift,
                ]
            })
            .collect();
        let flat: Vec<f64> = points.iter().flatten().copied().collect();
        let params = KMeansParams {
            k: 2,
            restarts: 50,
            seed: Seed(1000 + case),
            ..KMeansParams::default()
        };
        let result = match Points::new(&flat, 3).and_then(|p| kmeans(p, &params)) {
            Ok(r) => r,
            Err(e) => return outcome(false, e.to_string()),
        };
        if result.objective_sq_euclid > exhaustive_two_means(&points) + 1e-9 {
            misses += 1;
        }
    }
    outcome(
        misses == 0,
        format!(
            "{} of 100 random 12-point k=2 cases at the exhaustive optimum",
            100 - misses
        ),
    )
}

fn permutations(k: usize) -> Vec<Vec<u32>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for slot in 0..k {
            let mut q = p.clone();
            q.insert(slot, (k - 1) as u32);
            out.push(q);
        }
    }
    out
}

fn oracle_matching() -> Outcome {
    let mut rng = Seed(77).rng();
    let mut disagreements = 0;
    for _ in 0..100 {
        let k = rng.gen_range(2..=5);
        let (rows, cols) = (rng.gen_range(2..=10), rng.gen_range(2..=10));
        let truth: Vec<u32> = (0..rows * cols)
            .map(|_| rng.gen_range(0..k as u32))
            .collect();
        let mut est = truth.clone();
        let flips = rng.gen_range(0..=rows * cols);
        for i in (0..rows * cols)
            .collect::<Vec<_>>()
            .choose_multiple(&mut rng, flips)
        {
            est[*i] = rng.gen_range(0..k as u32);
        }
        let mut relabel: Vec<u32> = (0..k as u32).collect();
        relabel.shuffle(&mut rng);
        let est: Vec<u32> = est.iter().map(|&l| relabel[l as usize]).collect();
        let brute = permutations(k)
            .iter()
            .map(|p| {
                est.iter()
                    .zip(&truth)
                    .filter(|(e, t)| p[**e as usize] == **t)
                    .count()
            })
            .max()
            .unwrap_or(0);
        let report = LabelMap::new(rows, cols, est)
            .and_then(|e| Ok((e, LabelMap::new(rows, cols, truth)?)))
            .and_then(|(e, t)| best_permutation_match(&e, &t, k));
        match report {
            Ok(r) if r.total - r.mismatched_count == brute => {}
            _ => disagreements += 1,
        }
    }
    outcome(
        disagreements == 0,
        format!(
            "{} of 100 random instances equal brute-force enumeration",
            100 - disagreements
        ),
    )
}

// 6 -------------------------------------------------------------------------

/// Runs every subcommand into `dir` and returns the bytes of its data artifacts.
fn cli_artifacts(dir: &Path, threads: &str) -> Result<Vec<(String, Vec<u8>)>, String> {
    let d = |name: &str| dir.join(name).to_str().expect("utf-8").to_string();
    let mosaic = d("g/mosaic.texf");
    let truth = d("g/truth.pgm");
    let mut runs: Vec<Vec<String>> = vec![
        vec![
            "generate",
            "--models",
            "ma2,ma3",
            "--size",
            "48",
            "--seed",
            "6",
            "--out",
            &d("g"),
        ]
        .into_iter()
        .map(String::from)
        .collect(),
        vec![
            "features",
            "--input",
            &mosaic,
            "--m",
            "3",
            "--with-location",
            "--out",
            &d("f"),
        ]
        .into_iter()
        .map(String::from)
        .collect(),
    ];
    for algo in ["kmeans", "slink-threshold", "slink-k", "ward"] {
        runs.push(
            [
                "segment", "--input", &mosaic, "--algo", algo, "--k", "2", "--m", "4", "--seed",
                "6", "--truth", &truth,
            ]
            .into_iter()
            .map(String::from)
            .chain(["--out".to_string(), d(algo)])
            .collect(),
        );
    }
    runs.push(
        [
            "evaluate",
            "--labels",
            &d("kmeans/labels.pgm"),
            "--truth",
            &truth,
            "--out",
            &d("e"),
        ]
        .into_iter()
        .map(String::from)
        .collect(),
    );
    runs.push(
        [
            "reproduce",
            "--table",
            "1",
            "--seed",
            "6",
            "--size",
            "32",
            "--m",
            "3",
            "--ma-width",
            "1",
            "--restarts",
            "2",
            "--linkage-points",
            "64",
            "--out",
            &d("r"),
        ]
        .into_iter()
        .map(String::from)
        .collect(),
    );
    for (exp, extra) in [
        (
            "concentration",
            vec!["--sizes", "16,25", "--replicates", "20"],
        ),
        ("consistency", vec!["--sizes", "16", "--replicates", "2"]),
        (
            "theorem2",
            vec!["--sizes", "20", "--replicates", "2", "--m", "2"],
        ),
        ("lemma3", vec!["--sizes", "8", "--pairs", "50"]),
    ] {
        runs.push(
            ["theory", "--experiment", exp, "--seed", "6"]
                .into_iter()
                .chain(extra)
                .map(String::from)
                .chain(["--out".to_string(), d(exp)])
                .collect(),
        );
    }
    for args in &runs {
        let mut full = vec!["--threads", threads];
        full.extend(args.iter().map(String::as_str));
        texseg_bin(&full)?;
    }
    let mut files: Vec<PathBuf> = walk(dir)
        .into_iter()
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()),
                Some("texf" | "texc" | "csv" | "pgm")
            )
        })
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let rel = p
                .strip_prefix(dir)
                .expect("under dir")
                .display()
                .to_string();
            std::fs::read(&p)
                .map(|b| (rel, b))
                .map_err(|e| e.to_string())
        })
        .collect()
}

fn walk(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).into_iter().flatten().flatten() {
        let path = entry.path();
        if path.is_dir() {
            out.extend(walk(&path));
        } else {
            out.push(path);
        }
    }
    out
}

fn determinism(tmp: &Path) -> Outcome {
    let runs = [("a", "1"), ("b", "1"), ("c", "2")];
    let mut results = Vec::new();
    for (name, threads) in runs {
        match cli_artifacts(&tmp.join(name), threads) {
            Ok(r) => results.push(r),
            Err(e) => return outcome(false, e),
        }
    }
    let identical = results[1] == results[0] && results[2] == results[0];
    let kinds =
        ["texf", "texc", "csv"].map(|k| results[0].iter().filter(|(n, _)| n.ends_with(k)).count());
    outcome(
        identical && kinds.iter().all(|&c| c > 0),
        format!(
            "{} artifacts ({} TEXF, {} TEXC, {} CSV) from all six subcommands byte-identical across 3 runs (1, 1, 2 threads): {identical}",
            results[0].len(),
            kinds[0],
            kinds[1],
            kinds[2]
        ),
    )
}

// 7 -------------------------------------------------------------------------

fn brodatz_stand_ins(tmp: &Path) -> Outcome {
    let dir = tmp.join("brodatz");
    if let Err(e) = std::fs::create_dir_all(&dir) {
        return outcome(false, e.to_string());
    }
    // eight distinct synthetic textures under the album's file names
    for (i, name) in BRODATZ_TEXTURES.iter().enumerate() {
        let dir_index = MaDirection::ALL[i % 4];
        let model = MAModel::new(dir_index, 1 + i / 4 * 2).expect("valid model");
        let field = sample_ma_field(&model, 192, 192, Seed(700 + i as u64));
        if let Err(e) = save_pgm(dir.join(format!("{name}.pgm")), &field_to_pgm(&field)) {
            return outcome(false, e.to_string());
        }
    }
    let mut details = Vec::new();
    let mut pass = true;
    for table in ["2", "3", "4"] {
        let out = tmp.join(format!("brodatz_table{table}"));
        match texseg_bin(&[
            "reproduce",
            "--table",
            table,
            "--seed",
            "1",
            "--brodatz-dir",
            s(&dir),
            "--out",
            s(&out),
        ]) {
            Ok(csv) => {
                let header_ok =
                    csv.lines().next() == Some("mosaic,single_linkage,ward_linkage,kmeans");
                let rows = table_rows(&csv);
                let shaped = header_ok
                    && rows.len() == 4
                    && rows.last().is_some_and(|(n, _)| n == "Mean Value")
                    && rows
                        .iter()
                        .all(|(_, v)| v.len() == 3 && v.iter().all(|a| (0.0..=1.0).contains(a)));
                pass &= shaped;
                let mean = &rows.last().map(|r| r.1.clone()).unwrap_or_default();
                details.push(format!(
                    "table {table} shaped {shaped}, mean k-means {:.4}",
                    mean.get(2).copied().unwrap_or(f64::NAN)
                ));
            }
            Err(e) => {
                pass = false;
                details.push(e);
            }
        }
    }
    outcome(pass, format!("stand-in PGMs: {}", details.join("; ")))
}

fn main() {
    // `cargo test -- --list` and filters come through as arguments; this target is all-or-nothing
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let tmp = TempDir::new().expect("temp dir");
    type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("1 table 1 reproduction", Box::new(|| table1(tmp.path()))),
        ("2 concentration", Box::new(concentration)),
        ("3 consistency trend", Box::new(consistency)),
        ("4 threshold linkage on kernel mosaic", Box::new(theorem2)),
        (
            "5a moving-average autocovariance oracle",
            Box::new(oracle_ma_autocov),
        ),
        ("5b kernel Gram eigenvalues", Box::new(oracle_gram)),
        ("5c k-means exhaustive optimum", Box::new(oracle_kmeans)),
        (
            "5d permutation matching brute force",
            Box::new(oracle_matching),
        ),
        ("6 CLI determinism", Box::new(|| determinism(tmp.path()))),
        (
            "7 Brodatz pipeline with stand-in images",
            Box::new(|| brodatz_stand_ins(tmp.path())),
        ),
    ];
    let mut failures = 0;
    for (name, run) in &criteria {
        let start = Instant::now();
        let result = run();
        failures += usize::from(!result.pass);
        println!(
            "[{}] {name}: {} ({:.1} s)",
            if result.pass { "PASS" } else { "FAIL" },
            result.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
