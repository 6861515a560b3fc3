use rand::Rng;

use super::{sq_dist, Points};
use crate::error::{Error, Result};
use crate::seed::Seed;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KMeansParams {
    pub k: usize,
    pub restarts: usize,
    pub max_iters: usize,
    /// Floor on every cluster's size, enforced after Lloyd converges.
    pub min_cluster_size: usize,
    pub seed: Seed,
    /// Stop once no centroid moves by more than `tol` (squared Euclidean).
    pub tol: f64,
}

impl KMeansParams {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            ..Self::default()
        }
    }
}

impl Default for KMeansParams {
    fn default() -> Self {
        Self {
            k: 2,
            restarts: 10,
            max_iters: 100,
            min_cluster_size: 0,
            seed: Seed(0),
            tol: 1e-10,
        }
    }
}

/// Labels and centroids (template) of the best restart.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterResult {
    pub labels: Vec<u32>,
    /// `k x dim`, row `j` is the mean of the points labeled `j` (zero for an empty cluster).
    pub centroids: Vec<f64>,
    pub dim: usize,
    pub k: usize,
    /// Σ ‖x_t - c_label(t)‖².
    pub objective_sq_euclid: f64,
    /// Σ ‖x_t - c_label(t)‖²_∞.
    pub objective_sq_linf: f64,
    /// Lloyd iterations of the returned restart.
    pub iterations: usize,
    pub restart_index: usize,
    pub seed: Seed,
    /// Squared-Euclidean objective after each assignment step of the returned restart.
    pub objective_trace: Vec<f64>,
}

impl ClusterResult {
    pub fn centroid(&self, j: usize) -> &[f64] {
        &self.centroids[j * self.dim..(j + 1) * self.dim]
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }
}

/// Lloyd's algorithm, best of `restarts` k-means++ initializations by the
/// squared-Euclidean objective.
///
/// When a cluster ends up empty its centroid is re-seeded at the point farthest
/// from its own centroid. If `k · min_cluster_size <= n`, points are then moved
/// from clusters above the floor into clusters below it, cheapest Euclidean cost
/// first, followed by one final centroid update.
pub fn kmeans(points: Points<'_>, params: &KMeansParams) -> Result<ClusterResult> {
    let n = points.len();
    let k = params.k;
    if k == 0 {
        return Err(Error::invalid("k-means needs k >= 1"));
    }
    if n < k {
        return Err(Error::invalid(format!(
            "k-means needs at least k = {k} points, got {n}"
        )));
    }
    if !(params.tol > 0.0) {
        return Err(Error::invalid("k-means tolerance must be positive"));
    }
    let restarts = params.restarts.max(1);
    let mut best: Option<ClusterResult> = None;
    for restart in 0..restarts {
        let run = single_run(points, params, restart);
        if best
            .as_ref()
            .is_none_or(|b| run.objective_sq_euclid < b.objective_sq_euclid)
        {
            best = Some(run);
        }
        if k == 1 {
            break;
        }
    }
    Ok(best.expect("at least one restart"))
}

fn single_run(points: Points<'_>, params: &KMeansParams, restart: usize) -> ClusterResult {
    let (n, dim, k) = (points.len(), points.dim(), params.k);
    let seed = params.seed.derive(restart as u64);
    let mut labels = vec![0u32; n];
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut centroids;

    if k == 1 {
        centroids = means(points, &labels, 1);
    } else {
        centroids = kmeanspp(points, k, seed);
        let mut prev: Option<Vec<u32>> = None;
        for _ in 0..params.max_iters {
            iterations += 1;
            let objective = assign(points, &centroids, k, &mut labels);
            trace.push(objective);
            let mut updated = means(points, &labels, k);
            reseed_empty(points, &labels, &mut updated, k);
            let shift = (0..k)
                .map(|j| {
                    sq_dist(
                        &centroids[j * dim..(j + 1) * dim],
                        &updated[j * dim..(j + 1) * dim],
                    )
                })
                .fold(0.0, f64::max);
            centroids = updated;
            if prev.as_deref() == Some(labels.as_slice()) || shift <= params.tol {
                break;
            }
            prev = Some(labels.clone());
        }
        assign(points, &centroids, k, &mut labels);
        centroids = means(points, &labels, k);
    }

    if params.min_cluster_size > 0
        && k * params.min_cluster_size <= n
        && repair_sizes(points, &centroids, k, params.min_cluster_size, &mut labels)
    {
        centroids = means(points, &labels, k);
    }

    ClusterResult {
        objective_sq_euclid: eval_sq_euclid_objective(points, &labels, &centroids),
        objective_sq_linf: eval_linf_objective(points, &labels, &centroids),
        labels,
        centroids,
        dim,
        k,
        iterations,
        restart_index: restart,
        seed,
        objective_trace: trace,
    }
}

fn kmeanspp(points: Points<'_>, k: usize, seed: Seed) -> Vec<f64> {
    let n = points.len();
    let mut rng = seed.rng();
    let mut centroids = Vec::with_capacity(k * points.dim());
    centroids.extend_from_slice(points.get(rng.gen_range(0..n)));
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[..])).collect();
    for _ in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        let c = points.get(pick);
        centroids.extend_from_slice(c);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(points.get(i), c));
        }
    }
    centroids
}

/// Nearest-centroid assignment (ties to the lower index); returns the objective.
fn assign(points: Points<'_>, centroids: &[f64], k: usize, labels: &mut [u32]) -> f64 {
    let dim = points.dim();
    let nearest = |p: &[f64]| {
        let mut best = (0u32, f64::INFINITY);
        for j in 0..k {
            let d = sq_dist(p, &centroids[j * dim..(j + 1) * dim]);
            if d < best.1 {
                best = (j as u32, d);
            }
        }
        best
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let chunk = 256;
        labels
            .par_chunks_mut(chunk)
            .enumerate()
            .map(|(ci, out)| {
                let mut obj = 0.0;
                for (o, i) in out.iter_mut().zip(ci * chunk..) {
                    let (l, d) = nearest(points.get(i));
                    *o = l;
                    obj += d;
                }
                obj
            })
            .collect::<Vec<f64>>()
            .into_iter()
            .sum()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let mut obj = 0.0;
        for (i, o) in labels.iter_mut().enumerate() {
            let (l, d) = nearest(points.get(i));
            *o = l;
            obj += d;
        }
        obj
    }
}

fn means(points: Points<'_>, labels: &[u32], k: usize) -> Vec<f64> {
    let dim = points.dim();
    let mut sums = vec![0.0; k * dim];
    let mut counts = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        let l = l as usize;
        counts[l] += 1;
        for (s, v) in sums[l * dim..(l + 1) * dim].iter_mut().zip(p) {
            *s += v;
        }
    }
    for j in 0..k {
        if counts[j] > 0 {
            let inv = 1.0 / counts[j] as f64;
            sums[j * dim..(j + 1) * dim]
                .iter_mut()
                .for_each(|s| *s *= inv);
        }
    }
    sums
}

fn reseed_empty(points: Points<'_>, labels: &[u32], centroids: &mut [f64], k: usize) {
    let dim = points.dim();
    let mut counts = vec![0usize; k];
    labels.iter().for_each(|&l| counts[l as usize] += 1);
    let mut taken = Vec::new();
    for j in (0..k).filter(|&j| counts[j] == 0) {
        let far = (0..points.len())
            .filter(|i| !taken.contains(i))
            .map(|i| {
                let l = labels[i] as usize;
                (
                    i,
                    sq_dist(points.get(i), &centroids[l * dim..(l + 1) * dim]),
                )
            })
            .fold(None, |best: Option<(usize, f64)>, cur| match best {
                Some(b) if b.1 >= cur.1 => Some(b),
                _ => Some(cur),
            });
        if let Some((i, _)) = far {
            taken.push(i);
            centroids[j * dim..(j + 1) * dim].copy_from_slice(points.get(i));
        }
    }
}

/// Moves points into under-filled clusters; returns whether anything moved.
fn repair_sizes(
    points: Points<'_>,
    centroids: &[f64],
    k: usize,
    floor: usize,
    labels: &mut [u32],
) -> bool {
    let dim = points.dim();
    let mut sizes = vec![0usize; k];
    labels.iter().for_each(|&l| sizes[l as usize] += 1);
    let mut moved = false;
    for target in 0..k {
        if sizes[target] >= floor {
            continue;
        }
        let ct = &centroids[target * dim..(target + 1) * dim];
        let mut candidates: Vec<(f64, usize)> = (0..points.len())
            .filter(|&i| labels[i] as usize != target)
            .map(|i| {
                let l = labels[i] as usize;
                let p = points.get(i);
                (
                    sq_dist(p, ct) - sq_dist(p, &centroids[l * dim..(l + 1) * dim]),
                    i,
                )
            })
            .collect();
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (_, i) in candidates {
            if sizes[target] >= floor {
                break;
            }
            let from = labels[i] as usize;
            if sizes[from] > floor {
                sizes[from] -= 1;
                sizes[target] += 1;
                labels[i] = target as u32;
                moved = true;
            }
        }
    }
    moved
}

pub fn eval_sq_euclid_objective(points: Points<'_>, labels: &[u32], centroids: &[f64]) -> f64 {
    let dim = points.dim();
    points
        .iter()
        .zip(labels)
        .map(|(p, &l)| sq_dist(p, &centroids[l as usize * dim..(l as usize + 1) * dim]))
        .sum()
}

/// Sum over points of the squared L∞ distance to the assigned centroid.
pub fn eval_linf_objective(points: Points<'_>, labels: &[u32], centroids: &[f64]) -> f64 {
    let dim = points.dim();
    points
        .iter()
        .zip(labels)
        .map(|(p, &l)| {
            let c = &centroids[l as usize * dim..(l as usize + 1) * dim];
            let m = p
                .iter()
                .zip(c)
                .fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()));
            m * m
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn pts(data: &[f64], dim: usize) -> Points<'_> {
        Points::new(data, dim).unwrap()
    }

    #[test]
    fn linf_objective_examples() {
        assert_eq!(
            eval_linf_objective(pts(&[0.0, 0.0], 2), &[0], &[3.0, -4.0]),
            16.0
        );
        assert_eq!(
            eval_linf_objective(pts(&[1.0, 2.0], 2), &[0], &[1.0, 2.0]),
            0.0
        );
    }

    #[test]
    fn linf_objective_matches_loop() {
        let mut rng = Seed(5).rng();
        let data: Vec<f64> = (0..30).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let labels: Vec<u32> = (0..10).map(|i| (i % 3) as u32).collect();
        let cents: Vec<f64> = (0..9).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut expect = 0.0;
        for i in 0..10 {
            let l = labels[i] as usize;
            let mut m: f64 = 0.0;
            for d in 0..3 {
                m = m.max((data[i * 3 + d] - cents[l * 3 + d]).abs());
            }
            expect += m * m;
        }
        let got = eval_linf_objective(pts(&data, 3), &labels, &cents);
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn k_one_is_the_mean() {
        let data = [0.0, 0.0, 2.0, 4.0, 4.0, 8.0];
        let r = kmeans(pts(&data, 2), &KMeansParams::new(1)).unwrap();
        assert_eq!(r.centroids, vec![2.0, 4.0]);
        assert_eq!(r.iterations, 0);
        assert!(r.labels.iter().all(|&l| l == 0));
    }

    #[test]
    fn identical_points() {
        let data = vec![1.5; 20];
        let r = kmeans(pts(&data, 2), &KMeansParams::new(2)).unwrap();
        assert_eq!(r.objective_sq_euclid, 0.0);
        let balanced = kmeans(
            pts(&data, 2),
            &KMeansParams {
                min_cluster_size: 5,
                ..KMeansParams::new(2)
            },
        )
        .unwrap();
        assert_eq!(balanced.objective_sq_euclid, 0.0);
        assert_eq!(balanced.cluster_sizes(), vec![5, 5]);
    }

    #[test]
    fn rejects_bad_params() {
        let data = [0.0, 1.0];
        assert!(kmeans(pts(&data, 1), &KMeansParams::new(3)).is_err());
        assert!(kmeans(pts(&data, 1), &KMeansParams::new(0)).is_err());
        let p = KMeansParams {
            tol: 0.0,
            ..KMeansParams::new(1)
        };
        assert!(kmeans(pts(&data, 1), &p).is_err());
    }

    #[test]
    fn size_floor_is_met() {
        // 18 points near 0, 2 near 10: the floor of 6 forces 4 moves
        let mut data: Vec<f64> = (0..18).map(|i| i as f64 * 0.01).collect();
        data.extend([10.0, 10.1]);
        let p = KMeansParams {
            min_cluster_size: 6,
            ..KMeansParams::new(2)
        };
        let r = kmeans(pts(&data, 1), &p).unwrap();
        let sizes = r.cluster_sizes();
        assert!(sizes.iter().all(|&s| s >= 6), "{sizes:?}");
        // the moved points are the ones closest to the small cluster
        let small = r.labels[18];
        assert!(r.labels[14..].iter().all(|&l| l == small));
        for j in 0..2 {
            let members: Vec<f64> = (0..20)
                .filter(|&i| r.labels[i] == j)
                .map(|i| data[i])
                .collect();
            let mean = members.iter().sum::<f64>() / members.len() as f64;
            assert!((r.centroid(j as usize)[0] - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn infeasible_floor_is_skipped() {
        let data = [0.0, 0.1, 5.0];
        let p = KMeansParams {
            min_cluster_size: 2,
            ..KMeansParams::new(2)
        };
        let r = kmeans(pts(&data, 1), &p).unwrap();
        assert_eq!(r.labels.len(), 3);
    }

    #[test]
    fn deterministic_given_seed() {
        let mut rng = Seed(1).rng();
        let data: Vec<f64> = (0..200).map(|_| rng.gen::<f64>()).collect();
        let p = KMeansParams {
            seed: Seed(42),
            ..KMeansParams::new(3)
        };
        assert_eq!(
            kmeans(pts(&data, 2), &p).unwrap(),
            kmeans(pts(&data, 2), &p).unwrap()
        );
    }
}
