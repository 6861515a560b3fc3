use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{sq_dist, Metric, Points, UnionFind};
use crate::error::{Error, Result};
use crate::features::SubsampleGrid;
use crate::grid::LabelMap;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LinkageMode {
    /// Connect points whose distance is strictly below the threshold.
    Threshold(f64),
    /// Cut the dendrogram into this many clusters.
    CutToK(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkageParams {
    pub mode: LinkageMode,
    pub metric: Metric,
    /// Only used by the dendrogram cut.
    pub min_cluster_size: usize,
}

impl LinkageParams {
    pub fn threshold(b: f64) -> Self {
        Self {
            mode: LinkageMode::Threshold(b),
            metric: Metric::Linf,
            min_cluster_size: 0,
        }
    }

    pub fn cut_to_k(k: usize) -> Self {
        Self {
            mode: LinkageMode::CutToK(k),
            metric: Metric::Linf,
            min_cluster_size: 0,
        }
    }

    pub fn with_metric(self, metric: Metric) -> Self {
        Self { metric, ..self }
    }

    pub fn with_min_cluster_size(self, min_cluster_size: usize) -> Self {
        Self {
            min_cluster_size,
            ..self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Linkage {
    Single,
    Ward,
}

/// One agglomeration step. Leaves are `0..n`, the node created by merge `i` is `n + i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

/// Merges sorted by non-decreasing height.
#[derive(Clone, Debug, PartialEq)]
pub struct Dendrogram {
    pub leaves: usize,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    fn size_of(&self, node: usize) -> usize {
        if node < self.leaves {
            1
        } else {
            self.merges[node - self.leaves].size
        }
    }

    fn collect_leaves(&self, node: usize, out: &mut Vec<usize>) {
        let mut stack = vec![node];
        while let Some(v) = stack.pop() {
            if v < self.leaves {
                out.push(v);
            } else {
                let m = &self.merges[v - self.leaves];
                stack.push(m.left);
                stack.push(m.right);
            }
        }
    }

    /// Plain cut into `k` clusters: undo the `k - 1` highest merges.
    pub fn cut(&self, k: usize) -> Vec<u32> {
        let n = self.leaves;
        let mut uf = UnionFind::new(n);
        let mut node_rep: Vec<usize> = (0..n).collect();
        for m in &self.merges[..n.saturating_sub(k.max(1))] {
            let (a, b) = (node_rep[m.left], node_rep[m.right]);
            uf.union(a, b);
            node_rep.push(a);
        }
        canonical_labels(n, |i| uf.find(i))
    }
}

/// The threshold `(ln n)^{β/2} / √n` for an `n x n` image.
pub fn theoretical_threshold(n: usize, beta: f64) -> f64 {
    let n = n as f64;
    n.ln().max(0.0).powf(beta / 2.0) / n.sqrt()
}

/// Connected components of the graph joining points closer than `b`.
/// Components are numbered by their smallest point index.
pub fn threshold_components(points: Points<'_>, b: f64, metric: Metric) -> Vec<u32> {
    let n = points.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        let p = points.get(i);
        for j in i + 1..n {
            if metric.distance(p, points.get(j)) < b {
                uf.union(i, j);
            }
        }
    }
    canonical_labels(n, |i| uf.find(i))
}

/// Threshold single linkage on the subsample grid, filled out to every pixel.
///
/// Components are numbered by their smallest grid coordinate, so the result
/// does not depend on the order of `grid.coords`. Each patch of half-width `m`
/// around a grid point takes that point's label; remaining pixels take the label
/// of the Euclidean-nearest grid point, ties going to the smallest (row, col).
pub fn single_linkage_threshold(
    grid: &SubsampleGrid,
    features: Points<'_>,
    params: &LinkageParams,
    image_shape: (usize, usize),
    m: usize,
) -> Result<LabelMap> {
    let LinkageMode::Threshold(b) = params.mode else {
        return Err(Error::invalid(
            "threshold single linkage needs Threshold mode",
        ));
    };
    if !(b > 0.0) {
        return Err(Error::invalid(format!(
            "threshold must be positive, got {b}"
        )));
    }
    if grid.is_empty() {
        return Err(Error::EmptyGrid {
            side: image_shape.0.min(image_shape.1),
            patch: 2 * m + 1,
        });
    }
    if features.len() != grid.len() {
        return Err(Error::invalid(format!(
            "{} feature vectors for {} grid points",
            features.len(),
            grid.len()
        )));
    }
    let (rows, cols) = image_shape;
    if let Some(&(r, c)) = grid.coords.iter().find(|&&(r, c)| r >= rows || c >= cols) {
        return Err(Error::invalid(format!(
            "grid point ({r}, {c}) outside {rows}x{cols} image"
        )));
    }

    // order-free numbering: visit grid points sorted by coordinate
    let comp = threshold_components(features, b, params.metric);
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by_key(|&i| grid.coords[i]);
    let mut remap = vec![u32::MAX; grid.len()];
    let mut next = 0;
    let mut point_label = vec![0u32; grid.len()];
    for &i in &order {
        let c = comp[i] as usize;
        if remap[c] == u32::MAX {
            remap[c] = next;
            next += 1;
        }
        point_label[i] = remap[c];
    }

    let mut labels = vec![u32::MAX; rows * cols];
    for (i, &(ur, uc)) in grid.coords.iter().enumerate() {
        for r in ur.saturating_sub(m)..(ur + m + 1).min(rows) {
            for c in uc.saturating_sub(m)..(uc + m + 1).min(cols) {
                labels[r * cols + c] = point_label[i];
            }
        }
    }
    for r in 0..rows {
        for c in 0..cols {
            let slot = &mut labels[r * cols + c];
            if *slot != u32::MAX {
                continue;
            }
            let nearest = order
                .iter()
                .copied()
                .min_by_key(|&i| {
                    let (ur, uc) = grid.coords[i];
                    let (dr, dc) = (ur.abs_diff(r), uc.abs_diff(c));
                    (dr * dr + dc * dc, grid.coords[i])
                })
                .expect("non-empty grid");
            *slot = point_label[nearest];
        }
    }
    LabelMap::new(rows, cols, labels)
}

/// Minimum spanning tree edges `(length, a, b)` sorted by length (Prim, O(n²)).
fn mst_edges(points: Points<'_>, metric: Metric) -> Vec<(f64, usize, usize)> {
    let n = points.len();
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    if n > 0 {
        let mut in_tree = vec![false; n];
        let mut best = vec![(f64::INFINITY, 0usize); n];
        let mut current = 0;
        in_tree[0] = true;
        for _ in 1..n {
            let p = points.get(current);
            let mut next = usize::MAX;
            let mut next_d = f64::INFINITY;
            for j in 0..n {
                if in_tree[j] {
                    continue;
                }
                let d = metric.distance(p, points.get(j));
                if d < best[j].0 {
                    best[j] = (d, current);
                }
                if next == usize::MAX || best[j].0 < next_d {
                    next = j;
                    next_d = best[j].0;
                }
            }
            in_tree[next] = true;
            edges.push((best[next].0, best[next].1, next));
            current = next;
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));
    edges
}

/// Single-linkage dendrogram from a minimum spanning tree.
pub fn single_linkage_dendrogram(points: Points<'_>, metric: Metric) -> Dendrogram {
    let n = points.len();
    let edges = mst_edges(points, metric);

    let mut uf = UnionFind::new(n);
    let mut node_of_root: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(edges.len());
    for (h, a, b) in edges {
        let (ra, rb) = (uf.find(a), uf.find(b));
        let (na, nb) = (node_of_root[ra], node_of_root[rb]);
        uf.union(ra, rb);
        let root = uf.find(ra);
        node_of_root[root] = n + merges.len();
        merges.push(Merge {
            left: na.min(nb),
            right: na.max(nb),
            height: h,
            size: uf.set_size(root),
        });
    }
    Dendrogram { leaves: n, merges }
}

/// Ward dendrogram by nearest-neighbor chains. Heights are the increase in
/// within-cluster sum of squared Euclidean distances caused by each merge.
pub fn ward_dendrogram(points: Points<'_>) -> Dendrogram {
    let n = points.len();
    if n < 2 {
        return Dendrogram {
            leaves: n,
            merges: Vec::new(),
        };
    }
    // condensed upper triangle of merge costs between active clusters
    let idx = |i: usize, j: usize| {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        a * n - a * (a + 1) / 2 + (b - a - 1)
    };
    let mut cost = vec![0.0; n * (n - 1) / 2];
    for i in 0..n {
        for j in i + 1..n {
            cost[idx(i, j)] = 0.5 * sq_dist(points.get(i), points.get(j));
        }
    }
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    // slot -> current dendrogram node id (slot reused for the merged cluster)
    let mut node = (0..n).collect::<Vec<_>>();
    let mut raw = Vec::with_capacity(n - 1);
    let mut chain: Vec<usize> = Vec::with_capacity(n);

    for _ in 0..n - 1 {
        if chain.is_empty() {
            chain.push(active.iter().position(|&a| a).expect("active cluster"));
        }
        let (a, b, h) = loop {
            let top = *chain.last().expect("chain");
            let prev = if chain.len() >= 2 {
                Some(chain[chain.len() - 2])
            } else {
                None
            };
            // prefer the previous chain element on ties so the chain terminates
            let mut best = prev.unwrap_or(usize::MAX);
            let mut best_d = prev.map_or(f64::INFINITY, |p| cost[idx(top, p)]);
            for j in 0..n {
                if j == top || !active[j] {
                    continue;
                }
                let d = cost[idx(top, j)];
                if d < best_d {
                    best = j;
                    best_d = d;
                }
            }
            if Some(best) == prev {
                chain.pop();
                chain.pop();
                break (top, best, best_d);
            }
            chain.push(best);
        };
        let (keep, gone) = (a.min(b), a.max(b));
        let (sa, sb) = (size[keep] as f64, size[gone] as f64);
        for k in 0..n {
            if !active[k] || k == keep || k == gone {
                continue;
            }
            let sk = size[k] as f64;
            let updated = ((sk + sa) * cost[idx(k, keep)] + (sk + sb) * cost[idx(k, gone)]
                - sk * h)
                / (sk + sa + sb);
            cost[idx(k, keep)] = updated;
        }
        active[gone] = false;
        size[keep] += size[gone];
        raw.push((node[keep], node[gone], h, size[keep]));
        node[keep] = usize::MAX - raw.len() + 1; // placeholder id, resolved below
    }

    // resolve placeholders to merge order, then sort by height (stable)
    let decode = |id: usize| {
        if id < n {
            id
        } else {
            n + (usize::MAX - id)
        }
    };
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&x, &y| raw[x].2.total_cmp(&raw[y].2).then(x.cmp(&y)));
    let mut rank = vec![0usize; raw.len()];
    for (r, &x) in order.iter().enumerate() {
        rank[x] = r;
    }
    let rename = |id: usize| {
        let d = decode(id);
        if d < n {
            d
        } else {
            n + rank[d - n]
        }
    };
    let merges = order
        .iter()
        .map(|&x| {
            let (l, r, h, s) = raw[x];
            let (l, r) = (rename(l), rename(r));
            Merge {
                left: l.min(r),
                right: l.max(r),
                height: h,
                size: s,
            }
        })
        .collect();
    Dendrogram { leaves: n, merges }
}

/// Single linkage under a size floor, by cutting the minimum spanning tree.
///
/// Repeatedly removes the longest remaining tree edge whose removal leaves at
/// least `floor` points on both sides, until `k` components exist or no such
/// edge is left. Components are numbered by their smallest point index.
fn floored_single_linkage(points: Points<'_>, k: usize, floor: usize, metric: Metric) -> Vec<u32> {
    let n = points.len();
    let edges = mst_edges(points, metric);
    let mut removed = vec![false; edges.len()];
    let mut adjacency = vec![Vec::new(); n];
    for (e, &(_, a, b)) in edges.iter().enumerate() {
        adjacency[a].push((b, e));
        adjacency[b].push((a, e));
    }
    let mut component = vec![usize::MAX; n];
    // size of the subtree hanging below each edge, and of its component
    let mut below = vec![0usize; edges.len()];
    let mut comp_size = Vec::new();
    for _ in 1..k {
        component.fill(usize::MAX);
        comp_size.clear();
        for root in 0..n {
            if component[root] != usize::MAX {
                continue;
            }
            let id = comp_size.len();
            // iterative DFS: preorder, then sizes in reverse
            let mut order = Vec::new();
            let mut parent_edge = vec![(root, usize::MAX)];
            component[root] = id;
            while let Some((v, pe)) = parent_edge.pop() {
                order.push((v, pe));
                for &(w, e) in &adjacency[v] {
                    if !removed[e] && component[w] == usize::MAX {
                        component[w] = id;
                        parent_edge.push((w, e));
                    }
                }
            }
            let mut size = vec![1usize; 0];
            size.resize(order.len(), 1);
            let pos: std::collections::HashMap<usize, usize> = order
                .iter()
                .enumerate()
                .map(|(i, &(v, _))| (v, i))
                .collect();
            for i in (1..order.len()).rev() {
                let (v, pe) = order[i];
                below[pe] = size[i];
                let (a, b) = (edges[pe].1, edges[pe].2);
                let parent = if a == v { b } else { a };
                size[pos[&parent]] += size[i];
            }
            comp_size.push(order.len());
        }
        let best = (0..edges.len()).rev().filter(|&e| !removed[e]).find(|&e| {
            let total = comp_size[component[edges[e].1]];
            below[e] >= floor && total - below[e] >= floor
        });
        match best {
            Some(e) => removed[e] = true,
            None => break,
        }
    }
    let mut uf = UnionFind::new(n);
    for (e, &(_, a, b)) in edges.iter().enumerate() {
        if !removed[e] {
            uf.union(a, b);
        }
    }
    canonical_labels(n, |i| uf.find(i))
}

#[derive(PartialEq)]
struct ByHeight(f64, usize);

impl Eq for ByHeight {}

impl PartialOrd for ByHeight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ByHeight {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Top-down cut into `k` clusters where every cluster keeps at least `floor` points.
///
/// The highest remaining merge is undone first. A child smaller than `floor`
/// is set aside and its sibling stays in play; a merge whose children are both
/// too small is kept whole. Points set aside join the cluster of their nearest
/// clustered point. Returns `None` when fewer than `k` clusters can be formed.
fn floored_cut(
    tree: &Dendrogram,
    k: usize,
    floor: usize,
    points: Points<'_>,
    metric: Metric,
) -> Option<Vec<u32>> {
    let n = tree.leaves;
    let height = |v: usize| {
        if v < n {
            f64::NEG_INFINITY
        } else {
            tree.merges[v - n].height
        }
    };
    let root = if n == 1 { 0 } else { n + tree.merges.len() - 1 };
    let mut heap = BinaryHeap::new();
    heap.push(ByHeight(height(root), root));
    let mut done = Vec::new();
    let mut orphans = Vec::new();
    while heap.len() + done.len() < k {
        let ByHeight(_, v) = heap.pop()?;
        if v < n {
            done.push(v);
            continue;
        }
        let Merge { left, right, .. } = tree.merges[v - n];
        let (big_l, big_r) = (tree.size_of(left) >= floor, tree.size_of(right) >= floor);
        match (big_l, big_r) {
            (true, true) => {
                heap.push(ByHeight(height(left), left));
                heap.push(ByHeight(height(right), right));
            }
            (true, false) => {
                orphans.push(right);
                heap.push(ByHeight(height(left), left));
            }
            (false, true) => {
                orphans.push(left);
                heap.push(ByHeight(height(right), right));
            }
            (false, false) => done.push(v),
        }
        // nothing left that can be split
        if heap.is_empty() && heap.len() + done.len() < k {
            return None;
        }
    }
    let mut labels = vec![u32::MAX; n];
    let mut members = Vec::new();
    for (c, v) in heap.into_iter().map(|h| h.1).chain(done).enumerate() {
        members.clear();
        tree.collect_leaves(v, &mut members);
        members.iter().for_each(|&i| labels[i] = c as u32);
    }
    let mut stray = Vec::new();
    for v in orphans {
        tree.collect_leaves(v, &mut stray);
    }
    attach_to_nearest(points, metric, &mut labels, &stray);
    Some(canonical_labels(n, |i| labels[i] as usize))
}

/// Gives each `stray` point the label of its nearest labeled point (lowest index on ties).
fn attach_to_nearest(points: Points<'_>, metric: Metric, labels: &mut [u32], stray: &[usize]) {
    let resolved: Vec<u32> = stray
        .iter()
        .map(|&i| {
            let p = points.get(i);
            let mut best = (f64::INFINITY, u32::MAX);
            for (j, &l) in labels.iter().enumerate() {
                if l == u32::MAX {
                    continue;
                }
                let d = metric.distance(p, points.get(j));
                if d < best.0 {
                    best = (d, l);
                }
            }
            best.1
        })
        .collect();
    for (&i, l) in stray.iter().zip(resolved) {
        labels[i] = l;
    }
}

/// Agglomerative clustering cut into `k` clusters.
///
/// Single linkage uses `params.metric`; Ward always uses squared Euclidean cost.
/// With a feasible `min_cluster_size` (`k · floor <= n`), single linkage cuts
/// its spanning tree under the floor (see [`floored_single_linkage`]) and Ward
/// cuts its dendrogram top-down, setting undersized branches aside (see
/// [`floored_cut`]). If the Ward cut cannot produce `k` clusters, the plain cut
/// is taken and every undersized cluster is merged into the cluster of its
/// nearest outside point, which may leave fewer than `k` clusters. Clusters
/// are numbered by their smallest point index.
pub fn agglomerative(
    points: Points<'_>,
    params: &LinkageParams,
    linkage: Linkage,
) -> Result<Vec<u32>> {
    let LinkageMode::CutToK(k) = params.mode else {
        return Err(Error::invalid("agglomerative clustering needs CutToK mode"));
    };
    let n = points.len();
    if k == 0 || n < k {
        return Err(Error::invalid(format!(
            "cannot cut {n} points into {k} clusters"
        )));
    }
    let (tree, metric) = match linkage {
        Linkage::Single => (
            single_linkage_dendrogram(points, params.metric),
            params.metric,
        ),
        Linkage::Ward => (ward_dendrogram(points), Metric::L2),
    };
    let floor = params.min_cluster_size;
    if floor <= 1 || k * floor > n {
        return Ok(tree.cut(k));
    }
    if linkage == Linkage::Single {
        return Ok(floored_single_linkage(points, k, floor, metric));
    }
    if let Some(labels) = floored_cut(&tree, k, floor, points, metric) {
        return Ok(labels);
    }
    let mut labels = tree.cut(k);
    loop {
        let mut sizes = vec![0usize; k];
        labels.iter().for_each(|&l| sizes[l as usize] += 1);
        let Some(small) = (0..k).find(|&c| sizes[c] > 0 && sizes[c] < floor) else {
            break;
        };
        if sizes.iter().filter(|&&s| s > 0).count() == 1 {
            break;
        }
        let stray: Vec<usize> = (0..n).filter(|&i| labels[i] as usize == small).collect();
        stray.iter().for_each(|&i| labels[i] = u32::MAX);
        // the whole cluster moves to the cluster of its closest outside point
        let mut best = (f64::INFINITY, u32::MAX);
        for &i in &stray {
            for (j, &l) in labels.iter().enumerate() {
                if l != u32::MAX {
                    let d = metric.distance(points.get(i), points.get(j));
                    if d < best.0 {
                        best = (d, l);
                    }
                }
            }
        }
        stray.iter().for_each(|&i| labels[i] = best.1);
    }
    Ok(canonical_labels(n, |i| labels[i] as usize))
}

/// Renumbers group keys `0..` in order of first appearance.
fn canonical_labels(n: usize, mut key: impl FnMut(usize) -> usize) -> Vec<u32> {
    let mut map = std::collections::HashMap::new();
    (0..n)
        .map(|i| {
            let next = map.len() as u32;
            *map.entry(key(i)).or_insert(next)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::subsample_grid;
    use crate::seed::Seed;
    use rand::Rng;

    fn pts(data: &[f64], dim: usize) -> Points<'_> {
        Points::new(data, dim).unwrap()
    }

    #[test]
    fn threshold_helper() {
        let b = theoretical_threshold(144, 1.5);
        assert!((b - 144f64.ln().powf(0.75) / 12.0).abs() < 1e-15);
        assert_eq!(theoretical_threshold(1, 1.5), 0.0);
    }

    #[test]
    fn tiny_threshold_gives_singletons() {
        let data = [0.0, 1.0, 2.5, 4.0];
        assert_eq!(
            threshold_components(pts(&data, 1), 0.5, Metric::Linf),
            vec![0, 1, 2, 3]
        );
    }

    #[test]
    fn chaining_connects() {
        let data = [0.0, 0.9, 1.8];
        assert_eq!(
            threshold_components(pts(&data, 1), 1.0, Metric::Linf),
            vec![0, 0, 0]
        );
        // the edge condition is strict
        assert_eq!(
            threshold_components(pts(&data, 1), 0.9, Metric::Linf),
            vec![0, 1, 2]
        );
    }

    #[test]
    fn two_blobs_and_patch_fill() {
        let (n, m) = (17, 2);
        let grid = subsample_grid(n, n, m).unwrap();
        assert_eq!(grid.len(), 9);
        let feats: Vec<f64> = grid
            .coords
            .iter()
            .flat_map(|&(r, _)| {
                if r < 8 {
                    [0.0, 0.01 * r as f64]
                } else {
                    [5.0, 0.01 * r as f64]
                }
            })
            .collect();
        let labels = single_linkage_threshold(
            &grid,
            pts(&feats, 2),
            &LinkageParams::threshold(1.0),
            (n, n),
            m,
        )
        .unwrap();
        assert_eq!(labels.num_labels(), 2);
        let mut filled = vec![false; n * n];
        for &(ur, uc) in &grid.coords {
            for r in ur - m..=ur + m {
                for c in uc - m..=uc + m {
                    assert!(!filled[r * n + c]);
                    filled[r * n + c] = true;
                    assert_eq!(labels.get(r, c), labels.get(ur, uc));
                }
            }
        }
        assert_eq!(filled.iter().filter(|&&f| f).count(), 3 * 3 * 5 * 5);
        // unfilled pixel (0, 0) is nearest to the grid point (4, 4)
        assert_eq!(labels.get(0, 0), labels.get(4, 4));
    }

    #[test]
    fn propagation_ties_go_to_smallest_coordinate() {
        let grid = SubsampleGrid {
            half_width: 0,
            coords: vec![(2, 0), (0, 0)],
            grid_rows: 2,
            grid_cols: 1,
        };
        let feats = [10.0, 0.0];
        let labels = single_linkage_threshold(
            &grid,
            pts(&feats, 1),
            &LinkageParams::threshold(1.0),
            (3, 1),
            0,
        )
        .unwrap();
        // (1, 0) is equidistant; (0, 0) wins and is labeled 0 as the smallest coordinate
        assert_eq!(labels.labels(), &[0, 0, 1]);
    }

    #[test]
    fn threshold_rejects_bad_input() {
        let grid = subsample_grid(9, 9, 1).unwrap();
        let feats = vec![0.0; grid.len()];
        assert!(single_linkage_threshold(
            &grid,
            pts(&feats, 1),
            &LinkageParams::threshold(0.0),
            (9, 9),
            1
        )
        .is_err());
        assert!(single_linkage_threshold(
            &grid,
            pts(&feats, 1),
            &LinkageParams::cut_to_k(2),
            (9, 9),
            1
        )
        .is_err());
        assert!(single_linkage_threshold(
            &grid,
            pts(&feats[1..], 1),
            &LinkageParams::threshold(1.0),
            (9, 9),
            1
        )
        .is_err());
    }

    #[test]
    fn single_collinear_example() {
        let data = [0.0, 1.0, 10.0];
        let labels =
            agglomerative(pts(&data, 1), &LinkageParams::cut_to_k(2), Linkage::Single).unwrap();
        assert_eq!(labels, vec![0, 0, 1]);
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let data = [3.0, 1.0, 2.0, 7.0];
        for linkage in [Linkage::Single, Linkage::Ward] {
            let labels =
                agglomerative(pts(&data, 1), &LinkageParams::cut_to_k(4), linkage).unwrap();
            assert_eq!(labels, vec![0, 1, 2, 3]);
        }
    }

    fn brute_ward_cost(data: &[f64], dim: usize, a: &[usize], b: &[usize]) -> f64 {
        let sse = |set: &[usize]| {
            let mut mean = vec![0.0; dim];
            for &i in set {
                for d in 0..dim {
                    mean[d] += data[i * dim + d] / set.len() as f64;
                }
            }
            set.iter()
                .map(|&i| {
                    (0..dim)
                        .map(|d| (data[i * dim + d] - mean[d]).powi(2))
                        .sum::<f64>()
                })
                .sum::<f64>()
        };
        let both: Vec<usize> = a.iter().chain(b).copied().collect();
        sse(&both) - sse(a) - sse(b)
    }

    #[test]
    fn ward_matches_greedy_brute_force() {
        // greedy merging by exact SSE increase, recomputed from scratch each step
        let mut rng = Seed(9).rng();
        let dim = 2;
        let data: Vec<f64> = (0..14).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let n = data.len() / dim;
        let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        let mut heights = Vec::new();
        while clusters.len() > 1 {
            let mut best = (f64::INFINITY, 0, 0);
            for i in 0..clusters.len() {
                for j in i + 1..clusters.len() {
                    let c = brute_ward_cost(&data, dim, &clusters[i], &clusters[j]);
                    if c < best.0 {
                        best = (c, i, j);
                    }
                }
            }
            let merged = clusters.remove(best.2);
            clusters[best.1].extend(merged);
            heights.push(best.0);
        }
        let tree = ward_dendrogram(pts(&data, dim));
        let got: Vec<f64> = tree.merges.iter().map(|m| m.height).collect();
        for (g, h) in got.iter().zip(&heights) {
            assert!((g - h).abs() < 1e-9, "{got:?} vs {heights:?}");
        }
    }

    #[test]
    fn ward_separates_blobs_like_exhaustive_search() {
        let mut rng = Seed(3).rng();
        let mut data = Vec::new();
        for i in 0..10 {
            let off = if i < 5 { 0.0 } else { 20.0 };
            data.push(off + rng.gen_range(-1.0..1.0));
            data.push(rng.gen_range(-1.0..1.0));
        }
        let labels =
            agglomerative(pts(&data, 2), &LinkageParams::cut_to_k(2), Linkage::Ward).unwrap();
        // exhaustive best 2-partition by within-cluster SSE
        let mut best = (f64::INFINITY, 0u32);
        for mask in 1u32..(1 << 10) - 1 {
            let a: Vec<usize> = (0..10).filter(|i| mask >> i & 1 == 1).collect();
            let b: Vec<usize> = (0..10).filter(|i| mask >> i & 1 == 0).collect();
            let total = brute_ward_cost(&data, 2, &a, &b);
            let both: Vec<usize> = (0..10).collect();
            let within = brute_ward_cost(&data, 2, &both, &[]) - total;
            if within < best.0 {
                best = (within, mask);
            }
        }
        let expect: Vec<u32> = (0..10).map(|i| (best.1 >> i & 1) ^ (best.1 & 1)).collect();
        assert_eq!(labels, expect);
        assert_eq!(labels, vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn single_linkage_merge_heights_are_mst_edges() {
        let data = [0.0, 1.0, 3.0, 7.0];
        let tree = single_linkage_dendrogram(pts(&data, 1), Metric::L2);
        let h: Vec<f64> = tree.merges.iter().map(|m| m.height).collect();
        assert_eq!(h, vec![1.0, 2.0, 4.0]);
        assert_eq!(tree.merges[2].size, 4);
    }

    #[test]
    fn floor_keeps_clusters_large() {
        // a chain with one outlier: the plain cut isolates the outlier
        let mut data: Vec<f64> = (0..10).map(|i| i as f64).collect();
        data.extend((0..10).map(|i| 100.0 + i as f64));
        data.push(1000.0);
        let p = LinkageParams::cut_to_k(2).with_min_cluster_size(5);
        let labels = agglomerative(pts(&data, 1), &p, Linkage::Single).unwrap();
        assert!(labels[..10].iter().all(|&l| l == 0));
        assert!(labels[10..].iter().all(|&l| l == 1));
        let plain =
            agglomerative(pts(&data, 1), &LinkageParams::cut_to_k(2), Linkage::Single).unwrap();
        assert_eq!(plain.iter().filter(|&&l| l == 1).count(), 1);
    }

    #[test]
    fn floor_falls_back_when_unreachable() {
        // geometric chain: every split peels off a single point
        let data: Vec<f64> = (0..8).map(|i| 2f64.powi(i)).collect();
        let p = LinkageParams::cut_to_k(2).with_min_cluster_size(3);
        let labels = agglomerative(pts(&data, 1), &p, Linkage::Single).unwrap();
        let mut sizes = std::collections::HashMap::new();
        labels
            .iter()
            .for_each(|&l| *sizes.entry(l).or_insert(0) += 1);
        assert!(sizes.values().all(|&s| s >= 3));
    }

    #[test]
    fn agglomerative_rejects_bad_params() {
        let data = [0.0, 1.0];
        assert!(
            agglomerative(pts(&data, 1), &LinkageParams::cut_to_k(3), Linkage::Single).is_err()
        );
        assert!(
            agglomerative(pts(&data, 1), &LinkageParams::threshold(1.0), Linkage::Ward).is_err()
        );
    }
}
