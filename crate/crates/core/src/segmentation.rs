//! One-dimensional k-means over saliency values and rank labelling.
//!
//! [`kmeans_1d`] runs Lloyd iterations from quantile seeding. Lloyd's method
//! can stall in a local minimum even in one dimension, so the result is
//! checked against the exact optimum: optimal 1-D clusters are contiguous
//! runs of the sorted values, which a dynamic program over split points
//! finds in `O(k·n·log n)`. When the optimum is strictly better, Lloyd is
//! restarted from it (it is a fixed point) and the model reflects that
//! partition.

use crate::error::{Error, Result};
use crate::raster::resample_nearest;

pub const DEFAULT_MAX_ITER: usize = 100;
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    /// Cluster means, ascending.
    pub centroids: Vec<f64>,
    /// Cluster index per observation, in input order.
    pub assignments: Vec<usize>,
    pub wcss: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Fewer distinct values than requested clusters; `centroids.len() < requested_k`.
    pub degenerate: bool,
    pub requested_k: usize,
    /// WCSS after every update, including the exact-optimum refinement.
    pub wcss_history: Vec<f64>,
    pub seed: u64,
}

impl ClusterModel {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }
}

/// Clusters `values` into at most `k` groups minimizing the within-cluster
/// sum of squares.
///
/// Seeding is deterministic, so `seed` does not influence the result; it is
/// carried in the model for provenance.
pub fn kmeans_1d(values: &[f64], k: usize, max_iter: usize, tol: f64, seed: u64) -> Result<ClusterModel> {
    if values.is_empty() {
        return Err(Error::invalid("k-means needs at least one value"));
    }
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if max_iter == 0 {
        return Err(Error::invalid("max_iter must be at least 1"));
    }
    if !(tol >= 0.0) {
        return Err(Error::invalid("tol must be non-negative"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("k-means values must be finite"));
    }

    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut distinct = sorted.clone();
    distinct.dedup();
    let k_eff = k.min(distinct.len());

    let mut state = Lloyd::new(values, quantile_seeds(&sorted, &distinct, k_eff));
    state.run(max_iter, tol);

    let (optimal, optimal_wcss) = optimal_centroids(&sorted, k_eff);
    if optimal_wcss < state.wcss() * (1.0 - 1e-12) - 1e-300 {
        let (iterations, history) = (state.iterations, std::mem::take(&mut state.history));
        state = Lloyd::new(values, optimal);
        state.history = history;
        state.iterations = iterations;
        state.run(max_iter, tol);
    }

    let Lloyd {
        mut centroids,
        mut assignments,
        iterations,
        converged,
        history,
        ..
    } = state;

    // Lloyd keeps 1-D centroids ordered except after an empty-cluster reseed.
    let mut order: Vec<usize> = (0..centroids.len()).collect();
    order.sort_by(|&a, &b| centroids[a].total_cmp(&centroids[b]).then(a.cmp(&b)));
    let mut remap = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        remap[old] = new;
    }
    centroids = order.iter().map(|&i| centroids[i]).collect();
    assignments.iter_mut().for_each(|a| *a = remap[*a]);

    let wcss = wcss_of(values, &assignments, &centroids);
    Ok(ClusterModel {
        centroids,
        assignments,
        wcss,
        iterations,
        converged,
        degenerate: k_eff < k,
        requested_k: k,
        wcss_history: history,
        seed,
    })
}

/// Centroid `i` at the `(i + 0.5) / k` quantile of the sorted values; falls
/// back to quantiles of the distinct values when seeds would coincide.
fn quantile_seeds(sorted: &[f64], distinct: &[f64], k: usize) -> Vec<f64> {
    let pick = |pool: &[f64]| -> Vec<f64> {
        (0..k)
            .map(|i| {
                let q = (i as f64 + 0.5) / k as f64;
                pool[((q * pool.len() as f64) as usize).min(pool.len() - 1)]
            })
            .collect()
    };
    let seeds = pick(sorted);
    if seeds.windows(2).all(|w| w[0] < w[1]) {
        seeds
    } else {
        pick(distinct)
    }
}

struct Lloyd<'a> {
    values: &'a [f64],
    centroids: Vec<f64>,
    assignments: Vec<usize>,
    iterations: usize,
    converged: bool,
    history: Vec<f64>,
}

impl<'a> Lloyd<'a> {
    fn new(values: &'a [f64], centroids: Vec<f64>) -> Self {
        Self {
            values,
            centroids,
            assignments: Vec::new(),
            iterations: 0,
            converged: false,
            history: Vec::new(),
        }
    }

    fn wcss(&self) -> f64 {
        self.history.last().copied().unwrap_or(f64::INFINITY)
    }

    fn run(&mut self, max_iter: usize, tol: f64) {
        self.converged = false;
        for _ in 0..max_iter {
            self.iterations += 1;
            let mut next: Vec<usize> = self.values.iter().map(|&x| nearest(&self.centroids, x)).collect();
            self.reseed_empty(&mut next);
            let stable = next == self.assignments;
            self.assignments = next;

            let means = cluster_means(self.values, &self.assignments, &self.centroids);
            let movement = means
                .iter()
                .zip(&self.centroids)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            self.centroids = means;
            self.history
                .push(wcss_of(self.values, &self.assignments, &self.centroids));
            if stable || movement < tol {
                self.converged = true;
                break;
            }
        }
    }

    /// Gives every empty cluster the observation farthest from its centroid.
    fn reseed_empty(&mut self, assignments: &mut [usize]) {
        let k = self.centroids.len();
        loop {
            let mut counts = vec![0usize; k];
            for &a in assignments.iter() {
                counts[a] += 1;
            }
            let Some(empty) = counts.iter().position(|&c| c == 0) else {
                return;
            };
            let (far, dist) = assignments
                .iter()
                .enumerate()
                .filter(|&(_, &a)| counts[a] > 1)
                .map(|(i, &a)| (i, (self.values[i] - self.centroids[a]).abs()))
                .fold((usize::MAX, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if far == usize::MAX || dist <= 0.0 {
                // nothing left to split off
                return;
            }
            assignments[far] = empty;
            self.centroids[empty] = self.values[far];
        }
    }
}

/// Nearest centroid; the lower index wins ties.
fn nearest(centroids: &[f64], x: f64) -> usize {
    let mut best = 0;
    let mut best_d = (x - centroids[0]).abs();
    for (i, &c) in centroids.iter().enumerate().skip(1) {
        let d = (x - c).abs();
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

fn cluster_means(values: &[f64], assignments: &[usize], fallback: &[f64]) -> Vec<f64> {
    let mut sums = vec![0.0; fallback.len()];
    let mut counts = vec![0usize; fallback.len()];
    for (&x, &a) in values.iter().zip(assignments) {
        sums[a] += x;
        counts[a] += 1;
    }
    sums.iter()
        .zip(&counts)
        .zip(fallback)
        .map(|((&s, &n), &f)| if n == 0 { f } else { s / n as f64 })
        .collect()
}

fn wcss_of(values: &[f64], assignments: &[usize], centroids: &[f64]) -> f64 {
    values
        .iter()
        .zip(assignments)
        .map(|(&x, &a)| (x - centroids[a]).powi(2))
        .sum()
}

/// Exact optimal `k`-partition of sorted values into contiguous runs.
/// Returns the run means and the partition's WCSS (two-pass).
fn optimal_centroids(sorted: &[f64], k: usize) -> (Vec<f64>, f64) {
    let n = sorted.len();
    let mut sum = vec![0.0; n + 1];
    let mut sq = vec![0.0; n + 1];
    for (i, &x) in sorted.iter().enumerate() {
        sum[i + 1] = sum[i] + x;
        sq[i + 1] = sq[i] + x * x;
    }
    // sum of squares of sorted[i..j]
    let cost = |i: usize, j: usize| -> f64 {
        let m = (j - i) as f64;
        let s = sum[j] - sum[i];
        (sq[j] - sq[i] - s * s / m).max(0.0)
    };

    // prev[j]: best cost of the first j values in `layer` runs; split[layer][j]: start of the last run.
    let mut prev: Vec<f64> = (0..=n).map(|j| if j == 0 { 0.0 } else { cost(0, j) }).collect();
    let mut splits: Vec<Vec<usize>> = vec![vec![0; n + 1]];
    for layer in 1..k {
        let mut cur = vec![f64::INFINITY; n + 1];
        let mut split = vec![0; n + 1];
        // Runs are non-empty, so j ranges over layer+1..=n.
        solve_layer(&prev, &cost, layer, layer + 1, n, layer, n - 1, &mut cur, &mut split);
        prev = cur;
        splits.push(split);
    }

    let mut bounds = vec![n];
    let mut j = n;
    for layer in (1..k).rev() {
        j = splits[layer][j];
        bounds.push(j);
    }
    bounds.push(0);
    bounds.reverse();

    let mut centroids = Vec::with_capacity(k);
    let mut wcss = 0.0;
    for run in bounds.windows(2) {
        let slice = &sorted[run[0]..run[1]];
        let mean = slice.iter().sum::<f64>() / slice.len() as f64;
        wcss += slice.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
        centroids.push(mean);
    }
    (centroids, wcss)
}

/// Divide-and-conquer fill of one DP layer; the optimal split point is
/// monotone in `j` for the 1-D sum-of-squares cost.
#[allow(clippy::too_many_arguments)]
fn solve_layer(
    prev: &[f64],
    cost: &impl Fn(usize, usize) -> f64,
    layer: usize,
    j_lo: usize,
    j_hi: usize,
    opt_lo: usize,
    opt_hi: usize,
    cur: &mut [f64],
    split: &mut [usize],
) {
    if j_lo > j_hi {
        return;
    }
    let j = (j_lo + j_hi) / 2;
    let mut best = (f64::INFINITY, opt_lo);
    // last run is sorted[i..j], i >= layer so earlier runs are non-empty
    for i in opt_lo.max(layer)..=opt_hi.min(j - 1) {
        let c = prev[i] + cost(i, j);
        if c < best.0 {
            best = (c, i);
        }
    }
    cur[j] = best.0;
    split[j] = best.1;
    if j > j_lo {
        solve_layer(prev, cost, layer, j_lo, j - 1, opt_lo, best.1, cur, split);
    }
    solve_layer(prev, cost, layer, j + 1, j_hi, best.1, opt_hi, cur, split);
}

/// Rank labels `1..=N` on a `width × height` grid, 1 for the darkest cluster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelRaster {
    width: usize,
    height: usize,
    labels: Vec<u8>,
    cluster_count: u8,
}

impl LabelRaster {
    pub fn new(width: usize, height: usize, labels: Vec<u8>, cluster_count: u8) -> Result<Self> {
        if width == 0 || height == 0 || labels.len() != width * height {
            return Err(Error::invalid(format!(
                "label raster {width}x{height} with {} labels",
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l == 0 || l > cluster_count) {
            return Err(Error::invalid(format!("label {bad} outside 1..={cluster_count}")));
        }
        Ok(Self {
            width,
            height,
            labels,
            cluster_count,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cluster_count(&self) -> u8 {
        self.cluster_count
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.labels[row * self.width + col]
    }

    /// Labels in `1..=N` that no pixel carries.
    pub fn missing_labels(&self) -> Vec<u8> {
        let mut seen = vec![false; self.cluster_count as usize + 1];
        for &l in &self.labels {
            seen[l as usize] = true;
        }
        (1..=self.cluster_count).filter(|&l| !seen[l as usize]).collect()
    }

    pub fn is_degenerate(&self) -> bool {
        !self.missing_labels().is_empty()
    }

    pub fn resize_nearest(&self, width: usize, height: usize) -> Result<LabelRaster> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("zero target dimension"));
        }
        Ok(LabelRaster {
            width,
            height,
            labels: resample_nearest(&self.labels, self.width, self.height, width, height),
            cluster_count: self.cluster_count,
        })
    }
}

/// Relabels cluster indices by ascending centroid: the lowest centroid gets
/// label 1, the highest label `N`.
pub fn rank_labels(model: &ClusterModel, width: usize, height: usize) -> Result<LabelRaster> {
    if width * height != model.assignments.len() {
        return Err(Error::invalid(format!(
            "{} assignments do not cover {width}x{height}",
            model.assignments.len()
        )));
    }
    let k = model.centroids.len();
    if k == 0 || k > u8::MAX as usize {
        return Err(Error::invalid(format!("cannot rank {k} clusters")));
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| model.centroids[a].total_cmp(&model.centroids[b]).then(a.cmp(&b)));
    let mut rank = vec![0u8; k];
    for (position, &cluster) in order.iter().enumerate() {
        rank[cluster] = position as u8 + 1;
    }
    let labels = model
        .assignments
        .iter()
        .map(|&a| rank.get(a).copied().ok_or_else(|| Error::invalid(format!("assignment {a} >= k"))))
        .collect::<Result<Vec<_>>>()?;
    LabelRaster::new(width, height, labels, k as u8)
}
