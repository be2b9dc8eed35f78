//! k-means, permutation-minimized clustering error and scatter ratio.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::synth::SeededRng;

pub const DEFAULT_RESTARTS: usize = 10;
const MAX_LLOYD_ITERS: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    pub inertia: f64,
    #[serde(skip)]
    pub centroids: Array2<f64>,
}

fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn plusplus_seed(points: ArrayView2<f64>, k: usize, rng: &mut SeededRng) -> Array2<f64> {
    let n = points.nrows();
    let mut centroids = Array2::zeros((k, points.ncols()));
    centroids.row_mut(0).assign(&points.row(rng.index(n)));
    let mut dist: Vec<f64> = points.outer_iter().map(|p| sq_dist(p, centroids.row(0))).collect();
    for c in 1..k {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.uniform() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, d) in dist.iter().enumerate() {
                acc += d;
                if acc > target {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.index(n)
        };
        centroids.row_mut(c).assign(&points.row(pick));
        for (i, p) in points.outer_iter().enumerate() {
            dist[i] = dist[i].min(sq_dist(p, centroids.row(c)));
        }
    }
    centroids
}

fn nearest(p: ArrayView1<f64>, centroids: &Array2<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, row) in centroids.outer_iter().enumerate() {
        let d = sq_dist(p, row);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn lloyd(points: ArrayView2<f64>, mut centroids: Array2<f64>) -> KMeansResult {
    let (n, dim) = points.dim();
    let k = centroids.nrows();
    let mut assignments = vec![usize::MAX; n];
    let mut dists = vec![0.0; n];
    for _ in 0..MAX_LLOYD_ITERS {
        let mut changed = false;
        for (i, p) in points.outer_iter().enumerate() {
            let (c, d) = nearest(p, &centroids);
            if c != assignments[i] {
                assignments[i] = c;
                changed = true;
            }
            dists[i] = d;
        }
        if !changed {
            break;
        }
        let mut sums = Array2::<f64>::zeros((k, dim));
        let mut counts = vec![0usize; k];
        for (i, p) in points.outer_iter().enumerate() {
            sums.row_mut(assignments[i]).scaled_add(1.0, &p);
            counts[assignments[i]] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids.row_mut(c).assign(&(&sums.row(c) / counts[c] as f64));
            } else {
                // move an empty centroid onto the worst-fit point
                let far = (0..n)
                    .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)))
                    .unwrap_or(0);
                centroids.row_mut(c).assign(&points.row(far));
                dists[far] = 0.0;
            }
        }
    }
    let inertia = points
        .outer_iter()
        .zip(&assignments)
        .map(|(p, &c)| sq_dist(p, centroids.row(c)))
        .sum();
    KMeansResult {
        assignments,
        inertia,
        centroids,
    }
}

/// Lloyd's k-means with k-means++ seeding; keeps the lowest-inertia run,
/// the earliest on ties.
pub fn kmeans(points: ArrayView2<f64>, k: usize, restarts: usize, seed: u64) -> Result<KMeansResult> {
    let n = points.nrows();
    if n == 0 || points.ncols() == 0 {
        return Err(Error::EmptyDataset);
    }
    if k == 0 {
        return Err(Error::ZeroClusters);
    }
    if k > n {
        return Err(Error::TooManyClusters { k, points: n });
    }
    if let Some(((row, col), _)) = points.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { row, col });
    }
    let mut rng = SeededRng::new(seed);
    let mut best: Option<KMeansResult> = None;
    for _ in 0..restarts.max(1) {
        let run = lloyd(points, plusplus_seed(points, k, &mut rng));
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn dense_labels(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = BTreeMap::new();
    for &l in labels {
        let next = map.len();
        map.entry(l).or_insert(next);
    }
    (labels.iter().map(|l| map[l]).collect(), map.len())
}

/// Fraction of samples misassigned under the best matching of predicted to
/// true labels.
pub fn clustering_error(assignments: &[usize], truth: &[usize]) -> Result<f64> {
    if assignments.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: assignments.len(),
            right: truth.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (pred, kp) = dense_labels(assignments);
    let (real, kt) = dense_labels(truth);
    let k = kp.max(kt);
    let mut counts = vec![vec![0i64; k]; k];
    for (&p, &t) in pred.iter().zip(&real) {
        counts[p][t] += 1;
    }
    let matched = if k <= 6 {
        best_permutation(&counts)
    } else {
        let cost: Vec<Vec<i64>> = counts.iter().map(|r| r.iter().map(|c| -c).collect()).collect();
        let assignment = hungarian(&cost);
        assignment.iter().enumerate().map(|(r, &c)| counts[r][c]).sum()
    };
    Ok((truth.len() as i64 - matched) as f64 / truth.len() as f64)
}

fn best_permutation(counts: &[Vec<i64>]) -> i64 {
    fn go(row: usize, used: &mut [bool], counts: &[Vec<i64>], acc: i64, best: &mut i64) {
        if row == counts.len() {
            *best = (*best).max(acc);
            return;
        }
        for c in 0..counts.len() {
            if !used[c] {
                used[c] = true;
                go(row + 1, used, counts, acc + counts[row][c], best);
                used[c] = false;
            }
        }
    }
    let mut best = 0;
    go(0, &mut vec![false; counts.len()], counts, 0, &mut best);
    best
}

/// Minimum-cost perfect assignment on a square cost matrix (potentials
/// method, O(n^3)). Returns the column assigned to each row.
pub fn hungarian(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut rows = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            rows[p[j] - 1] = j - 1;
        }
    }
    rows
}

/// Total scatter over within-cluster scatter; `Infinite` when every cluster
/// collapses to a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScatterRatio {
    Finite(f64),
    Infinite,
}

impl ScatterRatio {
    pub fn value(self) -> f64 {
        match self {
            ScatterRatio::Finite(v) => v,
            ScatterRatio::Infinite => f64::INFINITY,
        }
    }
}

impl Serialize for ScatterRatio {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ScatterRatio::Finite(v) => s.serialize_f64(*v),
            ScatterRatio::Infinite => s.serialize_str("inf"),
        }
    }
}

/// `S_t / sum_i S_i` with `S_t = sum_j ||e_j||^2` and `S_i` the scatter of
/// cluster `i` about its own mean. Labels must be `0..k` with every label used.
pub fn scatter_ratio(embedding: ArrayView2<f64>, assignments: &[usize]) -> Result<ScatterRatio> {
    let n = embedding.nrows();
    if n != assignments.len() {
        return Err(Error::LengthMismatch {
            left: n,
            right: assignments.len(),
        });
    }
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let k = assignments.iter().max().map_or(0, |m| m + 1);
    let mut sums = Array2::<f64>::zeros((k, embedding.ncols()));
    let mut counts = vec![0usize; k];
    for (row, &c) in embedding.outer_iter().zip(assignments) {
        sums.row_mut(c).scaled_add(1.0, &row);
        counts[c] += 1;
    }
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyCluster(empty));
    }
    let means = &sums / &Array1::from_iter(counts.iter().map(|&c| c as f64)).insert_axis(Axis(1));
    let total: f64 = embedding.iter().map(|v| v * v).sum();
    let within: f64 = embedding
        .outer_iter()
        .zip(assignments)
        .map(|(row, &c)| sq_dist(row, means.row(c)))
        .sum();
    if within <= 1e-15 * total || within == 0.0 {
        Ok(ScatterRatio::Infinite)
    } else {
        Ok(ScatterRatio::Finite(total / within))
    }
}

/// Clustering metrics for one embedding against ground-truth labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub clustering_error: f64,
    /// Computed over the ground-truth clusters.
    pub scatter_ratio: ScatterRatio,
    pub assignments: Vec<usize>,
    pub kmeans_inertia: f64,
    pub n_clusters: usize,
}

/// Runs k-means with as many clusters as distinct true labels and scores it.
pub fn evaluate(embedding: ArrayView2<f64>, truth: &[usize], seed: u64) -> Result<EvaluationReport> {
    if embedding.nrows() != truth.len() {
        return Err(Error::LengthMismatch {
            left: embedding.nrows(),
            right: truth.len(),
        });
    }
    let (dense, k) = dense_labels(truth);
    let km = kmeans(embedding, k, DEFAULT_RESTARTS, seed)?;
    Ok(EvaluationReport {
        clustering_error: clustering_error(&km.assignments, truth)?,
        scatter_ratio: scatter_ratio(embedding, &dense)?,
        assignments: km.assignments,
        kmeans_inertia: km.inertia,
        n_clusters: k,
    })
}
