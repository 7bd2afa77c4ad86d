//! Clustering support for the unsupervised meta-feature set: seeded k-means
//! with restarts, an average-linkage dendrogram reusable across cut sizes,
//! and three internal validity indices.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use crate::util::euclidean;
use crate::{Error, Result};

/// Z-scores every column (population sd); constant columns become zeros.
pub fn zscore_columns(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    let mut mean = vec![0.0; m];
    for row in rows {
        for (j, &x) in row.iter().enumerate() {
            mean[j] += x;
        }
    }
    for v in &mut mean {
        *v /= n as f64;
    }
    let mut sd = vec![0.0; m];
    for row in rows {
        for (j, &x) in row.iter().enumerate() {
            sd[j] += (x - mean[j]) * (x - mean[j]);
        }
    }
    for v in &mut sd {
        *v = (*v / n as f64).sqrt();
    }
    rows.iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(j, &x)| if sd[j] > 0.0 { (x - mean[j]) / sd[j] } else { 0.0 })
                .collect()
        })
        .collect()
}

/// Lloyd's algorithm with `restarts` seeded restarts of `iters` iterations.
/// A restart producing an empty cluster fails; the best surviving restart
/// by within-cluster squared error wins. All restarts failing is an error.
pub fn kmeans(
    rows: &[Vec<f64>],
    k: usize,
    restarts: usize,
    iters: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    let n = rows.len();
    if k < 2 || n < k {
        return Err(Error::Config(format!(
            "kmeans needs 2 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    let m = rows[0].len();
    let mut best: Option<(f64, Vec<usize>)> = None;

    for _ in 0..restarts {
        let mut idx: Vec<usize> = (0..n).collect();
        let (chosen, _) = idx.partial_shuffle(rng, k);
        let mut centroids: Vec<Vec<f64>> = chosen.iter().map(|&i| rows[i].clone()).collect();
        let mut assign = vec![usize::MAX; n];
        let mut ok = true;

        for _ in 0..iters {
            let mut changed = false;
            for (i, row) in rows.iter().enumerate() {
                let mut best_c = 0;
                let mut best_d = f64::INFINITY;
                for (c, centroid) in centroids.iter().enumerate() {
                    let d = euclidean(row, centroid);
                    if d < best_d {
                        best_d = d;
                        best_c = c;
                    }
                }
                if assign[i] != best_c {
                    assign[i] = best_c;
                    changed = true;
                }
            }
            let mut counts = vec![0usize; k];
            for &a in &assign {
                counts[a] += 1;
            }
            if counts.iter().any(|&c| c == 0) {
                ok = false;
                break;
            }
            if !changed {
                break;
            }
            for c in 0..k {
                let mut center = vec![0.0; m];
                for (i, row) in rows.iter().enumerate() {
                    if assign[i] == c {
                        for (j, &x) in row.iter().enumerate() {
                            center[j] += x;
                        }
                    }
                }
                for v in &mut center {
                    *v /= counts[c] as f64;
                }
                centroids[c] = center;
            }
        }
        if !ok {
            continue;
        }
        let sse: f64 = rows
            .iter()
            .zip(&assign)
            .map(|(row, &c)| {
                let d = euclidean(row, &centroids[c]);
                d * d
            })
            .sum();
        if best.as_ref().is_none_or(|(b, _)| sse < *b) {
            best = Some((sse, assign));
        }
    }
    best.map(|(_, assign)| assign).ok_or_else(|| {
        Error::DegenerateClustering(format!(
            "kmeans produced an empty cluster in all {restarts} restarts (k = {k})"
        ))
    })
}

/// Average-linkage agglomeration recorded as a merge sequence, so one pass
/// serves every cut size.
pub struct Dendrogram {
    n: usize,
    /// Pairwise merges of dendrogram node ids; leaves are 0..n, merge `t`
    /// creates node `n + t`.
    merges: Vec<(usize, usize)>,
}

pub fn average_linkage(rows: &[Vec<f64>]) -> Dendrogram {
    let n = rows.len();
    let mut dist = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = euclidean(&rows[i], &rows[j]);
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    let mut active: Vec<bool> = vec![true; n];
    let mut size = vec![1usize; n];
    let mut node_id: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));

    for t in 0..n.saturating_sub(1) {
        let mut best = (f64::INFINITY, usize::MAX, usize::MAX);
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in i + 1..n {
                if active[j] && dist[i][j] < best.0 {
                    best = (dist[i][j], i, j);
                }
            }
        }
        let (_, i, j) = best;
        merges.push((node_id[i], node_id[j]));
        // Lance-Williams update for average linkage into slot i.
        let (si, sj) = (size[i] as f64, size[j] as f64);
        for x in 0..n {
            if x != i && x != j && active[x] {
                let d = (si * dist[i][x] + sj * dist[j][x]) / (si + sj);
                dist[i][x] = d;
                dist[x][i] = d;
            }
        }
        active[j] = false;
        size[i] += size[j];
        node_id[i] = n + t;
    }
    Dendrogram { n, merges }
}

impl Dendrogram {
    /// Cluster labels after merging down to `k` clusters, renumbered by
    /// first row occurrence.
    pub fn cut(&self, k: usize) -> Result<Vec<usize>> {
        if k < 1 || k > self.n {
            return Err(Error::Config(format!(
                "cut needs 1 <= k <= n, got k = {k}, n = {}",
                self.n
            )));
        }
        let mut parent: Vec<usize> = (0..self.n + self.merges.len() + 1).collect();
        fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (t, &(a, b)) in self.merges.iter().take(self.n - k).enumerate() {
            let new = self.n + t;
            let ra = find(&mut parent, a);
            let rb = find(&mut parent, b);
            parent[ra] = new;
            parent[rb] = new;
        }
        let mut labels = Vec::with_capacity(self.n);
        let mut mapping = std::collections::BTreeMap::new();
        for i in 0..self.n {
            let root = find(&mut parent, i);
            let next = mapping.len();
            labels.push(*mapping.entry(root).or_insert(next));
        }
        Ok(labels)
    }
}

/// Connectivity with `l` nearest neighbors: the i-th row adds `1/r` for
/// every r-th nearest neighbor assigned to a different cluster. Lower is
/// better; always non-negative.
pub fn connectivity(rows: &[Vec<f64>], labels: &[usize], l: usize) -> f64 {
    let n = rows.len();
    let l = l.min(n.saturating_sub(1));
    let mut total = 0.0;
    for i in 0..n {
        let mut neighbors: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (euclidean(&rows[i], &rows[j]), j))
            .collect();
        neighbors.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
        for (r, &(_, j)) in neighbors[..l].iter().enumerate() {
            if labels[j] != labels[i] {
                total += 1.0 / (r + 1) as f64;
            }
        }
    }
    total
}

/// Dunn index: smallest between-cluster distance over largest within
/// cluster diameter. None when every cluster has zero diameter.
pub fn dunn(rows: &[Vec<f64>], labels: &[usize]) -> Option<f64> {
    let n = rows.len();
    let mut min_between = f64::INFINITY;
    let mut max_within = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            let d = euclidean(&rows[i], &rows[j]);
            if labels[i] == labels[j] {
                max_within = max_within.max(d);
            } else {
                min_between = min_between.min(d);
            }
        }
    }
    if max_within == 0.0 {
        return None;
    }
    Some(min_between / max_within)
}

/// Mean silhouette width. Singleton clusters score zero, following the
/// usual convention.
pub fn silhouette(rows: &[Vec<f64>], labels: &[usize]) -> f64 {
    let n = rows.len();
    let k = labels.iter().max().map_or(0, |&m| m + 1);
    let mut sizes = vec![0usize; k];
    for &l in labels {
        sizes[l] += 1;
    }
    let mut total = 0.0;
    for i in 0..n {
        if sizes[labels[i]] == 1 {
            continue; // contributes 0
        }
        let mut sums = vec![0.0; k];
        for j in 0..n {
            if j != i {
                sums[labels[j]] += euclidean(&rows[i], &rows[j]);
            }
        }
        let a = sums[labels[i]] / (sizes[labels[i]] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != labels[i] && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    total / n as f64
}
