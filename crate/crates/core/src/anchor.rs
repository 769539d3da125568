//! Anchor selection and per-view sample-to-anchor bipartite graphs.

use log::warn;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const KMEANS_MAX_ITERS: usize = 100;
const DEGENERATE_DENOM: f64 = 1e-12;

/// Multi-view features: `views[v]` is `n x d_v`, rows are samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewDataset {
    views: Vec<DMatrix<f64>>,
    labels: Option<Vec<usize>>,
}

impl ViewDataset {
    pub fn new(views: Vec<DMatrix<f64>>, labels: Option<Vec<usize>>) -> Result<Self> {
        let first = views
            .first()
            .ok_or_else(|| Error::InvalidConfig("a dataset needs at least one view".into()))?;
        let n = first.nrows();
        if n < 2 {
            return Err(Error::InvalidConfig(format!(
                "a dataset needs at least 2 samples, got {n}"
            )));
        }
        for (v, view) in views.iter().enumerate() {
            if view.nrows() != n {
                return Err(Error::ShapeMismatch {
                    view: v,
                    rows: view.nrows(),
                    expected: n,
                });
            }
            if view.ncols() == 0 {
                return Err(Error::InvalidConfig(format!("view {v} has no features")));
            }
            if view.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidConfig(format!("view {v} has non-finite entries")));
            }
        }
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(Error::LabelMismatch {
                    labels: labels.len(),
                    samples: n,
                });
            }
        }
        Ok(Self { views, labels })
    }

    pub fn n_samples(&self) -> usize {
        self.views[0].nrows()
    }

    pub fn n_views(&self) -> usize {
        self.views.len()
    }

    pub fn views(&self) -> &[DMatrix<f64>] {
        &self.views
    }

    pub fn view(&self, v: usize) -> &DMatrix<f64> {
        &self.views[v]
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn view_dims(&self) -> Vec<usize> {
        self.views.iter().map(|x| x.ncols()).collect()
    }

    /// All views side by side, `n x sum(d_v)`.
    pub fn concatenated(&self) -> DMatrix<f64> {
        let n = self.n_samples();
        let total: usize = self.view_dims().iter().sum();
        let mut out = DMatrix::zeros(n, total);
        let mut col = 0;
        for view in &self.views {
            out.columns_mut(col, view.ncols()).copy_from(view);
            col += view.ncols();
        }
        out
    }
}

/// `m` anchors in the concatenated feature space, in the original feature units.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSet {
    centers: DMatrix<f64>,
    view_dims: Vec<usize>,
}

impl AnchorSet {
    pub fn new(centers: DMatrix<f64>, view_dims: Vec<usize>) -> Result<Self> {
        if view_dims.iter().sum::<usize>() != centers.ncols() {
            return Err(Error::InvalidConfig(
                "anchor columns do not match the view dimensions".into(),
            ));
        }
        if centers.nrows() == 0 {
            return Err(Error::InvalidConfig("anchor set is empty".into()));
        }
        Ok(Self { centers, view_dims })
    }

    pub fn m(&self) -> usize {
        self.centers.nrows()
    }

    pub fn centers(&self) -> &DMatrix<f64> {
        &self.centers
    }

    /// Column block of the centers belonging to view `v`.
    pub fn view_centers(&self, v: usize) -> DMatrix<f64> {
        let start: usize = self.view_dims[..v].iter().sum();
        self.centers.columns(start, self.view_dims[v]).into_owned()
    }

    pub fn per_view_centers(&self) -> Vec<DMatrix<f64>> {
        (0..self.view_dims.len()).map(|v| self.view_centers(v)).collect()
    }
}

/// Row-stochastic nonnegative `n x m` sample-to-anchor affinities.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteGraph {
    weights: DMatrix<f64>,
}

impl BipartiteGraph {
    /// Checks nonnegativity and unit row sums (within `1e-9`).
    pub fn new(weights: DMatrix<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidConfig(
                "bipartite weights must be finite and nonnegative".into(),
            ));
        }
        for (i, row) in weights.row_iter().enumerate() {
            let s = row.sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidConfig(format!("row {i} sums to {s}, expected 1")));
            }
        }
        Ok(Self { weights })
    }

    pub(crate) fn new_unchecked(weights: DMatrix<f64>) -> Self {
        Self { weights }
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn into_weights(self) -> DMatrix<f64> {
        self.weights
    }

    pub fn n_samples(&self) -> usize {
        self.weights.nrows()
    }

    pub fn n_anchors(&self) -> usize {
        self.weights.ncols()
    }
}

/// Per-column z-score: returns the normalized matrix with column means and scales.
/// Zero-variance columns keep scale 1 (they are only centered).
fn zscore_columns(x: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, Vec<f64>) {
    let n = x.nrows() as f64;
    let mut means = Vec::with_capacity(x.ncols());
    let mut scales = Vec::with_capacity(x.ncols());
    let mut out = x.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        let mean = x.column(j).sum() / n;
        let var = x.column(j).iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let scale = if var > 0.0 { var.sqrt() } else { 1.0 };
        for v in col.iter_mut() {
            *v = (*v - mean) / scale;
        }
        means.push(mean);
        scales.push(scale);
    }
    (out, means, scales)
}

fn sq_dist_rows(a: &DMatrix<f64>, i: usize, b: &DMatrix<f64>, j: usize) -> f64 {
    let mut acc = 0.0;
    for c in 0..a.ncols() {
        let d = a[(i, c)] - b[(j, c)];
        acc += d * d;
    }
    acc
}

/// Seeded k-means++ seeding followed by Lloyd iterations. Returns `k x d` centroids.
pub(crate) fn kmeans(points: &DMatrix<f64>, k: usize, seed: u64) -> DMatrix<f64> {
    let n = points.nrows();
    let d = points.ncols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = DMatrix::zeros(k, d);

    let first = rng.random_range(0..n);
    centers.row_mut(0).copy_from(&points.row(first));
    let mut nearest: Vec<f64> = (0..n).map(|i| sq_dist_rows(points, i, &centers, 0)).collect();
    for c in 1..k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, w) in nearest.iter().enumerate() {
                if target < *w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            // all points coincide with chosen centers
            rng.random_range(0..n)
        };
        centers.row_mut(c).copy_from(&points.row(pick));
        for (i, best) in nearest.iter_mut().enumerate() {
            *best = best.min(sq_dist_rows(points, i, &centers, c));
        }
    }

    let mut assign = vec![usize::MAX; n];
    for _ in 0..KMEANS_MAX_ITERS {
        let mut changed = false;
        for (i, slot) in assign.iter_mut().enumerate() {
            let mut best = (0, f64::INFINITY);
            for c in 0..k {
                let dist = sq_dist_rows(points, i, &centers, c);
                if dist < best.1 {
                    best = (c, dist);
                }
            }
            if *slot != best.0 {
                *slot = best.0;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = DMatrix::<f64>::zeros(k, d);
        let mut counts = vec![0usize; k];
        for (i, &c) in assign.iter().enumerate() {
            counts[c] += 1;
            let mut row = sums.row_mut(c);
            row += points.row(i);
        }
        for c in 0..k {
            if counts[c] > 0 {
                let mean = sums.row(c) / counts[c] as f64;
                centers.row_mut(c).copy_from(&mean);
            } else {
                // re-seed an empty cluster at the point farthest from its center
                let far = (0..n)
                    .max_by(|&a, &b| {
                        let da = sq_dist_rows(points, a, &centers, assign[a]);
                        let db = sq_dist_rows(points, b, &centers, assign[b]);
                        da.total_cmp(&db).then(b.cmp(&a))
                    })
                    .unwrap_or(0);
                centers.row_mut(c).copy_from(&points.row(far));
                assign[far] = c;
            }
        }
    }
    centers
}

/// Picks `m` anchors by k-means on the column-standardized concatenation of all
/// views. Centers are mapped back to the original feature units.
pub fn select_anchors(data: &ViewDataset, m: usize, seed: u64) -> Result<AnchorSet> {
    let n = data.n_samples();
    if m == 0 {
        return Err(Error::InvalidConfig("anchor count must be at least 1".into()));
    }
    if m > n {
        return Err(Error::TooManyAnchors { m, n });
    }
    for (v, view) in data.views().iter().enumerate() {
        let constant = view.column_iter().all(|col| {
            let first = col[0];
            col.iter().all(|x| *x == first)
        });
        if constant {
            warn!("view {v} has zero variance in every column");
        }
    }
    let (normalized, means, scales) = zscore_columns(&data.concatenated());
    let mut centers = kmeans(&normalized, m, seed);
    for (j, mut col) in centers.column_iter_mut().enumerate() {
        for x in col.iter_mut() {
            *x = *x * scales[j] + means[j];
        }
    }
    AnchorSet::new(centers, data.view_dims())
}

/// Adaptive-neighbor bipartite graph: each sample links to its `k` nearest
/// anchors with weights `(d_{k+1} - d_j) / (k d_{k+1} - sum_{h<=k} d_h)` on
/// squared Euclidean distances. Ties are broken by anchor index.
pub fn build_bipartite(
    view: &DMatrix<f64>,
    anchors: &DMatrix<f64>,
    k: usize,
) -> Result<BipartiteGraph> {
    let m = anchors.nrows();
    if k == 0 || k >= m {
        return Err(Error::InvalidConfig(format!(
            "neighbor count must satisfy 1 <= k < m, got k={k}, m={m}"
        )));
    }
    if view.ncols() != anchors.ncols() {
        return Err(Error::InvalidConfig(format!(
            "view has {} features but anchors have {}",
            view.ncols(),
            anchors.ncols()
        )));
    }
    let n = view.nrows();
    let row_weights = |i: usize| -> (Vec<(usize, f64)>, bool) {
        let mut dist: Vec<(usize, f64)> =
            (0..m).map(|j| (j, sq_dist_rows(view, i, anchors, j))).collect();
        dist.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let far = dist[k].1;
        let head: f64 = dist[..k].iter().map(|(_, d)| d).sum();
        let denom = k as f64 * far - head;
        if denom < DEGENERATE_DENOM {
            let w = 1.0 / k as f64;
            (dist[..k].iter().map(|(j, _)| (*j, w)).collect(), true)
        } else {
            (
                dist[..k].iter().map(|(j, d)| (*j, (far - d) / denom)).collect(),
                false,
            )
        }
    };

    #[cfg(feature = "parallel")]
    let rows: Vec<(Vec<(usize, f64)>, bool)> = {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(row_weights).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<(Vec<(usize, f64)>, bool)> = (0..n).map(row_weights).collect();

    let mut weights = DMatrix::zeros(n, m);
    for (i, (entries, degenerate)) in rows.into_iter().enumerate() {
        if degenerate {
            warn!("sample {i} is equidistant to its {} nearest anchors, using uniform weights", k + 1);
        }
        for (j, w) in entries {
            weights[(i, j)] = w;
        }
    }
    Ok(BipartiteGraph::new_unchecked(weights))
}

/// One bipartite graph per view, each against that view's block of anchor columns.
pub fn build_all_views(
    data: &ViewDataset,
    anchors: &AnchorSet,
    k: usize,
) -> Result<Vec<BipartiteGraph>> {
    (0..data.n_views())
        .map(|v| build_bipartite(data.view(v), &anchors.view_centers(v), k))
        .collect()
}
