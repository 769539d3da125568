//! Bipartite-graph spectral utilities: the ξ-weighted fused graph, its
//! connected components (the final clusters), and the normalized-Laplacian
//! zero-eigenvalue count that the component count must agree with.
//!
//! Node numbering for the `(n + m)`-node bipartite graph: samples are `0..n`,
//! anchor `j` is node `n + j`.

use nalgebra::DMatrix;

use crate::anchor::BipartiteGraph;
use crate::error::{Error, Result};
use crate::linalg::psd_eigen;

pub const DEFAULT_EDGE_THRESHOLD: f64 = 1e-6;
/// Largest `n + m` accepted by the dense eigen-decomposition.
pub const DENSE_EIGEN_CAP: usize = 2000;
pub const ZERO_EIG_TOL: f64 = 1e-8;
const DEGREE_FLOOR: f64 = 1e-10;

/// `(sum_v C_v / xi_v) / (sum_v 1 / xi_v)` plus the edge threshold used for
/// component extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedGraph {
    pub weights: DMatrix<f64>,
    pub threshold: f64,
}

impl FusedGraph {
    pub fn new(weights: DMatrix<f64>, threshold: f64) -> Self {
        Self { weights, threshold }
    }

    #[inline]
    fn survives(&self, w: f64) -> bool {
        w > 0.0 && w >= self.threshold
    }

    /// Surviving edges as `(sample, anchor, weight)`, row-major order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let (n, m) = self.weights.shape();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..m {
                let w = self.weights[(i, j)];
                if self.survives(w) {
                    out.push((i, j, w));
                }
            }
        }
        out
    }
}

/// Component labels for samples and anchors.
///
/// Components that contain at least one sample are numbered first, in order of
/// their smallest sample index; anchor-only components follow in anchor order.
/// Sample labels therefore lie in `0..sample_components`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabeling {
    pub sample_labels: Vec<usize>,
    pub anchor_labels: Vec<usize>,
    /// All components, including anchors with no surviving edge.
    pub z: usize,
    pub sample_components: usize,
    /// Edges removed or merges performed by [`force_k_components`].
    pub forced_edits: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    pub(crate) fn new(len: usize) -> Self {
        Self {
            parent: (0..len).collect(),
            size: vec![1; len],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

fn labeling_from(dsu: &mut DisjointSet, n: usize, m: usize) -> ComponentLabeling {
    let mut label_of_root = vec![usize::MAX; n + m];
    let mut next = 0;
    let mut sample_labels = Vec::with_capacity(n);
    for i in 0..n {
        let r = dsu.find(i);
        if label_of_root[r] == usize::MAX {
            label_of_root[r] = next;
            next += 1;
        }
        sample_labels.push(label_of_root[r]);
    }
    let sample_components = next;
    let mut anchor_labels = Vec::with_capacity(m);
    for j in 0..m {
        let r = dsu.find(n + j);
        if label_of_root[r] == usize::MAX {
            label_of_root[r] = next;
            next += 1;
        }
        anchor_labels.push(label_of_root[r]);
    }
    ComponentLabeling {
        sample_labels,
        anchor_labels,
        z: next,
        sample_components,
        forced_edits: 0,
    }
}

/// Weighted average of the per-view graphs with weights `1 / xi_v`.
pub fn fuse(graphs: &[BipartiteGraph], xi: &[f64]) -> Result<FusedGraph> {
    fuse_matrices(
        &graphs.iter().map(|g| g.weights()).collect::<Vec<_>>(),
        xi,
        DEFAULT_EDGE_THRESHOLD,
    )
}

pub fn fuse_matrices(
    mats: &[&DMatrix<f64>],
    xi: &[f64],
    threshold: f64,
) -> Result<FusedGraph> {
    if mats.is_empty() || mats.len() != xi.len() {
        return Err(Error::InvalidConfig(format!(
            "{} graphs but {} view weights",
            mats.len(),
            xi.len()
        )));
    }
    if xi.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::InvalidConfig("view weights must be positive".into()));
    }
    let shape = mats[0].shape();
    if mats.iter().any(|c| c.shape() != shape) {
        return Err(Error::InvalidConfig("graphs differ in shape".into()));
    }
    let norm: f64 = xi.iter().map(|x| 1.0 / x).sum();
    let mut weights = DMatrix::zeros(shape.0, shape.1);
    for (c, x) in mats.iter().zip(xi) {
        weights += *c * (1.0 / (x * norm));
    }
    Ok(FusedGraph { weights, threshold })
}

/// Connected components of the thresholded bipartite graph (union-find).
pub fn components(g: &FusedGraph) -> ComponentLabeling {
    let (n, m) = g.weights.shape();
    let mut dsu = DisjointSet::new(n + m);
    for i in 0..n {
        for j in 0..m {
            if g.survives(g.weights[(i, j)]) {
                dsu.union(i, n + j);
            }
        }
    }
    labeling_from(&mut dsu, n, m)
}

/// `I - D^{-1/2} F D^{-1/2}` for `F = [[0, C], [C^T, 0]]`, degrees floored at `1e-10`.
pub fn normalized_laplacian(c: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, m) = c.shape();
    let size = n + m;
    let mut inv_sqrt = vec![0.0; size];
    for i in 0..n {
        inv_sqrt[i] = c.row(i).sum().max(DEGREE_FLOOR).powf(-0.5);
    }
    for j in 0..m {
        inv_sqrt[n + j] = c.column(j).sum().max(DEGREE_FLOOR).powf(-0.5);
    }
    let mut lap = DMatrix::identity(size, size);
    for i in 0..n {
        for j in 0..m {
            let w = c[(i, j)];
            if w != 0.0 {
                let v = w * inv_sqrt[i] * inv_sqrt[n + j];
                lap[(i, n + j)] -= v;
                lap[(n + j, i)] -= v;
            }
        }
    }
    lap
}

/// Number of zero eigenvalues (below `1e-8`) of the normalized bipartite
/// Laplacian. Nodes with no edges count as one component each.
pub fn zero_eig_multiplicity(c: &DMatrix<f64>) -> Result<usize> {
    zero_eig_multiplicity_with_cap(c, DENSE_EIGEN_CAP)
}

pub fn zero_eig_multiplicity_with_cap(c: &DMatrix<f64>, cap: usize) -> Result<usize> {
    let (n, m) = c.shape();
    if n + m > cap {
        return Err(Error::SizeLimit { size: n + m, cap });
    }
    if c.iter().any(|w| *w < 0.0 || !w.is_finite()) {
        return Err(Error::InvalidConfig("graph weights must be nonnegative".into()));
    }
    let isolated = (0..n).filter(|&i| c.row(i).iter().all(|w| *w == 0.0)).count()
        + (0..m).filter(|&j| c.column(j).iter().all(|w| *w == 0.0)).count();
    // isolated nodes contribute eigenvalue 1 under the degree floor
    let (values, _) = psd_eigen(&normalized_laplacian(c));
    let zeros = values.iter().filter(|l| l.abs() < ZERO_EIG_TOL).count();
    Ok(zeros + isolated)
}

/// Returns exactly `k` sample components when possible.
///
/// Too few components: the globally weakest surviving edges are removed until
/// the count reaches `k`. Too many: components are merged along the strongest
/// pruned edge that joins two of them; if no such edge exists, the smallest
/// component is merged into the largest. Ties break on `(row, column)`.
pub fn force_k_components(g: &FusedGraph, k: usize) -> ComponentLabeling {
    let k = k.max(1);
    let base = components(g);
    let (n, m) = g.weights.shape();
    if base.sample_components == k {
        return base;
    }
    if base.sample_components < k {
        let mut edges = g.edges();
        edges.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
        let with_removed = |r: usize| {
            let mut dsu = DisjointSet::new(n + m);
            for &(i, j, _) in &edges[r..] {
                dsu.union(i, n + j);
            }
            labeling_from(&mut dsu, n, m)
        };
        // sample-component count is nondecreasing in the number removed and
        // grows by at most one per removal
        let (mut lo, mut hi) = (0, edges.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if with_removed(mid).sample_components >= k {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let mut out = with_removed(lo);
        out.forced_edits = lo;
        return out;
    }

    let mut dsu = DisjointSet::new(n + m);
    for (i, j, _) in g.edges() {
        dsu.union(i, n + j);
    }
    let mut has_sample = vec![false; n + m];
    for i in 0..n {
        let r = dsu.find(i);
        has_sample[r] = true;
    }
    let mut count = base.sample_components;
    let mut edits = 0;
    let mut pruned: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..n {
        for j in 0..m {
            let w = g.weights[(i, j)];
            if w > 0.0 && !g.survives(w) {
                pruned.push((i, j, w));
            }
        }
    }
    pruned.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    for (i, j, _) in pruned {
        if count == k {
            break;
        }
        let (ra, rb) = (dsu.find(i), dsu.find(n + j));
        if ra != rb && has_sample[ra] && has_sample[rb] {
            dsu.union(ra, rb);
            let r = dsu.find(ra);
            has_sample[r] = true;
            count -= 1;
            edits += 1;
        }
    }
    while count > k {
        let mut sizes: Vec<(usize, usize)> = Vec::new();
        let mut seen = vec![usize::MAX; n + m];
        for i in 0..n {
            let r = dsu.find(i);
            if seen[r] == usize::MAX {
                seen[r] = sizes.len();
                sizes.push((i, 0));
            }
            sizes[seen[r]].1 += 1;
        }
        let smallest = sizes
            .iter()
            .min_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|s| s.0)
            .expect("at least one component");
        let largest = sizes
            .iter()
            .filter(|s| s.0 != smallest)
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|s| s.0)
            .expect("at least two components");
        dsu.union(smallest, largest);
        count -= 1;
        edits += 1;
    }
    let mut out = labeling_from(&mut dsu, n, m);
    out.forced_edits = edits;
    out
}
