//! Independent reference implementations used by the integration tests. None
//! of these call into the library's numerical kernels.

#![allow(dead_code)]

use std::collections::HashMap;
use std::f64::consts::PI;

use anchor_mvc::Tensor3;
use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type C64 = Complex<f64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_tensor(rng: &mut ChaCha8Rng, dims: (usize, usize, usize), scale: f64) -> Tensor3 {
    let len = dims.0 * dims.1 * dims.2;
    let values = (0..len).map(|_| scale * (rng.random::<f64>() * 2.0 - 1.0)).collect();
    Tensor3::new(dims, values).unwrap()
}

/// Frontal slices of the O(n3^2) mode-3 DFT.
pub fn naive_dft_slices(t: &Tensor3) -> Vec<DMatrix<C64>> {
    let (n1, n2, n3) = t.dims();
    (0..n3)
        .map(|k| {
            DMatrix::from_fn(n1, n2, |i, j| {
                (0..n3).fold(C64::new(0.0, 0.0), |acc, l| {
                    let angle = -2.0 * PI * (k * l) as f64 / n3 as f64;
                    acc + C64::from_polar(1.0, angle) * t.get(i, j, l)
                })
            })
        })
        .collect()
}

/// Inverse of [`naive_dft_slices`]; returns the real part.
pub fn naive_idft(slices: &[DMatrix<C64>]) -> Tensor3 {
    let n3 = slices.len();
    let (n1, n2) = slices[0].shape();
    let mut out = Tensor3::zeros((n1, n2, n3));
    for l in 0..n3 {
        for i in 0..n1 {
            for j in 0..n2 {
                let v = (0..n3).fold(C64::new(0.0, 0.0), |acc, k| {
                    let angle = 2.0 * PI * (k * l) as f64 / n3 as f64;
                    acc + C64::from_polar(1.0, angle) * slices[k][(i, j)]
                });
                out.set(i, j, l, v.re / n3 as f64);
            }
        }
    }
    out
}

pub fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// `sum_k sum_i sigma_i(fft(T)_k)^p`.
pub fn schatten_pp(t: &Tensor3, p: f64) -> f64 {
    naive_dft_slices(t)
        .iter()
        .flat_map(|s| singular_values(s))
        .map(|s| if s > 0.0 { s.powf(p) } else { 0.0 })
        .sum()
}

/// `0.5 ||X - Y||_F^2 + tau ||X||_Sp^p`.
pub fn prox_objective(x: &Tensor3, y: &Tensor3, tau: f64, p: f64) -> f64 {
    let fit: f64 = x
        .values()
        .iter()
        .zip(y.values())
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    0.5 * fit + tau * schatten_pp(x, p)
}

/// Tensor singular value thresholding: soft-threshold every Fourier slice's
/// singular values at `tau * n3`.
pub fn naive_tsvt(y: &Tensor3, tau: f64) -> Tensor3 {
    let n3 = y.dims().2;
    let slices: Vec<DMatrix<C64>> = naive_dft_slices(y)
        .into_iter()
        .map(|s| {
            let svd = s.svd(true, true);
            let u = svd.u.unwrap();
            let v_t = svd.v_t.unwrap();
            let shrunk: Vec<C64> = svd
                .singular_values
                .iter()
                .map(|x| C64::new((x - tau * n3 as f64).max(0.0), 0.0))
                .collect();
            let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(shrunk));
            u * d * v_t
        })
        .collect();
    naive_idft(&slices)
}

/// `0.5 (d - s)^2 + tau d^p`, with `0^p = 0`.
pub fn gst_objective(d: f64, s: f64, tau: f64, p: f64) -> f64 {
    let pen = if d > 0.0 { d.powf(p) } else { 0.0 };
    0.5 * (d - s).powi(2) + tau * pen
}

/// Minimizer of [`gst_objective`] over `[0, s]` on a grid of step `step`,
/// searched coarse (1e-3) first and then refined at `step` around the best
/// coarse point and around 0.
pub fn gst_grid(s: f64, tau: f64, p: f64, step: f64) -> f64 {
    let coarse = 1e-3;
    let scan = |lo: f64, hi: f64, h: f64| -> (f64, f64) {
        let n = ((hi - lo) / h).ceil() as usize;
        (0..=n)
            .map(|i| (lo + i as f64 * h).min(hi))
            .map(|d| (d, gst_objective(d, s, tau, p)))
            .fold((0.0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
    };
    let (c, _) = scan(0.0, s, coarse);
    let around_best = scan((c - 2.0 * coarse).max(0.0), (c + 2.0 * coarse).min(s), step);
    let around_zero = scan(0.0, (2.0 * coarse).min(s), step);
    if around_zero.1 < around_best.1 {
        around_zero.0
    } else {
        around_best.0
    }
}

/// Euclidean projection onto the simplex by enumerating every support set and
/// solving the equality-constrained problem on it.
pub fn simplex_by_supports(y: &[f64]) -> Vec<f64> {
    let d = y.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << d) {
        let support: Vec<usize> = (0..d).filter(|i| mask & (1 << i) != 0).collect();
        let shift = (support.iter().map(|&i| y[i]).sum::<f64>() - 1.0) / support.len() as f64;
        let mut x = vec![0.0; d];
        let mut feasible = true;
        for &i in &support {
            x[i] = y[i] - shift;
            if x[i] < -1e-15 {
                feasible = false;
            }
        }
        if !feasible {
            continue;
        }
        x.iter_mut().for_each(|v| *v = v.max(0.0));
        let dist: f64 = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum();
        if best.as_ref().is_none_or(|(bd, _)| dist < *bd) {
            best = Some((dist, x));
        }
    }
    best.unwrap().1
}

/// `I - D^{-1/2} F D^{-1/2}` for `F = [[0, C], [C^T, 0]]`, degrees floored at 1e-10.
pub fn dense_normalized_laplacian(c: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, m) = c.shape();
    let mut f = DMatrix::zeros(n + m, n + m);
    for i in 0..n {
        for j in 0..m {
            f[(i, n + j)] = c[(i, j)];
            f[(n + j, i)] = c[(i, j)];
        }
    }
    let d: Vec<f64> = (0..n + m).map(|r| f.row(r).sum().max(1e-10)).collect();
    DMatrix::from_fn(n + m, n + m, |a, b| {
        let id = if a == b { 1.0 } else { 0.0 };
        id - f[(a, b)] / (d[a] * d[b]).sqrt()
    })
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn sorted_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = a.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    assert!(e.iter().all(|x| x.is_finite()), "eigen oracle diverged");
    e.sort_by(f64::total_cmp);
    e
}

/// Random row-stochastic `n x m` matrix with roughly `density` nonzeros per row.
pub fn random_row_stochastic(rng: &mut ChaCha8Rng, n: usize, m: usize, density: f64) -> DMatrix<f64> {
    let mut c = DMatrix::zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            if rng.random::<f64>() < density {
                c[(i, j)] = rng.random::<f64>() + 0.01;
            }
        }
        if c.row(i).sum() == 0.0 {
            c[(i, rng.random_range(0..m))] = 1.0;
        }
        let s = c.row(i).sum();
        c.row_mut(i).unscale_mut(s);
    }
    c
}

/// Random matrix with orthonormal columns (Gram-Schmidt on Gaussian-ish noise).
pub fn random_orthonormal(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(rows, cols, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    a.qr().q().columns(0, cols).into_owned()
}

fn all_permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in all_permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

fn relabel(v: &[usize]) -> (Vec<usize>, usize) {
    let mut map = HashMap::new();
    let out = v
        .iter()
        .map(|x| {
            let next = map.len();
            *map.entry(*x).or_insert(next)
        })
        .collect();
    (out, map.len())
}

/// Accuracy by trying every relabeling of the predicted clusters.
pub fn acc_by_permutations(truth: &[usize], pred: &[usize]) -> f64 {
    let (t, kt) = relabel(truth);
    let (p, kp) = relabel(pred);
    let k = kt.max(kp);
    all_permutations(k)
        .iter()
        .map(|perm| t.iter().zip(&p).filter(|(a, b)| perm[**b] == **a).count())
        .max()
        .unwrap() as f64
        / truth.len() as f64
}

/// `(nmi_geometric, purity)` straight from the definitions.
pub fn nmi_and_purity(truth: &[usize], pred: &[usize]) -> (f64, f64) {
    let n = truth.len() as f64;
    let mut joint: HashMap<(usize, usize), f64> = HashMap::new();
    let mut pt: HashMap<usize, f64> = HashMap::new();
    let mut pp: HashMap<usize, f64> = HashMap::new();
    for (a, b) in truth.iter().zip(pred) {
        *joint.entry((*a, *b)).or_default() += 1.0;
        *pt.entry(*a).or_default() += 1.0;
        *pp.entry(*b).or_default() += 1.0;
    }
    let h = |m: &HashMap<usize, f64>| -> f64 { m.values().map(|c| -(c / n) * (c / n).ln()).sum() };
    let mi: f64 = joint
        .iter()
        .map(|((a, b), c)| (c / n) * ((c / n) / ((pt[a] / n) * (pp[b] / n))).ln())
        .sum();
    let (ht, hp) = (h(&pt), h(&pp));
    let nmi = if ht * hp > 0.0 { mi / (ht * hp).sqrt() } else { 0.0 };
    let mut best: HashMap<usize, f64> = HashMap::new();
    for ((_, b), c) in &joint {
        let e = best.entry(*b).or_default();
        *e = e.max(*c);
    }
    (nmi, best.values().sum::<f64>() / n)
}

/// `(precision, recall, fscore, ari)` by enumerating all sample pairs.
pub fn pair_metrics(truth: &[usize], pred: &[usize]) -> (f64, f64, f64, f64) {
    let n = truth.len();
    let (mut ss, mut sd, mut ds, mut dd) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            match (truth[i] == truth[j], pred[i] == pred[j]) {
                (true, true) => ss += 1.0,
                (true, false) => sd += 1.0,
                (false, true) => ds += 1.0,
                (false, false) => dd += 1.0,
            }
        }
    }
    let precision = if ss + ds > 0.0 { ss / (ss + ds) } else if ss + sd > 0.0 { 0.0 } else { 1.0 };
    let recall = if ss + sd > 0.0 { ss / (ss + sd) } else if ss + ds > 0.0 { 0.0 } else { 1.0 };
    let f = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    let denom = (ss + sd) * (sd + dd) + (ss + ds) * (ds + dd);
    let ari = if denom == 0.0 { 1.0 } else { 2.0 * (ss * dd - sd * ds) / denom };
    (precision, recall, f, ari)
}

pub fn random_labels(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..k)).collect()
}

/// Bipartite graph with `z` planted blocks, each internally connected.
pub fn planted_blocks(rng: &mut ChaCha8Rng, z: usize, max_nodes: usize) -> (DMatrix<f64>, Vec<usize>) {
    let per_block = (max_nodes / z).max(2);
    let sizes: Vec<(usize, usize)> = (0..z)
        .map(|_| {
            let total = rng.random_range(2..=per_block);
            let ns = rng.random_range(1..total);
            (ns, total - ns)
        })
        .collect();
    let n: usize = sizes.iter().map(|s| s.0).sum();
    let m: usize = sizes.iter().map(|s| s.1).sum();
    let mut c = DMatrix::zeros(n, m);
    let mut truth = Vec::with_capacity(n);
    let (mut r0, mut c0) = (0, 0);
    for (b, &(ns, na)) in sizes.iter().enumerate() {
        for a in 0..na {
            c[(r0, c0 + a)] = rng.random::<f64>() + 0.1;
        }
        for s in 0..ns {
            let anchor = rng.random_range(0..na);
            c[(r0 + s, c0 + anchor)] = rng.random::<f64>() + 0.1;
            for a in 0..na {
                if rng.random::<f64>() < 0.3 {
                    c[(r0 + s, c0 + a)] = rng.random::<f64>() + 0.1;
                }
            }
            truth.push(b);
        }
        r0 += ns;
        c0 += na;
    }
    for i in 0..n {
        let s = c.row(i).sum();
        c.row_mut(i).unscale_mut(s);
    }
    (c, truth)
}
