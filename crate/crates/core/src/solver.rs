//! Augmented-Lagrangian solver for the anchor-graph model
//!
//! ```text
//! min ||C||_Sp^p + alpha * sum_v ||E_v||_1 + beta * tr(P^T L P)
//! s.t. B_v = C_v + E_v,  C_v 1 = 1,  C_v >= 0,  P^T P = I,  xi on the simplex
//! ```
//!
//! where `C` stacks the learned graphs as lateral slices of an `n x V x m`
//! tensor and `L = sum_v L_v / xi_v` is the view-weighted normalized bipartite
//! Laplacian. Each sweep updates `P`, every `C_v`, every `E_v`, the auxiliary
//! tensor `J`, the view weights `xi`, and finally the multipliers and penalties.

use log::{debug, warn};
use nalgebra::DMatrix;

use crate::anchor::BipartiteGraph;
use crate::error::{Error, Result};
use crate::linalg::psd_eigen;
use crate::simplex;
use crate::spectral::{self, DEFAULT_EDGE_THRESHOLD};
use crate::tensor::{prox_schatten_p_with_penalty, ProxOutput, Tensor3};

const DEGREE_FLOOR: f64 = 1e-10;
const PENALTY_CAP: f64 = 1e10;
const XI_ZERO: f64 = 1e-12;
const XI_FLOOR: f64 = 1e-6;
const BETA_MIN: f64 = 1e-12;
const BETA_MAX: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Weight of the sparse error term.
    pub alpha: f64,
    /// Weight of the spectral term; the starting value when `beta_adaptive`.
    pub beta: f64,
    pub p: f64,
    /// Number of clusters `K`.
    pub clusters: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub eta: f64,
    pub mu0: f64,
    pub rho0: f64,
    /// Double beta while the fused graph has fewer than `K` components, halve it
    /// while it has more.
    pub beta_adaptive: bool,
    /// Edge threshold used when counting fused-graph components.
    pub edge_threshold: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            beta: 1.0,
            p: 0.9,
            clusters: 2,
            max_iters: 300,
            tol: 1e-6,
            eta: 1.1,
            mu0: 1e-5,
            rho0: 1e-5,
            beta_adaptive: true,
            edge_threshold: DEFAULT_EDGE_THRESHOLD,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::InvalidP(self.p));
        }
        if self.clusters < 2 {
            return bad(format!("need at least 2 clusters, got {}", self.clusters));
        }
        if !(self.eta > 1.0) {
            return bad(format!("eta must exceed 1, got {}", self.eta));
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("mu0", self.mu0),
            ("rho0", self.rho0),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(self.edge_threshold >= 0.0) {
            return bad(format!("edge threshold must be >= 0, got {}", self.edge_threshold));
        }
        Ok(())
    }
}

/// Every variable of the augmented Lagrangian.
#[derive(Debug, Clone)]
pub struct SolverState {
    /// Learned graphs `C_v`, `n x m`, row-stochastic.
    pub c: Vec<DMatrix<f64>>,
    /// Sparse errors `E_v`.
    pub e: Vec<DMatrix<f64>>,
    /// Auxiliary copy of the graph tensor, `n x V x m`.
    pub j: Tensor3,
    pub y1: Vec<DMatrix<f64>>,
    pub y2: Tensor3,
    /// Sample block of the spectral embedding, `n x K`.
    pub p_u: DMatrix<f64>,
    /// Anchor block of the spectral embedding, `m x K`.
    pub p_m: DMatrix<f64>,
    pub xi: Vec<f64>,
    pub mu: f64,
    pub rho: f64,
    pub beta: f64,
    pub iter: usize,
}

impl SolverState {
    /// `C = B`, everything else zero, uniform `xi`.
    pub fn initial(b: &[DMatrix<f64>], config: &SolverConfig) -> Self {
        let (n, m) = b[0].shape();
        let v = b.len();
        let k = config.clusters;
        Self {
            c: b.to_vec(),
            e: vec![DMatrix::zeros(n, m); v],
            j: Tensor3::zeros((n, v, m)),
            y1: vec![DMatrix::zeros(n, m); v],
            y2: Tensor3::zeros((n, v, m)),
            p_u: DMatrix::zeros(n, k),
            p_m: DMatrix::zeros(m, k),
            xi: vec![1.0 / v as f64; v],
            mu: config.mu0,
            rho: config.rho0,
            beta: config.beta,
            iter: 0,
        }
    }

    pub fn graph_tensor(&self) -> Tensor3 {
        Tensor3::from_lateral_slices(&self.c).expect("graphs share one shape")
    }

    pub fn graphs(&self) -> Vec<BipartiteGraph> {
        self.c
            .iter()
            .map(|c| BipartiteGraph::new_unchecked(c.clone()))
            .collect()
    }
}

/// Column sums of `C`, floored at `1e-10`.
pub fn column_degrees(c: &DMatrix<f64>) -> Vec<f64> {
    c.column_iter()
        .map(|col| col.sum().max(DEGREE_FLOOR))
        .collect()
}

fn scale_columns(c: &DMatrix<f64>, factors: &[f64]) -> DMatrix<f64> {
    let mut out = c.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col.scale_mut(factors[j]);
    }
    out
}

fn inv_sqrt(deg: &[f64]) -> Vec<f64> {
    deg.iter().map(|d| d.powf(-0.5)).collect()
}

/// `W = sum_v C_v D_v^{-1/2} / xi_v`.
pub fn weighted_graph(c: &[DMatrix<f64>], xi: &[f64]) -> DMatrix<f64> {
    let (n, m) = c[0].shape();
    let mut w = DMatrix::zeros(n, m);
    for (cv, x) in c.iter().zip(xi) {
        let factors: Vec<f64> = inv_sqrt(&column_degrees(cv))
            .into_iter()
            .map(|f| f / x)
            .collect();
        w += scale_columns(cv, &factors);
    }
    w
}

/// Spectral embedding `P = [P_U; P_M]` with the top singular values of `W`.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub p_u: DMatrix<f64>,
    pub p_m: DMatrix<f64>,
    /// Leading `K` singular values of `W`, descending.
    pub singular_values: Vec<f64>,
    pub rank_deficient: bool,
}

/// Orthonormalizes the columns of `a` in place (two passes of modified
/// Gram-Schmidt). Columns flagged in `replace`, or that collapse, are swapped
/// for standard basis vectors orthogonal to the rest.
fn orthonormalize_columns(a: &mut DMatrix<f64>, replace: &[bool]) {
    let (rows, cols) = a.shape();
    let mut next_basis = 0;
    for c in 0..cols {
        let mut filled = false;
        if !replace[c] {
            filled = orthogonalize_against(a, c);
        }
        while !filled {
            assert!(next_basis < rows, "cannot complete an orthonormal basis");
            a.column_mut(c).fill(0.0);
            a[(next_basis, c)] = 1.0;
            next_basis += 1;
            filled = orthogonalize_against(a, c);
        }
    }
}

/// Projects column `c` off columns `0..c` twice and normalizes it; false if
/// nothing substantial is left.
fn orthogonalize_against(a: &mut DMatrix<f64>, c: usize) -> bool {
    let original = a.column(c).norm();
    if original == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for prev in 0..c {
            let dot = a.column(prev).dot(&a.column(c));
            let q = a.column(prev).clone_owned();
            a.column_mut(c).axpy(-dot, &q, 1.0);
        }
    }
    let norm = a.column(c).norm();
    if norm <= 1e-8 * original {
        return false;
    }
    a.column_mut(c).unscale_mut(norm);
    true
}

/// Top-`k` singular triplets of `w` through the `m x m` Gram matrix, which keeps
/// the cost at `O(n m^2)`.
pub fn top_singular(w: &DMatrix<f64>, k: usize) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>, bool) {
    let (n, m) = w.shape();
    assert!(k <= n.min(m), "k exceeds min(n, m)");
    let gram = w.tr_mul(w);
    let (values, vectors) = psd_eigen(&gram);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut v1 = DMatrix::zeros(m, k);
    let mut sigma = Vec::with_capacity(k);
    for (col, &idx) in order.iter().take(k).enumerate() {
        v1.column_mut(col).copy_from(&vectors.column(idx));
        sigma.push(values[idx].max(0.0).sqrt());
    }
    let cutoff = 1e-10 * sigma.first().copied().unwrap_or(0.0).max(1e-300);
    let mut u1 = w * &v1;
    let mut replace = vec![false; k];
    for col in 0..k {
        if sigma[col] > cutoff {
            u1.column_mut(col).unscale_mut(sigma[col]);
        } else {
            replace[col] = true;
        }
    }
    let deficient = replace.iter().any(|r| *r);
    orthonormalize_columns(&mut u1, &replace);
    orthonormalize_columns(&mut v1, &vec![false; k]);
    (u1, sigma, v1, deficient)
}

/// P-step: `P_U = U_1 / sqrt(2)`, `P_M = V_1 / sqrt(2)` from the leading `K`
/// singular vectors of `W`.
pub fn update_p(c: &[DMatrix<f64>], xi: &[f64], k: usize) -> Embedding {
    let w = weighted_graph(c, xi);
    let (u1, sigma, v1, deficient) = top_singular(&w, k);
    if deficient {
        warn!("W has fewer than {k} nonzero singular values; completing the basis");
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Embedding {
        p_u: u1 * s,
        p_m: v1 * s,
        singular_values: sigma,
        rank_deficient: deficient,
    }
}

/// `tr(P_U^T C D^{-1/2} P_M)` for one view.
fn coupling_trace(c: &DMatrix<f64>, p_u: &DMatrix<f64>, p_m: &DMatrix<f64>) -> f64 {
    let scaled_pm = {
        let f = inv_sqrt(&column_degrees(c));
        let mut pm = p_m.clone();
        for (j, mut row) in pm.row_iter_mut().enumerate() {
            row *= f[j];
        }
        pm
    };
    (c * scaled_pm).component_mul(p_u).sum()
}

/// `tr(P^T L_v P) = tr(P^T P) - 2 tr(P_U^T C_v D_v^{-1/2} P_M)`; uses `D_U = I`
/// because the rows of `C_v` sum to one.
pub fn view_laplacian_trace(c: &DMatrix<f64>, p_u: &DMatrix<f64>, p_m: &DMatrix<f64>) -> f64 {
    let k_eff = p_u.norm_squared() + p_m.norm_squared();
    k_eff - 2.0 * coupling_trace(c, p_u, p_m)
}

/// C-step for view `v`: row-wise simplex projection of `Lambda / (rho + mu)`
/// with `Lambda = rho G + mu Q + 2 beta H^T`.
pub fn update_c(state: &SolverState, b: &DMatrix<f64>, v: usize) -> DMatrix<f64> {
    let (rho, mu, beta) = (state.rho, state.mu, state.beta);
    let j_v = state.j.lateral_slice(v);
    let y2_v = state.y2.lateral_slice(v);
    // rho G = rho J - Y2,  mu Q = mu (B - E) + Y1
    let mut lambda = j_v * rho - y2_v;
    lambda += (b - &state.e[v]) * mu + &state.y1[v];
    // H^T (n x m) = P_U P_M^T D^{-1/2} / xi_v
    let f: Vec<f64> = inv_sqrt(&column_degrees(&state.c[v]))
        .into_iter()
        .map(|x| x / state.xi[v])
        .collect();
    let mut pm_scaled = state.p_m.clone();
    for (j, mut row) in pm_scaled.row_iter_mut().enumerate() {
        row *= f[j];
    }
    lambda.gemm(2.0 * beta, &state.p_u, &pm_scaled.transpose(), 1.0);
    lambda.unscale_mut(rho + mu);
    simplex::project_rows(&lambda)
}

/// Elementwise soft thresholding `sign(x) max(|x| - t, 0)`.
pub fn soft_threshold(x: f64, t: f64) -> f64 {
    x.signum() * (x.abs() - t).max(0.0)
}

/// E-step: soft-threshold `B - C + Y1 / mu` at `alpha / mu`.
pub fn update_e(
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    y1: &DMatrix<f64>,
    alpha: f64,
    mu: f64,
) -> DMatrix<f64> {
    let t = alpha / mu;
    let mut theta = b - c + y1 / mu;
    theta.apply(|x| *x = soft_threshold(*x, t));
    theta
}

/// J-step: Schatten-p proximal operator of `C + Y2 / rho` with weight `1 / rho`.
pub fn update_j(c: &Tensor3, y2: &Tensor3, rho: f64, p: f64) -> Result<ProxOutput> {
    prox_schatten_p_with_penalty(&c.add_scaled(y2, 1.0 / rho), 1.0 / rho, p)
}

/// Closed-form view weights `xi_v = h_v / sum h` from per-view costs `h_v`.
/// All-zero costs give uniform weights; isolated zeros are floored at `1e-6`.
pub fn xi_from_costs(h: &[f64]) -> Vec<f64> {
    let v = h.len();
    let total: f64 = h.iter().sum();
    if h.iter().all(|x| *x < XI_ZERO) {
        return vec![1.0 / v as f64; v];
    }
    let mut xi: Vec<f64> = h.iter().map(|x| x / total).collect();
    if h.iter().any(|x| *x < XI_ZERO) {
        for (x, hv) in xi.iter_mut().zip(h) {
            if *hv < XI_ZERO {
                *x = XI_FLOOR;
            }
        }
        let s: f64 = xi.iter().sum();
        xi.iter_mut().for_each(|x| *x /= s);
    }
    xi
}

/// xi-step. Returns `(xi, h)` with `h_v = sqrt(max(tr(P^T L_v P), 0))`.
pub fn update_xi(
    c: &[DMatrix<f64>],
    p_u: &DMatrix<f64>,
    p_m: &DMatrix<f64>,
) -> (Vec<f64>, Vec<f64>) {
    let h: Vec<f64> = c
        .iter()
        .map(|cv| view_laplacian_trace(cv, p_u, p_m).max(0.0).sqrt())
        .collect();
    (xi_from_costs(&h), h)
}

/// Dual ascent on both multipliers, then geometric penalty growth capped at 1e10.
pub fn update_multipliers(state: &mut SolverState, b: &[DMatrix<f64>], eta: f64) {
    let mu = state.mu;
    for v in 0..b.len() {
        let gap = &b[v] - &state.c[v] - &state.e[v];
        state.y1[v] += gap * mu;
    }
    let c = state.graph_tensor();
    let diff = c.add_scaled(&state.j, -1.0);
    state.y2 = state.y2.add_scaled(&diff, state.rho);
    state.mu = (state.mu * eta).min(PENALTY_CAP);
    state.rho = (state.rho * eta).min(PENALTY_CAP);
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// `(max_v ||B_v - C_v - E_v||_inf, ||C - J||_inf)`; NaN if any entry is NaN.
pub fn residuals(state: &SolverState, b: &[DMatrix<f64>]) -> (f64, f64) {
    let r1 = b
        .iter()
        .zip(&state.c)
        .zip(&state.e)
        .map(|((bv, cv), ev)| (bv - cv - ev).amax())
        .fold(0.0, nan_max);
    let r2 = state.graph_tensor().max_abs_diff(&state.j);
    (r1, r2)
}

/// One row of the iteration trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub r1: f64,
    pub r2: f64,
    /// Beta used during this sweep.
    pub beta: f64,
    pub xi: Vec<f64>,
    /// Per-view costs `h_v` behind the xi update.
    pub view_costs: Vec<f64>,
    /// `||J||_Sp^p + alpha sum ||E_v||_1 + beta sum_v h_v^2 / xi_v`.
    pub objective: f64,
    /// Sample components of the fused graph after the sweep.
    pub components: usize,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub state: SolverState,
    pub trace: Vec<TraceRow>,
    pub converged: bool,
}

/// One full sweep of the alternating updates.
pub fn iterate(state: &mut SolverState, b: &[DMatrix<f64>], config: &SolverConfig) -> Result<TraceRow> {
    let k = config.clusters;
    let emb = update_p(&state.c, &state.xi, k);
    state.p_u = emb.p_u;
    state.p_m = emb.p_m;

    let new_c: Vec<DMatrix<f64>> = (0..b.len()).map(|v| update_c(state, &b[v], v)).collect();
    state.c = new_c;

    for v in 0..b.len() {
        state.e[v] = update_e(&b[v], &state.c[v], &state.y1[v], config.alpha, state.mu);
    }

    let prox = update_j(&state.graph_tensor(), &state.y2, state.rho, config.p)?;
    state.j = prox.tensor;

    let (xi, h) = update_xi(&state.c, &state.p_u, &state.p_m);
    state.xi = xi;

    let beta_used = state.beta;
    let l1: f64 = state.e.iter().map(|e| e.iter().map(|x| x.abs()).sum::<f64>()).sum();
    let spectral_cost: f64 = h.iter().zip(&state.xi).map(|(hv, x)| hv * hv / x).sum();
    let objective = prox.penalty + config.alpha * l1 + beta_used * spectral_cost;

    update_multipliers(state, b, config.eta);
    state.iter += 1;

    let fused = spectral::fuse_matrices(
        &state.c.iter().collect::<Vec<_>>(),
        &state.xi,
        config.edge_threshold,
    )?;
    let comps = spectral::components(&fused).sample_components;
    if config.beta_adaptive {
        if comps < k {
            state.beta = (state.beta * 2.0).min(BETA_MAX);
        } else if comps > k {
            state.beta = (state.beta / 2.0).max(BETA_MIN);
        }
    }

    let (r1, r2) = residuals(state, b);
    let finite = r1.is_finite()
        && r2.is_finite()
        && state.c.iter().all(|c| c.iter().all(|x| x.is_finite()));
    if !finite {
        return Err(Error::NumericalBreakdown { iteration: state.iter });
    }
    Ok(TraceRow {
        iteration: state.iter,
        r1,
        r2,
        beta: beta_used,
        xi: state.xi.clone(),
        view_costs: h,
        objective,
        components: comps,
    })
}

/// Runs the alternating updates from `C = B` until both residuals fall below
/// `tol` or `max_iters` sweeps have run. A run that hits the iteration limit
/// still returns its state, flagged `converged = false`.
pub fn solve(graphs: &[BipartiteGraph], config: &SolverConfig) -> Result<SolveOutcome> {
    config.validate()?;
    let first = graphs
        .first()
        .ok_or_else(|| Error::InvalidConfig("no input graphs".into()))?;
    let (n, m) = first.weights().shape();
    if graphs.iter().any(|g| g.weights().shape() != (n, m)) {
        return Err(Error::InvalidConfig("input graphs differ in shape".into()));
    }
    if config.clusters > n.min(m) {
        return Err(Error::InvalidConfig(format!(
            "{} clusters need at least as many samples and anchors (n={n}, m={m})",
            config.clusters
        )));
    }
    let b: Vec<DMatrix<f64>> = graphs.iter().map(|g| g.weights().clone()).collect();
    let mut state = SolverState::initial(&b, config);
    let mut trace = Vec::new();
    let mut converged = false;
    while state.iter < config.max_iters {
        let row = iterate(&mut state, &b, config)?;
        debug!(
            "iter {} r1={:.3e} r2={:.3e} beta={:.3e} components={}",
            row.iteration, row.r1, row.r2, row.beta, row.components
        );
        let done = row.r1.max(row.r2) < config.tol;
        trace.push(row);
        if done {
            converged = true;
            break;
        }
    }
    if !converged {
        warn!("solver stopped after {} iterations without converging", state.iter);
    }
    Ok(SolveOutcome {
        state,
        trace,
        converged,
    })
}
