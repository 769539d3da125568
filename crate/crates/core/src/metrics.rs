//! Clustering agreement metrics: ACC, NMI, Purity, pairwise Precision / Recall /
//! F-score, and the Adjusted Rand Index.
//!
//! Degenerate cases use these conventions:
//! - NMI is 0 whenever either partition has zero entropy (0/0 -> 0).
//! - Pairwise precision (recall) is 1 when both partitions have no same-cluster
//!   pairs, 0 when only the denominator side has none.
//! - ARI is 1 when its denominator vanishes, which only happens when both
//!   partitions are all-singletons or both are a single cluster.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelPair<'a> {
    truth: &'a [usize],
    pred: &'a [usize],
}

impl<'a> LabelPair<'a> {
    pub fn new(truth: &'a [usize], pred: &'a [usize]) -> Result<Self> {
        if truth.len() != pred.len() {
            return Err(Error::LengthMismatch {
                truth: truth.len(),
                pred: pred.len(),
            });
        }
        if truth.is_empty() {
            return Err(Error::InvalidConfig("label vectors are empty".into()));
        }
        Ok(Self { truth, pred })
    }

    pub fn len(&self) -> usize {
        self.truth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truth.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NmiNormalization {
    /// `I / sqrt(H_t H_p)`
    #[default]
    Geometric,
    /// `2 I / (H_t + H_p)`
    Arithmetic,
}

/// Contingency table between compacted truth classes (rows) and predicted
/// clusters (columns).
#[derive(Debug, Clone)]
pub struct Contingency {
    counts: Vec<Vec<u64>>,
    row_sums: Vec<u64>,
    col_sums: Vec<u64>,
    n: u64,
}

fn compact(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = HashMap::new();
    let ids = labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect();
    (ids, map.len())
}

impl Contingency {
    pub fn from_pair(lp: &LabelPair<'_>) -> Self {
        let (t, kt) = compact(lp.truth);
        let (p, kp) = compact(lp.pred);
        let mut counts = vec![vec![0u64; kp]; kt];
        for (a, b) in t.iter().zip(&p) {
            counts[*a][*b] += 1;
        }
        let row_sums = counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums = (0..kp).map(|j| counts.iter().map(|r| r[j]).sum()).collect();
        Self {
            counts,
            row_sums,
            col_sums,
            n: lp.len() as u64,
        }
    }
}

fn pairs(x: u64) -> f64 {
    (x as f64) * (x.saturating_sub(1) as f64) / 2.0
}

/// Minimum-cost perfect assignment on a square matrix (Hungarian algorithm,
/// potentials formulation). Returns `assignment[row] = column`.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let inf = f64::INFINITY;
    // 1-based arrays; index 0 is a sentinel
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let r0 = owner[col0];
            let mut delta = inf;
            let mut col1 = 0;
            for col in 1..=n {
                if !used[col] {
                    let cur = cost[r0 - 1][col - 1] - u[r0] - v[col];
                    if cur < minv[col] {
                        minv[col] = cur;
                        way[col] = col0;
                    }
                    if minv[col] < delta {
                        delta = minv[col];
                        col1 = col;
                    }
                }
            }
            for col in 0..=n {
                if used[col] {
                    u[owner[col]] += delta;
                    v[col] -= delta;
                } else {
                    minv[col] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let col1 = way[col0];
            owner[col0] = owner[col1];
            col0 = col1;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for col in 1..=n {
        if owner[col] != 0 {
            assignment[owner[col] - 1] = col - 1;
        }
    }
    assignment
}

fn accuracy_from(ct: &Contingency) -> f64 {
    let size = ct.row_sums.len().max(ct.col_sums.len());
    let mut cost = vec![vec![0.0; size]; size];
    for (i, row) in ct.counts.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            cost[i][j] = -(*c as f64);
        }
    }
    let assignment = hungarian(&cost);
    let matched: f64 = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| -cost[i][j])
        .sum();
    matched / ct.n as f64
}

fn entropy(sums: &[u64], n: f64) -> f64 {
    sums.iter()
        .filter(|c| **c > 0)
        .map(|c| {
            let q = *c as f64 / n;
            -q * q.ln()
        })
        .sum()
}

fn nmi_from(ct: &Contingency, norm: NmiNormalization) -> f64 {
    let n = ct.n as f64;
    let mut mi = 0.0;
    for (i, row) in ct.counts.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            if *c > 0 {
                let c = *c as f64;
                mi += c / n * (c * n / (ct.row_sums[i] as f64 * ct.col_sums[j] as f64)).ln();
            }
        }
    }
    let ht = entropy(&ct.row_sums, n);
    let hp = entropy(&ct.col_sums, n);
    let denom = match norm {
        NmiNormalization::Geometric => (ht * hp).sqrt(),
        NmiNormalization::Arithmetic => 0.5 * (ht + hp),
    };
    if denom <= 0.0 {
        0.0
    } else {
        (mi / denom).clamp(0.0, 1.0)
    }
}

fn purity_from(ct: &Contingency) -> f64 {
    let kp = ct.col_sums.len();
    let hits: u64 = (0..kp)
        .map(|j| ct.counts.iter().map(|r| r[j]).max().unwrap_or(0))
        .sum();
    hits as f64 / ct.n as f64
}

/// `(same-in-both, same-in-truth, same-in-pred, all)` pair counts.
fn pair_counts(ct: &Contingency) -> (f64, f64, f64, f64) {
    let both: f64 = ct.counts.iter().flatten().map(|c| pairs(*c)).sum();
    let truth: f64 = ct.row_sums.iter().map(|c| pairs(*c)).sum();
    let pred: f64 = ct.col_sums.iter().map(|c| pairs(*c)).sum();
    (both, truth, pred, pairs(ct.n))
}

fn ratio_or(num: f64, denom: f64, other_denom: f64) -> f64 {
    if denom > 0.0 {
        num / denom
    } else if other_denom > 0.0 {
        0.0
    } else {
        1.0
    }
}

fn prf_from(ct: &Contingency) -> (f64, f64, f64) {
    let (both, truth, pred, _) = pair_counts(ct);
    let precision = ratio_or(both, pred, truth);
    let recall = ratio_or(both, truth, pred);
    let f = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    (precision, recall, f)
}

fn ari_from(ct: &Contingency) -> f64 {
    let (both, truth, pred, total) = pair_counts(ct);
    if total == 0.0 {
        return 1.0;
    }
    let expected = truth * pred / total;
    let max_index = 0.5 * (truth + pred);
    let denom = max_index - expected;
    if denom == 0.0 {
        1.0
    } else {
        (both - expected) / denom
    }
}

pub fn accuracy(lp: &LabelPair<'_>) -> f64 {
    accuracy_from(&Contingency::from_pair(lp))
}

pub fn nmi(lp: &LabelPair<'_>) -> f64 {
    nmi_from(&Contingency::from_pair(lp), NmiNormalization::Geometric)
}

pub fn nmi_with(lp: &LabelPair<'_>, norm: NmiNormalization) -> f64 {
    nmi_from(&Contingency::from_pair(lp), norm)
}

pub fn purity(lp: &LabelPair<'_>) -> f64 {
    purity_from(&Contingency::from_pair(lp))
}

/// Pairwise `(precision, recall, fscore)` over same-cluster sample pairs.
pub fn pairwise_prf(lp: &LabelPair<'_>) -> (f64, f64, f64) {
    prf_from(&Contingency::from_pair(lp))
}

pub fn ari(lp: &LabelPair<'_>) -> f64 {
    ari_from(&Contingency::from_pair(lp))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub acc: f64,
    pub nmi: f64,
    pub purity: f64,
    pub precision: f64,
    pub recall: f64,
    pub fscore: f64,
    pub ari: f64,
}

impl MetricReport {
    pub const HEADER: &'static str = "ACC\tNMI\tPurity\tPRE\tREC\tF-score\tARI";

    /// All seven metrics from a single contingency table.
    pub fn compute(truth: &[usize], pred: &[usize]) -> Result<Self> {
        Self::compute_with(truth, pred, NmiNormalization::Geometric)
    }

    pub fn compute_with(truth: &[usize], pred: &[usize], norm: NmiNormalization) -> Result<Self> {
        let lp = LabelPair::new(truth, pred)?;
        let ct = Contingency::from_pair(&lp);
        let (precision, recall, fscore) = prf_from(&ct);
        Ok(Self {
            acc: accuracy_from(&ct),
            nmi: nmi_from(&ct, norm),
            purity: purity_from(&ct),
            precision,
            recall,
            fscore,
            ari: ari_from(&ct),
        })
    }

    pub fn values(&self) -> [f64; 7] {
        [
            self.acc,
            self.nmi,
            self.purity,
            self.precision,
            self.recall,
            self.fscore,
            self.ari,
        ]
    }

    pub fn from_values(v: [f64; 7]) -> Self {
        Self {
            acc: v[0],
            nmi: v[1],
            purity: v[2],
            precision: v[3],
            recall: v[4],
            fscore: v[5],
            ari: v[6],
        }
    }
}

/// One tab-separated line in table column order, six decimals.
impl fmt::Display for MetricReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values().iter().map(|v| format!("{v:.6}")).collect();
        f.write_str(&parts.join("\t"))
    }
}

/// Per-metric mean and (population) standard deviation over repetitions.
pub fn summarize(reports: &[MetricReport]) -> (MetricReport, MetricReport) {
    let count = reports.len().max(1) as f64;
    let mut mean = [0.0; 7];
    for r in reports {
        for (m, v) in mean.iter_mut().zip(r.values()) {
            *m += v / count;
        }
    }
    let mut std = [0.0; 7];
    for r in reports {
        for ((s, v), m) in std.iter_mut().zip(r.values()).zip(mean) {
            *s += (v - m).powi(2) / count;
        }
    }
    std.iter_mut().for_each(|s| *s = s.sqrt());
    (MetricReport::from_values(mean), MetricReport::from_values(std))
}
