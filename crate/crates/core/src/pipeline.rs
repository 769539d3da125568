//! End-to-end clustering: anchors, bipartite graphs, solver, fused-graph labels.

use log::info;

use crate::anchor::{build_all_views, select_anchors, AnchorSet, ViewDataset};
use crate::error::{Error, Result};
use crate::metrics::MetricReport;
use crate::solver::{solve, SolverConfig, SolverState, TraceRow};
use crate::spectral::{components, force_k_components, fuse_matrices, ComponentLabeling, FusedGraph};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnchorCount {
    Absolute(usize),
    /// Fraction of `n`, rounded.
    Proportion(f64),
}

impl AnchorCount {
    pub fn resolve(&self, n: usize) -> Result<usize> {
        match *self {
            AnchorCount::Absolute(m) => Ok(m),
            AnchorCount::Proportion(r) if r > 0.0 && r <= 1.0 => {
                Ok(((r * n as f64).round() as usize).max(1))
            }
            AnchorCount::Proportion(r) => Err(Error::InvalidConfig(format!(
                "anchor proportion must lie in (0, 1], got {r}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub anchors: AnchorCount,
    /// Anchors linked per sample, clamped to `m - 1`.
    pub neighbors: usize,
    pub solver: SolverConfig,
    /// Seeds anchor selection.
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            anchors: AnchorCount::Proportion(0.5),
            neighbors: 5,
            solver: SolverConfig::default(),
            seed: 0,
        }
    }
}

/// Wall-clock seconds per phase; zero where no clock is available.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimings {
    pub graph: f64,
    pub solve: f64,
    pub label: f64,
}

#[derive(Debug, Clone)]
pub struct ClusteringResult {
    pub n_anchors: usize,
    pub anchors: AnchorSet,
    pub fused: FusedGraph,
    pub labeling: ComponentLabeling,
    /// Components of the fused graph before any forced edit.
    pub raw_components: usize,
    pub metrics: Option<MetricReport>,
    pub trace: Vec<TraceRow>,
    pub xi: Vec<f64>,
    pub converged: bool,
    pub timings: PhaseTimings,
}

struct Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Stopwatch {
    fn start() -> Self {
        Self {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    fn seconds(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        return self.start.elapsed().as_secs_f64();
        #[cfg(target_arch = "wasm32")]
        return 0.0;
    }
}

/// Final labels straight from the connectivity of the fused graph.
pub fn label_fused_graph(state: &SolverState, config: &SolverConfig) -> Result<(FusedGraph, ComponentLabeling, usize)> {
    let fused = fuse_matrices(&state.c.iter().collect::<Vec<_>>(), &state.xi, config.edge_threshold)?;
    let raw = components(&fused).sample_components;
    let labeling = force_k_components(&fused, config.clusters);
    Ok((fused, labeling, raw))
}

pub fn run(data: &ViewDataset, config: &PipelineConfig) -> Result<ClusteringResult> {
    let n = data.n_samples();
    let m = config.anchors.resolve(n)?;
    let k = config.solver.clusters;
    if m < k {
        return Err(Error::InvalidConfig(format!(
            "{m} anchors cannot support {k} clusters"
        )));
    }
    if config.neighbors == 0 {
        return Err(Error::InvalidConfig("neighbor count must be positive".into()));
    }
    let neighbors = config.neighbors.min(m - 1);

    let clock = Stopwatch::start();
    let anchors = select_anchors(data, m, config.seed)?;
    let graphs = build_all_views(data, &anchors, neighbors)?;
    let graph_secs = clock.seconds();

    let clock = Stopwatch::start();
    let outcome = solve(&graphs, &config.solver)?;
    let solve_secs = clock.seconds();

    let clock = Stopwatch::start();
    let (fused, labeling, raw_components) = label_fused_graph(&outcome.state, &config.solver)?;
    let label_secs = clock.seconds();

    let metrics = data
        .labels()
        .map(|truth| MetricReport::compute(truth, &labeling.sample_labels))
        .transpose()?;

    info!(
        "n={n} m={m} iterations={} converged={} components={} forced_edits={} \
         graph={graph_secs:.3}s solve={solve_secs:.3}s label={label_secs:.3}s",
        outcome.trace.len(),
        outcome.converged,
        raw_components,
        labeling.forced_edits,
    );

    Ok(ClusteringResult {
        n_anchors: m,
        anchors,
        fused,
        labeling,
        raw_components,
        metrics,
        trace: outcome.trace,
        xi: outcome.state.xi.clone(),
        converged: outcome.converged,
        timings: PhaseTimings {
            graph: graph_secs,
            solve: solve_secs,
            label: label_secs,
        },
    })
}
