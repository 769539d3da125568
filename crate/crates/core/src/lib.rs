//! Multi-view clustering on anchor bipartite graphs.
//!
//! Each view contributes an `n x m` sample-to-anchor graph. The graphs are
//! learned jointly under a tensor Schatten p-norm (low rank across views), an
//! l1 sparse-error term, and a normalized-Laplacian rank term that pushes the
//! view-weighted fused graph towards exactly `K` connected components. Cluster
//! labels are the connected components of the fused graph; no k-means or
//! spectral rotation runs after the solver.
//!
//! Per-iteration cost is linear in `n` for fixed `m`, `V` and `K`.

pub mod anchor;
pub mod data;
pub mod error;
mod linalg;
pub mod metrics;
pub mod pipeline;
pub mod simplex;
pub mod solver;
pub mod spectral;
pub mod tensor;

pub use anchor::{build_all_views, build_bipartite, select_anchors, AnchorSet, BipartiteGraph, ViewDataset};
pub use data::{generate_synthetic, load_dataset, save_results, DatasetManifest, SynthSpec};
pub use error::{Error, Result};
pub use metrics::MetricReport;
pub use pipeline::{run, AnchorCount, ClusteringResult, PipelineConfig};
pub use solver::{solve, SolverConfig, SolverState};
pub use spectral::{components, force_k_components, fuse, zero_eig_multiplicity, ComponentLabeling, FusedGraph};
pub use tensor::{fft_mode3, gst_shrink, ifft_mode3, prox_schatten_p, schatten_p_norm, ComplexTensor3, Tensor3};
