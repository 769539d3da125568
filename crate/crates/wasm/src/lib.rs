//! Browser bindings: generate a 2-D multi-view dataset, cluster it, and plot
//! the generalized soft-thresholding curve.

use anchor_mvc::tensor::ShrinkageParams;
use anchor_mvc::{
    generate_synthetic, run, AnchorCount, ClusteringResult, PipelineConfig, SolverConfig,
    SynthSpec, ViewDataset,
};
use wasm_bindgen::prelude::*;

fn js_err(e: anchor_mvc::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct Dataset {
    inner: ViewDataset,
}

#[wasm_bindgen]
impl Dataset {
    /// Three 2-D views of `clusters` Gaussian blobs, each view independently
    /// corrupted.
    pub fn synthetic(
        n: usize,
        clusters: usize,
        separation: f64,
        noise: f64,
        corruption: f64,
        seed: u32,
    ) -> Result<Dataset, JsError> {
        let spec = SynthSpec {
            n,
            views: 3,
            clusters,
            dims: vec![2; 3],
            separation,
            noise,
            view_corruption: corruption,
            seed: seed.into(),
        };
        let inner = generate_synthetic(&spec).map_err(js_err)?;
        Ok(Dataset { inner })
    }

    #[wasm_bindgen(getter = nSamples)]
    pub fn n_samples(&self) -> usize {
        self.inner.n_samples()
    }

    #[wasm_bindgen(getter = nViews)]
    pub fn n_views(&self) -> usize {
        self.inner.n_views()
    }

    /// Interleaved `x, y` coordinates of every sample in view `v`.
    pub fn points(&self, v: usize) -> Vec<f64> {
        xy(self.inner.view(v))
    }

    pub fn labels(&self) -> Vec<u32> {
        self.inner
            .labels()
            .map(|l| l.iter().map(|x| *x as u32).collect())
            .unwrap_or_default()
    }

    /// Runs the full pipeline. `anchors` is an absolute count.
    #[allow(clippy::too_many_arguments)]
    pub fn cluster(
        &self,
        clusters: usize,
        anchors: usize,
        neighbors: usize,
        p: f64,
        alpha: f64,
        beta: f64,
        adaptive_beta: bool,
        max_iters: usize,
        seed: u32,
    ) -> Result<Clustering, JsError> {
        let config = PipelineConfig {
            anchors: AnchorCount::Absolute(anchors),
            neighbors,
            solver: SolverConfig {
                clusters,
                p,
                alpha,
                beta,
                beta_adaptive: adaptive_beta,
                max_iters,
                ..SolverConfig::default()
            },
            seed: seed.into(),
        };
        let inner = run(&self.inner, &config).map_err(js_err)?;
        Ok(Clustering { inner })
    }
}

fn xy(m: &nalgebra::DMatrix<f64>) -> Vec<f64> {
    m.row_iter()
        .flat_map(|r| [r[0], r.get(1).copied().unwrap_or(0.0)])
        .collect()
}

#[wasm_bindgen]
pub struct Clustering {
    inner: ClusteringResult,
}

#[wasm_bindgen]
impl Clustering {
    pub fn labels(&self) -> Vec<u32> {
        to_u32(&self.inner.labeling.sample_labels)
    }

    #[wasm_bindgen(js_name = anchorLabels)]
    pub fn anchor_labels(&self) -> Vec<u32> {
        to_u32(&self.inner.labeling.anchor_labels)
    }

    /// Interleaved `x, y` anchor positions in view `v`.
    #[wasm_bindgen(js_name = anchorPoints)]
    pub fn anchor_points(&self, v: usize) -> Vec<f64> {
        xy(&self.inner.anchors.view_centers(v))
    }

    /// Surviving fused-graph edges as `sample, anchor, weight` triples.
    pub fn edges(&self) -> Vec<f64> {
        self.inner
            .fused
            .edges()
            .into_iter()
            .flat_map(|(i, j, w)| [i as f64, j as f64, w])
            .collect()
    }

    /// ACC, NMI, Purity, precision, recall, F-score, ARI; empty without labels.
    pub fn metrics(&self) -> Vec<f64> {
        self.inner
            .metrics
            .map(|m| m.values().to_vec())
            .unwrap_or_default()
    }

    /// `max(r1, r2)` per iteration.
    pub fn residuals(&self) -> Vec<f64> {
        self.inner.trace.iter().map(|t| t.r1.max(t.r2)).collect()
    }

    pub fn betas(&self) -> Vec<f64> {
        self.inner.trace.iter().map(|t| t.beta).collect()
    }

    pub fn xi(&self) -> Vec<f64> {
        self.inner.xi.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn converged(&self) -> bool {
        self.inner.converged
    }

    #[wasm_bindgen(getter = rawComponents)]
    pub fn raw_components(&self) -> usize {
        self.inner.raw_components
    }

    #[wasm_bindgen(getter = forcedEdits)]
    pub fn forced_edits(&self) -> usize {
        self.inner.labeling.forced_edits
    }
}

fn to_u32(v: &[usize]) -> Vec<u32> {
    v.iter().map(|x| *x as u32).collect()
}

/// Shrinkage `sigma -> delta` sampled at `samples` points on `[0, sigma_max]`,
/// returned as interleaved `sigma, delta` pairs.
#[wasm_bindgen(js_name = gstCurve)]
pub fn gst_curve(tau: f64, p: f64, sigma_max: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    let params = ShrinkageParams::new(tau, p).map_err(js_err)?;
    let steps = samples.max(2) - 1;
    Ok((0..=steps)
        .flat_map(|i| {
            let s = sigma_max * i as f64 / steps as f64;
            [s, params.shrink(s)]
        })
        .collect())
}

/// Largest singular value sent to zero for `(tau, p)`.
#[wasm_bindgen(js_name = gstThreshold)]
pub fn gst_threshold(tau: f64, p: f64) -> Result<f64, JsError> {
    Ok(ShrinkageParams::new(tau, p).map_err(js_err)?.threshold())
}
