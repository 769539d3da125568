//! Dataset ingestion, synthetic benchmark generation, and result files.
//!
//! A dataset on disk is a small TOML manifest next to its view files:
//!
//! ```toml
//! name = "toy"
//! views = ["view_0.csv", "view_1.csv"]   # relative to the manifest
//! labels = "labels.txt"                   # optional
//! delimiter = ","                         # optional, default ","
//! header = false                          # optional, default false
//! ```
//!
//! View files hold one sample per row. Label files hold one nonnegative
//! integer per line. Numbers are written with Rust's shortest round-trip
//! formatting, so `load(save(x)) == x` exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::anchor::ViewDataset;
use crate::error::{Error, Result};
use crate::pipeline::ClusteringResult;

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub name: String,
    pub view_files: Vec<PathBuf>,
    pub label_file: Option<PathBuf>,
    pub delimiter: char,
    pub has_header: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestFile {
    name: String,
    views: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<PathBuf>,
    #[serde(default = "default_delimiter")]
    delimiter: String,
    #[serde(default)]
    header: bool,
}

fn default_delimiter() -> String {
    ",".into()
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |p| p + 1) + 1;
    (line, col)
}

impl DatasetManifest {
    /// Reads a manifest; relative paths are resolved against its directory.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let raw: ManifestFile = toml::from_str(&text).map_err(|e| {
            let (line, column) = e.span().map_or((1, 1), |s| line_col(&text, s.start));
            Error::Parse {
                file: path.to_path_buf(),
                line,
                column,
                message: e.message().to_string(),
            }
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
        let mut chars = raw.delimiter.chars();
        let delimiter = match (chars.next(), chars.next()) {
            (Some(c), None) => c,
            _ => {
                return Err(Error::Parse {
                    file: path.to_path_buf(),
                    line: 1,
                    column: 1,
                    message: format!("delimiter must be one character, got {:?}", raw.delimiter),
                })
            }
        };
        if raw.views.is_empty() {
            return Err(Error::Parse {
                file: path.to_path_buf(),
                line: 1,
                column: 1,
                message: "manifest lists no view files".into(),
            });
        }
        Ok(Self {
            name: raw.name,
            view_files: raw.views.into_iter().map(resolve).collect(),
            label_file: raw.labels.map(resolve),
            delimiter,
            has_header: raw.header,
        })
    }

    /// Writes the manifest with paths relative to `path`'s directory where possible.
    pub fn write(&self, path: &Path) -> Result<()> {
        let base = path.parent().unwrap_or(Path::new(""));
        let rel = |p: &PathBuf| p.strip_prefix(base).map(Path::to_path_buf).unwrap_or(p.clone());
        let raw = ManifestFile {
            name: self.name.clone(),
            views: self.view_files.iter().map(rel).collect(),
            labels: self.label_file.as_ref().map(rel),
            delimiter: self.delimiter.to_string(),
            header: self.has_header,
        };
        let text = toml::to_string(&raw)
            .map_err(|e| Error::InvalidConfig(format!("cannot serialize manifest: {e}")))?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Parses a delimited numeric matrix. A space delimiter splits on any run of
/// whitespace; blank lines are skipped.
pub fn read_matrix(path: &Path, delimiter: char, has_header: bool) -> Result<DMatrix<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, column: usize, message: String| Error::Parse {
        file: path.to_path_buf(),
        line,
        column,
        message,
    };
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate().skip(usize::from(has_header)) {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = if delimiter == ' ' {
            trimmed.split_whitespace().collect()
        } else {
            trimmed.split(delimiter).collect()
        };
        let mut row = Vec::with_capacity(fields.len());
        for (col, field) in fields.iter().enumerate() {
            let value: f64 = field.trim().parse().map_err(|_| {
                parse_err(idx + 1, col + 1, format!("not a number: {:?}", field.trim()))
            })?;
            if !value.is_finite() {
                return Err(parse_err(idx + 1, col + 1, "non-finite value".into()));
            }
            row.push(value);
        }
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(
                    idx + 1,
                    1,
                    format!("expected {} fields, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(1, 1, "no data rows".into()));
    }
    let cols = rows[0].len();
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

pub fn write_matrix(path: &Path, mat: &DMatrix<f64>, delimiter: char) -> Result<()> {
    let mut out = String::new();
    let sep = delimiter.to_string();
    for row in mat.row_iter() {
        let fields: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&fields.join(&sep));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut labels = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        labels.push(t.parse().map_err(|_| Error::Parse {
            file: path.to_path_buf(),
            line: idx + 1,
            column: 1,
            message: format!("not a nonnegative integer: {t:?}"),
        })?);
    }
    Ok(labels)
}

pub fn write_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let mut out = String::with_capacity(labels.len() * 3);
    for l in labels {
        let _ = writeln!(out, "{l}");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Loads every view (and labels, if listed) named by the manifest. Features are
/// returned as read.
pub fn load_dataset(manifest: &DatasetManifest) -> Result<ViewDataset> {
    let mut views = Vec::with_capacity(manifest.view_files.len());
    for file in &manifest.view_files {
        views.push(read_matrix(file, manifest.delimiter, manifest.has_header)?);
    }
    let labels = manifest
        .label_file
        .as_deref()
        .map(read_labels)
        .transpose()?;
    ViewDataset::new(views, labels)
}

/// Writes views, labels and a manifest into `dir`; returns the manifest path.
pub fn save_dataset(data: &ViewDataset, dir: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut view_files = Vec::new();
    for (v, view) in data.views().iter().enumerate() {
        let path = dir.join(format!("view_{v}.csv"));
        write_matrix(&path, view, ',')?;
        view_files.push(path);
    }
    let label_file = match data.labels() {
        Some(labels) => {
            let path = dir.join("labels.txt");
            write_labels(&path, labels)?;
            Some(path)
        }
        None => None,
    };
    let manifest = DatasetManifest {
        name: name.to_string(),
        view_files,
        label_file,
        delimiter: ',',
        has_header: false,
    };
    let path = dir.join("manifest.toml");
    manifest.write(&path)?;
    Ok(path)
}

/// Parameters of the synthetic multi-view Gaussian benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n: usize,
    pub views: usize,
    pub clusters: usize,
    /// Feature dimension per view; length must equal `views`.
    pub dims: Vec<usize>,
    /// Minimum distance between cluster centers.
    pub separation: f64,
    /// Within-cluster standard deviation.
    pub noise: f64,
    /// Fraction of samples per view drawn from a wrong cluster in that view.
    pub view_corruption: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n: 300,
            views: 3,
            clusters: 3,
            dims: vec![2, 2, 2],
            separation: 10.0,
            noise: 1.0,
            view_corruption: 0.1,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.clusters < 2 || self.n < self.clusters {
            return bad(format!(
                "need n >= K >= 2, got n={} K={}",
                self.n, self.clusters
            ));
        }
        if self.views == 0 || self.dims.len() != self.views {
            return bad(format!(
                "{} views but {} dimensions given",
                self.views,
                self.dims.len()
            ));
        }
        if self.dims.contains(&0) {
            return bad("view dimensions must be positive".into());
        }
        if !(self.separation > 0.0) || !(self.noise >= 0.0) {
            return bad("separation must be positive and noise nonnegative".into());
        }
        if !(0.0..1.0).contains(&self.view_corruption) {
            return bad(format!(
                "view corruption must lie in [0, 1), got {}",
                self.view_corruption
            ));
        }
        Ok(())
    }
}

impl std::str::FromStr for SynthSpec {
    type Err = Error;

    /// Parses `key=value` pairs separated by commas, for example
    /// `n=300,views=3,clusters=3,sep=10,noise=1,corrupt=0.1,seed=7,dims=2:2:2`.
    /// Missing keys keep their defaults; `dims` defaults to 2 per view.
    fn from_str(s: &str) -> Result<Self> {
        let mut spec = SynthSpec::default();
        let mut dims = None;
        let bad = |key: &str, value: &str| {
            Error::InvalidConfig(format!("synthetic spec: bad value {value:?} for {key}"))
        };
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("synthetic spec: expected key=value, got {item:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "n" => spec.n = value.parse().map_err(|_| bad(key, value))?,
                "views" | "v" => spec.views = value.parse().map_err(|_| bad(key, value))?,
                "clusters" | "k" => spec.clusters = value.parse().map_err(|_| bad(key, value))?,
                "sep" | "separation" => spec.separation = value.parse().map_err(|_| bad(key, value))?,
                "noise" => spec.noise = value.parse().map_err(|_| bad(key, value))?,
                "corrupt" | "corruption" => {
                    spec.view_corruption = value.parse().map_err(|_| bad(key, value))?
                }
                "seed" => spec.seed = value.parse().map_err(|_| bad(key, value))?,
                "dims" => {
                    let parsed: std::result::Result<Vec<usize>, _> =
                        value.split(':').map(str::parse).collect();
                    dims = Some(parsed.map_err(|_| bad(key, value))?);
                }
                _ => {
                    return Err(Error::InvalidConfig(format!(
                        "synthetic spec: unknown key {key:?}"
                    )))
                }
            }
        }
        spec.dims = dims.unwrap_or_else(|| vec![2; spec.views]);
        spec.validate()?;
        Ok(spec)
    }
}

/// `k` centers in `d` dimensions with pairwise distance at least `sep`:
/// scaled basis vectors when `d >= k`, a regular polygon when `d >= 2`, evenly
/// spaced points on a line otherwise.
fn cluster_centers(k: usize, d: usize, sep: f64) -> DMatrix<f64> {
    let mut c = DMatrix::zeros(k, d);
    if d >= k {
        for i in 0..k {
            c[(i, i)] = sep / std::f64::consts::SQRT_2;
        }
    } else if d >= 2 {
        let step = std::f64::consts::TAU / k as f64;
        let radius = sep / (2.0 * (step / 2.0).sin());
        for i in 0..k {
            c[(i, 0)] = radius * (step * i as f64).cos();
            c[(i, 1)] = radius * (step * i as f64).sin();
        }
    } else {
        for i in 0..k {
            c[(i, 0)] = sep * i as f64;
        }
    }
    c
}

/// Balanced Gaussian clusters, independently corrupted per view. Deterministic
/// for a given seed.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<ViewDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut labels: Vec<usize> = (0..spec.n).map(|i| i % spec.clusters).collect();
    labels.shuffle(&mut rng);
    let normal = Normal::new(0.0, spec.noise)
        .map_err(|e| Error::InvalidConfig(format!("noise: {e}")))?;
    let corrupt_count = (spec.view_corruption * spec.n as f64).round() as usize;

    let mut views = Vec::with_capacity(spec.views);
    for &d in &spec.dims {
        let centers = cluster_centers(spec.clusters, d, spec.separation);
        let mut source = labels.clone();
        let mut order: Vec<usize> = (0..spec.n).collect();
        order.shuffle(&mut rng);
        for &i in &order[..corrupt_count] {
            let shift = rng.random_range(1..spec.clusters);
            source[i] = (labels[i] + shift) % spec.clusters;
        }
        let mut x = DMatrix::zeros(spec.n, d);
        for i in 0..spec.n {
            for j in 0..d {
                x[(i, j)] = centers[(source[i], j)] + normal.sample(&mut rng);
            }
        }
        views.push(x);
    }
    ViewDataset::new(views, Some(labels))
}

/// Writes `labels.txt`, `anchor_labels.txt`, `trace.tsv`, `fused_graph.txt`
/// and, when ground truth was available, `metrics.tsv` into `dir`.
pub fn save_results(result: &ClusteringResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_labels(&dir.join("labels.txt"), &result.labeling.sample_labels)?;
    write_labels(&dir.join("anchor_labels.txt"), &result.labeling.anchor_labels)?;

    let path = dir.join("trace.tsv");
    fs::write(&path, trace_table(result)).map_err(|e| Error::io(&path, e))?;

    let path = dir.join("fused_graph.txt");
    fs::write(&path, fused_graph_text(result)).map_err(|e| Error::io(&path, e))?;

    if let Some(report) = &result.metrics {
        let path = dir.join("metrics.tsv");
        let text = format!("{}\n{}\n", crate::metrics::MetricReport::HEADER, report);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// `iteration r1 r2 beta xi_1..xi_V objective components`, tab separated.
pub fn trace_table(result: &ClusteringResult) -> String {
    let views = result.xi.len();
    let mut out = String::from("iteration\tr1\tr2\tbeta");
    for v in 1..=views {
        let _ = write!(out, "\txi_{v}");
    }
    out.push_str("\tobjective\tcomponents\n");
    for row in &result.trace {
        let _ = write!(out, "{}\t{:e}\t{:e}\t{:e}", row.iteration, row.r1, row.r2, row.beta);
        for x in &row.xi {
            let _ = write!(out, "\t{x}");
        }
        let _ = writeln!(out, "\t{:e}\t{}", row.objective, row.components);
    }
    out
}

/// Surviving fused-graph edges as `row col weight` lines.
pub fn fused_graph_text(result: &ClusteringResult) -> String {
    let mut out = String::new();
    for (i, j, w) in result.fused.edges() {
        let _ = writeln!(out, "{i} {j} {w}");
    }
    out
}
