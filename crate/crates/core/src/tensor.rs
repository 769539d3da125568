//! Third-order tensors, the mode-3 DFT and the tensor Schatten p-norm.
//!
//! Storage layout (both [`Tensor3`] and [`ComplexTensor3`]): frontal slices are
//! stored one after another, each slice in column-major order, so entry
//! `(i, j, k)` of an `n1 x n2 x n3` tensor lives at `(k * n2 + j) * n1 + i`.
//! A frontal slice is therefore a contiguous `n1 x n2` column-major matrix,
//! which is what the per-slice SVDs consume.
//!
//! The DFT convention is unnormalized forward, `1/n3`-normalized inverse. Under
//! that convention `||X||_F^2 = (1/n3) sum_k ||Xbar^(k)||_F^2`, which is why the
//! proximal operator thresholds each Fourier slice at `tau * n3`.

use nalgebra::{Complex, DMatrix};
use rustfft::FftPlanner;

use crate::error::{Error, Result};

pub type Complex64 = Complex<f64>;

/// Singular values below this are zeroed before shrinkage.
const SINGULAR_FLOOR: f64 = 1e-12;
/// Absolute imaginary residue tolerated by [`ifft_mode3`], scaled by `max(1, max|x|)`.
const SYMMETRY_TOL: f64 = 1e-9;
const GST_MAX_ITERS: usize = 200;
const GST_STEP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dims: (usize, usize, usize),
    values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTensor3 {
    dims: (usize, usize, usize),
    values: Vec<Complex64>,
}

#[inline]
fn offset(dims: (usize, usize, usize), i: usize, j: usize, k: usize) -> usize {
    (k * dims.1 + j) * dims.0 + i
}

fn check_dims(dims: (usize, usize, usize), len: usize) -> Result<()> {
    if dims.0 == 0 || dims.1 == 0 || dims.2 == 0 {
        return Err(Error::InvalidTensor(format!(
            "dimensions must be positive, got {dims:?}"
        )));
    }
    if dims.0 * dims.1 * dims.2 != len {
        return Err(Error::InvalidTensor(format!(
            "{} values do not fill a {dims:?} tensor",
            len
        )));
    }
    Ok(())
}

impl Tensor3 {
    /// Builds a tensor from values in the documented layout.
    pub fn new(dims: (usize, usize, usize), values: Vec<f64>) -> Result<Self> {
        check_dims(dims, values.len())?;
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidTensor(format!(
                "non-finite entry at flat index {pos}"
            )));
        }
        Ok(Self { dims, values })
    }

    pub fn zeros(dims: (usize, usize, usize)) -> Self {
        assert!(dims.0 > 0 && dims.1 > 0 && dims.2 > 0, "dims must be positive");
        Self {
            dims,
            values: vec![0.0; dims.0 * dims.1 * dims.2],
        }
    }

    pub fn from_fn(
        dims: (usize, usize, usize),
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(dims.0 * dims.1 * dims.2);
        for k in 0..dims.2 {
            for j in 0..dims.1 {
                for i in 0..dims.0 {
                    values.push(f(i, j, k));
                }
            }
        }
        Self::new(dims, values)
    }

    /// Stacks `n x m` matrices as lateral slices: `T(:, v, :) = mats[v]`,
    /// giving an `n x V x m` tensor.
    pub fn from_lateral_slices(mats: &[DMatrix<f64>]) -> Result<Self> {
        let first = mats
            .first()
            .ok_or_else(|| Error::InvalidTensor("no lateral slices".into()))?;
        let (n, m) = first.shape();
        if mats.iter().any(|a| a.shape() != (n, m)) {
            return Err(Error::InvalidTensor("lateral slices differ in shape".into()));
        }
        let v_count = mats.len();
        let mut values = vec![0.0; n * v_count * m];
        for (v, mat) in mats.iter().enumerate() {
            for j in 0..m {
                let col = mat.column(j);
                let base = (j * v_count + v) * n;
                values[base..base + n].copy_from_slice(col.as_slice());
            }
        }
        Self::new((n, v_count, m), values)
    }

    /// Lateral slice `T(:, v, :)` as an `n1 x n3` matrix.
    pub fn lateral_slice(&self, v: usize) -> DMatrix<f64> {
        let (n1, n2, n3) = self.dims;
        assert!(v < n2, "lateral index out of range");
        DMatrix::from_fn(n1, n3, |i, k| self.values[offset(self.dims, i, v, k)])
    }

    pub fn frontal_slice(&self, k: usize) -> DMatrix<f64> {
        let (n1, n2, _) = self.dims;
        let len = n1 * n2;
        DMatrix::from_column_slice(n1, n2, &self.values[k * len..(k + 1) * len])
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[offset(self.dims, i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, value: f64) {
        let idx = offset(self.dims, i, j, k);
        self.values[idx] = value;
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `self + scale * other`, elementwise.
    pub fn add_scaled(&self, other: &Tensor3, scale: f64) -> Tensor3 {
        assert_eq!(self.dims, other.dims, "tensor shapes differ");
        Tensor3 {
            dims: self.dims,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + scale * b)
                .collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Tensor3) -> f64 {
        assert_eq!(self.dims, other.dims, "tensor shapes differ");
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |acc, (a, b)| {
                let d = (a - b).abs();
                // NaN-propagating: once NaN, stays NaN
                if d > acc || d.is_nan() {
                    d
                } else {
                    acc
                }
            })
    }
}

impl ComplexTensor3 {
    pub fn new(dims: (usize, usize, usize), values: Vec<Complex64>) -> Result<Self> {
        check_dims(dims, values.len())?;
        Ok(Self { dims, values })
    }

    pub fn zeros(dims: (usize, usize, usize)) -> Self {
        assert!(dims.0 > 0 && dims.1 > 0 && dims.2 > 0, "dims must be positive");
        Self {
            dims,
            values: vec![Complex64::new(0.0, 0.0); dims.0 * dims.1 * dims.2],
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.values[offset(self.dims, i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, value: Complex64) {
        let idx = offset(self.dims, i, j, k);
        self.values[idx] = value;
    }

    pub fn frontal_slice(&self, k: usize) -> DMatrix<Complex64> {
        let (n1, n2, _) = self.dims;
        let len = n1 * n2;
        DMatrix::from_column_slice(n1, n2, &self.values[k * len..(k + 1) * len])
    }

    fn set_frontal_slice(&mut self, k: usize, slice: &DMatrix<Complex64>) {
        let len = self.dims.0 * self.dims.1;
        self.values[k * len..(k + 1) * len].copy_from_slice(slice.as_slice());
    }

    /// Largest `|X(i,j,k) - conj(X(i,j,(n3-k) mod n3))|`.
    pub fn symmetry_residual(&self) -> f64 {
        let (n1, n2, n3) = self.dims;
        let mut worst = 0.0_f64;
        for k in 0..n3 {
            let mirror = (n3 - k) % n3;
            for j in 0..n2 {
                for i in 0..n1 {
                    let d = self.get(i, j, k) - self.get(i, j, mirror).conj();
                    worst = worst.max(d.norm());
                }
            }
        }
        worst
    }
}

/// Applies a length-`n3` DFT to every tube, forward or inverse (unscaled).
fn transform_tubes(
    dims: (usize, usize, usize),
    values: &[Complex64],
    inverse: bool,
) -> Vec<Complex64> {
    let (n1, n2, n3) = dims;
    let tubes = n1 * n2;
    let mut buf = vec![Complex64::new(0.0, 0.0); tubes * n3];
    for k in 0..n3 {
        for t in 0..tubes {
            buf[t * n3 + k] = values[k * tubes + t];
        }
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n3)
    } else {
        planner.plan_fft_forward(n3)
    };
    fft.process(&mut buf);
    let mut out = vec![Complex64::new(0.0, 0.0); tubes * n3];
    for k in 0..n3 {
        for t in 0..tubes {
            out[k * tubes + t] = buf[t * n3 + k];
        }
    }
    out
}

/// Unnormalized forward DFT along the third mode.
pub fn fft_mode3(t: &Tensor3) -> ComplexTensor3 {
    let promoted: Vec<Complex64> = t.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    ComplexTensor3 {
        dims: t.dims,
        values: transform_tubes(t.dims, &promoted, false),
    }
}

/// Inverse of [`fft_mode3`] with `1/n3` normalization, returning the real part.
///
/// Fails with [`Error::SymmetryViolation`] when the input is not the spectrum of
/// a real tensor (imaginary residue above `1e-9 * max(1, max|x|)`).
pub fn ifft_mode3(t: &ComplexTensor3) -> Result<Tensor3> {
    let n3 = t.dims.2 as f64;
    let out = transform_tubes(t.dims, &t.values, true);
    let scale_ref = out.iter().fold(1.0_f64, |acc, z| acc.max(z.re.abs() / n3));
    let residue = out.iter().fold(0.0_f64, |acc, z| acc.max(z.im.abs() / n3));
    if residue > SYMMETRY_TOL * scale_ref {
        return Err(Error::SymmetryViolation { residue });
    }
    Ok(Tensor3 {
        dims: t.dims,
        values: out.into_iter().map(|z| z.re / n3).collect(),
    })
}

/// Validated `(tau, p)` pair for the scalar shrinkage `min_d 0.5 (d - s)^2 + tau d^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShrinkageParams {
    tau: f64,
    p: f64,
    /// Largest `s` mapped to zero.
    threshold: f64,
}

impl ShrinkageParams {
    pub fn new(tau: f64, p: f64) -> Result<Self> {
        validate_p(p)?;
        if !(tau >= 0.0) || !tau.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "shrinkage weight must be finite and >= 0, got {tau}"
            )));
        }
        let threshold = if p == 1.0 || tau == 0.0 {
            tau
        } else {
            let base = 2.0 * tau * (1.0 - p);
            base.powf(1.0 / (2.0 - p)) + tau * p * base.powf((p - 1.0) / (2.0 - p))
        };
        Ok(Self { tau, p, threshold })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Values of `sigma` at or below this are shrunk to zero.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Global minimizer over `d >= 0` of `0.5 (d - sigma)^2 + tau d^p`
    /// (generalized soft thresholding).
    pub fn shrink(&self, sigma: f64) -> f64 {
        if sigma <= 0.0 {
            return 0.0;
        }
        if self.tau == 0.0 {
            return sigma;
        }
        if self.p == 1.0 {
            return (sigma - self.tau).max(0.0);
        }
        if sigma <= self.threshold {
            return 0.0;
        }
        let step = self.tau * self.p;
        let mut d = sigma;
        for _ in 0..GST_MAX_ITERS {
            let next = sigma - step * d.powf(self.p - 1.0);
            let delta = (next - d).abs();
            d = next;
            if delta < GST_STEP_TOL {
                break;
            }
        }
        d.max(0.0)
    }
}

fn validate_p(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidP(p))
    }
}

/// Scalar generalized soft thresholding; see [`ShrinkageParams::shrink`].
pub fn gst_shrink(sigma: f64, tau: f64, p: f64) -> Result<f64> {
    Ok(ShrinkageParams::new(tau, p)?.shrink(sigma))
}

/// `||T||_Sp`: the p-th root of the summed p-th powers of the singular values of
/// every Fourier-domain frontal slice.
pub fn schatten_p_norm(t: &Tensor3, p: f64) -> Result<f64> {
    validate_p(p)?;
    let spectrum = fft_mode3(t);
    let total: f64 = (0..t.dims.2)
        .map(|k| {
            spectrum
                .frontal_slice(k)
                .singular_values()
                .iter()
                .map(|s| if *s > SINGULAR_FLOOR { s.powf(p) } else { 0.0 })
                .sum::<f64>()
        })
        .sum();
    Ok(total.powf(1.0 / p))
}

/// Result of the proximal step together with `||X*||_Sp^p`.
#[derive(Debug, Clone)]
pub struct ProxOutput {
    pub tensor: Tensor3,
    pub penalty: f64,
}

/// Proximal operator of `tau * ||.||_Sp^p`:
/// `argmin_X 0.5 ||X - Z||_F^2 + tau ||X||_Sp^p`.
pub fn prox_schatten_p(z: &Tensor3, tau: f64, p: f64) -> Result<Tensor3> {
    Ok(prox_schatten_p_with_penalty(z, tau, p)?.tensor)
}

/// Same as [`prox_schatten_p`] but also reports the penalty `||X*||_Sp^p`,
/// which falls out of the shrunk singular values at no extra cost.
pub fn prox_schatten_p_with_penalty(z: &Tensor3, tau: f64, p: f64) -> Result<ProxOutput> {
    let n3 = z.dims.2;
    let params = ShrinkageParams::new(tau * n3 as f64, p)?;
    if tau == 0.0 {
        let penalty = schatten_p_norm(z, p)?.powf(p);
        return Ok(ProxOutput {
            tensor: z.clone(),
            penalty,
        });
    }
    let spectrum = fft_mode3(z);
    let half = n3 / 2;
    let shrink_slice = |k: usize| shrink_frontal_slice(&spectrum.frontal_slice(k), &params);

    #[cfg(feature = "parallel")]
    let shrunk: Vec<(DMatrix<Complex64>, f64)> = {
        use rayon::prelude::*;
        (0..=half).into_par_iter().map(shrink_slice).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let shrunk: Vec<(DMatrix<Complex64>, f64)> = (0..=half).map(shrink_slice).collect();

    let mut out = ComplexTensor3::zeros(z.dims);
    let mut penalty = 0.0;
    for (k, (slice, slice_penalty)) in shrunk.iter().enumerate() {
        out.set_frontal_slice(k, slice);
        penalty += slice_penalty;
        let mirror = (n3 - k) % n3;
        if mirror != k {
            out.set_frontal_slice(mirror, &slice.map(|c| c.conj()));
            penalty += slice_penalty;
        }
    }
    Ok(ProxOutput {
        tensor: ifft_mode3(&out)?,
        penalty,
    })
}

fn shrink_frontal_slice(
    slice: &DMatrix<Complex64>,
    params: &ShrinkageParams,
) -> (DMatrix<Complex64>, f64) {
    let (rows, cols) = slice.shape();
    // every singular value is bounded by the Frobenius norm
    if slice.norm() <= params.threshold() {
        return (DMatrix::zeros(rows, cols), 0.0);
    }
    let svd = slice.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut penalty = 0.0;
    let mut scaled_u = u;
    for (idx, &s) in svd.singular_values.iter().enumerate() {
        let s = if s < SINGULAR_FLOOR { 0.0 } else { s };
        let d = params.shrink(s);
        if d > 0.0 {
            penalty += d.powf(params.p());
        }
        scaled_u.column_mut(idx).scale_mut(d);
    }
    (scaled_u * v_t, penalty)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_tensor(dims: (usize, usize, usize), rng: &mut ChaCha8Rng) -> Tensor3 {
        Tensor3::from_fn(dims, |_, _, _| rng.random_range(-1.0..1.0)).unwrap()
    }

    /// O(n3^2) DFT straight from the definition.
    fn naive_dft(t: &Tensor3) -> ComplexTensor3 {
        let (n1, n2, n3) = t.dims();
        let mut out = ComplexTensor3::zeros(t.dims());
        for i in 0..n1 {
            for j in 0..n2 {
                for f in 0..n3 {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..n3 {
                        let angle = -2.0 * std::f64::consts::PI * (f * k) as f64 / n3 as f64;
                        acc += Complex64::from_polar(t.get(i, j, k), angle);
                    }
                    out.set(i, j, f, acc);
                }
            }
        }
        out
    }

    #[test]
    fn constant_tube_concentrates_in_dc() {
        let t = Tensor3::new((1, 1, 4), vec![2.5; 4]).unwrap();
        let f = fft_mode3(&t);
        assert!((f.get(0, 0, 0) - Complex64::new(10.0, 0.0)).norm() < 1e-12);
        for k in 1..4 {
            assert!(f.get(0, 0, k).norm() < 1e-12);
        }
    }

    #[test]
    fn length_one_dft_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = random_tensor((3, 2, 1), &mut rng);
        let f = fft_mode3(&t);
        for (a, b) in f.values().iter().zip(t.values()) {
            assert_eq!(a.re, *b);
            assert_eq!(a.im, 0.0);
        }
    }

    #[test]
    fn fft_matches_naive_dft() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = random_tensor((2, 2, 3), &mut rng);
        let fast = fft_mode3(&t);
        let slow = naive_dft(&t);
        for (a, b) in fast.values().iter().zip(slow.values()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn round_trip_and_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dims in [(1, 1, 1), (3, 2, 5), (8, 5, 7), (4, 4, 6)] {
            let t = random_tensor(dims, &mut rng);
            let f = fft_mode3(&t);
            assert!(f.symmetry_residual() < 1e-12);
            let back = ifft_mode3(&f).unwrap();
            let rel = back.add_scaled(&t, -1.0).frobenius_norm() / t.frobenius_norm();
            assert!(rel < 1e-12, "relative error {rel}");
        }
    }

    #[test]
    fn ifft_of_zero_and_two_point_spectrum() {
        let zero = ComplexTensor3::zeros((2, 3, 4));
        assert!(ifft_mode3(&zero).unwrap().values().iter().all(|v| *v == 0.0));

        let (a, b) = (1.75, -0.5);
        let spec = ComplexTensor3::new(
            (1, 1, 2),
            vec![Complex64::new(a + b, 0.0), Complex64::new(a - b, 0.0)],
        )
        .unwrap();
        let t = ifft_mode3(&spec).unwrap();
        assert!((t.get(0, 0, 0) - a).abs() < 1e-15);
        assert!((t.get(0, 0, 1) - b).abs() < 1e-15);
    }

    #[test]
    fn ifft_rejects_asymmetric_spectrum() {
        let mut spec = ComplexTensor3::zeros((1, 1, 3));
        spec.set(0, 0, 1, Complex64::new(0.0, 1.0));
        assert!(matches!(
            ifft_mode3(&spec),
            Err(Error::SymmetryViolation { .. })
        ));
    }

    #[test]
    fn tensor_rejects_bad_input() {
        assert!(Tensor3::new((0, 1, 1), vec![]).is_err());
        assert!(Tensor3::new((1, 1, 2), vec![1.0]).is_err());
        assert!(Tensor3::new((1, 1, 1), vec![f64::NAN]).is_err());
    }

    #[test]
    fn lateral_slices_round_trip() {
        let a = DMatrix::from_fn(3, 4, |i, j| (i * 10 + j) as f64);
        let b = a.map(|x| -x);
        let t = Tensor3::from_lateral_slices(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(t.dims(), (3, 2, 4));
        assert_eq!(t.get(2, 1, 3), -23.0);
        assert_eq!(t.lateral_slice(0), a);
        assert_eq!(t.lateral_slice(1), b);
    }

    #[test]
    fn schatten_norm_simple_cases() {
        assert_eq!(schatten_p_norm(&Tensor3::zeros((2, 2, 3)), 0.5).unwrap(), 0.0);
        let t = Tensor3::new((2, 2, 1), vec![3.0, 0.0, 0.0, 4.0]).unwrap();
        assert!((schatten_p_norm(&t, 1.0).unwrap() - 7.0).abs() < 1e-12);
        assert!(matches!(schatten_p_norm(&t, 0.0), Err(Error::InvalidP(_))));
        assert!(matches!(schatten_p_norm(&t, 1.5), Err(Error::InvalidP(_))));
    }

    /// Singular values via eigenvalues of the Hermitian Gram matrix.
    #[test]
    fn schatten_norm_matches_gram_eigen_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = random_tensor((3, 2, 2), &mut rng);
        let p = 0.5;
        let spec = naive_dft(&t);
        let mut total = 0.0;
        for k in 0..2 {
            let s = spec.frontal_slice(k);
            let gram = s.adjoint() * &s;
            let eig = gram.symmetric_eigen();
            for lambda in eig.eigenvalues.iter() {
                total += lambda.max(0.0).sqrt().powf(p);
            }
        }
        let expected = total.powf(1.0 / p);
        assert!((schatten_p_norm(&t, p).unwrap() - expected).abs() < 1e-8);
    }

    #[test]
    fn gst_examples() {
        assert!((gst_shrink(1.5, 0.4, 1.0).unwrap() - 1.1).abs() < 1e-15);
        assert_eq!(gst_shrink(0.3, 0.4, 1.0).unwrap(), 0.0);
        assert!(matches!(gst_shrink(1.0, 0.1, 0.0), Err(Error::InvalidP(_))));
    }

    #[test]
    fn gst_matches_grid_search() {
        let (sigma, tau, p) = (2.0, 0.5, 0.5);
        let obj = |d: f64| 0.5 * (d - sigma).powi(2) + tau * d.powf(p);
        let mut best = (0.0, obj(0.0));
        let steps = 3_000_000;
        for s in 0..=steps {
            let d = 3.0 * s as f64 / steps as f64;
            let o = obj(d);
            if o < best.1 {
                best = (d, o);
            }
        }
        let got = gst_shrink(sigma, tau, p).unwrap();
        assert!((got - best.0).abs() < 1e-5, "{got} vs {}", best.0);
    }

    #[test]
    fn gst_monotone_on_grid() {
        for p in [0.3, 0.6, 1.0] {
            for ti in 0..10 {
                let tau = 0.05 * ti as f64;
                let params = ShrinkageParams::new(tau, p).unwrap();
                let mut prev = 0.0;
                for si in 0..200 {
                    let v = params.shrink(0.02 * si as f64);
                    assert!(v >= prev - 1e-12);
                    prev = v;
                }
            }
            for si in 0..50 {
                let sigma = 0.1 * si as f64;
                let mut prev = f64::INFINITY;
                for ti in 0..40 {
                    let v = gst_shrink(sigma, 0.05 * ti as f64, p).unwrap();
                    assert!(v <= prev + 1e-12);
                    prev = v;
                }
            }
        }
    }

    #[test]
    fn prox_with_zero_tau_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let z = random_tensor((3, 3, 4), &mut rng);
        assert_eq!(prox_schatten_p(&z, 0.0, 0.7).unwrap(), z);
    }

    #[test]
    fn prox_single_slice_is_classical_svt() {
        let z = Tensor3::new((2, 2, 1), vec![3.0, 0.0, 0.0, 1.0]).unwrap();
        let x = prox_schatten_p(&z, 2.0, 1.0).unwrap();
        let expected = [1.0, 0.0, 0.0, 0.0];
        for (a, b) in x.values().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn prox_beats_candidates() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let z = random_tensor((4, 3, 2), &mut rng);
        let (tau, p) = (0.1, 0.7);
        let objective = |x: &Tensor3| {
            0.5 * x.add_scaled(&z, -1.0).frobenius_norm().powi(2)
                + tau * schatten_p_norm(x, p).unwrap().powf(p)
        };
        let out = prox_schatten_p_with_penalty(&z, tau, p).unwrap();
        let best = objective(&out.tensor);
        assert!((out.penalty - schatten_p_norm(&out.tensor, p).unwrap().powf(p)).abs() < 1e-8);
        assert!(best <= objective(&z) + 1e-9);
        assert!(best <= objective(&Tensor3::zeros(z.dims())) + 1e-9);
        for trial in 0..500 {
            let eps = [1e-3, 1e-2, 1e-1][trial % 3];
            let noise = random_tensor(z.dims(), &mut rng);
            let cand = out.tensor.add_scaled(&noise, eps);
            assert!(best <= objective(&cand) + 1e-9);
        }
    }
}
