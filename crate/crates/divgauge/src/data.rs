//! Sample generators and dataset ingestion: Gaussian samplers, correlated
//! pairs for mutual information, the nonlinear high-dimensional embedding,
//! and MNIST IDX loading with random pixel translation.

use crate::divergence::GaussianSpec;
use crate::error::{DivError, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::io::Read;
use std::path::Path;

/// Row-major sample matrix: one sample per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<f64>,
}

impl SampleMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SampleMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(|v| v.len()).unwrap_or(0);
        if rows.iter().any(|v| v.len() != c) {
            return Err(DivError::Domain("ragged rows".into()));
        }
        Ok(SampleMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows_iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// n i.i.d. draws from the Gaussian via its Cholesky factor; deterministic
/// per stream state.
pub fn sample_gaussian(spec: &GaussianSpec, n: usize, rng: &mut ChaCha8Rng) -> Result<SampleMatrix> {
    if n == 0 {
        return Err(DivError::Domain("need n >= 1 samples".into()));
    }
    let d = spec.dim();
    let mut out = SampleMatrix::zeros(n, d);
    match spec.diagonal_variances() {
        Some(vars) => {
            let sds: Vec<f64> = vars
                .iter()
                .map(|&v| {
                    if v <= 0.0 {
                        Err(DivError::Factorization(format!("variance {v} not positive")))
                    } else {
                        Ok(v.sqrt())
                    }
                })
                .collect::<Result<_>>()?;
            for i in 0..n {
                let row = out.row_mut(i);
                for j in 0..d {
                    let z: f64 = rng.sample(StandardNormal);
                    row[j] = spec.mean[j] + sds[j] * z;
                }
            }
        }
        None => {
            let chol = spec.cholesky()?;
            let mut z = vec![0.0; d];
            for i in 0..n {
                for zj in z.iter_mut() {
                    *zj = rng.sample(StandardNormal);
                }
                let row = out.row_mut(i);
                chol.apply(&z, row);
                for j in 0..d {
                    row[j] += spec.mean[j];
                }
            }
        }
    }
    Ok(out)
}

/// Fisher-Yates shuffle of 0..n driven by the given stream.
pub fn random_permutation(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    perm
}

// ---------------------------------------------------------------------------
// Mutual-information pair sampling
// ---------------------------------------------------------------------------

/// Nonlinear embedding into a higher-dimensional space: coordinates 1..=20
/// pass through unchanged; each extra coordinate is an affine map plus
/// cos(x_j1) sin(x_j2) + x_j3 x_j4 with seeded random coefficients/indices.
#[derive(Debug, Clone)]
pub struct EmbeddingSpec {
    pub input_dim: usize,
    pub target_dim: usize,
    /// (target_dim - input_dim) x (input_dim + 1) affine coefficients.
    affine: Vec<f64>,
    indices: Vec<[usize; 4]>,
}

pub const EMBED_BASE_DIM: usize = 20;

impl EmbeddingSpec {
    pub fn new(target_dim: usize, seed: u64) -> Result<Self> {
        use rand_chacha::rand_core::SeedableRng;
        let input_dim = EMBED_BASE_DIM;
        if target_dim <= input_dim {
            return Err(DivError::Domain(format!(
                "embedding target dim must exceed {input_dim}, got {target_dim}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0x1_e4be);
        let extra = target_dim - input_dim;
        // coefficients ~ Uniform(-1,1)/sqrt(input_dim) keep conditioning
        // bounded across embedding dimensions
        let norm = (input_dim as f64).sqrt();
        let affine: Vec<f64> = (0..extra * (input_dim + 1))
            .map(|_| (rng.gen::<f64>() * 2.0 - 1.0) / norm)
            .collect();
        let indices: Vec<[usize; 4]> = (0..extra)
            .map(|_| {
                [
                    rng.gen_range(0..input_dim),
                    rng.gen_range(0..input_dim),
                    rng.gen_range(0..input_dim),
                    rng.gen_range(0..input_dim),
                ]
            })
            .collect();
        Ok(EmbeddingSpec { input_dim, target_dim, affine, indices })
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.input_dim);
        debug_assert_eq!(out.len(), self.target_dim);
        out[..self.input_dim].copy_from_slice(x);
        let width = self.input_dim + 1;
        for (k, idx) in self.indices.iter().enumerate() {
            let coeffs = &self.affine[k * width..(k + 1) * width];
            let mut v = coeffs[self.input_dim];
            for (c, xi) in coeffs[..self.input_dim].iter().zip(x) {
                v += c * xi;
            }
            v += x[idx[0]].cos() * x[idx[1]].sin() + x[idx[2]] * x[idx[3]];
            out[self.input_dim + k] = v;
        }
    }
}

/// Correlated Gaussian pairs (X, Y) with componentwise correlation rho,
/// optionally pushed through an [`EmbeddingSpec`].
#[derive(Debug, Clone)]
pub struct MiPairSampler {
    pub d: usize,
    pub rho: f64,
    pub embed: Option<EmbeddingSpec>,
}

impl MiPairSampler {
    pub fn new(d: usize, rho: f64, embed: Option<EmbeddingSpec>) -> Result<Self> {
        if d == 0 {
            return Err(DivError::Domain("dimension must be positive".into()));
        }
        if !(rho.abs() < 1.0) {
            return Err(DivError::Domain(format!("|rho| must be < 1, got {rho}")));
        }
        if let Some(e) = &embed {
            if e.input_dim != d {
                return Err(DivError::Domain(format!(
                    "embedding expects input dim {}, sampler has {d}",
                    e.input_dim
                )));
            }
        }
        Ok(MiPairSampler { d, rho, embed })
    }

    /// Output dimension of one (x, y) row.
    pub fn pair_dim(&self) -> usize {
        2 * self.embed.as_ref().map(|e| e.target_dim).unwrap_or(self.d)
    }

    fn draw_joint(&self, n: usize, rng: &mut ChaCha8Rng) -> (SampleMatrix, SampleMatrix) {
        let mut x = SampleMatrix::zeros(n, self.d);
        let mut y = SampleMatrix::zeros(n, self.d);
        let cross = (1.0 - self.rho * self.rho).sqrt();
        for i in 0..n {
            let (xr, yr) = (i, i);
            for j in 0..self.d {
                let z1: f64 = rng.sample(StandardNormal);
                let z2: f64 = rng.sample(StandardNormal);
                x.row_mut(xr)[j] = z1;
                y.row_mut(yr)[j] = self.rho * z1 + cross * z2;
            }
        }
        (x, y)
    }

    fn assemble(&self, x: &SampleMatrix, y: &SampleMatrix, perm: Option<&[usize]>) -> SampleMatrix {
        let n = x.rows;
        let half = self.embed.as_ref().map(|e| e.target_dim).unwrap_or(self.d);
        let mut out = SampleMatrix::zeros(n, 2 * half);
        let mut buf = vec![0.0; half];
        for i in 0..n {
            let yi = perm.map(|p| p[i]).unwrap_or(i);
            let row = out.row_mut(i);
            match &self.embed {
                Some(e) => {
                    e.apply(x.row(i), &mut buf);
                    row[..half].copy_from_slice(&buf);
                    e.apply(y.row(yi), &mut buf);
                    row[half..].copy_from_slice(&buf);
                }
                None => {
                    row[..half].copy_from_slice(x.row(i));
                    row[half..].copy_from_slice(y.row(yi));
                }
            }
        }
        out
    }

    /// Draws a joint batch and an independent product batch (fresh joint draw
    /// with the y-rows permuted uniformly).
    pub fn sample_pairs(
        &self,
        n: usize,
        rng: &mut ChaCha8Rng,
        perm_rng: &mut ChaCha8Rng,
    ) -> Result<(SampleMatrix, SampleMatrix)> {
        if n < 2 {
            return Err(DivError::Domain("need n >= 2 pair samples".into()));
        }
        let (xj, yj) = self.draw_joint(n, rng);
        let joint = self.assemble(&xj, &yj, None);
        let (xp, yp) = self.draw_joint(n, rng);
        let perm = random_permutation(n, perm_rng);
        let product = self.assemble(&xp, &yp, Some(&perm));
        Ok((joint, product))
    }

    /// Gaussian specs of the joint and product measures (before embedding),
    /// for oracle computations.
    pub fn joint_product_specs(&self) -> (GaussianSpec, GaussianSpec) {
        let d2 = 2 * self.d;
        let mut cov = vec![0.0; d2 * d2];
        for i in 0..d2 {
            cov[i * d2 + i] = 1.0;
        }
        for j in 0..self.d {
            cov[j * d2 + (self.d + j)] = self.rho;
            cov[(self.d + j) * d2 + j] = self.rho;
        }
        let joint = GaussianSpec { mean: vec![0.0; d2], cov: crate::divergence::Covariance::Full(cov) };
        let product = GaussianSpec::standard(d2);
        (joint, product)
    }
}

// ---------------------------------------------------------------------------
// MNIST IDX
// ---------------------------------------------------------------------------

pub const IMAGE_SIDE: usize = 28;
pub const IMAGE_PIXELS: usize = IMAGE_SIDE * IMAGE_SIDE;

/// A batch of 28x28 images with pixel values in [0, 1], row-major.
#[derive(Debug, Clone)]
pub struct ImageBatch {
    pub n: usize,
    pub pixels: Vec<f64>,
    pub labels: Option<Vec<u8>>,
}

impl ImageBatch {
    pub fn image(&self, i: usize) -> &[f64] {
        &self.pixels[i * IMAGE_PIXELS..(i + 1) * IMAGE_PIXELS]
    }
}

fn read_u32_be(bytes: &[u8], at: usize) -> Result<u32> {
    let slice = bytes
        .get(at..at + 4)
        .ok_or_else(|| DivError::Format("file truncated".into()))?;
    Ok(u32::from_be_bytes([slice[0], slice[1], slice[2], slice[3]]))
}

/// Loads the IDX image/label pair. Magic numbers 0x00000803 / 0x00000801,
/// 28x28 images, raw bytes scaled by 1/255.
pub fn mnist_load(images_path: &Path, labels_path: &Path) -> Result<ImageBatch> {
    let mut img_bytes = Vec::new();
    std::fs::File::open(images_path)?.read_to_end(&mut img_bytes)?;
    let magic = read_u32_be(&img_bytes, 0)?;
    if magic != 0x0000_0803 {
        return Err(DivError::Format(format!("bad image magic {magic:#010x}")));
    }
    let n = read_u32_be(&img_bytes, 4)? as usize;
    let rows = read_u32_be(&img_bytes, 8)? as usize;
    let cols = read_u32_be(&img_bytes, 12)? as usize;
    if rows != IMAGE_SIDE || cols != IMAGE_SIDE {
        return Err(DivError::Format(format!("expected 28x28 images, got {rows}x{cols}")));
    }
    let expected = 16 + n * IMAGE_PIXELS;
    if img_bytes.len() < expected {
        return Err(DivError::Format(format!(
            "image file has {} bytes, need {expected}",
            img_bytes.len()
        )));
    }
    let pixels: Vec<f64> = img_bytes[16..expected].iter().map(|&b| b as f64 / 255.0).collect();

    let mut lbl_bytes = Vec::new();
    std::fs::File::open(labels_path)?.read_to_end(&mut lbl_bytes)?;
    let magic = read_u32_be(&lbl_bytes, 0)?;
    if magic != 0x0000_0801 {
        return Err(DivError::Format(format!("bad label magic {magic:#010x}")));
    }
    let ln = read_u32_be(&lbl_bytes, 4)? as usize;
    if ln != n {
        return Err(DivError::Format(format!("{n} images but {ln} labels")));
    }
    if lbl_bytes.len() < 8 + n {
        return Err(DivError::Format("label file truncated".into()));
    }
    let labels = lbl_bytes[8..8 + n].to_vec();
    Ok(ImageBatch { n, pixels, labels: Some(labels) })
}

/// Translates one image by (dx, dy) pixels with periodic boundary conditions.
pub fn translate_image(img: &[f64], dx: i64, dy: i64) -> Vec<f64> {
    let side = IMAGE_SIDE as i64;
    let mut out = vec![0.0; IMAGE_PIXELS];
    for r in 0..side {
        let src_r = (r - dy).rem_euclid(side);
        for c in 0..side {
            let src_c = (c - dx).rem_euclid(side);
            out[(r * side + c) as usize] = img[(src_r * side + src_c) as usize];
        }
    }
    out
}

/// Shifts every image by iid N(0, sigma^2) offsets in x and y, rounded to the
/// nearest pixel, wrapping periodically.
pub fn random_translate(batch: &ImageBatch, sigma: f64, rng: &mut ChaCha8Rng) -> ImageBatch {
    let mut pixels = Vec::with_capacity(batch.pixels.len());
    for i in 0..batch.n {
        let dx: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
        let dy: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
        pixels.extend(translate_image(batch.image(i), dx.round() as i64, dy.round() as i64));
    }
    ImageBatch { n: batch.n, pixels, labels: batch.labels.clone() }
}

// ---------------------------------------------------------------------------
// Inverse normal CDF (Acklam's rational approximation, ~1e-9 accurate)
// ---------------------------------------------------------------------------

pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile needs p in (0,1), got {p}");
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -normal_quantile(1.0 - p)
    }
}
