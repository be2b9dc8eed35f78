//! Seeded generators for the factor-analysis model and the ring and
//! Gaussian-cluster constructions.
//!
//! Every generator draws from [`SeededRng`] (Xoshiro256++ seeded through
//! SplitMix64, normals by the Marsaglia polar method), so output is a pure
//! function of the inputs and the seed on every platform.

use std::f64::consts::TAU;

use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Dataset;

/// Deterministic random source used by every generator.
#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: Xoshiro256PlusPlus,
    spare: Option<f64>,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng {
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn uniform_range(&mut self, low: f64, high: f64) -> f64 {
        low + (high - low) * self.uniform()
    }

    /// Uniform integer in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    /// Standard normal via the Marsaglia polar method.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }

    pub fn normal_with(&mut self, mean: f64, std_dev: f64) -> f64 {
        mean + std_dev * self.normal()
    }
}

/// Samples with ground-truth cluster labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    data: Dataset,
    labels: Vec<usize>,
}

impl LabeledDataset {
    pub fn new(data: Dataset, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != data.n_samples() {
            return Err(Error::LengthMismatch {
                left: data.n_samples(),
                right: labels.len(),
            });
        }
        Ok(LabeledDataset { data, labels })
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn into_parts(self) -> (Dataset, Vec<usize>) {
        (self.data, self.labels)
    }
}

/// A target set with labels plus its background sets.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticProtocol {
    pub target: LabeledDataset,
    pub backgrounds: Vec<Dataset>,
}

/// Factor-analysis model: backgrounds live on a `k`-dimensional subspace
/// `U_b`, targets on `[U_b u_s]`, both plus unit isotropic noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerativeModelSpec {
    pub dim: usize,
    pub k: usize,
    /// Variances of the `k` background coefficients.
    pub sigma_b: Vec<f64>,
    /// Variances of the `k + 1` target coefficients; the last one drives `u_s`.
    pub sigma_x: Vec<f64>,
    pub seed: u64,
}

impl GenerativeModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.dim < self.k + 1 {
            return Err(Error::InvalidSpec(format!(
                "need 1 <= k < dim (k = {}, dim = {})",
                self.k, self.dim
            )));
        }
        if self.sigma_b.len() != self.k || self.sigma_x.len() != self.k + 1 {
            return Err(Error::InvalidSpec(format!(
                "expected {} background and {} target variances",
                self.k,
                self.k + 1
            )));
        }
        if self
            .sigma_b
            .iter()
            .chain(&self.sigma_x)
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err(Error::InvalidSpec("variances must be finite and non-negative".into()));
        }
        // population eigenvalues along u_i are (sx_i + 1) and (sb_i + 1); along
        // u_s they are (sx_{k+1} + 1) and 1
        let specific = self.sigma_x[self.k] + 1.0;
        for i in 0..self.k {
            let shared = (self.sigma_x[i] + 1.0) / (self.sigma_b[i] + 1.0);
            if specific <= shared {
                return Err(Error::GapViolated(format!(
                    "direction {} has ratio {shared} >= specific ratio {specific}",
                    i + 1
                )));
            }
        }
        Ok(())
    }
}

/// Output of [`gen_generative`].
#[derive(Debug, Clone, PartialEq)]
pub struct GenerativeSample {
    /// Target samples; all carry label 0.
    pub target: LabeledDataset,
    pub background: Dataset,
    /// Shared subspace basis `U_b` (dim x k).
    pub shared: Array2<f64>,
    /// The target-specific direction `u_s`.
    pub planted: Array1<f64>,
}

/// Orthonormal `rows x cols` frame from Gram-Schmidt on a Gaussian matrix.
/// Columns come out with positive `R` diagonal, which fixes their signs.
fn orthonormal_frame(rng: &mut SeededRng, rows: usize, cols: usize) -> Array2<f64> {
    loop {
        let mut q = Array2::from_shape_simple_fn((rows, cols), || rng.normal());
        let mut ok = true;
        for j in 0..cols {
            for i in 0..j {
                let proj = q.column(i).dot(&q.column(j));
                let qi = q.column(i).to_owned();
                q.column_mut(j).scaled_add(-proj, &qi);
            }
            let norm = q.column(j).dot(&q.column(j)).sqrt();
            if norm < 1e-10 {
                ok = false;
                break;
            }
            q.column_mut(j).mapv_inplace(|v| v / norm);
        }
        if ok {
            return q;
        }
    }
}

/// Draws `m` target and `n` background samples from the factor model.
pub fn gen_generative(spec: &GenerativeModelSpec, m: usize, n: usize) -> Result<GenerativeSample> {
    spec.validate()?;
    if m == 0 || n == 0 {
        return Err(Error::EmptyDataset);
    }
    let (dim, k) = (spec.dim, spec.k);
    let mut rng = SeededRng::new(spec.seed);
    let frame = orthonormal_frame(&mut rng, dim, k + 1);
    let mean_x: Array1<f64> = (0..dim).map(|_| rng.uniform_range(-5.0, 5.0)).collect();
    let mean_y: Array1<f64> = (0..dim).map(|_| rng.uniform_range(-5.0, 5.0)).collect();
    let sd_b: Vec<f64> = spec.sigma_b.iter().map(|v| v.sqrt()).collect();
    let sd_x: Vec<f64> = spec.sigma_x.iter().map(|v| v.sqrt()).collect();

    let mut background = Array2::zeros((n, dim));
    for mut row in background.axis_iter_mut(Axis(0)) {
        row.assign(&mean_y);
        for (i, sd) in sd_b.iter().enumerate() {
            row.scaled_add(sd * rng.normal(), &frame.column(i));
        }
        row.mapv_inplace(|v| v + rng.normal());
    }
    let mut target = Array2::zeros((m, dim));
    for mut row in target.axis_iter_mut(Axis(0)) {
        row.assign(&mean_x);
        for (i, sd) in sd_x.iter().enumerate() {
            row.scaled_add(sd * rng.normal(), &frame.column(i));
        }
        row.mapv_inplace(|v| v + rng.normal());
    }

    Ok(GenerativeSample {
        target: LabeledDataset::new(Dataset::from_rows(target)?, vec![0; m])?,
        background: Dataset::from_rows(background)?,
        shared: frame.slice(ndarray::s![.., ..k]).to_owned(),
        planted: frame.column(k).to_owned(),
    })
}

/// `count` points whose consecutive coordinate pairs lie on circles of the
/// given radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleGroup {
    pub count: usize,
    pub radii: Vec<f64>,
}

impl CircleGroup {
    pub fn new(count: usize, radii: &[f64]) -> Self {
        CircleGroup {
            count,
            radii: radii.to_vec(),
        }
    }
}

fn circles_from(rng: &mut SeededRng, groups: &[CircleGroup], noise_var: f64) -> Result<LabeledDataset> {
    let pairs = groups.first().map(|g| g.radii.len()).unwrap_or(0);
    if pairs == 0 {
        return Err(Error::InvalidSpec("at least one group with one ring is required".into()));
    }
    if groups.iter().any(|g| g.radii.len() != pairs) {
        return Err(Error::InvalidSpec("every group needs the same number of rings".into()));
    }
    if let Some(r) = groups.iter().flat_map(|g| &g.radii).find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidSpec(format!("ring radius must be positive, got {r}")));
    }
    if !(noise_var >= 0.0 && noise_var.is_finite()) {
        return Err(Error::InvalidSpec(format!("noise variance must be non-negative, got {noise_var}")));
    }
    let total: usize = groups.iter().map(|g| g.count).sum();
    if total == 0 {
        return Err(Error::EmptyDataset);
    }
    let sd = noise_var.sqrt();
    let mut rows = Array2::zeros((total, 2 * pairs));
    let mut labels = Vec::with_capacity(total);
    let mut next = 0;
    for (label, group) in groups.iter().enumerate() {
        for _ in 0..group.count {
            for (p, r) in group.radii.iter().enumerate() {
                let theta = TAU * rng.uniform();
                let (s, c) = theta.sin_cos();
                let (ex, ey) = if sd > 0.0 { (sd * rng.normal(), sd * rng.normal()) } else { (0.0, 0.0) };
                rows[[next, 2 * p]] = r * c + ex;
                rows[[next, 2 * p + 1]] = r * s + ey;
            }
            labels.push(label);
            next += 1;
        }
    }
    LabeledDataset::new(Dataset::from_rows(rows)?, labels)
}

/// Ring data: points uniform in angle on each circle, plus isotropic
/// Gaussian noise of variance `noise_var`. Labels are group indices.
pub fn gen_circles(groups: &[CircleGroup], noise_var: f64, seed: u64) -> Result<LabeledDataset> {
    circles_from(&mut SeededRng::new(seed), groups, noise_var)
}

/// Noise variance used by the ring protocols.
pub const RING_NOISE: f64 = 0.1;

fn ring_protocol(target: &[CircleGroup], backgrounds: &[CircleGroup], noise_var: f64, seed: u64) -> Result<SyntheticProtocol> {
    let mut rng = SeededRng::new(seed);
    let target = circles_from(&mut rng, target, noise_var)?;
    let backgrounds = backgrounds
        .iter()
        .map(|g| circles_from(&mut rng, std::slice::from_ref(g), noise_var).map(|l| l.into_parts().0))
        .collect::<Result<_>>()?;
    Ok(SyntheticProtocol { target, backgrounds })
}

/// 4-D rings: target clusters on radii 1 and 6 in the first pair (150 each)
/// with radius 10 in the second; one background of 150 on radii (4, 10).
pub fn two_ring_protocol(noise_var: f64, seed: u64) -> Result<SyntheticProtocol> {
    ring_protocol(
        &[CircleGroup::new(150, &[1.0, 10.0]), CircleGroup::new(150, &[6.0, 10.0])],
        &[CircleGroup::new(150, &[4.0, 10.0])],
        noise_var,
        seed,
    )
}

/// 6-D rings: target clusters on (1, 20, 12) and (6, 20, 12); backgrounds
/// on (3, 3, 12) and (3, 20, 3); 150 points per cluster or set.
pub fn three_ring_protocol(noise_var: f64, seed: u64) -> Result<SyntheticProtocol> {
    ring_protocol(
        &[
            CircleGroup::new(150, &[1.0, 20.0, 12.0]),
            CircleGroup::new(150, &[6.0, 20.0, 12.0]),
        ],
        &[CircleGroup::new(150, &[3.0, 3.0, 12.0]), CircleGroup::new(150, &[3.0, 20.0, 3.0])],
        noise_var,
        seed,
    )
}

/// How the spread of a [`GaussianBlock`] is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spread {
    /// The number is the per-coordinate standard deviation.
    #[default]
    StdDev,
    /// The number is the per-coordinate variance.
    Variance,
}

/// `width` coordinates drawn independently from `N(mean, spread)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianBlock {
    pub width: usize,
    pub mean: f64,
    pub spread: f64,
}

const fn block(mean: f64, spread: f64) -> GaussianBlock {
    GaussianBlock { width: 5, mean, spread }
}

/// Target clusters and backgrounds built from independent Gaussian blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianClusterSpec {
    pub target_clusters: Vec<Vec<GaussianBlock>>,
    pub backgrounds: Vec<Vec<GaussianBlock>>,
    pub samples_per_set: usize,
    pub spread: Spread,
}

impl Default for GaussianClusterSpec {
    /// 15-D, three blocks of five: the target clusters differ only in the
    /// first block, and each background carries high spread in exactly one
    /// of the two nuisance blocks.
    fn default() -> Self {
        GaussianClusterSpec {
            target_clusters: vec![
                vec![block(0.0, 1.0), block(1.0, 10.0), block(1.0, 20.0)],
                vec![block(8.0, 2.0), block(1.0, 10.0), block(1.0, 20.0)],
            ],
            backgrounds: vec![
                vec![block(1.0, 2.0), block(1.0, 10.0), block(1.0, 2.0)],
                vec![block(1.0, 2.0), block(1.0, 2.0), block(1.0, 20.0)],
            ],
            samples_per_set: 150,
            spread: Spread::StdDev,
        }
    }
}

impl GaussianClusterSpec {
    /// The default layout with spreads read as variances.
    pub fn literal_covariance() -> Self {
        GaussianClusterSpec {
            spread: Spread::Variance,
            ..Self::default()
        }
    }

    fn dim_of(blocks: &[GaussianBlock]) -> usize {
        blocks.iter().map(|b| b.width).sum()
    }

    fn validate(&self) -> Result<usize> {
        let dim = self
            .target_clusters
            .first()
            .map(|c| Self::dim_of(c))
            .ok_or_else(|| Error::InvalidSpec("no target clusters".into()))?;
        if self.samples_per_set == 0 {
            return Err(Error::EmptyDataset);
        }
        if dim == 0 {
            return Err(Error::InvalidSpec("zero-dimensional layout".into()));
        }
        for set in self.target_clusters.iter().chain(&self.backgrounds) {
            if Self::dim_of(set) != dim {
                return Err(Error::InvalidSpec("every set needs the same total width".into()));
            }
            if set.iter().any(|b| !(b.spread >= 0.0 && b.spread.is_finite() && b.mean.is_finite())) {
                return Err(Error::InvalidSpec("block spread must be finite and non-negative".into()));
            }
        }
        Ok(dim)
    }

    fn std_dev(&self, spread: f64) -> f64 {
        match self.spread {
            Spread::StdDev => spread,
            Spread::Variance => spread.sqrt(),
        }
    }
}

fn fill_blocks(rng: &mut SeededRng, spec: &GaussianClusterSpec, blocks: &[GaussianBlock], rows: &mut Array2<f64>, start: usize) {
    for i in start..start + spec.samples_per_set {
        let mut col = 0;
        for b in blocks {
            let sd = spec.std_dev(b.spread);
            for _ in 0..b.width {
                rows[[i, col]] = rng.normal_with(b.mean, sd);
                col += 1;
            }
        }
    }
}

/// Gaussian-cluster target (labels = cluster index) with its backgrounds.
pub fn gen_gaussian_clusters(spec: &GaussianClusterSpec, seed: u64) -> Result<SyntheticProtocol> {
    let dim = spec.validate()?;
    let mut rng = SeededRng::new(seed);
    let per = spec.samples_per_set;
    let mut target = Array2::zeros((per * spec.target_clusters.len(), dim));
    let mut labels = Vec::with_capacity(target.nrows());
    for (c, blocks) in spec.target_clusters.iter().enumerate() {
        fill_blocks(&mut rng, spec, blocks, &mut target, c * per);
        labels.extend(std::iter::repeat_n(c, per));
    }
    let mut backgrounds = Vec::with_capacity(spec.backgrounds.len());
    for blocks in &spec.backgrounds {
        let mut rows = Array2::zeros((per, dim));
        fill_blocks(&mut rng, spec, blocks, &mut rows, 0);
        backgrounds.push(Dataset::from_rows(rows)?);
    }
    Ok(SyntheticProtocol {
        target: LabeledDataset::new(Dataset::from_rows(target)?, labels)?,
        backgrounds,
    })
}
