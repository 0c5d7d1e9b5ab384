//! Synthetic concentric-ring images and reproducible Gaussian noise.
//!
//! Noise is generated from a counter-based SplitMix64 stream: the `k`-th
//! 64-bit word for seed `s` is `mix64(s + (k + 1) * 0x9E3779B97F4A7C15)`
//! (wrapping arithmetic), where `mix64` is the SplitMix64 finalizer
//!
//! ```text
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! z =  z ^ (z >> 31)
//! ```
//!
//! Words `2m` and `2m + 1` feed one Box-Muller pair:
//! `u1 = ((w0 >> 11) + 1) * 2^-53` in `(0, 1]`, `u2 = (w1 >> 11) * 2^-53`,
//! `r = sqrt(-2 ln u1)`, giving `r cos(2 pi u2)` for pixel `2m` and
//! `r sin(2 pi u2)` for pixel `2m + 1` in row-major order. Transcendentals
//! come from `libm` so every platform produces the same bits.

use thiserror::Error;

use crate::grid::{GridError, ScalarGrid};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("ring radii must be positive and strictly ascending")]
    BadRadii,
    #[error("expected {expected} intensities (one per annulus plus background), found {found}")]
    IntensityCount { expected: usize, found: usize },
    #[error("ring intensities must lie in [0, 1], found {0}")]
    IntensityRange(f64),
    #[error("noise variance must be finite and >= 0, found {0}")]
    NegativeVariance(f64),
}

/// Geometry of a concentric-ring phantom.
#[derive(Debug, Clone, PartialEq)]
pub struct RingSpec {
    pub rows: usize,
    pub cols: usize,
    /// Center in pixel coordinates `(row, col)`, zero-based.
    pub center: (f64, f64),
    /// Ascending ring boundaries in pixels.
    pub radii: Vec<f64>,
    /// `intensities[t]` fills the `t`-th annulus counted from the center; the
    /// last entry is the background beyond the outermost radius.
    pub intensities: Vec<f64>,
}

/// Version tag of the default ring geometry.
pub const DEFAULT_RINGS_VERSION: u32 = 1;

const DEFAULT_SIZE: usize = 512;
const DEFAULT_RADII: [f64; 4] = [60.0, 110.0, 160.0, 210.0];
const DEFAULT_INTENSITIES: [f64; 5] = [0.15, 0.85, 0.15, 0.85, 0.15];

impl Default for RingSpec {
    /// 512x512, centered, radii {60, 110, 160, 210}, intensities alternating
    /// 0.15 / 0.85 starting at the center.
    fn default() -> Self {
        Self::default_sized(DEFAULT_SIZE, DEFAULT_SIZE)
    }
}

impl RingSpec {
    /// The default geometry scaled to a `rows x cols` image: radii shrink
    /// with `min(rows, cols) / 512`.
    pub fn default_sized(rows: usize, cols: usize) -> Self {
        let scale = rows.min(cols) as f64 / DEFAULT_SIZE as f64;
        Self {
            rows,
            cols,
            center: ((rows as f64 - 1.0) / 2.0, (cols as f64 - 1.0) / 2.0),
            radii: DEFAULT_RADII.iter().map(|r| r * scale).collect(),
            intensities: DEFAULT_INTENSITIES.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.rows == 0 || self.cols == 0 {
            return Err(GridError::EmptyDimensions {
                rows: self.rows,
                cols: self.cols,
            }
            .into());
        }
        let ascending = self.radii.windows(2).all(|w| w[0] < w[1]);
        let positive = self.radii.iter().all(|r| *r > 0.0 && r.is_finite());
        if !ascending || !positive {
            return Err(SynthError::BadRadii);
        }
        if self.intensities.len() != self.radii.len() + 1 {
            return Err(SynthError::IntensityCount {
                expected: self.radii.len() + 1,
                found: self.intensities.len(),
            });
        }
        if let Some(&bad) = self
            .intensities
            .iter()
            .find(|v| !(0.0..=1.0).contains(*v))
        {
            return Err(SynthError::IntensityRange(bad));
        }
        Ok(())
    }
}

/// Piecewise-constant ring image.
pub fn make_rings(spec: &RingSpec) -> Result<ScalarGrid, SynthError> {
    spec.validate()?;
    let (ci, cj) = spec.center;
    Ok(ScalarGrid::from_fn(spec.rows, spec.cols, |(i, j)| {
        let di = i as f64 - ci;
        let dj = j as f64 - cj;
        let dist = (di * di + dj * dj).sqrt();
        let annulus = spec.radii.iter().take_while(|&&r| dist >= r).count();
        spec.intensities[annulus]
    })?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub variance: f64,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            variance: 0.01,
            seed: 0,
        }
    }
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based SplitMix64: word `k` depends only on `(seed, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitMix64 {
    seed: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn word(&self, counter: u64) -> u64 {
        mix64(
            self.seed
                .wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)),
        )
    }

    /// Standard normal pair from words `2 * pair` and `2 * pair + 1`.
    pub fn gaussian_pair(&self, pair: u64) -> (f64, f64) {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        let w0 = self.word(2 * pair);
        let w1 = self.word(2 * pair + 1);
        let u1 = ((w0 >> 11) + 1) as f64 * SCALE;
        let u2 = (w1 >> 11) as f64 * SCALE;
        let r = (-2.0 * libm::log(u1)).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        (r * libm::cos(theta), r * libm::sin(theta))
    }

    /// The first `len` standard normal samples of the stream.
    pub fn gaussians(&self, len: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(len + 1);
        for pair in 0..len.div_ceil(2) as u64 {
            let (a, b) = self.gaussian_pair(pair);
            out.push(a);
            out.push(b);
        }
        out.truncate(len);
        out
    }
}

/// `u + sqrt(variance) * z` with `z` the seeded standard normal stream in
/// row-major order. The result is not clamped.
pub fn add_gaussian_noise(u: &ScalarGrid, spec: &NoiseSpec) -> Result<ScalarGrid, SynthError> {
    if !(spec.variance >= 0.0 && spec.variance.is_finite()) {
        return Err(SynthError::NegativeVariance(spec.variance));
    }
    if spec.variance == 0.0 {
        return Ok(u.clone());
    }
    let sigma = spec.variance.sqrt();
    let noise = SplitMix64::new(spec.seed).gaussians(u.len());
    let values = u
        .iter()
        .zip(noise)
        .map(|(v, z)| v + sigma * z)
        .collect();
    Ok(ScalarGrid::from_vec(u.rows(), u.cols(), values)?)
}
