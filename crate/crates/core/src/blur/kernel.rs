use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MAX_KERNEL_SIZE: usize = 31;

/// A square, odd-sized, non-negative kernel whose weights sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKernel", into = "RawKernel")]
pub struct BlurKernel {
    size: usize,
    weights: Vec<f32>,
}

#[derive(Serialize, Deserialize)]
struct RawKernel {
    size: usize,
    weights: Vec<f32>,
}

impl TryFrom<RawKernel> for BlurKernel {
    type Error = Error;

    fn try_from(raw: RawKernel) -> Result<Self> {
        BlurKernel::new(raw.size, raw.weights)
    }
}

impl From<BlurKernel> for RawKernel {
    fn from(k: BlurKernel) -> Self {
        RawKernel {
            size: k.size,
            weights: k.weights,
        }
    }
}

pub(crate) fn check_size(size: usize) -> Result<()> {
    if size % 2 == 1 && (1..=MAX_KERNEL_SIZE).contains(&size) {
        Ok(())
    } else {
        Err(Error::InvalidSize(size))
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidSigma(sigma))
    }
}

impl BlurKernel {
    /// Validates size, non-negativity and normalization (sum within 1e-6 of 1).
    pub fn new(size: usize, weights: Vec<f32>) -> Result<Self> {
        check_size(size)?;
        if weights.len() != size * size {
            return Err(Error::CorruptPool(format!(
                "kernel of size {size} needs {} weights, got {}",
                size * size,
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::CorruptPool("negative or non-finite weight".into()));
        }
        let sum = weight_sum(&weights);
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::UnnormalizedKernel { index: 0, sum });
        }
        Ok(BlurKernel { size, weights })
    }

    /// Unit impulse of the given size.
    pub fn delta(size: usize) -> Result<Self> {
        check_size(size)?;
        let mut weights = vec![0.0; size * size];
        weights[size * size / 2] = 1.0;
        Ok(BlurKernel { size, weights })
    }

    /// Uniform `size x size` average.
    pub fn box_filter(size: usize) -> Result<Self> {
        check_size(size)?;
        let n = size * size;
        Ok(Self::from_f64(size, vec![1.0; n]))
    }

    /// Normalizes non-negative `f64` weights and stores them as `f32`.
    pub(crate) fn from_f64(size: usize, weights: Vec<f64>) -> Self {
        let sum: f64 = weights.iter().sum();
        BlurKernel {
            size,
            weights: weights.iter().map(|w| (w / sum) as f32).collect(),
        }
    }

    pub(crate) fn from_parts_unchecked(size: usize, weights: Vec<f32>) -> Self {
        BlurKernel { size, weights }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn radius(&self) -> usize {
        self.size / 2
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    /// Weight at row `dy`, column `dx` offsets from the centre.
    pub fn at(&self, dy: isize, dx: isize) -> f32 {
        let r = self.radius() as isize;
        self.weights[((dy + r) as usize) * self.size + (dx + r) as usize]
    }

    pub fn sum(&self) -> f64 {
        weight_sum(&self.weights)
    }
}

pub(crate) fn weight_sum(weights: &[f32]) -> f64 {
    weights.iter().map(|&w| w as f64).sum()
}

/// Isotropic Gaussian sampled at integer offsets and normalized.
pub fn gen_iso_kernel(size: usize, sigma: f64) -> Result<BlurKernel> {
    check_size(size)?;
    check_sigma(sigma)?;
    let r = (size / 2) as isize;
    let mut w = Vec::with_capacity(size * size);
    for y in -r..=r {
        for x in -r..=r {
            let d2 = (x * x + y * y) as f64;
            w.push((-d2 / (2.0 * sigma * sigma)).exp());
        }
    }
    Ok(BlurKernel::from_f64(size, w))
}

/// Bivariate Gaussian with covariance `R(theta) diag(sx^2, sy^2) R(theta)^T`,
/// where `x` runs along columns and `y` along rows.
pub fn gen_aniso_kernel(size: usize, sigma_x: f64, sigma_y: f64, theta: f64) -> Result<BlurKernel> {
    check_size(size)?;
    check_sigma(sigma_x)?;
    check_sigma(sigma_y)?;
    if !theta.is_finite() {
        return Err(Error::InvalidSigma(theta));
    }
    let (s, c) = theta.sin_cos();
    let (vx, vy) = (sigma_x * sigma_x, sigma_y * sigma_y);
    // Inverse covariance = R diag(1/vx, 1/vy) R^T.
    let a = c * c / vx + s * s / vy;
    let b = c * s * (1.0 / vx - 1.0 / vy);
    let d = s * s / vx + c * c / vy;
    let r = (size / 2) as isize;
    let mut w = Vec::with_capacity(size * size);
    for y in -r..=r {
        for x in -r..=r {
            let (x, y) = (x as f64, y as f64);
            let q = a * x * x + 2.0 * b * x * y + d * y * y;
            w.push((-0.5 * q).exp());
        }
    }
    Ok(BlurKernel::from_f64(size, w))
}
