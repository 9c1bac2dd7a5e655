//! Additive RGB Gaussian noise and signal-dependent sensor noise injected in
//! a simulated RAW domain.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::media::{
    demosaic_bilinear, linear_to_srgb, mosaic_rggb, srgb_to_linear, Frame, Plane, RawMosaic,
};
use crate::{Error, Result};

/// Zero-mean RGB Gaussian noise, either i.i.d. per channel or correlated
/// across channels through a full 3x3 covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum GaussianNoiseParams {
    PerChannelIid { sigma: f64 },
    FullCovariance { cov: [[f64; 3]; 3] },
}

impl GaussianNoiseParams {
    /// `sigma^2` on the diagonal and `rho * sigma^2` elsewhere. PSD for
    /// `rho` in `[-0.5, 1]`.
    pub fn correlated(sigma: f64, rho: f64) -> Self {
        let v = sigma * sigma;
        let o = rho * v;
        GaussianNoiseParams::FullCovariance {
            cov: [[v, o, o], [o, v, o], [o, o, v]],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GaussianNoiseParams::PerChannelIid { sigma } => {
                if sigma.is_finite() && *sigma >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidNoise(format!("sigma {sigma} must be finite and >= 0")))
                }
            }
            GaussianNoiseParams::FullCovariance { cov } => cholesky_psd(cov).map(|_| ()),
        }
    }
}

/// Lower-triangular `L` with `L L^T = cov` for a symmetric positive
/// semi-definite `cov`. Zero pivots are allowed when the rest of their column
/// vanishes.
#[allow(clippy::needless_range_loop)]
pub fn cholesky_psd(cov: &[[f64; 3]; 3]) -> Result<[[f64; 3]; 3]> {
    let scale = cov.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if cov.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonPsdCovariance);
    }
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    for i in 0..3 {
        for j in 0..i {
            if (cov[i][j] - cov[j][i]).abs() > tol.max(1e-12 * scale) {
                return Err(Error::NonPsdCovariance);
            }
        }
    }
    let mut l = [[0.0f64; 3]; 3];
    for j in 0..3 {
        let mut d = cov[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        if d < -1e-9 * scale.max(1e-300) {
            return Err(Error::NonPsdCovariance);
        }
        if d <= tol {
            // Degenerate direction: the remaining column must vanish too.
            for i in j + 1..3 {
                let mut s = cov[i][j];
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                if s.abs() > 1e-9 * scale.max(1e-300) {
                    return Err(Error::NonPsdCovariance);
                }
            }
            continue;
        }
        let d = d.sqrt();
        l[j][j] = d;
        for i in j + 1..3 {
            let mut s = cov[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / d;
        }
    }
    Ok(l)
}

pub fn add_gaussian_noise(f: &Frame, p: &GaussianNoiseParams, rng: &mut impl Rng) -> Result<Frame> {
    p.validate()?;
    let mut data = f.data().to_vec();
    match p {
        GaussianNoiseParams::PerChannelIid { sigma } => {
            if *sigma == 0.0 {
                return Ok(f.clone());
            }
            let s = *sigma as f32;
            for v in data.iter_mut() {
                let n: f32 = rng.sample(StandardNormal);
                *v += s * n;
            }
        }
        GaussianNoiseParams::FullCovariance { cov } => {
            let l = cholesky_psd(cov)?.map(|row| row.map(|v| v as f32));
            for px in data.chunks_exact_mut(3) {
                let z: [f32; 3] = [
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                ];
                px[0] += l[0][0] * z[0];
                px[1] += l[1][0] * z[0] + l[1][1] * z[1];
                px[2] += l[2][0] * z[0] + l[2][1] * z[1] + l[2][2] * z[2];
            }
        }
    }
    Ok(Frame::from_clamped(f.height(), f.width(), data))
}

/// Heteroscedastic sensor noise: a RAW site with linear value `x` receives
/// zero-mean Gaussian noise of variance `shot_gain * x + read_var`
/// (a Gaussian stand-in for Poisson shot noise plus read noise).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorNoiseParams {
    pub shot_gain: f64,
    pub read_var: f64,
}

impl SensorNoiseParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("shot_gain", self.shot_gain), ("read_var", self.read_var)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidNoise(format!("{name} {v} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.shot_gain == 0.0 && self.read_var == 0.0
    }
}

/// The RAW leg of [`add_sensor_noise`]: returns the clean mosaic and the
/// noisy mosaic (clamped at zero) so the noise can be measured directly.
pub fn sensor_noise_raw(
    f: &Frame,
    p: &SensorNoiseParams,
    rng: &mut impl Rng,
) -> Result<(RawMosaic, RawMosaic)> {
    p.validate()?;
    let clean = mosaic_rggb(&srgb_to_linear(f))?;
    if p.is_zero() {
        return Ok((clean.clone(), clean));
    }
    let (h, w) = clean.dims();
    let (a, b) = (p.shot_gain as f32, p.read_var as f32);
    let noisy: Vec<f32> = clean
        .plane()
        .data()
        .iter()
        .map(|&x| {
            let n: f32 = rng.sample(StandardNormal);
            (x + (a * x + b).sqrt() * n).max(0.0)
        })
        .collect();
    let noisy = RawMosaic::new(Plane::new(h, w, noisy)?)?;
    Ok((clean, noisy))
}

/// sRGB -> linear -> RGGB mosaic -> heteroscedastic noise -> bilinear
/// demosaic -> sRGB.
pub fn add_sensor_noise(f: &Frame, p: &SensorNoiseParams, rng: &mut impl Rng) -> Result<Frame> {
    let (_, noisy) = sensor_noise_raw(f, p, rng)?;
    Ok(linear_to_srgb(&demosaic_bilinear(&noisy)))
}
