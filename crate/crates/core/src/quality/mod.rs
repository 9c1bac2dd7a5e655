//! BRISQUE-style natural scene statistics: MSCN coefficients, (asymmetric)
//! generalized Gaussian fits and a loadable linear scorer.

mod fit;
mod model;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::media::{reflect_index, Frame, Plane};
use crate::resample::{resize_plane, Filter};
use crate::{Error, Result};

pub use fit::{fit_aggd, fit_ggd, ALPHA_MAX, ALPHA_MIN, MIN_FIT_SAMPLES};
pub use model::{score, LinearModel};

pub const FEATURE_COUNT: usize = 36;
pub const MIN_MSCN_DIM: usize = 16;
pub const MIN_FEATURE_DIM: usize = 32;
/// Stabilizer in the MSCN denominator (1 on the 8-bit scale).
pub const MSCN_C: f64 = 1.0 / 255.0;

const WINDOW: usize = 7;
const WINDOW_SIGMA: f64 = 7.0 / 6.0;

fn window() -> &'static [f64; WINDOW * WINDOW] {
    static W: OnceLock<[f64; WINDOW * WINDOW]> = OnceLock::new();
    W.get_or_init(|| {
        let r = (WINDOW / 2) as f64;
        let mut w: [f64; WINDOW * WINDOW] = std::array::from_fn(|i| {
            let (y, x) = ((i / WINDOW) as f64 - r, (i % WINDOW) as f64 - r);
            (-(x * x + y * y) / (2.0 * WINDOW_SIGMA * WINDOW_SIGMA)).exp()
        });
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= s);
        w
    })
}

/// Mean-subtracted contrast-normalized coefficients of a single-channel image
/// under a 7x7 Gaussian window with reflect padding.
pub fn mscn(gray: &Plane) -> Result<Plane> {
    let (h, w) = gray.dims();
    if h < MIN_MSCN_DIM || w < MIN_MSCN_DIM {
        return Err(Error::FrameTooSmall {
            height: h,
            width: w,
            min: MIN_MSCN_DIM,
        });
    }
    let win = window();
    let r = (WINDOW / 2) as isize;
    let src = gray.data();
    let mut out = Vec::with_capacity(h * w);
    let mut nb = [0.0f64; WINDOW * WINDOW];
    for y in 0..h {
        for x in 0..w {
            let centre = src[y * w + x] as f64;
            for dy in -r..=r {
                let sy = reflect_index(y as isize + dy, h);
                for dx in -r..=r {
                    let sx = reflect_index(x as isize + dx, w);
                    nb[((dy + r) as usize) * WINDOW + (dx + r) as usize] = src[sy * w + sx] as f64;
                }
            }
            // I - mu = sum w (I - I_k): exactly zero on flat neighbourhoods.
            let diff: f64 = win.iter().zip(&nb).map(|(wk, v)| wk * (centre - v)).sum();
            let mu = centre - diff;
            let var: f64 = win.iter().zip(&nb).map(|(wk, v)| wk * (v - mu) * (v - mu)).sum();
            out.push((diff / (var.sqrt() + MSCN_C)) as f32);
        }
    }
    Plane::new(h, w, out)
}

/// 36 NSS features: per scale `[ggd α, ggd σ²]` followed by
/// `[α, σ_l², σ_r², η]` for the H, V, D1 and D2 neighbour products.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct BrisqueFeatures {
    values: Vec<f64>,
}

impl BrisqueFeatures {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() != FEATURE_COUNT {
            return Err(Error::ModelShapeMismatch(format!(
                "expected {FEATURE_COUNT} features, got {}",
                values.len()
            )));
        }
        Ok(BrisqueFeatures { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column names in feature order, e.g. `s1_ggd_alpha`, `s2_d2_eta`.
    pub fn names() -> Vec<String> {
        let mut names = Vec::with_capacity(FEATURE_COUNT);
        for s in 1..=2 {
            names.push(format!("s{s}_ggd_alpha"));
            names.push(format!("s{s}_ggd_var"));
            for o in ["h", "v", "d1", "d2"] {
                for p in ["alpha", "var_l", "var_r", "eta"] {
                    names.push(format!("s{s}_{o}_{p}"));
                }
            }
        }
        names
    }

    /// The vector produced for a frame without any contrast.
    pub fn degenerate() -> Self {
        let mut values = Vec::with_capacity(FEATURE_COUNT);
        for _ in 0..2 {
            values.extend([ALPHA_MAX, 0.0]);
            for _ in 0..4 {
                values.extend([ALPHA_MAX, 0.0, 0.0, 0.0]);
            }
        }
        BrisqueFeatures { values }
    }
}

impl TryFrom<Vec<f64>> for BrisqueFeatures {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::from_values(values)
    }
}

impl From<BrisqueFeatures> for Vec<f64> {
    fn from(f: BrisqueFeatures) -> Self {
        f.values
    }
}

fn scale_features(gray: &Plane, out: &mut Vec<f64>) -> Result<()> {
    let m = mscn(gray)?;
    let (h, w) = m.dims();
    let d = m.data();
    let coeffs: Vec<f64> = d.iter().map(|&v| v as f64).collect();
    match fit::fit_ggd_unchecked(&coeffs) {
        Ok((a, v)) => out.extend([a, v]),
        Err(Error::DegenerateSamples) => out.extend([ALPHA_MAX, 0.0]),
        Err(e) => return Err(e),
    }
    // (dy, dx) offsets of the neighbour: H, V, D1 (down-right), D2 (down-left).
    for (dy, dx) in [(0isize, 1isize), (1, 0), (1, 1), (1, -1)] {
        let mut prods = Vec::with_capacity(h * w);
        for y in 0..h - dy as usize {
            let x0 = if dx < 0 { 1 } else { 0 };
            let x1 = if dx > 0 { w - 1 } else { w };
            for x in x0..x1 {
                let n = (y + dy as usize) * w + (x as isize + dx) as usize;
                prods.push(d[y * w + x] as f64 * d[n] as f64);
            }
        }
        match fit::fit_aggd_unchecked(&prods) {
            Ok((a, l, r, eta)) => out.extend([a, l, r, eta]),
            Err(Error::DegenerateSamples) => out.extend([ALPHA_MAX, 0.0, 0.0, 0.0]),
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

/// Two-scale BRISQUE features of a frame's BT.601 luma.
pub fn brisque_features(f: &Frame) -> Result<BrisqueFeatures> {
    let (h, w) = f.dims();
    if h < MIN_FEATURE_DIM || w < MIN_FEATURE_DIM {
        return Err(Error::FrameTooSmall {
            height: h,
            width: w,
            min: MIN_FEATURE_DIM,
        });
    }
    let luma = f.luma();
    let mut values = Vec::with_capacity(FEATURE_COUNT);
    scale_features(&luma, &mut values)?;
    let half = resize_plane(&luma, h / 2, w / 2, Filter::Bicubic)?;
    scale_features(&half, &mut values)?;
    BrisqueFeatures::from_values(values)
}
