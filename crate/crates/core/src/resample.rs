//! Resizing with a half-pixel-centre convention: destination sample `d`
//! reads source coordinate `(d + 0.5) * in / out - 0.5`, so equal sizes are
//! the identity for every filter.

use serde::{Deserialize, Serialize};

use crate::media::{reflect_index, Frame, Plane};
use crate::{Error, Result};

pub const MIN_OUTPUT: usize = 8;
const CUBIC_A: f64 = -0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Filter {
    Nearest,
    Bilinear,
    Bicubic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResampleMethod {
    Nearest,
    Bilinear,
    Bicubic,
    DownUp,
}

impl ResampleMethod {
    pub const ALL: [ResampleMethod; 4] = [
        ResampleMethod::Nearest,
        ResampleMethod::Bilinear,
        ResampleMethod::Bicubic,
        ResampleMethod::DownUp,
    ];
}

/// A downsampling recipe: method, integer factor, and for down-up the
/// overshoot factor (in units of the scale).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResampleSpec {
    pub method: ResampleMethod,
    pub scale: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intermediate: Option<f64>,
}

impl ResampleSpec {
    pub fn validate(&self) -> Result<()> {
        if ![1, 2, 4].contains(&self.scale) {
            return Err(Error::InvalidResample(format!("scale {} not in {{1, 2, 4}}", self.scale)));
        }
        match (self.method, self.intermediate) {
            (ResampleMethod::DownUp, Some(i)) => check_intermediate(i),
            (ResampleMethod::DownUp, None) => Err(Error::InvalidResample(
                "down_up needs an intermediate factor".into(),
            )),
            (_, Some(_)) => Err(Error::InvalidResample(
                "intermediate factor only applies to down_up".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Reduces both dimensions by `scale`, which must divide them.
    pub fn apply(&self, f: &Frame) -> Result<Frame> {
        self.validate()?;
        let s = self.scale as usize;
        let (h, w) = f.dims();
        if h % s != 0 || w % s != 0 {
            return Err(Error::DimensionMismatch(format!(
                "{h}x{w} is not divisible by scale {s}"
            )));
        }
        let (th, tw) = (h / s, w / s);
        match self.method {
            ResampleMethod::Nearest => resize(f, th, tw, Filter::Nearest),
            ResampleMethod::Bilinear => resize(f, th, tw, Filter::Bilinear),
            ResampleMethod::Bicubic => resize(f, th, tw, Filter::Bicubic),
            ResampleMethod::DownUp => down_up(f, th, tw, self.intermediate.unwrap_or(1.0)),
        }
    }
}

fn check_intermediate(i: f64) -> Result<()> {
    if (1.0..=2.0).contains(&i) {
        Ok(())
    } else {
        Err(Error::InvalidResample(format!(
            "intermediate factor {i} outside [1, 2]"
        )))
    }
}

/// Keys cubic convolution kernel with `a = -0.5`.
pub fn cubic_weight(x: f64) -> f64 {
    let x = x.abs();
    let a = CUBIC_A;
    if x <= 1.0 {
        (a + 2.0) * x * x * x - (a + 3.0) * x * x + 1.0
    } else if x < 2.0 {
        a * x * x * x - 5.0 * a * x * x + 8.0 * a * x - 4.0 * a
    } else {
        0.0
    }
}

/// Source coordinate for destination index `d`.
pub fn source_coord(d: usize, in_n: usize, out_n: usize) -> f64 {
    (d as f64 + 0.5) * in_n as f64 / out_n as f64 - 0.5
}

struct Taps {
    /// `count` taps per output sample, flattened.
    index: Vec<usize>,
    weight: Vec<f32>,
    count: usize,
}

fn axis_taps(in_n: usize, out_n: usize, filter: Filter) -> Taps {
    let count = match filter {
        Filter::Nearest => 1,
        Filter::Bilinear => 2,
        Filter::Bicubic => 4,
    };
    let mut index = Vec::with_capacity(out_n * count);
    let mut weight = Vec::with_capacity(out_n * count);
    for d in 0..out_n {
        let src = source_coord(d, in_n, out_n);
        match filter {
            Filter::Nearest => {
                // Exact halves go to the lower index.
                let i = (src - 0.5).ceil().clamp(0.0, (in_n - 1) as f64) as usize;
                index.push(i);
                weight.push(1.0);
            }
            Filter::Bilinear | Filter::Bicubic => {
                let base = src.floor();
                let t = src - base;
                let base = base as isize;
                let ws: Vec<(isize, f64)> = if filter == Filter::Bilinear {
                    vec![(base, 1.0 - t), (base + 1, t)]
                } else {
                    vec![
                        (base - 1, cubic_weight(t + 1.0)),
                        (base, cubic_weight(t)),
                        (base + 1, cubic_weight(1.0 - t)),
                        (base + 2, cubic_weight(2.0 - t)),
                    ]
                };
                let sum: f64 = ws.iter().map(|(_, w)| w).sum();
                for (i, w) in ws {
                    index.push(reflect_index(i, in_n));
                    weight.push((w / sum) as f32);
                }
            }
        }
    }
    Taps {
        index,
        weight,
        count,
    }
}

/// Resizes interleaved `channels`-channel data. No clamping.
fn resize_interleaved(
    src: &[f32],
    (h, w): (usize, usize),
    channels: usize,
    (out_h, out_w): (usize, usize),
    filter: Filter,
) -> Vec<f32> {
    let tx = axis_taps(w, out_w, filter);
    let ty = axis_taps(h, out_h, filter);
    // Horizontal pass.
    let mut mid = vec![0.0f32; h * out_w * channels];
    for y in 0..h {
        let row = &src[y * w * channels..(y + 1) * w * channels];
        let out = &mut mid[y * out_w * channels..(y + 1) * out_w * channels];
        for x in 0..out_w {
            for k in 0..tx.count {
                let i = tx.index[x * tx.count + k];
                let wt = tx.weight[x * tx.count + k];
                for c in 0..channels {
                    out[x * channels + c] += wt * row[i * channels + c];
                }
            }
        }
    }
    // Vertical pass.
    let stride = out_w * channels;
    let mut out = vec![0.0f32; out_h * stride];
    for y in 0..out_h {
        let dst = &mut out[y * stride..(y + 1) * stride];
        for k in 0..ty.count {
            let i = ty.index[y * ty.count + k];
            let wt = ty.weight[y * ty.count + k];
            for (d, &s) in dst.iter_mut().zip(&mid[i * stride..(i + 1) * stride]) {
                *d += wt * s;
            }
        }
    }
    out
}

fn check_output(out_h: usize, out_w: usize) -> Result<()> {
    if out_h < MIN_OUTPUT || out_w < MIN_OUTPUT {
        Err(Error::OutputTooSmall {
            height: out_h,
            width: out_w,
        })
    } else {
        Ok(())
    }
}

pub fn resize(f: &Frame, out_h: usize, out_w: usize, filter: Filter) -> Result<Frame> {
    check_output(out_h, out_w)?;
    if f.dims() == (out_h, out_w) && filter == Filter::Nearest {
        return Ok(f.clone());
    }
    let data = resize_interleaved(f.data(), f.dims(), 3, (out_h, out_w), filter);
    Ok(Frame::from_clamped(out_h, out_w, data))
}

/// Single-plane resize without clamping (used for feature pyramids).
pub fn resize_plane(p: &Plane, out_h: usize, out_w: usize, filter: Filter) -> Result<Plane> {
    check_output(out_h, out_w)?;
    let data = resize_interleaved(p.data(), p.dims(), 1, (out_h, out_w), filter);
    Plane::new(out_h, out_w, data)
}

/// Bicubic downsample past the target by `intermediate`, then bicubic
/// upsample to the target.
pub fn down_up(f: &Frame, target_h: usize, target_w: usize, intermediate: f64) -> Result<Frame> {
    check_intermediate(intermediate)?;
    check_output(target_h, target_w)?;
    let mid = |t: usize| ((t as f64 / intermediate).round() as usize).max(MIN_OUTPUT);
    let small = resize(f, mid(target_h), mid(target_w), Filter::Bicubic)?;
    resize(&small, target_h, target_w, Filter::Bicubic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_frame(h: usize, w: usize, seed: u64) -> Frame {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Frame::from_fn(h, w, |_, _| [rng.random(), rng.random(), rng.random()])
    }

    /// Sum of squared 4-neighbour Laplacian over interior pixels.
    fn laplacian_energy(f: &Frame) -> f64 {
        let (h, w) = f.dims();
        let mut e = 0.0;
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                for c in 0..3 {
                    let l = 4.0 * f.get(y, x, c) as f64
                        - f.get(y - 1, x, c) as f64
                        - f.get(y + 1, x, c) as f64
                        - f.get(y, x - 1, c) as f64
                        - f.get(y, x + 1, c) as f64;
                    e += l * l;
                }
            }
        }
        e
    }

    #[test]
    fn keys_kernel_values() {
        assert_eq!(cubic_weight(0.0), 1.0);
        assert_eq!(cubic_weight(1.0), 0.0);
        assert_eq!(cubic_weight(2.0), 0.0);
        assert!((cubic_weight(0.5) - 0.5625).abs() < 1e-12);
        assert!((cubic_weight(1.5) + 0.0625).abs() < 1e-12);
    }

    #[test]
    fn unit_scale_is_identity() {
        let f = random_frame(16, 20, 1);
        assert_eq!(resize(&f, 16, 20, Filter::Nearest).unwrap(), f);
        for filter in [Filter::Bilinear, Filter::Bicubic] {
            let out = resize(&f, 16, 20, filter).unwrap();
            for (a, b) in out.data().iter().zip(f.data()) {
                assert!((a - b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn constants_survive_every_method() {
        let f = Frame::filled(32, 24, [0.2, 0.5, 0.8]);
        for filter in [Filter::Nearest, Filter::Bilinear, Filter::Bicubic] {
            for (h, w) in [(16, 12), (8, 8), (64, 48), (20, 9)] {
                let out = resize(&f, h, w, filter).unwrap();
                for (i, v) in out.data().iter().enumerate() {
                    assert!((v - [0.2, 0.5, 0.8][i % 3]).abs() < 1e-6);
                }
            }
        }
        let out = down_up(&f, 16, 12, 1.7).unwrap();
        for (i, v) in out.data().iter().enumerate() {
            assert!((v - [0.2, 0.5, 0.8][i % 3]).abs() < 1e-6);
        }
    }

    #[test]
    fn nearest_halving_picks_lower_index() {
        let f = Frame::from_fn(16, 16, |y, x| [y as f32 / 16.0, x as f32 / 16.0, 0.0]);
        let out = resize(&f, 8, 8, Filter::Nearest).unwrap();
        for y in 0..8 {
            for x in 0..8 {
                assert_eq!(out.pixel(y, x), f.pixel(2 * y, 2 * x));
            }
        }
    }

    #[test]
    fn bicubic_ramp_matches_direct_tap_sum() {
        let f = Frame::from_fn(16, 16, |y, x| {
            let v = (y * 16 + x) as f32 / 255.0;
            [v, 0.5 * v, 1.0 - v]
        });
        let out = resize(&f, 8, 8, Filter::Bicubic).unwrap();
        for y in 0..8 {
            for x in 0..8 {
                let (sy, sx) = (2.0 * y as f64 + 0.5, 2.0 * x as f64 + 0.5);
                for c in 0..3 {
                    let mut acc = 0.0;
                    for iy in (sy.floor() as isize - 1)..=(sy.floor() as isize + 2) {
                        for ix in (sx.floor() as isize - 1)..=(sx.floor() as isize + 2) {
                            let wgt = cubic_weight(sy - iy as f64) * cubic_weight(sx - ix as f64);
                            acc += wgt * f.get(reflect_index(iy, 16), reflect_index(ix, 16), c) as f64;
                        }
                    }
                    let got = out.get(y, x, c) as f64;
                    assert!((got - acc.clamp(0.0, 1.0)).abs() < 1e-5);
                }
            }
        }
    }

    #[test]
    fn down_up_unit_intermediate_equals_bicubic() {
        let f = random_frame(32, 32, 2);
        let a = down_up(&f, 16, 16, 1.0).unwrap();
        let b = resize(&f, 16, 16, Filter::Bicubic).unwrap();
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn down_up_removes_high_frequencies() {
        // 2-pixel checkerboard; halving it with cubic taps keeps contrast,
        // the 4x overshoot does not.
        let f = Frame::from_fn(32, 32, |y, x| {
            let v = if (y / 2 + x / 2) % 2 == 0 { 0.9 } else { 0.1 };
            [v; 3]
        });
        let e1 = laplacian_energy(&down_up(&f, 16, 16, 1.0).unwrap());
        let e2 = laplacian_energy(&down_up(&f, 16, 16, 2.0).unwrap());
        assert!(e2 < e1, "{e2} !< {e1}");
    }

    #[test]
    fn spec_validation() {
        let f = Frame::filled(16, 16, [0.5; 3]);
        assert!(resize(&f, 7, 16, Filter::Bilinear).is_err());
        assert!(down_up(&f, 8, 8, 2.5).is_err());
        let spec = ResampleSpec { method: ResampleMethod::DownUp, scale: 2, intermediate: None };
        assert!(spec.apply(&f).is_err());
        let spec = ResampleSpec { method: ResampleMethod::Bicubic, scale: 3, intermediate: None };
        assert!(spec.apply(&f).is_err());
        let spec = ResampleSpec { method: ResampleMethod::Bilinear, scale: 2, intermediate: None };
        assert_eq!(spec.apply(&f).unwrap().dims(), (8, 8));
        let f = Frame::filled(18, 16, [0.5; 3]);
        let spec = ResampleSpec { method: ResampleMethod::Nearest, scale: 4, intermediate: None };
        assert!(matches!(spec.apply(&f), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn bicubic_overshoot_is_clamped() {
        let f = Frame::from_fn(16, 16, |_, x| [if x < 8 { 0.0 } else { 1.0 }; 3]);
        let out = resize(&f, 40, 40, Filter::Bicubic).unwrap();
        assert!(out.data().iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
