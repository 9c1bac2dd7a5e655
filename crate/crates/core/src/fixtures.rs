//! Procedural test content: deterministic frames with natural-image-like
//! statistics and slowly panning clips built from them.
//!
//! Luma is a dead-leaves image (occluding discs with power-law radii, which
//! reproduces the heavy-tailed local statistics of photographs) under smooth
//! shading; chroma is smooth and low-amplitude, as in most real footage.

use std::f64::consts::TAU;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::media::{write_clip, Clip, Frame};
use crate::Result;

pub const SAMPLE_CLIP_FRAMES: usize = 100;
pub const SAMPLE_CLIP_SIZE: usize = 256;
pub const SAMPLE_FRAME_RATE: f64 = 25.0;

/// Per-frame pan of [`natural_clip`], in pixels.
pub const PAN: (usize, usize) = (1, 2);

const SUPERSAMPLE: usize = 2;
const R_MIN: f64 = 1.5;
const R_MAX: f64 = 60.0;

struct Wave {
    fy: f64,
    fx: f64,
    phase: f64,
    amp: f64,
}

fn waves(n: usize, fmin: f64, fmax: f64, gain: f64, rng: &mut ChaCha8Rng) -> Vec<Wave> {
    (0..n)
        .map(|_| {
            // Log-uniform radial frequency in cycles/pixel, amplitude ~ 1/f.
            let f = (fmin.ln() + rng.random::<f64>() * (fmax / fmin).ln()).exp();
            let theta = rng.random::<f64>() * TAU;
            Wave {
                fy: f * theta.sin(),
                fx: f * theta.cos(),
                phase: rng.random::<f64>() * TAU,
                amp: gain * fmin / f * (0.5 + rng.random::<f64>()),
            }
        })
        .collect()
}

fn wave_sum(waves: &[Wave], y: f64, x: f64) -> f64 {
    waves
        .iter()
        .map(|w| w.amp * (TAU * (w.fy * y + w.fx * x) + w.phase).sin())
        .sum()
}

/// A rendered canvas large enough for every frame that will be cut from it.
struct Canvas {
    height: usize,
    width: usize,
    luma: Vec<f32>,
    chroma: [Vec<Wave>; 2],
}

impl Canvas {
    fn new(height: usize, width: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6e61_7475_7261_6c00);
        let shading = waves(6, 0.003, 0.03, 0.05, &mut rng);
        let chroma = [waves(4, 0.002, 0.02, 0.04, &mut rng), waves(4, 0.002, 0.02, 0.04, &mut rng)];

        let (sh, sw) = (height * SUPERSAMPLE, width * SUPERSAMPLE);
        let mut fine = vec![0.5f32; sh * sw];
        // Radii with density ~ r^-3 by inverse CDF; about 8x coverage.
        let inv = |u: f64| (R_MIN.powi(-2) - u * (R_MIN.powi(-2) - R_MAX.powi(-2))).powf(-0.5);
        let mean_area = std::f64::consts::PI * (R_MAX / R_MIN).ln() / (0.5 * (R_MIN.powi(-2) - R_MAX.powi(-2)));
        let margin = R_MAX;
        let area = (height as f64 + 2.0 * margin) * (width as f64 + 2.0 * margin);
        let count = (8.0 * area / mean_area).ceil() as usize;
        let s = SUPERSAMPLE as f64;
        for _ in 0..count {
            let r = inv(rng.random::<f64>());
            let cy = rng.random::<f64>() * (height as f64 + 2.0 * margin) - margin;
            let cx = rng.random::<f64>() * (width as f64 + 2.0 * margin) - margin;
            let level = (0.12 + 0.76 * rng.random::<f64>()) as f32;
            let y0 = ((cy - r) * s).floor().max(0.0) as usize;
            let y1 = (((cy + r) * s).ceil().max(0.0) as usize).min(sh);
            let x0 = ((cx - r) * s).floor().max(0.0) as usize;
            let x1 = (((cx + r) * s).ceil().max(0.0) as usize).min(sw);
            for fy in y0..y1 {
                let py = (fy as f64 + 0.5) / s - cy;
                for fx in x0..x1 {
                    let px = (fx as f64 + 0.5) / s - cx;
                    if py * py + px * px < r * r {
                        fine[fy * sw + fx] = level;
                    }
                }
            }
        }

        let mut luma = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                let mut acc = 0.0f32;
                for dy in 0..SUPERSAMPLE {
                    for dx in 0..SUPERSAMPLE {
                        acc += fine[(y * SUPERSAMPLE + dy) * sw + x * SUPERSAMPLE + dx];
                    }
                }
                let t = wave_sum(&shading, y as f64, x as f64);
                luma.push(acc / (SUPERSAMPLE * SUPERSAMPLE) as f32 + t as f32);
            }
        }
        Canvas {
            height,
            width,
            luma,
            chroma,
        }
    }

    fn frame(&self, top: usize, left: usize, height: usize, width: usize) -> Frame {
        debug_assert!(top + height <= self.height && left + width <= self.width);
        Frame::from_fn(height, width, |y, x| {
            let (cy, cx) = (y + top, x + left);
            let l = self.luma[cy * self.width + cx] as f64;
            let cb = wave_sum(&self.chroma[0], cy as f64, cx as f64);
            let cr = wave_sum(&self.chroma[1], cy as f64, cx as f64);
            let r = l + 1.402 * cr;
            let g = l - 0.344_136 * cb - 0.714_136 * cr;
            let b = l + 1.772 * cb;
            [r, g, b].map(|v| v.clamp(0.0, 1.0) as f32)
        })
    }
}

/// A single natural-like frame, deterministic in `seed`.
pub fn natural_frame(height: usize, width: usize, seed: u64) -> Frame {
    Canvas::new(height, width, seed).frame(0, 0, height, width)
}

/// A clip panning across one scene by [`PAN`] pixels per frame: frame `t + 1`
/// at `(y, x)` shows what frame `t` showed at `(y + 1, x + 2)`.
pub fn natural_clip(height: usize, width: usize, frames: usize, seed: u64) -> Clip {
    let frames = frames.max(1);
    let canvas = Canvas::new(height + (frames - 1) * PAN.0, width + (frames - 1) * PAN.1, seed);
    let frames = (0..frames)
        .map(|t| canvas.frame(t * PAN.0, t * PAN.1, height, width))
        .collect();
    Clip::new(frames, SAMPLE_FRAME_RATE).expect("fixture clip is non-empty")
}

/// Every frame is the same natural frame.
pub fn static_clip(height: usize, width: usize, frames: usize, seed: u64) -> Clip {
    let f = natural_frame(height, width, seed);
    Clip::new(vec![f; frames.max(1)], SAMPLE_FRAME_RATE).expect("fixture clip is non-empty")
}

/// Writes the standard 100-frame 256x256 sample clip to `dir`.
pub fn write_sample_clip(dir: impl AsRef<Path>, seed: u64) -> Result<Clip> {
    let clip = natural_clip(SAMPLE_CLIP_SIZE, SAMPLE_CLIP_SIZE, SAMPLE_CLIP_FRAMES, seed);
    write_clip(&clip, dir)?;
    Ok(clip)
}
