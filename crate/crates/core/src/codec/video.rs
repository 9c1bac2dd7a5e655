use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::dct::{fdct_8x8, idct_8x8};
use super::external::run_external;
use super::tables::LUMA_TABLE;
use super::PaddedPlane;
use crate::media::{Clip, Frame};
use crate::{Error, Result};

pub const MIN_QUANTIZER: u32 = 1;
pub const MAX_QUANTIZER: u32 = 31;
/// Full-search motion range in integer pixels.
pub const MAX_SEARCH: i32 = 7;

const MB: usize = 16;
const BITS_PER_COEFFICIENT: u64 = 6;
const BITS_PER_MOTION_VECTOR: u64 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CodecKind {
    InternalSim,
    /// Shell command template with `{input}`, `{output}` and `{bitrate}`
    /// placeholders. `{input}` holds `%06d.png` frames plus `clip.json`; the
    /// command must leave decoded `.png` frames in `{output}`.
    External { command: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GopProfile {
    IOnly,
    Ip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VideoCodecParams {
    pub codec: CodecKind,
    pub profile: GopProfile,
    pub gop: u32,
    /// Bits per second.
    pub bitrate_target: f64,
    /// Forces the quantizer instead of resolving it by rate control.
    #[serde(default)]
    pub quantizer: Option<u32>,
}

impl VideoCodecParams {
    pub fn internal(profile: GopProfile, gop: u32, bitrate_target: f64) -> Self {
        VideoCodecParams {
            codec: CodecKind::InternalSim,
            profile,
            gop,
            bitrate_target,
            quantizer: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gop == 0 {
            return Err(Error::InvalidCodec("gop must be at least 1".into()));
        }
        if !(self.bitrate_target.is_finite() && self.bitrate_target > 0.0) {
            return Err(Error::InvalidCodec(format!(
                "bitrate_target must be positive, got {}",
                self.bitrate_target
            )));
        }
        if let Some(q) = self.quantizer {
            if !(MIN_QUANTIZER..=MAX_QUANTIZER).contains(&q) {
                return Err(Error::InvalidCodec(format!("quantizer {q} outside [1, 31]")));
            }
        }
        if let CodecKind::External { command } = &self.codec {
            if command.trim().is_empty() {
                return Err(Error::InvalidCodec("empty external command".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameKind {
    Intra,
    Predicted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameStats {
    pub kind: FrameKind,
    /// Nonzero quantized coefficients (intra coefficients or P-frame residual).
    pub nonzero_coefficients: u64,
    /// One `(dy, dx)` per macroblock, raster order; empty for I-frames.
    pub motion_vectors: Vec<(i32, i32)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodecStats {
    pub quantizer: u32,
    pub estimated_bits: u64,
    pub budget_bits: f64,
    pub frames: Vec<FrameStats>,
}

type Planes = [PaddedPlane; 3];

/// Multiplier applied to the luma table: log-spaced from 1/64 at quantizer 1
/// to 2 at quantizer 31, doubling about every four steps.
pub fn quantizer_scale(q: u32) -> f64 {
    2f64.powf(7.0 * (q as f64 - 1.0) / 30.0) / 64.0
}

fn steps(q: u32) -> [f32; 64] {
    let s = quantizer_scale(q);
    std::array::from_fn(|i| (LUMA_TABLE[i] as f64 * s) as f32)
}

fn intra_frame(src: &Planes, steps: &[f32; 64]) -> (Planes, u64) {
    let mut nz = 0;
    let recon = std::array::from_fn(|c| {
        let s = &src[c];
        let mut r = s.clone();
        for by in (0..s.height).step_by(8) {
            for bx in (0..s.width).step_by(8) {
                let mut b = s.block(by, bx);
                b.iter_mut().for_each(|v| *v -= 128.0);
                let mut coef = fdct_8x8(&b);
                for (v, st) in coef.iter_mut().zip(steps) {
                    let level = (*v / st).round();
                    nz += (level != 0.0) as u64;
                    *v = level * st;
                }
                let mut out = idct_8x8(&coef);
                out.iter_mut().for_each(|v| *v += 128.0);
                r.put_block(by, bx, &out);
            }
        }
        r
    });
    (recon, nz)
}

fn sad(src: &Planes, refp: &Planes, my: usize, mx: usize, ry: usize, rx: usize, bound: f32) -> f32 {
    let w = src[0].width;
    let mut total = 0.0f32;
    for c in 0..3 {
        for y in 0..MB {
            let a = &src[c].data[(my + y) * w + mx..][..MB];
            let b = &refp[c].data[(ry + y) * w + rx..][..MB];
            total += a.iter().zip(b).map(|(p, q)| (p - q).abs()).sum::<f32>();
        }
        if total >= bound {
            return total;
        }
    }
    total
}

/// Quantizes the residual of one macroblock against the prediction at
/// `(ry, rx)`; returns per-channel dequantized residual blocks and the nonzero
/// count. `deadzone` truncates instead of rounding.
fn code_residual(
    src: &Planes,
    refp: &Planes,
    (my, mx): (usize, usize),
    (ry, rx): (usize, usize),
    steps: &[f32; 64],
    deadzone: bool,
) -> ([[[f32; 64]; 4]; 3], u64) {
    let w = src[0].width;
    let mut out = [[[0.0f32; 64]; 4]; 3];
    let mut nz = 0;
    for c in 0..3 {
        for (k, blk) in out[c].iter_mut().enumerate() {
            let (oy, ox) = ((k / 2) * 8, (k % 2) * 8);
            let mut res = [0.0f32; 64];
            for y in 0..8 {
                for x in 0..8 {
                    let si = (my + oy + y) * w + mx + ox + x;
                    let ri = (ry + oy + y) * w + rx + ox + x;
                    res[y * 8 + x] = src[c].data[si] - refp[c].data[ri];
                }
            }
            let mut coef = fdct_8x8(&res);
            let mut any = false;
            for (v, st) in coef.iter_mut().zip(steps) {
                let level = if deadzone { (*v / st).trunc() } else { (*v / st).round() };
                if level != 0.0 {
                    nz += 1;
                    any = true;
                }
                *v = level * st;
            }
            if any {
                *blk = idct_8x8(&coef);
            }
        }
    }
    (out, nz)
}

fn predicted_frame(src: &Planes, refp: &Planes, steps: &[f32; 64]) -> (Planes, u64, Vec<(i32, i32)>) {
    let (h, w) = (src[0].height, src[0].width);
    let mut recon: Planes = refp.clone();
    let mut nz = 0;
    let mut mvs = Vec::with_capacity((h / MB) * (w / MB));
    for my in (0..h).step_by(MB) {
        for mx in (0..w).step_by(MB) {
            // Skip: the co-located block already matches to within the
            // quantizer's deadzone.
            let (_, skip_nz) = code_residual(src, refp, (my, mx), (my, mx), steps, true);
            let (mv, res, n) = if skip_nz == 0 {
                ((0, 0), [[[0.0; 64]; 4]; 3], 0)
            } else {
                let mut best = (f32::INFINITY, (0i32, 0i32));
                for dy in -MAX_SEARCH..=MAX_SEARCH {
                    let ry = my as i32 + dy;
                    if ry < 0 || ry as usize + MB > h {
                        continue;
                    }
                    for dx in -MAX_SEARCH..=MAX_SEARCH {
                        let rx = mx as i32 + dx;
                        if rx < 0 || rx as usize + MB > w {
                            continue;
                        }
                        let s = sad(src, refp, my, mx, ry as usize, rx as usize, best.0);
                        // Strict comparison keeps the lexicographically smallest tie.
                        if s < best.0 {
                            best = (s, (dy, dx));
                        }
                    }
                }
                let (dy, dx) = best.1;
                let at = ((my as i32 + dy) as usize, (mx as i32 + dx) as usize);
                let (res, n) = code_residual(src, refp, (my, mx), at, steps, false);
                ((dy, dx), res, n)
            };
            nz += n;
            mvs.push(mv);
            let (ry, rx) = ((my as i32 + mv.0) as usize, (mx as i32 + mv.1) as usize);
            for c in 0..3 {
                for (k, blk) in res[c].iter().enumerate() {
                    let (oy, ox) = ((k / 2) * 8, (k % 2) * 8);
                    for y in 0..8 {
                        for x in 0..8 {
                            let di = (my + oy + y) * w + mx + ox + x;
                            let ri = (ry + oy + y) * w + rx + ox + x;
                            recon[c].data[di] = refp[c].data[ri] + blk[y * 8 + x];
                        }
                    }
                }
            }
        }
    }
    (recon, nz, mvs)
}

fn encode(src: &[Planes], p: &VideoCodecParams, q: u32) -> (Vec<Planes>, Vec<FrameStats>) {
    let st = steps(q);
    let mut recon: Vec<Planes> = Vec::with_capacity(src.len());
    let mut stats = Vec::with_capacity(src.len());
    for (i, f) in src.iter().enumerate() {
        let intra = p.profile == GopProfile::IOnly || i % p.gop as usize == 0;
        if intra {
            let (r, nz) = intra_frame(f, &st);
            recon.push(r);
            stats.push(FrameStats {
                kind: FrameKind::Intra,
                nonzero_coefficients: nz,
                motion_vectors: Vec::new(),
            });
        } else {
            let (r, nz, mvs) = predicted_frame(f, &recon[i - 1], &st);
            recon.push(r);
            stats.push(FrameStats {
                kind: FrameKind::Predicted,
                nonzero_coefficients: nz,
                motion_vectors: mvs,
            });
        }
    }
    (recon, stats)
}

fn estimated_bits(stats: &[FrameStats]) -> u64 {
    stats
        .iter()
        .map(|s| s.nonzero_coefficients * BITS_PER_COEFFICIENT + s.motion_vectors.len() as u64 * BITS_PER_MOTION_VECTOR)
        .sum()
}

fn to_planes(f: &Frame) -> Planes {
    let (h, w) = f.dims();
    f.to_planes()
        .map(|p| PaddedPlane::from_plane(p.data(), h, w, MB, 255.0))
}

fn to_frame(p: &Planes, h: usize, w: usize) -> Frame {
    let pw = p[0].width;
    let mut data = Vec::with_capacity(h * w * 3);
    for y in 0..h {
        for x in 0..w {
            for plane in p {
                data.push(plane.data[y * pw + x] / 255.0);
            }
        }
    }
    Frame::from_clamped(h, w, data)
}

/// Internal codec with rate control; also returns the encoder statistics.
pub fn video_compress_with_stats(c: &Clip, p: &VideoCodecParams) -> Result<(Clip, CodecStats)> {
    p.validate()?;
    if p.codec != CodecKind::InternalSim {
        return Err(Error::InvalidCodec("statistics are only available for the internal codec".into()));
    }
    if c.is_empty() {
        return Err(Error::EmptyClip);
    }
    let (h, w) = c.dims();
    let src: Vec<Planes> = c.frames().iter().map(to_planes).collect();
    let budget = p.bitrate_target * c.duration();

    let mut cache: HashMap<u32, (Vec<Planes>, Vec<FrameStats>)> = HashMap::new();
    let mut run = |q: u32| -> u64 {
        let entry = cache.entry(q).or_insert_with(|| encode(&src, p, q));
        estimated_bits(&entry.1)
    };
    let q = match p.quantizer {
        Some(q) => {
            run(q);
            q
        }
        None => {
            // Smallest quantizer (finest quality) that fits the budget.
            let (mut lo, mut hi) = (MIN_QUANTIZER, MAX_QUANTIZER);
            while lo < hi {
                let mid = (lo + hi) / 2;
                if run(mid) as f64 <= budget {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            run(lo);
            lo
        }
    };
    let (recon, frames) = cache.remove(&q).expect("quantizer was encoded");
    let out: Vec<Frame> = recon.iter().map(|r| to_frame(r, h, w)).collect();
    let stats = CodecStats {
        quantizer: q,
        estimated_bits: estimated_bits(&frames),
        budget_bits: budget,
        frames,
    };
    Ok((Clip::new(out, c.frame_rate())?, stats))
}

/// Terminal clip-level compression, internal simulator or external command.
pub fn video_compress(c: &Clip, p: &VideoCodecParams) -> Result<Clip> {
    p.validate()?;
    match &p.codec {
        CodecKind::InternalSim => video_compress_with_stats(c, p).map(|(clip, _)| clip),
        CodecKind::External { command } => run_external(c, command, p.bitrate_target),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::media::psnr;

    fn forced(profile: GopProfile, q: u32) -> VideoCodecParams {
        VideoCodecParams {
            quantizer: Some(q),
            ..VideoCodecParams::internal(profile, 10, 5e4)
        }
    }

    #[test]
    fn quantizer_scale_endpoints() {
        assert!((quantizer_scale(1) - 1.0 / 64.0).abs() < 1e-15);
        assert!((quantizer_scale(31) - 2.0).abs() < 1e-12);
        for q in 1..31 {
            assert!(quantizer_scale(q + 1) > quantizer_scale(q));
        }
    }

    #[test]
    fn quantizer_one_is_near_lossless() {
        let clip = fixtures::natural_clip(48, 64, 4, 2);
        for profile in [GopProfile::IOnly, GopProfile::Ip] {
            let (out, stats) = video_compress_with_stats(&clip, &forced(profile, 1)).unwrap();
            assert_eq!(stats.quantizer, 1);
            for (a, b) in out.frames().iter().zip(clip.frames()) {
                let p = psnr(a, b).unwrap();
                assert!(p >= 45.0, "{profile:?}: {p}");
            }
        }
    }

    #[test]
    fn static_clip_predicts_exactly() {
        let clip = fixtures::static_clip(40, 56, 6, 5);
        for q in [1, 4, 13, 31] {
            let (_, stats) = video_compress_with_stats(&clip, &forced(GopProfile::Ip, q)).unwrap();
            assert_eq!(stats.frames[0].kind, FrameKind::Intra);
            for f in &stats.frames[1..] {
                assert_eq!(f.kind, FrameKind::Predicted);
                assert_eq!(f.nonzero_coefficients, 0, "quantizer {q}");
                assert!(f.motion_vectors.iter().all(|&mv| mv == (0, 0)));
                assert_eq!(f.motion_vectors.len(), 3 * 4);
            }
        }
    }

    #[test]
    fn constant_colour_round_trips() {
        let f = Frame::filled(24, 40, [0.2, 0.55, 0.9]);
        let clip = Clip::new(vec![f.clone(); 5], 25.0).unwrap();
        for profile in [GopProfile::IOnly, GopProfile::Ip] {
            let out = video_compress(&clip, &forced(profile, 1)).unwrap();
            for g in out.frames() {
                for (a, b) in g.data().iter().zip(f.data()) {
                    assert!((a - b).abs() <= 1e-3);
                }
            }
        }
    }

    #[test]
    fn gop_structure() {
        let clip = fixtures::natural_clip(32, 32, 7, 0);
        let p = VideoCodecParams {
            gop: 3,
            ..forced(GopProfile::Ip, 8)
        };
        let (_, stats) = video_compress_with_stats(&clip, &p).unwrap();
        let kinds: Vec<_> = stats.frames.iter().map(|f| f.kind == FrameKind::Intra).collect();
        assert_eq!(kinds, [true, false, false, true, false, false, true]);
        let (_, stats) = video_compress_with_stats(&clip, &forced(GopProfile::IOnly, 8)).unwrap();
        assert!(stats.frames.iter().all(|f| f.kind == FrameKind::Intra));
    }

    #[test]
    fn motion_search_finds_the_pan() {
        // Frame t+1 samples the scene at (y+1, x+2): content moves up-left, so
        // interior blocks predict from (+1, +2) in the previous frame.
        let clip = fixtures::natural_clip(64, 64, 2, 9);
        let (_, stats) = video_compress_with_stats(&clip, &forced(GopProfile::Ip, 2)).unwrap();
        let mvs = &stats.frames[1].motion_vectors;
        assert_eq!(mvs[0], (1, 2));
        assert!(mvs.iter().filter(|&&mv| mv == (1, 2)).count() >= 9);
    }

    #[test]
    fn deterministic() {
        let clip = fixtures::natural_clip(32, 48, 5, 3);
        let p = VideoCodecParams::internal(GopProfile::Ip, 10, 3e4);
        let a = video_compress_with_stats(&clip, &p).unwrap();
        let b = video_compress_with_stats(&clip, &p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rate_control_fits_budget_with_smallest_quantizer() {
        let clip = fixtures::natural_clip(64, 64, 10, 4);
        let p = VideoCodecParams::internal(GopProfile::Ip, 10, 5e4);
        let (_, stats) = video_compress_with_stats(&clip, &p).unwrap();
        if stats.quantizer < MAX_QUANTIZER {
            assert!(stats.estimated_bits as f64 <= stats.budget_bits);
        }
        if stats.quantizer > MIN_QUANTIZER {
            let (_, finer) = video_compress_with_stats(
                &clip,
                &VideoCodecParams {
                    quantizer: Some(stats.quantizer - 1),
                    ..p
                },
            )
            .unwrap();
            assert!(finer.estimated_bits as f64 > stats.budget_bits);
        }
    }

    #[test]
    fn rate_control_is_monotone_in_bitrate() {
        let clip = fixtures::natural_clip(48, 48, 6, 6);
        for profile in [GopProfile::IOnly, GopProfile::Ip] {
            let mut last = 0;
            for rate in [1e6, 3e5, 1e5, 6e4, 3e4, 2e4, 1e4, 5e3] {
                let (_, s) = video_compress_with_stats(&clip, &VideoCodecParams::internal(profile, 10, rate)).unwrap();
                assert!(s.quantizer >= last, "{profile:?} at {rate}: {} < {last}", s.quantizer);
                last = s.quantizer;
            }
        }
    }

    #[test]
    fn validation() {
        let ok = VideoCodecParams::internal(GopProfile::Ip, 10, 1e4);
        assert!(ok.validate().is_ok());
        assert!(VideoCodecParams { gop: 0, ..ok.clone() }.validate().is_err());
        assert!(VideoCodecParams { quantizer: Some(32), ..ok.clone() }.validate().is_err());
        assert!(VideoCodecParams { bitrate_target: -1.0, ..ok.clone() }.validate().is_err());
        let ext = VideoCodecParams {
            codec: CodecKind::External { command: " ".into() },
            ..ok
        };
        assert!(ext.validate().is_err());
    }

    #[test]
    fn serde_shape() {
        let p = VideoCodecParams::internal(GopProfile::IOnly, 10, 12345.5);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(
            s,
            r#"{"codec":{"kind":"internal_sim"},"profile":"i_only","gop":10,"bitrate_target":12345.5,"quantizer":null}"#
        );
        let back: VideoCodecParams = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }
}
