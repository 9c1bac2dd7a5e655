use serde::{Deserialize, Serialize};

use super::dct::{fdct_8x8, idct_8x8};
use super::tables::{scaled_table, CHROMA_TABLE, LUMA_TABLE};
use super::PaddedPlane;
use crate::media::Frame;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JpegParams {
    pub quality: u32,
}

impl JpegParams {
    pub fn new(quality: u32) -> Result<Self> {
        let p = JpegParams { quality };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=100).contains(&self.quality) {
            return Err(Error::InvalidQuality(self.quality));
        }
        Ok(())
    }
}

fn code_plane(p: &mut PaddedPlane, table: &[f32; 64]) {
    for by in (0..p.height).step_by(8) {
        for bx in (0..p.width).step_by(8) {
            let mut b = p.block(by, bx);
            for v in b.iter_mut() {
                *v -= 128.0;
            }
            let mut c = fdct_8x8(&b);
            for (v, q) in c.iter_mut().zip(table) {
                *v = (*v / q).round() * q;
            }
            let mut r = idct_8x8(&c);
            for v in r.iter_mut() {
                *v += 128.0;
            }
            p.put_block(by, bx, &r);
        }
    }
}

/// Simulated baseline JPEG round trip (4:2:0, float pixels, no entropy stage).
pub fn jpeg_degrade(f: &Frame, p: &JpegParams) -> Result<Frame> {
    p.validate()?;
    let (h, w) = f.dims();
    let n = h * w;
    let src = f.data();
    let mut y = vec![0.0f32; n];
    let mut cb = vec![0.0f32; n];
    let mut cr = vec![0.0f32; n];
    for i in 0..n {
        let (r, g, b) = (src[3 * i] * 255.0, src[3 * i + 1] * 255.0, src[3 * i + 2] * 255.0);
        y[i] = 0.299 * r + 0.587 * g + 0.114 * b;
        cb[i] = -0.168_736 * r - 0.331_264 * g + 0.5 * b + 128.0;
        cr[i] = 0.5 * r - 0.418_688 * g - 0.081_312 * b + 128.0;
    }

    let mut yp = PaddedPlane::from_plane(&y, h, w, 16, 1.0);
    let (ph, pw) = (yp.height, yp.width);
    let subsample = |c: &[f32]| {
        let full = PaddedPlane::from_plane(c, h, w, 16, 1.0);
        let (sh, sw) = (ph / 2, pw / 2);
        let mut data = Vec::with_capacity(sh * sw);
        for sy in 0..sh {
            for sx in 0..sw {
                let i = 2 * sy * pw + 2 * sx;
                let s = (full.data[i] + full.data[i + 1]) + (full.data[i + pw] + full.data[i + pw + 1]);
                data.push(s * 0.25);
            }
        }
        PaddedPlane {
            height: sh,
            width: sw,
            data,
        }
    };
    let mut cbp = subsample(&cb);
    let mut crp = subsample(&cr);

    code_plane(&mut yp, &scaled_table(&LUMA_TABLE, p.quality));
    let ct = scaled_table(&CHROMA_TABLE, p.quality);
    code_plane(&mut cbp, &ct);
    code_plane(&mut crp, &ct);

    let sw = pw / 2;
    let mut out = Vec::with_capacity(n * 3);
    for yy in 0..h {
        for xx in 0..w {
            let l = yp.data[yy * pw + xx];
            let ci = (yy / 2) * sw + xx / 2;
            let (u, v) = (cbp.data[ci] - 128.0, crp.data[ci] - 128.0);
            out.push((l + 1.402 * v) / 255.0);
            out.push((l - 0.344_136 * u - 0.714_136 * v) / 255.0);
            out.push((l + 1.772 * u) / 255.0);
        }
    }
    Ok(Frame::from_clamped(h, w, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::media::psnr;

    #[test]
    fn rejects_out_of_range_quality() {
        assert!(matches!(JpegParams::new(0), Err(Error::InvalidQuality(0))));
        assert!(matches!(JpegParams::new(101), Err(Error::InvalidQuality(101))));
        let f = Frame::filled(16, 16, [0.5; 3]);
        assert!(jpeg_degrade(&f, &JpegParams { quality: 0 }).is_err());
    }

    #[test]
    fn quality_hundred_is_near_lossless() {
        for seed in 0..3 {
            let f = fixtures::natural_frame(72, 88, seed);
            let out = jpeg_degrade(&f, &JpegParams { quality: 100 }).unwrap();
            assert!(psnr(&out, &f).unwrap() >= 50.0, "seed {seed}");
        }
    }

    #[test]
    fn mid_gray_survives_any_quality() {
        let f = Frame::filled(40, 24, [128.0 / 255.0; 3]);
        for q in [1, 10, 30, 50, 75, 95, 100] {
            let out = jpeg_degrade(&f, &JpegParams { quality: q }).unwrap();
            assert!(psnr(&out, &f).unwrap() >= 55.0, "quality {q}");
        }
    }

    #[test]
    fn lower_quality_is_worse() {
        for seed in 0..5 {
            let f = fixtures::natural_frame(64, 64, seed);
            let lo = psnr(&jpeg_degrade(&f, &JpegParams { quality: 30 }).unwrap(), &f).unwrap();
            let hi = psnr(&jpeg_degrade(&f, &JpegParams { quality: 95 }).unwrap(), &f).unwrap();
            assert!(lo <= hi, "seed {seed}: {lo} > {hi}");
        }
    }

    #[test]
    fn recompression_is_near_fixed_point() {
        for q in [30, 60, 95] {
            let f = fixtures::natural_frame(64, 64, q as u64);
            let p = JpegParams { quality: q };
            let once = jpeg_degrade(&f, &p).unwrap();
            let twice = jpeg_degrade(&once, &p).unwrap();
            assert!(psnr(&twice, &once).unwrap() >= 40.0, "quality {q}");
        }
    }

    #[test]
    fn keeps_odd_dimensions() {
        let f = fixtures::natural_frame(13, 27, 1);
        let out = jpeg_degrade(&f, &JpegParams { quality: 75 }).unwrap();
        assert_eq!(out.dims(), (13, 27));
    }
}
