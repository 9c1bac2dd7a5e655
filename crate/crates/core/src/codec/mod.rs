//! Compression artifacts: a JPEG round-trip simulation and a small
//! deterministic GOP video codec with motion compensation.

mod dct;
mod external;
mod jpeg;
mod tables;
mod video;

pub use dct::{fdct_8x8, idct_8x8};
pub use jpeg::{jpeg_degrade, JpegParams};
pub use tables::{scaled_table, CHROMA_TABLE, LUMA_TABLE};
pub use video::{
    quantizer_scale, video_compress, video_compress_with_stats, CodecKind, CodecStats, FrameKind, FrameStats,
    GopProfile, VideoCodecParams, MAX_QUANTIZER, MAX_SEARCH, MIN_QUANTIZER,
};

/// Planar 0..255-scale working buffer, padded by reflection to a multiple of
/// `align` in both dimensions.
#[derive(Debug, Clone)]
pub(crate) struct PaddedPlane {
    pub height: usize,
    pub width: usize,
    pub data: Vec<f32>,
}

impl PaddedPlane {
    pub fn from_plane(src: &[f32], h: usize, w: usize, align: usize, scale: f32) -> Self {
        let ph = h.div_ceil(align) * align;
        let pw = w.div_ceil(align) * align;
        let mut data = Vec::with_capacity(ph * pw);
        for y in 0..ph {
            let sy = crate::media::reflect_index(y as isize, h);
            for x in 0..pw {
                let sx = crate::media::reflect_index(x as isize, w);
                data.push(src[sy * w + sx] * scale);
            }
        }
        PaddedPlane {
            height: ph,
            width: pw,
            data,
        }
    }

    pub fn block(&self, by: usize, bx: usize) -> [f32; 64] {
        let mut b = [0.0f32; 64];
        for y in 0..8 {
            let row = (by + y) * self.width + bx;
            b[y * 8..y * 8 + 8].copy_from_slice(&self.data[row..row + 8]);
        }
        b
    }

    pub fn put_block(&mut self, by: usize, bx: usize, b: &[f32; 64]) {
        for y in 0..8 {
            let row = (by + y) * self.width + bx;
            self.data[row..row + 8].copy_from_slice(&b[y * 8..y * 8 + 8]);
        }
    }
}
