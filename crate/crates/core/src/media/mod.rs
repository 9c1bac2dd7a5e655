//! Frame and clip data model shared by every degradation.
//!
//! Pixels are stored as interleaved RGB `f32` in `[0, 1]`. 8-bit values only
//! appear at the PNG boundary (see [`read_frame`] / [`write_frame`]).

mod bayer;
mod color;
mod io;

pub use bayer::{demosaic_bilinear, merge_subplanes, mosaic_rggb, split_subplanes, RawMosaic};
pub use color::{linear_to_srgb, linear_to_srgb_value, srgb_to_linear, srgb_to_linear_value};
pub use io::{read_clip, read_frame, write_clip, write_frame, ClipMeta, CLIP_META_FILE};
pub(crate) use io::{frame_file_name, read_clip_meta};

use crate::{Error, Result};

/// An RGB frame, row-major, interleaved, values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl Frame {
    /// Builds a frame from interleaved RGB data. Values are clamped to
    /// `[0, 1]`; non-finite values are rejected.
    pub fn new(height: usize, width: usize, mut data: Vec<f32>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidFrame(format!("empty frame {height}x{width}")));
        }
        if data.len() != height * width * 3 {
            return Err(Error::InvalidFrame(format!(
                "expected {} values for {height}x{width}x3, got {}",
                height * width * 3,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidFrame("non-finite pixel value".into()));
        }
        clamp_unit(&mut data);
        Ok(Frame {
            height,
            width,
            data,
        })
    }

    /// Internal constructor for operator outputs: clamps to `[0, 1]` and maps
    /// NaN to 0.
    pub(crate) fn from_clamped(height: usize, width: usize, mut data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), height * width * 3);
        for v in data.iter_mut() {
            *v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
        }
        Frame {
            height,
            width,
            data,
        }
    }

    pub fn filled(height: usize, width: usize, rgb: [f32; 3]) -> Self {
        let rgb = rgb.map(|v| v.clamp(0.0, 1.0));
        let mut data = Vec::with_capacity(height * width * 3);
        for _ in 0..height * width {
            data.extend_from_slice(&rgb);
        }
        Frame {
            height,
            width,
            data,
        }
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> [f32; 3]) -> Self {
        let mut data = Vec::with_capacity(height * width * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(y, x));
            }
        }
        Frame::from_clamped(height, width, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn pixel(&self, y: usize, x: usize) -> [f32; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn get(&self, y: usize, x: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * 3 + c]
    }

    /// Splits into three planar channels.
    pub fn to_planes(&self) -> [Plane; 3] {
        let n = self.height * self.width;
        let mut planes = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for (i, px) in self.data.chunks_exact(3).enumerate() {
            planes[0][i] = px[0];
            planes[1][i] = px[1];
            planes[2][i] = px[2];
        }
        planes.map(|data| Plane {
            height: self.height,
            width: self.width,
            data,
        })
    }

    /// Interleaves three equally sized planes, clamping to `[0, 1]`.
    pub fn from_planes(planes: &[Plane; 3]) -> Result<Self> {
        let (h, w) = planes[0].dims();
        if planes.iter().any(|p| p.dims() != (h, w)) {
            return Err(Error::DimensionMismatch("plane sizes differ".into()));
        }
        let mut data = Vec::with_capacity(h * w * 3);
        for i in 0..h * w {
            data.push(planes[0].data[i]);
            data.push(planes[1].data[i]);
            data.push(planes[2].data[i]);
        }
        Ok(Frame::from_clamped(h, w, data))
    }

    pub fn crop(&self, top: usize, left: usize, height: usize, width: usize) -> Result<Frame> {
        if height == 0 || width == 0 || top + height > self.height || left + width > self.width {
            return Err(Error::DimensionMismatch(format!(
                "crop {height}x{width}+{top}+{left} outside {}x{}",
                self.height, self.width
            )));
        }
        let mut data = Vec::with_capacity(height * width * 3);
        for y in top..top + height {
            let row = (y * self.width + left) * 3;
            data.extend_from_slice(&self.data[row..row + width * 3]);
        }
        Ok(Frame {
            height,
            width,
            data,
        })
    }

    pub fn flip_horizontal(&self) -> Frame {
        let mut data = Vec::with_capacity(self.data.len());
        for row in self.data.chunks_exact(self.width * 3) {
            for px in row.chunks_exact(3).rev() {
                data.extend_from_slice(px);
            }
        }
        Frame { data, ..*self }
    }

    pub fn flip_vertical(&self) -> Frame {
        let mut data = Vec::with_capacity(self.data.len());
        for row in self.data.chunks_exact(self.width * 3).rev() {
            data.extend_from_slice(row);
        }
        Frame { data, ..*self }
    }

    /// BT.601 luma plane.
    pub fn luma(&self) -> Plane {
        let data = self
            .data
            .chunks_exact(3)
            .map(|p| 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2])
            .collect();
        Plane {
            height: self.height,
            width: self.width,
            data,
        }
    }
}

/// A single-channel `f32` plane with no range restriction.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl Plane {
    pub fn new(height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != height * width {
            return Err(Error::InvalidFrame(format!(
                "expected {} values for a {height}x{width} plane, got {}",
                height * width,
                data.len()
            )));
        }
        Ok(Plane {
            height,
            width,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, value: f32) -> Self {
        Plane {
            height,
            width,
            data: vec![value; height * width],
        }
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f32) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                data.push(f(y, x));
            }
        }
        Plane {
            height,
            width,
            data,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn get(&self, y: usize, x: usize) -> f32 {
        self.data[y * self.width + x]
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum::<f64>() / self.data.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.data
            .iter()
            .map(|&v| (v as f64 - m).powi(2))
            .sum::<f64>()
            / self.data.len() as f64
    }
}

/// An ordered run of equally sized frames.
#[derive(Debug, Clone, PartialEq)]
pub struct Clip {
    frames: Vec<Frame>,
    frame_rate: f64,
}

impl Clip {
    pub fn new(frames: Vec<Frame>, frame_rate: f64) -> Result<Self> {
        let Some(first) = frames.first() else {
            return Err(Error::EmptyClip);
        };
        let dims = first.dims();
        if let Some(f) = frames.iter().find(|f| f.dims() != dims) {
            return Err(Error::DimensionMismatch(format!(
                "clip frames differ in size: {:?} vs {:?}",
                dims,
                f.dims()
            )));
        }
        if !(frame_rate.is_finite() && frame_rate > 0.0) {
            return Err(Error::InvalidFrame(format!("bad frame rate {frame_rate}")));
        }
        Ok(Clip { frames, frame_rate })
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }

    pub fn frame_rate(&self) -> f64 {
        self.frame_rate
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.frames[0].dims()
    }

    /// Duration in seconds implied by the frame count and rate.
    pub fn duration(&self) -> f64 {
        self.frames.len() as f64 / self.frame_rate
    }
}

/// Mirror index without repeating the edge sample: `-1 -> 1`, `n -> n - 2`.
#[inline]
pub fn reflect_index(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let n = n as isize;
    let period = 2 * (n - 1);
    let mut i = i.rem_euclid(period);
    if i >= n {
        i = period - i;
    }
    i as usize
}

/// Copies `src` (length `n`) into `dst` with `pad` reflected samples on each
/// side. `dst.len()` must be `n + 2 * pad`.
#[inline]
pub(crate) fn reflect_pad_row(src: &[f32], pad: usize, dst: &mut [f32]) {
    let n = src.len();
    debug_assert_eq!(dst.len(), n + 2 * pad);
    dst[pad..pad + n].copy_from_slice(src);
    for i in 0..pad {
        dst[i] = src[reflect_index(i as isize - pad as isize, n)];
        dst[pad + n + i] = src[reflect_index((n + i) as isize, n)];
    }
}

/// Peak signal-to-noise ratio in dB over all channels, peak value 1.0.
/// Identical frames give `f64::INFINITY`.
pub fn psnr(a: &Frame, b: &Frame) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch(format!(
            "psnr of {:?} vs {:?}",
            a.dims(),
            b.dims()
        )));
    }
    let mse = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(&x, &y)| (x as f64 - y as f64).powi(2))
        .sum::<f64>()
        / a.data.len() as f64;
    Ok(if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (1.0 / mse).log10()
    })
}

pub(crate) fn clamp_unit(data: &mut [f32]) {
    for v in data {
        *v = v.clamp(0.0, 1.0);
    }
}
