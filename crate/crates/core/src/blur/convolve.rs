use super::BlurKernel;
use crate::media::{reflect_index, reflect_pad_row, Frame};
use crate::{Error, Result};

/// Per-channel 2-D correlation with reflect padding. Output has the input's
/// size and is clamped to `[0, 1]`.
pub fn convolve(f: &Frame, k: &BlurKernel) -> Result<Frame> {
    let (h, w) = f.dims();
    let size = k.size();
    if size > h || size > w {
        return Err(Error::KernelLargerThanFrame {
            kernel: size,
            height: h,
            width: w,
        });
    }
    let r = k.radius();
    let pw = w + 2 * r;
    let planes = f.to_planes();
    let mut out = vec![0.0f32; h * w * 3];
    let mut padded = vec![0.0f32; (h + 2 * r) * pw];
    let mut partial = vec![0.0f32; w];
    let mut acc = vec![0.0f64; w];
    for (c, plane) in planes.iter().enumerate() {
        let src = plane.data();
        for py in 0..h + 2 * r {
            let sy = reflect_index(py as isize - r as isize, h);
            reflect_pad_row(&src[sy * w..(sy + 1) * w], r, &mut padded[py * pw..(py + 1) * pw]);
        }
        for y in 0..h {
            acc.fill(0.0);
            for ky in 0..size {
                let row = &padded[(y + ky) * pw..(y + ky + 1) * pw];
                let taps = &k.weights()[ky * size..(ky + 1) * size];
                if taps.iter().all(|&t| t == 0.0) {
                    continue;
                }
                // Short f32 runs per kernel row, summed across rows in f64.
                partial.fill(0.0);
                for (kx, &t) in taps.iter().enumerate() {
                    if t == 0.0 {
                        continue;
                    }
                    for (p, &v) in partial.iter_mut().zip(&row[kx..kx + w]) {
                        *p += t * v;
                    }
                }
                for (a, &p) in acc.iter_mut().zip(&partial) {
                    *a += p as f64;
                }
            }
            for (x, &a) in acc.iter().enumerate() {
                out[(y * w + x) * 3 + c] = a as f32;
            }
        }
    }
    Ok(Frame::from_clamped(h, w, out))
}
