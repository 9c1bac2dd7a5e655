//! RGGB mosaicing and bilinear demosaicing in linear light.

use super::{reflect_index, Frame, Plane};
use crate::{Error, Result};

/// A single-channel RGGB sensor plane in linear light.
///
/// Site `(y, x)` holds red when both are even, blue when both are odd and
/// green otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct RawMosaic {
    plane: Plane,
}

impl RawMosaic {
    pub fn new(plane: Plane) -> Result<Self> {
        let (h, w) = plane.dims();
        if h % 2 != 0 || w % 2 != 0 {
            return Err(Error::OddDimensions {
                height: h,
                width: w,
            });
        }
        if plane.data().iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidFrame(
                "mosaic values must be finite and non-negative".into(),
            ));
        }
        Ok(RawMosaic { plane })
    }

    pub(crate) fn from_plane_unchecked(plane: Plane) -> Self {
        RawMosaic { plane }
    }

    pub fn plane(&self) -> &Plane {
        &self.plane
    }

    pub fn into_plane(self) -> Plane {
        self.plane
    }

    pub fn dims(&self) -> (usize, usize) {
        self.plane.dims()
    }
}

/// Channel sampled at `(y, x)` of an RGGB mosaic.
#[inline]
pub(crate) fn rggb_channel(y: usize, x: usize) -> usize {
    match (y & 1, x & 1) {
        (0, 0) => 0,
        (1, 1) => 2,
        _ => 1,
    }
}

pub fn mosaic_rggb(f: &Frame) -> Result<RawMosaic> {
    let (h, w) = f.dims();
    if h % 2 != 0 || w % 2 != 0 {
        return Err(Error::OddDimensions {
            height: h,
            width: w,
        });
    }
    let src = f.data();
    let mut data = Vec::with_capacity(h * w);
    for y in 0..h {
        for x in 0..w {
            data.push(src[(y * w + x) * 3 + rggb_channel(y, x)]);
        }
    }
    Ok(RawMosaic::from_plane_unchecked(Plane {
        height: h,
        width: w,
        data,
    }))
}

/// Bilinear demosaic: each missing color is the mean of the nearest sites
/// carrying that color, with reflect padding at the borders.
pub fn demosaic_bilinear(m: &RawMosaic) -> Frame {
    let (h, w) = m.dims();
    // One reflected sample of border on every side.
    let pw = w + 2;
    let mut padded = vec![0.0f32; (h + 2) * pw];
    for py in 0..h + 2 {
        let sy = reflect_index(py as isize - 1, h);
        super::reflect_pad_row(
            &m.plane.data()[sy * w..(sy + 1) * w],
            1,
            &mut padded[py * pw..(py + 1) * pw],
        );
    }
    let mut out = vec![0.0f32; h * w * 3];
    for y in 0..h {
        let up = &padded[y * pw..(y + 1) * pw];
        let mid = &padded[(y + 1) * pw..(y + 2) * pw];
        let down = &padded[(y + 2) * pw..(y + 3) * pw];
        for x in 0..w {
            let px = x + 1;
            let c = mid[px];
            // Pairwise sums keep constant inputs exact.
            let cross = || ((up[px] + down[px]) + (mid[px - 1] + mid[px + 1])) * 0.25;
            let diag = || ((up[px - 1] + up[px + 1]) + (down[px - 1] + down[px + 1])) * 0.25;
            let horiz = || (mid[px - 1] + mid[px + 1]) * 0.5;
            let vert = || (up[px] + down[px]) * 0.5;
            let rgb = match (y & 1, x & 1) {
                (0, 0) => [c, cross(), diag()],
                (0, 1) => [horiz(), c, vert()],
                (1, 0) => [vert(), c, horiz()],
                _ => [diag(), cross(), c],
            };
            out[(y * w + x) * 3..(y * w + x) * 3 + 3].copy_from_slice(&rgb);
        }
    }
    Frame::from_clamped(h, w, out)
}

/// Splits a mosaic into its four `h/2 x w/2` subplanes in the order
/// R, G (red rows), G (blue rows), B.
pub fn split_subplanes(m: &RawMosaic) -> [Plane; 4] {
    let (h, w) = m.dims();
    let (sh, sw) = (h / 2, w / 2);
    let p = m.plane.data();
    let offsets = [(0, 0), (0, 1), (1, 0), (1, 1)];
    offsets.map(|(oy, ox)| {
        Plane::from_fn(sh, sw, |y, x| p[(2 * y + oy) * w + 2 * x + ox])
    })
}

/// Inverse of [`split_subplanes`].
pub fn merge_subplanes(planes: &[Plane; 4]) -> Result<RawMosaic> {
    let (sh, sw) = planes[0].dims();
    if planes.iter().any(|p| p.dims() != (sh, sw)) {
        return Err(Error::DimensionMismatch("subplane sizes differ".into()));
    }
    let (h, w) = (sh * 2, sw * 2);
    let mut data = vec![0.0f32; h * w];
    let offsets = [(0, 0), (0, 1), (1, 0), (1, 1)];
    for (plane, (oy, ox)) in planes.iter().zip(offsets) {
        for y in 0..sh {
            for x in 0..sw {
                data[(2 * y + oy) * w + 2 * x + ox] = plane.data()[y * sw + x];
            }
        }
    }
    Ok(RawMosaic::from_plane_unchecked(Plane {
        height: h,
        width: w,
        data,
    }))
}
