//! Pixel binning modeled as charge mixing: a box average over same-color
//! neighbours on each Bayer subplane, at unchanged resolution.

use serde::{Deserialize, Serialize};

use crate::media::{
    demosaic_bilinear, linear_to_srgb, merge_subplanes, mosaic_rggb, reflect_index,
    split_subplanes, srgb_to_linear, Frame, Plane, RawMosaic,
};
use crate::{Error, Result};

pub const MIN_BOX: usize = 3;
pub const MAX_BOX: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinningParams {
    pub box_size: usize,
}

impl BinningParams {
    pub fn validate(&self) -> Result<()> {
        check_box(self.box_size)
    }
}

fn check_box(size: usize) -> Result<()> {
    if size % 2 == 1 && (MIN_BOX..=MAX_BOX).contains(&size) {
        Ok(())
    } else {
        Err(Error::InvalidBoxSize(size))
    }
}

/// Stride-1 `size x size` average with reflect padding.
pub fn box_filter_plane(p: &Plane, size: usize) -> Plane {
    let (h, w) = p.dims();
    let r = (size / 2) as isize;
    let inv = 1.0 / size as f64;
    let src = p.data();
    let mut tmp = vec![0.0f64; h * w];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        let mut acc: f64 = (-r..=r).map(|d| row[reflect_index(d, w)] as f64).sum();
        for x in 0..w {
            tmp[y * w + x] = acc * inv;
            let xi = x as isize;
            acc += row[reflect_index(xi + r + 1, w)] as f64 - row[reflect_index(xi - r, w)] as f64;
        }
    }
    let mut out = vec![0.0f32; h * w];
    for x in 0..w {
        let col = |y: isize| tmp[reflect_index(y, h) * w + x];
        let mut acc: f64 = (-r..=r).map(col).sum();
        for y in 0..h {
            out[y * w + x] = (acc * inv) as f32;
            let yi = y as isize;
            acc += col(yi + r + 1) - col(yi - r);
        }
    }
    Plane::new(h, w, out).expect("same dimensions")
}

/// Box-filters each of the four RGGB subplanes independently.
pub fn bin_raw(m: &RawMosaic, box_size: usize) -> Result<RawMosaic> {
    check_box(box_size)?;
    let planes = split_subplanes(m).map(|p| box_filter_plane(&p, box_size));
    merge_subplanes(&planes)
}

/// sRGB -> linear -> RGGB -> per-subplane box -> demosaic -> sRGB.
pub fn pixel_bin(f: &Frame, p: &BinningParams) -> Result<Frame> {
    p.validate()?;
    let raw = mosaic_rggb(&srgb_to_linear(f))?;
    let binned = bin_raw(&raw, p.box_size)?;
    Ok(linear_to_srgb(&demosaic_bilinear(&binned)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive_mean(p: &Plane, size: usize) -> Vec<f64> {
        let (h, w) = p.dims();
        let r = (size / 2) as isize;
        let mut out = Vec::with_capacity(h * w);
        for y in 0..h as isize {
            for x in 0..w as isize {
                let mut s = 0.0;
                for dy in -r..=r {
                    for dx in -r..=r {
                        s += p.get(reflect_index(y + dy, h), reflect_index(x + dx, w)) as f64;
                    }
                }
                out.push(s / (size * size) as f64);
            }
        }
        out
    }

    fn random_plane(h: usize, w: usize, rng: &mut impl Rng) -> Plane {
        Plane::from_fn(h, w, |_, _| rng.random())
    }

    #[test]
    fn constant_frame_is_identity() {
        let f = Frame::filled(32, 32, [0.2, 0.4, 0.7]);
        for box_size in [3, 9, 15] {
            let out = pixel_bin(&f, &BinningParams { box_size }).unwrap();
            for (a, b) in out.data().iter().zip(f.data()) {
                assert!((a - b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn impulse_matches_mean_filter_oracle() {
        let mut impulse = Plane::filled(8, 8, 0.0);
        impulse.data_mut()[3 * 8 + 4] = 1.0;
        let planes = [impulse.clone(), Plane::filled(8, 8, 0.1), impulse.clone(), impulse];
        let raw = merge_subplanes(&planes).unwrap();
        let binned = split_subplanes(&bin_raw(&raw, 3).unwrap());
        for (got, src) in binned.iter().zip(&planes) {
            for (a, b) in got.data().iter().zip(naive_mean(src, 3)) {
                assert!((*a as f64 - b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn larger_box_smooths_more() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = Frame::from_fn(64, 64, |_, _| [rng.random(), rng.random(), rng.random()]);
        let energy = |f: &Frame| {
            let mut e = 0.0;
            for y in 1..63 {
                for x in 1..63 {
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
        };
        let e3 = energy(&pixel_bin(&f, &BinningParams { box_size: 3 }).unwrap());
        let e15 = energy(&pixel_bin(&f, &BinningParams { box_size: 15 }).unwrap());
        assert!(e15 <= e3);
    }

    #[test]
    fn invalid_parameters() {
        let f = Frame::filled(16, 16, [0.5; 3]);
        for box_size in [1, 4, 17] {
            assert!(matches!(
                pixel_bin(&f, &BinningParams { box_size }),
                Err(Error::InvalidBoxSize(_))
            ));
        }
        let odd = Frame::filled(15, 16, [0.5; 3]);
        assert!(matches!(
            pixel_bin(&odd, &BinningParams { box_size: 3 }),
            Err(Error::OddDimensions { .. })
        ));
    }

    #[test]
    fn subplane_mean_preserved_with_constant_border_band() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for size in [3, 7, 15] {
            let band = size / 2 + 1;
            let (h, w) = (24, 28);
            let p = Plane::from_fn(h, w, |y, x| {
                if y < band || x < band || y >= h - band || x >= w - band {
                    0.3
                } else {
                    rng.random()
                }
            });
            let out = box_filter_plane(&p, size);
            assert!((out.mean() - p.mean()).abs() < 1e-5);
        }
    }

    proptest! {
        #[test]
        fn box_equals_naive_average_pooling(seed in any::<u64>(), half in 1usize..=7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_plane(16, 16, &mut rng);
            let size = 2 * half + 1;
            let got = box_filter_plane(&p, size);
            for (a, b) in got.data().iter().zip(naive_mean(&p, size)) {
                prop_assert!((*a as f64 - b).abs() < 1e-6);
            }
        }

        #[test]
        fn larger_box_never_increases_variance(seed in any::<u64>(), half in 1usize..=6) {
            // A 15-box on a 16-wide plane wraps almost the whole mirrored
            // plane and can re-amplify; 32 keeps the box well inside.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_plane(32, 32, &mut rng);
            let small = box_filter_plane(&p, 2 * half + 1);
            let large = box_filter_plane(&p, 2 * half + 3);
            prop_assert!(small.variance() <= p.variance());
            prop_assert!(large.variance() <= small.variance());
        }
    }
}
