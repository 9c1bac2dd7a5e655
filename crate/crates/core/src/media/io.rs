//! PNG frame I/O and the on-disk clip layout (`%06d.png` + `clip.json`).

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::Path;

use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::{ColorType, DynamicImage, ImageEncoder, ImageFormat, ImageReader};
use serde::{Deserialize, Serialize};

use super::{Clip, Frame};
use crate::{Error, Result};

pub const CLIP_META_FILE: &str = "clip.json";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClipMeta {
    pub frame_rate: f64,
    pub count: usize,
}

/// Reads an 8-bit PNG; code `k` maps to `k / 255`.
pub fn read_frame(path: impl AsRef<Path>) -> Result<Frame> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = ImageReader::new(BufReader::new(file))
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    if reader.format() != Some(ImageFormat::Png) {
        return Err(Error::UnsupportedFormat(format!(
            "{} is not a PNG file",
            path.display()
        )));
    }
    let img = reader.decode().map_err(|e| match e {
        image::ImageError::IoError(e) => Error::io(path, e),
        other => Error::UnsupportedFormat(format!("{}: {other}", path.display())),
    })?;
    let rgb = match img {
        DynamicImage::ImageRgb8(rgb) => rgb,
        DynamicImage::ImageRgba8(_) | DynamicImage::ImageLuma8(_) | DynamicImage::ImageLumaA8(_) => {
            img.to_rgb8()
        }
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "{}: {:?} is not 8 bits per channel",
                path.display(),
                other.color()
            )))
        }
    };
    let (w, h) = rgb.dimensions();
    let data = rgb.into_raw().into_iter().map(|k| k as f32 / 255.0).collect();
    Frame::new(h as usize, w as usize, data)
}

#[inline]
fn quantize(v: f32) -> u8 {
    // f32::round is half-away-from-zero.
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Writes an 8-bit RGB PNG, rounding to the nearest code.
pub fn write_frame(frame: &Frame, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes: Vec<u8> = frame.data().iter().map(|&v| quantize(v)).collect();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let encoder = PngEncoder::new_with_quality(
        BufWriter::new(file),
        CompressionType::Fast,
        FilterType::Adaptive,
    );
    encoder
        .write_image(
            &bytes,
            frame.width() as u32,
            frame.height() as u32,
            ColorType::Rgb8.into(),
        )
        .map_err(|e| match e {
            image::ImageError::IoError(e) => Error::io(path, e),
            other => Error::UnsupportedFormat(other.to_string()),
        })
}

pub(crate) fn frame_file_name(index: usize) -> String {
    format!("{index:06}.png")
}

pub(crate) fn read_clip_meta(dir: &Path) -> Result<ClipMeta> {
    let path = dir.join(CLIP_META_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json {
        path,
        message: e.to_string(),
    })
}

/// Reads a clip directory of numbered frames plus `clip.json`.
pub fn read_clip(dir: impl AsRef<Path>) -> Result<Clip> {
    let dir = dir.as_ref();
    let meta = read_clip_meta(dir)?;
    let frames = (0..meta.count)
        .map(|i| read_frame(dir.join(frame_file_name(i))))
        .collect::<Result<Vec<_>>>()?;
    Clip::new(frames, meta.frame_rate)
}

/// Writes a clip directory, creating it if needed.
pub fn write_clip(clip: &Clip, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (i, frame) in clip.frames().iter().enumerate() {
        write_frame(frame, dir.join(frame_file_name(i)))?;
    }
    let meta = ClipMeta {
        frame_rate: clip.frame_rate(),
        count: clip.len(),
    };
    let path = dir.join(CLIP_META_FILE);
    let text = serde_json::to_string_pretty(&meta).expect("clip meta serializes");
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn write_read_within_quantization_bound() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let f = Frame::from_fn(17, 23, |_, _| [rng.random(), rng.random(), rng.random()]);
        let path = dir.path().join("f.png");
        write_frame(&f, &path).unwrap();
        let back = read_frame(&path).unwrap();
        for (a, b) in back.data().iter().zip(f.data()) {
            assert!((a - b).abs() <= 1.0 / 510.0 + 1e-7);
        }
    }

    #[test]
    fn codes_map_to_unit_interval() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("codes.png");
        image::RgbImage::from_raw(2, 1, vec![255, 128, 0, 1, 2, 3])
            .unwrap()
            .save(&path)
            .unwrap();
        let f = read_frame(&path).unwrap();
        assert_eq!(f.pixel(0, 0), [1.0, 128.0 / 255.0, 0.0]);
    }

    #[test]
    fn rounding_is_half_away_from_zero() {
        assert_eq!(quantize(0.5 / 255.0), 1);
        assert_eq!(quantize(1.49 / 255.0), 1);
        assert_eq!(quantize(1.0), 255);
    }

    #[test]
    fn non_png_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.png");
        fs::write(&path, b"definitely not an image").unwrap();
        assert!(matches!(read_frame(&path), Err(Error::UnsupportedFormat(_))));
        assert!(matches!(
            read_frame(dir.path().join("missing.png")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn sixteen_bit_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("deep.png");
        image::ImageBuffer::<image::Rgb<u16>, _>::from_raw(1, 1, vec![1u16, 2, 3])
            .unwrap()
            .save(&path)
            .unwrap();
        assert!(matches!(read_frame(&path), Err(Error::UnsupportedFormat(_))));
    }

    #[test]
    fn clip_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let frames = (0..3)
            .map(|i| Frame::filled(4, 4, [i as f32 / 255.0, 0.5, 1.0]))
            .collect();
        let clip = Clip::new(frames, 24.0).unwrap();
        write_clip(&clip, dir.path()).unwrap();
        assert!(dir.path().join("000002.png").exists());
        let back = read_clip(dir.path()).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back.frame_rate(), 24.0);
        assert_eq!(back.frames()[1].pixel(0, 0)[0], 1.0 / 255.0);
    }
}
