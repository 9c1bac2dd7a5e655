use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::binning::{MAX_BOX, MIN_BOX};
use crate::blur::SyntheticKernelRanges;
use crate::codec::{CodecKind, GopProfile, MAX_QUANTIZER, MIN_QUANTIZER};
use crate::resample::ResampleMethod;
use crate::{Error, Result};

use super::StageKind;

/// Per-stage probability that a stage is skipped in a plan. Downsampling is
/// never skipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SkipProbabilities {
    pub blur_real: f64,
    pub blur_iso: f64,
    pub blur_aniso: f64,
    pub noise_sensor: f64,
    pub noise_gaussian: f64,
    pub compress_jpeg: f64,
    pub pixel_bin: f64,
}

impl Default for SkipProbabilities {
    fn default() -> Self {
        SkipProbabilities {
            blur_real: 0.5,
            blur_iso: 0.5,
            blur_aniso: 0.5,
            noise_sensor: 0.3,
            noise_gaussian: 0.3,
            compress_jpeg: 0.25,
            pixel_bin: 0.5,
        }
    }
}

impl SkipProbabilities {
    pub fn uniform(p: f64) -> Self {
        SkipProbabilities {
            blur_real: p,
            blur_iso: p,
            blur_aniso: p,
            noise_sensor: p,
            noise_gaussian: p,
            compress_jpeg: p,
            pixel_bin: p,
        }
    }

    pub fn get(&self, stage: StageKind) -> f64 {
        match stage {
            StageKind::BlurReal => self.blur_real,
            StageKind::BlurIso => self.blur_iso,
            StageKind::BlurAniso => self.blur_aniso,
            StageKind::NoiseSensor => self.noise_sensor,
            StageKind::NoiseGaussian => self.noise_gaussian,
            StageKind::CompressJpeg => self.compress_jpeg,
            StageKind::Downsample => 0.0,
            StageKind::PixelBin => self.pixel_bin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorNoiseRanges {
    /// Log-uniform.
    pub shot_gain: [f64; 2],
    /// Log-uniform.
    pub read_var: [f64; 2],
}

impl Default for SensorNoiseRanges {
    fn default() -> Self {
        SensorNoiseRanges {
            shot_gain: [1e-4, 1e-2],
            read_var: [1e-6, 1e-4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaussianNoiseRanges {
    pub sigma: [f64; 2],
    /// Probability of drawing a channel-correlated covariance instead of iid
    /// channels.
    pub covariance_prob: f64,
    /// Off-diagonal correlation of the covariance mode.
    pub rho: [f64; 2],
}

impl Default for GaussianNoiseRanges {
    fn default() -> Self {
        GaussianNoiseRanges {
            sigma: [1.0 / 255.0, 25.0 / 255.0],
            covariance_prob: 0.5,
            rho: [0.0, 0.8],
        }
    }
}

/// One codec option a plan may draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodecChoice {
    pub codec: CodecKind,
    pub profile: GopProfile,
    pub gop: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VideoRanges {
    /// Bits per second, uniform.
    pub bitrate: [f64; 2],
    /// Drawn uniformly.
    pub codecs: Vec<CodecChoice>,
    /// Forces the codec quantizer instead of rate control.
    pub quantizer: Option<u32>,
}

impl Default for VideoRanges {
    fn default() -> Self {
        VideoRanges {
            bitrate: [1e4, 1e5],
            codecs: vec![
                CodecChoice {
                    codec: CodecKind::InternalSim,
                    profile: GopProfile::IOnly,
                    gop: 10,
                },
                CodecChoice {
                    codec: CodecKind::InternalSim,
                    profile: GopProfile::Ip,
                    gop: 10,
                },
            ],
            quantizer: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Downsampling factor, 2 or 4.
    pub scale: u32,
    /// HR patch side; `None` means 128 at scale 2 and 256 at scale 4.
    pub patch_size: Option<usize>,
    pub group_len: usize,
    /// Frame step between group starts within a clip; `None` means
    /// `group_len` (non-overlapping groups).
    pub stride: Option<usize>,
    pub batch_groups: usize,
    pub queue_size: usize,
    pub flip_augment: bool,
    /// Kernel pool for the real-blur stage; the bundled synthetic pool when
    /// unset.
    pub kernel_pool_path: Option<PathBuf>,
    pub skip: SkipProbabilities,
    pub kernel: SyntheticKernelRanges,
    pub sensor_noise: SensorNoiseRanges,
    pub gaussian_noise: GaussianNoiseRanges,
    pub jpeg_quality: [u32; 2],
    /// Odd sizes only.
    pub box_size: [usize; 2],
    pub downsample_methods: Vec<ResampleMethod>,
    pub down_up_intermediate: [f64; 2],
    pub video: VideoRanges,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            scale: 2,
            patch_size: None,
            group_len: 10,
            stride: None,
            batch_groups: 4,
            queue_size: 180,
            flip_augment: true,
            kernel_pool_path: None,
            skip: SkipProbabilities::default(),
            kernel: SyntheticKernelRanges::default(),
            sensor_noise: SensorNoiseRanges::default(),
            gaussian_noise: GaussianNoiseRanges::default(),
            jpeg_quality: [30, 95],
            box_size: [MIN_BOX, MAX_BOX],
            downsample_methods: ResampleMethod::ALL.to_vec(),
            down_up_intermediate: [1.25, 2.0],
            video: VideoRanges::default(),
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

fn check_range(name: &str, [lo, hi]: [f64; 2], min: f64, max: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && min <= lo && lo <= hi && hi <= max) {
        return Err(invalid(format!("{name} range [{lo}, {hi}] must lie within [{min}, {max}]")));
    }
    Ok(())
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("{name} probability {p} outside [0, 1]")));
    }
    Ok(())
}

impl PipelineConfig {
    pub fn with_scale(scale: u32) -> Self {
        PipelineConfig {
            scale,
            ..Default::default()
        }
    }

    /// Reads a JSON config; missing keys take their defaults.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: PipelineConfig = serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn patch_size(&self) -> usize {
        self.patch_size.unwrap_or(64 * self.scale as usize)
    }

    pub fn stride(&self) -> usize {
        self.stride.unwrap_or(self.group_len)
    }

    /// Fills in the scale-dependent defaults so the serialized form is
    /// explicit.
    pub fn resolved(&self) -> Self {
        PipelineConfig {
            patch_size: Some(self.patch_size()),
            stride: Some(self.stride()),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if ![2, 4].contains(&self.scale) {
            return Err(invalid(format!("scale {} must be 2 or 4", self.scale)));
        }
        let s = self.scale as usize;
        let patch = self.patch_size();
        if patch == 0 || !patch.is_multiple_of(2 * s) {
            return Err(invalid(format!("patch_size {patch} must be a positive multiple of {}", 2 * s)));
        }
        if patch / s < crate::resample::MIN_OUTPUT {
            return Err(invalid(format!("patch_size {patch} gives LR frames under 8 pixels")));
        }
        if self.group_len == 0 || self.stride() == 0 {
            return Err(invalid("group_len and stride must be at least 1"));
        }
        if self.batch_groups == 0 || self.queue_size < self.batch_groups {
            return Err(invalid(format!(
                "need 1 <= batch_groups ({}) <= queue_size ({})",
                self.batch_groups, self.queue_size
            )));
        }

        for stage in StageKind::ALL {
            check_prob(stage.name(), self.skip.get(stage))?;
        }
        if self.skip.blur_real >= 1.0 && self.skip.blur_iso >= 1.0 && self.skip.blur_aniso >= 1.0 {
            return Err(invalid("at least one blur stage must be able to run"));
        }

        self.kernel.validate().map_err(|e| invalid(e.to_string()))?;
        // Blurs may run after downsampling, so kernels must fit LR frames.
        if self.kernel.size[1] > patch / s {
            return Err(invalid(format!(
                "kernel sizes up to {} do not fit {}x{} LR frames",
                self.kernel.size[1],
                patch / s,
                patch / s
            )));
        }
        check_range("sensor_noise.shot_gain", self.sensor_noise.shot_gain, f64::MIN_POSITIVE, f64::MAX)?;
        check_range("sensor_noise.read_var", self.sensor_noise.read_var, f64::MIN_POSITIVE, f64::MAX)?;
        check_range("gaussian_noise.sigma", self.gaussian_noise.sigma, 0.0, 1.0)?;
        check_prob("gaussian_noise.covariance", self.gaussian_noise.covariance_prob)?;
        check_range("gaussian_noise.rho", self.gaussian_noise.rho, -0.5, 1.0)?;

        let [qlo, qhi] = self.jpeg_quality;
        if !(1 <= qlo && qlo <= qhi && qhi <= 100) {
            return Err(invalid(format!("jpeg_quality range [{qlo}, {qhi}] must lie within [1, 100]")));
        }
        let [blo, bhi] = self.box_size;
        if blo % 2 == 0 || bhi % 2 == 0 || blo < MIN_BOX || bhi > MAX_BOX || blo > bhi {
            return Err(invalid(format!("box_size range [{blo}, {bhi}] must be odd within [3, 15]")));
        }
        if self.downsample_methods.is_empty() {
            return Err(invalid("downsample_methods is empty"));
        }
        check_range("down_up_intermediate", self.down_up_intermediate, 1.0, 2.0)?;

        check_range("video.bitrate", self.video.bitrate, f64::MIN_POSITIVE, f64::MAX)?;
        if self.video.codecs.is_empty() {
            return Err(invalid("video.codecs is empty"));
        }
        for c in &self.video.codecs {
            if c.gop == 0 {
                return Err(invalid("codec gop must be at least 1"));
            }
            if let CodecKind::External { command } = &c.codec {
                if command.trim().is_empty() {
                    return Err(invalid("empty external codec command"));
                }
            }
        }
        if let Some(q) = self.video.quantizer {
            if !(MIN_QUANTIZER..=MAX_QUANTIZER).contains(&q) {
                return Err(invalid(format!("video.quantizer {q} outside [1, 31]")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_training_setup() {
        let c = PipelineConfig::default();
        assert!(c.validate().is_ok());
        assert_eq!((c.scale, c.patch_size(), c.group_len, c.stride()), (2, 128, 10, 10));
        assert_eq!((c.batch_groups, c.queue_size), (4, 180));
        assert_eq!(PipelineConfig::with_scale(4).patch_size(), 256);
    }

    #[test]
    fn empty_json_is_the_default() {
        let c: PipelineConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, PipelineConfig::default());
        let c: PipelineConfig = serde_json::from_str(r#"{"scale": 4, "skip": {"pixel_bin": 0.0}}"#).unwrap();
        assert_eq!(c.patch_size(), 256);
        assert_eq!(c.skip.pixel_bin, 0.0);
        assert_eq!(c.skip.blur_real, 0.5);
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"scael": 4}"#).is_err());
    }

    #[test]
    fn resolved_round_trips() {
        let c = PipelineConfig::with_scale(4).resolved();
        assert_eq!(c.patch_size, Some(256));
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<PipelineConfig>(&s).unwrap(), c);
    }

    #[test]
    fn rejects_bad_values() {
        let bad = [
            PipelineConfig { scale: 3, ..Default::default() },
            PipelineConfig { patch_size: Some(130), ..Default::default() },
            PipelineConfig { patch_size: Some(12), ..Default::default() },
            PipelineConfig { patch_size: Some(32), ..Default::default() },
            PipelineConfig { group_len: 0, ..Default::default() },
            PipelineConfig { queue_size: 3, ..Default::default() },
            PipelineConfig { skip: SkipProbabilities::uniform(1.0), ..Default::default() },
            PipelineConfig { jpeg_quality: [20, 101], ..Default::default() },
            PipelineConfig { box_size: [4, 15], ..Default::default() },
            PipelineConfig { down_up_intermediate: [0.5, 2.0], ..Default::default() },
            PipelineConfig { downsample_methods: vec![], ..Default::default() },
            PipelineConfig {
                video: VideoRanges { quantizer: Some(0), ..Default::default() },
                ..Default::default()
            },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(Error::InvalidConfig(_))), "{c:?}");
        }
    }
}
