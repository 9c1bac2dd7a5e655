use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::binning::BinningParams;
use crate::blur::{load_kernel_pool, BlurKernel, KernelPool};
use crate::codec::{JpegParams, VideoCodecParams};
use crate::noise::{GaussianNoiseParams, SensorNoiseParams};
use crate::resample::{ResampleMethod, ResampleSpec};
use crate::{Error, Result};

use super::PipelineConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageKind {
    BlurReal,
    BlurIso,
    BlurAniso,
    NoiseSensor,
    NoiseGaussian,
    CompressJpeg,
    Downsample,
    PixelBin,
}

impl StageKind {
    pub const ALL: [StageKind; 8] = [
        StageKind::BlurReal,
        StageKind::BlurIso,
        StageKind::BlurAniso,
        StageKind::NoiseSensor,
        StageKind::NoiseGaussian,
        StageKind::CompressJpeg,
        StageKind::Downsample,
        StageKind::PixelBin,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            StageKind::BlurReal => "blur_real",
            StageKind::BlurIso => "blur_iso",
            StageKind::BlurAniso => "blur_aniso",
            StageKind::NoiseSensor => "noise_sensor",
            StageKind::NoiseGaussian => "noise_gaussian",
            StageKind::CompressJpeg => "compress_jpeg",
            StageKind::Downsample => "downsample",
            StageKind::PixelBin => "pixel_bin",
        }
    }

    pub fn is_blur(self) -> bool {
        matches!(self, StageKind::BlurReal | StageKind::BlurIso | StageKind::BlurAniso)
    }

    pub fn is_noise(self) -> bool {
        matches!(self, StageKind::NoiseSensor | StageKind::NoiseGaussian)
    }
}

impl fmt::Display for StageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Domain tags for [`derive_seed`].
pub(crate) mod tag {
    pub const PLAN: u64 = 0x706c_616e;
    pub const CROP: u64 = 0x6372_6f70;
    pub const NOISE: u64 = 0x6e6f_6973;
    pub const QUEUE: u64 = 0x7175_6575;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a sequence of words into one seed, SplitMix64 per word.
pub fn derive_seed(words: &[u64]) -> u64 {
    words.iter().fold(0x5eed_u64, |acc, &w| splitmix64(acc ^ splitmix64(w)))
}

pub(crate) fn stream(words: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(words))
}

/// Noise generator for one stage of one frame of one group.
pub fn noise_stream(seed: u64, group_index: u64, frame_index: usize, stage: StageKind) -> ChaCha8Rng {
    stream(&[seed, group_index, tag::NOISE, frame_index as u64, stage.index() as u64])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealBlurParams {
    pub pool_index: usize,
    pub provenance: String,
    pub kernel: BlurKernel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsoBlurParams {
    pub size: usize,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnisoBlurParams {
    pub size: usize,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub theta: f64,
}

/// Parameters for every stage, sampled whether or not the stage is skipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageParams {
    pub blur_real: RealBlurParams,
    pub blur_iso: IsoBlurParams,
    pub blur_aniso: AnisoBlurParams,
    pub noise_sensor: SensorNoiseParams,
    pub noise_gaussian: GaussianNoiseParams,
    pub compress_jpeg: JpegParams,
    pub downsample: ResampleSpec,
    pub pixel_bin: BinningParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkipFlags {
    pub blur_real: bool,
    pub blur_iso: bool,
    pub blur_aniso: bool,
    pub noise_sensor: bool,
    pub noise_gaussian: bool,
    pub compress_jpeg: bool,
    pub downsample: bool,
    pub pixel_bin: bool,
}

impl SkipFlags {
    pub fn get(&self, stage: StageKind) -> bool {
        match stage {
            StageKind::BlurReal => self.blur_real,
            StageKind::BlurIso => self.blur_iso,
            StageKind::BlurAniso => self.blur_aniso,
            StageKind::NoiseSensor => self.noise_sensor,
            StageKind::NoiseGaussian => self.noise_gaussian,
            StageKind::CompressJpeg => self.compress_jpeg,
            StageKind::Downsample => self.downsample,
            StageKind::PixelBin => self.pixel_bin,
        }
    }

    pub fn set(&mut self, stage: StageKind, skip: bool) {
        let slot = match stage {
            StageKind::BlurReal => &mut self.blur_real,
            StageKind::BlurIso => &mut self.blur_iso,
            StageKind::BlurAniso => &mut self.blur_aniso,
            StageKind::NoiseSensor => &mut self.noise_sensor,
            StageKind::NoiseGaussian => &mut self.noise_gaussian,
            StageKind::CompressJpeg => &mut self.compress_jpeg,
            StageKind::Downsample => &mut self.downsample,
            StageKind::PixelBin => &mut self.pixel_bin,
        };
        *slot = skip;
    }

    pub fn all(skip: bool) -> Self {
        let mut f = SkipFlags::default();
        for s in StageKind::ALL {
            f.set(s, skip && s != StageKind::Downsample);
        }
        f
    }
}

/// Every random choice for one group: stage order, parameters, skips and the
/// terminal codec. Applying it needs no other state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegradationPlan {
    pub seed: u64,
    pub group_index: u64,
    pub scale: u32,
    pub order: Vec<StageKind>,
    pub stages: StageParams,
    pub skip: SkipFlags,
    pub video: VideoCodecParams,
}

impl DegradationPlan {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(format!("invalid plan: {m}")));
        if self.order.len() != 8 {
            return bad(format!("order has {} stages", self.order.len()));
        }
        let mut seen = [false; 8];
        for s in &self.order {
            if std::mem::replace(&mut seen[s.index()], true) {
                return bad(format!("stage {s} appears twice"));
            }
        }
        if self.skip.downsample {
            return bad("downsample cannot be skipped".into());
        }
        if ![2, 4].contains(&self.scale) || self.stages.downsample.scale != self.scale {
            return bad(format!(
                "scale {} / downsample scale {}",
                self.scale, self.stages.downsample.scale
            ));
        }
        let s = &self.stages;
        s.blur_real.kernel.size();
        crate::blur::gen_iso_kernel(s.blur_iso.size, s.blur_iso.sigma)?;
        crate::blur::gen_aniso_kernel(s.blur_aniso.size, s.blur_aniso.sigma_x, s.blur_aniso.sigma_y, s.blur_aniso.theta)?;
        s.noise_sensor.validate()?;
        s.noise_gaussian.validate()?;
        s.compress_jpeg.validate()?;
        s.downsample.validate()?;
        s.pixel_bin.validate()?;
        self.video.validate()
    }

    /// Stages that will run, in order.
    pub fn active_stages(&self) -> impl Iterator<Item = StageKind> + '_ {
        self.order.iter().copied().filter(|s| !self.skip.get(*s))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plans serialize")
    }
}

fn uniform(rng: &mut impl Rng, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

fn log_uniform(rng: &mut impl Rng, [lo, hi]: [f64; 2]) -> f64 {
    uniform(rng, [lo.ln(), hi.ln()]).exp().clamp(lo, hi)
}

fn odd_in(rng: &mut impl Rng, [lo, hi]: [usize; 2]) -> usize {
    lo + 2 * rng.random_range(0..=(hi - lo) / 2)
}

/// A validated config together with its kernel pool.
#[derive(Debug, Clone)]
pub struct Planner {
    cfg: PipelineConfig,
    pool: KernelPool,
}

impl Planner {
    pub fn new(cfg: &PipelineConfig) -> Result<Self> {
        cfg.validate()?;
        let pool = match &cfg.kernel_pool_path {
            Some(p) => load_kernel_pool(p)?,
            None => KernelPool::fallback(),
        };
        Self::with_pool(cfg, pool)
    }

    pub fn with_pool(cfg: &PipelineConfig, pool: KernelPool) -> Result<Self> {
        cfg.validate()?;
        if pool.is_empty() {
            return Err(Error::InvalidConfig("kernel pool is empty".into()));
        }
        let lr = cfg.patch_size() / cfg.scale as usize;
        if let Some(k) = pool.kernels().iter().map(BlurKernel::size).max().filter(|&k| k > lr) {
            return Err(Error::InvalidConfig(format!("pool kernel of size {k} does not fit {lr}x{lr} LR frames")));
        }
        Ok(Planner {
            cfg: cfg.clone(),
            pool,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn pool(&self) -> &KernelPool {
        &self.pool
    }

    pub fn sample(&self, seed: u64, group_index: u64) -> DegradationPlan {
        let cfg = &self.cfg;
        let mut rng = stream(&[seed, group_index, tag::PLAN]);

        let mut order = StageKind::ALL.to_vec();
        for i in (1..order.len()).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }

        let pool_index = rng.random_range(0..self.pool.len());
        let blur_real = RealBlurParams {
            pool_index,
            provenance: self.pool.provenance(pool_index).unwrap_or_default().to_owned(),
            kernel: self.pool.kernels()[pool_index].clone(),
        };
        let blur_iso = IsoBlurParams {
            size: cfg.kernel.sample_size(&mut rng),
            sigma: cfg.kernel.sample_iso_sigma(&mut rng),
        };
        let blur_aniso = AnisoBlurParams {
            size: cfg.kernel.sample_size(&mut rng),
            sigma_x: cfg.kernel.sample_aniso_sigma(&mut rng),
            sigma_y: cfg.kernel.sample_aniso_sigma(&mut rng),
            theta: cfg.kernel.sample_theta(&mut rng),
        };
        let noise_sensor = SensorNoiseParams {
            shot_gain: log_uniform(&mut rng, cfg.sensor_noise.shot_gain),
            read_var: log_uniform(&mut rng, cfg.sensor_noise.read_var),
        };
        let g = &cfg.gaussian_noise;
        let sigma = uniform(&mut rng, g.sigma);
        let noise_gaussian = if rng.random_bool(g.covariance_prob) {
            GaussianNoiseParams::correlated(sigma, uniform(&mut rng, g.rho))
        } else {
            GaussianNoiseParams::PerChannelIid { sigma }
        };
        let compress_jpeg = JpegParams {
            quality: rng.random_range(cfg.jpeg_quality[0]..=cfg.jpeg_quality[1]),
        };
        let method = cfg.downsample_methods[rng.random_range(0..cfg.downsample_methods.len())];
        let downsample = ResampleSpec {
            method,
            scale: cfg.scale,
            intermediate: (method == ResampleMethod::DownUp).then(|| uniform(&mut rng, cfg.down_up_intermediate)),
        };
        let pixel_bin = BinningParams {
            box_size: odd_in(&mut rng, cfg.box_size),
        };

        // Re-draw until at least one blur runs.
        let skip = loop {
            let mut flags = SkipFlags::default();
            for s in StageKind::ALL {
                let p = cfg.skip.get(s);
                flags.set(s, s != StageKind::Downsample && rng.random_bool(p));
            }
            if !(flags.blur_real && flags.blur_iso && flags.blur_aniso) {
                break flags;
            }
        };

        let choice = &cfg.video.codecs[rng.random_range(0..cfg.video.codecs.len())];
        let video = VideoCodecParams {
            codec: choice.codec.clone(),
            profile: choice.profile,
            gop: choice.gop,
            bitrate_target: uniform(&mut rng, cfg.video.bitrate),
            quantizer: cfg.video.quantizer,
        };

        DegradationPlan {
            seed,
            group_index,
            scale: cfg.scale,
            order,
            stages: StageParams {
                blur_real,
                blur_iso,
                blur_aniso,
                noise_sensor,
                noise_gaussian,
                compress_jpeg,
                downsample,
                pixel_bin,
            },
            skip,
            video,
        }
    }
}

/// One-shot convenience around [`Planner`]; loads the kernel pool each call.
pub fn sample_plan(cfg: &PipelineConfig, seed: u64, group_index: u64) -> Result<DegradationPlan> {
    Ok(Planner::new(cfg)?.sample(seed, group_index))
}
