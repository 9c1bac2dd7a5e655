use rand::Rng;
use rayon::prelude::*;

use crate::binning::pixel_bin;
use crate::blur::{convolve, gen_aniso_kernel, gen_iso_kernel};
use crate::codec::{jpeg_degrade, video_compress};
use crate::media::{Clip, Frame};
use crate::noise::{add_gaussian_noise, add_sensor_noise};
use crate::{Error, Result};

use super::plan::noise_stream;
use super::{DegradationPlan, StageKind};

/// Applies one stage with its plan parameters. `rng` is consumed only by the
/// noise stages.
pub fn apply_stage_with_rng(f: &Frame, stage: StageKind, plan: &DegradationPlan, rng: &mut impl Rng) -> Result<Frame> {
    let p = &plan.stages;
    match stage {
        StageKind::BlurReal => convolve(f, &p.blur_real.kernel),
        StageKind::BlurIso => convolve(f, &gen_iso_kernel(p.blur_iso.size, p.blur_iso.sigma)?),
        StageKind::BlurAniso => {
            let a = &p.blur_aniso;
            convolve(f, &gen_aniso_kernel(a.size, a.sigma_x, a.sigma_y, a.theta)?)
        }
        StageKind::NoiseSensor => add_sensor_noise(f, &p.noise_sensor, rng),
        StageKind::NoiseGaussian => add_gaussian_noise(f, &p.noise_gaussian, rng),
        StageKind::CompressJpeg => jpeg_degrade(f, &p.compress_jpeg),
        StageKind::Downsample => p.downsample.apply(f),
        StageKind::PixelBin => pixel_bin(f, &p.pixel_bin),
    }
}

/// Applies one stage to frame `frame_index` of the plan's group, with that
/// frame's own noise stream.
pub fn apply_stage(f: &Frame, stage: StageKind, plan: &DegradationPlan, frame_index: usize) -> Result<Frame> {
    let mut rng = noise_stream(plan.seed, plan.group_index, frame_index, stage);
    apply_stage_with_rng(f, stage, plan, &mut rng)
}

/// Runs every active stage in order on one frame (no video compression).
pub fn apply_stages(f: &Frame, plan: &DegradationPlan, frame_index: usize) -> Result<Frame> {
    let mut cur = f.clone();
    for stage in plan.active_stages() {
        cur = apply_stage(&cur, stage, plan, frame_index)?;
    }
    Ok(cur)
}

/// Degrades an HR clip into its LR counterpart: the shuffled stages frame by
/// frame (in parallel), then the codec over the whole clip.
pub fn apply_plan(hr: &Clip, plan: &DegradationPlan) -> Result<Clip> {
    plan.validate()?;
    let (h, w) = hr.dims();
    let m = 2 * plan.scale as usize;
    if h % m != 0 || w % m != 0 {
        return Err(Error::DimensionMismatch(format!(
            "HR frames of {h}x{w} are not divisible by {m} (twice the scale {})",
            plan.scale
        )));
    }
    let frames = hr
        .frames()
        .par_iter()
        .enumerate()
        .map(|(i, f)| apply_stages(f, plan, i))
        .collect::<Result<Vec<_>>>()?;
    let degraded = Clip::new(frames, hr.frame_rate())?;
    video_compress(&degraded, &plan.video)
}
