//! Shuffled degradation plans, their application to frame groups, the
//! diversity queue and on-disk dataset synthesis.

mod apply;
mod config;
mod plan;
mod queue;
mod synth;

pub use apply::{apply_plan, apply_stage, apply_stage_with_rng, apply_stages};
pub use config::{
    CodecChoice, GaussianNoiseRanges, PipelineConfig, SensorNoiseRanges, SkipProbabilities, VideoRanges,
};
pub use plan::{
    derive_seed, noise_stream, sample_plan, AnisoBlurParams, DegradationPlan, IsoBlurParams, Planner,
    RealBlurParams, SkipFlags, StageKind, StageParams,
};
pub use queue::ShuffleQueue;
pub use synth::{
    discover_clips, synthesize_dataset, CropWindow, Manifest, ManifestEntry, PairGroup, MANIFEST_FILE,
};
