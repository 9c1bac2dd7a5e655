//! Synthesis of realistic low-resolution video training data.
//!
//! A clean high-resolution clip is cut into groups of consecutive frames and
//! each group is pushed through a randomly ordered chain of eight
//! degradations (three blurs, two noise models, JPEG artifacts, downsampling
//! and pixel binning) followed by a toy inter-frame video codec. Every random
//! choice for a group is captured in a serializable [`DegradationPlan`], so a
//! low-resolution output can be re-derived from its plan and the source
//! frames alone.
//!
//! Module overview:
//!
//! - [`media`]: frames, clips, color transfer, Bayer mosaicing and PNG I/O
//! - [`blur`]: Gaussian kernel generation, kernel pools and convolution
//! - [`noise`]: RGB Gaussian noise and heteroscedastic sensor noise
//! - [`resample`]: nearest / bilinear / bicubic / down-up resizing
//! - [`codec`]: JPEG simulation and the internal GOP video codec
//! - [`binning`]: pixel binning on the Bayer subplanes
//! - [`pipeline`]: plan sampling, plan application, the shuffle queue and
//!   dataset synthesis
//! - [`quality`]: MSCN / GGD / AGGD natural-scene-statistics features

pub mod binning;
pub mod blur;
pub mod codec;
mod error;
pub mod fixtures;
pub mod media;
pub mod noise;
pub mod pipeline;
pub mod quality;
pub mod resample;

pub use error::{Error, Result};
pub use media::{Clip, Frame, Plane, RawMosaic};
pub use pipeline::{DegradationPlan, PipelineConfig, StageKind};
