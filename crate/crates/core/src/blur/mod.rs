//! Blur kernels (isotropic, anisotropic and pooled real-world kernels) and
//! 2-D convolution with reflect padding.

mod convolve;
mod kernel;
mod pool;

pub use convolve::convolve;
pub use kernel::{gen_aniso_kernel, gen_iso_kernel, BlurKernel, MAX_KERNEL_SIZE};
pub use pool::{load_kernel_pool, save_kernel_pool, KernelPool, SyntheticKernelRanges, POOL_MAGIC};
