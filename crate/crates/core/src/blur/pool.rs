//! Kernel pool container and its little-endian binary format:
//!
//! ```text
//! "SRWDKPL1"                      8 bytes
//! kernel count                    u32
//! per kernel:
//!   size                          u16
//!   provenance length in bytes    u16
//!   provenance                    UTF-8
//!   size * size weights           f32, row-major
//! ```

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::kernel::{check_size, weight_sum};
use super::{gen_aniso_kernel, gen_iso_kernel, BlurKernel};
use crate::{Error, Result};

pub const POOL_MAGIC: &[u8; 8] = b"SRWDKPL1";

/// Kernels whose sum is off by more than this are rejected on load.
const RENORMALIZE_LIMIT: f64 = 1e-3;
/// Kernels already this close to unit sum are kept bit-exact.
const EXACT_LIMIT: f64 = 1e-6;

/// Seed of the bundled fallback pool.
const FALLBACK_SEED: u64 = 0x005e_edb1_u64;
const FALLBACK_COUNT: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct KernelPool {
    kernels: Vec<BlurKernel>,
    provenance: Vec<String>,
}

/// Sampling ranges for synthetic Gaussian kernels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticKernelRanges {
    /// Smallest and largest odd kernel size (inclusive).
    pub size: [usize; 2],
    pub iso_sigma: [f64; 2],
    pub aniso_sigma: [f64; 2],
}

impl Default for SyntheticKernelRanges {
    fn default() -> Self {
        SyntheticKernelRanges {
            size: [7, 21],
            iso_sigma: [0.2, 3.0],
            aniso_sigma: [0.2, 3.0],
        }
    }
}

impl SyntheticKernelRanges {
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.size;
        check_size(lo)?;
        check_size(hi)?;
        if lo > hi {
            return Err(Error::InvalidConfig(format!("kernel size range {lo} > {hi}")));
        }
        for (name, [a, b]) in [("iso_sigma", self.iso_sigma), ("aniso_sigma", self.aniso_sigma)] {
            if !(a.is_finite() && b.is_finite() && a > 0.0 && a <= b) {
                return Err(Error::InvalidConfig(format!("bad {name} range [{a}, {b}]")));
            }
        }
        Ok(())
    }

    /// Uniform over the odd sizes in range.
    pub fn sample_size(&self, rng: &mut impl Rng) -> usize {
        let [lo, hi] = self.size;
        lo + 2 * rng.random_range(0..=(hi - lo) / 2)
    }

    pub fn sample_iso_sigma(&self, rng: &mut impl Rng) -> f64 {
        uniform(rng, self.iso_sigma)
    }

    pub fn sample_aniso_sigma(&self, rng: &mut impl Rng) -> f64 {
        uniform(rng, self.aniso_sigma)
    }

    pub fn sample_theta(&self, rng: &mut impl Rng) -> f64 {
        rng.random_range(0.0..PI)
    }
}

fn uniform(rng: &mut impl Rng, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

impl KernelPool {
    pub fn new(kernels: Vec<BlurKernel>, provenance: Vec<String>) -> Result<Self> {
        if kernels.len() != provenance.len() {
            return Err(Error::CorruptPool(format!(
                "{} kernels but {} provenance tags",
                kernels.len(),
                provenance.len()
            )));
        }
        Ok(KernelPool {
            kernels,
            provenance,
        })
    }

    /// Generates `count` kernels, each isotropic or anisotropic with equal
    /// probability, from a seeded stream.
    pub fn synthetic(count: usize, seed: u64, ranges: &SyntheticKernelRanges) -> Result<Self> {
        ranges.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut kernels = Vec::with_capacity(count);
        let mut provenance = Vec::with_capacity(count);
        for _ in 0..count {
            let size = ranges.sample_size(&mut rng);
            if rng.random_bool(0.5) {
                let sigma = ranges.sample_iso_sigma(&mut rng);
                kernels.push(gen_iso_kernel(size, sigma)?);
                provenance.push(format!("synthetic:iso:size={size}:sigma={sigma:.6}"));
            } else {
                let sx = ranges.sample_aniso_sigma(&mut rng);
                let sy = ranges.sample_aniso_sigma(&mut rng);
                let theta = ranges.sample_theta(&mut rng);
                kernels.push(gen_aniso_kernel(size, sx, sy, theta)?);
                provenance.push(format!(
                    "synthetic:aniso:size={size}:sigma_x={sx:.6}:sigma_y={sy:.6}:theta={theta:.6}"
                ));
            }
        }
        KernelPool::new(kernels, provenance)
    }

    /// The bundled 64-kernel pool used when no pool file is configured.
    pub fn fallback() -> Self {
        KernelPool::synthetic(FALLBACK_COUNT, FALLBACK_SEED, &SyntheticKernelRanges::default())
            .expect("default kernel ranges are valid")
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }

    pub fn kernels(&self) -> &[BlurKernel] {
        &self.kernels
    }

    pub fn kernel(&self, index: usize) -> Option<&BlurKernel> {
        self.kernels.get(index)
    }

    pub fn provenance(&self, index: usize) -> Option<&str> {
        self.provenance.get(index).map(String::as_str)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let count = u32::try_from(self.kernels.len())
            .map_err(|_| Error::CorruptPool("too many kernels".into()))?;
        let mut out = Vec::new();
        out.extend_from_slice(POOL_MAGIC);
        out.extend_from_slice(&count.to_le_bytes());
        for (k, tag) in self.kernels.iter().zip(&self.provenance) {
            let tag_len = u16::try_from(tag.len())
                .map_err(|_| Error::CorruptPool("provenance tag longer than 65535 bytes".into()))?;
            out.extend_from_slice(&(k.size() as u16).to_le_bytes());
            out.extend_from_slice(&tag_len.to_le_bytes());
            out.extend_from_slice(tag.as_bytes());
            for w in k.weights() {
                out.extend_from_slice(&w.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor { bytes, pos: 0 };
        if cur.take(8)? != POOL_MAGIC {
            return Err(Error::CorruptPool("bad magic".into()));
        }
        let count = u32::from_le_bytes(cur.array()?) as usize;
        if count == 0 {
            return Err(Error::CorruptPool("pool has no kernels".into()));
        }
        let mut kernels = Vec::with_capacity(count.min(1 << 16));
        let mut provenance = Vec::with_capacity(count.min(1 << 16));
        for index in 0..count {
            let size = u16::from_le_bytes(cur.array()?) as usize;
            check_size(size).map_err(|_| Error::CorruptPool(format!("kernel {index}: bad size {size}")))?;
            let tag_len = u16::from_le_bytes(cur.array()?) as usize;
            let tag = std::str::from_utf8(cur.take(tag_len)?)
                .map_err(|_| Error::CorruptPool(format!("kernel {index}: provenance is not UTF-8")))?
                .to_owned();
            let mut weights = Vec::with_capacity(size * size);
            for _ in 0..size * size {
                weights.push(f32::from_le_bytes(cur.array()?));
            }
            if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                return Err(Error::CorruptPool(format!(
                    "kernel {index}: negative or non-finite weight"
                )));
            }
            let sum = weight_sum(&weights);
            let deviation = (sum - 1.0).abs();
            if deviation > RENORMALIZE_LIMIT {
                return Err(Error::UnnormalizedKernel { index, sum });
            }
            if deviation > EXACT_LIMIT {
                for w in &mut weights {
                    *w = (*w as f64 / sum) as f32;
                }
            }
            kernels.push(BlurKernel::from_parts_unchecked(size, weights));
            provenance.push(tag);
        }
        if cur.pos != bytes.len() {
            return Err(Error::CorruptPool(format!(
                "{} trailing bytes",
                bytes.len() - cur.pos
            )));
        }
        KernelPool::new(kernels, provenance)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::CorruptPool("unexpected end of file".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }
}

pub fn load_kernel_pool(path: impl AsRef<Path>) -> Result<KernelPool> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    KernelPool::from_bytes(&bytes)
}

pub fn save_kernel_pool(pool: &KernelPool, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, pool.to_bytes()?).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw_pool(entries: &[(u16, &str, Vec<f32>)]) -> Vec<u8> {
        let mut out = POOL_MAGIC.to_vec();
        out.extend_from_slice(&(entries.len() as u32).to_le_bytes());
        for (size, tag, w) in entries {
            out.extend_from_slice(&size.to_le_bytes());
            out.extend_from_slice(&(tag.len() as u16).to_le_bytes());
            out.extend_from_slice(tag.as_bytes());
            for v in w {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    #[test]
    fn save_load_is_bit_identical() {
        let pool = KernelPool::synthetic(10, 3, &SyntheticKernelRanges::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pool.kpl");
        save_kernel_pool(&pool, &path).unwrap();
        let back = load_kernel_pool(&path).unwrap();
        assert_eq!(back.len(), 10);
        for i in 0..10 {
            let (a, b) = (pool.kernel(i).unwrap(), back.kernel(i).unwrap());
            assert_eq!(a.size(), b.size());
            let bits = |k: &BlurKernel| k.weights().iter().map(|w| w.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(a), bits(b));
            assert_eq!(pool.provenance(i), back.provenance(i));
        }
    }

    #[test]
    fn kernel_summing_to_point_nine_is_rejected() {
        let bytes = raw_pool(&[(1, "x", vec![0.9])]);
        assert!(matches!(
            KernelPool::from_bytes(&bytes),
            Err(Error::UnnormalizedKernel { index: 0, .. })
        ));
    }

    #[test]
    fn slightly_off_kernel_is_renormalized() {
        let bytes = raw_pool(&[(3, "real:img42", vec![0.1112; 9])]);
        let pool = KernelPool::from_bytes(&bytes).unwrap();
        assert!((pool.kernel(0).unwrap().sum() - 1.0).abs() < 1e-6);
        assert_eq!(pool.provenance(0), Some("real:img42"));
    }

    #[test]
    fn empty_and_truncated_pools_are_corrupt() {
        let bytes = raw_pool(&[]);
        assert!(matches!(KernelPool::from_bytes(&bytes), Err(Error::CorruptPool(_))));
        let mut bytes = raw_pool(&[(3, "a", vec![1.0 / 9.0; 9])]);
        bytes.pop();
        assert!(matches!(KernelPool::from_bytes(&bytes), Err(Error::CorruptPool(_))));
        assert!(matches!(KernelPool::from_bytes(b"NOTAPOOL"), Err(Error::CorruptPool(_))));
        let mut bytes = raw_pool(&[(1, "a", vec![1.0])]);
        bytes.push(0);
        assert!(matches!(KernelPool::from_bytes(&bytes), Err(Error::CorruptPool(_))));
    }

    #[test]
    fn even_size_is_corrupt() {
        let bytes = raw_pool(&[(2, "a", vec![0.25; 4])]);
        assert!(matches!(KernelPool::from_bytes(&bytes), Err(Error::CorruptPool(_))));
    }

    #[test]
    fn fallback_pool_is_stable_and_normalized() {
        let a = KernelPool::fallback();
        assert_eq!(a.len(), 64);
        assert_eq!(a, KernelPool::fallback());
        for k in a.kernels() {
            assert!((k.sum() - 1.0).abs() < 1e-6);
            assert!((7..=21).contains(&k.size()) && k.size() % 2 == 1);
        }
    }
}
