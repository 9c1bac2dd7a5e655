use std::sync::OnceLock;

use statrs::function::gamma::ln_gamma;

use crate::{Error, Result};

pub const MIN_FIT_SAMPLES: usize = 1000;
pub const ALPHA_MIN: f64 = 0.2;
pub const ALPHA_MAX: f64 = 10.0;
const ALPHA_STEP: f64 = 0.001;

/// `(alpha, Γ(2/α)² / (Γ(1/α) Γ(3/α)))` over the shape grid.
fn grid() -> &'static [(f64, f64)] {
    static GRID: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    GRID.get_or_init(|| {
        let n = ((ALPHA_MAX - ALPHA_MIN) / ALPHA_STEP).round() as usize;
        (0..=n)
            .map(|i| {
                let a = ALPHA_MIN + i as f64 * ALPHA_STEP;
                let r = (2.0 * ln_gamma(2.0 / a) - ln_gamma(1.0 / a) - ln_gamma(3.0 / a)).exp();
                (a, r)
            })
            .collect()
    })
}

/// Nearest grid shape for a target ratio `(E|x|)² / E[x²]`.
fn lookup(r: f64) -> f64 {
    grid()
        .iter()
        .min_by(|a, b| (a.1 - r).abs().total_cmp(&(b.1 - r).abs()))
        .map(|&(a, _)| a)
        .expect("grid is non-empty")
}

fn gamma_ratio(num: f64, den: f64) -> f64 {
    (ln_gamma(num) - ln_gamma(den)).exp()
}

fn check_count(samples: &[f64]) -> Result<()> {
    if samples.len() < MIN_FIT_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_FIT_SAMPLES,
            got: samples.len(),
        });
    }
    Ok(())
}

/// Zero-mean generalized Gaussian fit by moment matching: `(alpha, sigma²)`.
pub fn fit_ggd(samples: &[f64]) -> Result<(f64, f64)> {
    check_count(samples)?;
    fit_ggd_unchecked(samples)
}

pub(crate) fn fit_ggd_unchecked(samples: &[f64]) -> Result<(f64, f64)> {
    let n = samples.len() as f64;
    let sq = samples.iter().map(|x| x * x).sum::<f64>() / n;
    let abs = samples.iter().map(|x| x.abs()).sum::<f64>() / n;
    if sq.is_nan() || sq <= 0.0 || sq.is_infinite() {
        return Err(Error::DegenerateSamples);
    }
    Ok((lookup(abs * abs / sq), sq))
}

/// Asymmetric generalized Gaussian fit: `(alpha, sigma_l², sigma_r², eta)`.
///
/// `eta` is the distribution mean, `(β_r − β_l) Γ(2/α)/Γ(1/α)` with
/// `β = σ √(Γ(1/α)/Γ(3/α))`.
pub fn fit_aggd(samples: &[f64]) -> Result<(f64, f64, f64, f64)> {
    check_count(samples)?;
    fit_aggd_unchecked(samples)
}

pub(crate) fn fit_aggd_unchecked(samples: &[f64]) -> Result<(f64, f64, f64, f64)> {
    let (mut sl, mut nl, mut sr, mut nr) = (0.0, 0usize, 0.0, 0usize);
    let (mut abs, mut sq) = (0.0, 0.0);
    for &x in samples {
        if x < 0.0 {
            sl += x * x;
            nl += 1;
        } else if x > 0.0 {
            sr += x * x;
            nr += 1;
        }
        abs += x.abs();
        sq += x * x;
    }
    let n = samples.len() as f64;
    let (abs, sq) = (abs / n, sq / n);
    if sq.is_nan() || sq <= 0.0 || sq.is_infinite() {
        return Err(Error::DegenerateSamples);
    }
    let var_l = if nl > 0 { sl / nl as f64 } else { 0.0 };
    let var_r = if nr > 0 { sr / nr as f64 } else { 0.0 };
    let (sig_l, sig_r) = (var_l.sqrt(), var_r.sqrt());
    let r_hat = abs * abs / sq;
    let r_norm = if sig_r > 0.0 {
        let g = sig_l / sig_r;
        r_hat * (g.powi(3) + 1.0) * (g + 1.0) / (g * g + 1.0).powi(2)
    } else {
        r_hat
    };
    let alpha = lookup(r_norm);
    let k = gamma_ratio(1.0 / alpha, 3.0 / alpha).sqrt();
    let eta = (sig_r - sig_l) * k * gamma_ratio(2.0 / alpha, 1.0 / alpha);
    Ok((alpha, var_l, var_r, eta))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Gamma, StandardNormal};

    /// AGGD draws with shape `alpha` and one-sided variances.
    pub fn aggd_samples(n: usize, alpha: f64, var_l: f64, var_r: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Gamma::new(1.0 / alpha, 1.0).unwrap();
        let k = gamma_ratio(1.0 / alpha, 3.0 / alpha).sqrt();
        let (bl, br) = (var_l.sqrt() * k, var_r.sqrt() * k);
        let p_left = bl / (bl + br);
        (0..n)
            .map(|_| {
                let m = g.sample(&mut rng).powf(1.0 / alpha);
                if rng.random::<f64>() < p_left {
                    -bl * m
                } else {
                    br * m
                }
            })
            .collect()
    }

    #[test]
    fn grid_shape() {
        let g = grid();
        assert_eq!(g.len(), 9801);
        assert!((g[0].0 - 0.2).abs() < 1e-12 && (g[g.len() - 1].0 - 10.0).abs() < 1e-9);
        // Gaussian ratio is 2/pi.
        assert!((lookup(2.0 / std::f64::consts::PI) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn gaussian_and_laplacian() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g: Vec<f64> = (0..200_000).map(|_| rng.sample(StandardNormal)).collect();
        let (a, v) = fit_ggd(&g).unwrap();
        assert!((a - 2.0).abs() < 0.05, "{a}");
        assert!((v - 1.0).abs() < 0.02, "{v}");
        let l = aggd_samples(200_000, 1.0, 2.0, 2.0, 2);
        let (a, _) = fit_ggd(&l).unwrap();
        assert!((a - 1.0).abs() < 0.05, "{a}");
    }

    #[test]
    fn recovers_shape_grid() {
        for (i, alpha) in [0.5, 1.0, 2.0, 4.0].into_iter().enumerate() {
            let s = aggd_samples(200_000, alpha, 0.3, 0.3, 10 + i as u64);
            let (a, v) = fit_ggd(&s).unwrap();
            assert!((a / alpha - 1.0).abs() < 0.05, "ggd {alpha}: {a}");
            assert!((v / 0.3 - 1.0).abs() < 0.05);
            let s = aggd_samples(200_000, alpha, 0.2, 0.5, 20 + i as u64);
            let (a, l, r, _) = fit_aggd(&s).unwrap();
            assert!((a / alpha - 1.0).abs() < 0.05, "aggd {alpha}: {a}");
            assert!((l / 0.2 - 1.0).abs() < 0.05 && (r / 0.5 - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn aggd_symmetry_and_one_sided() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g: Vec<f64> = (0..200_000).map(|_| rng.sample(StandardNormal)).collect();
        let (_, l, r, eta) = fit_aggd(&g).unwrap();
        assert!((l / r - 1.0).abs() < 0.03);
        assert!(eta.abs() < 0.02);
        let pos: Vec<f64> = g.iter().map(|x| x.abs()).collect();
        let (_, l, _, eta) = fit_aggd(&pos).unwrap();
        assert_eq!(l, 0.0);
        assert!(eta > 0.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(fit_ggd(&[1.0; 10]), Err(Error::TooFewSamples { needed: 1000, got: 10 })));
        assert!(matches!(fit_ggd(&[0.0; 2000]), Err(Error::DegenerateSamples)));
        assert!(matches!(fit_aggd(&[0.0; 2000]), Err(Error::DegenerateSamples)));
        assert!(matches!(fit_aggd(&[1.0; 999]), Err(Error::TooFewSamples { .. })));
    }
}
