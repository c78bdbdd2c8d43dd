//! Noise injection, LMMSE equalization and bit-error accounting.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Per-sample complex noise variance `σ²` with its SNR conventions.
///
/// Pilot frames use `SNR_p = |x_p|² / σ²`; data frames use
/// `E_b/N_0 = σ_s² / (σ² log2 Q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    sigma2: f64,
}

impl NoiseSpec {
    pub fn new(sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::Params(format!(
                "noise variance must be positive and finite, got {sigma2}"
            )));
        }
        Ok(Self { sigma2 })
    }

    /// `σ²` for a pilot amplitude and pilot SNR in dB.
    pub fn from_pilot_snr(pilot_amplitude: Complex64, snr_p_db: f64) -> Result<Self> {
        Self::new(pilot_amplitude.norm_sqr() / db_to_linear(snr_p_db))
    }

    /// `σ²` for a symbol energy `σ_s²`, `log2 Q` bits per symbol and `E_b/N_0` in dB.
    pub fn from_ebn0(ebn0_db: f64, symbol_energy: f64, bits_per_symbol: usize) -> Result<Self> {
        Self::new(symbol_energy / (bits_per_symbol as f64 * db_to_linear(ebn0_db)))
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    /// `E_b/N_0` in dB implied by this variance.
    pub fn ebn0_db(&self, symbol_energy: f64, bits_per_symbol: usize) -> f64 {
        linear_to_db(symbol_energy / (self.sigma2 * bits_per_symbol as f64))
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// One `CN(0, σ²)` sample.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, sigma2: f64) -> Complex64 {
    let s = (0.5 * sigma2).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

/// Adds i.i.d. `CN(0, σ²)` noise to every entry; deterministic per seed.
pub fn add_noise<G: AsRef<Grid> + AsMut<Grid> + Clone>(y: &G, noise: &NoiseSpec, seed: u64) -> G {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    add_noise_rng(y, noise, &mut rng)
}

pub fn add_noise_rng<G: AsRef<Grid> + AsMut<Grid> + Clone, R: Rng + ?Sized>(
    y: &G,
    noise: &NoiseSpec,
    rng: &mut R,
) -> G {
    let mut out = y.clone();
    for z in out.as_mut().as_mut_slice() {
        *z += complex_normal(rng, noise.sigma2);
    }
    out
}

/// Per-bin LMMSE estimate `X̂ = H* Y / (|H|² + σ²/σ_s²)`.
pub fn lmmse_equalize<G: AsRef<Grid> + AsMut<Grid> + Clone>(
    y: &G,
    h: &G,
    noise: &NoiseSpec,
    symbol_energy: f64,
) -> Result<G> {
    let (yg, hg) = (y.as_ref(), h.as_ref());
    yg.check_shape(hg.rows(), hg.cols())?;
    let reg = noise.sigma2 / symbol_energy;
    let mut out = y.clone();
    for (x, hv) in out.as_mut().as_mut_slice().iter_mut().zip(hg.as_slice()) {
        *x = hv.conj() * *x / (hv.norm_sqr() + reg);
    }
    Ok(out)
}

/// Number of differing bits.
pub fn bit_errors(bits_hat: &[u8], bits_ref: &[u8]) -> Result<usize> {
    if bits_hat.len() != bits_ref.len() {
        return Err(Error::Length {
            expected: bits_ref.len(),
            got: bits_hat.len(),
        });
    }
    Ok(bits_hat.iter().zip(bits_ref).filter(|(a, b)| a != b).count())
}

/// Fraction of differing bits.
pub fn ber(bits_hat: &[u8], bits_ref: &[u8]) -> Result<f64> {
    let errors = bit_errors(bits_hat, bits_ref)?;
    if bits_ref.is_empty() {
        return Ok(0.0);
    }
    Ok(errors as f64 / bits_ref.len() as f64)
}
