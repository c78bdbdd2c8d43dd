//! Impulse-pilot channel estimation.
//!
//! The whole frame carries a single pilot `x_p` at DD bin `(0, 0)`. Its TF
//! image is flat, so the received TF grid is `(x_p / sqrt(NM)) H[n, m]` plus
//! noise, and `H` expands over the dictionary atoms of [`dictionary`].
//! [`omp_estimate`] recovers the sparse atom gains; [`threshold_estimate`] is
//! the classical baseline that keeps every DD sample above `3σ`.

pub mod dictionary;
mod omp;

use num_complex::Complex64;

pub use dictionary::{
    build_sensing_dd, build_sensing_tf, tf_atom_entry, unvectorize, vectorize, AtomLayout, Dictionary, SensingDomain,
    SensingMatrix, TfOperator,
};
pub use omp::{omp_estimate, EstimationResult, StopRule};

use crate::error::{Error, Result};
use crate::grid::{DdGrid, TfGrid};
use crate::link::{db_to_linear, NoiseSpec};
use crate::params::OtfsParams;
use crate::transform::SfftPlan;

/// Pilot amplitude and the pilot SNR `|x_p|² / σ²` it implies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PilotConfig {
    pub amplitude: Complex64,
    pub snr_p_db: f64,
}

impl PilotConfig {
    /// Real pilot amplitude `sqrt(SNR_p σ²)`.
    pub fn from_snr(snr_p_db: f64, noise: &NoiseSpec) -> Self {
        Self {
            amplitude: Complex64::new((db_to_linear(snr_p_db) * noise.sigma2()).sqrt(), 0.0),
            snr_p_db,
        }
    }

    /// Noise variance consistent with the amplitude and SNR.
    pub fn noise(&self) -> Result<NoiseSpec> {
        NoiseSpec::from_pilot_snr(self.amplitude, self.snr_p_db)
    }
}

/// Frame with `x[0, 0] = x_p` and zeros elsewhere.
pub fn build_pilot(pc: &PilotConfig, params: &OtfsParams) -> DdGrid {
    let mut x = DdGrid::zeros(params);
    x[(0, 0)] = pc.amplitude;
    x
}

/// DD channel taps found by the `3σ` rule, as `h[k, l] = y[k, l] / x_p`.
pub fn threshold_estimate(y_dd: &DdGrid, sigma: f64, pc: &PilotConfig) -> DdGrid {
    let mut taps = y_dd.clone();
    let limit = 3.0 * sigma;
    for z in taps.as_mut_slice() {
        *z = if z.norm() > limit {
            *z / pc.amplitude
        } else {
            Complex64::default()
        };
    }
    taps
}

/// TF channel `sqrt(NM) · ISFFT(h)` of a DD tap grid.
pub fn taps_to_tf_channel(taps: &DdGrid, params: &OtfsParams) -> Result<TfGrid> {
    let mut h = SfftPlan::new(params).isfft(taps)?;
    h.scale((params.grid_size() as f64).sqrt());
    Ok(h)
}

/// `‖h - ĥ‖² / ‖h‖²`.
pub fn nmse(h: &[Complex64], h_hat: &[Complex64]) -> Result<f64> {
    if h.len() != h_hat.len() {
        return Err(Error::Length {
            expected: h.len(),
            got: h_hat.len(),
        });
    }
    let den: f64 = h.iter().map(|z| z.norm_sqr()).sum();
    if den == 0.0 {
        return Err(Error::Domain("NMSE reference has zero energy".into()));
    }
    let num: f64 = h.iter().zip(h_hat).map(|(a, b)| (a - b).norm_sqr()).sum();
    Ok(num / den)
}

/// Physical gain `β = β[k,l] e^{-j2πkl/(NM)}` of a dictionary atom.
pub fn physical_gain(k: i64, l: usize, beta_kl: Complex64, params: &OtfsParams) -> Complex64 {
    beta_kl * crate::grid::cis_turns(-(k as f64) * l as f64 / params.grid_size() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::sfft;

    fn params() -> OtfsParams {
        OtfsParams::new(16, 8, 15e3, 4e9, 4, 2.5).unwrap()
    }

    #[test]
    fn pilot_frame() {
        let p = params();
        let pc = PilotConfig::from_snr(20.0, &NoiseSpec::new(0.5).unwrap());
        assert!((pc.amplitude.norm_sqr() - 50.0).abs() < 1e-12);
        assert!((pc.noise().unwrap().sigma2() - 0.5).abs() < 1e-12);
        let x = build_pilot(&pc, &p);
        assert!((x.frobenius_norm() - pc.amplitude.norm()).abs() < 1e-12);
        let tf = SfftPlan::new(&p).isfft(&x).unwrap();
        let flat = pc.amplitude / (p.grid_size() as f64).sqrt();
        assert!(tf.as_slice().iter().all(|z| (z - flat).norm() < 1e-13));
    }

    #[test]
    fn nmse_identities() {
        let h: Vec<Complex64> = (0..10).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let zero = vec![Complex64::default(); 10];
        let double: Vec<Complex64> = h.iter().map(|z| z * 2.0).collect();
        assert_eq!(nmse(&h, &h).unwrap(), 0.0);
        assert_eq!(nmse(&h, &zero).unwrap(), 1.0);
        assert!((nmse(&h, &double).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(nmse(&zero, &h), Err(Error::Domain(_))));
        assert!(nmse(&h, &h[..3]).is_err());
    }

    #[test]
    fn threshold_recovers_classical_taps() {
        let p = params();
        let pc = PilotConfig {
            amplitude: Complex64::new(10.0, 0.0),
            snr_p_db: 20.0,
        };
        let taps = [
            (1usize, 2usize, Complex64::new(0.5, 0.2)),
            (7, 4, Complex64::new(-0.3, 0.6)),
        ];
        let h = TfGrid::from_fn(&p, |n, m| {
            taps.iter()
                .map(|&(k, l, b)| b * crate::grid::cis_turns(k as f64 * n as f64 / 8.0 - (m * l) as f64 / 16.0))
                .sum()
        });
        let mut y = h.clone();
        y.scale(10.0 / (p.grid_size() as f64).sqrt());
        let est = threshold_estimate(&sfft(&y).unwrap(), 1.0, &pc);
        for k in 0..8 {
            for l in 0..16 {
                let want = taps
                    .iter()
                    .find(|t| t.0 == k && t.1 == l)
                    .map(|t| t.2)
                    .unwrap_or_default();
                assert!((est[(k, l)] - want).norm() < 1e-12, "({k},{l})");
            }
        }
        let back = taps_to_tf_channel(&est, &p).unwrap();
        assert!(back.relative_error(&h).unwrap() < 1e-12);
    }
}
