//! Time-domain reference simulation of rectangular-pulse OTFS.
//!
//! The transmitter synthesizes `s(t) = Σ_n Σ_m X[n,m] g(t - nT) e^{j2πmΔf(t-nT)}`
//! with `g = 1_{[0,T)} / sqrt(T)` on an oversampled time grid, the channel
//! applies each path's delay, Doppler shift and time scaling to the sampled
//! waveform, and the receiver integrates the matched filter over every slot.
//! Nothing here relies on the closed-form kernels, so the chain serves as an
//! independent reference for them.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::grid::{cis_turns, TfGrid};
use crate::params::OtfsParams;
use crate::transform::SfftPlan;
use crate::DdGrid;

/// Default oversampling factor of the reference chain.
pub const DEFAULT_OSF: usize = 4;

/// Uniformly sampled complex baseband waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWaveform {
    pub samples: Vec<Complex64>,
    /// Samples per second, `osf · M · Δf`.
    pub rate: f64,
    pub osf: usize,
    /// Time of the first sample in seconds.
    pub t0: f64,
}

impl SampledWaveform {
    /// `Σ |s|² / rate`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.rate
    }

    pub fn norm(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn time(&self, q: usize) -> f64 {
        self.t0 + q as f64 / self.rate
    }
}

/// Rectangular-pulse Heisenberg transform sampled at `osf · M · Δf`.
pub fn heisenberg_rect(x: &TfGrid, params: &OtfsParams, osf: usize) -> Result<SampledWaveform> {
    if osf == 0 {
        return Err(Error::Params("oversampling factor must be at least 1".into()));
    }
    let (n, m) = (params.slots(), params.subcarriers());
    x.check_shape(n, m)?;
    let block = osf * m;
    let ifft = FftPlanner::new().plan_fft_inverse(block);
    let amp = 1.0 / params.slot_duration().sqrt();
    let mut samples = vec![Complex64::default(); n * block];
    for (slot, chunk) in samples.chunks_exact_mut(block).enumerate() {
        chunk[..m].copy_from_slice(x.row(slot));
        ifft.process(chunk);
        for z in chunk.iter_mut() {
            *z *= amp;
        }
    }
    Ok(SampledWaveform {
        samples,
        rate: block as f64 * params.subcarrier_spacing(),
        osf,
        t0: 0.0,
    })
}

/// Kaiser-windowed sinc interpolator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interpolator {
    /// Taps on each side of the interpolation point; the kernel has `2 · half_width` taps.
    pub half_width: usize,
    /// Kaiser shape parameter.
    pub beta: f64,
}

impl Default for Interpolator {
    fn default() -> Self {
        Self {
            half_width: 32,
            beta: 8.0,
        }
    }
}

/// Zeroth-order modified Bessel function of the first kind.
fn bessel_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > 1e-17 * sum {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

impl Interpolator {
    /// Value of the sampled sequence at fractional index `pos`. Samples
    /// outside `0..len` are treated as zero.
    pub fn at(&self, samples: &[Complex64], pos: f64) -> Complex64 {
        let base = pos.floor();
        let frac = pos - base;
        let base = base as i64;
        let len = samples.len() as i64;
        if frac == 0.0 {
            return if (0..len).contains(&base) {
                samples[base as usize]
            } else {
                Complex64::default()
            };
        }
        let hw = self.half_width as i64;
        let norm = 1.0 / bessel_i0(self.beta);
        let mut acc = Complex64::default();
        for j in (1 - hw)..=hw {
            let idx = base + j;
            if idx < 0 || idx >= len {
                continue;
            }
            let d = frac - j as f64;
            let t = d / hw as f64;
            let w = bessel_i0(self.beta * (1.0 - t * t).max(0.0).sqrt()) * norm;
            let arg = std::f64::consts::PI * d;
            acc += samples[idx as usize] * (w * arg.sin() / arg);
        }
        acc
    }
}

/// Passes a waveform through the physical multipath channel.
///
/// Every path contributes `β e^{j2πνt} s((1 + ν/f_c) t - τ)`, where the
/// carrier phase `e^{-j2πf_cτ}` is already part of `β`.
pub fn apply_ltv_channel_time(s: &SampledWaveform, ch: &ChannelRealization) -> SampledWaveform {
    apply_ltv_channel_time_with(s, ch, &Interpolator::default())
}

pub fn apply_ltv_channel_time_with(
    s: &SampledWaveform,
    ch: &ChannelRealization,
    interp: &Interpolator,
) -> SampledWaveform {
    let mut out = vec![Complex64::default(); s.samples.len()];
    for path in ch.paths() {
        let fc = path.carrier_frequency();
        let tau = path.delay();
        let unrotated = path.gain() * cis_turns(fc * tau);
        let coeff = unrotated * cis_turns(-fc * tau);
        let scale = 1.0 + path.inverse_squint();
        for (q, r) in out.iter_mut().enumerate() {
            let t = s.time(q);
            let pos = (scale * t - tau - s.t0) * s.rate;
            let aligned = pos.round();
            let pos = if (pos - aligned).abs() < 1e-9 { aligned } else { pos };
            *r += coeff * cis_turns(path.doppler() * t) * interp.at(&s.samples, pos);
        }
    }
    SampledWaveform {
        samples: out,
        ..s.clone()
    }
}

/// Rectangular-pulse Wigner transform by a Riemann sum at the waveform rate.
pub fn wigner_rect(r: &SampledWaveform, params: &OtfsParams) -> Result<TfGrid> {
    let (n, m) = (params.slots(), params.subcarriers());
    let osf_f = r.rate / (m as f64 * params.subcarrier_spacing());
    let osf = osf_f.round() as usize;
    if osf == 0 || (osf_f - osf as f64).abs() > 1e-9 {
        return Err(Error::Params("waveform rate must be an integer multiple of MΔf".into()));
    }
    let block = osf * m;
    let start_f = -r.t0 * r.rate;
    let start = start_f.round();
    if start < 0.0 || (start_f - start).abs() > 1e-6 {
        return Err(Error::Domain(
            "waveform must start at or before t = 0 on the sample grid".into(),
        ));
    }
    let start = start as usize;
    if r.samples.len() < start + n * block {
        return Err(Error::Domain("waveform does not cover the whole frame".into()));
    }
    let fft = FftPlanner::new().plan_fft_forward(block);
    let scale = 1.0 / (params.slot_duration().sqrt() * r.rate);
    let mut y = TfGrid::zeros(params);
    let mut buf = vec![Complex64::default(); block];
    for slot in 0..n {
        let s = start + slot * block;
        buf.copy_from_slice(&r.samples[s..s + block]);
        fft.process(&mut buf);
        for (dst, v) in y.row_mut(slot).iter_mut().zip(&buf[..m]) {
            *dst = v * scale;
        }
    }
    Ok(y)
}

/// Full reference chain: ISFFT, Heisenberg, channel, Wigner.
pub fn reference_frame(x: &DdGrid, ch: &ChannelRealization, osf: usize) -> Result<TfGrid> {
    let params = ch.params();
    let tx = SfftPlan::new(params).isfft(x)?;
    let s = heisenberg_rect(&tx, params, osf)?;
    let r = apply_ltv_channel_time(&s, ch);
    wigner_rect(&r, params)
}
