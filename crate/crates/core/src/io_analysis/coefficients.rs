//! Time-frequency channel coefficients for ideal (bi-orthogonal) pulses.
//!
//! Three generators are provided:
//!
//! * [`tf_coeff_exact`] integrates the truncated-sinc Fourier integral that
//!   couples TF bin `(n', m')` into bin `(n, m)`, by adaptive quadrature;
//! * [`tf_coeff_ideal`] is the closed-form diagonal coefficient
//!   `β |p|/|1+p| e^{j2πτf_c} e^{-j2π(mΔf+f_c)(pτ-nT)/(1+p)}`;
//! * [`tf_coeff_approx`] is its small-squint approximation
//!   `β e^{j2πτν} e^{j2πνnT} e^{-j2πτmΔf}`, optionally times the squint phase
//!   `e^{j2πmnν/f_c}`.

use num_complex::Complex64;

use super::constraints::PulseConstraints;
use crate::channel::PathParams;
use crate::error::{Error, Result};
use crate::grid::{cis_turns, TfGrid};
use crate::params::OtfsParams;
use crate::quadrature::{integrate, QuadOptions};

#[inline]
fn sin_turns(x: f64) -> f64 {
    (std::f64::consts::TAU * (x - x.round())).sin()
}

/// `sin(2π a u) / (π u)` with its limit `2a` at the origin.
#[inline]
fn sinc_kernel(a: f64, u: f64) -> f64 {
    if u == 0.0 {
        2.0 * a
    } else {
        sin_turns(a * u) / (std::f64::consts::PI * u)
    }
}

/// Change of variables `u = (1 + p) τ - (p τ_i - n' T)` for one coefficient.
struct ExactSetup {
    /// `β |p| / (1 + p)` times the constant phase.
    prefactor: Complex64,
    /// Frequency of the residual exponential in the `u` variable.
    g: f64,
    u_lo: f64,
    u_hi: f64,
    f_max: f64,
}

fn exact_setup(
    path: &PathParams,
    n: usize,
    m: usize,
    n_src: usize,
    m_src: usize,
    pc: &PulseConstraints,
    params: &OtfsParams,
) -> Result<ExactSetup> {
    let p = path
        .squint_ratio()
        .ok_or_else(|| Error::Domain("the exact integral needs a non-zero Doppler shift".into()))?;
    let t = params.slot_duration();
    let df = params.subcarrier_spacing();
    let fc = params.carrier_frequency();
    let tau = path.delay();
    let dm = m as f64 - m_src as f64;
    let f = fc + m_src as f64 * df - p * dm * df;
    let x0 = p * tau - n_src as f64 * t;
    let one_p = 1.0 + p;
    let base = (n as f64 - n_src as f64) * t;
    let constant = tau * (fc - p * m as f64 * df) / one_p + f * n_src as f64 * t / one_p;
    Ok(ExactSetup {
        prefactor: path.gain() * (p.abs() / one_p) * cis_turns(constant),
        g: f / one_p,
        u_lo: one_p * (base - pc.t_max) - x0,
        u_hi: one_p * (base + pc.t_max) - x0,
        f_max: pc.f_max,
    })
}

fn panels_for(setup: &ExactSetup, lo: f64, hi: f64) -> usize {
    let cycles = (hi - lo).abs() * (setup.f_max + setup.g.abs());
    (2.0 * cycles).ceil().max(16.0) as usize
}

fn u_integral(setup: &ExactSetup, lo: f64, hi: f64, tol: f64) -> Result<Complex64> {
    let (a, g) = (setup.f_max, setup.g);
    let opts = QuadOptions {
        abs_tol: 1e-3 * tol,
        ..QuadOptions::default()
    }
    .with_rel_tol(tol)
    .with_panels(panels_for(setup, lo, hi));
    let r = integrate(|u| cis_turns(-g * u) * sinc_kernel(a, u), lo, hi, &opts)?;
    Ok(r.value)
}

/// Integrand of the exact coefficient in the delay variable `τ`.
///
/// Its modulus peaks at `τ = (p τ_i - n' T) / (1 + p)` with value
/// `2 f_max |β p|`.
pub fn exact_integrand(
    path: &PathParams,
    n_src: usize,
    m: usize,
    m_src: usize,
    pc: &PulseConstraints,
    params: &OtfsParams,
    tau_var: f64,
) -> Result<Complex64> {
    let p = path
        .squint_ratio()
        .ok_or_else(|| Error::Domain("the exact integral needs a non-zero Doppler shift".into()))?;
    let t = params.slot_duration();
    let df = params.subcarrier_spacing();
    let dm = m as f64 - m_src as f64;
    let u = (1.0 + p) * tau_var - (p * path.delay() - n_src as f64 * t);
    let outer = p * path.delay() * (path.doppler() - dm * df);
    let inner = -tau_var * (params.carrier_frequency() + m_src as f64 * df - p * dm * df);
    Ok(path.gain() * p.abs() * sinc_kernel(pc.f_max, u) * cis_turns(outer + inner))
}

/// Exact coupling coefficient from TF bin `(n_src, m_src)` into `(n, m)`.
///
/// `tol` is relative to the coefficient, with an absolute floor of `1e-3 · tol`
/// against the unit-magnitude diagonal. Fails with [`Error::Quadrature`] if
/// it is not met.
#[allow(clippy::too_many_arguments)]
pub fn tf_coeff_exact(
    path: &PathParams,
    n: usize,
    m: usize,
    n_src: usize,
    m_src: usize,
    pc: &PulseConstraints,
    params: &OtfsParams,
    tol: f64,
) -> Result<Complex64> {
    if !(tol > 0.0) {
        return Err(Error::Domain("quadrature tolerance must be positive".into()));
    }
    let s = exact_setup(path, n, m, n_src, m_src, pc, params)?;
    Ok(s.prefactor * u_integral(&s, s.u_lo, s.u_hi, tol)?)
}

/// Diagonal exact coefficients `H[n, m]` of one subcarrier for every slot.
///
/// The integration windows of different slots differ only by a shift of `nT`
/// in `u`, so one full-window integral plus two short end corrections per
/// slot covers the whole column.
pub fn tf_exact_diagonal_column(
    path: &PathParams,
    m: usize,
    pc: &PulseConstraints,
    params: &OtfsParams,
    tol: f64,
) -> Result<Vec<Complex64>> {
    if !(tol > 0.0) {
        return Err(Error::Domain("quadrature tolerance must be positive".into()));
    }
    let s0 = exact_setup(path, 0, m, 0, m, pc, params)?;
    let full = u_integral(&s0, s0.u_lo, s0.u_hi, tol)?;
    let mut out = Vec::with_capacity(params.slots());
    for n in 0..params.slots() {
        let s = exact_setup(path, n, m, n, m, pc, params)?;
        let shift = s.u_lo - s0.u_lo;
        let value = if n == 0 {
            full
        } else {
            let tail = u_integral(&s0, s0.u_hi, s0.u_hi + shift, tol)?;
            let head = u_integral(&s0, s0.u_lo, s0.u_lo + shift, tol)?;
            full + tail - head
        };
        out.push(s.prefactor * value);
    }
    Ok(out)
}

/// Diagonal exact coefficients `H[n, m]` for every bin of the grid.
pub fn tf_exact_diagonal_grid(
    path: &PathParams,
    pc: &PulseConstraints,
    params: &OtfsParams,
    tol: f64,
) -> Result<TfGrid> {
    let mut out = TfGrid::zeros(params);
    for m in 0..params.subcarriers() {
        for (n, v) in tf_exact_diagonal_column(path, m, pc, params, tol)?
            .into_iter()
            .enumerate()
        {
            out[(n, m)] = v;
        }
    }
    Ok(out)
}

/// Closed-form diagonal coefficient for ideal pulses.
///
/// A static path returns `β e^{-j2πτmΔf}`.
pub fn tf_coeff_ideal(path: &PathParams, n: usize, m: usize, params: &OtfsParams) -> Complex64 {
    let df = params.subcarrier_spacing();
    let tau = path.delay();
    let Some(p) = path.squint_ratio() else {
        return path.gain() * cis_turns(-tau * m as f64 * df);
    };
    let one_p = 1.0 + p;
    let fc = params.carrier_frequency();
    let t = params.slot_duration();
    // τf_c - (mΔf + f_c)(pτ - nT)/(1+p), regrouped into small terms
    let turns = tau * (fc - p * m as f64 * df) / one_p + (fc + m as f64 * df) * n as f64 * t / one_p;
    path.gain() * (p.abs() / one_p.abs()) * cis_turns(turns)
}

/// Approximate diagonal coefficient, with or without the squint phase.
pub fn tf_coeff_approx(path: &PathParams, n: usize, m: usize, include_squint: bool, params: &OtfsParams) -> Complex64 {
    let (nf, mf) = (n as f64, m as f64);
    let mut turns = path.delay() * path.doppler() + path.doppler() * nf * params.slot_duration()
        - path.delay() * mf * params.subcarrier_spacing();
    if include_squint {
        turns += mf * nf * path.inverse_squint();
    }
    path.gain() * cis_turns(turns)
}

/// Largest squint phase `2π (M-1)(N-1) ν/f_c` over the grid, in radians.
pub fn max_squint_phase(params: &OtfsParams, doppler_hz: f64) -> f64 {
    std::f64::consts::TAU * ((params.subcarriers() - 1) * (params.slots() - 1)) as f64 * doppler_hz.abs()
        / params.carrier_frequency()
}
