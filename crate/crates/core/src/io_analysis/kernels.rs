//! Closed-form delay-Doppler kernels for ideal and rectangular pulses.

use num_complex::Complex64;

use crate::channel::PathParams;
use crate::error::{Error, Result};
use crate::grid::{cis_turns, DdGrid};
use crate::params::OtfsParams;

/// Dirichlet ratio `sin(πLx) / (L sin(πx))`.
///
/// At integer `x` the value is the limit `(-1)^{x(L-1)}`. Elsewhere the
/// argument is reduced to the nearest integer first, which keeps full
/// relative precision for points a tiny distance away from a singularity.
pub fn dirichlet(x: f64, len: usize) -> f64 {
    let r = x.round();
    let d = x - r;
    let parity = (r as i64).rem_euclid(2) * ((len as i64 - 1).rem_euclid(2));
    let sign = if parity == 0 { 1.0 } else { -1.0 };
    let den = (std::f64::consts::PI * d).sin();
    if den == 0.0 {
        return sign;
    }
    let scaled = len as f64 * d;
    if scaled.round() != 0.0 && (scaled - scaled.round()).abs() < 1e-12 {
        return 0.0;
    }
    let num = (std::f64::consts::PI * scaled).sin();
    sign * num / (len as f64 * den)
}

/// Geometry of one path as seen by the kernels.
///
/// Dictionary builders use this directly for unit-gain atoms at arbitrary
/// grid points, including delay zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPath {
    pub gain_prime: Complex64,
    pub delay_index: f64,
    pub doppler_index: f64,
    /// `ν / f_c`; zero for a static path.
    pub inverse_squint: f64,
    /// Doppler shift in hertz.
    pub doppler: f64,
}

impl KernelPath {
    pub fn from_path(path: &PathParams) -> Self {
        Self {
            gain_prime: path.gain_prime(),
            delay_index: path.delay_index(),
            doppler_index: path.doppler_index(),
            inverse_squint: path.inverse_squint(),
            doppler: path.doppler(),
        }
    }

    /// Unit `β'` atom at grid point `(k, l)`.
    pub fn atom(doppler_index: f64, delay_index: f64, params: &OtfsParams) -> Self {
        let doppler = doppler_index * params.doppler_resolution();
        Self {
            gain_prime: Complex64::new(1.0, 0.0),
            delay_index,
            doppler_index,
            inverse_squint: doppler / params.carrier_frequency(),
            doppler,
        }
    }

    /// Same geometry with the squint terms removed.
    pub fn without_squint(&self) -> Self {
        Self {
            inverse_squint: 0.0,
            ..*self
        }
    }
}

/// Delay factor of the ideal-pulse kernel for delay bin `l`.
fn ideal_delay_factor(g: &KernelPath, l: usize, m: usize, n: usize) -> Complex64 {
    let (mf, nf) = (m as f64, n as f64);
    let a = g.delay_index - l as f64;
    let ratio = dirichlet(a / mf - (nf - 1.0) * g.inverse_squint / 2.0, m);
    cis_turns(-(mf - 1.0) * a / (2.0 * mf)) * ratio
}

/// Doppler factor of the ideal-pulse kernel for Doppler bin `k`.
fn ideal_doppler_factor(g: &KernelPath, k: usize, m: usize, n: usize) -> Complex64 {
    let (mf, nf) = (m as f64, n as f64);
    let b = g.doppler_index - k as f64;
    let ratio = dirichlet(b / nf + (mf - 1.0) * g.inverse_squint / 2.0, n);
    cis_turns((nf - 1.0) * b / (2.0 * nf)) * ratio
}

fn ideal_common(g: &KernelPath, m: usize, n: usize) -> Complex64 {
    g.gain_prime * cis_turns((m as f64 - 1.0) * (n as f64 - 1.0) * g.inverse_squint / 4.0)
}

/// Ideal-pulse delay-Doppler kernel `h[k, l]` for one path.
pub fn dd_kernel_ideal(path: &PathParams, k: usize, l: usize, params: &OtfsParams) -> Result<Complex64> {
    check_bin(k, l, params)?;
    Ok(kernel_ideal_at(&KernelPath::from_path(path), k, l, params))
}

pub(crate) fn kernel_ideal_at(g: &KernelPath, k: usize, l: usize, params: &OtfsParams) -> Complex64 {
    let (m, n) = (params.subcarriers(), params.slots());
    ideal_common(g, m, n) * ideal_delay_factor(g, l, m, n) * ideal_doppler_factor(g, k, m, n)
}

/// Full ideal-pulse kernel grid for one path geometry.
///
/// The kernel separates into a delay factor and a Doppler factor, so the grid
/// costs `M + N` Dirichlet evaluations plus one outer product.
pub fn kernel_ideal_grid(g: &KernelPath, params: &OtfsParams) -> DdGrid {
    let (m, n) = (params.subcarriers(), params.slots());
    let c = ideal_common(g, m, n);
    let delay: Vec<Complex64> = (0..m).map(|l| ideal_delay_factor(g, l, m, n)).collect();
    let doppler: Vec<Complex64> = (0..n).map(|k| c * ideal_doppler_factor(g, k, m, n)).collect();
    DdGrid::from_fn(params, |k, l| doppler[k] * delay[l])
}

/// Sum of ideal-pulse kernels over all paths of a channel.
pub fn dd_kernel_ideal_grid(paths: &[PathParams], params: &OtfsParams) -> DdGrid {
    let mut acc = DdGrid::zeros(params);
    for p in paths {
        let g = kernel_ideal_grid(&KernelPath::from_path(p), params);
        acc.add_assign(&g).expect("same shape");
    }
    acc
}

/// Which branch of the rectangular-pulse kernel serves a source delay bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Energy arriving from the previous time slot.
    Isi,
    /// Energy staying within the current time slot.
    Ici,
}

/// Partition of the source delay bins `0..M` into ISI and ICI bins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSets {
    /// First delay bin of the ISI set; the ISI set is `isi_start..M`.
    pub isi_start: usize,
    pub subcarriers: usize,
}

impl IndexSets {
    /// Sets for a path with integer delay index `delay_index` and squint sign.
    ///
    /// A receding path (`f_c/ν > 0`) starts the ISI set at `M - l_i + 1`;
    /// an approaching one at `M - l_i`.
    pub fn new(delay_index: usize, positive_squint: bool, subcarriers: usize) -> Result<Self> {
        if delay_index == 0 || delay_index >= subcarriers {
            return Err(Error::Domain(format!(
                "index sets need a delay index in [1, {}], got {delay_index}",
                subcarriers - 1
            )));
        }
        let isi_start = if positive_squint {
            subcarriers - delay_index + 1
        } else {
            subcarriers - delay_index
        };
        Ok(Self { isi_start, subcarriers })
    }

    /// Sets that move exactly the `l_i` bins wrapping past the slot
    /// boundary into the ISI branch, independent of the squint sign.
    pub fn sample_aligned(delay_index: usize, subcarriers: usize) -> Result<Self> {
        Self::new(delay_index, false, subcarriers)
    }

    pub fn branch(&self, l_src: usize) -> Branch {
        if l_src >= self.isi_start {
            Branch::Isi
        } else {
            Branch::Ici
        }
    }

    pub fn isi(&self) -> Vec<usize> {
        (self.isi_start..self.subcarriers).collect()
    }

    pub fn ici(&self) -> Vec<usize> {
        (0..self.isi_start).collect()
    }
}

/// ISI and ICI sets for a moving path with integer delay.
pub fn index_sets(path: &PathParams, params: &OtfsParams) -> Result<IndexSets> {
    let l = path
        .integer_delay_index()
        .ok_or_else(|| Error::Domain("index sets need an integer delay".into()))?;
    let p = path
        .squint_ratio()
        .ok_or_else(|| Error::Domain("index sets need a non-zero Doppler shift".into()))?;
    IndexSets::new(l, p > 0.0, params.subcarriers())
}

/// How the rectangular kernel chooses ISI bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IndexSetRule {
    /// Sign-dependent sets of [`IndexSets::new`]; static paths use the
    /// approaching-path set.
    #[default]
    SquintSigned,
    /// [`IndexSets::sample_aligned`] for every path.
    SampleAligned,
}

impl IndexSetRule {
    fn sets(self, g: &KernelPath, subcarriers: usize) -> Result<IndexSets> {
        let l = integer_delay(g.delay_index)?;
        match self {
            IndexSetRule::SquintSigned => IndexSets::new(l, g.inverse_squint > 0.0, subcarriers),
            IndexSetRule::SampleAligned => IndexSets::sample_aligned(l, subcarriers),
        }
    }
}

fn integer_delay(delay_index: f64) -> Result<usize> {
    if delay_index.fract() != 0.0 || delay_index < 0.0 {
        return Err(Error::Domain(format!(
            "rectangular-pulse kernels need an integer delay index, got {delay_index}"
        )));
    }
    Ok(delay_index as usize)
}

/// One rectangular-pulse kernel entry for a known branch.
///
/// `(k, l)` is the destination bin and `(k_src, l_src)` the source bin.
pub fn rect_entry(
    g: &KernelPath,
    branch: Branch,
    k: usize,
    l: usize,
    k_src: usize,
    l_src: usize,
    params: &OtfsParams,
) -> Complex64 {
    let (m, n) = (params.subcarriers(), params.slots());
    let (mf, nf) = (m as f64, n as f64);
    let a = g.delay_index + l_src as f64 - l as f64;
    let b = g.doppler_index + k_src as f64 - k as f64;
    let eps = g.inverse_squint;
    let common =
        g.gain_prime * cis_turns(-(mf - 1.0) * a / (2.0 * mf) + g.doppler * l_src as f64 * params.delay_resolution());
    let doppler_arg = b / nf + (mf - 1.0) * eps / 2.0;
    match branch {
        Branch::Isi => {
            let delay_ratio = dirichlet(a / mf - (nf - 2.0) * eps / 2.0, m);
            let doppler_ratio = (nf - 1.0) / nf * dirichlet(doppler_arg, n - 1);
            let phase = b / 2.0 + (nf - 2.0) * (mf - 1.0) * eps / 4.0 - (g.doppler_index + k_src as f64) / nf;
            common * cis_turns(phase) * (delay_ratio * doppler_ratio)
        }
        Branch::Ici => {
            let delay_ratio = dirichlet(a / mf - (nf - 1.0) * eps / 2.0, m);
            let doppler_ratio = dirichlet(doppler_arg, n);
            let phase = (nf - 1.0) * b / (2.0 * nf) + (nf - 1.0) * (mf - 1.0) * eps / 4.0;
            common * cis_turns(phase) * (delay_ratio * doppler_ratio)
        }
    }
}

/// Rectangular-pulse kernel `h_{k,l}[k', l']` for one path.
pub fn dd_kernel_rect(
    path: &PathParams,
    k: usize,
    l: usize,
    k_src: usize,
    l_src: usize,
    params: &OtfsParams,
) -> Result<Complex64> {
    check_bin(k, l, params)?;
    check_bin(k_src, l_src, params)?;
    let g = KernelPath::from_path(path);
    let sets = IndexSetRule::SquintSigned.sets(&g, params.subcarriers())?;
    Ok(rect_entry(&g, sets.branch(l_src), k, l, k_src, l_src, params))
}

fn check_bin(k: usize, l: usize, params: &OtfsParams) -> Result<()> {
    if k >= params.slots() || l >= params.subcarriers() {
        return Err(Error::Domain(format!(
            "bin ({k}, {l}) outside the {}x{} grid",
            params.slots(),
            params.subcarriers()
        )));
    }
    Ok(())
}

/// Rectangular-pulse kernel of one path, either dense or truncated.
#[derive(Debug, Clone)]
pub struct DdKernelRect {
    slots: usize,
    subcarriers: usize,
    taps: Vec<RectTap>,
    dense: bool,
}

/// One kernel entry: destination `(k, l)`, source `(k_src, l_src)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectTap {
    pub k: usize,
    pub l: usize,
    pub k_src: usize,
    pub l_src: usize,
    pub value: Complex64,
}

impl DdKernelRect {
    /// Every entry of the kernel.
    pub fn dense(path: &PathParams, params: &OtfsParams) -> Result<Self> {
        Self::build(&KernelPath::from_path(path), params, IndexSetRule::SquintSigned, None)
    }

    /// Entries whose modulus exceeds `fraction` of the kernel peak.
    pub fn truncated(path: &PathParams, params: &OtfsParams, fraction: f64) -> Result<Self> {
        Self::build(
            &KernelPath::from_path(path),
            params,
            IndexSetRule::SquintSigned,
            Some(fraction),
        )
    }

    pub fn build(g: &KernelPath, params: &OtfsParams, rule: IndexSetRule, truncate: Option<f64>) -> Result<Self> {
        let (m, n) = (params.subcarriers(), params.slots());
        let sets = rule.sets(g, m)?;
        let mut taps = Vec::with_capacity(m * m * n * n);
        for k in 0..n {
            for l in 0..m {
                for k_src in 0..n {
                    for l_src in 0..m {
                        let value = rect_entry(g, sets.branch(l_src), k, l, k_src, l_src, params);
                        taps.push(RectTap {
                            k,
                            l,
                            k_src,
                            l_src,
                            value,
                        });
                    }
                }
            }
        }
        if let Some(fraction) = truncate {
            let peak = taps.iter().map(|t| t.value.norm()).fold(0.0, f64::max);
            taps.retain(|t| t.value.norm() > fraction * peak);
        }
        Ok(Self {
            slots: n,
            subcarriers: m,
            taps,
            dense: truncate.is_none(),
        })
    }

    pub fn taps(&self) -> &[RectTap] {
        &self.taps
    }

    pub fn is_dense(&self) -> bool {
        self.dense
    }

    /// Applies the kernel: `y[k,l] += Σ h_{k,l}[k',l'] x[k',l']`.
    pub fn apply_into(&self, x: &DdGrid, y: &mut DdGrid) -> Result<()> {
        x.check_shape(self.slots, self.subcarriers)?;
        y.check_shape(self.slots, self.subcarriers)?;
        for t in &self.taps {
            y[(t.k, t.l)] += t.value * x[(t.k_src, t.l_src)];
        }
        Ok(())
    }
}
