//! Multipath channel realizations and their continuous responses.
//!
//! A path is described by a complex gain `β`, a delay `τ = l T / M` and a
//! Doppler shift `ν = k Δf / N` measured at the carrier. Because the Doppler
//! shift of a wideband signal scales with the absolute frequency, each path
//! also carries the squint ratio `p = f_c / ν`, which controls every squint
//! correction term downstream.

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::cis_turns;
use crate::params::{OtfsParams, SPEED_OF_LIGHT};

/// Smallest admissible `|f_c / ν|` for a moving path.
pub const MIN_SQUINT_RATIO: f64 = 1e6;

/// Maximum Doppler shift in hertz and in Doppler bins for a given speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopplerBounds {
    pub max_doppler_hz: f64,
    pub max_doppler_index: f64,
}

/// Maximum Doppler for a terminal moving at `speed_mps`.
pub fn doppler_bounds(speed_mps: f64, params: &OtfsParams) -> DopplerBounds {
    let nu = speed_mps / SPEED_OF_LIGHT * params.carrier_frequency();
    DopplerBounds {
        max_doppler_hz: nu,
        max_doppler_index: nu * params.slots() as f64 * params.slot_duration(),
    }
}

/// One propagation path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathParams {
    gain: Complex64,
    delay_index: f64,
    doppler_index: f64,
    delay: f64,
    doppler: f64,
    carrier_frequency: f64,
}

impl PathParams {
    /// Builds a path from grid indices and validates it against `params`.
    ///
    /// The delay index must lie in `[1, l_max]` and the Doppler index in
    /// `[-k_max, k_max]`. Fractional Doppler indices are allowed.
    pub fn new(gain: Complex64, delay_index: f64, doppler_index: f64, params: &OtfsParams) -> Result<Self> {
        if !(delay_index >= 1.0 && delay_index <= params.max_delay_index() as f64) {
            return Err(Error::Params(format!(
                "delay index {delay_index} outside [1, {}]",
                params.max_delay_index()
            )));
        }
        if !(doppler_index.abs() <= params.max_doppler_index() + 1e-9) {
            return Err(Error::Params(format!(
                "Doppler index {doppler_index} exceeds {}",
                params.max_doppler_index()
            )));
        }
        let path = Self {
            gain,
            delay_index,
            doppler_index,
            delay: delay_index * params.delay_resolution(),
            doppler: doppler_index * params.doppler_resolution(),
            carrier_frequency: params.carrier_frequency(),
        };
        if let Some(p) = path.squint_ratio() {
            if p.abs() <= MIN_SQUINT_RATIO {
                return Err(Error::Params(format!(
                    "squint ratio {p:.3e} below {MIN_SQUINT_RATIO:e}; Doppler too large for the carrier"
                )));
            }
        }
        Ok(path)
    }

    /// Builds a path on integer grid indices.
    pub fn on_grid(gain: Complex64, delay_index: usize, doppler_index: i64, params: &OtfsParams) -> Result<Self> {
        Self::new(gain, delay_index as f64, doppler_index as f64, params)
    }

    /// Complex gain `β` (carrier phase included).
    pub fn gain(&self) -> Complex64 {
        self.gain
    }

    /// `β' = β e^{j2πτν}`.
    pub fn gain_prime(&self) -> Complex64 {
        self.gain * cis_turns(self.delay * self.doppler)
    }

    pub fn delay_index(&self) -> f64 {
        self.delay_index
    }

    pub fn doppler_index(&self) -> f64 {
        self.doppler_index
    }

    /// Integer delay index, if the delay lies exactly on the grid.
    pub fn integer_delay_index(&self) -> Option<usize> {
        (self.delay_index.fract() == 0.0).then_some(self.delay_index as usize)
    }

    /// Delay in seconds.
    pub fn delay(&self) -> f64 {
        self.delay
    }

    /// Doppler shift at the carrier in hertz.
    pub fn doppler(&self) -> f64 {
        self.doppler
    }

    pub fn carrier_frequency(&self) -> f64 {
        self.carrier_frequency
    }

    /// `f_c / ν`, or `None` for a static path.
    pub fn squint_ratio(&self) -> Option<f64> {
        (self.doppler != 0.0).then(|| self.carrier_frequency / self.doppler)
    }

    /// `ν / f_c`, which is zero for a static path.
    pub fn inverse_squint(&self) -> f64 {
        self.doppler / self.carrier_frequency
    }

    /// Same path with a different gain.
    pub fn with_gain(&self, gain: Complex64) -> Self {
        Self { gain, ..*self }
    }
}

/// How Doppler shifts are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DopplerDraw {
    /// Uniform integers in `[-⌊k_max⌋, ⌊k_max⌋]`.
    #[default]
    Grid,
    /// Uniform reals in `[-ν_max, ν_max]`.
    Continuous,
}

/// A set of paths sharing one parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    paths: Vec<PathParams>,
    params: OtfsParams,
    seed: Option<u64>,
}

impl ChannelRealization {
    /// Assembles a realization. Delay indices must be pairwise distinct.
    pub fn new(paths: Vec<PathParams>, params: OtfsParams, seed: Option<u64>) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::Params("a channel needs at least one path".into()));
        }
        for (i, a) in paths.iter().enumerate() {
            for b in &paths[i + 1..] {
                if a.delay_index == b.delay_index {
                    return Err(Error::Params(format!("paths share delay index {}", a.delay_index)));
                }
            }
        }
        Ok(Self { paths, params, seed })
    }

    pub fn paths(&self) -> &[PathParams] {
        &self.paths
    }

    pub fn params(&self) -> &OtfsParams {
        &self.params
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Copy of the channel with every gain multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            paths: self.paths.iter().map(|p| p.with_gain(p.gain() * s)).collect(),
            ..self.clone()
        }
    }

    /// Serializes to a TOML record.
    pub fn to_record(&self) -> ChannelRecord {
        ChannelRecord {
            seed: self.seed,
            params: self.params,
            paths: self
                .paths
                .iter()
                .map(|p| PathRecord {
                    gain_re: p.gain.re,
                    gain_im: p.gain.im,
                    delay_index: p.delay_index,
                    doppler_index: p.doppler_index,
                })
                .collect(),
        }
    }

    pub fn from_record(record: &ChannelRecord) -> Result<Self> {
        let paths = record
            .paths
            .iter()
            .map(|r| {
                PathParams::new(
                    Complex64::new(r.gain_re, r.gain_im),
                    r.delay_index,
                    r.doppler_index,
                    &record.params,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(paths, record.params, record.seed)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(&self.to_record()).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let record: ChannelRecord = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_record(&record)
    }
}

/// Text form of a [`ChannelRealization`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub params: OtfsParams,
    pub paths: Vec<PathRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub gain_re: f64,
    pub gain_im: f64,
    pub delay_index: f64,
    pub doppler_index: f64,
}

/// Draws a random channel with integer Doppler indices.
pub fn draw_channel(params: &OtfsParams, num_paths: usize, speed_mps: f64, seed: u64) -> Result<ChannelRealization> {
    draw_channel_with(params, num_paths, speed_mps, seed, DopplerDraw::Grid)
}

/// Draws a random channel.
///
/// Gains are i.i.d. `CN(0, 1/N_P)`, delay indices are drawn without
/// replacement from `1..=l_max`, and Doppler shifts follow `doppler`.
pub fn draw_channel_with(
    params: &OtfsParams,
    num_paths: usize,
    speed_mps: f64,
    seed: u64,
    doppler: DopplerDraw,
) -> Result<ChannelRealization> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    draw_channel_rng(params, num_paths, speed_mps, doppler, &mut rng).map(|mut ch| {
        ch.seed = Some(seed);
        ch
    })
}

/// Same as [`draw_channel_with`] but drawing from a caller-owned generator.
pub fn draw_channel_rng<R: Rng + ?Sized>(
    params: &OtfsParams,
    num_paths: usize,
    speed_mps: f64,
    doppler: DopplerDraw,
    rng: &mut R,
) -> Result<ChannelRealization> {
    let l_max = params.max_delay_index();
    if num_paths == 0 || num_paths > l_max {
        return Err(Error::Config(format!(
            "number of paths {num_paths} must lie in [1, {l_max}]"
        )));
    }
    if !(speed_mps >= 0.0) {
        return Err(Error::Config(format!("speed {speed_mps} must be non-negative")));
    }
    let bounds = doppler_bounds(speed_mps, params);
    if bounds.max_doppler_index > params.max_doppler_index() + 1e-9 {
        return Err(Error::Config(format!(
            "speed {speed_mps} m/s needs Doppler index {:.3} above the configured {:.3}",
            bounds.max_doppler_index,
            params.max_doppler_index()
        )));
    }
    let sigma = (0.5 / num_paths as f64).sqrt();
    let delays = sample(rng, l_max, num_paths);
    let k_floor = bounds.max_doppler_index.floor() as i64;
    let mut paths = Vec::with_capacity(num_paths);
    for l in delays.iter() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let k = match doppler {
            DopplerDraw::Grid => rng.random_range(-k_floor..=k_floor) as f64,
            DopplerDraw::Continuous if bounds.max_doppler_index > 0.0 => {
                rng.random_range(-bounds.max_doppler_index..=bounds.max_doppler_index)
            }
            DopplerDraw::Continuous => 0.0,
        };
        paths.push(PathParams::new(
            Complex64::new(re, im) * sigma,
            (l + 1) as f64,
            k,
            params,
        )?);
    }
    ChannelRealization::new(paths, *params, None)
}

/// Continuous time-frequency response of one path,
/// `β e^{j2π(ν/f_c)(f_c+f)t} e^{-j2πfτ}`.
pub fn tf_response(path: &PathParams, t: f64, f: f64) -> Complex64 {
    let turns = path.inverse_squint() * (path.carrier_frequency + f) * t - f * path.delay;
    path.gain * cis_turns(turns)
}

/// Delay-Doppler response of one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DdResponse {
    /// Constant-modulus chirp value `β |p| e^{j2πp(τ-τ_i)(ν-ν_i)}`.
    Value(Complex64),
    /// Static path: the response is `β δ(τ-τ_i) δ(ν)` and has no pointwise value.
    Impulse { gain: Complex64, delay: f64 },
}

/// Delay-Doppler response of a path evaluated at `(tau, nu)`.
pub fn dd_response(path: &PathParams, tau: f64, nu: f64) -> DdResponse {
    match path.squint_ratio() {
        None => DdResponse::Impulse {
            gain: path.gain,
            delay: path.delay,
        },
        Some(p) => DdResponse::Value(path.gain * p.abs() * cis_turns(p * (tau - path.delay) * (nu - path.doppler))),
    }
}

/// Delay-Doppler response value, failing for a static path.
pub fn dd_response_value(path: &PathParams, tau: f64, nu: f64) -> Result<Complex64> {
    match dd_response(path, tau, nu) {
        DdResponse::Value(v) => Ok(v),
        DdResponse::Impulse { .. } => Err(Error::Domain(
            "static path has an impulsive delay-Doppler response".into(),
        )),
    }
}
