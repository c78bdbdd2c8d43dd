//! C interface to `otfs_dse`.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_build`
//! functions and released with the matching `*_free`. Every fallible call
//! returns an [`OtfsStatus`]; on failure the message is available from
//! [`otfs_last_error_message`] on the same thread. Grids are row-major
//! `N × M` arrays of [`OtfsComplex`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use otfs_dse::channel::{draw_channel_with, ChannelRealization, DopplerDraw};
use otfs_dse::error::Error;
use otfs_dse::estimation::{
    build_sensing_dd, build_sensing_tf, omp_estimate, AtomLayout, Dictionary, SensingMatrix, StopRule,
};
use otfs_dse::grid::{DdGrid, Grid, TfGrid};
use otfs_dse::io_analysis::{dd_channel_grid, tf_channel_grid, CoeffModel};
use otfs_dse::params::OtfsParams;
use otfs_dse::transform::SfftPlan;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OtfsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    WrongModel = 4,
    QuadratureFailed = 5,
    Io = 6,
    Panic = 7,
}

/// Complex number with the layout of C99 `double _Complex`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OtfsComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for OtfsComplex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<OtfsComplex> for Complex64 {
    fn from(z: OtfsComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OtfsModel {
    IgnoreDse = 0,
    IdealExact = 1,
    IdealApprox = 2,
    DdClosed = 3,
    Rect = 4,
}

fn model_of(raw: i32) -> Result<CoeffModel, Fail> {
    Ok(match raw {
        x if x == OtfsModel::IgnoreDse as i32 => CoeffModel::IgnoreDse,
        x if x == OtfsModel::IdealExact as i32 => CoeffModel::IdealExact,
        x if x == OtfsModel::IdealApprox as i32 => CoeffModel::IdealApprox,
        x if x == OtfsModel::DdClosed as i32 => CoeffModel::DdClosed,
        x if x == OtfsModel::Rect as i32 => CoeffModel::Rect,
        other => return Err(Fail(OtfsStatus::InvalidArgument, format!("unknown model {other}"))),
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OtfsDomain {
    TimeFrequency = 0,
    DelayDoppler = 1,
}

fn domain_of(raw: i32) -> Result<OtfsDomain, Fail> {
    match raw {
        0 => Ok(OtfsDomain::TimeFrequency),
        1 => Ok(OtfsDomain::DelayDoppler),
        other => Err(Fail(OtfsStatus::InvalidArgument, format!("unknown domain {other}"))),
    }
}

/// Opaque grid parameters.
pub struct OtfsParamsHandle(OtfsParams);

/// Opaque channel realization.
pub struct OtfsChannelHandle(ChannelRealization);

/// Opaque sensing matrix.
pub struct OtfsSensingHandle(SensingMatrix);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> OtfsStatus {
    match e {
        Error::Params(_) | Error::Config(_) | Error::Domain(_) => OtfsStatus::InvalidArgument,
        Error::Dimension { .. } | Error::Length { .. } => OtfsStatus::DimensionMismatch,
        Error::WrongModel { .. } => OtfsStatus::WrongModel,
        Error::Quadrature { .. } => OtfsStatus::QuadratureFailed,
        Error::Io(_) | Error::Csv(_) => OtfsStatus::Io,
    }
}

struct Fail(OtfsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(OtfsStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, records its error message and converts panics to a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> OtfsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OtfsStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            OtfsStatus::Panic
        }
    }
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice_in<'a>(p: *const OtfsComplex, len: usize, what: &str) -> Result<&'a [OtfsComplex], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_out<'a>(p: *mut OtfsComplex, len: usize, what: &str) -> Result<&'a mut [OtfsComplex], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn check_len(expected: usize, got: usize) -> Result<(), Fail> {
    if expected != got {
        return Err(Error::Length { expected, got }.into());
    }
    Ok(())
}

fn copy_out(src: &[Complex64], dst: &mut [OtfsComplex]) -> Result<(), Fail> {
    check_len(src.len(), dst.len())?;
    for (d, s) in dst.iter_mut().zip(src) {
        *d = (*s).into();
    }
    Ok(())
}

fn grid_in(params: &OtfsParams, data: &[OtfsComplex]) -> Result<Grid, Fail> {
    check_len(params.grid_size(), data.len())?;
    let v = data.iter().map(|&z| Complex64::from(z)).collect();
    Ok(Grid::from_vec(params.slots(), params.subcarriers(), v)?)
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output handle pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the last failed call on this thread, or null if none.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn otfs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn otfs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a parameter set.
///
/// # Safety
/// `out` must be a valid pointer to writable handle storage.
#[no_mangle]
pub unsafe extern "C" fn otfs_params_new(
    subcarriers: usize,
    slots: usize,
    subcarrier_spacing_hz: f64,
    carrier_frequency_hz: f64,
    max_delay_index: usize,
    max_doppler_index: f64,
    out: *mut *mut OtfsParamsHandle,
) -> OtfsStatus {
    guard(|| {
        let p = OtfsParams::new(
            subcarriers,
            slots,
            subcarrier_spacing_hz,
            carrier_frequency_hz,
            max_delay_index,
            max_doppler_index,
        )?;
        put(out, OtfsParamsHandle(p))
    })
}

/// # Safety
/// `p` must be null or a handle from [`otfs_params_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn otfs_params_free(p: *mut OtfsParamsHandle) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// `N · M`, or 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live parameter handle.
#[no_mangle]
pub unsafe extern "C" fn otfs_params_grid_size(p: *const OtfsParamsHandle) -> usize {
    p.as_ref().map_or(0, |h| h.0.grid_size())
}

/// Forward or inverse symplectic transform of a row-major `N × M` grid.
///
/// `inverse != 0` maps delay-Doppler to time-frequency.
///
/// # Safety
/// `input` and `output` must point to `len` elements each.
#[no_mangle]
pub unsafe extern "C" fn otfs_sfft(
    params: *const OtfsParamsHandle,
    input: *const OtfsComplex,
    output: *mut OtfsComplex,
    len: usize,
    inverse: i32,
) -> OtfsStatus {
    guard(|| {
        let p = &handle(params, "params")?.0;
        let g = grid_in(p, slice_in(input, len, "input")?)?;
        let plan = SfftPlan::new(p);
        let res = if inverse != 0 {
            plan.isfft(&DdGrid::from_grid(p, g)?)?.into_grid()
        } else {
            plan.sfft(&TfGrid::from_grid(p, g)?)?.into_grid()
        };
        copy_out(res.as_slice(), slice_out(output, len, "output")?)
    })
}

/// Draws a random channel with `num_paths` paths for a user at `speed_mps`.
///
/// `integer_doppler != 0` draws Doppler indices on the integer grid.
///
/// # Safety
/// `params` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn otfs_channel_draw(
    params: *const OtfsParamsHandle,
    num_paths: usize,
    speed_mps: f64,
    seed: u64,
    integer_doppler: i32,
    out: *mut *mut OtfsChannelHandle,
) -> OtfsStatus {
    guard(|| {
        let p = &handle(params, "params")?.0;
        let draw = if integer_doppler != 0 {
            DopplerDraw::Grid
        } else {
            DopplerDraw::Continuous
        };
        let ch = draw_channel_with(p, num_paths, speed_mps, seed, draw)?;
        put(out, OtfsChannelHandle(ch))
    })
}

/// # Safety
/// `ch` must be null or a live channel handle.
#[no_mangle]
pub unsafe extern "C" fn otfs_channel_free(ch: *mut OtfsChannelHandle) {
    if !ch.is_null() {
        drop(Box::from_raw(ch));
    }
}

/// Number of paths, or 0 for a null handle.
///
/// # Safety
/// `ch` must be null or a live channel handle.
#[no_mangle]
pub unsafe extern "C" fn otfs_channel_num_paths(ch: *const OtfsChannelHandle) -> usize {
    ch.as_ref().map_or(0, |h| h.0.paths().len())
}

/// Gain and delay/Doppler indices of path `index`.
///
/// # Safety
/// `ch` must be live and the three outputs writable.
#[no_mangle]
pub unsafe extern "C" fn otfs_channel_path(
    ch: *const OtfsChannelHandle,
    index: usize,
    gain: *mut OtfsComplex,
    delay_index: *mut f64,
    doppler_index: *mut f64,
) -> OtfsStatus {
    guard(|| {
        let c = &handle(ch, "channel")?.0;
        let path = c.paths().get(index).ok_or_else(|| {
            Fail(
                OtfsStatus::InvalidArgument,
                format!("path {index} out of range (channel has {})", c.paths().len()),
            )
        })?;
        if gain.is_null() || delay_index.is_null() || doppler_index.is_null() {
            return Err(null("path output"));
        }
        *gain = path.gain().into();
        *delay_index = path.delay_index();
        *doppler_index = path.doppler_index();
        Ok(())
    })
}

/// Channel grid under `model` (an [`OtfsModel`] value): TF coefficients for
/// `domain = OTFS_DOMAIN_TIME_FREQUENCY`, the DD kernel for
/// `OTFS_DOMAIN_DELAY_DOPPLER`.
///
/// # Safety
/// `output` must point to `len` writable elements.
#[no_mangle]
pub unsafe extern "C" fn otfs_channel_grid(
    ch: *const OtfsChannelHandle,
    model: i32,
    domain: i32,
    output: *mut OtfsComplex,
    len: usize,
) -> OtfsStatus {
    guard(|| {
        let c = &handle(ch, "channel")?.0;
        let model = model_of(model)?;
        let g = match domain_of(domain)? {
            OtfsDomain::TimeFrequency => tf_channel_grid(c, model)?.into_grid(),
            OtfsDomain::DelayDoppler => dd_channel_grid(c, model)?.into_grid(),
        };
        copy_out(g.as_slice(), slice_out(output, len, "output")?)
    })
}

/// Builds a pilot-at-origin sensing matrix over Doppler bins `-k_max..=k_max`
/// and delay bins `0..=l_max`. `domain` is an [`OtfsDomain`] and `model` an
/// [`OtfsModel`] value; `model` is ignored for the TF domain.
///
/// # Safety
/// `params` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn otfs_sensing_build(
    params: *const OtfsParamsHandle,
    k_max: usize,
    l_max: usize,
    pilot: OtfsComplex,
    domain: i32,
    model: i32,
    out: *mut *mut OtfsSensingHandle,
) -> OtfsStatus {
    guard(|| {
        let p = &handle(params, "params")?.0;
        let layout = AtomLayout::new(k_max, l_max, p)?;
        let m = match domain_of(domain)? {
            OtfsDomain::TimeFrequency => build_sensing_tf(p, layout, pilot.into()),
            OtfsDomain::DelayDoppler => build_sensing_dd(p, layout, pilot.into(), model_of(model)?)?,
        };
        put(out, OtfsSensingHandle(m))
    })
}

/// # Safety
/// `s` must be null or a live sensing handle.
#[no_mangle]
pub unsafe extern "C" fn otfs_sensing_free(s: *mut OtfsSensingHandle) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Rows and columns of the matrix.
///
/// # Safety
/// `s` must be live; `rows` and `cols` writable.
#[no_mangle]
pub unsafe extern "C" fn otfs_sensing_shape(
    s: *const OtfsSensingHandle,
    rows: *mut usize,
    cols: *mut usize,
) -> OtfsStatus {
    guard(|| {
        let m = &handle(s, "sensing matrix")?.0;
        if rows.is_null() || cols.is_null() {
            return Err(null("shape output"));
        }
        *rows = m.rows();
        *cols = m.cols();
        Ok(())
    })
}

/// Doppler and delay index of column `col`.
///
/// # Safety
/// `s` must be live; `k` and `l` writable.
#[no_mangle]
pub unsafe extern "C" fn otfs_sensing_atom(
    s: *const OtfsSensingHandle,
    col: usize,
    k: *mut i64,
    l: *mut usize,
) -> OtfsStatus {
    guard(|| {
        let m = &handle(s, "sensing matrix")?.0;
        if col >= m.cols() {
            return Err(Fail(OtfsStatus::InvalidArgument, format!("column {col} out of range")));
        }
        if k.is_null() || l.is_null() {
            return Err(null("atom output"));
        }
        let (kk, ll) = m.layout().atom(col);
        *k = kk;
        *l = ll;
        Ok(())
    })
}

/// Orthogonal matching pursuit on `y` (already divided by the pilot scale).
///
/// Writes up to `capacity` selected columns and gains and stores their
/// number in `selected`. Stops after `max_iter` atoms or once the residual
/// norm drops below `eps`.
///
/// # Safety
/// `y` must hold `len` elements; `support` and `gains` `capacity` elements.
#[no_mangle]
pub unsafe extern "C" fn otfs_omp(
    s: *const OtfsSensingHandle,
    y: *const OtfsComplex,
    len: usize,
    max_iter: usize,
    eps: f64,
    support: *mut usize,
    gains: *mut OtfsComplex,
    capacity: usize,
    selected: *mut usize,
) -> OtfsStatus {
    guard(|| {
        let m = &handle(s, "sensing matrix")?.0;
        let y: Vec<Complex64> = slice_in(y, len, "y")?.iter().map(|&z| z.into()).collect();
        if support.is_null() || selected.is_null() {
            return Err(null("OMP output"));
        }
        let est = omp_estimate(&y, m, StopRule::residual(eps, max_iter.min(capacity)))?;
        let gains = slice_out(gains, capacity, "gains")?;
        let support = std::slice::from_raw_parts_mut(support, capacity);
        for (i, (&j, &b)) in est.support.iter().zip(&est.beta_hat).enumerate() {
            support[i] = j;
            gains[i] = b.into();
        }
        *selected = est.support.len();
        Ok(())
    })
}
