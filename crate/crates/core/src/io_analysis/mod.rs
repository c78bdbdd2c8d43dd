//! Input-output analysis of the OTFS link under Doppler squint.
//!
//! Coefficient generators for ideal pulses (exact quadrature, closed form,
//! small-squint approximation), delay-Doppler kernels for ideal and
//! rectangular pulses, and channel application in the TF and DD domains.

mod coefficients;
mod constraints;
mod kernels;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use coefficients::{
    exact_integrand, max_squint_phase, tf_coeff_approx, tf_coeff_exact, tf_coeff_ideal, tf_exact_diagonal_column,
    tf_exact_diagonal_grid,
};
pub use constraints::{validate_constraints, ConstraintCheck, ConstraintReport, PulseConstraints};
pub use kernels::{
    dd_kernel_ideal, dd_kernel_ideal_grid, dd_kernel_rect, dirichlet, index_sets, kernel_ideal_grid, rect_entry,
    Branch, DdKernelRect, IndexSetRule, IndexSets, KernelPath, RectTap,
};

use crate::channel::{ChannelRealization, PathParams};
use crate::error::{Error, Result};
use crate::grid::{DdGrid, TfGrid};
use crate::params::OtfsParams;
use crate::transform::SfftPlan;

/// Default relative truncation threshold for rectangular kernels.
pub const DEFAULT_TRUNCATION: f64 = 1e-3;

/// Channel coefficient model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoeffModel {
    /// Classical coefficients without the squint phase.
    IgnoreDse,
    /// Closed-form ideal-pulse coefficients including squint.
    IdealExact,
    /// Small-squint approximation with the squint phase `e^{j2πmnν/f_c}`.
    IdealApprox,
    /// Closed-form ideal-pulse delay-Doppler kernel.
    DdClosed,
    /// Rectangular-pulse delay-Doppler kernel.
    Rect,
}

impl CoeffModel {
    pub const ALL: [CoeffModel; 5] = [
        CoeffModel::IgnoreDse,
        CoeffModel::IdealExact,
        CoeffModel::IdealApprox,
        CoeffModel::DdClosed,
        CoeffModel::Rect,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CoeffModel::IgnoreDse => "ignore-dse",
            CoeffModel::IdealExact => "ideal-exact",
            CoeffModel::IdealApprox => "ideal-approx",
            CoeffModel::DdClosed => "dd-closed",
            CoeffModel::Rect => "rect",
        }
    }

    fn wrong(self, reason: &str) -> Error {
        Error::WrongModel {
            model: self.name().into(),
            reason: reason.into(),
        }
    }
}

impl fmt::Display for CoeffModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CoeffModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CoeffModel::ALL
            .into_iter()
            .find(|m| m.name() == s || m.name().replace('-', "_") == s)
            .ok_or_else(|| Error::Config(format!("unknown coefficient model '{s}'")))
    }
}

/// Diagonal TF coefficient of one path under a diagonal model.
pub fn tf_coeff(
    path: &PathParams,
    n: usize,
    m: usize,
    model: CoeffModel,
    params: &OtfsParams,
) -> Result<num_complex::Complex64> {
    match model {
        CoeffModel::IgnoreDse => Ok(tf_coeff_approx(path, n, m, false, params)),
        CoeffModel::IdealExact => Ok(tf_coeff_ideal(path, n, m, params)),
        CoeffModel::IdealApprox => Ok(tf_coeff_approx(path, n, m, true, params)),
        other => Err(other.wrong("not a diagonal time-frequency model")),
    }
}

/// Summed TF channel grid `H[n, m]` of a realization.
///
/// The delay-Doppler closed form is mapped to the TF grid as
/// `sqrt(NM) · ISFFT(h)`. The rectangular model has no diagonal TF
/// representation and is rejected.
pub fn tf_channel_grid(ch: &ChannelRealization, model: CoeffModel) -> Result<TfGrid> {
    let params = ch.params();
    match model {
        CoeffModel::DdClosed => {
            let h = dd_kernel_ideal_grid(ch.paths(), params);
            let mut g = SfftPlan::new(params).isfft(&h)?;
            g.scale((params.grid_size() as f64).sqrt());
            Ok(g)
        }
        CoeffModel::Rect => Err(model.wrong("rectangular pulses act in the delay-Doppler domain")),
        _ => {
            let mut g = TfGrid::zeros(params);
            for path in ch.paths() {
                for n in 0..params.slots() {
                    for (m, z) in g.row_mut(n).iter_mut().enumerate() {
                        *z += tf_coeff(path, n, m, model, params)?;
                    }
                }
            }
            Ok(g)
        }
    }
}

/// Delay-Doppler channel `h[k, l]` of a realization under an ideal-pulse model.
///
/// Diagonal models are mapped through `SFFT(H) / sqrt(NM)`, so that the
/// received DD frame is the 2D circular convolution of `h` with the input.
pub fn dd_channel_grid(ch: &ChannelRealization, model: CoeffModel) -> Result<DdGrid> {
    let params = ch.params();
    match model {
        CoeffModel::DdClosed => Ok(dd_kernel_ideal_grid(ch.paths(), params)),
        CoeffModel::Rect => Err(model.wrong("use the rectangular kernel directly")),
        _ => {
            let h = tf_channel_grid(ch, model)?;
            let mut g = SfftPlan::new(params).sfft(&h)?;
            g.scale(1.0 / (params.grid_size() as f64).sqrt());
            Ok(g)
        }
    }
}

/// `Y[n, m] = H[n, m] X[n, m]` for a diagonal ideal-pulse model.
pub fn apply_ideal_channel(x: &TfGrid, ch: &ChannelRealization, model: CoeffModel) -> Result<TfGrid> {
    match model {
        CoeffModel::IgnoreDse | CoeffModel::IdealExact | CoeffModel::IdealApprox => {}
        other => return Err(other.wrong("only diagonal ideal-pulse models apply in the TF domain")),
    }
    let params = ch.params();
    x.check_shape(params.slots(), params.subcarriers())?;
    let mut y = tf_channel_grid(ch, model)?;
    y.mul_assign(x)?;
    Ok(y)
}

/// Rectangular-pulse channel applied in the DD domain.
///
/// With `truncate = Some(fraction)` only kernel entries above `fraction` of
/// each path's peak are kept.
pub fn apply_rect_channel_dd(x: &DdGrid, ch: &ChannelRealization, truncate: Option<f64>) -> Result<DdGrid> {
    apply_rect_channel_dd_with(x, ch, truncate, IndexSetRule::SquintSigned)
}

/// [`apply_rect_channel_dd`] with an explicit ISI/ICI partition rule.
pub fn apply_rect_channel_dd_with(
    x: &DdGrid,
    ch: &ChannelRealization,
    truncate: Option<f64>,
    rule: IndexSetRule,
) -> Result<DdGrid> {
    let params = ch.params();
    x.check_shape(params.slots(), params.subcarriers())?;
    let mut y = DdGrid::zeros(params);
    for path in ch.paths() {
        let kernel = DdKernelRect::build(&KernelPath::from_path(path), params, rule, truncate)?;
        kernel.apply_into(x, &mut y)?;
    }
    Ok(y)
}
