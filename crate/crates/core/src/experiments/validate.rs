//! Cross-model oracle suite.
//!
//! Each check compares two independent computations of the same channel
//! quantity on a small grid and reports the measured error against a fixed
//! tolerance.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;

use super::config::{RunConfig, Scenario};
use super::table::{ResultRow, ResultTable};
use super::{run_trials, thread_pool, trial_rng, trial_seed, TrialStream};
use crate::channel::{doppler_bounds, draw_channel_rng, ChannelRealization, DopplerDraw, PathParams};
use crate::error::{Error, Result};
use crate::estimation::{
    build_pilot, build_sensing_dd, build_sensing_tf, omp_estimate, vectorize, AtomLayout, PilotConfig, StopRule,
};
use crate::grid::{DdGrid, Grid};
use crate::io_analysis::{
    apply_rect_channel_dd_with, dd_channel_grid, dd_kernel_ideal_grid, kernel_ideal_grid, tf_coeff_ideal,
    tf_exact_diagonal_column, CoeffModel, DdKernelRect, IndexSetRule, KernelPath, PulseConstraints,
};
use crate::link::NoiseSpec;
use crate::params::{kmh_to_mps, OtfsParams};
use crate::transform::SfftPlan;
use crate::waveform::reference_frame;

/// Relative tolerance of the exact-quadrature check.
pub const EXACT_TOL: f64 = 1e-2;
/// Relative tolerance of the closed-form DD kernel against the SFFT of the TF grid.
pub const KERNEL_TOL: f64 = 5e-2;
/// Relative tolerance of the rectangular kernel against the waveform chain.
pub const WAVEFORM_TOL: f64 = 5e-2;
/// Gain tolerance of the TF/DD OMP equivalence.
pub const OMP_GAIN_TOL: f64 = 1e-8;
/// Relative tolerance of the large-squint-ratio limit.
pub const LIMIT_TOL: f64 = 1e-9;

/// Outcome of one oracle comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationCheck {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Control checks pass when the comparison fails.
    pub expect_failure: bool,
}

impl ValidationCheck {
    fn below(name: &str, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance,
            passed: measured < tolerance,
            expect_failure: false,
        }
    }

    fn above(name: &str, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance,
            passed: measured >= tolerance,
            expect_failure: true,
        }
    }
}

impl fmt::Display for ValidationCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let op = if self.expect_failure { ">=" } else { "<" };
        write!(
            f,
            "{verdict} {}: {:.3e} (need {op} {:.1e})",
            self.name, self.measured, self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub checks: Vec<ValidationCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&ValidationCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// One error row and one pass flag per check.
    pub fn to_table(&self, cfg: &RunConfig) -> ResultTable {
        let mut table = ResultTable::new(cfg.clone());
        for c in &self.checks {
            let row = |metric: String, mean: f64| ResultRow {
                sweep_name: "tolerance".into(),
                sweep_value: c.tolerance,
                subcarriers: 0,
                speed_kmh: 0.0,
                metric,
                mean,
                trial_count: cfg.trials,
                sample_count: cfg.trials as u64,
                seed_first: trial_seed(cfg.base_seed, 0),
                seed_last: trial_seed(cfg.base_seed, cfg.trials.saturating_sub(1)),
            };
            table.rows.push(row(format!("{}_error", c.name), c.measured));
            table
                .rows
                .push(row(format!("{}_pass", c.name), f64::from(u8::from(c.passed))));
        }
        table
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

pub fn run_validate(cfg: &RunConfig) -> Result<ResultTable> {
    Ok(run_validate_report(cfg)?.to_table(cfg))
}

/// Runs every oracle check.
pub fn run_validate_report(cfg: &RunConfig) -> Result<ValidationReport> {
    if cfg.scenario != Scenario::Validate {
        return Err(Error::Config(format!(
            "configuration is for {}, not validate",
            cfg.scenario
        )));
    }
    cfg.check()?;
    let mut checks = vec![ValidationCheck::below(
        "exact_vs_closed_form",
        exact_vs_closed_form(cfg.exact_subcarriers)?,
        EXACT_TOL,
    )];
    checks.push(ValidationCheck::below(
        "kernel_vs_sfft",
        kernel_vs_sfft(cfg)?,
        KERNEL_TOL,
    ));
    let waveform = waveform_checks(cfg.osf)?;
    checks.push(ValidationCheck::below("rect_vs_waveform", waveform.rect, WAVEFORM_TOL));
    checks.push(ValidationCheck::below(
        "rect_vs_waveform_sample_aligned",
        waveform.aligned,
        WAVEFORM_TOL,
    ));
    checks.push(ValidationCheck::above(
        "rect_vs_waveform_sign_flip",
        waveform.flipped,
        WAVEFORM_TOL,
    ));
    let omp = omp_equivalence(cfg)?;
    checks.push(ValidationCheck::below(
        "omp_support_mismatches",
        omp.mismatches as f64,
        0.5,
    ));
    checks.push(ValidationCheck::below(
        "omp_gain_difference",
        omp.gain_difference,
        OMP_GAIN_TOL,
    ));
    let limit = large_squint_limit()?;
    checks.push(ValidationCheck::below("large_squint_limit", limit.classical, LIMIT_TOL));
    checks.push(ValidationCheck::below(
        "large_squint_limit_rect_receding",
        limit.rect_receding,
        LIMIT_TOL,
    ));
    Ok(ValidationReport { checks })
}

fn oracle_params(m: usize, n: usize, l_max: usize, k_max: f64) -> Result<OtfsParams> {
    OtfsParams::new(m, n, 15e3, 4e9, l_max, k_max)
}

fn relative(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

/// Largest relative error of the quadrature coefficients against the closed
/// form on a 16 × 8 grid, over the first `subcarriers` columns.
pub fn exact_vs_closed_form(subcarriers: Option<usize>) -> Result<f64> {
    let params = oracle_params(16, 8, 4, 1.2)?;
    let pc = PulseConstraints::midpoint(&params);
    let paths = [
        PathParams::new(Complex64::new(0.8, 0.3), 3.0, 1.0, &params)?,
        PathParams::new(Complex64::new(-0.2, 0.5), 2.0, -1.0, &params)?,
    ];
    let columns = subcarriers.unwrap_or(params.subcarriers()).min(params.subcarriers());
    let mut worst: f64 = 0.0;
    for path in &paths {
        for m in 0..columns {
            let exact = tf_exact_diagonal_column(path, m, &pc, &params, 1e-8)?;
            for (n, h) in exact.iter().enumerate() {
                let closed = tf_coeff_ideal(path, n, m, &params);
                worst = worst.max((h - closed).norm() / closed.norm());
            }
        }
    }
    Ok(worst)
}

/// Largest Frobenius-relative error of the closed-form DD kernel against the
/// SFFT of the approximate TF grid, at `M = 64`, `N = 32`, `v = 500 km/h`.
pub fn kernel_vs_sfft(cfg: &RunConfig) -> Result<f64> {
    let probe = oracle_params(64, 32, 8, 1.5)?;
    let k = doppler_bounds(kmh_to_mps(500.0), &probe).max_doppler_index;
    let params = oracle_params(64, 32, 8, k)?;
    let trials = cfg.trials.min(20);
    let mut worst: f64 = 0.0;
    for t in 0..trials {
        let mut rng = trial_rng(trial_seed(cfg.base_seed, t), TrialStream::Channel);
        let ch = draw_channel_rng(&params, 4, kmh_to_mps(500.0), DopplerDraw::Continuous, &mut rng)?;
        let closed = dd_kernel_ideal_grid(ch.paths(), &params);
        let sampled = dd_channel_grid(&ch, CoeffModel::IdealApprox)?;
        worst = worst.max(closed.relative_error(&sampled)?);
    }
    Ok(worst)
}

struct WaveformErrors {
    rect: f64,
    aligned: f64,
    flipped: f64,
}

fn random_qpsk(params: &OtfsParams, seed: u64) -> DdGrid {
    let mut rng = trial_rng(seed, TrialStream::Bits);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DdGrid::from_fn(params, |_, _| {
        Complex64::new(
            if rng.random::<bool>() { s } else { -s },
            if rng.random::<bool>() { s } else { -s },
        )
    })
}

/// Relative error over TF rows `n ≥ 1` of the DD model mapped to TF.
fn interior_error(model_dd: &DdGrid, oracle_tf: &Grid, plan: &SfftPlan) -> Result<f64> {
    let model = plan.isfft(model_dd)?;
    let cols = model.cols();
    Ok(relative(&oracle_tf.as_slice()[cols..], &model.as_slice()[cols..]))
}

fn waveform_channel(params: &OtfsParams, sign: f64) -> Result<ChannelRealization> {
    let taps = [
        (Complex64::new(0.8, 0.1), 1.0, 1.0),
        (Complex64::new(0.1, -0.5), 3.0, -2.0),
        (Complex64::new(-0.3, 0.2), 5.0, 2.0),
    ];
    let paths = taps
        .iter()
        .map(|&(g, l, k)| PathParams::new(g, l, sign * k, params))
        .collect::<Result<Vec<_>>>()?;
    ChannelRealization::new(paths, *params, None)
}

/// Rectangular kernel against the sampled waveform chain at `M = 32`, `N = 16`.
///
/// Also runs the chain at one sample per delay bin against the
/// sample-aligned kernel, and the same comparison with the model's Doppler
/// signs flipped, which must fail.
fn waveform_checks(osf: usize) -> Result<WaveformErrors> {
    let params = oracle_params(32, 16, 6, 2.5)?;
    let plan = SfftPlan::new(&params);
    let x = random_qpsk(&params, 0x0f75);
    let ch = waveform_channel(&params, 1.0)?;
    let flipped = waveform_channel(&params, -1.0)?;

    let oracle = reference_frame(&x, &ch, osf)?;
    let model = apply_rect_channel_dd_with(&x, &ch, None, IndexSetRule::SquintSigned)?;
    let rect = interior_error(&model, &oracle, &plan)?;

    let oracle_1 = reference_frame(&x, &ch, 1)?;
    let aligned_model = apply_rect_channel_dd_with(&x, &ch, None, IndexSetRule::SampleAligned)?;
    let aligned = interior_error(&aligned_model, &oracle_1, &plan)?;
    let flipped_model = apply_rect_channel_dd_with(&x, &flipped, None, IndexSetRule::SampleAligned)?;
    let flipped = interior_error(&flipped_model, &oracle_1, &plan)?;
    Ok(WaveformErrors { rect, aligned, flipped })
}

struct OmpEquivalence {
    mismatches: usize,
    gain_difference: f64,
}

/// OMP on the TF dictionary and on its SFFT image over noiseless pilot
/// frames at `M = 32`, `N = 16`, `v = 500 km/h`.
fn omp_equivalence(cfg: &RunConfig) -> Result<OmpEquivalence> {
    let probe = oracle_params(32, 16, 6, 1.5)?;
    let k = doppler_bounds(kmh_to_mps(500.0), &probe).max_doppler_index;
    let params = oracle_params(32, 16, 6, k)?;
    let layout = AtomLayout::new(k.ceil() as usize, 6, &params)?;
    let pc = PilotConfig::from_snr(30.0, &NoiseSpec::new(1.0)?);
    let phi_tf = build_sensing_tf(&params, layout, pc.amplitude);
    let phi_dd = build_sensing_dd(&params, layout, pc.amplitude, CoeffModel::IdealApprox)?;
    let plan = SfftPlan::new(&params);
    let pilot_tf = plan.isfft(&build_pilot(&pc, &params))?;
    let pool = thread_pool(cfg)?;
    let outcomes = run_trials(&pool, cfg, |seed| {
        let mut rng = trial_rng(seed, TrialStream::Channel);
        let ch = draw_channel_rng(
            &params,
            cfg.num_paths.min(6),
            kmh_to_mps(500.0),
            DopplerDraw::Grid,
            &mut rng,
        )?;
        let mut y_tf = crate::io_analysis::tf_channel_grid(&ch, CoeffModel::IdealApprox)?;
        y_tf.mul_assign(&pilot_tf)?;
        let y_dd = plan.sfft(&y_tf)?;
        let scaled = |v: Vec<Complex64>, s: Complex64| v.into_iter().map(|z| z / s).collect::<Vec<_>>();
        let stop = StopRule::iterations(ch.paths().len());
        let a = omp_estimate(&scaled(vectorize(&y_tf), phi_tf.scale()), &phi_tf, stop)?;
        let b = omp_estimate(&scaled(vectorize(&y_dd), phi_dd.scale()), &phi_dd, stop)?;
        let same = a.support == b.support;
        let diff = if same {
            a.beta_hat
                .iter()
                .zip(&b.beta_hat)
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        Ok((same, diff))
    })?;
    Ok(OmpEquivalence {
        mismatches: outcomes.iter().filter(|o| !o.0).count(),
        gain_difference: outcomes.iter().map(|o| o.1).fold(0.0, f64::max),
    })
}

/// Squint-aware kernels at `|p| = 10^15` against their squint-free forms.
pub struct LimitErrors {
    /// Ideal kernel for both signs and the rectangular kernel for `p < 0`.
    pub classical: f64,
    /// Rectangular kernel for `p > 0`, whose ISI set is one bin shorter
    /// than the static set.
    pub rect_receding: f64,
}

pub fn large_squint_limit() -> Result<LimitErrors> {
    let params = oracle_params(32, 16, 6, 2.5)?;
    let x = random_qpsk(&params, 0x11);
    let mut classical: f64 = 0.0;
    let mut rect_receding = 0.0;
    for sign in [1.0, -1.0] {
        let mut g = KernelPath::atom(sign * 1.3, 3.0, &params);
        g.gain_prime = Complex64::new(0.6, -0.8);
        g.inverse_squint = sign * 1e-15;
        let a = kernel_ideal_grid(&g, &params);
        let b = kernel_ideal_grid(&g.without_squint(), &params);
        classical = classical.max(a.relative_error(&b)?);

        let mut ya = DdGrid::zeros(&params);
        let mut yb = DdGrid::zeros(&params);
        DdKernelRect::build(&g, &params, IndexSetRule::SquintSigned, None)?.apply_into(&x, &mut ya)?;
        DdKernelRect::build(&g.without_squint(), &params, IndexSetRule::SquintSigned, None)?.apply_into(&x, &mut yb)?;
        let err = ya.relative_error(&yb)?;
        if sign > 0.0 {
            rect_receding = err;
        } else {
            classical = classical.max(err);
        }
    }
    Ok(LimitErrors {
        classical,
        rect_receding,
    })
}
