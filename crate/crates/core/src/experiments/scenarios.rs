use num_complex::Complex64;
use rand::Rng;

use super::config::{RunConfig, Scenario};
use super::table::{ResultRow, ResultTable};
use super::{run_trials, thread_pool, trial_rng, trial_seed, TrialStream};
use crate::channel::{doppler_bounds, draw_channel_rng, ChannelRealization, PathParams};
use crate::error::{Error, Result};
use crate::estimation::{
    build_pilot, nmse, omp_estimate, taps_to_tf_channel, threshold_estimate, unvectorize, vectorize, AtomLayout,
    PilotConfig, StopRule, TfOperator,
};
use crate::grid::{DdGrid, Grid, TfGrid};
use crate::io_analysis::{
    apply_rect_channel_dd, dd_channel_grid, max_squint_phase, tf_channel_grid, validate_constraints, CoeffModel,
    PulseConstraints,
};
use crate::link::{add_noise_rng, bit_errors, lmmse_equalize, NoiseSpec};
use crate::modulation::{demap_symbols, map_bits, Alphabet};
use crate::params::{kmh_to_mps, OtfsParams};
use crate::transform::SfftPlan;

fn expect(cfg: &RunConfig, scenario: Scenario) -> Result<()> {
    if cfg.scenario != scenario {
        return Err(Error::Config(format!(
            "configuration is for {}, not {scenario}",
            cfg.scenario
        )));
    }
    cfg.check()
}

struct Point<'a> {
    cfg: &'a RunConfig,
    sweep_name: &'static str,
    subcarriers: usize,
    speed_kmh: f64,
}

impl Point<'_> {
    fn row(&self, sweep_value: f64, metric: &str, mean: f64, sample_count: u64) -> ResultRow {
        ResultRow {
            sweep_name: self.sweep_name.into(),
            sweep_value,
            subcarriers: self.subcarriers,
            speed_kmh: self.speed_kmh,
            metric: metric.into(),
            mean,
            trial_count: self.cfg.trials,
            sample_count,
            seed_first: trial_seed(self.cfg.base_seed, 0),
            seed_last: trial_seed(self.cfg.base_seed, self.cfg.trials.saturating_sub(1)),
        }
    }

    /// Mean over trials of `values[t][i]`.
    fn mean_row(&self, sweep_value: f64, metric: &str, values: &[Vec<f64>], i: usize) -> ResultRow {
        let sum: f64 = values.iter().map(|v| v[i]).sum();
        self.row(sweep_value, metric, sum / values.len() as f64, values.len() as u64)
    }

    /// Pooled error rate `Σ errors / Σ bits` over trials.
    fn rate_row(
        &self,
        sweep_value: f64,
        metric: &str,
        errors: &[Vec<u64>],
        i: usize,
        bits_per_trial: u64,
    ) -> ResultRow {
        let total: u64 = errors.iter().map(|e| e[i]).sum();
        let bits = bits_per_trial * errors.len() as u64;
        self.row(sweep_value, metric, total as f64 / bits as f64, bits)
    }
}

fn speed_mps(speed_kmh: f64) -> f64 {
    kmh_to_mps(speed_kmh)
}

/// Summary of the squint magnitude and the pulse-constraint check per `(M, v)`.
pub fn run_analyze(cfg: &RunConfig) -> Result<ResultTable> {
    expect(cfg, Scenario::Analyze)?;
    let mut table = ResultTable::new(cfg.clone());
    for &m in &cfg.subcarriers {
        for &v in &cfg.speeds_kmh {
            let params = cfg.params(m, v)?;
            let bounds = doppler_bounds(speed_mps(v), &params);
            let probe = PathParams::new(
                Complex64::new(1.0, 0.0),
                params.max_delay_index() as f64,
                -bounds.max_doppler_index,
                &params,
            )?;
            let ch = ChannelRealization::new(vec![probe], params, None)?;
            let report = validate_constraints(&params, &PulseConstraints::midpoint(&params), &ch);
            let point = Point {
                cfg,
                sweep_name: "subcarriers",
                subcarriers: m,
                speed_kmh: v,
            };
            let phase = max_squint_phase(&params, bounds.max_doppler_hz) / std::f64::consts::PI;
            let x = m as f64;
            table
                .rows
                .push(point.row(x, "max_doppler_hz", bounds.max_doppler_hz, 1));
            table
                .rows
                .push(point.row(x, "max_doppler_index", bounds.max_doppler_index, 1));
            table.rows.push(point.row(x, "max_squint_phase_over_pi", phase, 1));
            table
                .rows
                .push(point.row(x, "constraints_pass", f64::from(u8::from(report.passed())), 1));
        }
    }
    Ok(table)
}

/// Coefficient grid of the first trial's channel at the first `(M, v)`
/// point: the TF grid for diagonal models, the DD kernel for `dd-closed`
/// and the DD response to a unit pilot at `(0, 0)` for `rect`.
pub fn analyze_grid(cfg: &RunConfig) -> Result<Grid> {
    let (m, v) = (cfg.subcarriers[0], cfg.speeds_kmh[0]);
    let params = cfg.params(m, v)?;
    let mut rng = trial_rng(trial_seed(cfg.base_seed, 0), TrialStream::Channel);
    let ch = draw_channel_rng(&params, cfg.num_paths, speed_mps(v), cfg.doppler, &mut rng)?;
    Ok(match cfg.model {
        CoeffModel::DdClosed => dd_channel_grid(&ch, cfg.model)?.into_grid(),
        CoeffModel::Rect => {
            let mut pilot = DdGrid::zeros(&params);
            pilot[(0, 0)] = Complex64::new(1.0, 0.0);
            apply_rect_channel_dd(&pilot, &ch, None)?.into_grid()
        }
        model => tf_channel_grid(&ch, model)?.into_grid(),
    })
}

/// NMSE of DD channel models against the SFFT of the exact TF grid.
pub fn run_sig_nmse(cfg: &RunConfig) -> Result<ResultTable> {
    expect(cfg, Scenario::SigNmse)?;
    let pool = thread_pool(cfg)?;
    let models = [
        ("nmse_ignore_dse", CoeffModel::IgnoreDse),
        ("nmse_dd_closed", CoeffModel::DdClosed),
        ("nmse_ideal_approx", CoeffModel::IdealApprox),
    ];
    let mut table = ResultTable::new(cfg.clone());
    for &m in &cfg.subcarriers {
        for &v in &cfg.speeds_kmh {
            let params = cfg.params(m, v)?;
            let values = run_trials(&pool, cfg, |seed| {
                let mut rng = trial_rng(seed, TrialStream::Channel);
                let ch = draw_channel_rng(&params, cfg.num_paths, speed_mps(v), cfg.doppler, &mut rng)?;
                let truth = dd_channel_grid(&ch, CoeffModel::IdealExact)?;
                models
                    .iter()
                    .map(|&(_, model)| nmse(truth.as_slice(), dd_channel_grid(&ch, model)?.as_slice()))
                    .collect::<Result<Vec<f64>>>()
            })?;
            let point = Point {
                cfg,
                sweep_name: "subcarriers",
                subcarriers: m,
                speed_kmh: v,
            };
            for (i, (name, _)) in models.iter().enumerate() {
                table.rows.push(point.mean_row(m as f64, name, &values, i));
            }
        }
    }
    Ok(table)
}

fn random_bits<R: Rng>(rng: &mut R, len: usize) -> Vec<u8> {
    (0..len).map(|_| u8::from(rng.random::<bool>())).collect()
}

/// Transmitted data frame: bits and their TF symbols.
struct DataFrame {
    bits: Vec<u8>,
    tf: TfGrid,
}

fn data_frames<R: Rng>(rng: &mut R, cfg: &RunConfig, plan: &SfftPlan, params: &OtfsParams) -> Result<Vec<DataFrame>> {
    let len = params.grid_size() * cfg.alphabet.bits_per_symbol();
    (0..cfg.frames_per_realization)
        .map(|_| {
            let bits = random_bits(rng, len);
            let tf = plan.isfft(&map_bits(&bits, cfg.alphabet, params)?)?;
            Ok(DataFrame { bits, tf })
        })
        .collect()
}

/// Bit errors of LMMSE detection with CSI `h_hat`.
fn detect_errors(
    y: &TfGrid,
    h_hat: &TfGrid,
    noise: &NoiseSpec,
    plan: &SfftPlan,
    alphabet: Alphabet,
    bits: &[u8],
) -> Result<u64> {
    let x_hat = plan.sfft(&lmmse_equalize(y, h_hat, noise, 1.0)?)?;
    Ok(bit_errors(&demap_symbols(&x_hat, alphabet), bits)? as u64)
}

/// Error counts per Eb/N0 point and CSI, for frames sent through `h`.
fn ber_sweep<R: Rng>(
    cfg: &RunConfig,
    plan: &SfftPlan,
    frames: &[DataFrame],
    h: &TfGrid,
    csi: &[&TfGrid],
    noise_rng: &mut R,
) -> Result<Vec<Vec<u64>>> {
    let bps = cfg.alphabet.bits_per_symbol();
    cfg.ebn0_db
        .iter()
        .map(|&ebn0| {
            let noise = NoiseSpec::from_ebn0(ebn0, 1.0, bps)?;
            let mut errors = vec![0u64; csi.len()];
            for frame in frames {
                let mut y = frame.tf.clone();
                y.mul_assign(h)?;
                let y = add_noise_rng(&y, &noise, noise_rng);
                for (e, h_hat) in errors.iter_mut().zip(csi) {
                    *e += detect_errors(&y, h_hat, &noise, plan, cfg.alphabet, &frame.bits)?;
                }
            }
            Ok(errors)
        })
        .collect()
}

/// Pushes one pooled BER row per Eb/N0 point and CSI.
fn push_ber_rows(
    table: &mut ResultTable,
    point: &Point,
    names: &[&str],
    outcomes: &[Vec<Vec<u64>>],
    bits_per_trial: u64,
) {
    for (e, &ebn0) in point.cfg.ebn0_db.iter().enumerate() {
        let per_trial: Vec<Vec<u64>> = outcomes.iter().map(|o| o[e].clone()).collect();
        for (i, name) in names.iter().enumerate() {
            table
                .rows
                .push(point.rate_row(ebn0, name, &per_trial, i, bits_per_trial));
        }
    }
}

/// BER with perfect path parameters and exact, squint-free or approximate CSI.
pub fn run_sig_ber(cfg: &RunConfig) -> Result<ResultTable> {
    expect(cfg, Scenario::SigBer)?;
    let pool = thread_pool(cfg)?;
    let names = ["ber_exact_csi", "ber_ignore_dse_csi", "ber_approx_csi"];
    let mut table = ResultTable::new(cfg.clone());
    for &m in &cfg.subcarriers {
        for &v in &cfg.speeds_kmh {
            let params = cfg.params(m, v)?;
            let plan = SfftPlan::new(&params);
            let bits_per_trial =
                (params.grid_size() * cfg.alphabet.bits_per_symbol() * cfg.frames_per_realization) as u64;
            let outcomes = run_trials(&pool, cfg, |seed| {
                let mut rng = trial_rng(seed, TrialStream::Channel);
                let ch = draw_channel_rng(&params, cfg.num_paths, speed_mps(v), cfg.doppler, &mut rng)?;
                let h = tf_channel_grid(&ch, CoeffModel::IdealExact)?;
                let h_ign = tf_channel_grid(&ch, CoeffModel::IgnoreDse)?;
                let h_apx = tf_channel_grid(&ch, CoeffModel::IdealApprox)?;
                let frames = data_frames(&mut trial_rng(seed, TrialStream::Bits), cfg, &plan, &params)?;
                let mut noise_rng = trial_rng(seed, TrialStream::Noise);
                ber_sweep(cfg, &plan, &frames, &h, &[&h, &h_ign, &h_apx], &mut noise_rng)
            })?;
            let point = Point {
                cfg,
                sweep_name: "ebn0_db",
                subcarriers: m,
                speed_kmh: v,
            };
            push_ber_rows(&mut table, &point, &names, &outcomes, bits_per_trial);
        }
    }
    Ok(table)
}

/// Pilot-frame estimates of one realization.
struct PilotEstimates {
    truth: TfGrid,
    omp: TfGrid,
    threshold: TfGrid,
}

/// Sends the impulse pilot through `ch` with unit noise variance and
/// estimates the TF channel by OMP and by the `3σ` threshold rule.
fn estimate_from_pilot<R: Rng>(
    ch: &ChannelRealization,
    model: CoeffModel,
    layout: AtomLayout,
    num_paths: usize,
    snr_p_db: f64,
    plan: &SfftPlan,
    noise_rng: &mut R,
) -> Result<PilotEstimates> {
    let params = ch.params();
    let noise = NoiseSpec::new(1.0)?;
    let pc = PilotConfig::from_snr(snr_p_db, &noise);
    let truth = tf_channel_grid(ch, model)?;
    let mut y = plan.isfft(&build_pilot(&pc, params))?;
    y.mul_assign(&truth)?;
    let y = add_noise_rng(&y, &noise, noise_rng);

    let dict = TfOperator::new(params, layout, pc.amplitude);
    let scale = dict.scale();
    let y_vec: Vec<Complex64> = vectorize(&y).into_iter().map(|z| z / scale).collect();
    let est = omp_estimate(&y_vec, &dict, StopRule::iterations(num_paths))?;
    let omp = TfGrid::from_grid(params, unvectorize(&est.h_hat, params.slots(), params.subcarriers())?)?;

    let taps = threshold_estimate(&plan.sfft(&y)?, noise.sigma(), &pc);
    let threshold = taps_to_tf_channel(&taps, params)?;
    Ok(PilotEstimates { truth, omp, threshold })
}

fn estimation_layout(cfg: &RunConfig, params: &OtfsParams, speed_kmh: f64) -> Result<AtomLayout> {
    let k = doppler_bounds(speed_mps(speed_kmh), params).max_doppler_index;
    AtomLayout::new(k.ceil() as usize, cfg.l_max, params)
}

/// NMSE of both estimators at one `(M, v)` point for every pilot SNR.
fn estimation_nmse(cfg: &RunConfig, pool: &rayon::ThreadPool, m: usize, v: f64) -> Result<Vec<Vec<f64>>> {
    let params = cfg.params(m, v)?;
    let plan = SfftPlan::new(&params);
    let layout = estimation_layout(cfg, &params, v)?;
    run_trials(pool, cfg, |seed| {
        let mut rng = trial_rng(seed, TrialStream::Channel);
        let ch = draw_channel_rng(&params, cfg.num_paths, speed_mps(v), cfg.doppler, &mut rng)?;
        let mut noise_rng = trial_rng(seed, TrialStream::Noise);
        let mut out = Vec::with_capacity(2 * cfg.snr_p_db.len());
        for &snr in &cfg.snr_p_db {
            let est = estimate_from_pilot(&ch, cfg.model, layout, cfg.num_paths, snr, &plan, &mut noise_rng)?;
            out.push(nmse(est.truth.as_slice(), est.omp.as_slice())?);
            out.push(nmse(est.truth.as_slice(), est.threshold.as_slice())?);
        }
        Ok(out)
    })
}

/// Estimation NMSE against pilot SNR.
pub fn run_est_nmse_snr(cfg: &RunConfig) -> Result<ResultTable> {
    expect(cfg, Scenario::EstNmseSnr)?;
    let pool = thread_pool(cfg)?;
    let mut table = ResultTable::new(cfg.clone());
    for &m in &cfg.subcarriers {
        for &v in &cfg.speeds_kmh {
            let values = estimation_nmse(cfg, &pool, m, v)?;
            let point = Point {
                cfg,
                sweep_name: "snr_p_db",
                subcarriers: m,
                speed_kmh: v,
            };
            for (s, &snr) in cfg.snr_p_db.iter().enumerate() {
                table.rows.push(point.mean_row(snr, "nmse_omp", &values, 2 * s));
                table
                    .rows
                    .push(point.mean_row(snr, "nmse_threshold", &values, 2 * s + 1));
            }
        }
    }
    Ok(table)
}

/// Estimation NMSE against the number of subcarriers at the first pilot SNR.
pub fn run_est_nmse_m(cfg: &RunConfig) -> Result<ResultTable> {
    expect(cfg, Scenario::EstNmseM)?;
    let pool = thread_pool(cfg)?;
    let mut single = cfg.clone();
    single.snr_p_db.truncate(1);
    let mut table = ResultTable::new(cfg.clone());
    for &m in &cfg.subcarriers {
        for &v in &cfg.speeds_kmh {
            let values = estimation_nmse(&single, &pool, m, v)?;
            let point = Point {
                cfg,
                sweep_name: "subcarriers",
                subcarriers: m,
                speed_kmh: v,
            };
            table.rows.push(point.mean_row(m as f64, "nmse_omp", &values, 0));
            table.rows.push(point.mean_row(m as f64, "nmse_threshold", &values, 1));
        }
    }
    Ok(table)
}

/// BER with perfect, OMP and threshold CSI from one pilot frame per
/// realization, at the first pilot SNR.
pub fn run_est_ber(cfg: &RunConfig) -> Result<ResultTable> {
    expect(cfg, Scenario::EstBer)?;
    let pool = thread_pool(cfg)?;
    let names = ["ber_perfect_csi", "ber_omp_csi", "ber_threshold_csi"];
    let snr = cfg.snr_p_db[0];
    let mut table = ResultTable::new(cfg.clone());
    for &m in &cfg.subcarriers {
        for &v in &cfg.speeds_kmh {
            let params = cfg.params(m, v)?;
            let plan = SfftPlan::new(&params);
            let layout = estimation_layout(cfg, &params, v)?;
            let bits_per_trial =
                (params.grid_size() * cfg.alphabet.bits_per_symbol() * cfg.frames_per_realization) as u64;
            let outcomes = run_trials(&pool, cfg, |seed| {
                let mut rng = trial_rng(seed, TrialStream::Channel);
                let ch = draw_channel_rng(&params, cfg.num_paths, speed_mps(v), cfg.doppler, &mut rng)?;
                let mut noise_rng = trial_rng(seed, TrialStream::Noise);
                let est = estimate_from_pilot(&ch, cfg.model, layout, cfg.num_paths, snr, &plan, &mut noise_rng)?;
                let frames = data_frames(&mut trial_rng(seed, TrialStream::Bits), cfg, &plan, &params)?;
                ber_sweep(
                    cfg,
                    &plan,
                    &frames,
                    &est.truth,
                    &[&est.truth, &est.omp, &est.threshold],
                    &mut noise_rng,
                )
            })?;
            let point = Point {
                cfg,
                sweep_name: "ebn0_db",
                subcarriers: m,
                speed_kmh: v,
            };
            push_ber_rows(&mut table, &point, &names, &outcomes, bits_per_trial);
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::ExperimentConfig;

    fn small(scenario: Scenario, extra: &str) -> RunConfig {
        let text = format!("num_subcarriers = 32\nnum_slots = 16\nl_max = 6\nnum_paths = 3\ntrials = 3\n{extra}");
        ExperimentConfig::from_toml(&text).unwrap().resolve(scenario).unwrap()
    }

    #[test]
    fn analyze_reports_squint_phase() {
        let mut cfg = small(Scenario::Analyze, "speeds_kmh = [0.0, 500.0]");
        cfg.subcarriers = vec![2048];
        cfg.num_slots = 128;
        cfg.l_max = 20;
        let t = run_analyze(&cfg).unwrap();
        let phase = t.value("max_squint_phase_over_pi", 2048, 2048.0, 500.0).unwrap();
        assert!((phase - 0.24).abs() < 0.01, "{phase}");
        assert_eq!(t.value("max_squint_phase_over_pi", 2048, 2048.0, 0.0).unwrap(), 0.0);
        assert_eq!(t.value("constraints_pass", 2048, 2048.0, 500.0).unwrap(), 1.0);
        let g = analyze_grid(&cfg).unwrap();
        assert_eq!((g.rows(), g.cols()), (128, 2048));
    }

    #[test]
    fn sig_nmse_static_user_is_exact() {
        let cfg = small(Scenario::SigNmse, "speeds_kmh = [0.0, 500.0]");
        let t = run_sig_nmse(&cfg).unwrap();
        assert_eq!(t.rows.len(), 6);
        assert!(t.value("nmse_ignore_dse", 32, 32.0, 0.0).unwrap() < 1e-20);
        assert!(t.value("nmse_dd_closed", 32, 32.0, 0.0).unwrap() < 1e-20);
        let ign = t.value("nmse_ignore_dse", 32, 32.0, 500.0).unwrap();
        assert!(ign > 0.0 && t.value("nmse_dd_closed", 32, 32.0, 500.0).unwrap() < 0.1 * ign);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut cfg = small(
            Scenario::EstBer,
            "alphabet = \"qpsk\"\nebn0_db = [10.0, 20.0]\nspeeds_kmh = [500.0]",
        );
        cfg.workers = Some(1);
        let a = run_est_ber(&cfg).unwrap();
        cfg.workers = Some(3);
        let b = run_est_ber(&cfg).unwrap();
        assert_eq!(a.to_csv_string().unwrap(), b.to_csv_string().unwrap());
        let row = a.find("ber_perfect_csi", 32, 20.0, 500.0).unwrap();
        assert_eq!(row.sample_count, 3 * 32 * 16 * 2);
        assert_eq!(row.seed_last, cfg.base_seed ^ 2);
    }

    #[test]
    fn omp_estimate_beats_threshold_at_high_snr() {
        let cfg = small(Scenario::EstNmseSnr, "snr_p_db = [45.0]\nspeeds_kmh = [500.0]");
        let t = run_est_nmse_snr(&cfg).unwrap();
        let omp = t.value("nmse_omp", 32, 45.0, 500.0).unwrap();
        let thr = t.value("nmse_threshold", 32, 45.0, 500.0).unwrap();
        assert!(omp < thr, "{omp} {thr}");
    }

    #[test]
    fn scenario_mismatch_is_rejected() {
        let cfg = small(Scenario::SigBer, "");
        assert!(matches!(run_sig_nmse(&cfg), Err(Error::Config(_))));
    }
}
