use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{doppler_bounds, DopplerDraw};
use crate::error::{Error, Result};
use crate::io_analysis::CoeffModel;
use crate::modulation::Alphabet;
use crate::params::{kmh_to_mps, OtfsParams};

/// Experiment selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Analyze,
    SigNmse,
    SigBer,
    EstNmseSnr,
    EstNmseM,
    EstBer,
    Validate,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::Analyze,
        Scenario::SigNmse,
        Scenario::SigBer,
        Scenario::EstNmseSnr,
        Scenario::EstNmseM,
        Scenario::EstBer,
        Scenario::Validate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Analyze => "analyze",
            Scenario::SigNmse => "sig-nmse",
            Scenario::SigBer => "sig-ber",
            Scenario::EstNmseSnr => "est-nmse-snr",
            Scenario::EstNmseM => "est-nmse-m",
            Scenario::EstBer => "est-ber",
            Scenario::Validate => "validate",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario '{s}'")))
    }
}

/// Configuration file contents. Every field is optional and overrides the
/// scenario default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub carrier_frequency_hz: Option<f64>,
    pub subcarrier_spacing_hz: Option<f64>,
    pub num_subcarriers: Option<usize>,
    /// Subcarrier counts for the scenarios that sweep `M`.
    pub subcarrier_sweep: Option<Vec<usize>>,
    pub num_slots: Option<usize>,
    pub speeds_kmh: Option<Vec<f64>>,
    pub alphabet: Option<Alphabet>,
    pub l_max: Option<usize>,
    pub num_paths: Option<usize>,
    pub snr_p_db: Option<Vec<f64>>,
    pub ebn0_db: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub base_seed: Option<u64>,
    /// Generator of the true channel in the estimation scenarios.
    pub model: Option<CoeffModel>,
    pub frames_per_realization: Option<usize>,
    pub workers: Option<usize>,
    /// Oversampling factor of the waveform reference in `validate`.
    pub osf: Option<usize>,
    /// Number of subcarriers integrated by quadrature in `validate`.
    pub exact_subcarriers: Option<usize>,
    /// Doppler law of drawn channels.
    pub doppler: Option<DopplerDraw>,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Applies scenario defaults and checks the result.
    pub fn resolve(&self, scenario: Scenario) -> Result<RunConfig> {
        let d = RunConfig::defaults(scenario);
        let subcarriers = match (&self.subcarrier_sweep, self.num_subcarriers) {
            (Some(sweep), _) => sweep.clone(),
            (None, Some(m)) => vec![m],
            (None, None) => d.subcarriers,
        };
        let cfg = RunConfig {
            scenario,
            carrier_frequency_hz: self.carrier_frequency_hz.unwrap_or(d.carrier_frequency_hz),
            subcarrier_spacing_hz: self.subcarrier_spacing_hz.unwrap_or(d.subcarrier_spacing_hz),
            subcarriers,
            num_slots: self.num_slots.unwrap_or(d.num_slots),
            speeds_kmh: self.speeds_kmh.clone().unwrap_or(d.speeds_kmh),
            alphabet: self.alphabet.unwrap_or(d.alphabet),
            l_max: self.l_max.unwrap_or(d.l_max),
            num_paths: self.num_paths.unwrap_or(d.num_paths),
            snr_p_db: self.snr_p_db.clone().unwrap_or(d.snr_p_db),
            ebn0_db: self.ebn0_db.clone().unwrap_or(d.ebn0_db),
            trials: self.trials.unwrap_or(d.trials),
            base_seed: self.base_seed.unwrap_or(d.base_seed),
            model: self.model.unwrap_or(d.model),
            frames_per_realization: self.frames_per_realization.unwrap_or(d.frames_per_realization),
            workers: self.workers.or(d.workers),
            osf: self.osf.unwrap_or(d.osf),
            exact_subcarriers: self.exact_subcarriers.or(d.exact_subcarriers),
            doppler: self.doppler.unwrap_or(d.doppler),
        };
        cfg.check()?;
        Ok(cfg)
    }
}

/// Fully resolved run configuration; echoed into the metadata sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub carrier_frequency_hz: f64,
    pub subcarrier_spacing_hz: f64,
    pub subcarriers: Vec<usize>,
    pub num_slots: usize,
    pub speeds_kmh: Vec<f64>,
    pub alphabet: Alphabet,
    pub l_max: usize,
    pub num_paths: usize,
    pub snr_p_db: Vec<f64>,
    pub ebn0_db: Vec<f64>,
    pub trials: usize,
    pub base_seed: u64,
    pub model: CoeffModel,
    pub frames_per_realization: usize,
    pub workers: Option<usize>,
    pub osf: usize,
    pub exact_subcarriers: Option<usize>,
    pub doppler: DopplerDraw,
}

pub const DEFAULT_SEED: u64 = 0x5eed_0f75;

impl RunConfig {
    /// Desk-scale defaults of each scenario.
    pub fn defaults(scenario: Scenario) -> Self {
        let base = RunConfig {
            scenario,
            carrier_frequency_hz: 4e9,
            subcarrier_spacing_hz: 15e3,
            subcarriers: vec![512],
            num_slots: 128,
            speeds_kmh: vec![100.0, 360.0, 500.0],
            alphabet: Alphabet::Qam16,
            l_max: 20,
            num_paths: 4,
            snr_p_db: vec![45.0],
            ebn0_db: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            trials: 100,
            base_seed: DEFAULT_SEED,
            model: CoeffModel::IdealExact,
            frames_per_realization: 1,
            workers: None,
            osf: 4,
            exact_subcarriers: None,
            doppler: DopplerDraw::Grid,
        };
        match scenario {
            Scenario::Analyze => RunConfig {
                subcarriers: vec![128, 256, 512, 1024, 2048],
                trials: 1,
                ..base
            },
            Scenario::SigNmse => RunConfig {
                subcarriers: vec![128, 256, 512, 1024, 2048],
                doppler: DopplerDraw::Continuous,
                ..base
            },
            Scenario::SigBer => RunConfig {
                speeds_kmh: vec![500.0],
                trials: 400,
                ..base
            },
            Scenario::EstNmseSnr => RunConfig {
                subcarriers: vec![128],
                num_slots: 64,
                speeds_kmh: vec![500.0],
                snr_p_db: vec![20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0],
                trials: 200,
                ..base
            },
            Scenario::EstNmseM => RunConfig {
                subcarriers: vec![128, 256, 512, 1024],
                speeds_kmh: vec![100.0, 500.0],
                trials: 200,
                ..base
            },
            Scenario::EstBer => RunConfig {
                subcarriers: vec![128],
                num_slots: 64,
                speeds_kmh: vec![500.0],
                trials: 200,
                ..base
            },
            Scenario::Validate => RunConfig { trials: 100, ..base },
        }
    }

    pub fn check(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.frames_per_realization == 0 {
            return fail("frames_per_realization must be at least 1".into());
        }
        if self.subcarriers.is_empty() || self.speeds_kmh.is_empty() {
            return fail("subcarrier and speed lists must not be empty".into());
        }
        if self.speeds_kmh.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return fail("speeds must be finite and non-negative".into());
        }
        if self.num_paths == 0 || self.num_paths > self.l_max {
            return fail(format!("num_paths must be in 1..={} (distinct delays)", self.l_max));
        }
        if self.workers == Some(0) {
            return fail("workers must be at least 1".into());
        }
        if self.osf == 0 {
            return fail("osf must be at least 1".into());
        }
        let needs_snr = matches!(
            self.scenario,
            Scenario::EstNmseSnr | Scenario::EstNmseM | Scenario::EstBer
        );
        if needs_snr && self.snr_p_db.is_empty() {
            return fail(format!("{} needs snr_p_db", self.scenario));
        }
        let needs_ebn0 = matches!(self.scenario, Scenario::SigBer | Scenario::EstBer);
        if needs_ebn0 && self.ebn0_db.is_empty() {
            return fail(format!("{} needs ebn0_db", self.scenario));
        }
        if needs_snr
            && !matches!(
                self.model,
                CoeffModel::IdealExact | CoeffModel::IdealApprox | CoeffModel::IgnoreDse
            )
        {
            return fail(format!("model '{}' cannot generate a diagonal channel", self.model));
        }
        if self.scenario != Scenario::Validate {
            for &m in &self.subcarriers {
                for &v in &self.speeds_kmh {
                    self.params(m, v)?;
                }
            }
        }
        Ok(())
    }

    /// Grid parameters for one `(M, speed)` point.
    ///
    /// The stored Doppler bound is the speed's `k_max`, raised to just above
    /// one for slow or static users so that the parameter set stays valid.
    pub fn params(&self, subcarriers: usize, speed_kmh: f64) -> Result<OtfsParams> {
        let probe = OtfsParams::new(
            subcarriers,
            self.num_slots,
            self.subcarrier_spacing_hz,
            self.carrier_frequency_hz,
            self.l_max,
            1.5,
        )?;
        let k = doppler_bounds(kmh_to_mps(speed_kmh), &probe).max_doppler_index;
        OtfsParams::new(
            subcarriers,
            self.num_slots,
            self.subcarrier_spacing_hz,
            self.carrier_frequency_hz,
            self.l_max,
            k.max(1.0 + 1e-6),
        )
    }

    /// Doppler index bound of a speed at `M` subcarriers.
    pub fn doppler_index(&self, subcarriers: usize, speed_kmh: f64) -> Result<f64> {
        let p = self.params(subcarriers, speed_kmh)?;
        Ok(doppler_bounds(kmh_to_mps(speed_kmh), &p).max_doppler_index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_overrides_defaults() {
        let cfg = ExperimentConfig::from_toml(
            r#"
            num_subcarriers = 64
            num_slots = 32
            speeds_kmh = [500.0]
            alphabet = "qpsk"
            l_max = 8
            trials = 3
            model = "ideal-approx"
            "#,
        )
        .unwrap();
        let run = cfg.resolve(Scenario::EstBer).unwrap();
        assert_eq!(run.subcarriers, vec![64]);
        assert_eq!(run.alphabet, Alphabet::Qpsk);
        assert_eq!(run.model, CoeffModel::IdealApprox);
        assert_eq!(run.snr_p_db, vec![45.0]);
        assert_eq!(run.trials, 3);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(ExperimentConfig::from_toml("bogus = 1").is_err());
        let zero = ExperimentConfig {
            trials: Some(0),
            ..Default::default()
        };
        assert!(zero.resolve(Scenario::SigNmse).is_err());
        let rect = ExperimentConfig {
            model: Some(CoeffModel::Rect),
            ..Default::default()
        };
        assert!(rect.resolve(Scenario::EstNmseSnr).is_err());
        let fast = ExperimentConfig {
            num_slots: Some(16),
            speeds_kmh: Some(vec![5000.0]),
            ..Default::default()
        };
        assert!(fast.resolve(Scenario::SigBer).is_err());
    }

    #[test]
    fn scenario_names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
        }
    }

    #[test]
    fn static_users_get_valid_params() {
        let run = ExperimentConfig::default().resolve(Scenario::SigNmse).unwrap();
        let p = run.params(128, 0.0).unwrap();
        assert!(p.max_doppler_index() > 1.0);
        assert_eq!(run.doppler_index(128, 0.0).unwrap(), 0.0);
    }
}
