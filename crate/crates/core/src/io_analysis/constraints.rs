//! Support constraints on the ideal-pulse cross-ambiguity function.

use crate::channel::ChannelRealization;
use crate::params::OtfsParams;

/// Half-supports of the ideal-pulse cross-ambiguity in time and frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseConstraints {
    /// Seconds.
    pub t_max: f64,
    /// Hertz.
    pub f_max: f64,
}

impl PulseConstraints {
    /// Midpoints of the feasible intervals, using the tightened time bound
    /// that also admits negative Doppler shifts.
    pub fn midpoint(params: &OtfsParams) -> Self {
        let t = params.slot_duration();
        let m = params.subcarriers() as f64;
        let n = params.slots() as f64;
        let df = params.subcarrier_spacing();
        Self {
            t_max: (params.max_delay() + 2.0 * t / m + t / 2.0) / 2.0,
            f_max: (2.0 * params.max_doppler() + df / n + df / 2.0) / 2.0,
        }
    }
}

/// One inequality of the constraint set with its evaluated sides.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub passed: bool,
}

/// Outcome of [`validate_constraints`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintReport {
    pub checks: Vec<ConstraintCheck>,
}

impl ConstraintReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConstraintCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Checks `τ_max + T/M < t_max < T/2` and `2ν_max + Δf/N < f_max < Δf/2`,
/// plus `τ_max + 2T/M < t_max` when the channel has a negative Doppler shift.
pub fn validate_constraints(params: &OtfsParams, pc: &PulseConstraints, ch: &ChannelRealization) -> ConstraintReport {
    let t = params.slot_duration();
    let m = params.subcarriers() as f64;
    let n = params.slots() as f64;
    let df = params.subcarrier_spacing();
    let tau_max = params.max_delay();
    let nu_max = params.max_doppler();
    let check = |name, lhs: f64, rhs: f64| ConstraintCheck {
        name,
        lhs,
        rhs,
        passed: lhs < rhs,
    };
    let mut checks = vec![
        check("tau_max + T/M < t_max", tau_max + t / m, pc.t_max),
        check("t_max < T/2", pc.t_max, t / 2.0),
        check("2 nu_max + df/N < f_max", 2.0 * nu_max + df / n, pc.f_max),
        check("f_max < df/2", pc.f_max, df / 2.0),
    ];
    if ch.paths().iter().any(|p| p.doppler() < 0.0) {
        checks.push(check("tau_max + 2T/M < t_max", tau_max + 2.0 * t / m, pc.t_max));
    }
    ConstraintReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{doppler_bounds, PathParams};
    use crate::params::kmh_to_mps;
    use num_complex::Complex64;

    fn table1() -> (OtfsParams, ChannelRealization) {
        let v = kmh_to_mps(500.0);
        let probe = OtfsParams::new(512, 128, 15e3, 4e9, 20, 15.0).unwrap();
        let kmax = doppler_bounds(v, &probe).max_doppler_index;
        let p = OtfsParams::new(512, 128, 15e3, 4e9, 20, kmax).unwrap();
        let paths = vec![
            PathParams::on_grid(Complex64::new(0.5, 0.0), 3, 4, &p).unwrap(),
            PathParams::on_grid(Complex64::new(0.5, 0.0), 7, -9, &p).unwrap(),
        ];
        (p, ChannelRealization::new(paths, p, None).unwrap())
    }

    #[test]
    fn table1_configuration_passes() {
        let (p, ch) = table1();
        let t = p.slot_duration();
        let pc = PulseConstraints {
            t_max: 0.25 * t,
            f_max: 0.4 * p.subcarrier_spacing(),
        };
        let report = validate_constraints(&p, &pc, &ch);
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.checks.len(), 5);
        assert!(validate_constraints(&p, &PulseConstraints::midpoint(&p), &ch).passed());
    }

    #[test]
    fn violations_are_reported() {
        let (p, ch) = table1();
        let t = p.slot_duration();
        let df = p.subcarrier_spacing();
        let long = PulseConstraints {
            t_max: 0.6 * t,
            f_max: 0.4 * df,
        };
        let fails: Vec<_> = validate_constraints(&p, &long, &ch)
            .failures()
            .map(|c| c.name)
            .collect();
        assert_eq!(fails, vec!["t_max < T/2"]);
        let narrow = PulseConstraints {
            t_max: 0.25 * t,
            f_max: 2.0 * p.max_doppler(),
        };
        let fails: Vec<_> = validate_constraints(&p, &narrow, &ch)
            .failures()
            .map(|c| c.name)
            .collect();
        assert_eq!(fails, vec!["2 nu_max + df/N < f_max"]);
    }
}
