//! Adaptive Gauss–Kronrod quadrature for complex oscillatory integrands.
//!
//! The interval is first cut into uniform panels (callers pick a count that
//! resolves the fastest oscillation), each panel is integrated with the
//! 7-point Gauss / 15-point Kronrod pair, and the panel with the largest
//! error estimate is bisected until the total error meets the tolerance.
//! Panel sums are accumulated with Neumaier compensation so that millions of
//! nearly cancelling panels do not lose precision.

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and effort limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Number of uniform panels before any refinement.
    pub initial_panels: usize,
    /// Maximum number of bisections across the whole interval.
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-13,
            initial_panels: 16,
            max_subdivisions: 100_000,
        }
    }
}

impl QuadOptions {
    pub fn with_panels(mut self, panels: usize) -> Self {
        self.initial_panels = panels.max(1);
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }
}

/// Outcome of a converged integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Default)]
struct Compensated {
    sum: Complex64,
    carry: Complex64,
}

impl Compensated {
    fn add(&mut self, v: Complex64) {
        self.sum.re = neumaier(self.sum.re, v.re, &mut self.carry.re);
        self.sum.im = neumaier(self.sum.im, v.im, &mut self.carry.im);
    }

    fn value(&self) -> Complex64 {
        self.sum + self.carry
    }
}

fn neumaier(sum: f64, x: f64, carry: &mut f64) -> f64 {
    let t = sum + x;
    if sum.abs() >= x.abs() {
        *carry += (sum - t) + x;
    } else {
        *carry += (x - t) + sum;
    }
    t
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    /// Error level below which the panel cannot improve in double precision.
    rounding: f64,
}

impl Panel {
    fn refinable(&self) -> bool {
        self.error > self.rounding && 0.5 * (self.a + self.b) > self.a && 0.5 * (self.a + self.b) < self.b
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error).is_eq()
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One G7/K15 panel with the QUADPACK error heuristic.
fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.norm() * WGK[7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        let s = f1 + f2;
        kronrod += s * WGK[j];
        abs_sum += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    let value = kronrod * h;
    let mut err = ((kronrod - gauss) * h).norm();
    let scale = abs_sum * h.abs();
    if scale > 0.0 && err > 0.0 {
        err = scale * (200.0 * err / scale).powf(1.5).min(1.0);
    }
    let rounding = 50.0 * f64::EPSILON * scale;
    Panel {
        a,
        b,
        value,
        error: err.max(rounding),
        rounding,
    }
}

/// Integrates `f` over `[a, b]`; `b < a` integrates in reverse.
///
/// The panel with the largest error estimate is bisected until the summed
/// error drops below `max(abs_tol, rel_tol |I|)` or below the accumulated
/// rounding level. Returns [`Error::Quadrature`] carrying the best estimate
/// when `max_subdivisions` bisections do not suffice.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: Complex64::default(),
            error: 0.0,
            evaluations: 0,
        });
    }
    if b < a {
        let r = integrate(f, b, a, opts)?;
        return Ok(QuadResult { value: -r.value, ..r });
    }
    let panels = opts.initial_panels.max(1);
    let width = (b - a) / panels as f64;
    let edge = |i: usize| if i == panels { b } else { a + width * i as f64 };

    let mut heap = std::collections::BinaryHeap::with_capacity(panels);
    let mut value = Complex64::default();
    let mut error = 0.0;
    let mut rounding = 0.0;
    for i in 0..panels {
        let p = gk15(&f, edge(i), edge(i + 1));
        value += p.value;
        error += p.error;
        rounding += p.rounding;
        heap.push(p);
    }
    let mut evaluations = 15 * panels;
    let target = |value: Complex64, rounding: f64| opts.abs_tol.max(opts.rel_tol * value.norm()).max(rounding);

    let mut splits = 0;
    while error > target(value, rounding) {
        let worst = match heap.peek() {
            Some(p) if p.refinable() && splits < opts.max_subdivisions => heap.pop().unwrap(),
            _ => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        let left = gk15(&f, worst.a, mid);
        let right = gk15(&f, mid, worst.b);
        evaluations += 30;
        splits += 1;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        rounding += left.rounding + right.rounding - worst.rounding;
        heap.push(left);
        heap.push(right);
        if splits % 1024 == 0 {
            error = heap.iter().map(|p| p.error).sum();
        }
    }

    let mut sum = Compensated::default();
    let mut total_error = 0.0;
    let mut total_rounding = 0.0;
    for p in &heap {
        sum.add(p.value);
        total_error += p.error;
        total_rounding += p.rounding;
    }
    let value = sum.value();
    if total_error > target(value, total_rounding) && total_error > 2.0 * total_rounding {
        return Err(Error::Quadrature {
            estimate: value,
            error: total_error,
        });
    }
    Ok(QuadResult {
        value,
        error: total_error,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(
            |x| Complex64::new(x.powi(5) - 2.0 * x, x * x),
            -1.0,
            2.0,
            &QuadOptions::default(),
        )
        .unwrap();
        let want = Complex64::new((64.0 - 1.0) / 6.0 - (4.0 - 1.0), (8.0 + 1.0) / 3.0);
        assert!((r.value - want).norm() < 1e-13);
    }

    #[test]
    fn oscillatory_exponential() {
        let w = 2.0 * PI * 1234.5;
        let opts = QuadOptions::default().with_panels(4000);
        let r = integrate(|x| Complex64::new(0.0, w * x).exp(), 0.0, 1.0, &opts).unwrap();
        let want = (Complex64::new(0.0, w).exp() - 1.0) / Complex64::new(0.0, w);
        assert!((r.value - want).norm() < 1e-10 * want.norm());
    }

    #[test]
    fn reversed_limits_negate() {
        let opts = QuadOptions::default();
        let f = |x: f64| Complex64::new(x.cos(), x.sin());
        let fwd = integrate(f, 0.3, 2.0, &opts).unwrap().value;
        let rev = integrate(f, 2.0, 0.3, &opts).unwrap().value;
        assert!((fwd + rev).norm() < 1e-15);
    }

    #[test]
    fn refinement_handles_a_kink() {
        let opts = QuadOptions::default().with_panels(3);
        let r = integrate(|x| Complex64::new((x - 0.3).abs().sqrt(), 0.0), 0.0, 1.0, &opts).unwrap();
        let want = (2.0 / 3.0) * (0.3f64.powf(1.5) + 0.7f64.powf(1.5));
        assert!((r.value.re - want).abs() < 1e-8);
        assert!(r.evaluations > 45);
    }

    #[test]
    fn reports_non_convergence_with_estimate() {
        let opts = QuadOptions {
            rel_tol: 1e-14,
            abs_tol: 0.0,
            initial_panels: 1,
            max_subdivisions: 3,
        };
        match integrate(
            |x| Complex64::new((50.0 * x).sin() / x.max(1e-3), 0.0),
            0.0,
            10.0,
            &opts,
        ) {
            Err(Error::Quadrature { estimate, error }) => {
                assert!(estimate.re.is_finite() && error > 0.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
