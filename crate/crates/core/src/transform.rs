//! Symplectic finite Fourier transforms between the DD and TF grids.
//!
//! ```text
//! ISFFT: X[n,m] = 1/sqrt(NM) Σ_k Σ_l x[k,l] e^{ j2π(nk/N - ml/M)}
//! SFFT:  x[k,l] = 1/sqrt(NM) Σ_n Σ_m X[n,m] e^{-j2π(nk/N - ml/M)}
//! ```
//!
//! Both are unitary and exact inverses of each other. The implementation runs
//! a length-`N` transform down every column and a length-`M` transform along
//! every row.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::grid::{DdGrid, Grid, TfGrid};
use crate::params::OtfsParams;

/// Precomputed FFT plans for one grid shape.
pub struct SfftPlan {
    slots: usize,
    subcarriers: usize,
    fwd_slots: Arc<dyn Fft<f64>>,
    inv_slots: Arc<dyn Fft<f64>>,
    fwd_sub: Arc<dyn Fft<f64>>,
    inv_sub: Arc<dyn Fft<f64>>,
}

impl SfftPlan {
    pub fn new(params: &OtfsParams) -> Self {
        Self::with_shape(params.slots(), params.subcarriers())
    }

    pub fn with_shape(slots: usize, subcarriers: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            slots,
            subcarriers,
            fwd_slots: planner.plan_fft_forward(slots),
            inv_slots: planner.plan_fft_inverse(slots),
            fwd_sub: planner.plan_fft_forward(subcarriers),
            inv_sub: planner.plan_fft_inverse(subcarriers),
        }
    }

    /// DD to TF.
    pub fn isfft(&self, x: &DdGrid) -> Result<TfGrid> {
        x.check_shape(self.slots, self.subcarriers)?;
        let mut g = x.grid().clone();
        self.run(&mut g, &self.inv_slots, &self.fwd_sub);
        Ok(TfGrid(g))
    }

    /// TF to DD.
    pub fn sfft(&self, x: &TfGrid) -> Result<DdGrid> {
        x.check_shape(self.slots, self.subcarriers)?;
        let mut g = x.grid().clone();
        self.run(&mut g, &self.fwd_slots, &self.inv_sub);
        Ok(DdGrid(g))
    }

    fn run(&self, g: &mut Grid, slot_axis: &Arc<dyn Fft<f64>>, subcarrier_axis: &Arc<dyn Fft<f64>>) {
        let (n, m) = (self.slots, self.subcarriers);
        let mut column = vec![Complex64::default(); n];
        for c in 0..m {
            for (r, z) in column.iter_mut().enumerate() {
                *z = g.as_slice()[r * m + c];
            }
            slot_axis.process(&mut column);
            for (r, z) in column.iter().enumerate() {
                g.as_mut_slice()[r * m + c] = *z;
            }
        }
        subcarrier_axis.process(g.as_mut_slice());
        g.scale(1.0 / ((n * m) as f64).sqrt());
    }
}

/// One-shot ISFFT. Prefer [`SfftPlan`] inside loops.
pub fn isfft(x: &DdGrid) -> Result<TfGrid> {
    SfftPlan::with_shape(x.rows(), x.cols()).isfft(x)
}

/// One-shot SFFT. Prefer [`SfftPlan`] inside loops.
pub fn sfft(x: &TfGrid) -> Result<DdGrid> {
    SfftPlan::with_shape(x.rows(), x.cols()).sfft(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::cis_turns;

    fn direct_isfft(x: &Grid) -> Grid {
        let (n, m) = (x.rows(), x.cols());
        let s = 1.0 / ((n * m) as f64).sqrt();
        Grid::from_fn(n, m, |nn, mm| {
            let mut acc = Complex64::default();
            for k in 0..n {
                for l in 0..m {
                    let turns = (nn * k) as f64 / n as f64 - (mm * l) as f64 / m as f64;
                    acc += x[(k, l)] * cis_turns(turns);
                }
            }
            acc * s
        })
    }

    fn test_grid(n: usize, m: usize) -> Grid {
        Grid::from_fn(n, m, |r, c| {
            Complex64::new(((r * 7 + c * 3) % 11) as f64 - 5.0, ((r * 5 + c) % 7) as f64 * 0.5)
        })
    }

    #[test]
    fn fast_isfft_matches_double_sum() {
        for &(n, m) in &[(4, 8), (8, 16), (6, 10), (16, 32)] {
            let x = test_grid(n, m);
            let fast = isfft(&DdGrid(x.clone())).unwrap();
            let slow = direct_isfft(&x);
            assert!(fast.relative_error(&slow).unwrap() < 1e-12, "{n}x{m}");
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let x = DdGrid(test_grid(8, 16));
        let plan = SfftPlan::with_shape(8, 16);
        let back = plan.sfft(&plan.isfft(&x).unwrap()).unwrap();
        assert!(back.relative_error(&x).unwrap() < 1e-13);
        assert!((plan.isfft(&x).unwrap().energy() - x.energy()).abs() < 1e-9 * x.energy());
    }

    #[test]
    fn impulse_maps_to_plane_wave() {
        let (n, m) = (4usize, 8usize);
        let mut x = Grid::zeros(n, m);
        x[(1, 2)] = Complex64::new(1.0, 0.0);
        let tf = isfft(&DdGrid(x)).unwrap();
        let s = 1.0 / ((n * m) as f64).sqrt();
        for nn in 0..n {
            for mm in 0..m {
                let want = cis_turns(nn as f64 / n as f64 - 2.0 * mm as f64 / m as f64) * s;
                assert!((tf[(nn, mm)] - want).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let plan = SfftPlan::with_shape(4, 8);
        assert!(plan.isfft(&DdGrid(Grid::zeros(8, 4))).is_err());
    }
}
