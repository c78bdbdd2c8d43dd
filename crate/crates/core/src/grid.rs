//! Dense complex grids for the delay-Doppler and time-frequency domains.
//!
//! Both domains share the same storage: `rows x cols` complex samples in
//! row-major order. Rows index Doppler bins (DD) or time slots (TF); columns
//! index delay bins (DD) or subcarriers (TF). The two newtypes keep the
//! domains from being mixed up at API boundaries.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::OtfsParams;

/// Row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl Grid {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Length {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [Complex64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Sum of squared moduli.
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.energy().sqrt()
    }

    pub fn scale(&mut self, s: f64) {
        for z in &mut self.data {
            *z *= s;
        }
    }

    pub fn check_shape(&self, rows: usize, cols: usize) -> Result<()> {
        if self.rows != rows || self.cols != cols {
            return Err(Error::Dimension {
                expected_rows: rows,
                expected_cols: cols,
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(())
    }

    /// `‖self - other‖² / ‖other‖²`.
    pub fn relative_error_sq(&self, reference: &Grid) -> Result<f64> {
        reference.check_shape(self.rows, self.cols)?;
        let num: f64 = self
            .data
            .iter()
            .zip(&reference.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok(num / reference.energy())
    }

    /// `‖self - other‖ / ‖other‖`.
    pub fn relative_error(&self, reference: &Grid) -> Result<f64> {
        Ok(self.relative_error_sq(reference)?.sqrt())
    }

    /// Elementwise sum in place.
    pub fn add_assign(&mut self, other: &Grid) -> Result<()> {
        other.check_shape(self.rows, self.cols)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    /// Elementwise product in place.
    pub fn mul_assign(&mut self, other: &Grid) -> Result<()> {
        other.check_shape(self.rows, self.cols)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a *= b;
        }
        Ok(())
    }
}

impl AsRef<Grid> for Grid {
    fn as_ref(&self) -> &Grid {
        self
    }
}

impl AsMut<Grid> for Grid {
    fn as_mut(&mut self) -> &mut Grid {
        self
    }
}

impl Index<(usize, usize)> for Grid {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        assert!(r < self.rows && c < self.cols, "grid index out of range");
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Grid {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        assert!(r < self.rows && c < self.cols, "grid index out of range");
        &mut self.data[r * self.cols + c]
    }
}

macro_rules! domain_grid {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name(pub Grid);

        impl $name {
            /// All-zero grid sized for `params`.
            pub fn zeros(params: &OtfsParams) -> Self {
                Self(Grid::zeros(params.slots(), params.subcarriers()))
            }

            /// Wraps a grid after checking it matches `params`.
            pub fn from_grid(params: &OtfsParams, grid: Grid) -> Result<Self> {
                grid.check_shape(params.slots(), params.subcarriers())?;
                Ok(Self(grid))
            }

            pub fn from_fn(
                params: &OtfsParams,
                f: impl FnMut(usize, usize) -> Complex64,
            ) -> Self {
                Self(Grid::from_fn(params.slots(), params.subcarriers(), f))
            }

            pub fn grid(&self) -> &Grid {
                &self.0
            }

            pub fn into_grid(self) -> Grid {
                self.0
            }
        }

        impl std::ops::Deref for $name {
            type Target = Grid;
            fn deref(&self) -> &Grid {
                &self.0
            }
        }

        impl std::ops::DerefMut for $name {
            fn deref_mut(&mut self) -> &mut Grid {
                &mut self.0
            }
        }

        impl AsRef<Grid> for $name {
            fn as_ref(&self) -> &Grid {
                &self.0
            }
        }

        impl AsMut<Grid> for $name {
            fn as_mut(&mut self) -> &mut Grid {
                &mut self.0
            }
        }
    };
}

domain_grid!(
    /// Delay-Doppler grid indexed `[k, l]`: Doppler bin `k` (row), delay bin `l` (column).
    DdGrid
);
domain_grid!(
    /// Time-frequency grid indexed `[n, m]`: time slot `n` (row), subcarrier `m` (column).
    TfGrid
);

/// Complex exponential `e^{j 2π x}` with the argument given in turns.
///
/// The integer part of `x` is removed before scaling so that large phase
/// accumulations keep full precision in the fractional part.
#[inline]
pub fn cis_turns(x: f64) -> Complex64 {
    let frac = x - x.round();
    let (s, c) = (std::f64::consts::TAU * frac).sin_cos();
    Complex64::new(c, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cis_turns_matches_direct_evaluation() {
        for &x in &[0.0, 0.25, -0.75, 3.125, 1234.5678] {
            let direct = Complex64::from_polar(1.0, std::f64::consts::TAU * x);
            assert!((cis_turns(x) - direct).norm() < 1e-9);
        }
        assert!((cis_turns(0.25) - Complex64::i()).norm() < 1e-15);
    }

    #[test]
    fn relative_error_and_shape_checks() {
        let a = Grid::from_fn(2, 3, |r, c| Complex64::new((r * 3 + c) as f64, 1.0));
        let mut b = a.clone();
        b[(1, 2)] += Complex64::new(0.5, 0.0);
        let e = b.relative_error_sq(&a).unwrap();
        assert!((e - 0.25 / a.energy()).abs() < 1e-15);
        assert!(a.relative_error(&Grid::zeros(3, 2)).is_err());
        assert!(Grid::from_vec(2, 2, vec![Complex64::default(); 3]).is_err());
    }
}
