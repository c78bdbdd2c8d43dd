//! Gray-labelled QPSK and 16QAM constellations.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::DdGrid;
use crate::params::OtfsParams;

/// Supported constellations, both normalized to unit average energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alphabet {
    Qpsk,
    Qam16,
}

const PAM4_GRAY: [f64; 4] = [-3.0, -1.0, 3.0, 1.0];

impl Alphabet {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Alphabet::Qpsk => 2,
            Alphabet::Qam16 => 4,
        }
    }

    pub fn order(self) -> usize {
        1 << self.bits_per_symbol()
    }

    /// Constellation point for a bit label, most significant bit first.
    ///
    /// QPSK maps `b0 b1` to `((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2)`. 16QAM maps
    /// `b0 b1` to the in-phase level and `b2 b3` to the quadrature level, each
    /// through the Gray sequence `00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3`,
    /// scaled by `1 / sqrt(10)`.
    pub fn point(self, label: usize) -> Complex64 {
        match self {
            Alphabet::Qpsk => {
                let i = if label & 2 == 0 { 1.0 } else { -1.0 };
                let q = if label & 1 == 0 { 1.0 } else { -1.0 };
                Complex64::new(i, q) * FRAC_1_SQRT_2
            }
            Alphabet::Qam16 => {
                let s = 1.0 / 10f64.sqrt();
                Complex64::new(PAM4_GRAY[(label >> 2) & 3] * s, PAM4_GRAY[label & 3] * s)
            }
        }
    }

    /// All points ordered by label.
    pub fn points(self) -> Vec<Complex64> {
        (0..self.order()).map(|l| self.point(l)).collect()
    }

    /// Nearest-point label. Ties go to the smaller label.
    pub fn nearest_label(self, z: Complex64, table: &[Complex64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (label, p) in table.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = label;
            }
        }
        debug_assert!(best < self.order());
        best
    }
}

impl std::str::FromStr for Alphabet {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qpsk" | "4qam" => Ok(Alphabet::Qpsk),
            "qam16" | "16qam" => Ok(Alphabet::Qam16),
            other => Err(Error::Config(format!("unknown alphabet '{other}'"))),
        }
    }
}

/// Maps a bit stream onto a DD grid in row-major order.
///
/// `bits` holds one bit per byte (0 or 1) and must contain exactly
/// `grid_size * bits_per_symbol` entries.
pub fn map_bits(bits: &[u8], alphabet: Alphabet, params: &OtfsParams) -> Result<DdGrid> {
    let bps = alphabet.bits_per_symbol();
    let expected = params.grid_size() * bps;
    if bits.len() != expected {
        return Err(Error::Length {
            expected,
            got: bits.len(),
        });
    }
    let table = alphabet.points();
    let mut grid = DdGrid::zeros(params);
    for (z, chunk) in grid.as_mut_slice().iter_mut().zip(bits.chunks_exact(bps)) {
        let mut label = 0usize;
        for &b in chunk {
            label = (label << 1) | usize::from(b & 1);
        }
        *z = table[label];
    }
    Ok(grid)
}

/// Hard-decision demapping of a DD grid back to bits, row-major.
pub fn demap_symbols(symbols: &DdGrid, alphabet: Alphabet) -> Vec<u8> {
    let bps = alphabet.bits_per_symbol();
    let table = alphabet.points();
    let mut out = Vec::with_capacity(symbols.as_slice().len() * bps);
    for &z in symbols.as_slice() {
        let label = alphabet.nearest_label(z, &table);
        for j in (0..bps).rev() {
            out.push(((label >> j) & 1) as u8);
        }
    }
    out
}
