//! Sensing dictionaries for impulse-pilot estimation.
//!
//! Atom `(k, l)` is a unit-gain path with integer Doppler index
//! `k ∈ [-k_max, k_max]` and delay index `l ∈ [0, l_max]`. Columns are ordered
//! `(k + k_max) + l (2 k_max + 1)`. Grids are vectorized column-major, so TF
//! bin `(n, m)` sits at row `n + mN` and DD bin `(k, l)` at row `k + lN`.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{cis_turns, DdGrid, Grid, TfGrid};
use crate::io_analysis::{kernel_ideal_grid, rect_entry, Branch, CoeffModel, KernelPath};
use crate::params::OtfsParams;
use crate::transform::SfftPlan;

/// Column-major vectorization of a grid.
pub fn vectorize(g: &Grid) -> Vec<Complex64> {
    let (rows, cols) = (g.rows(), g.cols());
    let mut v = Vec::with_capacity(rows * cols);
    for c in 0..cols {
        for r in 0..rows {
            v.push(g[(r, c)]);
        }
    }
    v
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &[Complex64], rows: usize, cols: usize) -> Result<Grid> {
    if v.len() != rows * cols {
        return Err(Error::Length {
            expected: rows * cols,
            got: v.len(),
        });
    }
    Ok(Grid::from_fn(rows, cols, |r, c| v[r + c * rows]))
}

/// Domain a dictionary lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensingDomain {
    Tf,
    Dd,
}

/// Mapping between column indices and atom coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AtomLayout {
    pub k_max: usize,
    pub l_max: usize,
}

impl AtomLayout {
    pub fn new(k_max: usize, l_max: usize, params: &OtfsParams) -> Result<Self> {
        if 2 * k_max + 1 > params.slots() {
            return Err(Error::Params(format!(
                "Doppler extent ±{k_max} does not fit {} slots",
                params.slots()
            )));
        }
        if l_max >= params.subcarriers() {
            return Err(Error::Params(format!(
                "delay extent {l_max} does not fit {} subcarriers",
                params.subcarriers()
            )));
        }
        Ok(Self { k_max, l_max })
    }

    /// Dictionary extent for a configuration: `k_max = ⌈ν_max N T⌉`.
    pub fn for_params(params: &OtfsParams) -> Result<Self> {
        let k = (params.max_doppler_index() - 1e-9).ceil().max(0.0) as usize;
        Self::new(k, params.max_delay_index(), params)
    }

    pub fn doppler_bins(&self) -> usize {
        2 * self.k_max + 1
    }

    pub fn num_atoms(&self) -> usize {
        self.doppler_bins() * (self.l_max + 1)
    }

    pub fn column(&self, k: i64, l: usize) -> Option<usize> {
        let kk = k + self.k_max as i64;
        if kk < 0 || kk as usize >= self.doppler_bins() || l > self.l_max {
            return None;
        }
        Some(kk as usize + l * self.doppler_bins())
    }

    /// `(k, l)` of a column index.
    pub fn atom(&self, col: usize) -> (i64, usize) {
        let d = self.doppler_bins();
        ((col % d) as i64 - self.k_max as i64, col / d)
    }
}

/// A linear map from atom gains to a vectorized received grid.
pub trait Dictionary: Sync {
    fn rows(&self) -> usize;
    fn layout(&self) -> AtomLayout;
    fn domain(&self) -> SensingDomain;

    fn cols(&self) -> usize {
        self.layout().num_atoms()
    }

    /// Writes column `j` into `out`.
    fn column_into(&self, j: usize, out: &mut [Complex64]);

    /// `out = Φᴴ r`.
    fn correlate(&self, r: &[Complex64], out: &mut [Complex64]);

    fn column(&self, j: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::default(); self.rows()];
        self.column_into(j, &mut v);
        v
    }
}

/// TF entry `e^{-j2πml/M} e^{j2πkn/N} e^{j2πmnkΔf/(N f_c)}` of atom `(k, l)`.
pub fn tf_atom_entry(k: i64, l: usize, n: usize, m: usize, params: &OtfsParams) -> Complex64 {
    let (mf, nf) = (params.subcarriers() as f64, params.slots() as f64);
    let (k, l, n, m) = (k as f64, l as f64, n as f64, m as f64);
    let squint = params.subcarrier_spacing() / (nf * params.carrier_frequency());
    cis_turns(-m * l / mf + k * n / nf + m * n * k * squint)
}

/// Explicit sensing matrix `Φ` with its measurement scale `c`.
#[derive(Debug, Clone)]
pub struct SensingMatrix {
    rows: usize,
    layout: AtomLayout,
    domain: SensingDomain,
    scale: Complex64,
    /// Column-major entries.
    entries: Vec<Complex64>,
}

impl SensingMatrix {
    fn from_columns(
        rows: usize,
        layout: AtomLayout,
        domain: SensingDomain,
        scale: Complex64,
        fill: impl Fn(usize, &mut [Complex64]) + Sync,
    ) -> Self {
        let mut entries = vec![Complex64::default(); rows * layout.num_atoms()];
        entries
            .par_chunks_mut(rows)
            .enumerate()
            .for_each(|(j, col)| fill(j, col));
        Self {
            rows,
            layout,
            domain,
            scale,
            entries,
        }
    }

    pub fn domain_tag(&self) -> SensingDomain {
        self.domain
    }

    /// `c_α`: the received vector is `c_α Φ β`.
    pub fn scale(&self) -> Complex64 {
        self.scale
    }

    pub fn col(&self, j: usize) -> &[Complex64] {
        &self.entries[j * self.rows..(j + 1) * self.rows]
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[col * self.rows + row]
    }

    /// More atoms than measurements.
    pub fn is_overcomplete(&self) -> bool {
        self.layout.num_atoms() > self.rows
    }

    /// Writes the matrix in long format: `row,col,k,l,re,im`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["row", "col", "k", "l", "re", "im"])?;
        for j in 0..self.layout.num_atoms() {
            let (k, l) = self.layout.atom(j);
            for (i, z) in self.col(j).iter().enumerate() {
                w.write_record([
                    i.to_string(),
                    j.to_string(),
                    k.to_string(),
                    l.to_string(),
                    z.re.to_string(),
                    z.im.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

impl Dictionary for SensingMatrix {
    fn rows(&self) -> usize {
        self.rows
    }

    fn layout(&self) -> AtomLayout {
        self.layout
    }

    fn domain(&self) -> SensingDomain {
        self.domain
    }

    fn column_into(&self, j: usize, out: &mut [Complex64]) {
        out.copy_from_slice(self.col(j));
    }

    fn correlate(&self, r: &[Complex64], out: &mut [Complex64]) {
        out.par_iter_mut().enumerate().for_each(|(j, o)| {
            *o = self.col(j).iter().zip(r).map(|(a, b)| a.conj() * b).sum();
        });
    }
}

/// Dense TF sensing matrix with scale `x_p / sqrt(NM)`.
pub fn build_sensing_tf(params: &OtfsParams, layout: AtomLayout, pilot: Complex64) -> SensingMatrix {
    let (n, m) = (params.slots(), params.subcarriers());
    let scale = pilot / (params.grid_size() as f64).sqrt();
    SensingMatrix::from_columns(n * m, layout, SensingDomain::Tf, scale, |j, col| {
        let (k, l) = layout.atom(j);
        for mm in 0..m {
            for nn in 0..n {
                col[nn + mm * n] = tf_atom_entry(k, l, nn, mm, params);
            }
        }
    })
}

/// Dense DD sensing matrix with scale `x_p`.
///
/// * [`CoeffModel::IdealApprox`]: SFFT of the TF column divided by
///   `sqrt(NM)`, so the matrix is the unitary image of the TF dictionary.
/// * [`CoeffModel::DdClosed`]: closed-form ideal-pulse kernel of the atom.
/// * [`CoeffModel::Rect`]: rectangular-pulse response to a pilot at `(0, 0)`.
pub fn build_sensing_dd(
    params: &OtfsParams,
    layout: AtomLayout,
    pilot: Complex64,
    model: CoeffModel,
) -> Result<SensingMatrix> {
    let (n, m) = (params.slots(), params.subcarriers());
    let rows = n * m;
    let fill_grid = |col: &mut [Complex64], g: &Grid| {
        for l in 0..m {
            for k in 0..n {
                col[k + l * n] = g[(k, l)];
            }
        }
    };
    let matrix = match model {
        CoeffModel::IdealApprox => {
            let plan = SfftPlan::new(params);
            let norm = 1.0 / (params.grid_size() as f64).sqrt();
            SensingMatrix::from_columns(rows, layout, SensingDomain::Dd, pilot, |j, col| {
                let (k, l) = layout.atom(j);
                let tf = TfGrid::from_fn(params, |nn, mm| tf_atom_entry(k, l, nn, mm, params));
                let mut dd = plan.sfft(&tf).expect("shape from params");
                dd.scale(norm);
                fill_grid(col, &dd);
            })
        }
        CoeffModel::DdClosed => SensingMatrix::from_columns(rows, layout, SensingDomain::Dd, pilot, |j, col| {
            let (k, l) = layout.atom(j);
            let g = kernel_ideal_grid(&KernelPath::atom(k as f64, l as f64, params), params);
            fill_grid(col, &g);
        }),
        CoeffModel::Rect => SensingMatrix::from_columns(rows, layout, SensingDomain::Dd, pilot, |j, col| {
            let (k, l) = layout.atom(j);
            let atom = KernelPath::atom(k as f64, l as f64, params);
            for ll in 0..m {
                for kk in 0..n {
                    col[kk + ll * n] = rect_entry(&atom, Branch::Ici, kk, ll, 0, 0, params);
                }
            }
        }),
        other => {
            return Err(Error::WrongModel {
                model: other.name().into(),
                reason: "delay-Doppler dictionaries use ideal-approx, dd-closed or rect".into(),
            })
        }
    };
    Ok(matrix)
}

/// Matrix-free TF dictionary.
///
/// Columns are generated on demand and `Φᴴ r` costs one pass over the grid
/// per Doppler bin plus one length-`M` FFT, so grids whose dense dictionary
/// would not fit in memory stay cheap.
pub struct TfOperator {
    params: OtfsParams,
    layout: AtomLayout,
    scale: Complex64,
    ifft: Arc<dyn Fft<f64>>,
}

impl TfOperator {
    pub fn new(params: &OtfsParams, layout: AtomLayout, pilot: Complex64) -> Self {
        Self {
            params: *params,
            layout,
            scale: pilot / (params.grid_size() as f64).sqrt(),
            ifft: FftPlanner::new().plan_fft_inverse(params.subcarriers()),
        }
    }

    pub fn scale(&self) -> Complex64 {
        self.scale
    }

    /// Materializes the operator as a dense matrix.
    pub fn to_dense(&self) -> SensingMatrix {
        build_sensing_tf(
            &self.params,
            self.layout,
            self.scale * (self.params.grid_size() as f64).sqrt(),
        )
    }

    /// `z_k[m] = Σ_n conj(e^{j2πkn/N} e^{j2πmnkΔf/(N f_c)}) r[n + mN]`.
    fn doppler_fold(&self, k: i64, r: &[Complex64], z: &mut [Complex64]) {
        let n = self.params.slots();
        let squint = self.params.subcarrier_spacing() / (n as f64 * self.params.carrier_frequency());
        z.iter_mut().for_each(|v| *v = Complex64::default());
        for nn in 0..n {
            let step = cis_turns(-(nn as f64) * k as f64 * squint);
            let mut phase = cis_turns(-(k as f64) * nn as f64 / n as f64);
            for (mm, zv) in z.iter_mut().enumerate() {
                if mm % 64 == 0 {
                    phase = cis_turns(-(k as f64) * nn as f64 / n as f64 - (mm * nn) as f64 * k as f64 * squint);
                }
                *zv += phase * r[nn + mm * n];
                phase *= step;
            }
        }
    }
}

impl Dictionary for TfOperator {
    fn rows(&self) -> usize {
        self.params.grid_size()
    }

    fn layout(&self) -> AtomLayout {
        self.layout
    }

    fn domain(&self) -> SensingDomain {
        SensingDomain::Tf
    }

    fn column_into(&self, j: usize, out: &mut [Complex64]) {
        let (n, m) = (self.params.slots(), self.params.subcarriers());
        let (k, l) = self.layout.atom(j);
        for mm in 0..m {
            for nn in 0..n {
                out[nn + mm * n] = tf_atom_entry(k, l, nn, mm, &self.params);
            }
        }
    }

    fn correlate(&self, r: &[Complex64], out: &mut [Complex64]) {
        let m = self.params.subcarriers();
        let bins = self.layout.doppler_bins();
        let per_k: Vec<Vec<Complex64>> = (0..bins)
            .into_par_iter()
            .map(|kk| {
                let k = kk as i64 - self.layout.k_max as i64;
                let mut z = vec![Complex64::default(); m];
                self.doppler_fold(k, r, &mut z);
                self.ifft.process(&mut z);
                z
            })
            .collect();
        for (kk, z) in per_k.iter().enumerate() {
            for l in 0..=self.layout.l_max {
                out[kk + l * bins] = z[l];
            }
        }
    }
}

/// Vectorized DD grid in dictionary row order.
pub fn dd_vector(g: &DdGrid) -> Vec<Complex64> {
    vectorize(g)
}

/// Vectorized TF grid in dictionary row order.
pub fn tf_vector(g: &TfGrid) -> Vec<Complex64> {
    vectorize(g)
}
