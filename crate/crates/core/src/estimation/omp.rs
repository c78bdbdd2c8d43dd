//! Orthogonal matching pursuit with an incrementally updated QR factorization.

use num_complex::Complex64;

use super::dictionary::Dictionary;
use crate::error::{Error, Result};

/// Stopping rule: at most `max_iter` atoms, or earlier once `‖r‖₂ < eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub max_iter: usize,
    pub eps: f64,
}

impl StopRule {
    pub fn iterations(max_iter: usize) -> Self {
        Self { max_iter, eps: 0.0 }
    }

    pub fn residual(eps: f64, max_iter: usize) -> Self {
        Self { max_iter, eps }
    }
}

/// Output of [`omp_estimate`].
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    /// Selected columns in selection order.
    pub support: Vec<usize>,
    /// Least-squares gains on the support.
    pub beta_hat: Vec<Complex64>,
    /// `Φ_S β̂`.
    pub h_hat: Vec<Complex64>,
    /// `‖r‖₂` after each iteration.
    pub residual_norms: Vec<f64>,
    pub iterations: usize,
    /// A selected column was linearly dependent on the support and was dropped.
    pub degenerate: bool,
}

impl EstimationResult {
    /// `(k, l, β[k,l])` for every selected atom.
    pub fn atoms<D: Dictionary + ?Sized>(&self, dict: &D) -> Vec<(i64, usize, Complex64)> {
        let layout = dict.layout();
        self.support
            .iter()
            .zip(&self.beta_hat)
            .map(|(&j, &b)| {
                let (k, l) = layout.atom(j);
                (k, l, b)
            })
            .collect()
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Relative size below which a new column counts as dependent on the support.
const RANK_TOL: f64 = 1e-10;

/// Greedy sparse recovery of `y ≈ Φ β`.
///
/// `y` must already be divided by the dictionary scale. Each iteration picks
/// the column with the largest `|Φᴴ r|` (ties to the lowest index), extends a
/// modified Gram-Schmidt QR factorization of the support with one
/// reorthogonalization pass, and updates the residual by projection.
pub fn omp_estimate<D: Dictionary + ?Sized>(y: &[Complex64], dict: &D, stop: StopRule) -> Result<EstimationResult> {
    let rows = dict.rows();
    if y.len() != rows {
        return Err(Error::Length {
            expected: rows,
            got: y.len(),
        });
    }
    let cols = dict.cols();
    let mut residual = y.to_vec();
    let mut psi = vec![Complex64::default(); cols];
    let mut q: Vec<Vec<Complex64>> = Vec::new();
    let mut r_cols: Vec<Vec<Complex64>> = Vec::new();
    let mut z: Vec<Complex64> = Vec::new();
    let mut support = Vec::new();
    let mut residual_norms = Vec::new();
    let mut degenerate = false;
    let mut r_norm = norm(&residual);

    while support.len() < stop.max_iter.min(cols) && r_norm > 0.0 && !(r_norm < stop.eps) {
        dict.correlate(&residual, &mut psi);
        let mut best = None;
        let mut best_mag = -1.0;
        for (j, v) in psi.iter().enumerate() {
            let mag = v.norm_sqr();
            if mag > best_mag && !support.contains(&j) {
                best_mag = mag;
                best = Some(j);
            }
        }
        let Some(j) = best else { break };

        let atom = dict.column(j);
        let atom_norm = norm(&atom);
        let mut v = atom.clone();
        let mut coeffs = vec![Complex64::default(); q.len()];
        for _ in 0..2 {
            for (c, qi) in coeffs.iter_mut().zip(&q) {
                let proj = dot(qi, &v);
                *c += proj;
                v.iter_mut().zip(qi).for_each(|(vv, qq)| *vv -= qq * proj);
            }
        }
        let rho = norm(&v);
        if !(rho > RANK_TOL * atom_norm) {
            degenerate = true;
            break;
        }
        v.iter_mut().for_each(|vv| *vv /= rho);
        let zj = dot(&v, &residual);
        residual.iter_mut().zip(&v).for_each(|(rr, qq)| *rr -= qq * zj);
        coeffs.push(Complex64::new(rho, 0.0));
        r_cols.push(coeffs);
        q.push(v);
        z.push(zj);
        support.push(j);
        r_norm = norm(&residual);
        residual_norms.push(r_norm);
    }

    let s = support.len();
    let mut beta_hat = vec![Complex64::default(); s];
    for i in (0..s).rev() {
        let mut acc = z[i];
        for j in i + 1..s {
            acc -= r_cols[j][i] * beta_hat[j];
        }
        beta_hat[i] = acc / r_cols[i][i];
    }
    let mut h_hat = vec![Complex64::default(); rows];
    let mut col = vec![Complex64::default(); rows];
    for (&j, b) in support.iter().zip(&beta_hat) {
        dict.column_into(j, &mut col);
        h_hat.iter_mut().zip(&col).for_each(|(h, c)| *h += c * b);
    }
    Ok(EstimationResult {
        iterations: s,
        support,
        beta_hat,
        h_hat,
        residual_norms,
        degenerate,
    })
}
