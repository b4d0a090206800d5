//! Real spherical harmonics on S^2 and Fourier modes on S^1, orthonormal with
//! respect to the normalized measure sigma (so `Y_0 = 1`).
//!
//! Degree-m harmonics are evaluated as restrictions of homogeneous harmonic
//! polynomials ("solid harmonics"), built by the standard normalized
//! associated-Legendre recurrence written in Cartesian form:
//!
//! ```text
//! Q_m^m     = sqrt((2m+1)/(2m)) (x + i y) Q_{m-1}^{m-1}
//! Q_{m+1}^m = sqrt(2m+3) z Q_m^m
//! Q_l^m     = a_lm z Q_{l-1}^m - b_lm |x|^2 Q_{l-2}^m
//! ```
//!
//! The same recurrence run on [`Jet`]s gives exact gradients and Hessians of
//! homogeneous extensions, which the Monge-Ampere operator needs.
//!
//! Order index `k`: on S^2, `k in -m..=m` with `k > 0` the cosine-type and
//! `k < 0` the sine-type harmonic; on S^1, `k = 1` is `sqrt(2) cos(m phi)` and
//! `k = -1` is `sqrt(2) sin(m phi)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::sphere::{Point, SphericalGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

/// Coefficient table up to band limit L. Serializes as
/// `{dim_n, band_limit, coeffs: [[m, k, value], ...]}` (non-zero entries).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "CoeffRecord", try_from = "CoeffRecord")]
pub struct HarmonicCoeffs {
    dim: usize,
    band_limit: usize,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct CoeffRecord {
    dim_n: usize,
    band_limit: usize,
    coeffs: Vec<(usize, i64, f64)>,
}

impl From<HarmonicCoeffs> for CoeffRecord {
    fn from(c: HarmonicCoeffs) -> Self {
        CoeffRecord { dim_n: c.dim, band_limit: c.band_limit, coeffs: c.triples().collect() }
    }
}

impl TryFrom<CoeffRecord> for HarmonicCoeffs {
    type Error = Error;
    fn try_from(r: CoeffRecord) -> Result<Self> {
        HarmonicCoeffs::from_triples(r.dim_n, r.band_limit, r.coeffs)
    }
}

pub fn num_coeffs(dim: usize, band_limit: usize) -> usize {
    match dim {
        2 => 2 * band_limit + 1,
        _ => (band_limit + 1) * (band_limit + 1),
    }
}

/// Flat index of (m, k). Panics on an invalid order; use
/// [`HarmonicCoeffs::try_index`] for untrusted input.
#[inline]
pub fn index(dim: usize, m: usize, k: i64) -> usize {
    match dim {
        2 => {
            if m == 0 {
                0
            } else {
                2 * m - 1 + usize::from(k > 0)
            }
        }
        _ => ((m * m + m) as i64 + k) as usize,
    }
}

/// Inverse of [`index`].
pub fn degree_order(dim: usize, idx: usize) -> (usize, i64) {
    match dim {
        2 => {
            if idx == 0 {
                (0, 0)
            } else {
                let m = idx.div_ceil(2);
                (m, if idx % 2 == 0 { 1 } else { -1 })
            }
        }
        _ => {
            let m = (idx as f64).sqrt().floor() as usize;
            let m = if (m + 1) * (m + 1) <= idx { m + 1 } else { m };
            (m, idx as i64 - (m * m + m) as i64)
        }
    }
}

fn valid_order(dim: usize, m: usize, k: i64) -> bool {
    match dim {
        2 => (m == 0 && k == 0) || (m > 0 && (k == 1 || k == -1)),
        _ => k.unsigned_abs() as usize <= m,
    }
}

impl HarmonicCoeffs {
    pub fn zeros(dim: usize, band_limit: usize) -> Self {
        Self {
            dim,
            band_limit,
            values: vec![0.0; num_coeffs(dim, band_limit)],
        }
    }

    pub fn from_values(dim: usize, band_limit: usize, values: Vec<f64>) -> Result<Self> {
        check_dim(dim)?;
        let expected = num_coeffs(dim, band_limit);
        if values.len() != expected {
            return Err(Error::LengthMismatch { expected, found: values.len() });
        }
        Ok(Self { dim, band_limit, values })
    }

    /// A single harmonic `value * Y_{m,k}`.
    pub fn single(dim: usize, band_limit: usize, m: usize, k: i64, value: f64) -> Result<Self> {
        let mut c = Self::zeros(dim, band_limit);
        c.set(m, k, value)?;
        Ok(c)
    }

    pub fn constant(dim: usize, band_limit: usize, value: f64) -> Self {
        let mut c = Self::zeros(dim, band_limit);
        c.values[0] = value;
        c
    }

    /// Builds coefficients from (m, k, value) triples.
    pub fn from_triples(
        dim: usize,
        band_limit: usize,
        triples: impl IntoIterator<Item = (usize, i64, f64)>,
    ) -> Result<Self> {
        check_dim(dim)?;
        let mut c = Self::zeros(dim, band_limit);
        for (m, k, v) in triples {
            c.set(m, k, v)?;
        }
        Ok(c)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn try_index(&self, m: usize, k: i64) -> Result<usize> {
        if m > self.band_limit || !valid_order(self.dim, m, k) {
            return Err(Error::InvalidArgument(format!(
                "no harmonic (m = {m}, k = {k}) in dimension {} up to band limit {}",
                self.dim, self.band_limit
            )));
        }
        Ok(index(self.dim, m, k))
    }

    pub fn get(&self, m: usize, k: i64) -> f64 {
        self.try_index(m, k).map(|i| self.values[i]).unwrap_or(0.0)
    }

    pub fn set(&mut self, m: usize, k: i64, value: f64) -> Result<()> {
        let i = self.try_index(m, k)?;
        self.values[i] = value;
        Ok(())
    }

    /// Non-zero entries as (m, k, value).
    pub fn triples(&self) -> impl Iterator<Item = (usize, i64, f64)> + '_ {
        self.values.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, v)| {
            let (m, k) = degree_order(self.dim, i);
            (m, k, *v)
        })
    }

    pub fn degree_range(&self, m: usize) -> std::ops::Range<usize> {
        match self.dim {
            2 => {
                if m == 0 {
                    0..1
                } else {
                    2 * m - 1..2 * m + 1
                }
            }
            _ => m * m..(m + 1) * (m + 1),
        }
    }

    /// L^2 norm of the degree-m component.
    pub fn degree_norm(&self, m: usize) -> f64 {
        if m > self.band_limit {
            return 0.0;
        }
        self.values[self.degree_range(m)].iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn degree_norms(&self) -> Vec<f64> {
        (0..=self.band_limit).map(|m| self.degree_norm(m)).collect()
    }

    /// L^2(sigma) norm via Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn odd_energy(&self) -> f64 {
        (1..=self.band_limit)
            .step_by(2)
            .map(|m| self.degree_norm(m).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn parity(&self) -> Parity {
        let mut even = false;
        let mut odd = false;
        for m in 0..=self.band_limit {
            if self.values[self.degree_range(m)].iter().any(|v| *v != 0.0) {
                if m % 2 == 0 {
                    even = true;
                } else {
                    odd = true;
                }
            }
        }
        match (even, odd) {
            (_, false) => Parity::Even,
            (false, true) => Parity::Odd,
            (true, true) => Parity::Mixed,
        }
    }

    /// Zeroes every odd degree.
    pub fn even_part(&self) -> Self {
        let mut out = self.clone();
        for m in (1..=self.band_limit).step_by(2) {
            let r = out.degree_range(m);
            out.values[r].iter_mut().for_each(|v| *v = 0.0);
        }
        out
    }

    /// Zero outside degrees `m_lo..=m_hi`.
    pub fn project_band(&self, m_lo: usize, m_hi: usize) -> Self {
        let mut out = self.clone();
        for m in 0..=self.band_limit {
            if m < m_lo || m > m_hi {
                let r = out.degree_range(m);
                out.values[r].iter_mut().for_each(|v| *v = 0.0);
            }
        }
        out
    }

    /// Applies a degree-wise multiplier.
    pub fn map_degrees<F: Fn(usize) -> f64>(&self, multiplier: F) -> Self {
        let mut out = self.clone();
        for m in 0..=self.band_limit {
            let s = multiplier(m);
            let r = out.degree_range(m);
            out.values[r].iter_mut().for_each(|v| *v *= s);
        }
        out
    }

    /// Same coefficients at a different band limit (truncated or zero-padded).
    pub fn with_band_limit(&self, band_limit: usize) -> Self {
        let mut out = Self::zeros(self.dim, band_limit);
        let n = out.values.len().min(self.values.len());
        out.values[..n].copy_from_slice(&self.values[..n]);
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `self + s * other`; band limits must agree.
    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self> {
        if self.dim != other.dim || self.band_limit != other.band_limit {
            return Err(Error::InvalidArgument(format!(
                "coefficient tables differ: (n = {}, L = {}) vs (n = {}, L = {})",
                self.dim, self.band_limit, other.dim, other.band_limit
            )));
        }
        let mut out = self.clone();
        out.values.iter_mut().zip(&other.values).for_each(|(a, b)| *a += s * b);
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    /// Pointwise value at a unit vector.
    pub fn eval(&self, u: &Point) -> f64 {
        let mut basis = vec![0.0; self.values.len()];
        basis_values(self.dim, self.band_limit, u, &mut basis);
        basis.iter().zip(&self.values).map(|(b, c)| b * c).sum()
    }

    /// Jet of the degree-`homogeneity` homogeneous extension
    /// `|x|^d f(x / |x|)` at `x`.
    pub fn extension_jet(&self, x: &Point, homogeneity: f64) -> Jet {
        extension_jet(self, x, homogeneity)
    }
}

fn check_dim(dim: usize) -> Result<()> {
    match dim {
        2 | 3 => Ok(()),
        other => Err(Error::UnsupportedDimension(other)),
    }
}

#[inline]
fn sectoral_factor(m: usize) -> f64 {
    ((2 * m + 1) as f64 / (2 * m) as f64).sqrt()
}

#[inline]
fn recurrence_ab(l: usize, m: usize) -> (f64, f64) {
    let (lf, mf) = (l as f64, m as f64);
    let d = lf * lf - mf * mf;
    let a = ((4.0 * lf * lf - 1.0) / d).sqrt();
    let b = ((2.0 * lf + 1.0) * (lf - 1.0 - mf) * (lf - 1.0 + mf) / ((2.0 * lf - 3.0) * d)).sqrt();
    (a, b)
}

/// All basis values Y_{m,k}(u) for m <= L, in flat index order.
pub fn basis_values(dim: usize, band_limit: usize, u: &Point, out: &mut [f64]) {
    debug_assert_eq!(out.len(), num_coeffs(dim, band_limit));
    let (x, y, z) = (u.x, u.y, u.z);
    if dim == 2 {
        out[0] = 1.0;
        let (mut re, mut im) = (1.0, 0.0);
        for m in 1..=band_limit {
            let nre = x * re - y * im;
            im = x * im + y * re;
            re = nre;
            out[2 * m - 1] = SQRT_2 * im;
            out[2 * m] = SQRT_2 * re;
        }
        return;
    }
    let r2 = u.norm_squared();
    let (mut sre, mut sim) = (1.0, 0.0);
    for m in 0..=band_limit {
        if m > 0 {
            let c = sectoral_factor(m);
            let nre = c * (x * sre - y * sim);
            sim = c * (x * sim + y * sre);
            sre = nre;
        }
        let mut put = |l: usize, re: f64, im: f64| {
            let base = l * l + l;
            if m == 0 {
                out[base] = re;
            } else {
                out[base + m] = SQRT_2 * re;
                out[base - m] = SQRT_2 * im;
            }
        };
        put(m, sre, sim);
        if m < band_limit {
            let c = ((2 * m + 3) as f64).sqrt();
            let (mut p_re, mut p_im) = (sre, sim);
            let (mut q_re, mut q_im) = (c * z * sre, c * z * sim);
            put(m + 1, q_re, q_im);
            for l in m + 2..=band_limit {
                let (a, b) = recurrence_ab(l, m);
                let n_re = a * z * q_re - b * r2 * p_re;
                let n_im = a * z * q_im - b * r2 * p_im;
                p_re = q_re;
                p_im = q_im;
                q_re = n_re;
                q_im = n_im;
                put(l, q_re, q_im);
            }
        }
    }
}

/// Jet of x -> |x|^d f(x/|x|) for f given by `coeffs`.
fn extension_jet(coeffs: &HarmonicCoeffs, x: &Point, homogeneity: f64) -> Jet {
    let band = coeffs.band_limit;
    let c = &coeffs.values;
    // Per-degree sums of solid harmonics.
    let mut per_degree = vec![Jet::ZERO; band + 1];
    if coeffs.dim == 2 {
        per_degree[0] = Jet::constant(c[0]);
        let (mut re, mut im) = (Jet::constant(1.0), Jet::ZERO);
        for m in 1..=band {
            let nre = re.mul_coord(0, x.x) - im.mul_coord(1, x.y);
            im = im.mul_coord(0, x.x) + re.mul_coord(1, x.y);
            re = nre;
            per_degree[m].axpy(SQRT_2 * c[2 * m - 1], &im);
            per_degree[m].axpy(SQRT_2 * c[2 * m], &re);
        }
    } else {
        let (mut sre, mut sim) = (Jet::constant(1.0), Jet::ZERO);
        for m in 0..=band {
            if m > 0 {
                let f = sectoral_factor(m);
                let nre = (sre.mul_coord(0, x.x) - sim.mul_coord(1, x.y)).scale(f);
                sim = (sim.mul_coord(0, x.x) + sre.mul_coord(1, x.y)).scale(f);
                sre = nre;
            }
            // Skip orders whose coefficients all vanish.
            let active = (m..=band).any(|l| {
                let base = l * l + l;
                c[base + m] != 0.0 || c[base - m] != 0.0
            });
            if !active {
                continue;
            }
            let mut put = |l: usize, re: &Jet, im: &Jet| {
                let base = l * l + l;
                if m == 0 {
                    per_degree[l].axpy(c[base], re);
                } else {
                    per_degree[l].axpy(SQRT_2 * c[base + m], re);
                    per_degree[l].axpy(SQRT_2 * c[base - m], im);
                }
            };
            put(m, &sre, &sim);
            if m < band {
                let f = ((2 * m + 3) as f64).sqrt();
                let (mut p_re, mut p_im) = (sre, sim);
                let (mut q_re, mut q_im) =
                    (sre.mul_coord(2, x.z).scale(f), sim.mul_coord(2, x.z).scale(f));
                put(m + 1, &q_re, &q_im);
                for l in m + 2..=band {
                    let (a, b) = recurrence_ab(l, m);
                    let n_re = q_re.mul_coord(2, x.z).scale(a) - p_re.mul_r2(x).scale(b);
                    let n_im = if m == 0 {
                        Jet::ZERO
                    } else {
                        q_im.mul_coord(2, x.z).scale(a) - p_im.mul_r2(x).scale(b)
                    };
                    p_re = q_re;
                    p_im = q_im;
                    q_re = n_re;
                    q_im = n_im;
                    put(l, &q_re, &q_im);
                }
            }
        }
    }
    let mut total = Jet::ZERO;
    for (l, s) in per_degree.iter().enumerate() {
        if s.v == 0.0 && s.g.iter().all(|g| *g == 0.0) && s.h.iter().all(|h| *h == 0.0) {
            continue;
        }
        total += Jet::radial_power(x, homogeneity - l as f64) * *s;
    }
    total
}

const CHUNK: usize = 256;

/// Quadrature analysis: coefficients <f, Y_{m,k}>.
pub fn analyze(grid: &SphericalGrid, samples: &[f64], band_limit: usize) -> Result<HarmonicCoeffs> {
    grid.check_len(samples)?;
    if band_limit > grid.max_analysis_band() {
        return Err(Error::AliasingRisk {
            requested: band_limit,
            max: grid.max_analysis_band(),
        });
    }
    let dim = grid.dim();
    let ncoef = num_coeffs(dim, band_limit);
    let nodes = grid.nodes();
    let weights = grid.weights();
    // Fixed chunking keeps the summation order independent of thread count.
    let partials: Vec<Vec<f64>> = (0..nodes.len())
        .collect::<Vec<_>>()
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; ncoef];
            let mut basis = vec![0.0; ncoef];
            for &i in chunk {
                let wf = weights[i] * samples[i];
                if wf == 0.0 {
                    continue;
                }
                basis_values(dim, band_limit, &nodes[i], &mut basis);
                acc.iter_mut().zip(&basis).for_each(|(a, b)| *a += wf * b);
            }
            acc
        })
        .collect();
    let mut values = vec![0.0; ncoef];
    for p in partials {
        values.iter_mut().zip(p).for_each(|(v, x)| *v += x);
    }
    Ok(HarmonicCoeffs { dim, band_limit, values })
}

/// Pointwise synthesis on the grid nodes.
pub fn synthesize(coeffs: &HarmonicCoeffs, grid: &SphericalGrid) -> Result<Vec<f64>> {
    if coeffs.dim != grid.dim() {
        return Err(Error::InvalidArgument(format!(
            "coefficients are for n = {}, grid is n = {}",
            coeffs.dim,
            grid.dim()
        )));
    }
    Ok(synthesize_at(coeffs, grid.nodes()))
}

/// Synthesis at arbitrary unit vectors.
pub fn synthesize_at(coeffs: &HarmonicCoeffs, points: &[Point]) -> Vec<f64> {
    points
        .par_chunks(CHUNK)
        .flat_map_iter(|chunk| {
            let mut basis = vec![0.0; coeffs.values.len()];
            chunk
                .iter()
                .map(|u| {
                    basis_values(coeffs.dim, coeffs.band_limit, u, &mut basis);
                    basis.iter().zip(&coeffs.values).map(|(b, c)| b * c).sum::<f64>()
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

pub fn l2_norm(coeffs: &HarmonicCoeffs) -> f64 {
    coeffs.l2_norm()
}

pub fn sup_norm(field: &[f64]) -> f64 {
    field.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Discrete Hölder seminorm: max |f(x) - f(y)| / |x - y|^alpha over node
/// pairs within four grid spacings.
pub fn holder_seminorm(grid: &SphericalGrid, field: &[f64], alpha: f64) -> Result<f64> {
    grid.check_len(field)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("Hölder exponent must lie in (0, 1), got {alpha}")));
    }
    let nodes = grid.nodes();
    Ok(grid
        .neighbour_pairs()
        .par_iter()
        .map(|&(i, j)| {
            let (i, j) = (i as usize, j as usize);
            let d = (nodes[i] - nodes[j]).norm();
            if d == 0.0 {
                0.0
            } else {
                (field[i] - field[j]).abs() / d.powf(alpha)
            }
        })
        .reduce(|| 0.0, f64::max))
}
