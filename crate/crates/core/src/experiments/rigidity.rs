//! Residual-versus-t scans along single harmonic directions.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{bp_residual, Problem};
use crate::body::{ConvexBody, Spectral, Shape};
use crate::error::{Error, Result};
use crate::harmonics::{synthesize, HarmonicCoeffs};
use crate::operators::{funk_multiplier, laplace_multiplier};
use crate::sphere::SphericalGrid;

pub const DEFAULT_T_VALUES: [f64; 5] = [0.002, 0.004, 0.006, 0.008, 0.01];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityScanResult {
    pub problem: Problem,
    pub n: usize,
    pub band_limit: usize,
    pub m: usize,
    pub k: i64,
    pub t_values: Vec<f64>,
    pub residual_values: Vec<f64>,
    pub sup_values: Vec<f64>,
    /// s from the fit r² = s² t² + q t⁴.
    pub fitted_slope: f64,
    /// Slope of the plain through-origin line r = s t.
    pub line_slope: f64,
    pub predicted_slope: f64,
}

impl RigidityScanResult {
    pub fn line_ratio(&self) -> f64 {
        self.line_slope / self.predicted_slope
    }

    pub fn slope_ratio(&self) -> f64 {
        self.fitted_slope / self.predicted_slope
    }
}

/// Linearized slope of ‖residual‖_{L²} in t along a unit-norm Y_m.
pub fn predicted_slope(problem: Problem, n: usize, m: usize) -> Result<f64> {
    let lambda = funk_multiplier(m, n)?;
    let nf = n as f64;
    Ok(match problem {
        Problem::Bp5 => (1.0 + (nf - 1.0) * lambda).abs(),
        Problem::Bp8 => (laplace_multiplier(m, n) - (nf - 1.0) * (nf + 1.0) * lambda).abs(),
    })
}

/// Order used for the degree-m scan direction on S². Sectoral/zonal
/// harmonics have narrower convexity windows; k = (m - 2) / 2 keeps
/// t = 0.008 admissible up to m = 8.
pub fn scan_order(m: usize) -> i64 {
    (m.saturating_sub(2) / 2) as i64
}

/// Least-squares slope of y against x through the origin.
pub fn fit_slope_through_origin(x: &[f64], y: &[f64]) -> f64 {
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    sxy / sxx
}

/// s from the least-squares fit y² = s² x² + q x⁴. The second-order part
/// of the residual is essentially orthogonal to the first-order one, so
/// the norms add in quadrature; q grows like m⁸ for BP8. Falls back to
/// the plain line for fewer than two points.
pub fn fit_linear_coefficient(x: &[f64], y: &[f64]) -> f64 {
    if x.len() < 2 {
        return fit_slope_through_origin(x, y);
    }
    let (mut s4, mut s6, mut s8, mut b2, mut b4) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (t, r) in x.iter().zip(y) {
        let (t2, r2) = (t * t, r * r);
        s4 += t2 * t2;
        s6 += t2 * t2 * t2;
        s8 += t2 * t2 * t2 * t2;
        b2 += t2 * r2;
        b4 += t2 * t2 * r2;
    }
    ((b2 * s8 - b4 * s6) / (s4 * s8 - s6 * s6)).max(0.0).sqrt()
}

fn direction_admissible(grid: &SphericalGrid, band_limit: usize, m: usize, k: i64, t: f64) -> bool {
    let dim = grid.dim();
    let mut rho = HarmonicCoeffs::constant(dim, band_limit, 1.0);
    if rho.set(m, k, t).is_err() {
        return false;
    }
    let positive = synthesize(&rho, grid).map(|v| v.iter().all(|r| *r > 0.0)).unwrap_or(false);
    positive && Spectral { rho }.certify(grid).is_ok()
}

/// The subset of `t_list` whose perturbed balls pass the gauge certificate.
pub fn admissible_t_values(grid: &SphericalGrid, band_limit: usize, m: usize, k: i64, t_list: &[f64]) -> Vec<f64> {
    t_list.iter().copied().filter(|t| direction_admissible(grid, band_limit, m, k, *t)).collect()
}

fn validate_t(t_list: &[f64]) -> Result<()> {
    if t_list.is_empty() {
        return Err(Error::InvalidArgument("t_list is empty".into()));
    }
    if t_list.iter().any(|t| !(*t > 0.0)) || t_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("t values must be positive and strictly increasing".into()));
    }
    Ok(())
}

fn isotropic_bodies(grid: &Arc<SphericalGrid>, band_limit: usize, m: usize, k: i64, t_list: &[f64]) -> Result<Vec<ConvexBody>> {
    validate_t(t_list)?;
    let built: Vec<(f64, Result<ConvexBody>)> = t_list
        .par_iter()
        .map(|t| {
            let body = ConvexBody::perturbed_ball(grid.clone(), band_limit, m, k, *t)
                .and_then(|b| b.isotropic_position().map(|(_, iso)| iso));
            (*t, body)
        })
        .collect();
    let failing: Vec<f64> = built
        .iter()
        .filter(|(_, b)| matches!(b, Err(Error::NonConvex { .. }) | Err(Error::NonPositive { .. })))
        .map(|(t, _)| *t)
        .collect();
    if !failing.is_empty() {
        return Err(Error::NonConvexScan(failing));
    }
    built.into_iter().map(|(_, b)| b).collect()
}

fn summarize(problem: Problem, grid: &SphericalGrid, band_limit: usize, m: usize, k: i64, t_list: &[f64], bodies: &[ConvexBody]) -> Result<RigidityScanResult> {
    let residuals = bodies.par_iter().map(|b| bp_residual(b, problem)).collect::<Result<Vec<_>>>()?;
    let residual_values: Vec<f64> = residuals.iter().map(|r| r.l2_residual).collect();
    Ok(RigidityScanResult {
        problem,
        n: grid.dim(),
        band_limit,
        m,
        k,
        t_values: t_list.to_vec(),
        fitted_slope: fit_linear_coefficient(t_list, &residual_values),
        line_slope: fit_slope_through_origin(t_list, &residual_values),
        sup_values: residuals.iter().map(|r| r.sup_residual).collect(),
        residual_values,
        predicted_slope: predicted_slope(problem, grid.dim(), m)?,
    })
}

/// Residual L² norms of the isotropic positions of 1 + t Y_{m,k}.
pub fn rigidity_scan(
    problem: Problem,
    grid: &Arc<SphericalGrid>,
    band_limit: usize,
    m: usize,
    k: i64,
    t_list: &[f64],
) -> Result<RigidityScanResult> {
    let bodies = isotropic_bodies(grid, band_limit, m, k, t_list)?;
    summarize(problem, grid, band_limit, m, k, t_list, &bodies)
}

/// BP5 and BP8 scans sharing the same bodies.
pub fn rigidity_scan_pair(
    grid: &Arc<SphericalGrid>,
    band_limit: usize,
    m: usize,
    k: i64,
    t_list: &[f64],
) -> Result<(RigidityScanResult, RigidityScanResult)> {
    let bodies = isotropic_bodies(grid, band_limit, m, k, t_list)?;
    Ok((
        summarize(Problem::Bp5, grid, band_limit, m, k, t_list, &bodies)?,
        summarize(Problem::Bp8, grid, band_limit, m, k, t_list, &bodies)?,
    ))
}
