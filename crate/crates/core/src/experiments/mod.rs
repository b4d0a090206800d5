//! Busemann-Petty residuals, contraction spectra and rigidity experiments.

mod planar;
mod radon;
mod random;
mod rigidity;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use planar::{best_fit_ellipse_distance, bp5_residual_2d, fl5_check, EllipseFit, Fl5Stats};
pub use radon::{radon_curve_build, RadonArc, RadonShape};
pub use random::{random_near_ball, random_planar_support, PlanarSupport};
pub use rigidity::{
    admissible_t_values, fit_linear_coefficient, fit_slope_through_origin, predicted_slope, rigidity_scan, rigidity_scan_pair,
    scan_order, RigidityScanResult, DEFAULT_T_VALUES,
};

use crate::body::ConvexBody;
use crate::error::{Error, Result};
use crate::harmonics::{analyze, synthesize};
use crate::operators::{funk_multiplier, laplace_multiplier, monge_ampere, OperatorSpectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Bp5,
    Bp8,
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Problem::Bp5 => "bp5",
            Problem::Bp8 => "bp8",
        })
    }
}

impl FromStr for Problem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bp5" | "5" => Ok(Problem::Bp5),
            "bp8" | "8" => Ok(Problem::Bp8),
            other => Err(Error::InvalidArgument(format!("unknown problem '{other}' (expected bp5 or bp8)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BpResidual {
    pub problem: Problem,
    pub l2_residual: f64,
    pub sup_residual: f64,
    pub normalization_constant: f64,
    /// (m, L² norm of the degree-m part of the residual).
    pub per_degree_breakdown: Vec<(usize, f64)>,
}

fn funk_power(body: &ConvexBody) -> Result<Vec<f64>> {
    let n = body.dim();
    let r = body.funk_radial_power((n - 1) as f64)?;
    if let Some((node, value)) = r.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NonPositive { what: "Funk transform of rho^{n-1}", value: *value, node });
    }
    Ok(r)
}

/// Residual `lhs - c * rhs` with c fitted by weighted least squares.
fn fitted_residual(body: &ConvexBody, problem: Problem, lhs: &[f64], rhs: &[f64]) -> Result<BpResidual> {
    let grid = body.grid();
    let c = grid.inner(lhs, rhs)? / grid.inner(rhs, rhs)?;
    let residual: Vec<f64> = lhs.iter().zip(rhs).map(|(a, b)| a - c * b).collect();
    let spectrum = analyze(grid, &residual, body.band_limit())?;
    Ok(BpResidual {
        problem,
        l2_residual: grid.l2_norm(&residual)?,
        sup_residual: residual.iter().fold(0.0, |m: f64, v| m.max(v.abs())),
        normalization_constant: c,
        per_degree_breakdown: spectrum.degree_norms().into_iter().enumerate().collect(),
    })
}

/// h - c (ℛ[ρ^{n-1}])^{-1}.
pub fn bp5_residual(body: &ConvexBody) -> Result<BpResidual> {
    let rhs: Vec<f64> = funk_power(body)?.into_iter().map(|v| 1.0 / v).collect();
    fitted_residual(body, Problem::Bp5, body.support(), &rhs)
}

/// A h - c (ℛ[ρ^{n-1}])^{n+1}.
pub fn bp8_residual(body: &ConvexBody) -> Result<BpResidual> {
    let n = body.dim() as i32;
    let rhs: Vec<f64> = funk_power(body)?.into_iter().map(|v| v.powi(n + 1)).collect();
    let lhs = monge_ampere(body.grid(), body.support_coeffs())?;
    fitted_residual(body, Problem::Bp8, &lhs, &rhs)
}

pub fn bp_residual(body: &ConvexBody, problem: Problem) -> Result<BpResidual> {
    match problem {
        Problem::Bp5 => bp5_residual(body),
        Problem::Bp8 => bp8_residual(body),
    }
}

/// μ_m = -(n-1) λ_m for even m ≥ 4, 0 otherwise.
pub fn bp5_contraction_spectrum(n: usize, band_limit: usize) -> Result<OperatorSpectrum> {
    if n < 3 {
        return Err(Error::UnsupportedDimension(n));
    }
    let multipliers = (0..=band_limit)
        .map(|m| if m >= 4 && m % 2 == 0 { Ok(-((n - 1) as f64) * funk_multiplier(m, n)?) } else { Ok(0.0) })
        .collect::<Result<_>>()?;
    Ok(OperatorSpectrum { dim: n, name: "bp5".into(), multipliers })
}

/// Full table μ_m = (n-1)(n+1) / ((1-m)(m+n-1)) λ_m for even m (μ_2 = 1).
/// Use [`contraction_part`] for the operator acting on degrees m ≥ 4.
pub fn bp8_contraction_spectrum(n: usize, band_limit: usize) -> Result<OperatorSpectrum> {
    if n < 3 {
        return Err(Error::UnsupportedDimension(n));
    }
    let k = ((n - 1) * (n + 1)) as f64;
    let multipliers = (0..=band_limit)
        .map(|m| if m % 2 == 0 { Ok(k / laplace_multiplier(m, n) * funk_multiplier(m, n)?) } else { Ok(0.0) })
        .collect::<Result<_>>()?;
    Ok(OperatorSpectrum { dim: n, name: "bp8".into(), multipliers })
}

/// The spectrum restricted to even m ≥ 4.
pub fn contraction_part(spectrum: &OperatorSpectrum) -> OperatorSpectrum {
    let multipliers = spectrum
        .multipliers
        .iter()
        .enumerate()
        .map(|(m, v)| if m >= 4 && m % 2 == 0 { *v } else { 0.0 })
        .collect();
    OperatorSpectrum { dim: spectrum.dim, name: spectrum.name.clone(), multipliers }
}

pub fn contraction_spectrum(problem: Problem, n: usize, band_limit: usize) -> Result<OperatorSpectrum> {
    match problem {
        Problem::Bp5 => bp5_contraction_spectrum(n, band_limit),
        Problem::Bp8 => bp8_contraction_spectrum(n, band_limit),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionCheck {
    /// min over λ of ‖(h - λ) - c 𝔐(ρ - r0)‖_{L²}.
    pub lhs: f64,
    /// lhs / ‖ρ - r0‖_{L²}; `None` for a ball.
    pub rhs_ratio: Option<f64>,
    pub ball: bool,
}

/// Evaluates the contraction inequality for `body` with the operator
/// `spectrum` (restricted to even m ≥ 4) and constant `c`.
pub fn contraction_verify(body: &ConvexBody, spectrum: &OperatorSpectrum, c: f64) -> Result<ContractionCheck> {
    let grid = body.grid();
    let mut psi = body.radial_coeffs().clone();
    psi.values_mut()[0] = 0.0;
    let psi_norm = psi.l2_norm();
    let image = synthesize(&contraction_part(spectrum).apply(&psi), grid)?;
    let f: Vec<f64> = body.support().iter().zip(&image).map(|(h, m)| h - c * m).collect();
    let lambda = grid.integrate(&f)?;
    let centered: Vec<f64> = f.iter().map(|v| v - lambda).collect();
    let lhs = grid.l2_norm(&centered)?;
    let scale = body.radial_coeffs().get(0, 0).abs().max(1e-300);
    let ball = psi_norm <= 1e-13 * scale;
    Ok(ContractionCheck { lhs, rhs_ratio: if ball { None } else { Some(lhs / psi_norm) }, ball })
}

/// BP5 and BP8 residuals for each body, in input order.
pub fn residuals_for(bodies: &[ConvexBody]) -> Result<Vec<(BpResidual, BpResidual)>> {
    bodies.par_iter().map(|b| Ok((bp5_residual(b)?, bp8_residual(b)?))).collect()
}
