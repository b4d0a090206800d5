//! Picard iteration for A(1 + φ) = 1 + γ near the unit ball:
//!
//! ```text
//! Δ̃φ_0     = γ
//! Δ̃φ_{k+1} = γ - P(φ_k),   P(φ) = A(1 + φ) - 1 - Δ̃φ
//! ```
//!
//! P is evaluated on the grid and projected back to the band limit of γ.
//! The first iterate φ' = φ_0 and the remainder φ'' = φ - φ_0 are kept
//! separately because the rigidity argument bounds them differently.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonics::{analyze, holder_seminorm, sup_norm, synthesize, HarmonicCoeffs};
use crate::operators::{laplace_apply, laplace_solve, ma_remainder, monge_ampere};
use crate::sphere::SphericalGrid;

/// Consecutive increment growths that abort the iteration.
const DIVERGENCE_STEPS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaSolveOptions {
    /// Hölder exponent of the diagnostic C^{2+α} estimate.
    pub alpha: f64,
    pub max_iter: usize,
    /// Stop once ‖φ_{k+1} - φ_k‖_{L²} < tol.
    pub tol: f64,
}

impl Default for MaSolveOptions {
    fn default() -> Self {
        Self { alpha: 0.5, max_iter: 50, tol: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaNorms {
    pub l2: f64,
    pub sup: f64,
    pub holder: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub step: usize,
    pub increment_l2: f64,
    /// Discrete estimate sup|δ| + sup|Δ̃δ| + [Δ̃δ]_α of the increment δ;
    /// diagnostic only.
    pub increment_c2alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaSolveTrace {
    pub options: MaSolveOptions,
    pub gamma_norms: GammaNorms,
    pub iterates: Vec<IterationRecord>,
    pub converged: bool,
    /// ‖A(1 + φ) - (1 + γ)‖_{L²}.
    pub final_residual: f64,
    pub phi: HarmonicCoeffs,
    pub phi_prime: HarmonicCoeffs,
    pub phi_double_prime: HarmonicCoeffs,
}

impl MaSolveTrace {
    pub fn iterations(&self) -> usize {
        self.iterates.len()
    }
}

fn c2alpha_estimate(grid: &SphericalGrid, delta: &HarmonicCoeffs, alpha: f64) -> Result<f64> {
    let values = synthesize(delta, grid)?;
    let lap = synthesize(&laplace_apply(delta), grid)?;
    Ok(sup_norm(&values) + sup_norm(&lap) + holder_seminorm(grid, &lap, alpha)?)
}

/// Solves A f = 1 + γ with f = 1 + φ by the fixed-point scheme above.
pub fn ma_solve(grid: &SphericalGrid, gamma: &HarmonicCoeffs, options: &MaSolveOptions) -> Result<MaSolveTrace> {
    if gamma.dim() != grid.dim() {
        return Err(Error::InvalidArgument("gamma and grid dimensions differ".into()));
    }
    let band = gamma.band_limit();
    if band > grid.max_analysis_band() {
        return Err(Error::AliasingRisk { requested: band, max: grid.max_analysis_band() });
    }
    let odd = gamma.odd_energy();
    if odd > 1e-10 * gamma.l2_norm().max(1.0) {
        return Err(Error::OddInput { operator: "Monge-Ampere solver", odd_energy: odd });
    }
    let gamma = gamma.even_part();
    let gamma_field = synthesize(&gamma, grid)?;
    let gamma_norms = GammaNorms {
        l2: gamma.l2_norm(),
        sup: sup_norm(&gamma_field),
        holder: holder_seminorm(grid, &gamma_field, options.alpha)?,
    };

    let phi_prime = laplace_solve(&gamma)?;
    let mut phi = phi_prime.clone();
    let mut iterates = Vec::new();
    let mut converged = gamma.l2_norm() == 0.0;
    let mut growths = 0;
    let mut last = f64::INFINITY;
    let mut step = 0;
    while !converged && step < options.max_iter {
        step += 1;
        let remainder = match ma_remainder(grid, &phi) {
            Ok(r) => r,
            // 1 + φ left the positive cone: certainly outside the regime.
            Err(Error::NonPositive { .. }) => {
                let trace = finish(grid, &gamma, gamma_norms, iterates, false, phi, phi_prime, options)?;
                return Err(Error::Divergence { steps: growths, trace: Box::new(trace) });
            }
            Err(e) => return Err(e),
        };
        let p = analyze(grid, &remainder, band)?.even_part();
        let next = laplace_solve(&gamma.sub(&p)?)?;
        let delta = next.sub(&phi)?;
        let increment_l2 = delta.l2_norm();
        iterates.push(IterationRecord {
            step,
            increment_l2,
            increment_c2alpha: c2alpha_estimate(grid, &delta, options.alpha)?,
        });
        phi = next;
        growths = if increment_l2 > last { growths + 1 } else { 0 };
        last = increment_l2;
        if !increment_l2.is_finite() || growths >= DIVERGENCE_STEPS {
            let trace = finish(grid, &gamma, gamma_norms, iterates, false, phi, phi_prime, options)?;
            return Err(Error::Divergence { steps: growths, trace: Box::new(trace) });
        }
        converged = increment_l2 < options.tol;
    }
    finish(grid, &gamma, gamma_norms, iterates, converged, phi, phi_prime, options)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    grid: &SphericalGrid,
    gamma: &HarmonicCoeffs,
    gamma_norms: GammaNorms,
    iterates: Vec<IterationRecord>,
    converged: bool,
    phi: HarmonicCoeffs,
    phi_prime: HarmonicCoeffs,
    options: &MaSolveOptions,
) -> Result<MaSolveTrace> {
    let mut f = phi.clone();
    f.values_mut()[0] += 1.0;
    let final_residual = match monge_ampere(grid, &f) {
        Ok(a) => {
            let g = synthesize(gamma, grid)?;
            let diff: Vec<f64> = a.iter().zip(&g).map(|(a, g)| a - 1.0 - g).collect();
            grid.l2_norm(&diff)?
        }
        Err(_) => f64::INFINITY,
    };
    let phi_double_prime = phi.sub(&phi_prime)?;
    Ok(MaSolveTrace {
        options: *options,
        gamma_norms,
        iterates,
        converged,
        final_residual,
        phi,
        phi_prime,
        phi_double_prime,
    })
}

/// Geometric-mean ratio of successive L² increments (the empirical κK).
pub fn contraction_rate(trace: &MaSolveTrace) -> Result<f64> {
    let inc: Vec<f64> = trace.iterates.iter().map(|r| r.increment_l2).collect();
    if inc.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "contraction rate needs at least 3 recorded iterations, got {}",
            inc.len()
        )));
    }
    // Drop increments at round-off level; they carry no rate information.
    let floor = 1e-14 * inc[0].max(1e-300);
    let used: Vec<f64> = inc.iter().copied().take_while(|v| *v > floor).collect();
    let used = if used.len() >= 2 { used } else { inc[..2].to_vec() };
    let k = (used.len() - 1) as f64;
    Ok((used[used.len() - 1] / used[0]).powf(1.0 / k))
}

/// Checks Δ̃φ' = γ and returns ‖φ''‖ / ‖γ‖ (0 for γ = 0).
pub fn phi_split_check(trace: &MaSolveTrace, gamma: &HarmonicCoeffs) -> Result<(bool, f64)> {
    let back = laplace_apply(&trace.phi_prime);
    let err = back.sub(&gamma.even_part())?.l2_norm();
    let g = gamma.l2_norm();
    let exact = err <= 1e-12 * g.max(1.0);
    let ratio = if g == 0.0 { 0.0 } else { trace.phi_double_prime.l2_norm() / g };
    Ok((exact, ratio))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn y4(t: f64, band: usize) -> HarmonicCoeffs {
        HarmonicCoeffs::single(3, band, 4, 1, t).unwrap()
    }

    #[test]
    fn zero_gamma_is_trivial() {
        let g = SphericalGrid::new(3, 16).unwrap();
        let trace = ma_solve(&g, &HarmonicCoeffs::zeros(3, 8), &MaSolveOptions::default()).unwrap();
        assert!(trace.converged);
        assert_eq!(trace.iterations(), 0);
        assert_eq!(trace.phi.l2_norm(), 0.0);
        assert!(contraction_rate(&trace).is_err());
        assert_eq!(phi_split_check(&trace, &HarmonicCoeffs::zeros(3, 8)).unwrap(), (true, 0.0));
    }

    #[test]
    fn solves_small_y4() {
        let g = SphericalGrid::new(3, 28).unwrap();
        let gamma = y4(0.01, 16);
        let trace = ma_solve(&g, &gamma, &MaSolveOptions::default()).unwrap();
        assert!(trace.converged && trace.iterations() <= 30);
        assert!(trace.final_residual <= 1e-8, "{}", trace.final_residual);
        let (exact, ratio) = phi_split_check(&trace, &gamma).unwrap();
        assert!(exact && ratio <= 0.05, "{ratio}");
        assert!(trace.phi.odd_energy() <= 1e-12);
        assert!(contraction_rate(&trace).unwrap() < 1.0);
    }

    #[test]
    fn rejects_odd_gamma() {
        let g = SphericalGrid::new(3, 12).unwrap();
        let odd = HarmonicCoeffs::single(3, 4, 3, 0, 0.01).unwrap();
        assert!(matches!(ma_solve(&g, &odd, &MaSolveOptions::default()), Err(Error::OddInput { .. })));
    }

    #[test]
    fn large_gamma_diverges() {
        let g = SphericalGrid::new(3, 20).unwrap();
        let gamma = HarmonicCoeffs::single(3, 12, 8, 3, 2.0).unwrap();
        let opts = MaSolveOptions { max_iter: 40, ..Default::default() };
        match ma_solve(&g, &gamma, &opts) {
            Err(Error::Divergence { trace, .. }) => assert!(!trace.converged),
            other => panic!("expected divergence, got {:?}", other.map(|t| t.converged)),
        }
    }
}
