//! Near-ball diagnostics: the 5√δ Lipschitz bound, the linearization of
//! (ℛ[ρ^α])^β and the h - ρ ≤ ε‖η‖ + C Mν shape estimate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ConvexBody;
use crate::error::Result;
use crate::harmonics::synthesize;
use crate::operators::{funk_at, maximal_function};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    /// Smallest δ with 1 - δ ≤ ρ ≤ 1 + δ.
    pub delta: f64,
    /// max |ρ(x) - ρ(y)| / |x - y| over node pairs.
    pub lipschitz: f64,
    /// 5√δ.
    pub bound: f64,
    pub holds: bool,
}

/// Checks |ρ(x) - ρ(y)| ≤ 5√δ |x - y| over all node pairs.
pub fn lipschitz_check(body: &ConvexBody) -> LipschitzReport {
    let rho = body.radial();
    let nodes = body.grid().nodes();
    let delta = rho.iter().fold(0.0_f64, |m, r| m.max((r - 1.0).abs()));
    let lipschitz = (0..nodes.len())
        .into_par_iter()
        .map(|i| {
            let mut worst = 0.0_f64;
            for j in i + 1..nodes.len() {
                let d = (nodes[i] - nodes[j]).norm();
                if d > 0.0 {
                    worst = worst.max((rho[i] - rho[j]).abs() / d);
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    let bound = 5.0 * delta.sqrt();
    LipschitzReport { delta, lipschitz, bound, holds: lipschitz <= bound }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearizationReport {
    pub alpha: f64,
    pub beta: f64,
    pub r0: f64,
    pub delta: f64,
    /// Smallest C with |error| ≤ C δ ℛ|ρ - r0| at every node.
    pub constant: f64,
}

/// Measures the constant in
/// |(ℛ[ρ^α])^β - (r0^{αβ} + αβ r0^{αβ-1} ℛ(ρ - r0))| ≤ C δ ℛ|ρ - r0|.
pub fn linearization_constant(body: &ConvexBody, alpha: f64, beta: f64, circle_count: usize) -> Result<LinearizationReport> {
    let fit = body.hausdorff_ball_fit();
    let r0 = fit.r;
    let delta = body.radial().iter().fold(0.0_f64, |m, r| m.max((r / r0 - 1.0).abs()));
    let dim = body.dim();
    let shape = body.shape();
    let per_node = body
        .grid()
        .nodes()
        .par_iter()
        .map(|theta| -> Result<f64> {
            let powered = funk_at(dim, |u| shape.radial(u).powf(alpha), theta, circle_count)?;
            let linear = funk_at(dim, |u| shape.radial(u) - r0, theta, circle_count)?;
            let abs = funk_at(dim, |u| (shape.radial(u) - r0).abs(), theta, circle_count)?;
            let ab = alpha * beta;
            let err = (powered.powf(beta) - (r0.powf(ab) + ab * r0.powf(ab - 1.0) * linear)).abs();
            let scale = delta * abs;
            Ok(if scale > 0.0 { err / scale } else { 0.0 })
        })
        .collect::<Result<Vec<f64>>>()?;
    let constant = per_node.into_iter().fold(0.0, f64::max);
    Ok(LinearizationReport { alpha, beta, r0, delta, constant })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rain1Report {
    pub degree_cut: usize,
    pub eps: f64,
    pub eta_l2: f64,
    /// Smallest C with h - ρ ≤ ε‖η‖ + C Mν at every node.
    pub constant: f64,
}

/// Splits h = h_0 + η + ν at degree `l` and measures the constant C.
pub fn rain1_constant(body: &ConvexBody, l: usize, eps: f64) -> Result<Rain1Report> {
    let grid = body.grid();
    let h = body.support_coeffs();
    let eta = h.project_band(1, l);
    let nu = synthesize(&h.project_band(l + 1, h.band_limit().max(l + 1)), grid)?;
    let max_nu = maximal_function(grid, &nu)?;
    let eta_l2 = eta.l2_norm();
    let mut constant = 0.0_f64;
    for ((hv, r), m) in body.support().iter().zip(body.radial()).zip(&max_nu) {
        let excess = hv - r - eps * eta_l2;
        if excess > 1e-12 * hv.abs() {
            constant = constant.max(if *m > 0.0 { excess / m } else { f64::INFINITY });
        }
    }
    Ok(Rain1Report { degree_cut: l, eps, eta_l2, constant })
}
