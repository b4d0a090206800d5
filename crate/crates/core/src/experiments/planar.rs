//! Planar checks: the 2-D BP5 residual, best-fit ellipses and the explicit
//! |ω(e)| ≤ (35/ϑ) ∫_{ϑ/5}^{ϑ} |ω(e'(t))| dt inequality.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::random::{random_planar_support, PlanarSupport};
use super::{BpResidual, Problem};
use crate::body::ConvexBody;
use crate::error::{Error, Result};
use crate::sphere::Point;

const ANGLES: usize = 512;
const DEGREES: usize = 16;

fn unit(angle: f64) -> Point {
    Point::new(angle.cos(), angle.sin(), 0.0)
}

/// Residual of h(θ) · 2ρ(θ + π/2) - c over 512 angles, c the mean.
pub fn bp5_residual_2d(body: &ConvexBody) -> Result<BpResidual> {
    if body.dim() != 2 {
        return Err(Error::UnsupportedDimension(body.dim()));
    }
    let shape = body.shape();
    let f: Vec<f64> = (0..ANGLES)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / ANGLES as f64;
            shape.support(&unit(t)) * 2.0 * shape.radial(&unit(t + FRAC_PI_2))
        })
        .collect();
    let c = f.iter().sum::<f64>() / ANGLES as f64;
    let r: Vec<f64> = f.iter().map(|v| v - c).collect();
    let l2 = (r.iter().map(|v| v * v).sum::<f64>() / ANGLES as f64).sqrt();
    let per_degree_breakdown = (0..=DEGREES)
        .map(|m| {
            let (mut a, mut b) = (0.0, 0.0);
            for (i, v) in r.iter().enumerate() {
                let t = 2.0 * PI * (m * i) as f64 / ANGLES as f64;
                a += v * t.cos();
                b += v * t.sin();
            }
            let scale = if m == 0 { 1.0 } else { 2f64.sqrt() };
            (m, scale * a.hypot(b) / ANGLES as f64)
        })
        .collect();
    Ok(BpResidual {
        problem: Problem::Bp5,
        l2_residual: l2,
        sup_residual: r.iter().fold(0.0, |m: f64, v| m.max(v.abs())),
        normalization_constant: c,
        per_degree_breakdown,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipseFit {
    /// 1/ρ_E² = a cos² + 2b cos sin + c sin².
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// max |ρ - ρ_E| over the sample angles.
    pub distance: f64,
}

/// Least-squares centred ellipse through the radial function.
pub fn best_fit_ellipse_distance(body: &ConvexBody) -> EllipseFit {
    let shape = body.shape();
    let samples: Vec<(f64, f64)> = (0..ANGLES)
        .map(|i| {
            let t = PI * i as f64 / ANGLES as f64;
            (t, shape.radial(&unit(t)))
        })
        .collect();
    let mut ata = nalgebra::Matrix3::<f64>::zeros();
    let mut atb = nalgebra::Vector3::<f64>::zeros();
    for (t, r) in &samples {
        let (s, c) = t.sin_cos();
        let row = nalgebra::Vector3::new(c * c, 2.0 * c * s, s * s);
        ata += row * row.transpose();
        atb += row / (r * r);
    }
    let x = ata.lu().solve(&atb).unwrap_or_else(nalgebra::Vector3::zeros);
    let distance = samples
        .iter()
        .map(|(t, r)| {
            let (s, c) = t.sin_cos();
            let q = x[0] * c * c + 2.0 * x[1] * c * s + x[2] * s * s;
            if q > 0.0 {
                (r - 1.0 / q.sqrt()).abs()
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max);
    EllipseFit { a: x[0], b: x[1], c: x[2], distance }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fl5Stats {
    pub bodies: usize,
    /// Admissible (e, ϑ) pairs tested.
    pub pairs: usize,
    pub violations: usize,
    /// max |ω(e)| / ((35/ϑ) ∫|ω|) over pairs with nonzero right side.
    pub worst_ratio: f64,
}

const DIRECTIONS: usize = 64;
const THETAS: usize = 16;
const QUAD_SAMPLES: usize = 256;

/// Trapezoid rule for ∫_{ϑ/5}^{ϑ} |ω(e'(t))| dt, e' turned clockwise by t.
fn omega_integral(body: &PlanarSupport, r: f64, angle: f64, theta: f64) -> f64 {
    let (a, b) = (theta / 5.0, theta);
    let step = (b - a) / (QUAD_SAMPLES - 1) as f64;
    let mut sum = 0.0;
    for i in 0..QUAD_SAMPLES {
        let w = if i == 0 || i == QUAD_SAMPLES - 1 { 0.5 } else { 1.0 };
        sum += w * (body.support(angle - (a + step * i as f64)) - r).abs();
    }
    sum * step
}

fn check_body(body: &PlanarSupport) -> Fl5Stats {
    let hs: Vec<f64> = (0..2048).map(|i| body.support(PI * i as f64 / 2048.0)).collect();
    let (lo, hi) = hs.iter().fold((f64::INFINITY, 0.0_f64), |(l, h), v| (l.min(*v), h.max(*v)));
    let r = 0.5 * (lo + hi);
    let mut stats = Fl5Stats { bodies: 1, pairs: 0, violations: 0, worst_ratio: 0.0 };
    for d in 0..DIRECTIONS {
        let angle = PI * d as f64 / DIRECTIONS as f64;
        let h = body.support(angle);
        let omega = (h - r).abs();
        for j in 1..=THETAS {
            let theta = FRAC_PI_2 * j as f64 / (THETAS + 1) as f64;
            if h > r * theta.cos() {
                continue;
            }
            stats.pairs += 1;
            let rhs = 35.0 / theta * omega_integral(body, r, angle, theta);
            if omega > rhs {
                stats.violations += 1;
            }
            if rhs > 0.0 {
                stats.worst_ratio = stats.worst_ratio.max(omega / rhs);
            } else if omega > 0.0 {
                stats.worst_ratio = f64::INFINITY;
            }
        }
    }
    stats
}

/// Checks the inequality on `count` random planar bodies. R is the
/// fitted ball radius (max h + min h) / 2.
pub fn fl5_check(count: usize, seed: u64) -> Fl5Stats {
    let bodies: Vec<PlanarSupport> = {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| random_planar_support(&mut rng)).collect()
    };
    bodies.par_iter().map(check_body).reduce(
        || Fl5Stats { bodies: 0, pairs: 0, violations: 0, worst_ratio: 0.0 },
        |a, b| Fl5Stats {
            bodies: a.bodies + b.bodies,
            pairs: a.pairs + b.pairs,
            violations: a.violations + b.violations,
            worst_ratio: a.worst_ratio.max(b.worst_ratio),
        },
    )
}
