//! Radon curves: symmetric planar bodies with h(θ) ρ(θ + π/2) constant.
//!
//! The first quadrant is given by a support arc
//! h(ψ) = 1 + Σ_j a_j cos(2jψ), ψ ∈ [0, π/2]. The second quadrant is the
//! polar of that arc turned by π/2 and scaled by c = h(0) h(π/2), which
//! makes the product identity exact. The two pieces meet C¹ automatically;
//! C² needs equal curvature radii at the junctions, which is one scalar
//! equation on the coefficients and is enforced by projection.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use crate::body::{ConvexBody, Shape};
use crate::error::{Error, Result};
use crate::sphere::{Point, SphericalGrid};

/// Samples of h + h'' checked on the arc.
const ARC_CHECK_SAMPLES: usize = 4096;
const MAX_BAND: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct RadonArc {
    /// a_1, a_2, ... after projection.
    coeffs: Vec<f64>,
    c: f64,
}

impl RadonArc {
    /// Projects `raw` onto the C² matching surface (minimum-norm Newton
    /// steps) and checks convexity of the arc.
    pub fn new(raw: &[f64]) -> Result<Self> {
        if raw.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidArgument("arc coefficients must be finite".into()));
        }
        let mut a = raw.to_vec();
        for _ in 0..50 {
            let (f, grad) = matching_defect(&a);
            let g2: f64 = grad.iter().map(|g| g * g).sum();
            if f.abs() < 1e-15 || g2 == 0.0 {
                break;
            }
            for (ai, gi) in a.iter_mut().zip(&grad) {
                *ai -= f * gi / g2;
            }
        }
        let (f, _) = matching_defect(&a);
        if f.abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("arc matching condition not attainable (defect {f:.3e})")));
        }
        let arc = Self { c: 0.0, coeffs: a };
        let c = arc.h(0.0) * arc.h(FRAC_PI_2);
        let arc = Self { c, ..arc };
        for i in 0..=ARC_CHECK_SAMPLES {
            let psi = FRAC_PI_2 * i as f64 / ARC_CHECK_SAMPLES as f64;
            let (h, _, h2) = arc.derivs(psi);
            if !(h > 0.0) || !(h + h2 > 0.0) {
                return Err(Error::NonConvexArc { angle: psi, value: if h > 0.0 { h + h2 } else { h } });
            }
        }
        Ok(arc)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// The constant h(θ) ρ(θ + π/2).
    pub fn product_constant(&self) -> f64 {
        self.c
    }

    fn derivs(&self, psi: f64) -> (f64, f64, f64) {
        let (mut h, mut d1, mut d2) = (1.0, 0.0, 0.0);
        for (j, a) in self.coeffs.iter().enumerate() {
            let w = 2.0 * (j + 1) as f64;
            let (s, c) = (w * psi).sin_cos();
            h += a * c;
            d1 -= a * w * s;
            d2 -= a * w * w * c;
        }
        (h, d1, d2)
    }

    pub fn h(&self, psi: f64) -> f64 {
        self.derivs(psi).0
    }

    /// Radial function of the arc at polar angle φ ∈ [0, π/2]: the boundary
    /// point with normal ψ lies at angle ψ + atan(h'/h), monotone in ψ.
    pub fn arc_radial(&self, phi: f64) -> f64 {
        let angle = |psi: f64| {
            let (h, d1, _) = self.derivs(psi);
            psi + d1.atan2(h)
        };
        let (mut lo, mut hi) = (0.0, FRAC_PI_2);
        let mut psi = phi.clamp(lo, hi);
        for _ in 0..100 {
            let g = angle(psi) - phi;
            if g.abs() < 1e-15 {
                break;
            }
            if g > 0.0 {
                hi = psi;
            } else {
                lo = psi;
            }
            let (h, d1, d2) = self.derivs(psi);
            let dg = h * (h + d2) / (h * h + d1 * d1);
            let next = psi - g / dg;
            psi = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
            if hi - lo < 1e-16 {
                break;
            }
        }
        let (h, d1, _) = self.derivs(psi);
        h.hypot(d1)
    }
}

/// F(a) = R(0) R(π/2) - h(0) h(π/2) and its gradient, R = h + h''.
fn matching_defect(a: &[f64]) -> (f64, Vec<f64>) {
    let (mut h0, mut h1, mut r0, mut r1) = (1.0, 1.0, 1.0, 1.0);
    let mut dh0 = Vec::with_capacity(a.len());
    let mut dh1 = Vec::with_capacity(a.len());
    let mut dr0 = Vec::with_capacity(a.len());
    let mut dr1 = Vec::with_capacity(a.len());
    for (i, ai) in a.iter().enumerate() {
        let j = (i + 1) as f64;
        let sign = if (i + 1) % 2 == 0 { 1.0 } else { -1.0 };
        let k = 1.0 - 4.0 * j * j;
        h0 += ai;
        h1 += sign * ai;
        r0 += ai * k;
        r1 += sign * ai * k;
        dh0.push(1.0);
        dh1.push(sign);
        dr0.push(k);
        dr1.push(sign * k);
    }
    let grad = (0..a.len()).map(|i| dr0[i] * r1 + r0 * dr1[i] - dh0[i] * h1 - h0 * dh1[i]).collect();
    (r0 * r1 - h0 * h1, grad)
}

/// Exact planar shape of a Radon curve.
#[derive(Debug, Clone)]
pub struct RadonShape {
    arc: Arc<RadonArc>,
}

impl RadonShape {
    pub fn new(arc: RadonArc) -> Self {
        Self { arc: Arc::new(arc) }
    }

    pub fn arc(&self) -> &RadonArc {
        &self.arc
    }
}

fn reduced_angle(u: &Point) -> f64 {
    u.y.atan2(u.x).rem_euclid(PI)
}

impl Shape for RadonShape {
    fn dim(&self) -> usize {
        2
    }

    fn radial(&self, u: &Point) -> f64 {
        let phi = reduced_angle(u);
        if phi <= FRAC_PI_2 {
            self.arc.arc_radial(phi)
        } else {
            self.arc.c / self.arc.h(phi - FRAC_PI_2)
        }
    }

    fn support(&self, u: &Point) -> f64 {
        let phi = reduced_angle(u);
        if phi <= FRAC_PI_2 {
            self.arc.h(phi)
        } else {
            self.arc.c / self.arc.arc_radial(phi - FRAC_PI_2)
        }
    }
}

/// Builds the Radon curve with arc coefficients `arc_coeffs` (a_1, a_2, ...).
pub fn radon_curve_build(grid: &Arc<SphericalGrid>, arc_coeffs: &[f64]) -> Result<ConvexBody> {
    if grid.dim() != 2 {
        return Err(Error::UnsupportedDimension(grid.dim()));
    }
    let shape = RadonShape::new(RadonArc::new(arc_coeffs)?);
    let band = grid.max_analysis_band().min(MAX_BAND);
    ConvexBody::from_shape(grid.clone(), band, Arc::new(shape))
}
