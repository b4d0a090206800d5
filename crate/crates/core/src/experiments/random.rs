//! Random test bodies.

use std::sync::Arc;

use nalgebra::Matrix2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::body::ConvexBody;
use crate::error::{Error, Result};
use crate::harmonics::{num_coeffs, degree_order, HarmonicCoeffs};
use crate::sphere::SphericalGrid;

/// Symmetric planar convex body given by an exact support function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PlanarSupport {
    /// conv(±v_i).
    Polygon(Vec<[f64; 2]>),
    /// Σ [-s_i, s_i].
    Zonotope(Vec<[f64; 2]>),
    /// M B², rows of M.
    Ellipse([[f64; 2]; 2]),
    /// Minkowski sum.
    Sum(Vec<PlanarSupport>),
}

impl PlanarSupport {
    /// h at the unit vector with angle `angle`.
    pub fn support(&self, angle: f64) -> f64 {
        let (s, c) = angle.sin_cos();
        let dot = |v: &[f64; 2]| v[0] * c + v[1] * s;
        match self {
            PlanarSupport::Polygon(vs) => vs.iter().map(|v| dot(v).abs()).fold(0.0, f64::max),
            PlanarSupport::Zonotope(ss) => ss.iter().map(|v| dot(v).abs()).sum(),
            PlanarSupport::Ellipse(m) => {
                let m = Matrix2::new(m[0][0], m[0][1], m[1][0], m[1][1]);
                (m.transpose() * nalgebra::Vector2::new(c, s)).norm()
            }
            PlanarSupport::Sum(parts) => parts.iter().map(|p| p.support(angle)).sum(),
        }
    }
}

fn random_vec<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> [f64; 2] {
    let r = rng.gen_range(lo..hi);
    let a = rng.gen_range(0.0..std::f64::consts::PI);
    [r * a.cos(), r * a.sin()]
}

/// Polygons, zonotopes, ellipses and sums of them, with a spread of
/// eccentricities from near-discs to thin bodies.
pub fn random_planar_support<R: Rng>(rng: &mut R) -> PlanarSupport {
    fn leaf<R: Rng>(rng: &mut R) -> PlanarSupport {
        match rng.gen_range(0..3) {
            0 => PlanarSupport::Polygon((0..rng.gen_range(2..10)).map(|_| random_vec(rng, 0.3, 1.5)).collect()),
            1 => PlanarSupport::Zonotope((0..rng.gen_range(2..7)).map(|_| random_vec(rng, 0.05, 1.0)).collect()),
            _ => {
                let a = random_vec(rng, 0.2, 1.5);
                let b = random_vec(rng, 0.2, 1.5);
                PlanarSupport::Ellipse([a, b])
            }
        }
    }
    if rng.gen_bool(0.3) {
        PlanarSupport::Sum((0..rng.gen_range(2..4)).map(|_| leaf(rng)).collect())
    } else {
        leaf(rng)
    }
}

/// Random even band-limited body with sup|ρ - 1| ≤ `delta` that passes
/// both convexity certificates. Amplitudes decay like m⁻²; the draw is
/// shrunk until it is convex.
pub fn random_near_ball<R: Rng>(
    rng: &mut R,
    grid: &Arc<SphericalGrid>,
    band_limit: usize,
    delta: f64,
) -> Result<ConvexBody> {
    let dim = grid.dim();
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1), got {delta}")));
    }
    let mut values = vec![0.0; num_coeffs(dim, band_limit)];
    for (i, v) in values.iter_mut().enumerate().skip(1) {
        let (m, _) = degree_order(dim, i);
        if m % 2 == 0 {
            *v = rng.gen_range(-1.0..1.0) / (m * m) as f64;
        }
    }
    let shape = HarmonicCoeffs::from_values(dim, band_limit, values)?;
    let field = crate::harmonics::synthesize(&shape, grid)?;
    let peak = field.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return ConvexBody::ball(grid.clone(), band_limit, 1.0);
    }
    let mut amp = delta * rng.gen_range(0.2..1.0) / peak;
    for _ in 0..30 {
        let mut rho = shape.scale(amp);
        rho.values_mut()[0] = 1.0;
        match ConvexBody::from_radial_coeffs(grid.clone(), rho) {
            Ok(b) => return Ok(b),
            Err(Error::NonConvex { .. }) | Err(Error::NonPositive { .. }) => amp *= 0.7,
            Err(e) => return Err(e),
        }
    }
    Err(Error::InvalidArgument("could not draw a convex near-ball body".into()))
}
