//! Exact pointwise descriptions of bodies. A [`ConvexBody`](super::ConvexBody)
//! samples one of these on its grid; linear maps compose exactly instead of
//! going through resampled data.

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::Matrix3;
use rayon::prelude::*;

use super::refine::{cosine_jet, extremize};
use crate::error::{Error, Result};
use crate::harmonics::HarmonicCoeffs;
use crate::operators::{min_eigenvalue, tangential_matrix_of_jet};
use crate::sphere::{Point, SphericalGrid};

/// Least eigenvalue accepted by the convexity certificates.
pub const CONVEXITY_TOLERANCE: f64 = -1e-8;

pub trait Shape: Send + Sync + Debug {
    fn dim(&self) -> usize;

    /// Radial function at a unit vector.
    fn radial(&self, u: &Point) -> f64;

    /// Support function at a unit vector.
    fn support(&self, u: &Point) -> f64;

    /// Support samples at the grid nodes; `radial` holds the radial samples.
    fn support_on(&self, grid: &SphericalGrid, _radial: &[f64]) -> Vec<f64> {
        grid.nodes().par_iter().map(|u| self.support(u)).collect()
    }

    /// Shape-specific convexity certificate evaluated on the grid.
    fn certify(&self, _grid: &SphericalGrid) -> Result<()> {
        Ok(())
    }

    /// `Some(M)` when the shape is the ellipsoid M B.
    fn ellipsoid_matrix(&self) -> Option<Matrix3<f64>> {
        None
    }
}

/// Band-limited radial function.
#[derive(Debug, Clone)]
pub struct Spectral {
    pub rho: HarmonicCoeffs,
}

impl Spectral {
    fn rho_jet(&self, x: &Point) -> crate::jet::Jet {
        self.rho.extension_jet(x, 0.0)
    }

    /// h(u) = max_v rho(v) <u, v>, refined from `seed`.
    pub fn support_from(&self, u: &Point, seed: &Point) -> f64 {
        let start = self.rho.eval(seed) * u.dot(seed);
        let (_, value) = extremize(self.rho.dim(), seed, |x| self.rho_jet(x) * cosine_jet(u, x), true);
        value.max(start)
    }

    /// Least eigenvalue of ∇²_S w + w Id for the gauge w = 1/rho at `u`.
    pub fn gauge_min_eigenvalue(&self, u: &Point) -> f64 {
        let w = self.rho_jet(u).recip();
        min_eigenvalue(self.rho.dim(), &tangential_matrix_of_jet(self.rho.dim(), u, &w))
    }
}

impl Shape for Spectral {
    fn dim(&self) -> usize {
        self.rho.dim()
    }

    fn radial(&self, u: &Point) -> f64 {
        self.rho.eval(u)
    }

    fn support(&self, u: &Point) -> f64 {
        self.support_from(u, u)
    }

    fn support_on(&self, grid: &SphericalGrid, radial: &[f64]) -> Vec<f64> {
        let nodes = grid.nodes();
        nodes
            .par_iter()
            .map(|u| {
                let (mut best, mut arg) = (f64::NEG_INFINITY, 0);
                for (j, (v, r)) in nodes.iter().zip(radial).enumerate() {
                    let val = r * u.dot(v);
                    if val > best {
                        best = val;
                        arg = j;
                    }
                }
                self.support_from(u, &nodes[arg])
            })
            .collect()
    }

    fn certify(&self, grid: &SphericalGrid) -> Result<()> {
        let (node, min) = grid
            .nodes()
            .par_iter()
            .enumerate()
            .map(|(i, u)| (i, self.gauge_min_eigenvalue(u)))
            .reduce(|| (0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        if min < CONVEXITY_TOLERANCE {
            return Err(Error::NonConvex { min_eigenvalue: min, node, max_t: None });
        }
        Ok(())
    }
}

/// The ellipsoid M B; for n = 2 only the leading 2x2 block is used.
#[derive(Debug, Clone)]
pub struct Ellipsoid {
    dim: usize,
    map: Matrix3<f64>,
    inverse: Matrix3<f64>,
}

impl Ellipsoid {
    pub fn new(dim: usize, map: Matrix3<f64>) -> Result<Self> {
        let map = planar_block(dim, map)?;
        let inverse = invert(&map)?;
        Ok(Self { dim, map, inverse })
    }

    pub fn map(&self) -> &Matrix3<f64> {
        &self.map
    }
}

impl Shape for Ellipsoid {
    fn dim(&self) -> usize {
        self.dim
    }

    fn radial(&self, u: &Point) -> f64 {
        1.0 / (self.inverse * u).norm()
    }

    fn support(&self, u: &Point) -> f64 {
        (self.map.transpose() * u).norm()
    }

    fn ellipsoid_matrix(&self) -> Option<Matrix3<f64>> {
        Some(self.map)
    }
}

/// The image `map * base`.
#[derive(Debug, Clone)]
pub struct LinearImage {
    base: Arc<dyn Shape>,
    map: Matrix3<f64>,
    inverse: Matrix3<f64>,
}

impl Shape for LinearImage {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn radial(&self, u: &Point) -> f64 {
        let v = self.inverse * u;
        let len = v.norm();
        self.base.radial(&(v / len)) / len
    }

    fn support(&self, u: &Point) -> f64 {
        let v = self.map.transpose() * u;
        let len = v.norm();
        len * self.base.support(&(v / len))
    }
}

/// Exact image of `base` under `map`; ellipsoids stay ellipsoids.
pub fn linear_image(base: Arc<dyn Shape>, map: &Matrix3<f64>) -> Result<Arc<dyn Shape>> {
    let dim = base.dim();
    let map = planar_block(dim, *map)?;
    if let Some(m) = base.ellipsoid_matrix() {
        return Ok(Arc::new(Ellipsoid::new(dim, map * m)?));
    }
    Ok(Arc::new(LinearImage { inverse: invert(&map)?, base, map }))
}

fn planar_block(dim: usize, mut map: Matrix3<f64>) -> Result<Matrix3<f64>> {
    if dim == 2 {
        if map[(0, 2)] != 0.0 || map[(1, 2)] != 0.0 || map[(2, 0)] != 0.0 || map[(2, 1)] != 0.0 {
            return Err(Error::InvalidArgument("planar map must not mix in the third axis".into()));
        }
        map[(2, 2)] = 1.0;
    }
    Ok(map)
}

fn invert(map: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    let det = map.determinant();
    if !(det.abs() > 1e-300) || !det.is_finite() {
        return Err(Error::InvalidArgument(format!("linear map is singular (det = {det:.3e})")));
    }
    map.try_inverse()
        .ok_or_else(|| Error::InvalidArgument("linear map is singular".into()))
}
