//! Origin-symmetric convex bodies sampled on a spherical grid.

mod diagnostics;
mod refine;
pub mod shape;

use std::sync::Arc;

use nalgebra::{Matrix3, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use diagnostics::{
    linearization_constant, lipschitz_check, rain1_constant, LinearizationReport, LipschitzReport,
    Rain1Report,
};
pub use shape::{linear_image, Ellipsoid, LinearImage, Shape, Spectral, CONVEXITY_TOLERANCE};

use crate::error::{Error, Result};
use crate::harmonics::{analyze, synthesize, HarmonicCoeffs};
use crate::jet::Jet;
use crate::operators::{funk_at, funk_spectral, monge_ampere, tangential_min_eigenvalue};
use crate::sphere::{ball_volume, sphere_area, Point, SphericalGrid};
use refine::extremize;

/// Great-circle sample count for pointwise section volumes.
const SECTION_SAMPLES: usize = 512;
/// Relative antipodal mismatch tolerated (and then symmetrized away).
const SYMMETRY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct ConvexBody {
    grid: Arc<SphericalGrid>,
    band_limit: usize,
    shape: Arc<dyn Shape>,
    radial: Vec<f64>,
    support: Vec<f64>,
    radial_coeffs: HarmonicCoeffs,
    support_coeffs: HarmonicCoeffs,
}

/// Result of [`ConvexBody::hausdorff_ball_fit`]: `(1 - eps) r B ⊂ K ⊂ (1 + eps) r B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallFit {
    pub r: f64,
    pub eps: f64,
}

impl ConvexBody {
    /// Samples `shape` on `grid`, certifies it and caches support data.
    pub fn from_shape(grid: Arc<SphericalGrid>, band_limit: usize, shape: Arc<dyn Shape>) -> Result<Self> {
        if shape.dim() != grid.dim() {
            return Err(Error::InvalidArgument(format!(
                "shape dimension {} does not match grid dimension {}",
                shape.dim(),
                grid.dim()
            )));
        }
        if band_limit > grid.max_analysis_band() {
            return Err(Error::AliasingRisk { requested: band_limit, max: grid.max_analysis_band() });
        }
        let mut radial: Vec<f64> = grid.nodes().par_iter().map(|u| shape.radial(u)).collect();
        if let Some((node, value)) = radial.iter().enumerate().find(|(_, r)| !(**r > 0.0) || !r.is_finite()) {
            return Err(Error::NonPositive { what: "radial function", value: *value, node });
        }
        symmetrize(&grid, &mut radial)?;
        shape.certify(&grid)?;
        let mut support = shape.support_on(&grid, &radial);
        symmetrize(&grid, &mut support)?;
        for (h, r) in support.iter_mut().zip(&radial) {
            *h = h.max(*r);
        }
        let radial_coeffs = analyze(&grid, &radial, band_limit)?;
        let support_coeffs = analyze(&grid, &support, band_limit)?;
        let body = Self { grid, band_limit, shape, radial, support, radial_coeffs, support_coeffs };
        body.certify_support()?;
        Ok(body)
    }

    /// Body with band-limited radial function `rho`.
    pub fn from_radial_coeffs(grid: Arc<SphericalGrid>, rho: HarmonicCoeffs) -> Result<Self> {
        if rho.dim() != grid.dim() {
            return Err(Error::InvalidArgument("coefficient and grid dimensions differ".into()));
        }
        let odd = rho.odd_energy();
        if odd > 1e-12 * rho.l2_norm().max(1.0) {
            return Err(Error::NotSymmetric(odd));
        }
        let band = rho.band_limit();
        Self::from_shape(grid, band, Arc::new(Spectral { rho }))
    }

    pub fn ball(grid: Arc<SphericalGrid>, band_limit: usize, r: f64) -> Result<Self> {
        let dim = grid.dim();
        Self::from_radial_coeffs(grid, HarmonicCoeffs::constant(dim, band_limit, r))
    }

    /// The ellipsoid `map * B`.
    pub fn ellipsoid(grid: Arc<SphericalGrid>, band_limit: usize, map: Matrix3<f64>) -> Result<Self> {
        let dim = grid.dim();
        Self::from_shape(grid, band_limit, Arc::new(Ellipsoid::new(dim, map)?))
    }

    /// Axis-aligned ellipsoid with semi-axes `axes` (the third is ignored for n = 2).
    pub fn ellipsoid_axes(grid: Arc<SphericalGrid>, band_limit: usize, axes: [f64; 3]) -> Result<Self> {
        Self::ellipsoid(grid, band_limit, Matrix3::from_diagonal(&Point::from(axes)))
    }

    /// Radial function `1 + t Y_{m,k}`. On a certificate failure the error
    /// carries the largest admissible t found by bisection.
    pub fn perturbed_ball(
        grid: Arc<SphericalGrid>,
        band_limit: usize,
        m: usize,
        k: i64,
        t: f64,
    ) -> Result<Self> {
        let dim = grid.dim();
        let mut rho = HarmonicCoeffs::constant(dim, band_limit, 1.0);
        rho = rho.axpy(t, &HarmonicCoeffs::single(dim, band_limit, m, k, 1.0)?)?;
        match Self::from_radial_coeffs(grid.clone(), rho) {
            Err(Error::NonConvex { min_eigenvalue, node, .. }) | Err(Error::NonPositive { value: min_eigenvalue, node, .. }) => {
                let admissible = |s: f64| {
                    let mut c = HarmonicCoeffs::constant(dim, band_limit, 1.0);
                    c.set(m, k, s).expect("validated order");
                    let positive = synthesize(&c, &grid).map(|v| v.iter().all(|r| *r > 0.0)).unwrap_or(false);
                    positive && Spectral { rho: c }.certify(&grid).is_ok()
                };
                let (mut lo, mut hi) = (0.0, t);
                for _ in 0..40 {
                    let mid = 0.5 * (lo + hi);
                    if admissible(mid) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Err(Error::NonConvex { min_eigenvalue, node, max_t: Some(lo) })
            }
            other => other,
        }
    }

    /// Exact image under the linear map, resampled on the same grid.
    pub fn linear_image(&self, map: &Matrix3<f64>) -> Result<Self> {
        let shape = linear_image(self.shape.clone(), map)?;
        Self::from_shape(self.grid.clone(), self.band_limit, shape)
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        self.linear_image(&(Matrix3::identity() * s))
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn grid(&self) -> &Arc<SphericalGrid> {
        &self.grid
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn shape(&self) -> &Arc<dyn Shape> {
        &self.shape
    }

    pub fn radial(&self) -> &[f64] {
        &self.radial
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn radial_coeffs(&self) -> &HarmonicCoeffs {
        &self.radial_coeffs
    }

    pub fn support_coeffs(&self) -> &HarmonicCoeffs {
        &self.support_coeffs
    }

    pub fn radial_at(&self, u: &Point) -> f64 {
        self.shape.radial(&u.normalize())
    }

    pub fn support_at(&self, u: &Point) -> f64 {
        self.shape.support(&u.normalize())
    }

    /// Least eigenvalue of ∇²_S h + h Id over the nodes and where it occurs.
    pub fn support_min_eigenvalue(&self) -> (usize, f64) {
        self.grid
            .nodes()
            .par_iter()
            .enumerate()
            .map(|(i, u)| (i, tangential_min_eigenvalue(&self.support_coeffs, u)))
            .reduce(|| (0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
    }

    fn certify_support(&self) -> Result<()> {
        let (node, min) = self.support_min_eigenvalue();
        if min < CONVEXITY_TOLERANCE {
            return Err(Error::NonConvex { min_eigenvalue: min, node, max_t: None });
        }
        Ok(())
    }

    /// r = (max rho + min rho) / 2, eps = (max - min) / (max + min).
    pub fn hausdorff_ball_fit(&self) -> BallFit {
        let (lo, hi) = self.radial.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), r| (lo.min(*r), hi.max(*r)));
        BallFit { r: 0.5 * (hi + lo), eps: (hi - lo) / (hi + lo) }
    }

    /// ℛ[rho^p] at every node. Spectral for n = 3 (analysis at the body's
    /// band limit), exact quarter turn for n = 2.
    pub fn funk_radial_power(&self, p: f64) -> Result<Vec<f64>> {
        if self.dim() == 2 {
            return Ok(self
                .grid
                .nodes()
                .iter()
                .map(|u| self.shape.radial(&Point::new(-u.y, u.x, 0.0)).powf(p))
                .collect());
        }
        let powered: Vec<f64> = self.radial.iter().map(|r| r.powf(p)).collect();
        let coeffs = analyze(&self.grid, &powered, self.band_limit)?;
        synthesize(&funk_spectral(&coeffs)?, &self.grid)
    }

    /// vol_{n-1}(K ∩ theta^⊥) = c_n ℛ[rho^{n-1}](theta), by great-circle
    /// averaging of the exact radial function.
    pub fn section_volume(&self, theta: &Point) -> Result<f64> {
        let n = self.dim();
        let avg = funk_at(n, |u| self.shape.radial(u).powi(n as i32 - 1), theta, SECTION_SAMPLES)?;
        Ok(ball_volume(n - 1) * avg)
    }

    /// Section volumes at every node.
    pub fn section_volumes(&self) -> Result<Vec<f64>> {
        let n = self.dim();
        let c = ball_volume(n - 1);
        Ok(self.funk_radial_power((n - 1) as f64)?.into_iter().map(|v| c * v).collect())
    }

    /// Volume of the cone over K ∩ theta^⊥ with apex on the supporting hyperplane.
    pub fn cone_volume(&self, theta: &Point) -> Result<f64> {
        let n = self.dim() as f64;
        Ok(self.section_volume(theta)? * self.support_at(theta) / n)
    }

    /// Surface area: the integral of the curvature function A h.
    pub fn surface_area(&self) -> Result<f64> {
        let f = monge_ampere(&self.grid, &self.support_coeffs)?;
        Ok(sphere_area(self.dim()) * self.grid.integrate(&f)?)
    }

    /// Volume from the radial function: |S^{n-1}| / n * ∫ rho^n dσ.
    pub fn volume(&self) -> f64 {
        let n = self.dim();
        let f: Vec<f64> = self.radial.iter().map(|r| r.powi(n as i32)).collect();
        sphere_area(n) / n as f64 * self.grid.integrate(&f).expect("sample count matches")
    }

    /// Second moments ∫_K y_i y_j dy (leading n x n block).
    pub fn second_moments(&self) -> Matrix3<f64> {
        let n = self.dim();
        let scale = sphere_area(n) / (n + 2) as f64;
        let mut s = Matrix3::zeros();
        for ((u, r), w) in self.grid.nodes().iter().zip(&self.radial).zip(self.grid.weights()) {
            s += u * u.transpose() * (w * r.powi(n as i32 + 2));
        }
        s *= scale;
        if n == 2 {
            s[(2, 2)] = 1.0;
        }
        s
    }

    /// Returns T (det T = 1, symmetric positive) and the body T⁻¹ K, whose
    /// second-moment matrix is a multiple of the identity.
    pub fn isotropic_position(&self) -> Result<(Matrix3<f64>, ConvexBody)> {
        let n = self.dim();
        let s = self.second_moments();
        let det = s.determinant();
        if !(det > 1e-300) {
            return Err(Error::SingularMoment(det));
        }
        let normalized = s / det.powf(1.0 / n as f64);
        let t = sqrt_spd(&normalized);
        let t_inv = t.try_inverse().ok_or(Error::SingularMoment(det))?;
        Ok((t, self.linear_image(&t_inv)?))
    }

    /// ρ^p sampled at the nodes.
    pub fn radial_power(&self, p: f64) -> Vec<f64> {
        self.radial.iter().map(|r| r.powf(p)).collect()
    }
}

fn sqrt_spd(m: &Matrix3<f64>) -> Matrix3<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let d = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    eig.eigenvectors * Matrix3::from_diagonal(&d) * eig.eigenvectors.transpose()
}

fn symmetrize(grid: &SphericalGrid, values: &mut [f64]) -> Result<()> {
    let anti = grid.antipodes();
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut worst = 0.0_f64;
    for i in 0..values.len() {
        let j = anti[i];
        if j > i {
            worst = worst.max((values[i] - values[j]).abs());
            let avg = 0.5 * (values[i] + values[j]);
            values[i] = avg;
            values[j] = avg;
        }
    }
    if worst > SYMMETRY_TOLERANCE * scale {
        return Err(Error::NotSymmetric(worst));
    }
    Ok(())
}

/// Support samples of the body with band-limited radial function `rho`.
pub fn support_from_radial(grid: &SphericalGrid, rho: &HarmonicCoeffs) -> Result<Vec<f64>> {
    let radial = synthesize(rho, grid)?;
    Ok(Spectral { rho: rho.clone() }.support_on(grid, &radial))
}

/// rho(e) = inf over <e, e'> > 0 of h(e') / <e, e'>, seeded from the grid and
/// refined by Newton steps on the band-limited h.
pub fn radial_from_support(grid: &SphericalGrid, h: &HarmonicCoeffs) -> Result<Vec<f64>> {
    let values = synthesize(h, grid)?;
    if let Some((node, value)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NonPositive { what: "support function", value: *value, node });
    }
    let (node, min) = grid
        .nodes()
        .par_iter()
        .enumerate()
        .map(|(i, u)| (i, tangential_min_eigenvalue(h, u)))
        .reduce(|| (0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    if min < CONVEXITY_TOLERANCE {
        return Err(Error::NonConvex { min_eigenvalue: min, node, max_t: None });
    }
    let nodes = grid.nodes();
    let dim = grid.dim();
    Ok(nodes
        .par_iter()
        .map(|e| {
            let (mut best, mut arg) = (f64::INFINITY, 0);
            for (j, (v, hv)) in nodes.iter().zip(&values).enumerate() {
                let d = e.dot(v);
                if d > 0.1 && hv / d < best {
                    best = hv / d;
                    arg = j;
                }
            }
            let objective = |x: &Point| {
                let lin = Jet { v: e.dot(x), g: [e.x, e.y, e.z], h: [0.0; 6] };
                h.extension_jet(x, 0.0) * Jet::radial_power(x, 1.0) * lin.recip()
            };
            let (_, value) = extremize(dim, &nodes[arg], objective, false);
            value.min(best)
        })
        .collect())
}
