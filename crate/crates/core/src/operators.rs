//! Diagonal and nonlinear operators on S^{n-1}: the Funk (spherical Radon)
//! transform, the Laplacian of the 1-homogeneous extension and its inverse,
//! the Monge-Ampere operator A, the remainder P and the spherical maximal
//! function.

use nalgebra::{Matrix2, Matrix3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonics::{analyze, synthesize, HarmonicCoeffs};
use crate::jet::Jet;
use crate::sphere::{great_circle, tangent_basis, Point, SphericalGrid};

/// Odd energy tolerated before an even-only operator rejects its input.
const ODD_TOLERANCE: f64 = 1e-10;

/// Multiplier of the Funk transform on degree-m harmonics:
/// `(-1)^{m/2} 1*3*...*(m-1) / ((n-1)(n+1)...(n+m-3))`, and 1 at m = 0.
pub fn funk_multiplier(m: usize, n: usize) -> Result<f64> {
    if m % 2 == 1 {
        return Err(Error::InvalidArgument(format!(
            "Funk multiplier is defined on even degrees only, got m = {m}"
        )));
    }
    if n < 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    let mut value = 1.0;
    for j in (2..=m).step_by(2) {
        value *= -((j - 1) as f64) / ((n + j - 3) as f64);
    }
    Ok(value)
}

/// Multiplier `(1 - m)(m + n - 1)` of the Laplacian of the 1-homogeneous
/// extension restricted to the sphere.
pub fn laplace_multiplier(m: usize, n: usize) -> f64 {
    (1.0 - m as f64) * ((m + n) as f64 - 1.0)
}

/// Per-degree multiplier table of a diagonal operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpectrum {
    pub dim: usize,
    pub name: String,
    pub multipliers: Vec<f64>,
}

impl OperatorSpectrum {
    /// Funk transform; odd degrees carry multiplier 0.
    pub fn funk(n: usize, band_limit: usize) -> Result<Self> {
        let multipliers = (0..=band_limit)
            .map(|m| if m % 2 == 0 { funk_multiplier(m, n) } else { Ok(0.0) })
            .collect::<Result<_>>()?;
        Ok(Self { dim: n, name: "funk".into(), multipliers })
    }

    pub fn laplace(n: usize, band_limit: usize) -> Self {
        Self {
            dim: n,
            name: "laplace".into(),
            multipliers: (0..=band_limit).map(|m| laplace_multiplier(m, n)).collect(),
        }
    }

    pub fn band_limit(&self) -> usize {
        self.multipliers.len().saturating_sub(1)
    }

    pub fn multiplier(&self, m: usize) -> f64 {
        self.multipliers.get(m).copied().unwrap_or(0.0)
    }

    /// Degree-wise application; degrees beyond the table are annihilated.
    pub fn apply(&self, coeffs: &HarmonicCoeffs) -> HarmonicCoeffs {
        coeffs.map_degrees(|m| self.multiplier(m))
    }

    /// max |mu_m| over the table, with the maximizing degree.
    pub fn max_abs(&self) -> (usize, f64) {
        self.multipliers
            .iter()
            .enumerate()
            .fold((0, 0.0), |(bm, bv), (m, v)| if v.abs() > bv { (m, v.abs()) } else { (bm, bv) })
    }

    /// Strong contraction on the tabulated range: every |mu_m| < 1 and the
    /// tail is decaying.
    pub fn is_strong_contraction(&self) -> bool {
        let (_, max) = self.max_abs();
        let tail = self.multipliers.len() / 2;
        let tail_max = self.multipliers[tail..].iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        max < 1.0 && tail_max <= max
    }
}

fn reject_odd(coeffs: &HarmonicCoeffs, operator: &'static str) -> Result<()> {
    let odd = coeffs.odd_energy();
    if odd > ODD_TOLERANCE * coeffs.l2_norm().max(1.0) {
        return Err(Error::OddInput { operator, odd_energy: odd });
    }
    Ok(())
}

/// Funk transform of an even band-limited function, degree by degree.
pub fn funk_spectral(coeffs: &HarmonicCoeffs) -> Result<HarmonicCoeffs> {
    reject_odd(coeffs, "Funk transform")?;
    let spectrum = OperatorSpectrum::funk(coeffs.dim(), coeffs.band_limit())?;
    Ok(spectrum.apply(coeffs))
}

/// Average of `f` over S^{n-1} ∩ theta^⊥ using `count` equispaced samples.
pub fn funk_at<F: Fn(&Point) -> f64>(dim: usize, f: F, theta: &Point, count: usize) -> Result<f64> {
    let circle = great_circle(dim, theta, count)?;
    Ok(circle.samples.iter().zip(&circle.weights).map(|(s, w)| w * f(s)).sum())
}

/// Funk transform at every node by direct great-circle averaging. The field
/// is interpolated spectrally (analysis at `band_limit`, then synthesis on the
/// circle samples).
pub fn funk_quadrature(
    grid: &SphericalGrid,
    field: &[f64],
    band_limit: usize,
    circle_count: usize,
) -> Result<Vec<f64>> {
    let coeffs = analyze(grid, field, band_limit)?;
    let dim = grid.dim();
    // Validate once so the parallel map cannot fail.
    great_circle(dim, &grid.nodes()[0], circle_count)?;
    Ok(grid
        .nodes()
        .par_iter()
        .map(|theta| {
            let circle = great_circle(dim, theta, circle_count).expect("validated above");
            let values = crate::harmonics::synthesize_at(&coeffs, &circle.samples);
            values.iter().zip(&circle.weights).map(|(v, w)| v * w).sum()
        })
        .collect())
}

/// Solves Δ̃F = gamma spectrally: division by `(1 - m)(m + n - 1)`.
pub fn laplace_solve(gamma: &HarmonicCoeffs) -> Result<HarmonicCoeffs> {
    if gamma.degree_norm(1) > ODD_TOLERANCE {
        return Err(Error::InvalidArgument(
            "degree-1 component is in the kernel of the Laplace multiplier".into(),
        ));
    }
    reject_odd(gamma, "Laplace inversion")?;
    let n = gamma.dim();
    Ok(gamma.even_part().map_degrees(|m| {
        if m % 2 == 1 {
            0.0
        } else {
            1.0 / laplace_multiplier(m, n)
        }
    }))
}

pub fn laplace_apply(phi: &HarmonicCoeffs) -> HarmonicCoeffs {
    let n = phi.dim();
    phi.map_degrees(|m| laplace_multiplier(m, n))
}

/// Hessian of the 1-homogeneous extension of `h` at the unit vector `u`.
/// For n = 2 the 2x2 block is the meaningful part.
pub fn ambient_hessian(h: &HarmonicCoeffs, u: &Point) -> Matrix3<f64> {
    h.extension_jet(u, 1.0).hessian()
}

/// Sum of the n principal (n-1)x(n-1) minors of the leading n x n block.
pub fn sum_principal_minors(hess: &Matrix3<f64>, n: usize) -> f64 {
    match n {
        2 => hess[(0, 0)] + hess[(1, 1)],
        _ => {
            let minor = |a: usize, b: usize| hess[(a, a)] * hess[(b, b)] - hess[(a, b)] * hess[(b, a)];
            minor(1, 2) + minor(0, 2) + minor(0, 1)
        }
    }
}

/// A h at a single unit vector, from the ambient Hessian.
pub fn monge_ampere_at(h: &HarmonicCoeffs, u: &Point) -> f64 {
    sum_principal_minors(&ambient_hessian(h, u), h.dim())
}

fn check_positive(grid: &SphericalGrid, h: &HarmonicCoeffs, what: &'static str) -> Result<Vec<f64>> {
    let values = synthesize(h, grid)?;
    if let Some((node, value)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NonPositive { what, value: *value, node });
    }
    Ok(values)
}

/// Monge-Ampere operator: sum of principal minors of the Hessian of the
/// 1-homogeneous extension, at every node.
pub fn monge_ampere(grid: &SphericalGrid, h: &HarmonicCoeffs) -> Result<Vec<f64>> {
    check_positive(grid, h, "support function")?;
    Ok(grid.nodes().par_iter().map(|u| monge_ampere_at(h, u)).collect())
}

/// The matrix ∇²_S h + h Id in an orthonormal tangent basis at u (n - 1
/// square; for n = 2 only entry (0, 0) is used).
pub fn tangential_matrix(h: &HarmonicCoeffs, u: &Point) -> Matrix2<f64> {
    tangential_matrix_of_jet(h.dim(), u, &h.extension_jet(u, 0.0))
}

/// Same as [`tangential_matrix`] from the jet of a 0-homogeneous extension.
pub fn tangential_matrix_of_jet(dim: usize, u: &Point, jet: &Jet) -> Matrix2<f64> {
    let hess = jet.hessian();
    if dim == 2 {
        let t = Point::new(-u.y, u.x, 0.0);
        let v = (t.transpose() * hess * t)[(0, 0)] + jet.v;
        Matrix2::new(v, 0.0, 0.0, 0.0)
    } else {
        let (e1, e2) = tangent_basis(u);
        let q = |a: &Point, b: &Point| (a.transpose() * hess * b)[(0, 0)];
        Matrix2::new(q(&e1, &e1) + jet.v, q(&e1, &e2), q(&e2, &e1), q(&e2, &e2) + jet.v)
    }
}

/// Least eigenvalue of a tangential matrix (only entry (0, 0) for n = 2).
pub fn min_eigenvalue(dim: usize, m: &Matrix2<f64>) -> f64 {
    if dim == 2 {
        m[(0, 0)]
    } else {
        let tr = m[(0, 0)] + m[(1, 1)];
        let off = 0.5 * (m[(0, 1)] + m[(1, 0)]);
        let diff = m[(0, 0)] - m[(1, 1)];
        0.5 * tr - (0.25 * diff * diff + off * off).sqrt()
    }
}

/// det(∇²_S h + h Id) at every node; the curvature-function form of A h.
pub fn monge_ampere_tangential(grid: &SphericalGrid, h: &HarmonicCoeffs) -> Result<Vec<f64>> {
    check_positive(grid, h, "support function")?;
    let dim = grid.dim();
    Ok(grid
        .nodes()
        .par_iter()
        .map(|u| {
            let m = tangential_matrix(h, u);
            if dim == 2 {
                m[(0, 0)]
            } else {
                m.determinant()
            }
        })
        .collect())
}

/// Least eigenvalue of ∇²_S h + h Id.
pub fn tangential_min_eigenvalue(h: &HarmonicCoeffs, u: &Point) -> f64 {
    min_eigenvalue(h.dim(), &tangential_matrix(h, u))
}

/// P(Φ) = A(1 + φ) - 1 - Δ̃φ at every node.
pub fn ma_remainder(grid: &SphericalGrid, phi: &HarmonicCoeffs) -> Result<Vec<f64>> {
    let mut one_plus = phi.clone();
    one_plus.values_mut()[0] += 1.0;
    let a = monge_ampere(grid, &one_plus)?;
    let lap = synthesize(&laplace_apply(phi), grid)?;
    Ok(a.iter().zip(&lap).map(|(a, l)| a - 1.0 - l).collect())
}

/// Geometric ladder of 32 cap radii from the grid spacing to pi.
pub fn maximal_ladder(grid: &SphericalGrid) -> Vec<f64> {
    let lo = grid.spacing();
    let hi = std::f64::consts::PI;
    (0..32).map(|j| lo * (hi / lo).powf(j as f64 / 31.0)).collect()
}

/// Average of |f| over the closed cap of angular radius `radius` at `center`.
pub fn cap_average(grid: &SphericalGrid, field: &[f64], center: &Point, radius: f64) -> Result<f64> {
    grid.check_len(field)?;
    let idx = grid.cap_nodes(center, radius);
    let w = grid.weights();
    let (num, den) = idx.iter().fold((0.0, 0.0), |(n, d), &i| (n + w[i] * field[i].abs(), d + w[i]));
    Ok(if den > 0.0 { num / den } else { 0.0 })
}

/// Spherical maximal function on the node set, over the ladder of
/// [`maximal_ladder`] plus the single-node limit cap.
pub fn maximal_function(grid: &SphericalGrid, field: &[f64]) -> Result<Vec<f64>> {
    grid.check_len(field)?;
    let ladder = maximal_ladder(grid);
    let nodes = grid.nodes();
    let weights = grid.weights();
    Ok(nodes
        .par_iter()
        .enumerate()
        .map(|(i, e)| {
            let mut order: Vec<(f64, usize)> = nodes.iter().enumerate().map(|(j, u)| (e.dot(u), j)).collect();
            order.sort_by(|a, b| b.0.total_cmp(&a.0));
            let mut cum_f = Vec::with_capacity(order.len() + 1);
            let mut cum_w = Vec::with_capacity(order.len() + 1);
            let (mut sf, mut sw) = (0.0, 0.0);
            cum_f.push(0.0);
            cum_w.push(0.0);
            for &(_, j) in &order {
                sf += weights[j] * field[j].abs();
                sw += weights[j];
                cum_f.push(sf);
                cum_w.push(sw);
            }
            let mut best = field[i].abs();
            for &r in &ladder {
                let threshold = r.cos() - 1e-12;
                let count = order.partition_point(|(d, _)| *d >= threshold);
                if count > 0 {
                    best = best.max(cum_f[count] / cum_w[count]);
                }
            }
            best
        })
        .collect())
}
