//! Quadrature grids on S^1 and S^2, normalized integration, great circles
//! and spherical caps.
//!
//! Points are stored as [`Point`] (a 3-vector) in both dimensions; on S^1 the
//! third coordinate is identically zero.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::Vector3;

use crate::error::{Error, Result};

pub type Point = Vector3<f64>;

/// Quadrature rule on S^{n-1} for the probability measure sigma.
#[derive(Debug)]
pub struct SphericalGrid {
    dim: usize,
    resolution: usize,
    nodes: Vec<Point>,
    weights: Vec<f64>,
    antipode: Vec<usize>,
    band_limit_exact: usize,
    spacing: f64,
    pairs: OnceLock<Vec<(u32, u32)>>,
}

impl SphericalGrid {
    /// Builds the standard grid.
    ///
    /// n = 3: `resolution` Gauss-Legendre nodes in cos(colatitude) times
    /// `2 * resolution` equispaced longitudes, exact through degree
    /// `2 * resolution - 1`. n = 2: `resolution` equispaced angles (must be
    /// even for antipodal closure), exact through degree `resolution - 1`.
    pub fn new(dim: usize, resolution: usize) -> Result<Self> {
        if resolution < 4 {
            return Err(Error::InvalidArgument(format!(
                "grid resolution must be >= 4, got {resolution}"
            )));
        }
        match dim {
            2 => Self::circle(resolution),
            3 => Self::gauss_legendre(resolution),
            other => Err(Error::UnsupportedDimension(other)),
        }
    }

    fn circle(count: usize) -> Result<Self> {
        if count % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "circle grid needs an even node count for antipodal closure, got {count}"
            )));
        }
        let nodes = (0..count)
            .map(|j| {
                let phi = 2.0 * PI * j as f64 / count as f64;
                Point::new(phi.cos(), phi.sin(), 0.0)
            })
            .collect();
        let antipode = (0..count).map(|j| (j + count / 2) % count).collect();
        Ok(Self {
            dim: 2,
            resolution: count,
            nodes,
            weights: vec![1.0 / count as f64; count],
            antipode,
            band_limit_exact: count - 1,
            spacing: 2.0 * PI / count as f64,
            pairs: OnceLock::new(),
        })
    }

    fn gauss_legendre(n_lat: usize) -> Result<Self> {
        let (z, w) = gauss_legendre_rule(n_lat);
        let n_lon = 2 * n_lat;
        let mut nodes = Vec::with_capacity(n_lat * n_lon);
        let mut weights = Vec::with_capacity(n_lat * n_lon);
        let mut antipode = Vec::with_capacity(n_lat * n_lon);
        for i in 0..n_lat {
            let s = (1.0 - z[i] * z[i]).max(0.0).sqrt();
            for j in 0..n_lon {
                let phi = PI * j as f64 / n_lat as f64;
                nodes.push(Point::new(s * phi.cos(), s * phi.sin(), z[i]));
                weights.push(w[i]);
                antipode.push((n_lat - 1 - i) * n_lon + (j + n_lat) % n_lon);
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        // Longitudes phi_j and phi_j + pi are both on the lattice, so the
        // antipode of a node is exactly the mirrored node up to rounding of
        // sin/cos; force bitwise antipodal pairs.
        for idx in 0..nodes.len() {
            let a = antipode[idx];
            if a > idx {
                nodes[a] = -nodes[idx];
            }
        }
        Ok(Self {
            dim: 3,
            resolution: n_lat,
            nodes,
            weights,
            antipode,
            band_limit_exact: 2 * n_lat - 1,
            spacing: PI / n_lat as f64,
            pairs: OnceLock::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Index of the node at -u for every node u.
    pub fn antipodes(&self) -> &[usize] {
        &self.antipode
    }

    /// Maximal polynomial degree integrated exactly.
    pub fn band_limit_exact(&self) -> usize {
        self.band_limit_exact
    }

    /// Largest band limit that can be analyzed without aliasing.
    pub fn max_analysis_band(&self) -> usize {
        self.band_limit_exact / 2
    }

    /// Nominal angular spacing between neighbouring nodes.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Sum of w_i f_i.
    pub fn integrate(&self, field: &[f64]) -> Result<f64> {
        self.check_len(field)?;
        Ok(self.weights.iter().zip(field).map(|(w, f)| w * f).sum())
    }

    /// Weighted inner product of two fields.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        self.check_len(a)?;
        self.check_len(b)?;
        Ok(self
            .weights
            .iter()
            .zip(a.iter().zip(b))
            .map(|(w, (x, y))| w * x * y)
            .sum())
    }

    /// L^2(sigma) norm of a sampled field.
    pub fn l2_norm(&self, field: &[f64]) -> Result<f64> {
        Ok(self.inner(field, field)?.sqrt())
    }

    pub fn sample<F: Fn(&Point) -> f64>(&self, f: F) -> Vec<f64> {
        self.nodes.iter().map(f).collect()
    }

    pub(crate) fn check_len(&self, field: &[f64]) -> Result<()> {
        if field.len() != self.nodes.len() {
            return Err(Error::LengthMismatch {
                expected: self.nodes.len(),
                found: field.len(),
            });
        }
        Ok(())
    }

    /// Node pairs closer than `4 * spacing` in geodesic distance.
    pub fn neighbour_pairs(&self) -> &[(u32, u32)] {
        self.pairs.get_or_init(|| {
            let cos_cut = (4.0 * self.spacing).min(PI).cos();
            let mut pairs = Vec::new();
            for i in 0..self.nodes.len() {
                for j in (i + 1)..self.nodes.len() {
                    if self.nodes[i].dot(&self.nodes[j]) >= cos_cut {
                        pairs.push((i as u32, j as u32));
                    }
                }
            }
            pairs
        })
    }

    /// Indices of nodes in the closed cap { u : <center, u> >= cos(radius) }.
    pub fn cap_nodes(&self, center: &Point, radius_angle: f64) -> Vec<usize> {
        let c = center.normalize();
        let threshold = radius_angle.cos() - 1e-12;
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, u)| c.dot(u) >= threshold)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Gauss-Legendre nodes (descending) and weights on [-1, 1], mirrored so the
/// rule is exactly symmetric.
pub fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let step = p / d;
            z -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

/// Equispaced samples of the great subsphere orthogonal to `pole`.
#[derive(Debug, Clone)]
pub struct GreatCircle {
    pub pole: Point,
    pub samples: Vec<Point>,
    pub weights: Vec<f64>,
}

/// Samples S^{n-1} ∩ pole^⊥. For n = 2 this is the antipodal pair and
/// `count` is ignored.
pub fn great_circle(dim: usize, pole: &Point, count: usize) -> Result<GreatCircle> {
    let norm = pole.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::InvalidArgument("pole must be a nonzero vector".into()));
    }
    let p = pole / norm;
    match dim {
        2 => {
            let t = Point::new(-p.y, p.x, 0.0);
            Ok(GreatCircle {
                pole: p,
                samples: vec![t, -t],
                weights: vec![0.5, 0.5],
            })
        }
        3 => {
            if count < 4 {
                return Err(Error::InvalidArgument(format!(
                    "great circle needs at least 4 samples, got {count}"
                )));
            }
            let (e1, e2) = tangent_basis(&p);
            let samples = (0..count)
                .map(|j| {
                    let a = 2.0 * PI * j as f64 / count as f64;
                    e1 * a.cos() + e2 * a.sin()
                })
                .collect();
            Ok(GreatCircle {
                pole: p,
                samples,
                weights: vec![1.0 / count as f64; count],
            })
        }
        other => Err(Error::UnsupportedDimension(other)),
    }
}

/// Orthonormal basis of the plane orthogonal to the unit vector `p` (n = 3).
pub fn tangent_basis(p: &Point) -> (Point, Point) {
    let a = if p.x.abs() <= p.y.abs() && p.x.abs() <= p.z.abs() {
        Point::x()
    } else if p.y.abs() <= p.z.abs() {
        Point::y()
    } else {
        Point::z()
    };
    let e1 = (a - p * p.dot(&a)).normalize();
    let e2 = p.cross(&e1);
    (e1, e2)
}

/// Area of S^{n-1} for the unnormalized surface measure.
pub fn sphere_area(dim: usize) -> f64 {
    match dim {
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        n => {
            let h = n as f64 / 2.0;
            2.0 * PI.powf(h) / gamma(h)
        }
    }
}

/// Volume of the unit ball in R^k.
pub fn ball_volume(k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        k => sphere_area(k) / k as f64,
    }
}

fn gamma(x: f64) -> f64 {
    // Half-integer and integer arguments only.
    if (x - x.round()).abs() < 1e-12 {
        (1..x.round() as usize).map(|k| k as f64).product()
    } else {
        let mut v = PI.sqrt();
        let mut a = 0.5;
        while a < x - 1e-12 {
            v *= a;
            a += 1.0;
        }
        v
    }
}
