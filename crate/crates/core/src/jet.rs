//! Second-order jets (value, gradient, Hessian) of scalar functions on R^3.
//!
//! Only the operations needed by the solid-harmonic recurrences are provided:
//! products with coordinates, with |x|^2 and with other jets.

use nalgebra::Matrix3;
use std::ops::{Add, AddAssign, Mul, Sub};

use crate::sphere::Point;

/// Hessian entries are packed as xx, xy, xz, yy, yz, zz.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub g: [f64; 3],
    pub h: [f64; 6],
}

const PACK: [[usize; 3]; 3] = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];

impl Jet {
    pub const ZERO: Jet = Jet { v: 0.0, g: [0.0; 3], h: [0.0; 6] };

    pub fn constant(v: f64) -> Self {
        Jet { v, ..Jet::ZERO }
    }

    /// Jet of |x|^s at x.
    pub fn radial_power(x: &Point, s: f64) -> Self {
        let r2 = x.norm_squared();
        let r = r2.sqrt();
        let v = r.powf(s);
        let a = s * r.powf(s - 2.0);
        let b = s * (s - 2.0) * r.powf(s - 4.0);
        let xs = [x.x, x.y, x.z];
        let mut h = [0.0; 6];
        for i in 0..3 {
            for j in i..3 {
                h[PACK[i][j]] = b * xs[i] * xs[j] + if i == j { a } else { 0.0 };
            }
        }
        Jet { v, g: [a * xs[0], a * xs[1], a * xs[2]], h }
    }

    /// Product with the coordinate function x_k evaluated at `xk`.
    #[inline]
    pub fn mul_coord(&self, k: usize, xk: f64) -> Self {
        let mut out = Jet {
            v: xk * self.v,
            g: [xk * self.g[0], xk * self.g[1], xk * self.g[2]],
            h: [0.0; 6],
        };
        out.g[k] += self.v;
        for (o, h) in out.h.iter_mut().zip(&self.h) {
            *o = xk * h;
        }
        // + e_k g^T + g e_k^T
        for j in 0..3 {
            let idx = PACK[k][j];
            out.h[idx] += self.g[j];
            if j == k {
                out.h[idx] += self.g[j];
            }
        }
        out
    }

    /// Product with |x|^2.
    #[inline]
    pub fn mul_r2(&self, x: &Point) -> Self {
        let r2 = x.norm_squared();
        let xs = [x.x, x.y, x.z];
        let mut out = Jet {
            v: r2 * self.v,
            g: [0.0; 3],
            h: [0.0; 6],
        };
        for i in 0..3 {
            out.g[i] = r2 * self.g[i] + 2.0 * xs[i] * self.v;
        }
        for i in 0..3 {
            for j in i..3 {
                let idx = PACK[i][j];
                out.h[idx] = r2 * self.h[idx] + 2.0 * (xs[i] * self.g[j] + self.g[i] * xs[j]);
                if i == j {
                    out.h[idx] += 2.0 * self.v;
                }
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        out.v *= s;
        out.g.iter_mut().for_each(|x| *x *= s);
        out.h.iter_mut().for_each(|x| *x *= s);
        out
    }

    /// self += s * other
    #[inline]
    pub fn axpy(&mut self, s: f64, other: &Jet) {
        self.v += s * other.v;
        for i in 0..3 {
            self.g[i] += s * other.g[i];
        }
        for i in 0..6 {
            self.h[i] += s * other.h[i];
        }
    }

    pub fn recip(&self) -> Self {
        let inv = 1.0 / self.v;
        let inv2 = inv * inv;
        let inv3 = inv2 * inv;
        let mut out = Jet {
            v: inv,
            g: [-self.g[0] * inv2, -self.g[1] * inv2, -self.g[2] * inv2],
            h: [0.0; 6],
        };
        for i in 0..3 {
            for j in i..3 {
                let idx = PACK[i][j];
                out.h[idx] = -self.h[idx] * inv2 + 2.0 * self.g[i] * self.g[j] * inv3;
            }
        }
        out
    }

    pub fn gradient(&self) -> Point {
        Point::new(self.g[0], self.g[1], self.g[2])
    }

    pub fn hessian(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.h[PACK[i][j]])
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        self.axpy(1.0, &rhs);
        self
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        self.axpy(1.0, &rhs);
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Jet) -> Jet {
        self.axpy(-1.0, &rhs);
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let mut out = Jet {
            v: self.v * rhs.v,
            g: [0.0; 3],
            h: [0.0; 6],
        };
        for i in 0..3 {
            out.g[i] = self.v * rhs.g[i] + rhs.v * self.g[i];
        }
        for i in 0..3 {
            for j in i..3 {
                let idx = PACK[i][j];
                out.h[idx] = self.v * rhs.h[idx]
                    + rhs.v * self.h[idx]
                    + self.g[i] * rhs.g[j]
                    + rhs.g[i] * self.g[j];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coord(x: &Point, k: usize) -> Jet {
        Jet::constant(1.0).mul_coord(k, x[k])
    }

    fn finite_difference_check<F: Fn(&Point) -> Jet>(f: F, x: Point) {
        let j = f(&x);
        let eps = 1e-5;
        for k in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[k] += eps;
            xm[k] -= eps;
            let (fp, fm) = (f(&xp), f(&xm));
            let dg = (fp.v - fm.v) / (2.0 * eps);
            assert!((dg - j.g[k]).abs() < 1e-7, "grad {k}: {dg} vs {}", j.g[k]);
            for l in 0..3 {
                let dh = (fp.g[l] - fm.g[l]) / (2.0 * eps);
                assert!((dh - j.hessian()[(k, l)]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn products_match_finite_differences() {
        let x = Point::new(0.3, -0.7, 0.5);
        finite_difference_check(|p| coord(p, 0).mul_coord(1, p.y).mul_r2(p), x);
        finite_difference_check(|p| Jet::radial_power(p, -3.0) * coord(p, 2), x);
        finite_difference_check(|p| (Jet::constant(2.0) + coord(p, 0)).recip(), x);
        finite_difference_check(|p| Jet::radial_power(p, 1.0) - coord(p, 2).scale(0.5), x);
    }

    #[test]
    fn norm_hessian_at_pole() {
        // Hessian of |x| at e1 is diag(0, 1, 1).
        let j = Jet::radial_power(&Point::x(), 1.0);
        let h = j.hessian();
        assert!((h - Matrix3::from_diagonal(&Point::new(0.0, 1.0, 1.0))).norm() < 1e-15);
    }
}
