//! Local extremization on the sphere by Newton steps in the tangent plane.

use nalgebra::Matrix2;

use crate::jet::Jet;
use crate::sphere::{tangent_basis, Point};

const MAX_STEPS: usize = 60;
const MAX_STEP_LEN: f64 = 0.2;

fn frame(dim: usize, v: &Point) -> (Point, Option<Point>) {
    if dim == 2 {
        (Point::new(-v.y, v.x, 0.0), None)
    } else {
        let (e1, e2) = tangent_basis(v);
        (e1, Some(e2))
    }
}

/// Local extremum of a 0-homogeneous function given by its jet, starting at
/// `start`. Returns the extremal direction and value.
///
/// For a 0-homogeneous G, the Euclidean gradient at a unit vector is tangent
/// and the Euclidean Hessian restricted to the tangent plane is the
/// Riemannian Hessian, so no curvature correction is needed.
pub(crate) fn extremize<F: Fn(&Point) -> Jet>(dim: usize, start: &Point, f: F, maximize: bool) -> (Point, f64) {
    let sign = if maximize { -1.0 } else { 1.0 };
    let mut v = start.normalize();
    let mut best = f(&v);
    for _ in 0..MAX_STEPS {
        let jet = best;
        let grad = jet.gradient() * sign;
        let hess = jet.hessian() * sign;
        let (e1, e2) = frame(dim, &v);
        let step = match e2 {
            None => {
                let g = e1.dot(&grad);
                let h = (e1.transpose() * hess * e1)[(0, 0)];
                let s = if h > 0.0 { -g / h } else { -g };
                e1 * s.clamp(-MAX_STEP_LEN, MAX_STEP_LEN)
            }
            Some(e2) => {
                let g = [e1.dot(&grad), e2.dot(&grad)];
                let q = |a: &Point, b: &Point| (a.transpose() * hess * b)[(0, 0)];
                let h = Matrix2::new(q(&e1, &e1), q(&e1, &e2), q(&e2, &e1), q(&e2, &e2));
                let h = (h + h.transpose()) * 0.5;
                let (mut s1, mut s2) = (-g[0], -g[1]);
                if h[(0, 0)] > 0.0 && h.determinant() > 0.0 {
                    let det = h.determinant();
                    s1 = -(h[(1, 1)] * g[0] - h[(0, 1)] * g[1]) / det;
                    s2 = -(h[(0, 0)] * g[1] - h[(1, 0)] * g[0]) / det;
                }
                let len = (s1 * s1 + s2 * s2).sqrt();
                let scale = if len > MAX_STEP_LEN { MAX_STEP_LEN / len } else { 1.0 };
                (e1 * s1 + e2 * s2) * scale
            }
        };
        let len = step.norm();
        let candidate = (v + step).normalize();
        let cj = f(&candidate);
        // Accept only non-worsening steps; halve otherwise.
        if sign * cj.v <= sign * best.v + 1e-15 * best.v.abs() {
            v = candidate;
            best = cj;
        } else {
            let mut t = 0.5;
            let mut accepted = false;
            while t > 1e-6 {
                let c = (v + step * t).normalize();
                let j = f(&c);
                if sign * j.v <= sign * best.v {
                    v = c;
                    best = j;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if len < 1e-13 {
            break;
        }
    }
    (v, best.v)
}

/// Jet of x -> <a, x> / |x| (0-homogeneous).
pub(crate) fn cosine_jet(a: &Point, x: &Point) -> Jet {
    let lin = Jet { v: a.dot(x), g: [a.x, a.y, a.z], h: [0.0; 6] };
    lin * Jet::radial_power(x, -1.0)
}
