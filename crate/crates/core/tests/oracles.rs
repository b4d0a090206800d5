//! Closed-form and independent-oracle checks.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{Matrix3, Rotation3, Vector3};
use sphere_rigidity::body::ConvexBody;
use sphere_rigidity::experiments::{bp5_residual, bp8_residual, rigidity_scan_pair, scan_order, admissible_t_values, DEFAULT_T_VALUES};
use sphere_rigidity::harmonics::{analyze, synthesize, HarmonicCoeffs};
use sphere_rigidity::ma_solver::{contraction_rate, ma_solve, MaSolveOptions};
use sphere_rigidity::operators::{ma_remainder, monge_ampere, monge_ampere_at};
use sphere_rigidity::sphere::Point;
use sphere_rigidity::SphericalGrid;

fn grid(res: usize) -> Arc<SphericalGrid> {
    Arc::new(SphericalGrid::new(3, res).unwrap())
}

fn ellipsoid_h(axes: [f64; 3], u: &Point) -> f64 {
    (0..3).map(|i| (axes[i] * u[i]).powi(2)).sum::<f64>().sqrt()
}

#[test]
fn ellipsoid_curvature_function() {
    let axes = [1.1, 1.0, 0.9];
    let g = grid(48);
    let e = ConvexBody::ellipsoid_axes(g.clone(), 40, axes).unwrap();
    let a = monge_ampere(&g, e.support_coeffs()).unwrap();
    let det2 = (axes[0] * axes[1] * axes[2]).powi(2);
    let worst = g
        .nodes()
        .iter()
        .zip(&a)
        .map(|(u, v)| (v - det2 / ellipsoid_h(axes, u).powi(4)).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-5, "{worst:e}");
}

/// Surface area of a flat triangulation of the ellipsoid.
fn mesh_area(axes: [f64; 3], rings: usize, sectors: usize) -> f64 {
    let p = |i: usize, j: usize| {
        let th = PI * i as f64 / rings as f64;
        let ph = 2.0 * PI * j as f64 / sectors as f64;
        Vector3::new(axes[0] * th.sin() * ph.cos(), axes[1] * th.sin() * ph.sin(), axes[2] * th.cos())
    };
    let tri = |a: Vector3<f64>, b: Vector3<f64>, c: Vector3<f64>| 0.5 * (b - a).cross(&(c - a)).norm();
    let mut total = 0.0;
    for i in 0..rings {
        for j in 0..sectors {
            let (a, b, c, d) = (p(i, j), p(i + 1, j), p(i + 1, j + 1), p(i, j + 1));
            total += tri(a, b, c) + tri(a, c, d);
        }
    }
    total
}

#[test]
fn surface_area_against_mesh() {
    let axes = [1.2, 1.0, 0.8];
    // 125 x 200 quads = 50 000 triangles.
    let mesh = mesh_area(axes, 125, 200);
    let g = grid(40);
    let e = ConvexBody::ellipsoid_axes(g.clone(), 32, axes).unwrap();
    let s = e.surface_area().unwrap();
    assert!((s / mesh - 1.0).abs() < 1e-3, "{s} vs {mesh}");
    let ball = ConvexBody::ball(g, 8, 1.0).unwrap();
    assert!((ball.surface_area().unwrap() - 4.0 * PI).abs() < 1e-8);
}

#[test]
fn cone_volumes() {
    let g = grid(24);
    let ball = ConvexBody::ball(g.clone(), 8, 1.0).unwrap();
    assert!((ball.cone_volume(&Point::z()).unwrap() - PI / 3.0).abs() < 1e-10);
    // Ellipsoids satisfy BP5: the cone volume does not depend on the direction.
    let e = ConvexBody::ellipsoid_axes(g, 16, [1.1, 1.0, 0.9]).unwrap();
    let vols: Vec<f64> = [Point::x(), Point::y(), Point::new(1.0, 2.0, -0.5).normalize()]
        .iter()
        .map(|t| e.cone_volume(t).unwrap())
        .collect();
    for v in &vols {
        assert!((v / vols[0] - 1.0).abs() < 1e-8, "{vols:?}");
    }
}

#[test]
fn remainder_is_quadratic() {
    let g = grid(24);
    let phi = HarmonicCoeffs::single(3, 12, 4, 2, 1.0).unwrap();
    let norm = |t: f64| g.l2_norm(&ma_remainder(&g, &phi.scale(t)).unwrap()).unwrap();
    let ratio = norm(2e-3) / norm(1e-3);
    assert!((ratio / 4.0 - 1.0).abs() < 0.1, "{ratio}");

    // ‖P(a) - P(b)‖ ≤ C ‖a - b‖ (‖a‖ + ‖b‖) with a stable C.
    let mut cs = Vec::new();
    for s in 0..6 {
        let mut a = HarmonicCoeffs::zeros(3, 8);
        let mut b = HarmonicCoeffs::zeros(3, 8);
        for (i, (x, y)) in a.values_mut().iter_mut().zip(b.values_mut().iter_mut()).enumerate().skip(4) {
            let r = ((i * 7919 + s * 104729) % 1000) as f64 / 1000.0 - 0.5;
            let q = ((i * 6151 + s * 15485) % 1000) as f64 / 1000.0 - 0.5;
            *x = 1e-3 * r;
            *y = 1e-3 * q;
        }
        let (a, b) = (a.even_part(), b.even_part());
        let pa = ma_remainder(&g, &a).unwrap();
        let pb = ma_remainder(&g, &b).unwrap();
        let diff: Vec<f64> = pa.iter().zip(&pb).map(|(x, y)| x - y).collect();
        let lhs = g.l2_norm(&diff).unwrap();
        cs.push(lhs / (a.sub(&b).unwrap().l2_norm() * (a.l2_norm() + b.l2_norm())));
    }
    let max = cs.iter().cloned().fold(0.0, f64::max);
    let min = cs.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(max.is_finite() && max < 10.0 * min, "{cs:?}");
}

#[test]
fn monge_ampere_commutes_with_rotations() {
    let g = grid(24);
    let h = HarmonicCoeffs::from_triples(3, 8, [(0, 0, 1.0), (2, 1, 0.02), (4, -3, 0.01), (6, 2, 0.005)]).unwrap();
    let r = Rotation3::from_euler_angles(0.3, -1.1, 2.0);
    let rotated_samples: Vec<f64> = g.nodes().iter().map(|u| h.eval(&(r * u))).collect();
    let hr = analyze(&g, &rotated_samples, 8).unwrap();
    let a_rot = monge_ampere(&g, &hr).unwrap();
    let worst = g
        .nodes()
        .iter()
        .zip(&a_rot)
        .map(|(u, v)| (v - monge_ampere_at(&h, &(r * u))).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-6, "{worst:e}");
}

#[test]
fn ma_solver_recovers_ellipsoid() {
    let axes = [1.02, 1.0, 0.98];
    let g = grid(28);
    let band = 16;
    let e = ConvexBody::ellipsoid_axes(g.clone(), band, axes).unwrap();
    let rhs: Vec<f64> = e.funk_radial_power(2.0).unwrap().iter().map(|v| v.powi(4)).collect();
    let c = g.integrate(&rhs).unwrap();
    let target = analyze(&g, &rhs.iter().map(|v| v / c).collect::<Vec<_>>(), band).unwrap();
    let mut gamma = target.clone();
    gamma.values_mut()[0] -= 1.0;
    let trace = ma_solve(&g, &gamma, &MaSolveOptions::default()).unwrap();
    assert!(trace.converged);
    let mut f = trace.phi.clone();
    f.values_mut()[0] += 1.0;
    let fv = synthesize(&f, &g).unwrap();
    let ratios: Vec<f64> = fv.iter().zip(g.nodes()).map(|(v, u)| v / ellipsoid_h(axes, u)).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let worst = ratios.iter().map(|r| (r / mean - 1.0).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-5, "{worst:e}");
}

#[test]
fn ma_solver_truncation_and_rate() {
    let g = grid(28);
    let solve = |t: f64, band: usize| {
        ma_solve(&g, &HarmonicCoeffs::single(3, band, 4, 1, t).unwrap(), &MaSolveOptions::default()).unwrap()
    };
    let a = solve(0.01, 16);
    let b = solve(0.01, 20);
    let shared = b.phi.with_band_limit(16).sub(&a.phi).unwrap();
    assert!(shared.values().iter().all(|v| v.abs() <= 1e-7), "{:e}", shared.l2_norm());
    assert!(a.phi.odd_energy() <= 1e-12);
    assert!(a.final_residual <= 10.0 * MaSolveOptions::default().tol, "{:e}", a.final_residual);

    let r1 = contraction_rate(&solve(0.005, 16)).unwrap();
    let r2 = contraction_rate(&a).unwrap();
    assert!(((r2 / r1) / 2.0 - 1.0).abs() < 0.15, "{r1} {r2}");
}

#[test]
fn residuals_vanish_on_tilted_ellipsoids() {
    let g = grid(32);
    let rot = Rotation3::from_euler_angles(0.4, 0.2, -0.7).into_inner();
    let m = rot * Matrix3::from_diagonal(&Vector3::new(1.1, 0.95, 1.0)) * rot.transpose();
    let e = ConvexBody::ellipsoid(g, 16, m).unwrap();
    let (_, iso) = e.isotropic_position().unwrap();
    assert!(bp5_residual(&iso).unwrap().l2_residual <= 1e-6);
    assert!(bp8_residual(&iso).unwrap().l2_residual <= 1e-6);
}

#[test]
fn rigidity_slopes_up_to_degree_twelve() {
    let g = grid(36);
    for m in (4..=12).step_by(2) {
        let k = scan_order(m);
        let ts = admissible_t_values(&g, 24, m, k, &DEFAULT_T_VALUES);
        let (b5, b8) = rigidity_scan_pair(&g, 24, m, k, &ts).unwrap();
        for s in [&b5, &b8] {
            assert!((0.9..=1.1).contains(&s.slope_ratio()), "m={m} {:?} {}", s.problem, s.slope_ratio());
        }
    }
}
