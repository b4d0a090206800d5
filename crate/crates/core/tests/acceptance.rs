//! Acceptance run: one PASS/FAIL line per criterion, then a single assertion.
//! Lines go straight to stdout so they survive test-output capture.

use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::{Matrix3, Rotation3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sphere_rigidity::body::{lipschitz_check, ConvexBody};
use sphere_rigidity::experiments::{
    admissible_t_values, best_fit_ellipse_distance, bp5_residual, bp5_residual_2d, bp8_contraction_spectrum,
    bp8_residual, contraction_spectrum, fl5_check, radon_curve_build, random_near_ball, rigidity_scan_pair,
    scan_order, Problem, DEFAULT_T_VALUES,
};
use sphere_rigidity::harmonics::{analyze, synthesize, HarmonicCoeffs};
use sphere_rigidity::ma_solver::{ma_solve, MaSolveOptions};
use sphere_rigidity::operators::{funk_multiplier, funk_quadrature, monge_ampere};
use sphere_rigidity::SphericalGrid;

type Outcome = (bool, String);

fn grid(n: usize, res: usize) -> Arc<SphericalGrid> {
    Arc::new(SphericalGrid::new(n, res).unwrap())
}

fn c1_funk_multipliers() -> Outcome {
    let start = Instant::now();
    let g = grid(3, 48);
    let mut worst = 0.0_f64;
    for (m, exact) in [(2, -0.5), (4, 0.375)] {
        let lambda = funk_multiplier(m, 3).unwrap();
        let y = HarmonicCoeffs::single(3, 16, m, 0, 1.0).unwrap();
        let quad = funk_quadrature(&g, &synthesize(&y, &g).unwrap(), 16, 128).unwrap();
        let measured = analyze(&g, &quad, 16).unwrap().get(m, 0);
        worst = worst.max((lambda - exact).abs()).max((measured - exact).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    (worst <= 1e-6 && secs < 5.0, format!("max error {worst:.2e} (tol 1e-6), {secs:.2} s (limit 5 s)"))
}

fn c2_contraction_spectra() -> Outcome {
    let mut mu2_err = 0.0_f64;
    let mut worst = 0.0_f64;
    for n in 3..=10 {
        mu2_err = mu2_err.max((bp8_contraction_spectrum(n, 2).unwrap().multiplier(2) - 1.0).abs());
        for p in [Problem::Bp5, Problem::Bp8] {
            let s = contraction_spectrum(p, n, 64).unwrap();
            for m in (4..=64).step_by(2) {
                worst = worst.max(s.multiplier(m).abs());
            }
        }
    }
    (
        mu2_err <= 1e-14 && worst < 1.0,
        format!("|mu_2 - 1| = {mu2_err:.1e} (tol 1e-14), max_(4<=m<=64) |mu_m| = {worst:.4} (< 1), n = 3..10"),
    )
}

fn c3_monge_ampere_constants() -> Outcome {
    let g = grid(3, 24);
    let mut worst = 0.0_f64;
    for r in [1.0, 0.5, 2.0] {
        let a = monge_ampere(&g, &HarmonicCoeffs::constant(3, 8, r)).unwrap();
        worst = worst.max(a.iter().map(|v| (v - r * r).abs()).fold(0.0, f64::max));
    }
    (worst <= 1e-8, format!("max |A(r) - r^(n-1)| = {worst:.2e} over r in {{1, 0.5, 2}} (tol 1e-8)"))
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Matrix3<f64> {
    let a = rng.gen_range(0.0..std::f64::consts::TAU);
    let b = rng.gen_range(0.0..std::f64::consts::PI);
    let c = rng.gen_range(0.0..std::f64::consts::TAU);
    Rotation3::from_euler_angles(a, b, c).into_inner()
}

fn random_ellipsoid(rng: &mut ChaCha8Rng, g: &Arc<SphericalGrid>, band: usize) -> ConvexBody {
    let axes: Vec<f64> = (0..3).map(|_| rng.gen_range(0.8..1.25)).collect();
    let scale = (axes[0] * axes[1] * axes[2]).powf(-1.0 / 3.0);
    let d = Matrix3::from_diagonal(&(Vector3::new(axes[0], axes[1], axes[2]) * scale));
    let r = random_rotation(rng);
    ConvexBody::ellipsoid(g.clone(), band, r * d * r.transpose()).unwrap()
}

fn c4_ellipsoid_closure() -> Outcome {
    let g = grid(3, 32);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut res, mut ball) = (0.0_f64, 0.0_f64);
    for _ in 0..20 {
        let e = random_ellipsoid(&mut rng, &g, 24);
        let (_, iso) = e.isotropic_position().unwrap();
        res = res.max(bp5_residual(&iso).unwrap().l2_residual).max(bp8_residual(&iso).unwrap().l2_residual);
        ball = ball.max(iso.radial().iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max));
    }
    (
        res <= 1e-5 && ball <= 1e-5,
        format!("20 ellipsoids: max residual {res:.2e}, max |rho - 1| {ball:.2e} (tol 1e-5)"),
    )
}

fn c5_rigidity_slopes() -> Outcome {
    let start = Instant::now();
    let g = grid(3, 36);
    let band = 24;
    let mut ok = true;
    let mut parts = Vec::new();
    let mut slopes = Vec::new();
    for m in [2, 4, 6, 8] {
        let k = scan_order(m);
        let ts = admissible_t_values(&g, band, m, k, &DEFAULT_T_VALUES);
        let (b5, b8) = rigidity_scan_pair(&g, band, m, k, &ts).unwrap();
        slopes.push((m, b5.fitted_slope, b8.fitted_slope));
        if m > 2 {
            for s in [&b5, &b8] {
                ok &= (s.slope_ratio() - 1.0).abs() <= 0.1;
                parts.push(format!("{} m={m} ratio {:.4}", s.problem, s.slope_ratio()));
            }
        }
    }
    let (_, m2_5, m2_8) = slopes[0];
    let (_, m4_5, m4_8) = slopes[1];
    let deg = (m2_5 / m4_5).max(m2_8 / m4_8);
    ok &= deg <= 0.05;
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 120.0;
    (ok, format!("{}; m=2/m=4 slope {deg:.2e} (<= 0.05); {secs:.1} s (limit 120 s)", parts.join(", ")))
}

fn c6_ma_solver() -> Outcome {
    let g = grid(3, 28);
    let mut ok = true;
    let mut ratios = Vec::new();
    let mut worst_res = 0.0_f64;
    let mut most_iter = 0;
    for t in [1e-2, 5e-3, 2.5e-3] {
        let gamma = HarmonicCoeffs::single(3, 16, 4, 0, t).unwrap();
        let trace = ma_solve(&g, &gamma, &MaSolveOptions::default()).unwrap();
        ok &= trace.converged && trace.iterations() <= 30 && trace.final_residual <= 1e-8;
        worst_res = worst_res.max(trace.final_residual);
        most_iter = most_iter.max(trace.iterations());
        ratios.push(trace.phi_double_prime.l2_norm() / gamma.l2_norm());
    }
    ok &= ratios.windows(2).all(|w| w[1] < w[0]);
    (
        ok,
        format!(
            "max iterations {most_iter} (<= 30), max residual {worst_res:.2e} (<= 1e-8), |phi''|/|gamma| = {:.3e}, {:.3e}, {:.3e}",
            ratios[0], ratios[1], ratios[2]
        ),
    )
}

fn c7_fl5() -> Outcome {
    let stats = fl5_check(1000, 2024);
    (
        stats.bodies == 1000 && stats.violations == 0,
        format!(
            "{} bodies, {} (e, theta) pairs, {} violations, worst lhs/rhs {:.3}",
            stats.bodies, stats.pairs, stats.violations, stats.worst_ratio
        ),
    )
}

fn c8_radon_counterexample() -> Outcome {
    let g = grid(2, 256);
    let body = radon_curve_build(&g, &[0.0, 0.02, 0.01, -0.005]).unwrap();
    let res = bp5_residual_2d(&body).unwrap().l2_residual;
    let dist = best_fit_ellipse_distance(&body).distance;
    (res <= 1e-8 && dist >= 1e-3, format!("residual {res:.2e} (<= 1e-8), ellipse distance {dist:.4} (>= 1e-3)"))
}

fn c9_isotropic_invariant() -> Outcome {
    let g = grid(3, 32);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut bodies: Vec<ConvexBody> = (0..5).map(|_| random_ellipsoid(&mut rng, &g, 24)).collect();
    for _ in 0..5 {
        let near = random_near_ball(&mut rng, &g, 12, 0.03).unwrap();
        let r = random_rotation(&mut rng);
        let stretch = r * Matrix3::from_diagonal(&Vector3::new(1.1, 1.0, 0.92)) * r.transpose();
        bodies.push(near.linear_image(&stretch).unwrap());
    }
    let mut worst = 0.0_f64;
    for b in &bodies {
        let (_, iso) = b.isotropic_position().unwrap();
        let c = analyze(&g, &iso.radial_power(5.0), iso.band_limit()).unwrap();
        worst = worst.max(c.degree_norm(2) / c.l2_norm());
    }
    (worst <= 1e-8, format!("{} bodies, max relative degree-2 norm of rho^(n+2) {worst:.2e} (tol 1e-8)", bodies.len()))
}

fn c10_lipschitz() -> Outcome {
    let g = grid(3, 24);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut failures = 0;
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let body = random_near_ball(&mut rng, &g, 8, 0.03).unwrap();
        let r = lipschitz_check(&body);
        if !r.holds || r.delta > 0.03 {
            failures += 1;
        }
        worst = worst.max(r.lipschitz / r.bound);
    }
    (failures == 0, format!("100 bodies, {failures} failures, worst Lip/(5 sqrt(delta)) {worst:.3}"))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("funk multipliers", c1_funk_multipliers),
        ("contraction spectra", c2_contraction_spectra),
        ("Monge-Ampere of constants", c3_monge_ampere_constants),
        ("ellipsoid closure", c4_ellipsoid_closure),
        ("rigidity slopes", c5_rigidity_slopes),
        ("MA solver", c6_ma_solver),
        ("Fl5 inequality", c7_fl5),
        ("planar Radon counterexample", c8_radon_counterexample),
        ("isotropic invariant", c9_isotropic_invariant),
        ("Lipschitz certificate", c10_lipschitz),
    ];
    let mut out = std::io::stdout().lock();
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (ok, detail) = run();
        writeln!(out, "{} [{:>2}] {name}: {detail}", if ok { "PASS" } else { "FAIL" }, i + 1).unwrap();
        if !ok {
            failed.push(i + 1);
        }
    }
    out.flush().unwrap();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
