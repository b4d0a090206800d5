//! Randomized invariants.

use std::sync::{Arc, OnceLock};

use nalgebra::Rotation3;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sphere_rigidity::body::{lipschitz_check, rain1_constant, radial_from_support, support_from_radial, ConvexBody};
use sphere_rigidity::experiments::{fl5_check, random_near_ball};
use sphere_rigidity::harmonics::{analyze, num_coeffs, synthesize, HarmonicCoeffs};
use sphere_rigidity::operators::{funk_quadrature, funk_spectral, laplace_apply, laplace_solve, monge_ampere, monge_ampere_tangential};
use sphere_rigidity::SphericalGrid;

const BAND: usize = 10;

fn grid() -> &'static Arc<SphericalGrid> {
    static G: OnceLock<Arc<SphericalGrid>> = OnceLock::new();
    G.get_or_init(|| Arc::new(SphericalGrid::new(3, 24).unwrap()))
}

fn coeffs(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, len)
}

fn band_limited(values: Vec<f64>) -> HarmonicCoeffs {
    HarmonicCoeffs::from_values(3, BAND, values).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn round_trip_and_parseval(v in coeffs(num_coeffs(3, BAND))) {
        let g = grid();
        let c = band_limited(v);
        let f = synthesize(&c, g).unwrap();
        let back = analyze(g, &f, BAND).unwrap();
        let err = back.sub(&c).unwrap().l2_norm();
        prop_assert!(err <= 1e-10 * c.l2_norm());
        let sq: Vec<f64> = f.iter().map(|x| x * x).collect();
        let energy = g.integrate(&sq).unwrap();
        prop_assert!((energy - c.l2_norm().powi(2)).abs() <= 1e-10 * energy);
    }

    #[test]
    fn integration_is_rotation_invariant(v in coeffs(num_coeffs(3, BAND)), a in 0.0..6.3f64, b in 0.0..3.1f64, c in 0.0..6.3f64) {
        let g = grid();
        let h = band_limited(v);
        let r = Rotation3::from_euler_angles(a, b, c);
        let plain = g.integrate(&synthesize(&h, g).unwrap()).unwrap();
        let rotated: Vec<f64> = g.nodes().iter().map(|u| h.eval(&(r * u))).collect();
        prop_assert!((g.integrate(&rotated).unwrap() - plain).abs() <= 1e-10 * (1.0 + h.l2_norm()));
    }

    #[test]
    fn funk_spectral_matches_quadrature(v in coeffs(num_coeffs(3, BAND))) {
        let g = grid();
        let c = band_limited(v).even_part();
        let f = synthesize(&c, g).unwrap();
        let spectral = synthesize(&funk_spectral(&c).unwrap(), g).unwrap();
        let quad = funk_quadrature(g, &f, BAND, 64).unwrap();
        let diff: Vec<f64> = spectral.iter().zip(&quad).map(|(a, b)| a - b).collect();
        prop_assert!(g.l2_norm(&diff).unwrap() <= 1e-6 * g.l2_norm(&spectral).unwrap().max(1e-300));
    }

    #[test]
    fn laplace_inverse(v in coeffs(num_coeffs(3, BAND))) {
        let mut c = band_limited(v).even_part();
        for i in 1..4 {
            c.values_mut()[i] = 0.0;
        }
        let back = laplace_apply(&laplace_solve(&c).unwrap());
        prop_assert!(back.sub(&c).unwrap().l2_norm() <= 1e-12 * c.l2_norm().max(1.0));
    }

    #[test]
    fn monge_ampere_routes_agree(v in coeffs(num_coeffs(3, 6))) {
        let g = grid();
        let mut h = HarmonicCoeffs::from_values(3, 6, v.iter().map(|x| 0.01 * x).collect()).unwrap();
        h.values_mut()[0] = 1.0;
        let a = monge_ampere(g, &h).unwrap();
        let b = monge_ampere_tangential(g, &h).unwrap();
        let worst = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(worst <= 1e-8);
    }

    #[test]
    fn near_ball_invariants(seed in 0u64..1_000_000) {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let body = random_near_ball(&mut rng, g, 8, 0.03).unwrap();
        prop_assert!(body.radial_coeffs().odd_energy() <= 1e-12);
        let lip = lipschitz_check(&body);
        prop_assert!(lip.holds, "{:?}", lip);
        let rain = rain1_constant(&body, 4, 0.1).unwrap();
        prop_assert!(rain.constant.is_finite());
    }

    #[test]
    fn fl5_inequality(seed in 0u64..1_000_000) {
        let stats = fl5_check(20, seed);
        prop_assert_eq!(stats.violations, 0);
    }
}

#[test]
fn radial_support_round_trip() {
    let g = Arc::new(SphericalGrid::new(3, 48).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..3 {
        let body = random_near_ball(&mut rng, &g, 12, 0.02).unwrap();
        let h = support_from_radial(&g, body.radial_coeffs()).unwrap();
        let hc = analyze(&g, &h, 44).unwrap();
        let rho = radial_from_support(&g, &hc).unwrap();
        let worst = rho.iter().zip(body.radial()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(worst <= 1e-6, "{worst:e}");
    }
}

#[test]
fn even_bodies_have_even_spectra() {
    let g = grid();
    let e = ConvexBody::ellipsoid_axes(g.clone(), 8, [1.1, 0.9, 1.0]).unwrap();
    assert!(e.radial_coeffs().odd_energy() <= 1e-12);
    assert!(e.support_coeffs().odd_energy() <= 1e-12);
}
