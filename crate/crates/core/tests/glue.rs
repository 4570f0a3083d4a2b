use pharmonic::blend::{CubicRayField, PolarMetricGrid};
use pharmonic::glue::{
    build_tau, certification_grid, certify, find_k, glue, glue2d, GlueSpec, RayFamily,
};
use pharmonic::warp::{scale_k, uniform_grid, Warp, WarpingFunction};
use proptest::prelude::*;
use std::sync::Arc;

fn cubic() -> WarpingFunction {
    WarpingFunction::odd_polynomial(vec![1.0, 1.0]).unwrap()
}

#[test]
fn pipeline_certifies_cubic_into_sinh() {
    let (gw, cert) = glue(&GlueSpec::new(cubic(), WarpingFunction::Sinh, 1.0, 4.0)).unwrap();
    assert_eq!((gw.r1, gw.r2, gw.k), (2.0, 3.0, 2.0));
    assert!(cert.pass);
    assert!(cert.min_second_difference >= -1e-9);
    assert!(cert.min_slope_minus_one >= -1e-12);
    assert_eq!(cert.head_mismatch, 0.0);
    assert!(cert.tail_mismatch <= 1e-10);
    assert!(cert.max_curvature <= 1e-9);
}

#[test]
fn convexity_survives_grid_refinement() {
    let (gw, _) = glue(&GlueSpec::new(cubic(), WarpingFunction::Sinh, 1.0, 4.0)).unwrap();
    for n in [4000, 8000, 16000] {
        let cert = certify(&gw, &certification_grid(&gw, n), 1e-10).unwrap();
        assert!(
            cert.min_second_difference >= -1e-9,
            "n = {n}: {}",
            cert.min_second_difference
        );
    }
}

#[test]
fn steep_tail_certifies_without_rounding_noise() {
    // a thin gluing band forces k = 128, with tail values near 3e5
    let rho = WarpingFunction::odd_polynomial(vec![1.0, 0.1667]).unwrap();
    let (gw, cert) = glue(&GlueSpec::new(rho, WarpingFunction::Sinh, 1.0, 1.5)).unwrap();
    assert_eq!(gw.k, 128.0);
    assert!(cert.pass, "{cert:?}");
    assert!(cert.min_second_difference >= 0.0);
    assert!(cert.tail_scale > 1e5);
    // closed-form secants agree with plain value differences
    let grid = certification_grid(&gw, 4000);
    for w in grid.windows(2) {
        let naive = (gw.jet(w[1]).unwrap().value - gw.jet(w[0]).unwrap().value) / (w[1] - w[0]);
        let exact = gw.secant_slope(w[0], w[1]).unwrap();
        assert!(
            (naive - exact).abs() <= 1e-9 * exact.abs().max(1.0),
            "{w:?}"
        );
    }
}

#[test]
fn tail_differs_from_sigma_k_by_a_constant_only() {
    let (gw, _) = glue(&GlueSpec::new(cubic(), WarpingFunction::Sinh, 1.0, 4.0)).unwrap();
    let sk = scale_k(&WarpingFunction::Sinh, gw.k).unwrap();
    for i in 1..=200 {
        let r = gw.r2 + gw.delta + 0.01 * i as f64;
        let (a, b) = (gw.jet(r).unwrap(), sk.jet(r).unwrap());
        assert_eq!(a.d1, b.d1);
        assert!((a.value - b.value).abs() <= 1e-10);
    }
}

#[test]
fn sampled_tau_round_trips_through_csv() {
    let (gw, _) = glue(&GlueSpec::new(cubic(), WarpingFunction::Sinh, 1.0, 4.0)).unwrap();
    let grid = certification_grid(&gw, 4000);
    let sampled = gw.to_sampled(&grid).unwrap();
    let back = pharmonic::warp::SampledWarp::from_csv_str(&sampled.to_csv()).unwrap();
    let w = WarpingFunction::SampledSpline(back);
    for &r in grid.iter().step_by(37) {
        assert!(
            (w.jet(r).unwrap().value - gw.jet(r).unwrap().value).abs() <= 1e-12 * (1.0 + r.powi(3))
        );
    }
}

proptest! {
    #[test]
    fn find_k_is_stable_when_cap_doubles(c in 0.0f64..4.0, r_bar in 0.5f64..1.5, width in 2.0f64..4.0) {
        let rho = WarpingFunction::odd_polynomial(vec![1.0, c]).unwrap();
        let (r1, r2) = pharmonic::glue::choose_radii(r_bar, r_bar + width).unwrap();
        let delta = pharmonic::glue::default_delta(r1, r2);
        if let Ok(k) = find_k(&rho, &WarpingFunction::Sinh, r1, r2, delta, 1e4) {
            prop_assert_eq!(find_k(&rho, &WarpingFunction::Sinh, r1, r2, delta, 2e4).unwrap(), k);
            let sk = scale_k(&WarpingFunction::Sinh, k).unwrap();
            let gw = build_tau(&rho, &sk, r1, r2, delta, k, 1e-10).unwrap();
            let cert = certify(&gw, &certification_grid(&gw, 2000), 1e-10).unwrap();
            prop_assert!(cert.pass);
            for i in 0..1000 {
                let r = ((r1 - delta) * (i as f64 / 999.0)).min(r1 - delta);
                prop_assert_eq!(gw.jet(r).unwrap().value, rho.jet(r).unwrap().value);
            }
        }
    }
}

#[test]
fn ray_family_from_sampled_polar_metric() {
    let field = Arc::new(CubicRayField { c0: 2.0, c1: 1.0 });
    let t: Vec<f64> = (1..=500).map(|i| 5.0 * i as f64 / 500.0).collect();
    let grid = PolarMetricGrid::from_field(field, t, 24).unwrap();
    let fam = RayFamily::from_polar_grid(&grid).unwrap();
    let out = glue2d(
        &fam,
        &WarpingFunction::Sinh,
        1.0,
        4.0,
        None,
        1e6,
        1e-10,
        &uniform_grid(4.5, 200),
    )
    .unwrap();
    let worst = WarpingFunction::odd_polynomial(vec![1.0, 3.0]).unwrap();
    let k = find_k(&worst, &WarpingFunction::Sinh, 2.0, 3.0, 0.05, 1e6).unwrap();
    assert_eq!(out.k, k);
    assert!(
        out.pass,
        "lip {} bound {}",
        out.lipschitz, out.data_lipschitz
    );
}
