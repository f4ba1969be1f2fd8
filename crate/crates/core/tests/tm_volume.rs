use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::Matrix4;
use proptest::prelude::*;
use tmgeom::bundle_geom::BundlePoint;
use tmgeom::spacetime::{catalog, SpacetimeModel, CATALOG_NAMES};
use tmgeom::tm_metric::{
    base_integral, fiber_ball, fiber_integral, fiber_metric, lift_divergence, tm_integral, FiberQuadrature, BALL_BOUND,
};
use tmgeom::verify::{polynomial_field, sample_points};

fn model(name: &str) -> SpacetimeModel {
    let kv: &[(&str, f64)] = match name {
        "uniform_field" => &[("E0", 0.1)],
        "schwarzschild" | "weak_field" => &[("M", 1.0)],
        "reissner_nordstrom" => &[("M", 1.0), ("Q", 0.3)],
        _ => &[],
    };
    let p: BTreeMap<String, f64> = kv.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    catalog(name, &p).unwrap()
}

fn sampled(m: &SpacetimeModel, n: usize) -> Vec<BundlePoint> {
    sample_points(m, &m.sample_box.unwrap(), n, 7).into_iter().map(Result::unwrap).collect()
}

const LIGHT: FiberQuadrature = FiberQuadrature { radial: 4, polar1: 10, polar2: 10, azimuth: 1 };

#[test]
fn ball_bound_gives_unit_euclidean_volume() {
    assert!((PI * PI / 2.0 * BALL_BOUND * BALL_BOUND - 1.0).abs() < 1e-15);
}

#[test]
fn fiber_metric_is_positive_with_determinant_minus_g() {
    for name in CATALOG_NAMES {
        let m = model(name);
        for p in sampled(&m, 10) {
            let fm = fiber_metric(&m, &p.x, None).unwrap();
            assert!(((fm.det_v + fm.det_g) / fm.det_g).abs() < 1e-12, "{name}");
            let v = Matrix4::from_fn(|i, j| fm.v[i][j]);
            assert!(v.symmetric_eigenvalues().iter().all(|e| *e > 0.0), "{name}");
            // v agrees with g along the observer and with -g orthogonal to it.
            assert!((fm.fiber_norm2(&fm.u) - 1.0).abs() < 1e-13);
            let w = p.y;
            let uw: f64 = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).map(|(i, j)| {
                m.metric_values(&p.x).unwrap()[i][j] * fm.u[i] * w[j]
            }).sum();
            assert!((fm.fiber_norm2(&w) - (2.0 * uw * uw - fm.base_norm2(&w))).abs() < 1e-11 * fm.fiber_norm2(&w));
        }
    }
}

#[test]
fn observer_must_be_unit_timelike() {
    let m = model("minkowski");
    assert!(fiber_metric(&m, &[0.0; 4], Some([0.0, 1.0, 0.0, 0.0])).is_err());
}

#[test]
fn ball_volume_and_moments() {
    let second_moment = 2.0 * std::f64::consts::SQRT_2 / (3.0 * PI);
    for name in CATALOG_NAMES {
        let m = model(name);
        for p in sampled(&m, 3) {
            let ball = fiber_ball(&m, &p.x).unwrap();
            let q = FiberQuadrature::default();
            let vol = fiber_integral(&ball, q, |_| Ok(1.0)).unwrap();
            assert!((vol.value - 1.0).abs() < 1e-8, "{name}: {}", vol.value);
            let m2 = fiber_integral(&ball, LIGHT, |y| Ok(ball.metric.fiber_norm2(y))).unwrap();
            assert!((m2.value - second_moment).abs() < 1e-12, "{name}: {}", m2.value);
            let odd = fiber_integral(&ball, LIGHT, |y| Ok(y[1] * ball.metric.base_norm2(y))).unwrap();
            assert!(odd.value.abs() < 1e-13, "{name}: {}", odd.value);
        }
    }
}

#[test]
fn ball_membership_follows_the_fiber_norm() {
    let m = model("schwarzschild");
    let x = [0.0, 6.0, 1.0, 0.0];
    let ball = fiber_ball(&m, &x).unwrap();
    let inside = ball.metric.from_orthonormal(&[0.0, 0.5 * BALL_BOUND.sqrt(), 0.0, 0.0]);
    let outside = ball.metric.from_orthonormal(&[0.0, 0.0, 1.01 * BALL_BOUND.sqrt(), 0.0]);
    assert!(ball.contains(&inside));
    assert!(!ball.contains(&outside));
}

#[test]
fn bundle_integral_of_base_function_reduces_to_base_integral() {
    let f = |x: &[f64; 4]| x[1].sin() + x[2] * x[0] + 2.0 + x[3] * x[3];
    for (name, bx) in [
        ("schwarzschild", [[-1.0, 1.0], [4.0, 8.0], [0.5, 2.5], [0.0, 1.0]]),
        ("reissner_nordstrom", [[0.0, 1.0], [5.0, 9.0], [1.0, 2.0], [0.0, 2.0]]),
        ("weak_field", [[0.0, 1.0], [2.5, 4.0], [2.5, 3.0], [3.0, 4.0]]),
    ] {
        let m = model(name);
        let tm = tm_integral(&m, &bx, 4, LIGHT, |x, _| Ok(f(x))).unwrap();
        let base = base_integral(&m, &bx, 4, |x| Ok(f(x))).unwrap();
        assert!(((tm - base) / base).abs() < 1e-8, "{name}: {tm} vs {base}");
    }
}

#[test]
fn schwarzschild_volume_of_shell() {
    // ∫ √-g over t∈[0,1], r∈[4,6], full sphere: ∫ r² dr · 4π.
    let m = model("schwarzschild");
    let bx = [[0.0, 1.0], [4.0, 6.0], [0.0, PI], [0.0, 2.0 * PI]];
    let v = base_integral(&m, &bx, 8, |_| Ok(1.0)).unwrap();
    let exact = 4.0 * PI * (216.0 - 64.0) / 3.0;
    assert!((v - exact).abs() < 1e-10 * exact, "{v} vs {exact}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn lift_divergence_matches_base(
        c in prop::array::uniform4(prop::array::uniform15(-1.0f64..1.0)),
        idx in 0usize..6,
        alpha in -1.5f64..1.5,
    ) {
        for name in ["schwarzschild", "reissner_nordstrom", "uniform_field"] {
            let m = model(name);
            let p = sampled(&m, 6)[idx];
            let (h, b) = lift_divergence(&m, p, alpha, |x| Ok(polynomial_field(&c, x))).unwrap();
            prop_assert!((h - b).abs() <= 1e-9 * b.abs().max(1.0), "{}: {} vs {}", name, h, b);
        }
    }
}
