use std::collections::BTreeMap;

use proptest::prelude::*;
use tmgeom::base_geom::{riemann_symmetry_residuals, BaseGeometry};
use tmgeom::bundle_geom::{generalized_einstein, BundleFrame, BundlePoint};
use tmgeom::spacetime::{catalog, SpacetimeModel};
use tmgeom::tensor::{flat4, flat_mat, max_abs, max_abs_diff, values_mat, DIM};
use tmgeom::verify::{homogeneity_components, HomogeneityDegrees};

fn model(name: &str, kv: &[(&str, f64)]) -> SpacetimeModel {
    let p: BTreeMap<String, f64> = kv.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    catalog(name, &p).unwrap()
}

fn rn() -> SpacetimeModel {
    model("reissner_nordstrom", &[("M", 1.0), ("Q", 0.3)])
}

/// Future timelike vector from a static-frame velocity `v` (|v| < 1) at a
/// diagonal-metric point.
fn boosted(m: &SpacetimeModel, x: &[f64; DIM], v: [f64; 3]) -> [f64; DIM] {
    let g = m.metric_values(x).unwrap();
    let gamma = 1.0 / (1.0 - v.iter().map(|c| c * c).sum::<f64>()).sqrt();
    [
        gamma / g[0][0].sqrt(),
        gamma * v[0] / (-g[1][1]).sqrt(),
        gamma * v[1] / (-g[2][2]).sqrt(),
        gamma * v[2] / (-g[3][3]).sqrt(),
    ]
}

fn velocity() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-0.5f64..0.5)
}

#[test]
fn schwarzschild_kretschmann_scalar() {
    let m = model("schwarzschild", &[("M", 1.5)]);
    for r in [4.0, 7.5, 15.0] {
        let x = [0.0, r, 1.1, 0.4];
        let b = BaseGeometry::new(&m, &x, 2).unwrap();
        let low = b.riemann_lower().unwrap();
        let gi = values_mat(&b.ginv);
        let mut k = 0.0;
        for a in 0..DIM {
            for bb in 0..DIM {
                for c in 0..DIM {
                    for d in 0..DIM {
                        // Diagonal metric: raising is a per-index factor.
                        k += low[a][bb][c][d].powi(2) * gi[a][a] * gi[bb][bb] * gi[c][c] * gi[d][d];
                    }
                }
            }
        }
        let exact = 48.0 * 1.5f64.powi(2) / r.powi(6);
        assert!((k - exact).abs() <= 1e-12 * exact, "r = {r}: {k} vs {exact}");
    }
}

#[test]
fn weak_field_scalar_curvature() {
    let m = model("weak_field", &[("M", 1.0)]);
    let b = BaseGeometry::new(&m, &[0.0, 3.0, 2.0, 1.0], 2).unwrap();
    let r = b.curvature().unwrap().scalar.value();
    assert!((r - -0.0484717944643417).abs() < 1e-14, "{r}");
}

#[test]
fn reissner_nordstrom_is_electrovacuum() {
    let m = rn();
    let b = BaseGeometry::new(&m, &[0.0, 5.0, 1.0, 0.0], 2).unwrap();
    let t = values_mat(&b.em_stress_energy());
    assert!((t[0][0] - 3.45837325140965e-6).abs() < 1e-18);
    let c = b.curvature().unwrap();
    assert!(c.scalar.value().abs() < 1e-15);
    let cem = values_mat(&b.classical_einstein_maxwell().unwrap());
    assert!(max_abs(&flat_mat(&cem)) < 1e-15);
    // At α* the variational tensor is the classical one.
    let var = values_mat(&b.variational_einstein(m.alpha_star()).unwrap());
    assert!(max_abs_diff(&flat_mat(&var), &flat_mat(&cem)) < 1e-17);
}

#[test]
fn uniform_field_quadratic_term_closed_form() {
    for (e0, alpha) in [(0.1, 1.0), (0.3, 0.5), (0.05, 2.0)] {
        let m = model("uniform_field", &[("E0", e0)]);
        let f = BundleFrame::new(&m, BundlePoint::new([0.0; 4], [2.0, 0.3, 0.0, 0.1]), alpha, 3).unwrap();
        let t = f.theorem1().unwrap();
        let exact = -3.0 * alpha * alpha * e0 * e0;
        assert!((t.quad_term - exact).abs() < 1e-14, "{t:?}");
        assert!((t.quad_closed_form - exact).abs() < 1e-15);
    }
}

#[test]
fn d_ricci_index_contraction_is_half_the_fiber_hessian() {
    let m = rn();
    for (x, v) in [([0.0, 5.0, 1.0, 0.2], [0.1, 0.2, -0.3]), ([0.3, 9.0, 2.0, 1.0], [-0.4, 0.0, 0.2])] {
        let y = boosted(&m, &x, v);
        let dc = BundleFrame::new(&m, BundlePoint::new(x, y), m.alpha, 3).unwrap().d_curvature().unwrap();
        for j in 0..DIM {
            for l in 0..DIM {
                let contracted: f64 = (0..DIM).map(|i| dc.tensor[j][i][l][i]).sum();
                assert!((contracted - 0.5 * dc.ricci[j][l]).abs() < 1e-14, "({j},{l})");
            }
        }
    }
}

#[test]
fn berwald_ricci_matches_d_ricci() {
    let m = rn();
    let x = [0.0, 6.0, 1.3, 0.0];
    let f = BundleFrame::new(&m, BundlePoint::new(x, boosted(&m, &x, [0.3, -0.2, 0.1])), m.alpha, 3).unwrap();
    let d = f.d_curvature().unwrap();
    let b = f.berwald_ricci().unwrap();
    assert!(max_abs_diff(&flat_mat(&d.ricci), &flat_mat(&b)) < 1e-14);
}

#[test]
fn literal_assembly_differs_from_field_equations_on_rn() {
    // The bundle-side assembly is not the variational tensor once F ≠ 0.
    let m = rn();
    let x = [0.0, 5.0, 1.0, 0.0];
    let f = BundleFrame::new(&m, BundlePoint::new(x, boosted(&m, &x, [0.0; 3])), m.alpha, 3).unwrap();
    let ge = generalized_einstein(&f).unwrap();
    assert!(max_abs(&flat_mat(&ge.variational)) < 1e-15);
    assert!(ge.literal_difference > 1e-6);
    // Without a field the two agree.
    let s = model("schwarzschild", &[("M", 1.0)]);
    let f = BundleFrame::new(&s, BundlePoint::new(x, boosted(&s, &x, [0.2, 0.1, 0.0])), s.alpha, 3).unwrap();
    assert!(generalized_einstein(&f).unwrap().literal_difference < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn riemann_symmetries_hold(r in 3.0f64..30.0, theta in 0.2f64..2.9, q in 0.0f64..0.9) {
        let m = model("reissner_nordstrom", &[("M", 1.0), ("Q", q)]);
        let b = BaseGeometry::new(&m, &[0.0, r, theta, 0.0], 2).unwrap();
        let low = b.riemann_lower().unwrap();
        let (sym, bianchi) = riemann_symmetry_residuals(&low);
        let scale = max_abs(&flat4(&low)).max(1.0);
        prop_assert!(sym / scale < 1e-13 && bianchi / scale < 1e-13);
    }

    #[test]
    fn decomposition_holds_on_rn(r in 4.0f64..20.0, theta in 0.3f64..2.8, v in velocity(), alpha in -1.5f64..1.5) {
        let m = rn();
        let x = [0.0, r, theta, 0.0];
        let f = BundleFrame::new(&m, BundlePoint::new(x, boosted(&m, &x, v)), alpha, 3).unwrap();
        let t = f.theorem1().unwrap();
        prop_assert!(t.residual.abs() < 1e-12, "{:?}", t);
        prop_assert!((t.quad_term - t.quad_closed_form).abs() < 1e-12 * t.quad_closed_form.abs().max(1.0));
    }

    #[test]
    fn homogeneity_with_correct_degrees(r in 4.0f64..20.0, v in velocity(), alpha in -1.5f64..1.5) {
        let m = rn();
        let x = [0.0, r, 1.2, 0.0];
        let y = boosted(&m, &x, v);
        let f1 = BundleFrame::new(&m, BundlePoint::new(x, y), alpha, 3).unwrap();
        let f2 = BundleFrame::new(&m, BundlePoint::new(x, y.map(|c| 2.0 * c)), alpha, 3).unwrap();
        let res = homogeneity_components(&f1, &f2, HomogeneityDegrees::CORRECT).unwrap();
        prop_assert!(res.iter().all(|v| *v < 1e-9), "{:?}", res);
    }

    #[test]
    fn alpha_zero_connection_is_levi_civita(r in 4.0f64..20.0, theta in 0.3f64..2.8, v in velocity()) {
        let m = rn();
        let x = [0.0, r, theta, 0.0];
        let y = boosted(&m, &x, v);
        let f = BundleFrame::new(&m, BundlePoint::new(x, y), 0.0, 3).unwrap();
        let gamma = tmgeom::tensor::values3(&f.base.gamma);
        let n = f.connection_values();
        for i in 0..DIM {
            for j in 0..DIM {
                let lc: f64 = (0..DIM).map(|k| gamma[i][j][k] * y[k]).sum();
                prop_assert!((n[i][j] - lc).abs() < 1e-15);
            }
        }
        prop_assert!(f.spray_b_values().iter().all(|b| *b == 0.0));
    }

    #[test]
    fn lorentz_force_is_orthogonal_to_velocity(r in 4.0f64..20.0, v in velocity(), alpha in -2.0f64..2.0) {
        let m = rn();
        let x = [0.0, r, 1.0, 0.5];
        let y = boosted(&m, &x, v);
        let f = BundleFrame::new(&m, BundlePoint::new(x, y), alpha, 1).unwrap();
        let b = f.spray_b_values();
        let g = m.metric_values(&x).unwrap();
        let dot: f64 = (0..DIM).map(|i| g[i][i] * b[i] * y[i]).sum();
        prop_assert!(dot.abs() < 1e-16);
    }
}
