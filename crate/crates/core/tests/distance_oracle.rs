use std::f64::consts::PI;
use std::sync::LazyLock;

use cutlab_core::submanifold::Curve;
use cutlab_core::*;
use proptest::prelude::*;

static FLAT_LINE: LazyLock<WavefrontAtlas> = LazyLock::new(|| {
    let b = Backend::flat_torus([1.0, 1.0]);
    let n = SubmanifoldSpec::curve(Curve::HorizontalCircle { y0: 0.0 }, 128);
    build_atlas(&b, &n, 128, 0.8, 1e-3).unwrap()
});

static FLAT_POINT: LazyLock<WavefrontAtlas> = LazyLock::new(|| {
    let b = Backend::flat_torus([1.0, 1.0]);
    build_atlas(&b, &SubmanifoldSpec::point(Vec3::new(0.5, 0.5, 0.0)), 128, 0.8, 1e-3).unwrap()
});

static POLE: LazyLock<WavefrontAtlas> = LazyLock::new(|| {
    let b = Backend::sphere(1.0);
    build_atlas(&b, &SubmanifoldSpec::point(Vec3::z()), 128, 3.3, 1e-3).unwrap()
});

fn periodic_gap(a: f64) -> f64 {
    let r = a.rem_euclid(1.0);
    r.min(1.0 - r)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn flat_line_within_err(x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let e = distance(&FLAT_LINE, &Vec3::new(x, y, 0.0)).unwrap();
        let truth = periodic_gap(y);
        prop_assert!((e.d - truth).abs() <= e.err, "{} vs {truth} (err {})", e.d, e.err);
    }

    #[test]
    fn flat_point_within_err(x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let e = distance(&FLAT_POINT, &Vec3::new(x, y, 0.0)).unwrap();
        let truth = periodic_gap(x - 0.5).hypot(periodic_gap(y - 0.5));
        prop_assert!((e.d - truth).abs() <= e.err, "{} vs {truth} (err {})", e.d, e.err);
    }

    #[test]
    fn sphere_pole_within_err(theta in 0.0f64..PI, phi in 0.0f64..(2.0 * PI)) {
        let q = Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
        let e = distance(&POLE, &q).unwrap();
        prop_assert!((e.d - theta).abs() <= e.err, "{} vs {theta} (err {})", e.d, e.err);
    }

    #[test]
    fn estimates_are_never_negative(x in 0.0f64..1.0, y in 0.0f64..1.0) {
        prop_assert!(distance(&FLAT_POINT, &Vec3::new(x, y, 0.0)).unwrap().d >= 0.0);
    }
}

#[test]
fn refinement_shrinks_the_bound() {
    let b = Backend::chart([1.0, 1.0], MetricField::WarpedDiag { amplitude: 0.2, period: 1.0 });
    let n = SubmanifoldSpec::curve(Curve::HorizontalCircle { y0: 0.0 }, 128);
    let errs: Vec<f64> = [32, 64, 128]
        .iter()
        .map(|&m| build_atlas(&b, &n, m, 0.6, 1e-3).unwrap().err())
        .collect();
    assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
}

#[test]
fn queries_are_deterministic() {
    let q = Vec3::new(0.3125, 0.78125, 0.0);
    let a = distance(&FLAT_POINT, &q).unwrap();
    let b = distance(&FLAT_POINT, &(q + Vec3::new(3.0, -2.0, 0.0))).unwrap();
    assert_eq!(a, b);
}

#[test]
fn eikonal_on_sphere_point() {
    let stats = distance::eikonal_residual(&POLE, 0.1, &[-Vec3::z()], None).unwrap();
    assert!(stats.evaluated > 100);
    assert!(stats.fraction_below(1e-2) >= 0.95, "max {}", stats.max());
}
