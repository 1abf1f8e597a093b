use proptest::prelude::*;

use entroflow::gaussian::{entropy, f_functional, f_gradient, phi_kernel, EntropyOptions, GaussianCenter};
use entroflow::geometry::shapes::{circle_at, ellipsoid, icosphere};
use entroflow::geometry::{compute_curvature, hausdorff_distance, transform, RigidDilation};
use entroflow::{Mat3, Point, Surface};

fn point() -> impl Strategy<Value = Point> {
    (-3.0..3.0, -3.0..3.0, -3.0..3.0).prop_map(|(x, y, z)| Point::new(x, y, z))
}

fn rotation() -> impl Strategy<Value = Mat3<f64>> {
    (-1.0..1.0, -1.0..1.0, 0.1..1.0, 0.0..std::f64::consts::TAU)
        .prop_map(|(x, y, z, angle)| Mat3::rotation_axis_angle(Point::new(x, y, z), angle))
}

fn stretched(a: f64, b: f64) -> Surface {
    ellipsoid([a, b, 1.0], 2).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn curvature_is_rigid_equivariant(rot in rotation(), shift in point(), a in 1.0..2.5f64, b in 0.6..1.4f64) {
        let s = stretched(a, b);
        let moved = transform(&s, &RigidDilation::new(rot, shift, 1.0)).unwrap();
        let (c0, c1) = (compute_curvature(&s).unwrap(), compute_curvature(&moved).unwrap());
        for i in 0..s.vertex_count() {
            prop_assert!((c0.mean_curvature[i] - c1.mean_curvature[i]).abs() <= 1e-10);
            prop_assert!((c0.vertex_area[i] - c1.vertex_area[i]).abs() <= 1e-10);
            prop_assert!(rot.mul_vec(c0.normal[i]).distance(c1.normal[i]) <= 1e-10);
        }
    }

    #[test]
    fn curvature_is_dilation_covariant(c in 0.2..5.0f64, a in 1.0..2.5f64) {
        let s = stretched(a, 1.0);
        let grown = transform(&s, &RigidDilation::dilation(c)).unwrap();
        let (c0, c1) = (compute_curvature(&s).unwrap(), compute_curvature(&grown).unwrap());
        for i in 0..s.vertex_count() {
            prop_assert!((c0.mean_curvature[i] / c - c1.mean_curvature[i]).abs() <= 1e-10);
            prop_assert!((c0.vertex_area[i] * c * c - c1.vertex_area[i]).abs() <= 1e-10 * c * c);
        }
    }

    #[test]
    fn hausdorff_is_a_pseudometric(
        centers in prop::array::uniform3((-1.0..1.0f64, -1.0..1.0f64)),
        radii in prop::array::uniform3(0.5..2.0f64),
        counts in prop::array::uniform3(8usize..80),
    ) {
        let curves: Vec<Surface> = (0..3)
            .map(|k| circle_at(Point::planar(centers[k].0, centers[k].1), radii[k], counts[k]).unwrap())
            .collect();
        let d = |i: usize, j: usize| hausdorff_distance(&curves[i], &curves[j]).unwrap();
        prop_assert_eq!(d(0, 0), 0.0);
        prop_assert_eq!(d(0, 1), d(1, 0));
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-12);
    }

    #[test]
    fn kernel_scales_parabolically(x in point(), t in 0.05..4.0f64, c in 0.2..5.0f64, n in 1usize..4) {
        let base = phi_kernel(x, t, n).unwrap();
        let scaled = phi_kernel(x * c, c * c * t, n).unwrap();
        prop_assert!((scaled * c.powi(n as i32) - base).abs() <= 1e-12 * base.max(1e-300));
    }

    #[test]
    fn gradient_matches_differences(x in point(), t in 0.2..3.0f64, a in 1.0..2.0f64) {
        let s = stretched(a, 0.8);
        let g = GaussianCenter::new(x * 0.5, t).unwrap();
        let (dx, dlog) = f_gradient(&s, &g).unwrap();
        let f = |g: GaussianCenter<f64>| f_functional(&s, &g).unwrap();
        let h = 1e-5;
        let e = Point::new(h, 0.0, 0.0);
        let fd_x = (f(GaussianCenter { center: g.center + e, ..g }) - f(GaussianCenter { center: g.center - e, ..g })) / (2.0 * h);
        let fd_log = (f(GaussianCenter { scale: t * h.exp(), ..g }) - f(GaussianCenter { scale: t * (-h).exp(), ..g })) / (2.0 * h);
        let scale = dx.norm().max(dlog.abs()).max(1e-8);
        prop_assert!((dx.x - fd_x).abs() <= 1e-6 * scale);
        prop_assert!((dlog - fd_log).abs() <= 1e-6 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn entropy_is_rigid_and_dilation_invariant(rot in rotation(), shift in point(), c in 0.3..3.0f64) {
        let s = stretched(1.8, 1.2);
        let opts = EntropyOptions::default();
        let base = entropy(&s, &opts).unwrap();
        let map = RigidDilation::new(rot, shift, c);
        let moved = transform(&s, &map).unwrap();
        let r = entropy(&moved, &opts).unwrap();
        prop_assert!((r.entropy - base.entropy).abs() <= 1e-6);
        prop_assert!(map.apply(base.argmax.center).distance(r.argmax.center) <= 1e-4 * moved.diameter());
        prop_assert!((r.argmax.scale / (c * c * base.argmax.scale) - 1.0).abs() <= 1e-4);
    }

    #[test]
    fn entropy_is_at_least_one(a in 1.0..3.0f64, b in 0.5..1.5f64, r in 0.3..4.0f64) {
        let s = transform(&stretched(a, b), &RigidDilation::dilation(r)).unwrap();
        let e = entropy(&s, &EntropyOptions::default()).unwrap();
        prop_assert!(e.entropy >= 1.0 - 1e-6);
        prop_assert!(e.entropy >= f_functional(&s, &e.argmax).unwrap());
    }
}

#[test]
fn mean_curvature_converges_on_spheres() {
    let errors: Vec<(f64, f64)> = (2..=4)
        .map(|k| {
            let s: Surface = icosphere(1.5, k).unwrap();
            let h = compute_curvature(&s).unwrap();
            let err = h.mean_curvature.iter().map(|v| (v - 2.0 / 1.5).abs()).fold(0.0, f64::max);
            (s.edge_length_range().1, err)
        })
        .collect();
    for w in errors.windows(2) {
        let (h0, e0) = w[0];
        let (h1, e1) = w[1];
        assert!(e1 / e0 <= h1 / h0 * 1.05, "{errors:?}");
    }
}

#[test]
fn self_shrinkers_maximize_at_unit_scale() {
    let opts = EntropyOptions::default();
    for s in [circle_at(Point::zero(), 2f64.sqrt(), 2048).unwrap(), icosphere(2.0, 5).unwrap()] {
        let e = entropy(&s, &opts).unwrap();
        assert!(e.argmax.center.norm() <= 1e-3, "{:?}", e.argmax);
        assert!((e.argmax.scale - 1.0).abs() <= 1e-3, "{:?}", e.argmax);
        let at_unit = f_functional(&s, &GaussianCenter::new(Point::zero(), 1.0).unwrap()).unwrap();
        assert!((e.entropy - at_unit).abs() <= 1e-6);
    }
}

#[test]
fn single_precision_entropy() {
    let s = circle_at(Point::zero(), 1.0, 256).unwrap().cast::<f32>().unwrap();
    let e = entropy(&s, &EntropyOptions::default()).unwrap();
    assert!((e.entropy - 1.520_346_9).abs() < 2e-3);
}
