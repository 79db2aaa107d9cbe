use std::f64::consts::PI;

use proptest::prelude::*;
use raybound::geometry::Sign;
use raybound::{DomainGeometry, Vec3};

fn disk_point() -> impl Strategy<Value = Vec3> {
    (0.0..0.95f64, 0.0..2.0 * PI).prop_map(|(r, a)| Vec3::from_angle(a) * r)
}

fn direction() -> impl Strategy<Value = Vec3> {
    (0.0..2.0 * PI).prop_map(Vec3::from_angle)
}

fn square() -> DomainGeometry {
    DomainGeometry::polygon(&[[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]).unwrap()
}

/// Distance to the boundary of `[-1, 1]^2` along `d` by slab clipping.
fn slab_exit(x: Vec3, d: Vec3) -> f64 {
    let mut t = f64::INFINITY;
    for (p, v) in [(x.x, d.x), (x.y, d.y)] {
        if v > 0.0 {
            t = t.min((1.0 - p) / v);
        } else if v < 0.0 {
            t = t.min((-1.0 - p) / v);
        }
    }
    t
}

proptest! {
    #[test]
    fn disk_chord_lengths_add_up(x in disk_point(), xi in direction()) {
        let g = DomainGeometry::unit_disk();
        let back = g.tau(x, xi, Sign::Minus).unwrap();
        let fwd = g.tau(x, xi, Sign::Plus).unwrap();
        // distance from the center to the line
        let d = x.x * xi.y - x.y * xi.x;
        let chord = 2.0 * (1.0 - d * d).sqrt();
        prop_assert!((back + fwd - chord).abs() < 1e-12);
    }

    #[test]
    fn entry_point_is_constant_along_the_characteristic(
        x in disk_point(),
        xi in direction(),
        frac in 0.0..0.99f64,
    ) {
        let g = DomainGeometry::unit_disk();
        let tau = g.tau_minus(x, xi).unwrap();
        let p0 = g.backtrace_point(x, xi).unwrap();
        let p1 = g.backtrace_point(x - xi * (frac * tau), xi).unwrap();
        prop_assert!((p0.position - p1.position).norm() < 1e-12);
        prop_assert!((p0.position.norm() - 1.0).abs() < 1e-12);
        prop_assert!(p0.normal.dot(xi) <= 1e-12);
    }

    #[test]
    fn polygon_tau_matches_slab_clipping(
        px in -0.99..0.99f64,
        py in -0.99..0.99f64,
        xi in direction(),
    ) {
        let g = square();
        let x = Vec3::planar(px, py);
        let back = g.tau_minus(x, xi).unwrap();
        let fwd = g.tau_plus(x, xi).unwrap();
        prop_assert!((back - slab_exit(x, -xi)).abs() < 1e-12);
        prop_assert!((fwd - slab_exit(x, xi)).abs() < 1e-12);
    }

    #[test]
    fn ball_chord_lengths_add_up(
        r in 0.0..0.95f64,
        a in 0.0..2.0 * PI,
        z in -1.0..1.0f64,
        b in 0.0..2.0 * PI,
        w in -1.0..1.0f64,
    ) {
        let g = DomainGeometry::ball([0.0; 3], 1.0).unwrap();
        let s = (1.0 - z * z).sqrt();
        let x = Vec3::new(s * a.cos(), s * a.sin(), z) * r;
        let t = (1.0 - w * w).sqrt();
        let xi = Vec3::new(t * b.cos(), t * b.sin(), w);
        let back = g.tau_minus(x, xi).unwrap();
        let fwd = g.tau_plus(x, xi).unwrap();
        let d2 = x.norm_sq() - x.dot(xi).powi(2);
        prop_assert!((back + fwd - 2.0 * (1.0 - d2).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn measure_change_holds_for_smooth_functions(
        r in 0.0..0.7f64,
        a in 0.0..2.0 * PI,
        k in 1..4i32,
    ) {
        let g = DomainGeometry::unit_disk();
        let x = Vec3::from_angle(a) * r;
        let f = |y: Vec3| (k as f64 * y.angle()).cos() + y.x * y.x;
        let (dir, bnd) = g.measure_change_integrals(x, 2048, f).unwrap();
        prop_assert!((dir - bnd).abs() <= 1e-6 * dir.abs().max(1.0));
    }
}

#[test]
fn sphere_quadrature_weights_are_equal() {
    let g = DomainGeometry::ball([0.0; 3], 1.0).unwrap();
    let q = g.boundary_quadrature(100);
    assert_eq!(q.len(), 100);
    let total: f64 = q.iter().map(|(_, w)| w).sum();
    assert!((total - 4.0 * PI).abs() < 1e-12);
    for (_, w) in &q {
        assert!((w - 4.0 * PI / 100.0).abs() < 1e-15);
    }
}

#[test]
fn measure_change_in_the_ball() {
    let g = DomainGeometry::ball([0.0; 3], 1.0).unwrap();
    let x = Vec3::new(0.2, -0.1, 0.3);
    // equal-weight lattices converge slowly; agreement is loose here
    let (dir, bnd) = g
        .measure_change_integrals(x, 20000, |y| 1.0 + y.z * y.z)
        .unwrap();
    assert!((dir - bnd).abs() < 1e-2 * dir, "{dir} vs {bnd}");
}

#[test]
fn points_outside_are_rejected() {
    let g = DomainGeometry::unit_disk();
    assert!(g
        .measure_change_integrals(Vec3::planar(1.5, 0.0), 64, |_| 1.0)
        .is_err());
}
