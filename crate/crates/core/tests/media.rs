use std::f64::consts::PI;

use proptest::prelude::*;
use raybound::geometry::Interface;
use raybound::media::CoefficientField;
use raybound::quadrature::DirectionSet;
use raybound::{DomainGeometry, Error, MediumModel, PhaseFunction, SubdomainPartition, Vec3};

fn two_region() -> (DomainGeometry, SubdomainPartition, MediumModel) {
    let g = DomainGeometry::unit_disk();
    let p = SubdomainPartition::new(
        &[Interface::Sphere {
            center: Vec3::ZERO,
            radius: 0.5,
        }],
        2,
    )
    .unwrap();
    let m = MediumModel::new(
        vec![1.0.into(), 2.0.into()],
        vec![0.5.into(), 0.5.into()],
        PhaseFunction::Isotropic,
        &g,
        &p,
    )
    .unwrap();
    (g, p, m)
}

fn gaussian() -> (DomainGeometry, SubdomainPartition, MediumModel) {
    let g = DomainGeometry::unit_disk();
    let p = SubdomainPartition::homogeneous();
    let field = CoefficientField::Gaussian {
        base: 1.0,
        amplitude: 0.8,
        center: Vec3::planar(0.2, -0.1),
        width: 0.3,
    };
    let m = MediumModel::new(vec![field], vec![0.3.into()], PhaseFunction::Isotropic, &g, &p)
        .unwrap()
        .with_quad_order(24);
    (g, p, m)
}

/// Composite Simpson rule with many panels.
fn simpson(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let n = 20000;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn depth_examples() {
    let g = DomainGeometry::unit_disk();
    let hom = MediumModel::homogeneous(1.0, 0.5, PhaseFunction::Isotropic, &g).unwrap();
    let p0 = SubdomainPartition::homogeneous();
    let e1 = Vec3::planar(1.0, 0.0);
    let d = hom.optical_depth(&g, &p0, Vec3::ZERO, e1, 1.0).unwrap();
    assert!((d.value() - 1.0).abs() < 1e-15);
    assert!((hom.attenuation(&g, &p0, Vec3::planar(1.0, 0.0), e1, 2.0).unwrap() - (-2.0f64).exp()).abs() < 1e-15);
    assert_eq!(hom.optical_depth(&g, &p0, Vec3::ZERO, e1, 0.0).unwrap().value(), 0.0);
    assert_eq!(hom.attenuation(&g, &p0, Vec3::ZERO, e1, 0.0).unwrap(), 1.0);

    let (g, p, m) = two_region();
    let d = m.optical_depth(&g, &p, Vec3::planar(1.0, 0.0), e1, 2.0).unwrap();
    assert!((d.value() - 3.0).abs() < 1e-14);
    assert!((d.attenuation() - 0.049787068367863944).abs() < 1e-15);
}

#[test]
fn span_longer_than_chord_is_rejected() {
    let (g, p, m) = two_region();
    let err = m.optical_depth(&g, &p, Vec3::ZERO, Vec3::planar(1.0, 0.0), 1.5);
    assert!(matches!(err, Err(Error::SpanExceedsChord { .. })));
}

#[test]
fn phase_examples() {
    let iso = PhaseFunction::Isotropic;
    assert!((iso.eval(2, 0.3) - 1.0 / (2.0 * PI)).abs() < 1e-15);
    assert!((iso.eval(3, -0.7) - 1.0 / (4.0 * PI)).abs() < 1e-15);
    let hg0 = PhaseFunction::HenyeyGreenstein { g: 0.0 };
    for c in [-1.0, -0.2, 0.5, 1.0] {
        assert!((hg0.eval(2, c) - iso.eval(2, c)).abs() < 1e-15);
        assert!((hg0.eval(3, c) - iso.eval(3, c)).abs() < 1e-15);
    }
}

#[test]
fn henyey_greenstein_is_normalized() {
    for g in [-0.6, 0.0, 0.5, 0.9] {
        let p = PhaseFunction::HenyeyGreenstein { g };
        let circle = DirectionSet::uniform_circle(4096);
        let s2 = circle.integrate(|d| p.eval(2, d.x));
        assert!((s2 - 1.0).abs() < 1e-10, "2D g={g}: {s2}");
        // azimuthal symmetry reduces the sphere integral to one variable
        let s3 = 2.0 * PI * simpson(-1.0, 1.0, |c| p.eval(3, c));
        assert!((s3 - 1.0).abs() < 1e-8, "3D g={g}: {s3}");
    }
}

#[test]
fn scattering_above_extinction_is_rejected() {
    let g = DomainGeometry::unit_disk();
    let err = MediumModel::homogeneous(1.0, 1.5, PhaseFunction::Isotropic, &g).unwrap_err();
    assert!(err.to_string().contains("mu_s <= mu_t"));
    let p = SubdomainPartition::homogeneous();
    let bump = CoefficientField::Gaussian {
        base: 0.2,
        amplitude: 1.0,
        center: Vec3::ZERO,
        width: 0.2,
    };
    assert!(MediumModel::new(vec![1.0.into()], vec![bump], PhaseFunction::Isotropic, &g, &p).is_err());
    let bad_g = PhaseFunction::HenyeyGreenstein { g: 1.0 };
    assert!(MediumModel::homogeneous(1.0, 0.5, bad_g, &g).is_err());
}

#[test]
fn wrong_piece_count_is_rejected() {
    let (g, p, _) = two_region();
    let err = MediumModel::new(vec![1.0.into()], vec![0.5.into()], PhaseFunction::Isotropic, &g, &p);
    assert!(matches!(err, Err(Error::InvalidMedium(_))));
}

#[test]
fn smooth_field_depth_matches_dense_quadrature() {
    let (g, p, m) = gaussian();
    let field = &m.mu_t_fields()[0];
    for (x, a) in [(Vec3::planar(0.5, 0.3), 0.3), (Vec3::planar(-0.2, -0.6), 2.2)] {
        let xi = Vec3::from_angle(a);
        let tau = g.tau_minus(x, xi).unwrap();
        let got = m.optical_depth(&g, &p, x, xi, tau).unwrap().value();
        let want = simpson(0.0, tau, |r| field.eval(x - xi * r));
        assert!((got - want).abs() < 1e-10 * want, "{got} vs {want}");
    }
}

fn ray() -> impl Strategy<Value = (Vec3, Vec3, f64, f64)> {
    (0.0..0.95f64, 0.0..2.0 * PI, 0.0..2.0 * PI, 0.0..1.0f64, 0.0..1.0f64)
        .prop_map(|(r, a, b, u, v)| (Vec3::from_angle(a) * r, Vec3::from_angle(b), u, v))
}

proptest! {
    #[test]
    fn depth_is_additive((x, xi, u, v) in ray()) {
        for (g, p, m) in [two_region(), gaussian()] {
            let tau = g.tau_minus(x, xi).unwrap();
            let s1 = u * tau;
            let s2 = v * (tau - s1);
            let whole = m.optical_depth(&g, &p, x, xi, s1 + s2).unwrap().value();
            let a = m.optical_depth(&g, &p, x, xi, s1).unwrap().value();
            let b = m.optical_depth(&g, &p, x - xi * s1, xi, s2).unwrap().value();
            prop_assert!((whole - a - b).abs() <= 1e-9 * whole.max(1.0));
        }
    }

    #[test]
    fn depth_is_monotone_in_span((x, xi, u, v) in ray()) {
        let (g, p, m) = two_region();
        let tau = g.tau_minus(x, xi).unwrap();
        let (lo, hi) = if u < v { (u, v) } else { (v, u) };
        let a = m.optical_depth(&g, &p, x, xi, lo * tau).unwrap().value();
        let b = m.optical_depth(&g, &p, x, xi, hi * tau).unwrap().value();
        prop_assert!(a <= b + 1e-15);
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn depth_is_reversible((x, xi, u, _v) in ray()) {
        for (g, p, m) in [two_region(), gaussian()] {
            let s = u * g.tau_minus(x, xi).unwrap();
            let fwd = m.optical_depth(&g, &p, x, xi, s).unwrap().value();
            let back = m.optical_depth(&g, &p, x - xi * s, -xi, s).unwrap().value();
            prop_assert!((fwd - back).abs() <= 1e-9 * fwd.max(1.0));
        }
    }
}
