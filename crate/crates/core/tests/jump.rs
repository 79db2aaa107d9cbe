use std::f64::consts::FRAC_PI_2;

use raybound::geometry::Interface;
use raybound::jump::{characteristic, extract_jump, predict_discontinuities, predicted_jump, scan_jumps};
use raybound::solver::{solve, SolverSettings};
use raybound::{
    BoundarySource, DomainGeometry, Gamma, MediumModel, PhaseFunction, SideA, SubdomainPartition,
    TransportProblem, Vec3,
};

fn ab(intensity: f64) -> BoundarySource {
    let g = DomainGeometry::unit_disk();
    BoundarySource::piecewise_ab(
        intensity,
        Gamma::from_angles(&g, FRAC_PI_2, -FRAC_PI_2).unwrap(),
        SideA::Positive,
    )
}

fn homogeneous(mu_s: f64, source: BoundarySource) -> TransportProblem {
    let g = DomainGeometry::unit_disk();
    let m = MediumModel::homogeneous(1.0, mu_s, PhaseFunction::Isotropic, &g).unwrap();
    TransportProblem::new(g, SubdomainPartition::homogeneous(), m, source).unwrap()
}

fn two_region(source: BoundarySource) -> TransportProblem {
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
    TransportProblem::new(g, p, m, source).unwrap()
}

fn down() -> Vec3 {
    Vec3::planar(0.0, -1.0)
}

#[test]
fn diameter_characteristic() {
    let g = DomainGeometry::unit_disk();
    let pd = characteristic(&g, Vec3::planar(0.0, 1.0), down()).unwrap();
    assert!((pd.exit.position - Vec3::planar(0.0, -1.0)).norm() < 1e-15);
    assert!((pd.chord - 2.0).abs() < 1e-15);
    assert!(!pd.grazing);
}

#[test]
fn tilted_characteristic_follows_chord_formula() {
    let g = DomainGeometry::unit_disk();
    for beta in [0.1f64, 0.5, 1.2, -0.8] {
        let xi = Vec3::planar(-beta.sin(), -beta.cos());
        let pd = characteristic(&g, Vec3::planar(0.0, 1.0), xi).unwrap();
        assert!((pd.chord - 2.0 * beta.cos().abs()).abs() < 1e-14);
        assert!((pd.exit.position.norm() - 1.0).abs() < 1e-14);
    }
    assert!(characteristic(&g, Vec3::planar(0.0, 1.0), Vec3::planar(0.0, 1.0)).is_err());
}

#[test]
fn continuous_sources_predict_nothing() {
    let g = DomainGeometry::unit_disk();
    assert!(predict_discontinuities(&BoundarySource::constant(1.0), &g, 16).is_empty());
    let fan = predict_discontinuities(&ab(1.0), &g, 16);
    assert_eq!(fan.len(), 32);
    assert!(fan.iter().all(|pd| pd.base.normal.dot(pd.dir) < 0.0));
}

#[test]
fn decay_law_examples() {
    let g = DomainGeometry::unit_disk();
    let pd = characteristic(&g, Vec3::planar(0.0, 1.0), down()).unwrap();
    let v = predicted_jump(&homogeneous(0.5, ab(1.0)), &pd).unwrap();
    assert!((v - 0.1353352832366127).abs() < 1e-15);
    let v = predicted_jump(&two_region(ab(1.0)), &pd).unwrap();
    assert!((v - 0.049787068367863944).abs() < 1e-15);
    assert_eq!(predicted_jump(&homogeneous(0.5, ab(0.0)), &pd).unwrap(), 0.0);
}

#[test]
fn unscattered_jump_is_exact() {
    let p = homogeneous(0.0, ab(1.0));
    let s = SolverSettings {
        h: 1.0 / 8.0,
        n_directions: 16,
        ..SolverSettings::default()
    };
    let field = solve(&p, &s).unwrap();
    let pd = characteristic(&p.geometry, Vec3::planar(0.0, 1.0), down()).unwrap();
    let m = extract_jump(&p, &field, &pd, None).unwrap();
    // limits are converged to 1e-5 I; F_1 contributes nothing
    assert!((m.extracted - (-2.0f64).exp()).abs() < 1e-6, "{}", m.extracted);

    let p2 = homogeneous(0.0, ab(2.0));
    let field2 = solve(&p2, &s).unwrap();
    let m2 = extract_jump(&p2, &field2, &pd, None).unwrap();
    assert!((m2.extracted - 2.0 * m.extracted).abs() < 1e-12);
}

#[test]
fn scattered_jump_matches_decay_law_on_coarse_grid() {
    let p = homogeneous(0.5, ab(1.0));
    let s = SolverSettings {
        h: 1.0 / 16.0,
        n_directions: 16,
        tol: 1e-3,
        ..SolverSettings::default()
    };
    let field = solve(&p, &s).unwrap();
    for beta in [0.0f64, 0.4] {
        let xi = Vec3::planar(-beta.sin(), -beta.cos());
        let pd = characteristic(&p.geometry, Vec3::planar(0.0, 1.0), xi).unwrap();
        let m = extract_jump(&p, &field, &pd, None).unwrap();
        assert!(m.rel_err() < 0.1, "beta {beta}: {} vs {}", m.extracted, m.predicted);
        assert!(m.limit_a > m.limit_b);
    }
}

#[test]
fn scan_finds_the_exit_point() {
    let p = homogeneous(0.0, ab(1.0));
    let s = SolverSettings {
        h: 1.0 / 8.0,
        n_directions: 16,
        ..SolverSettings::default()
    };
    let field = solve(&p, &s).unwrap();
    let xi = Vec3::planar(-0.3f64.sin(), -0.3f64.cos());
    let hits = scan_jumps(&p, &field, xi, 512, 1e-3).unwrap();
    let exits: Vec<Vec3> = [Vec3::planar(0.0, 1.0), Vec3::planar(0.0, -1.0)]
        .iter()
        .filter_map(|b| characteristic(&p.geometry, *b, xi).ok())
        .map(|pd| pd.exit.position)
        .collect();
    assert_eq!(hits.len(), exits.len());
    let spacing = 2.0 * std::f64::consts::PI / 512.0;
    for e in exits {
        assert!(hits.iter().any(|h| (h.position.position - e).norm() <= spacing));
    }
}
