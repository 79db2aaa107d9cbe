use std::f64::consts::{E, FRAC_PI_2, PI};

use proptest::prelude::*;
use raybound::quadrature::DirectionSet;
use raybound::solver::{
    estimate_contraction, random_interior_samples, residual, scattering_integral, solve, terms_needed,
    trace_outgoing, SolverSettings,
};
use raybound::{
    BoundarySource, DomainGeometry, Error, Gamma, MediumModel, PhaseFunction, SideA, SourceKind,
    SubdomainPartition, TransportProblem, Vec3,
};

fn disk_problem(mu_t: f64, mu_s: f64, source: BoundarySource) -> TransportProblem {
    let g = DomainGeometry::unit_disk();
    let m = MediumModel::homogeneous(mu_t, mu_s, PhaseFunction::Isotropic, &g).unwrap();
    TransportProblem::new(g, SubdomainPartition::homogeneous(), m, source).unwrap()
}

fn ab_source(intensity: f64) -> BoundarySource {
    let g = DomainGeometry::unit_disk();
    let gamma = Gamma::from_angles(&g, FRAC_PI_2, -FRAC_PI_2).unwrap();
    BoundarySource::piecewise_ab(intensity, gamma, SideA::Positive)
}

fn coarse(tol: f64) -> SolverSettings {
    SolverSettings {
        h: 1.0 / 8.0,
        n_directions: 16,
        tol,
        ..SolverSettings::default()
    }
}

#[test]
fn ballistic_examples() {
    let p = disk_problem(1.0, 0.0, BoundarySource::constant(1.0));
    let v = p.ballistic(Vec3::ZERO, Vec3::planar(1.0, 0.0)).unwrap();
    assert!((v - (-1.0f64).exp()).abs() < 1e-15);

    let p = disk_problem(1.0, 0.0, ab_source(1.0));
    assert!(p.source.side_of(Vec3::planar(1.0, 0.0)) == Some(raybound::Side::A));
    let down = p.ballistic(Vec3::ZERO, Vec3::planar(0.0, -1.0)).unwrap();
    assert!((down - (-1.0f64).exp()).abs() < 1e-15);
    // both points of gamma belong to A
    let up = p.ballistic(Vec3::ZERO, Vec3::planar(0.0, 1.0)).unwrap();
    assert!((up - (-1.0f64).exp()).abs() < 1e-15);
    let left = p.ballistic(Vec3::ZERO, Vec3::planar(0.1, 1.0).normalized()).unwrap();
    assert_eq!(left, 0.0);
}

#[test]
fn scattering_integral_examples() {
    let p = disk_problem(1.0, 0.5, BoundarySource::constant(1.0));
    let dirs = DirectionSet::uniform_circle(64);
    let xi = Vec3::planar(0.6, 0.8);
    assert!((scattering_integral(&p, &dirs, xi, |_| 3.5) - 3.5).abs() < 1e-14);
    assert_eq!(scattering_integral(&p, &dirs, xi, |_| 0.0), 0.0);
    let g = scattering_integral(&p, &dirs, xi, |d| p.ballistic(Vec3::ZERO, d).unwrap());
    assert!((g - 1.0 / E).abs() < 1e-14);

    let g = DomainGeometry::unit_disk();
    let hg = MediumModel::homogeneous(1.0, 0.5, PhaseFunction::HenyeyGreenstein { g: 0.7 }, &g).unwrap();
    let p = TransportProblem::new(g, SubdomainPartition::homogeneous(), hg, BoundarySource::constant(1.0)).unwrap();
    assert!((scattering_integral(&p, &dirs, xi, |_| 2.0) - 2.0).abs() < 1e-14);
}

#[test]
fn scattering_free_solve_is_ballistic() {
    let p = disk_problem(1.0, 0.0, BoundarySource::constant(1.0));
    let field = solve(&p, &coarse(1e-6)).unwrap();
    let cert = field.certificate();
    assert_eq!(cert.n_terms, 0);
    assert_eq!(cert.tail_bound, 0.0);
    let grid = field.grid();
    for &node in grid.interior_nodes().iter().step_by(7) {
        let x = grid.position(node);
        for k in 0..field.directions().len() {
            let xi = field.directions().direction(k);
            let want = (-p.geometry.tau_minus(x, xi).unwrap()).exp();
            assert!((field.total_node(node, k) - want).abs() < 1e-13);
            assert_eq!(field.f1_node(node, k), 0.0);
        }
    }
}

#[test]
fn zero_data_gives_zero_field() {
    let p = disk_problem(1.0, 0.5, BoundarySource::constant(0.0));
    let field = solve(&p, &coarse(1e-6)).unwrap();
    let (f0, f1, total) = field.arrays();
    assert!(f0.iter().chain(f1).chain(total).all(|&v| v == 0.0));
}

#[test]
fn term_count_from_geometric_tail() {
    let m = 1.0 - (-2.0f64).exp();
    let (n, tail) = terms_needed(1.0, m, 1e-6);
    assert!(tail <= 1e-6);
    assert!(m.powi(n as i32) / (1.0 - m) > 1e-6, "N = {n} is not minimal");
    assert!((95..=115).contains(&n), "N = {n}");
    assert_eq!(terms_needed(0.0, m, 1e-6), (0, 0.0));
}

#[test]
fn sampled_contraction_of_unit_disk() {
    let p = disk_problem(1.0, 0.5, BoundarySource::constant(1.0));
    let est = estimate_contraction(&p, &DirectionSet::uniform_circle(64)).unwrap();
    let exact = 1.0 - (-2.0f64).exp();
    assert!(est.m_sampled <= exact + 1e-12);
    assert!(exact - est.m_sampled < 1e-3, "{}", est.m_sampled);
    assert!(est.m > exact);
}

#[test]
fn opaque_medium_is_not_contractive() {
    let p = disk_problem(1000.0, 1.0, BoundarySource::constant(1.0));
    assert!(matches!(solve(&p, &coarse(1e-6)), Err(Error::NotContractive { .. })));
}

#[test]
fn term_budget_is_enforced() {
    let p = disk_problem(1.0, 0.5, BoundarySource::constant(1.0));
    let settings = SolverSettings {
        max_terms: 10,
        ..coarse(1e-6)
    };
    assert!(matches!(solve(&p, &settings), Err(Error::IterationBudget { max: 10, .. })));
}

#[test]
fn invalid_settings_are_rejected() {
    let p = disk_problem(1.0, 0.5, BoundarySource::constant(1.0));
    for s in [
        SolverSettings { h: 0.0, ..coarse(1e-3) },
        SolverSettings { h: 0.6, ..coarse(1e-3) },
        SolverSettings { n_directions: 2, ..coarse(1e-3) },
        SolverSettings { tol: 0.0, ..coarse(1e-3) },
    ] {
        assert!(matches!(solve(&p, &s), Err(Error::InvalidSolver(_))));
    }
}

#[test]
fn terms_contract_and_stay_bounded() {
    let p = disk_problem(1.0, 0.5, BoundarySource::constant(1.0));
    let field = solve(&p, &coarse(1e-4)).unwrap();
    let cert = field.certificate();
    for w in cert.term_sups.windows(2) {
        assert!(w[1] <= cert.m * w[0] * (1.0 + 1e-9));
    }
    let bound = 1.0 / (1.0 - cert.m);
    let (_, _, total) = field.arrays();
    assert!(total.iter().all(|&v| v >= 0.0 && v <= bound));
}

#[test]
fn scattering_free_residual_vanishes() {
    let p = disk_problem(1.0, 0.0, BoundarySource::constant(1.0));
    let field = solve(&p, &coarse(1e-6)).unwrap();
    let samples = random_interior_samples(&p.geometry, 100, field.directions().len(), 7, 0.95);
    let r = residual(&field, &p, &samples).unwrap();
    assert!(r.integral <= 1e-9, "{}", r.integral);
    // xi . grad f = -f along the characteristic; centered differences are
    // second order in the step
    assert!(r.differential <= 1e-6, "{}", r.differential);
}

#[test]
fn outgoing_trace_examples() {
    let top = DomainGeometry::unit_disk().boundary_point(Vec3::planar(0.0, 1.0));
    let up = Vec3::planar(0.0, 1.0);

    let p = disk_problem(1.0, 0.0, BoundarySource::constant(1.0));
    let field = solve(&p, &coarse(1e-6)).unwrap();
    let v = trace_outgoing(&p, &field, &top, up).unwrap();
    assert!((v - (-2.0f64).exp()).abs() < 1e-14);
    assert!(matches!(
        trace_outgoing(&p, &field, &top, -up),
        Err(Error::NotOutgoing { .. })
    ));

    let p = disk_problem(1.0, 0.5, BoundarySource::constant(0.0));
    let field = solve(&p, &coarse(1e-3)).unwrap();
    assert_eq!(trace_outgoing(&p, &field, &top, up).unwrap(), 0.0);

    let p = disk_problem(1.0, 0.5, BoundarySource::constant(1.0));
    let field = solve(&p, &coarse(1e-3)).unwrap();
    for a in [0.0, 0.4, -1.0] {
        let xi = Vec3::from_angle(FRAC_PI_2 + a);
        let f = trace_outgoing(&p, &field, &top, xi).unwrap();
        assert!(f >= p.ballistic(top.position, xi).unwrap());
    }
}

#[test]
fn smooth_sources_are_accepted() {
    for kind in [
        SourceKind::DirectionSmooth {
            intensity: 1.0,
            anisotropy: 0.5,
        },
        SourceKind::SpaceSmooth {
            intensity: 1.0,
            beam: Vec3::planar(1.0, 0.0),
            concentration: 2.0,
        },
    ] {
        let p = disk_problem(1.0, 0.5, BoundarySource::new(kind).unwrap());
        let field = solve(&p, &coarse(1e-3)).unwrap();
        assert!(field.certificate().n_terms > 0);
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let p = disk_problem(1.0, 0.5, ab_source(1.0));
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| solve(&p, &coarse(1e-3)).unwrap())
    };
    let a = run(1);
    let b = run(3);
    for (x, y) in a.arrays().2.iter().zip(b.arrays().2) {
        assert!((x - y).abs() <= 1e-13);
    }
}

#[test]
fn three_dimensional_ball_solves() {
    let g = DomainGeometry::ball([0.0; 3], 1.0).unwrap();
    let m = MediumModel::homogeneous(1.0, 0.3, PhaseFunction::Isotropic, &g).unwrap();
    let p = TransportProblem::new(g, SubdomainPartition::homogeneous(), m, BoundarySource::constant(1.0)).unwrap();
    let s = SolverSettings {
        h: 0.25,
        n_directions: 32,
        tol: 1e-2,
        ..SolverSettings::default()
    };
    let field = solve(&p, &s).unwrap();
    let centre = field.grid().node_at(Vec3::ZERO).unwrap();
    let f0 = field.f0_node(centre, 0);
    assert!((f0 - (-1.0f64).exp()).abs() < 1e-14);
    assert!(field.f1_node(centre, 0) > 0.0);
    assert!(field.total_node(centre, 0) < 1.0 / (1.0 - field.certificate().m));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn solution_is_linear_in_the_data(c in 0.1..10.0f64, a in 0.0..2.0 * PI) {
        let s = SolverSettings { h: 0.25, n_directions: 8, tol: 1e-3, ..SolverSettings::default() };
        let base = solve(&disk_problem(1.0, 0.5, ab_source(1.0)), &s).unwrap();
        let scaled = solve(&disk_problem(1.0, 0.5, ab_source(c)), &s).unwrap();
        let x = Vec3::from_angle(a) * 0.4;
        let p1 = disk_problem(1.0, 0.5, ab_source(1.0));
        let pc = disk_problem(1.0, 0.5, ab_source(c));
        let xi = Vec3::from_angle(a + 1.0);
        let v1 = base.value_at(&p1, x, xi).unwrap();
        let vc = scaled.value_at(&pc, x, xi).unwrap();
        // term counts may differ since sup |f0| enters the tail bound
        let tail = scaled.certificate().tail_bound + c * base.certificate().tail_bound;
        prop_assert!((vc - c * v1).abs() <= tail + 1e-12 * vc.abs());
    }
}
