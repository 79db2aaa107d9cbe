mod support;

use std::sync::OnceLock;

use support::{chord_back, DiskOracle};

fn fine() -> &'static DiskOracle {
    static FINE: OnceLock<DiskOracle> = OnceLock::new();
    FINE.get_or_init(|| DiskOracle::new(1.0, 0.5, 1.0))
}

const POINTS: [([f64; 2], f64); 4] = [([0.0, 0.0], 0.0), ([0.3, 0.2], 1.0), ([-0.6, 0.1], 2.5), ([0.1, -0.85], 4.0)];

#[test]
fn chord_formula() {
    assert!((chord_back([0.5, 0.0], [1.0, 0.0]) - 1.5).abs() < 1e-15);
    assert!((chord_back([0.0, 0.9], [0.0, 1.0]) - 1.9).abs() < 1e-15);
}

#[test]
fn ballistic_average_at_centre() {
    let o = fine();
    assert!((o.g0(0.0) - (-1.0f64).exp()).abs() < 1e-14);
    // f^(1) at the centre with G_0 = e^-1 there and larger elsewhere
    let v = o.f1([0.0, 0.0], [1.0, 0.0]);
    let lower = 0.5 * (-1.0f64).exp() * (1.0 - (-1.0f64).exp());
    assert!(v > lower && v < 0.5 * (1.0 - (-1.0f64).exp()));
}

#[test]
fn collided_terms_are_resolved() {
    let fine = fine();
    let coarse = DiskOracle::with_resolution(1.0, 0.5, 1.0, 401, 2048);
    for (x, a) in POINTS {
        let xi = [a.cos(), a.sin()];
        for (f, c) in [(fine.f1(x, xi), coarse.f1(x, xi)), (fine.f2(x, xi), coarse.f2(x, xi))] {
            assert!((f - c).abs() < 1e-6 * f, "{f} vs {c}");
        }
    }
}

#[test]
fn linear_in_intensity() {
    let a = DiskOracle::with_resolution(1.0, 0.5, 1.0, 201, 1024);
    let b = DiskOracle::with_resolution(1.0, 0.5, 3.0, 201, 1024);
    let (x, xi) = ([0.2, 0.1], [0.6, 0.8]);
    assert!((3.0 * a.f2(x, xi) - b.f2(x, xi)).abs() < 1e-12);
}
