use std::f64::consts::PI;

use raybound_demo::{reconstruction_values, sinogram_values, trace_scan};

#[test]
fn homogeneous_sinogram_center_is_the_diameter() {
    let g = sinogram_values(1.0, 1.0, 0.5, 60, 65).unwrap();
    assert_eq!(g.len(), 60 * 65);
    for m in 0..60 {
        assert!((g[m * 65 + 32] - 2.0).abs() < 1e-12);
    }
}

#[test]
fn reconstruction_separates_core_and_shell() {
    let img = reconstruction_values(1.0, 2.0, 0.5, 90, 65, 32).unwrap();
    let center = 0.25 * (img[15 * 32 + 15] + img[15 * 32 + 16] + img[16 * 32 + 15] + img[16 * 32 + 16]);
    // pixel (4, 16) sits at radius about 0.72, inside the shell
    let shell = img[16 * 32 + 4];
    assert!((center - 2.0).abs() < 0.2, "center {center}");
    assert!((shell - 1.0).abs() < 0.2, "shell {shell}");
}

#[test]
fn trace_scan_predicts_the_opposite_exit() {
    let scan = trace_scan(1.0, 0.5, 90.0, 270.0, 128).unwrap();
    let exits = scan.predicted_exits();
    assert_eq!(exits.len(), 1);
    assert!((exits[0] - 1.5 * PI).abs() < 1e-9);
    assert!((scan.predicted_jumps()[0] - (-2.0f64).exp()).abs() < 1e-12);
    let values = scan.values();
    // the upper half of the circle never sees xi = (0, -1) leaving
    assert!(values[32].is_nan());
    assert!(values[96].is_finite() && values[96] > 0.0);
}

#[test]
fn bad_inputs_are_errors() {
    assert!(sinogram_values(1.0, 1.0, 1.5, 0, 65).is_err());
    assert!(trace_scan(1.0, 2.0, 0.0, 0.0, 16).is_err());
}
