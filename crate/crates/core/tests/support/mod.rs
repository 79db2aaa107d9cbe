//! Independent reference values for the homogeneous unit disk with constant
//! incoming data and isotropic scattering, by nested quadrature.
//!
//! Rotational symmetry makes every angular average a function of the
//! radius alone, so the collided terms reduce to
//!
//! ```text
//! G_n(r)        = (1/2pi) int f^(n)((r, 0), xi') dxi'
//! f^(n+1)(x,xi) = mu_s int_0^tau e^{-mu_t s} G_n(|x - s xi|) ds
//! ```
//!
//! with `G_n` tabulated on a radial grid. Nothing here calls the solver.

#![allow(dead_code)]

use std::f64::consts::PI;

pub struct DiskOracle {
    pub mu_t: f64,
    pub mu_s: f64,
    pub intensity: f64,
    /// Angular averages of `f^(0)` and `f^(1)` on `r_j = j / (len - 1)`.
    g0: Vec<f64>,
    g1: Vec<f64>,
}

/// Backward distance to the unit circle from `x` along `-xi`.
pub fn chord_back(x: [f64; 2], xi: [f64; 2]) -> f64 {
    let b = x[0] * xi[0] + x[1] * xi[1];
    let c = x[0] * x[0] + x[1] * x[1] - 1.0;
    b + (b * b - c).max(0.0).sqrt()
}

fn simpson_adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if b <= a {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Mean over the circle of directions by the periodic trapezoid rule.
fn circle_mean(n: usize, f: impl Fn([f64; 2]) -> f64) -> f64 {
    (0..n)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / n as f64;
            f([a.cos(), a.sin()])
        })
        .sum::<f64>()
        / n as f64
}

/// Four-point Lagrange interpolation on the uniform radial table.
fn radial(table: &[f64], r: f64) -> f64 {
    let n = table.len() - 1;
    let u = (r.clamp(0.0, 1.0)) * n as f64;
    let j = (u.floor() as isize - 1).clamp(0, n as isize - 3) as usize;
    let t = u - j as f64;
    let mut acc = 0.0;
    for a in 0..4 {
        let mut w = 1.0;
        for b in 0..4 {
            if a != b {
                w *= (t - b as f64) / (a as f64 - b as f64);
            }
        }
        acc += w * table[j + a];
    }
    acc
}

impl DiskOracle {
    pub fn new(mu_t: f64, mu_s: f64, intensity: f64) -> Self {
        Self::with_resolution(mu_t, mu_s, intensity, 801, 4096)
    }

    /// `n_r` radial table points, `n_dirs` directions for `G_0`.
    pub fn with_resolution(mu_t: f64, mu_s: f64, intensity: f64, n_r: usize, n_dirs: usize) -> Self {
        let rs: Vec<f64> = (0..n_r).map(|j| j as f64 / (n_r - 1) as f64).collect();
        let g0: Vec<f64> = rs
            .iter()
            .map(|&r| circle_mean(n_dirs, |xi| intensity * (-mu_t * chord_back([r, 0.0], xi)).exp()))
            .collect();
        let mut oracle = DiskOracle {
            mu_t,
            mu_s,
            intensity,
            g0,
            g1: Vec::new(),
        };
        oracle.g1 = rs
            .iter()
            .map(|&r| circle_mean(n_dirs / 8, |xi| oracle.collided(&oracle.g0, [r, 0.0], xi)))
            .collect();
        oracle
    }

    fn collided(&self, table: &[f64], x: [f64; 2], xi: [f64; 2]) -> f64 {
        let tau = chord_back(x, xi);
        let f = |s: f64| {
            let p = [x[0] - s * xi[0], x[1] - s * xi[1]];
            (-self.mu_t * s).exp() * radial(table, (p[0] * p[0] + p[1] * p[1]).sqrt())
        };
        self.mu_s * simpson_adaptive(&f, 0.0, tau, 1e-10 * self.intensity.abs())
    }

    pub fn g0(&self, r: f64) -> f64 {
        radial(&self.g0, r)
    }

    pub fn f0(&self, x: [f64; 2], xi: [f64; 2]) -> f64 {
        self.intensity * (-self.mu_t * chord_back(x, xi)).exp()
    }

    pub fn f1(&self, x: [f64; 2], xi: [f64; 2]) -> f64 {
        self.collided(&self.g0, x, xi)
    }

    pub fn f2(&self, x: [f64; 2], xi: [f64; 2]) -> f64 {
        self.collided(&self.g1, x, xi)
    }
}
