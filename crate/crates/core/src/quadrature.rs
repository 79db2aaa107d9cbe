//! Quadrature rules: Gauss-Legendre on intervals, direction sets on the
//! unit circle/sphere, and a low-discrepancy sequence for sampling checks.

use std::f64::consts::PI;

use crate::vector::Vec3;

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes are found by Newton iteration on the Legendre recurrence,
    /// seeded with the Chebyshev-like asymptotic guess.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..(n + 1) / 2 {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped onto `[a, b]`.
    #[inline]
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, dp)
}

/// Discrete ordinates `{xi_k}` with weights summing to the measure of the
/// unit circle (2 pi) or sphere (4 pi).
#[derive(Clone, Debug)]
pub struct DirectionSet {
    dim: usize,
    dirs: Vec<Vec3>,
    weights: Vec<f64>,
}

impl DirectionSet {
    /// Uniform angles `2 pi k / n`, starting at `(1, 0)`.
    pub fn uniform_circle(n: usize) -> Self {
        assert!(n >= 1);
        let dirs = (0..n)
            .map(|k| Vec3::from_angle(2.0 * PI * k as f64 / n as f64))
            .collect();
        DirectionSet {
            dim: 2,
            dirs,
            weights: vec![2.0 * PI / n as f64; n],
        }
    }

    /// Fibonacci lattice on the sphere with equal weights.
    pub fn fibonacci_sphere(n: usize) -> Self {
        assert!(n >= 1);
        DirectionSet {
            dim: 3,
            dirs: fibonacci_sphere(n),
            weights: vec![4.0 * PI / n as f64; n],
        }
    }

    pub fn for_dimension(dim: usize, n: usize) -> Self {
        if dim == 2 {
            Self::uniform_circle(n)
        } else {
            Self::fibonacci_sphere(n)
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn directions(&self) -> &[Vec3] {
        &self.dirs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn direction(&self, k: usize) -> Vec3 {
        self.dirs[k]
    }

    pub fn total_measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Index of the member equal to `xi` (to 1e-12), if any.
    pub fn find(&self, xi: Vec3) -> Option<usize> {
        self.dirs.iter().position(|d| (*d - xi).norm() < 1e-12)
    }

    pub fn integrate(&self, mut f: impl FnMut(Vec3) -> f64) -> f64 {
        self.dirs
            .iter()
            .zip(&self.weights)
            .map(|(d, w)| w * f(*d))
            .sum()
    }
}

/// Measure of the unit sphere `S^{d-1}`.
pub fn sphere_measure(dim: usize) -> f64 {
    if dim == 2 {
        2.0 * PI
    } else {
        4.0 * PI
    }
}

pub fn fibonacci_sphere(n: usize) -> Vec<Vec3> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// Radical-inverse (Halton) coordinate of index `i` in `base`.
pub fn halton(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let b = base as f64;
    while i > 0 {
        f /= b;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Extrapolates samples `(t_i, v_i)` to `t = 0` with the interpolating
/// polynomial through all points (Neville's scheme).
pub fn extrapolate_to_zero(samples: &[(f64, f64)]) -> f64 {
    let n = samples.len();
    assert!(n > 0);
    let mut p: Vec<f64> = samples.iter().map(|s| s.1).collect();
    for level in 1..n {
        for i in 0..n - level {
            let (ti, tj) = (samples[i].0, samples[i + level].0);
            p[i] = (tj * p[i] - ti * p[i + 1]) / (tj - ti);
        }
    }
    p[0]
}
