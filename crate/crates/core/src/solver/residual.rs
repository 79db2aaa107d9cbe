use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::RadianceField;
use crate::error::Result;
use crate::geometry::DomainGeometry;
use crate::problem::TransportProblem;
use crate::vector::Vec3;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ResidualReport {
    /// Max mismatch between the stored field and the right-hand side of
    /// the integral equation.
    pub integral: f64,
    /// Max of `|xi . grad f + mu_t f - mu_s S|` from centered differences.
    pub differential: f64,
    pub samples: usize,
}

/// Uniform random interior points paired with random direction indices,
/// reproducible from `seed`. Points are kept at radius fraction at most
/// `reach` from the centre of the bounding box.
pub fn random_interior_samples(
    geometry: &DomainGeometry,
    count: usize,
    n_directions: usize,
    seed: u64,
    reach: f64,
) -> Vec<(Vec3, usize)> {
    assert!(reach > 0.0 && reach <= 1.0, "reach must lie in (0, 1]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = geometry.bounding_box();
    let c = (lo + hi) * 0.5;
    let half = (hi - lo) * (0.5 * reach);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut p = c;
        p.x += half.x * rng.random_range(-1.0..1.0);
        p.y += half.y * rng.random_range(-1.0..1.0);
        if geometry.dim() == 3 {
            p.z += half.z * rng.random_range(-1.0..1.0);
        }
        if geometry.is_interior(c + (p - c) * (1.0 / reach)) {
            out.push((p, rng.random_range(0..n_directions)));
        }
    }
    out
}

/// Checks the integral and differential forms of the transport equation at
/// the given off-grid samples.
pub fn residual(
    field: &RadianceField,
    problem: &TransportProblem,
    samples: &[(Vec3, usize)],
) -> Result<ResidualReport> {
    let mut report = ResidualReport {
        samples: samples.len(),
        ..Default::default()
    };
    let geo = &problem.geometry;
    let dt = (0.25 * field.spacing()).min(1e-3);
    for &(x, k) in samples {
        let xi = field.directions().direction(k);
        let ballistic = problem.ballistic(x, xi)?;
        let lhs = ballistic + field.f1_interpolated(x, k);
        let rhs = ballistic + field.f1_at(problem, x, xi)?;
        report.integral = report.integral.max((lhs - rhs).abs());

        // stay within one smooth piece of the characteristic
        let (lo, hi) = geo.chord_params(x, xi);
        if -lo <= dt || hi <= dt {
            continue;
        }
        let a = x - xi * dt;
        let b = x + xi * dt;
        let crossing = problem
            .partition
            .interface_times(geo, b, xi, 2.0 * dt)?
            .iter()
            .any(|&t| t > 0.0 && t < 2.0 * dt);
        if crossing {
            continue;
        }
        let deriv = (field.value_at(problem, b, xi)? - field.value_at(problem, a, xi)?) / (2.0 * dt);
        let mu_t = problem.medium.mu_t_at(geo, &problem.partition, x);
        let mu_s = problem.medium.mu_s_at(geo, &problem.partition, x);
        let s = field.source_at(problem, x, xi);
        let ode = deriv + mu_t * rhs - mu_s * s;
        report.differential = report.differential.max(ode.abs());
    }
    Ok(report)
}
