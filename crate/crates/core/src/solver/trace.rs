use crate::error::{Error, Result};
use crate::geometry::BoundaryPoint;
use crate::problem::TransportProblem;
use crate::quadrature::extrapolate_to_zero;
use crate::vector::Vec3;

/// Anything that can evaluate the continuous scattered part `F_1` of a
/// solution at an arbitrary point and direction.
pub trait ScatteredComponent: Sync {
    fn f1_at(&self, problem: &TransportProblem, x: Vec3, xi: Vec3) -> Result<f64>;

    /// Resolution of the underlying discretization.
    fn spacing(&self) -> f64;
}

/// Outgoing trace `f(y, xi)` for `n(y) . xi > 0`: the exact ballistic term
/// plus the limit of `F_1(y - t xi, xi)` as `t -> 0`, extrapolated from
/// three interior samples.
pub fn trace_outgoing(
    problem: &TransportProblem,
    f1: &dyn ScatteredComponent,
    y: &BoundaryPoint,
    xi: Vec3,
) -> Result<f64> {
    let nd = y.normal.dot(xi);
    if nd <= 0.0 {
        return Err(Error::NotOutgoing { normal_dot: nd });
    }
    let ballistic = problem.ballistic(y.position, xi)?;
    let chord = problem.geometry.tau_minus(y.position, xi)?;
    let t0 = (2.0 * f1.spacing()).min(0.5 * chord);
    if t0 <= 0.0 {
        return Ok(ballistic);
    }
    let mut samples = [(0.0, 0.0); 3];
    for (i, s) in samples.iter_mut().enumerate() {
        let t = t0 / (1 << i) as f64;
        *s = (t, f1.f1_at(problem, y.position - xi * t, xi)?);
    }
    Ok(ballistic + extrapolate_to_zero(&samples))
}
