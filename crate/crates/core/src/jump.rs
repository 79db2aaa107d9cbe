//! Discontinuities of the outgoing trace induced by the A/B source: where
//! they appear, how large they are, and how to measure them from a solved
//! field.

use std::f64::consts::PI;

use crate::boundary::Side;
use crate::error::{Error, Result};
use crate::geometry::{BoundaryPoint, DomainGeometry, SurfaceParam};
use crate::problem::TransportProblem;
use crate::quadrature::extrapolate_to_zero;
use crate::solver::{trace_outgoing, ScatteredComponent};
use crate::vector::Vec3;
use crate::BoundarySource;

/// Exit directions with `|n . xi|` below this are treated as grazing.
pub const GRAZING_EXIT: f64 = 1e-6;

/// Agreement, relative to the intensity, required between one-sided limits
/// extrapolated from successive offset sequences.
pub const LIMIT_TOL: f64 = 1e-5;

const MAX_HALVINGS: usize = 40;

/// Factor by which a jump's node difference must exceed its neighbours'.
pub const SCAN_DOMINANCE: f64 = 4.0;

/// Characteristic leaving a point of `gamma`: base `x_star`, direction
/// `xi_star`, and where it leaves the domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PredictedDiscontinuity {
    pub base: BoundaryPoint,
    pub dir: Vec3,
    pub exit: BoundaryPoint,
    pub chord: f64,
    pub grazing: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JumpMeasurement {
    pub base: Vec3,
    pub exit: Vec3,
    pub dir: Vec3,
    pub chord: f64,
    /// Difference of the one-sided limits, `A` side minus `B` side.
    pub extracted: f64,
    /// `I exp(-int mu_t)` along the chord.
    pub predicted: f64,
    pub limit_a: f64,
    pub limit_b: f64,
    /// Boundary offsets used for each one-sided limit.
    pub offsets: [f64; 3],
    /// Polynomial degree of the extrapolation.
    pub order: usize,
}

impl JumpMeasurement {
    pub fn rel_err(&self) -> f64 {
        if self.predicted == 0.0 {
            return self.extracted.abs();
        }
        (self.extracted - self.predicted).abs() / self.predicted
    }
}

/// Characteristic through the boundary point `base` in the incoming
/// direction `dir`.
pub fn characteristic(geometry: &DomainGeometry, base: Vec3, dir: Vec3) -> Result<PredictedDiscontinuity> {
    let base = geometry.boundary_point(base);
    let nd = base.normal.dot(dir);
    if nd >= 0.0 {
        return Err(Error::NotIncoming { normal_dot: nd });
    }
    let (_, hi) = geometry.chord_params(base.position, dir);
    let exit = geometry.boundary_point(base.position + dir * hi);
    Ok(PredictedDiscontinuity {
        base,
        dir,
        exit,
        chord: hi,
        grazing: exit.normal.dot(dir).abs() < GRAZING_EXIT,
    })
}

/// `n` incoming directions at `base`, at angles
/// `beta_i = -pi/2 + (i + 1/2) pi / n` from the inward normal. In d = 3 the
/// fan lies in the plane of the normal and the polar axis.
pub fn fan_directions(base: &BoundaryPoint, n: usize) -> Vec<Vec3> {
    let inward = -base.normal;
    let mut t = inward.perp();
    if matches!(base.param, SurfaceParam::Sphere { .. }) {
        let axis = Vec3::new(0.0, 0.0, 1.0);
        t = axis - inward * inward.dot(axis);
        if t.norm() < 1e-9 {
            t = Vec3::new(1.0, 0.0, 0.0) - inward * inward.x;
        }
        t = t.normalized();
    }
    (0..n)
        .map(|i| {
            let beta = -0.5 * PI + (i as f64 + 0.5) * PI / n as f64;
            (inward * beta.cos() + t * beta.sin()).normalized()
        })
        .collect()
}

/// Exit data of the characteristics leaving `gamma` along a fan of
/// `n_dirs` directions per base point. Continuous sources give none.
pub fn predict_discontinuities(
    source: &BoundarySource,
    geometry: &DomainGeometry,
    n_dirs: usize,
) -> Vec<PredictedDiscontinuity> {
    let set = source.discontinuity_set(geometry, 16);
    let mut out = Vec::new();
    for fam in &set.families {
        for xi in fan_directions(&fam.base, n_dirs) {
            if let Ok(pd) = characteristic(geometry, fam.base.position, xi) {
                if pd.grazing {
                    log::debug!("grazing exit at {:?}", pd.exit.position);
                }
                out.push(pd);
            }
        }
    }
    out
}

/// Jump predicted by the decay law, `I exp(-int_0^tau mu_t(x* - r xi*) dr)`.
pub fn predicted_jump(problem: &TransportProblem, pd: &PredictedDiscontinuity) -> Result<f64> {
    let intensity = problem.source.intensity().unwrap_or(0.0);
    if intensity == 0.0 {
        return Ok(0.0);
    }
    Ok(intensity * problem.attenuation(pd.exit.position, pd.dir, pd.chord)?)
}

/// Measures the jump of the outgoing trace at the exit of `pd` from
/// one-sided limits along the boundary. Each side is sampled at offsets
/// `4 eps, 2 eps, eps` and extrapolated to zero; `eps` starts at the field
/// spacing (shrunk for short or steep chords) and is halved until three
/// successive limits agree to [`LIMIT_TOL`]. The reported offsets are the
/// smallest sequence used.
pub fn extract_jump(
    problem: &TransportProblem,
    f1: &dyn ScatteredComponent,
    pd: &PredictedDiscontinuity,
    eps0: Option<f64>,
) -> Result<JumpMeasurement> {
    let geo = &problem.geometry;
    let xi = pd.dir;
    let exit = pd.exit;
    let nd = exit.normal.dot(xi);
    if pd.grazing || nd <= 0.0 {
        return Err(Error::NotOutgoing { normal_dot: nd });
    }
    let gamma = problem
        .source
        .gamma()
        .ok_or_else(|| Error::InvalidSource("jump extraction needs an A/B source".into()))?;
    let cap = 0.125 * nd * pd.chord.min(geo.diameter() / 2.0);
    let eps = eps0.unwrap_or_else(|| f1.spacing()).min(cap);

    // tangent at the exit; a step along it shifts the characteristic
    // sideways by its lateral component
    let tangent = if geo.dim() == 2 {
        exit.normal.perp()
    } else {
        let g = gamma.normal();
        let t = g - exit.normal * exit.normal.dot(g);
        if t.norm() < 1e-9 {
            return Err(Error::InvalidSource("gamma normal is parallel to the exit normal".into()));
        }
        t.normalized()
    };
    let lateral = tangent - xi * tangent.dot(xi);
    let plus_side = match problem.source.side_of(pd.base.position + lateral * (1e-6 * geo.diameter())) {
        Some(s) if gamma.normal().dot(lateral).abs() > 1e-12 => s,
        _ => {
            return Err(Error::SideMisclassification {
                exit: exit.position.to_array(),
            })
        }
    };

    let intensity = problem.source.intensity().unwrap_or(0.0);
    let limit_tol = LIMIT_TOL * intensity.abs().max(f64::MIN_POSITIVE);
    let one_side = |sign: f64, expect: Side, eps: f64| -> Result<f64> {
        let mut samples = [(0.0, 0.0); 3];
        for (j, m) in [4.0, 2.0, 1.0].into_iter().enumerate() {
            let d = m * eps;
            let y = geo.boundary_step_toward(&exit, tangent * sign, d);
            let entry = geo.backtrace_point(y.position, xi)?;
            if problem.source.side_of(entry.position) != Some(expect) {
                return Err(Error::SideMisclassification {
                    exit: exit.position.to_array(),
                });
            }
            samples[j] = (d, trace_outgoing(problem, f1, &y, xi)?);
        }
        Ok(extrapolate_to_zero(&samples))
    };
    // halve the offsets until successive extrapolations agree; smooth
    // one-sided data converge at once, chords grazing an interface need
    // much smaller offsets
    let mut eps = eps;
    let mut lims = [0.0; 2];
    for (si, sign) in [1.0, -1.0].into_iter().enumerate() {
        let expect = if sign > 0.0 { plus_side } else { other(plus_side) };
        let mut e = eps;
        let mut prev = one_side(sign, expect, e)?;
        let mut agreed = 0;
        for _ in 0..MAX_HALVINGS {
            let next = one_side(sign, expect, 0.5 * e)?;
            agreed = if (next - prev).abs() <= limit_tol { agreed + 1 } else { 0 };
            prev = next;
            e *= 0.5;
            if agreed == 2 {
                break;
            }
        }
        lims[si] = prev;
        eps = eps.min(e);
    }
    let [lim_plus, lim_minus] = lims;
    let (limit_a, limit_b) = if plus_side == Side::A {
        (lim_plus, lim_minus)
    } else {
        (lim_minus, lim_plus)
    };
    Ok(JumpMeasurement {
        base: pd.base.position,
        exit: exit.position,
        dir: xi,
        chord: pd.chord,
        extracted: limit_a - limit_b,
        predicted: predicted_jump(problem, pd)?,
        limit_a,
        limit_b,
        offsets: [4.0 * eps, 2.0 * eps, eps],
        order: 2,
    })
}

fn other(s: Side) -> Side {
    match s {
        Side::A => Side::B,
        Side::B => Side::A,
    }
}

/// A jump found by scanning the outgoing trace along the boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectedJump {
    pub position: BoundaryPoint,
    pub magnitude: f64,
}

/// Scans `f(y, xi)` over `n_nodes` equispaced boundary nodes of a planar
/// domain and reports adjacent differences above `floor` that exceed both
/// neighbouring differences by [`SCAN_DOMINANCE`], located midway between
/// the two nodes.
pub fn scan_jumps(
    problem: &TransportProblem,
    f1: &dyn ScatteredComponent,
    xi: Vec3,
    n_nodes: usize,
    floor: f64,
) -> Result<Vec<DetectedJump>> {
    let geo = &problem.geometry;
    if geo.dim() != 2 {
        return Err(Error::InvalidGeometry("boundary scans need a planar domain".into()));
    }
    let nodes = geo.boundary_quadrature(n_nodes);
    let values: Vec<Option<f64>> = nodes
        .iter()
        .map(|(y, _)| {
            if y.normal.dot(xi) > 1e-3 {
                trace_outgoing(problem, f1, y, xi).map(Some)
            } else {
                Ok(None)
            }
        })
        .collect::<Result<_>>()?;
    let m = nodes.len();
    let diff: Vec<Option<f64>> = (0..m)
        .map(|j| match (values[j], values[(j + 1) % m]) {
            (Some(a), Some(b)) => Some((b - a).abs()),
            _ => None,
        })
        .collect();
    let mut out = Vec::new();
    for j in 0..m {
        // neighbours must exist: next to a grazing direction the trace has a
        // square-root profile whose steep but continuous rise mimics a jump
        let (Some(d), Some(prev), Some(next)) = (diff[j], diff[(j + m - 1) % m], diff[(j + 1) % m])
        else {
            continue;
        };
        if d > floor && d > SCAN_DOMINANCE * prev.max(next) {
            let a = nodes[j].0.position;
            let b = nodes[(j + 1) % m].0.position;
            out.push(DetectedJump {
                position: geo.boundary_point((a + b) * 0.5),
                magnitude: d,
            });
        }
    }
    Ok(out)
}
