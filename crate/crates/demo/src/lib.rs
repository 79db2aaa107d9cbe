//! WebAssembly bindings behind the browser demo: phantom sinograms, their
//! filtered backprojection, and the outgoing radiance of an A/B source.

use std::f64::consts::PI;

use raybound::jump::{characteristic, predicted_jump};
use raybound::solver::{solve, trace_outgoing, SolverSettings};
use raybound::xray::{fbp_reconstruct, oracle_sinogram, SinogramGrid};
use raybound::{
    BoundarySource, DomainGeometry, Gamma, Interface, MediumModel, PhaseFunction, Result, SideA,
    SubdomainPartition, TransportProblem, Vec3,
};
use wasm_bindgen::prelude::*;

fn js(e: raybound::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn phantom(mu_shell: f64, mu_core: f64, core_radius: f64) -> Result<TransportProblem> {
    let g = DomainGeometry::unit_disk();
    let p = SubdomainPartition::new(
        &[Interface::Sphere {
            center: Vec3::ZERO,
            radius: core_radius,
        }],
        2,
    )?;
    let m = MediumModel::new(
        vec![mu_shell.into(), mu_core.into()],
        vec![0.0.into(), 0.0.into()],
        PhaseFunction::Isotropic,
        &g,
        &p,
    )?;
    TransportProblem::new(g, p, m, BoundarySource::constant(1.0))
}

pub fn sinogram_values(
    mu_shell: f64,
    mu_core: f64,
    core_radius: f64,
    n_angles: usize,
    n_offsets: usize,
) -> Result<Vec<f64>> {
    let p = phantom(mu_shell, mu_core, core_radius)?;
    let grid = SinogramGrid::new(&p.geometry, n_angles, n_offsets)?;
    Ok(oracle_sinogram(&p, grid)?.values)
}

pub fn reconstruction_values(
    mu_shell: f64,
    mu_core: f64,
    core_radius: f64,
    n_angles: usize,
    n_offsets: usize,
    size: usize,
) -> Result<Vec<f64>> {
    let p = phantom(mu_shell, mu_core, core_radius)?;
    let grid = SinogramGrid::new(&p.geometry, n_angles, n_offsets)?;
    Ok(fbp_reconstruct(&oracle_sinogram(&p, grid)?, size)?.values)
}

/// Line integrals of `mu_t` through a two-region disk phantom; row `m`
/// holds angle `pi m / n_angles`, offsets run from -1 to 1.
#[wasm_bindgen]
pub fn phantom_sinogram(
    mu_shell: f64,
    mu_core: f64,
    core_radius: f64,
    n_angles: usize,
    n_offsets: usize,
) -> std::result::Result<Vec<f64>, JsError> {
    sinogram_values(mu_shell, mu_core, core_radius, n_angles, n_offsets).map_err(js)
}

/// Filtered backprojection of [`phantom_sinogram`] on a `size x size`
/// pixel grid, rows from bottom to top.
#[wasm_bindgen]
pub fn phantom_reconstruction(
    mu_shell: f64,
    mu_core: f64,
    core_radius: f64,
    n_angles: usize,
    n_offsets: usize,
    size: usize,
) -> std::result::Result<Vec<f64>, JsError> {
    reconstruction_values(mu_shell, mu_core, core_radius, n_angles, n_offsets, size).map_err(js)
}

/// Outgoing radiance along the unit circle for one direction.
#[wasm_bindgen]
pub struct TraceScan {
    angles: Vec<f64>,
    values: Vec<f64>,
    exits: Vec<f64>,
    jumps: Vec<f64>,
}

#[wasm_bindgen]
impl TraceScan {
    /// Polar angles of the boundary nodes.
    pub fn angles(&self) -> Vec<f64> {
        self.angles.clone()
    }

    /// `f(y, xi)`; NaN where `xi` is not outgoing.
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    /// Polar angles where the decay law puts a jump.
    pub fn predicted_exits(&self) -> Vec<f64> {
        self.exits.clone()
    }

    pub fn predicted_jumps(&self) -> Vec<f64> {
        self.jumps.clone()
    }
}

pub fn trace_scan(mu_t: f64, mu_s: f64, gamma_deg: f64, direction_deg: f64, n_nodes: usize) -> Result<TraceScan> {
    let g = DomainGeometry::unit_disk();
    let a = gamma_deg.to_radians();
    let source = BoundarySource::piecewise_ab(1.0, Gamma::from_angles(&g, a, a + PI)?, SideA::Positive);
    let m = MediumModel::homogeneous(mu_t, mu_s, PhaseFunction::Isotropic, &g)?;
    let p = TransportProblem::new(g, SubdomainPartition::homogeneous(), m, source)?;
    let settings = SolverSettings {
        h: 1.0 / 16.0,
        n_directions: 16,
        tol: 1e-2,
        ..SolverSettings::default()
    };
    let field = solve(&p, &settings)?;
    let xi = Vec3::from_angle(direction_deg.to_radians());
    let mut angles = Vec::with_capacity(n_nodes);
    let mut values = Vec::with_capacity(n_nodes);
    for j in 0..n_nodes {
        let phi = 2.0 * PI * j as f64 / n_nodes as f64;
        let y = p.geometry.boundary_at_angle(phi);
        angles.push(phi);
        values.push(if y.normal.dot(xi) > 1e-3 {
            trace_outgoing(&p, &field, &y, xi)?
        } else {
            f64::NAN
        });
    }
    let mut exits = Vec::new();
    let mut jumps = Vec::new();
    for &base in p.source.gamma().expect("A/B source").points() {
        if let Ok(pd) = characteristic(&p.geometry, base, xi) {
            if !pd.grazing {
                exits.push(pd.exit.position.angle().rem_euclid(2.0 * PI));
                jumps.push(predicted_jump(&p, &pd)?);
            }
        }
    }
    Ok(TraceScan {
        angles,
        values,
        exits,
        jumps,
    })
}

/// Solves a coarse homogeneous problem whose incoming data jump at the
/// boundary angles `gamma_deg` and `gamma_deg + 180`, and samples the
/// outgoing radiance in direction `direction_deg` at `n_nodes` boundary
/// points.
#[wasm_bindgen]
pub fn boundary_trace(
    mu_t: f64,
    mu_s: f64,
    gamma_deg: f64,
    direction_deg: f64,
    n_nodes: usize,
) -> std::result::Result<TraceScan, JsError> {
    trace_scan(mu_t, mu_s, gamma_deg, direction_deg, n_nodes).map_err(js)
}
