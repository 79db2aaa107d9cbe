//! Line integrals of the attenuation, sinograms assembled from measured
//! jumps, and filtered backprojection.

mod arcs;
mod fbp;

pub use arcs::{ArcBasis, ArcCombination};
pub use fbp::{fbp_reconstruct, image_error, ramp_filter, ImageError, ReconstructedImage};

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::boundary::{BoundarySource, Gamma, SideA};
use crate::error::{Error, Result};
use crate::geometry::{DomainGeometry, DomainKind, SubdomainPartition};
use crate::jump::{characteristic, extract_jump, predicted_jump, JumpMeasurement, PredictedDiscontinuity};
use crate::media::MediumModel;
use crate::problem::TransportProblem;
use crate::solver::{solve, SolverSettings};
use crate::vector::Vec3;

/// Jumps below this fraction of the intensity count as missing.
pub const JUMP_FLOOR: f64 = 1e-12;

/// Parallel-beam line with unit normal `(cos theta, sin theta)` at signed
/// offset `s` from `center`: a point on it and its direction
/// `(-sin theta, cos theta)`.
pub fn beam_line(center: Vec3, theta: f64, s: f64) -> (Vec3, Vec3) {
    let n = Vec3::from_angle(theta);
    (center + n * s, n.perp())
}

/// `int mu_t` over the line `(theta, s)` about the domain centre, with exact
/// interface segmentation. Lines missing the domain give 0.
pub fn forward_xray(
    medium: &MediumModel,
    geometry: &DomainGeometry,
    partition: &SubdomainPartition,
    theta: f64,
    s: f64,
) -> Result<f64> {
    let (p, d) = beam_line(geometry.center(), theta, s);
    let Some((t0, t1)) = geometry.line_params(p, d) else {
        return Ok(0.0);
    };
    if t1 - t0 <= 1e-12 * geometry.diameter() {
        return Ok(0.0);
    }
    // integrate both halves from the midpoint so rounding at nearly
    // tangent lines cannot push a span past the chord
    let mid = p + d * (0.5 * (t0 + t1));
    let mut total = 0.0;
    for dir in [d, -d] {
        let tau = geometry.tau_minus(mid, dir)?;
        total += medium.optical_depth(geometry, partition, mid, dir, tau)?.value();
    }
    Ok(total)
}

/// Angles `theta_m = pi m / M` and offsets `s_q = -rho + 2 rho q / (Q - 1)`
/// over a disk of radius `rho`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SinogramGrid {
    pub n_angles: usize,
    pub n_offsets: usize,
    pub center: Vec3,
    pub rho: f64,
}

impl SinogramGrid {
    pub fn new(geometry: &DomainGeometry, n_angles: usize, n_offsets: usize) -> Result<Self> {
        let rho = match geometry.kind() {
            DomainKind::Disk { radius, .. } => *radius,
            _ => {
                return Err(Error::InvalidGeometry(
                    "sinograms are defined for disk domains".into(),
                ))
            }
        };
        if n_angles == 0 || n_offsets < 2 {
            return Err(Error::GridTooCoarse {
                angles: n_angles,
                offsets: n_offsets,
            });
        }
        Ok(SinogramGrid {
            n_angles,
            n_offsets,
            center: geometry.center(),
            rho,
        })
    }

    pub fn theta(&self, m: usize) -> f64 {
        PI * m as f64 / self.n_angles as f64
    }

    pub fn offset(&self, q: usize) -> f64 {
        -self.rho + 2.0 * self.rho * q as f64 / (self.n_offsets - 1) as f64
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.rho / (self.n_offsets - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.n_angles * self.n_offsets
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sinogram {
    pub grid: SinogramGrid,
    /// `g(theta_m, s_q)` at index `m * Q + q`.
    pub values: Vec<f64>,
    /// Entries filled by interpolation in `s`.
    pub inpainted: Vec<(usize, usize)>,
}

impl Sinogram {
    pub fn zeros(grid: SinogramGrid) -> Self {
        Sinogram {
            grid,
            values: vec![0.0; grid.len()],
            inpainted: Vec::new(),
        }
    }

    pub fn get(&self, m: usize, q: usize) -> f64 {
        self.values[m * self.grid.n_offsets + q]
    }

    pub fn row(&self, m: usize) -> &[f64] {
        let q = self.grid.n_offsets;
        &self.values[m * q..(m + 1) * q]
    }

    pub fn scaled(&self, a: f64) -> Self {
        Sinogram {
            grid: self.grid,
            values: self.values.iter().map(|v| a * v).collect(),
            inpainted: self.inpainted.clone(),
        }
    }
}

/// Line integrals of `mu_t` on every grid line.
pub fn oracle_sinogram(problem: &TransportProblem, grid: SinogramGrid) -> Result<Sinogram> {
    let values = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let (m, q) = (i / grid.n_offsets, i % grid.n_offsets);
            forward_xray(
                &problem.medium,
                &problem.geometry,
                &problem.partition,
                grid.theta(m),
                grid.offset(q),
            )
        })
        .collect::<Result<_>>()?;
    Ok(Sinogram {
        grid,
        values,
        inpainted: Vec::new(),
    })
}

/// Experiment realizing one sinogram line: `gamma` is placed at the two
/// ends of the chord and the measured characteristic enters at the first.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChordPlan {
    pub m: usize,
    pub q: usize,
    pub theta: f64,
    pub s: f64,
    /// `None` for tangent lines, whose integral is exactly zero.
    pub characteristic: Option<PredictedDiscontinuity>,
}

impl ChordPlan {
    pub fn gamma_points(&self) -> Option<[Vec3; 2]> {
        self.characteristic
            .map(|pd| [pd.base.position, pd.exit.position])
    }

    /// The A/B source of this experiment: intensity on the side to the left
    /// of the chord direction.
    pub fn source(&self, geometry: &DomainGeometry, intensity: f64) -> Result<Option<BoundarySource>> {
        let Some([a, b]) = self.gamma_points() else {
            return Ok(None);
        };
        Ok(Some(BoundarySource::piecewise_ab(
            intensity,
            Gamma::from_points(geometry, a, b)?,
            SideA::Positive,
        )))
    }
}

pub fn plan_experiments(geometry: &DomainGeometry, grid: SinogramGrid) -> Result<Vec<ChordPlan>> {
    let tiny = 1e-9 * grid.rho;
    (0..grid.len())
        .map(|i| {
            let (m, q) = (i / grid.n_offsets, i % grid.n_offsets);
            let (theta, s) = (grid.theta(m), grid.offset(q));
            let (p, d) = beam_line(grid.center, theta, s);
            let characteristic = match geometry.line_params(p, d) {
                Some((t0, t1)) if t1 - t0 > tiny && s.abs() < grid.rho - tiny => {
                    Some(characteristic(geometry, p + d * t0, d)?)
                }
                _ => None,
            };
            Ok(ChordPlan {
                m,
                q,
                theta,
                s,
                characteristic,
            })
        })
        .collect()
}

/// How each jump is obtained.
#[derive(Clone, Debug)]
pub enum JumpMode {
    /// Decay-law value; isolates inversion error from extraction error.
    Exact,
    /// One full solve per chord.
    Direct(SolverSettings),
    /// Superposition of precomputed single-arc solves.
    ArcBasis(ArcBasis),
}

#[derive(Clone, Debug)]
pub struct SinogramReport {
    pub sinogram: Sinogram,
    pub plans: Vec<ChordPlan>,
    pub measurements: Vec<Option<JumpMeasurement>>,
}

impl SinogramReport {
    /// Largest relative deviation of a measured jump from its prediction.
    pub fn max_rel_err(&self) -> f64 {
        self.measurements
            .iter()
            .flatten()
            .map(|m| m.rel_err())
            .fold(0.0, f64::max)
    }
}

enum Entry {
    Depth(f64),
    Jump(JumpMeasurement),
}

/// Assembles `g = -log(jump / I)` over the grid. Missing entries are
/// inpainted linearly in `s` and listed in the result.
pub fn jump_to_sinogram(
    problem: &TransportProblem,
    grid: SinogramGrid,
    mode: &JumpMode,
    intensity: f64,
) -> Result<SinogramReport> {
    if !(intensity > 0.0) {
        return Err(Error::InvalidSource("intensity must be positive".into()));
    }
    let plans = plan_experiments(&problem.geometry, grid)?;
    let measured: Vec<Option<Entry>> = plans
        .par_iter()
        .map(|plan| -> Result<Option<Entry>> {
            let Some(pd) = plan.characteristic else {
                return Ok(None);
            };
            let source = plan.source(&problem.geometry, intensity)?.expect("chord has gamma");
            let chord_problem = problem.with_source(source);
            let predicted = predicted_jump(&chord_problem, &pd)?;
            if predicted < 1e-300 {
                return Err(Error::DynamicRangeExhausted {
                    theta: plan.theta,
                    s: plan.s,
                    predicted,
                });
            }
            Ok(Some(match mode {
                // the decay law gives jump = I exp(-X mu_t); taking X directly
                // keeps exact sinograms free of exp/log round-off
                JumpMode::Exact => Entry::Depth(forward_xray(
                    &problem.medium,
                    &problem.geometry,
                    &problem.partition,
                    plan.theta,
                    plan.s,
                )?),
                JumpMode::Direct(settings) => {
                    let field = solve(&chord_problem, settings)?;
                    let m = extract_jump(&chord_problem, &field, &pd, None)?;
                    Entry::Jump(m)
                }
                JumpMode::ArcBasis(basis) => {
                    let combo = basis.combination(&chord_problem.source)?;
                    Entry::Jump(extract_jump(&chord_problem, &combo, &pd, None)?)
                }
            }))
        })
        .collect::<Result<_>>()?;

    let mut sino = Sinogram::zeros(grid);
    let mut missing = vec![false; grid.len()];
    let mut measurements = Vec::with_capacity(grid.len());
    for (i, entry) in measured.into_iter().enumerate() {
        match entry {
            None => measurements.push(None),
            Some(Entry::Depth(x)) => {
                sino.values[i] = x;
                measurements.push(None);
            }
            Some(Entry::Jump(m)) => {
                let jump = m.extracted;
                if jump.is_finite() && jump > JUMP_FLOOR * intensity {
                    sino.values[i] = -(jump / intensity).ln();
                } else {
                    missing[i] = true;
                }
                measurements.push(Some(m));
            }
        }
    }
    inpaint(&mut sino, &missing);
    Ok(SinogramReport {
        sinogram: sino,
        plans,
        measurements,
    })
}

fn inpaint(sino: &mut Sinogram, missing: &[bool]) {
    let nq = sino.grid.n_offsets;
    for m in 0..sino.grid.n_angles {
        let row = m * nq;
        for q in 0..nq {
            if !missing[row + q] {
                continue;
            }
            let left = (0..q).rev().find(|&j| !missing[row + j]);
            let right = (q + 1..nq).find(|&j| !missing[row + j]);
            let v = match (left, right) {
                (Some(a), Some(b)) => {
                    let t = (q - a) as f64 / (b - a) as f64;
                    sino.values[row + a] * (1.0 - t) + sino.values[row + b] * t
                }
                (Some(a), None) => sino.values[row + a],
                (None, Some(b)) => sino.values[row + b],
                (None, None) => 0.0,
            };
            log::warn!("inpainting sinogram entry (m = {m}, q = {q})");
            sino.values[row + q] = v;
            sino.inpainted.push((m, q));
        }
    }
}
