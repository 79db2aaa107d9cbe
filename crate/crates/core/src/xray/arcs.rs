use std::f64::consts::PI;

use rayon::prelude::*;

use crate::boundary::{BoundarySource, Gamma, SideA, SourceKind};
use crate::error::{Error, Result};
use crate::geometry::DomainKind;
use crate::media::RayPath;
use crate::problem::TransportProblem;
use crate::quadrature::GaussLegendre;
use crate::solver::{solve, ScatteredComponent, SolverSettings, SpatialGrid};
use crate::vector::Vec3;

/// Scattering sources of `n` solves, each lit by unit intensity on one arc
/// `[2 pi i / n, 2 pi (i + 1) / n)` of a disk. By linearity the scattered
/// part for any A/B source is a combination of these.
#[derive(Clone, Debug)]
pub struct ArcBasis {
    center: Vec3,
    grid: SpatialGrid,
    gl: GaussLegendre,
    arcs: Vec<Vec<f64>>,
    cumulative: Vec<Vec<f64>>,
}

impl ArcBasis {
    pub fn build(problem: &TransportProblem, n_arcs: usize, settings: &SolverSettings) -> Result<Self> {
        if !matches!(problem.geometry.kind(), DomainKind::Disk { .. }) {
            return Err(Error::InvalidGeometry("arc bases need a disk".into()));
        }
        if !problem.medium.phase().is_isotropic() {
            return Err(Error::InvalidSolver(
                "arc bases support isotropic scattering only".into(),
            ));
        }
        if n_arcs < 3 {
            return Err(Error::InvalidSolver("at least 3 arcs are required".into()));
        }
        let step = 2.0 * PI / n_arcs as f64;
        let mut grid = None;
        let arcs: Vec<Vec<f64>> = (0..n_arcs)
            .into_par_iter()
            .map(|i| -> Result<(SpatialGrid, Vec<f64>)> {
                // the minor arc from a to b lies to the right of the chord a -> b
                let gamma = Gamma::from_angles(&problem.geometry, i as f64 * step, (i + 1) as f64 * step)?;
                let src = BoundarySource::piecewise_ab(1.0, gamma, SideA::Negative);
                let field = solve(&problem.with_source(src), settings)?;
                log::debug!("arc {i}: {} terms", field.certificate().n_terms);
                Ok((field.grid().clone(), field.source_nodal().to_vec()))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .map(|(g, s)| {
                grid.get_or_insert(g);
                s
            })
            .collect();
        let len = arcs[0].len();
        let mut cumulative = vec![vec![0.0; len]];
        for a in &arcs {
            let next: Vec<f64> = cumulative.last().unwrap().iter().zip(a).map(|(c, v)| c + v).collect();
            cumulative.push(next);
        }
        Ok(ArcBasis {
            center: problem.geometry.center(),
            grid: grid.expect("at least one arc"),
            gl: GaussLegendre::new(settings.quad_order),
            arcs,
            cumulative,
        })
    }

    pub fn n_arcs(&self) -> usize {
        self.arcs.len()
    }

    /// Terms of the cumulative source up to angle `phi` in `[0, 2 pi]`.
    fn upto(&self, phi: f64, sign: f64, out: &mut Vec<(usize, bool, f64)>) {
        let n = self.arcs.len();
        let x = phi / (2.0 * PI) * n as f64;
        let i = (x.floor().max(0.0) as usize).min(n - 1);
        let f = x - i as f64;
        out.push((i, true, sign));
        if f > 0.0 {
            out.push((i, false, sign * f));
        }
    }

    /// Scattered part for an A/B source on the same disk and medium.
    pub fn combination(&self, source: &BoundarySource) -> Result<ArcCombination<'_>> {
        let SourceKind::PiecewiseAB { intensity, gamma, .. } = source.kind() else {
            return Err(Error::InvalidSource("arc combinations need an A/B source".into()));
        };
        let pts = gamma.points();
        if pts.len() != 2 {
            return Err(Error::InvalidSource("arc combinations need a planar gamma".into()));
        }
        let ang = |p: Vec3| (p - self.center).angle().rem_euclid(2.0 * PI);
        let (mut start, mut end) = (ang(pts[0]), ang(pts[1]));
        // pick the counterclockwise arc that carries the intensity
        let span = (end - start).rem_euclid(2.0 * PI);
        let mid = Vec3::from_angle(start + 0.5 * span) + self.center;
        if source.side_of(mid) != Some(crate::boundary::Side::A) {
            std::mem::swap(&mut start, &mut end);
        }
        let mut raw = Vec::with_capacity(6);
        self.upto(end, 1.0, &mut raw);
        self.upto(start, -1.0, &mut raw);
        if start > end {
            raw.push((self.arcs.len(), true, 1.0));
        }
        let terms = raw
            .into_iter()
            .map(|(i, cum, w)| {
                let arr: &[f64] = if cum { &self.cumulative[i] } else { &self.arcs[i] };
                (arr, w * intensity)
            })
            .collect();
        Ok(ArcCombination { basis: self, terms })
    }
}

/// Linear combination of arc-basis sources, evaluated by one transport step.
#[derive(Clone, Debug)]
pub struct ArcCombination<'a> {
    basis: &'a ArcBasis,
    terms: Vec<(&'a [f64], f64)>,
}

impl ScatteredComponent for ArcCombination<'_> {
    fn f1_at(&self, problem: &TransportProblem, x: Vec3, xi: Vec3) -> Result<f64> {
        let tau = problem.geometry.tau_minus(x, xi)?;
        let mut path = RayPath::default();
        path.trace(&problem.medium, &problem.geometry, &problem.partition, x, xi, tau)?;
        let grid = &self.basis.grid;
        Ok(path.collision_integral(&problem.medium, &self.basis.gl, |p| {
            self.terms.iter().map(|(a, w)| w * grid.interpolate(a, p)).sum()
        }))
    }

    fn spacing(&self) -> f64 {
        self.basis.grid.spacing()
    }
}
