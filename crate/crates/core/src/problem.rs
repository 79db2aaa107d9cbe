use crate::boundary::BoundarySource;
use crate::error::{Error, Result};
use crate::geometry::{DomainGeometry, SubdomainPartition};
use crate::media::{MediumModel, OpticalDepth, RayPath};
use crate::vector::Vec3;

/// Domain, partition, medium and incoming data of one transport problem.
#[derive(Clone, Debug)]
pub struct TransportProblem {
    pub geometry: DomainGeometry,
    pub partition: SubdomainPartition,
    pub medium: MediumModel,
    pub source: BoundarySource,
}

impl TransportProblem {
    pub fn new(
        geometry: DomainGeometry,
        partition: SubdomainPartition,
        medium: MediumModel,
        source: BoundarySource,
    ) -> Result<Self> {
        if medium.dim() != geometry.dim() {
            return Err(Error::InvalidMedium(
                "medium and geometry dimensions differ".into(),
            ));
        }
        if let Some(g) = source.gamma() {
            let expect_points = if geometry.dim() == 2 { 2 } else { 0 };
            if g.points().len() != expect_points {
                return Err(Error::InvalidSource(
                    "gamma does not match the domain dimension".into(),
                ));
            }
        }
        Ok(TransportProblem {
            geometry,
            partition,
            medium,
            source,
        })
    }

    pub fn dim(&self) -> usize {
        self.geometry.dim()
    }

    /// Same domain and medium with different incoming data.
    pub fn with_source(&self, source: BoundarySource) -> Self {
        TransportProblem {
            source,
            ..self.clone()
        }
    }

    pub fn optical_depth(&self, x: Vec3, xi: Vec3, s: f64) -> Result<OpticalDepth> {
        self.medium
            .optical_depth(&self.geometry, &self.partition, x, xi, s)
    }

    pub fn attenuation(&self, x: Vec3, xi: Vec3, s: f64) -> Result<f64> {
        Ok(self.optical_depth(x, xi, s)?.attenuation())
    }

    /// Optical depth of the whole backward chord from `x`.
    pub fn chord_depth(&self, x: Vec3, xi: Vec3) -> Result<f64> {
        let tau = self.geometry.tau_minus(x, xi)?;
        Ok(self.optical_depth(x, xi, tau)?.value())
    }

    /// Unscattered term `exp(-M_t(x, xi; tau_-)) f_0(P(x, xi), xi)`,
    /// evaluated by exact ray tracing.
    pub fn ballistic(&self, x: Vec3, xi: Vec3) -> Result<f64> {
        let mut path = RayPath::default();
        self.ballistic_with(&mut path, x, xi)
    }

    /// [`ballistic`](Self::ballistic) with a caller-provided scratch path.
    pub fn ballistic_with(&self, path: &mut RayPath, x: Vec3, xi: Vec3) -> Result<f64> {
        let tau = self.geometry.tau_minus(x, xi)?;
        path.trace(&self.medium, &self.geometry, &self.partition, x, xi, tau)?;
        let entry = x - xi * tau;
        let normal = self.geometry.normal_at(entry);
        let f0 = self.source.eval_unchecked(entry, normal, xi);
        if f0 == 0.0 {
            return Ok(0.0);
        }
        Ok((-path.total_depth()).exp() * f0)
    }
}
