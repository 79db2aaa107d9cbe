//! Incoming boundary data `f_0` on the incoming boundary and the
//! discontinuity set of the piecewise-constant A/B source.

use crate::error::{Error, Result};
use crate::geometry::{BoundaryPoint, DomainGeometry};
use crate::vector::Vec3;

/// Which side of the splitting plane carries the intensity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SideA {
    Positive,
    Negative,
}

/// Side of a boundary point relative to `gamma`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `A` or `gamma` itself.
    A,
    B,
}

/// The curve `gamma` splitting the boundary, stored as a signed plane
/// `normal . y - offset`. In d = 2 it is the line through the two points,
/// which meets a convex boundary exactly at those points.
#[derive(Clone, Debug, PartialEq)]
pub struct Gamma {
    normal: Vec3,
    offset: f64,
    points: Vec<Vec3>,
    tol: f64,
}

impl Gamma {
    /// Two boundary points at planar angles `a1`, `a2` (d = 2). The positive
    /// side is to the left of the chord from the first to the second point.
    pub fn from_angles(geometry: &DomainGeometry, a1: f64, a2: f64) -> Result<Self> {
        let a = geometry.boundary_at_angle(a1).position;
        let b = geometry.boundary_at_angle(a2).position;
        Self::from_points(geometry, a, b)
    }

    pub fn from_points(geometry: &DomainGeometry, a: Vec3, b: Vec3) -> Result<Self> {
        if geometry.dim() != 2 {
            return Err(Error::InvalidSource(
                "gamma as two points needs a planar domain".into(),
            ));
        }
        let d = b - a;
        if d.norm() <= 1e-12 * geometry.diameter() {
            return Err(Error::InvalidSource("gamma points coincide".into()));
        }
        let normal = d.perp().normalized();
        Ok(Gamma {
            normal,
            offset: normal.dot(a),
            points: vec![a, b],
            tol: 1e-10 * geometry.diameter(),
        })
    }

    /// Planar section of the ball boundary (d = 3).
    pub fn plane(geometry: &DomainGeometry, normal: Vec3, offset: f64) -> Result<Self> {
        if geometry.dim() != 3 {
            return Err(Error::InvalidSource("gamma plane needs a 3D domain".into()));
        }
        let len = normal.norm();
        if !(len > 0.0) {
            return Err(Error::InvalidSource("gamma plane normal is zero".into()));
        }
        let normal = normal / len;
        let offset = offset / len;
        let dist = (normal.dot(geometry.center()) - offset).abs();
        let radius = geometry.radius().unwrap_or(0.0);
        if dist >= radius {
            return Err(Error::InvalidSource(
                "gamma plane does not cut the boundary".into(),
            ));
        }
        Ok(Gamma {
            normal,
            offset,
            points: Vec::new(),
            tol: 1e-10 * geometry.diameter(),
        })
    }

    #[inline]
    pub fn signed_side(&self, y: Vec3) -> f64 {
        self.normal.dot(y) - self.offset
    }

    pub fn normal(&self) -> Vec3 {
        self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// The two points of a planar `gamma`.
    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn on_gamma(&self, y: Vec3) -> bool {
        self.signed_side(y).abs() <= self.tol
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SourceKind {
    Constant { value: f64 },
    /// `I (1 + a (-n . xi))`: continuous in direction at every boundary point.
    DirectionSmooth { intensity: f64, anisotropy: f64 },
    /// `I exp(k (xi . beam - 1))`: continuous in position for every direction.
    SpaceSmooth {
        intensity: f64,
        beam: Vec3,
        concentration: f64,
    },
    /// `I` on `A` and `gamma`, zero on `B`, independent of direction.
    PiecewiseAB {
        intensity: f64,
        gamma: Gamma,
        side_a: SideA,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundarySource {
    kind: SourceKind,
}

impl BoundarySource {
    pub fn new(kind: SourceKind) -> Result<Self> {
        let finite = match &kind {
            SourceKind::Constant { value } => value.is_finite(),
            SourceKind::DirectionSmooth {
                intensity,
                anisotropy,
            } => intensity.is_finite() && anisotropy.is_finite(),
            SourceKind::SpaceSmooth {
                intensity,
                beam,
                concentration,
            } => {
                intensity.is_finite()
                    && concentration.is_finite()
                    && *concentration >= 0.0
                    && (beam.norm() - 1.0).abs() < 1e-9
            }
            SourceKind::PiecewiseAB { intensity, .. } => intensity.is_finite(),
        };
        if !finite {
            return Err(Error::InvalidSource(
                "source parameters must be finite (beam a unit vector)".into(),
            ));
        }
        Ok(BoundarySource { kind })
    }

    pub fn constant(value: f64) -> Self {
        BoundarySource {
            kind: SourceKind::Constant { value },
        }
    }

    pub fn piecewise_ab(intensity: f64, gamma: Gamma, side_a: SideA) -> Self {
        BoundarySource {
            kind: SourceKind::PiecewiseAB {
                intensity,
                gamma,
                side_a,
            },
        }
    }

    pub fn kind(&self) -> &SourceKind {
        &self.kind
    }

    /// `sup |f_0|` over the incoming boundary.
    pub fn sup_abs(&self) -> f64 {
        match &self.kind {
            SourceKind::Constant { value } => value.abs(),
            SourceKind::DirectionSmooth {
                intensity,
                anisotropy,
            } => intensity.abs() * (1.0 + anisotropy.abs()),
            SourceKind::SpaceSmooth { intensity, .. } => intensity.abs(),
            SourceKind::PiecewiseAB { intensity, .. } => intensity.abs(),
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        match &self.kind {
            SourceKind::Constant { value } => *value >= 0.0,
            SourceKind::DirectionSmooth {
                intensity,
                anisotropy,
            } => *intensity >= 0.0 && anisotropy.abs() <= 1.0,
            SourceKind::SpaceSmooth { intensity, .. } => *intensity >= 0.0,
            SourceKind::PiecewiseAB { intensity, .. } => *intensity >= 0.0,
        }
    }

    /// Intensity `I` of the A/B source.
    pub fn intensity(&self) -> Option<f64> {
        match &self.kind {
            SourceKind::PiecewiseAB { intensity, .. } => Some(*intensity),
            _ => None,
        }
    }

    pub fn gamma(&self) -> Option<&Gamma> {
        match &self.kind {
            SourceKind::PiecewiseAB { gamma, .. } => Some(gamma),
            _ => None,
        }
    }

    /// Side of `y` for the A/B source; `gamma` belongs to `A`.
    pub fn side_of(&self, y: Vec3) -> Option<Side> {
        match &self.kind {
            SourceKind::PiecewiseAB { gamma, side_a, .. } => {
                if gamma.on_gamma(y) {
                    return Some(Side::A);
                }
                let d = gamma.signed_side(y);
                let in_a = match side_a {
                    SideA::Positive => d > 0.0,
                    SideA::Negative => d < 0.0,
                };
                Some(if in_a { Side::A } else { Side::B })
            }
            _ => None,
        }
    }

    /// `f_0(y, xi)`; `xi` must be incoming at `y`.
    pub fn eval(&self, y: &BoundaryPoint, xi: Vec3) -> Result<f64> {
        let nd = y.normal.dot(xi);
        if nd >= 0.0 {
            return Err(Error::NotIncoming { normal_dot: nd });
        }
        Ok(self.eval_unchecked(y.position, y.normal, xi))
    }

    /// `f_0` without the incoming-direction check. Used along backtraced
    /// characteristics where the entry point is incoming by construction
    /// (up to grazing round-off).
    #[inline]
    pub fn eval_unchecked(&self, y: Vec3, normal: Vec3, xi: Vec3) -> f64 {
        match &self.kind {
            SourceKind::Constant { value } => *value,
            SourceKind::DirectionSmooth {
                intensity,
                anisotropy,
            } => intensity * (1.0 + anisotropy * (-normal.dot(xi)).max(0.0)),
            SourceKind::SpaceSmooth {
                intensity,
                beam,
                concentration,
            } => intensity * (concentration * (xi.dot(*beam) - 1.0)).exp(),
            SourceKind::PiecewiseAB { intensity, .. } => match self.side_of(y) {
                Some(Side::A) => *intensity,
                _ => 0.0,
            },
        }
    }

    /// Discontinuity set of `f_0`. Continuous sources yield an empty set
    /// with `continuous_source` set.
    pub fn discontinuity_set(&self, geometry: &DomainGeometry, n_samples: usize) -> DiscontinuitySet {
        let (intensity, gamma) = match &self.kind {
            SourceKind::PiecewiseAB {
                intensity, gamma, ..
            } => (*intensity, gamma),
            _ => {
                return DiscontinuitySet {
                    families: Vec::new(),
                    jump: 0.0,
                    continuous_source: true,
                }
            }
        };
        let families = if geometry.dim() == 2 {
            gamma
                .points()
                .iter()
                .map(|p| DiscontinuityFamily {
                    base: geometry.boundary_point(*p),
                })
                .collect()
        } else {
            let c = geometry.center();
            let rho = geometry.radius().unwrap_or(0.0);
            let n = gamma.normal();
            let dist = gamma.offset() - n.dot(c);
            let cc = c + n * dist;
            let r = (rho * rho - dist * dist).max(0.0).sqrt();
            let mut u = n.cross(Vec3::new(1.0, 0.0, 0.0));
            if u.norm() < 1e-6 {
                u = n.cross(Vec3::new(0.0, 1.0, 0.0));
            }
            let u = u.normalized();
            let v = n.cross(u);
            let m = n_samples.max(1);
            (0..m)
                .map(|j| {
                    let a = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
                    let p = cc + (u * a.cos() + v * a.sin()) * r;
                    DiscontinuityFamily {
                        base: geometry.boundary_point(p),
                    }
                })
                .collect()
        };
        DiscontinuitySet {
            families,
            jump: intensity,
            continuous_source: false,
        }
    }
}

/// All incoming directions at one base point on `gamma`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscontinuityFamily {
    pub base: BoundaryPoint,
}

impl DiscontinuityFamily {
    pub fn contains(&self, xi: Vec3) -> bool {
        self.base.normal.dot(xi) < 0.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscontinuitySet {
    pub families: Vec<DiscontinuityFamily>,
    /// `[f_0]` across `gamma` (equal to `I` for the A/B source).
    pub jump: f64,
    pub continuous_source: bool,
}

impl DiscontinuitySet {
    pub fn is_empty(&self) -> bool {
        self.families.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn ab_source() -> (DomainGeometry, BoundarySource) {
        let g = DomainGeometry::unit_disk();
        let gamma = Gamma::from_angles(&g, FRAC_PI_2, -FRAC_PI_2).unwrap();
        (g.clone(), BoundarySource::piecewise_ab(1.0, gamma, SideA::Positive))
    }

    #[test]
    fn eval_examples() {
        let (g, src) = ab_source();
        let right = g.boundary_point(Vec3::planar(1.0, 0.0));
        assert_eq!(src.eval(&right, Vec3::planar(-1.0, 0.0)).unwrap(), 1.0);
        let left = g.boundary_point(Vec3::planar(-1.0, 0.0));
        assert_eq!(src.eval(&left, Vec3::planar(1.0, 0.0)).unwrap(), 0.0);
        let top = g.boundary_point(Vec3::planar(0.0, 1.0));
        for a in [-1.4, -0.7, 0.0, 0.7, 1.4] {
            let xi = -Vec3::from_angle(FRAC_PI_2 + a);
            assert_eq!(src.eval(&top, xi).unwrap(), 1.0);
        }
        assert!(matches!(
            src.eval(&right, Vec3::planar(1.0, 0.0)),
            Err(Error::NotIncoming { .. })
        ));
    }

    #[test]
    fn discontinuity_families_2d() {
        let (g, src) = ab_source();
        let set = src.discontinuity_set(&g, 0);
        assert_eq!(set.families.len(), 2);
        let top = set
            .families
            .iter()
            .find(|f| (f.base.position - Vec3::planar(0.0, 1.0)).norm() < 1e-12)
            .unwrap();
        assert!(top.contains(Vec3::planar(0.0, -1.0)));
        assert_eq!(set.jump, 1.0);
        let c = BoundarySource::constant(2.0).discontinuity_set(&g, 0);
        assert!(c.is_empty() && c.continuous_source);
    }

    #[test]
    fn discontinuity_circle_3d() {
        let g = DomainGeometry::ball([0.0; 3], 1.0).unwrap();
        let gamma = Gamma::plane(&g, Vec3::new(0.0, 0.0, 1.0), 0.0).unwrap();
        let src = BoundarySource::piecewise_ab(1.0, gamma, SideA::Positive);
        let set = src.discontinuity_set(&g, 16);
        assert_eq!(set.families.len(), 16);
        for f in &set.families {
            assert!(f.base.position.z.abs() < 1e-12);
            assert!((f.base.position.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn source_sides() {
        let (_, src) = ab_source();
        assert_eq!(src.side_of(Vec3::planar(0.0, 1.0)), Some(Side::A));
        assert_eq!(src.side_of(Vec3::planar(0.3, -0.95)), Some(Side::A));
        assert_eq!(src.side_of(Vec3::planar(-0.3, -0.95)), Some(Side::B));
    }
}
