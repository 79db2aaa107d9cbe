use crate::error::{Error, Result};
use crate::quadrature::halton;
use crate::vector::Vec3;

use super::DomainGeometry;

/// One interface surface of the partition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Interface {
    /// Circle (d = 2) or sphere (d = 3); inside means `|x - c| < r`.
    Sphere { center: Vec3, radius: f64 },
    /// Straight cut `normal . x = offset`; inside means `normal . x > offset`.
    Plane { normal: Vec3, offset: f64 },
}

/// Relative threshold on the discriminant below which a ray is tangent to a
/// spherical interface.
pub const TANGENT_TOL: f64 = 1e-14;

/// Subdomains cut out by nested spheres and straight cuts.
///
/// Labels: `depth + (spheres + 1) * cut_bits`, where `depth` counts the
/// spheres containing the point and bit `i` of `cut_bits` is set when the
/// point lies on the positive side of cut `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubdomainPartition {
    spheres: Vec<(Vec3, f64)>,
    planes: Vec<(Vec3, f64)>,
    max_crossings: usize,
}

impl SubdomainPartition {
    /// Single subdomain, no interfaces.
    pub fn homogeneous() -> Self {
        SubdomainPartition {
            spheres: Vec::new(),
            planes: Vec::new(),
            max_crossings: 0,
        }
    }

    pub fn new(interfaces: &[Interface], max_crossings: usize) -> Result<Self> {
        let mut spheres = Vec::new();
        let mut planes = Vec::new();
        for iface in interfaces {
            match *iface {
                Interface::Sphere { center, radius } => {
                    if !(radius > 0.0 && radius.is_finite()) {
                        return Err(Error::InvalidGeometry(format!(
                            "interface radius must be positive, got {radius}"
                        )));
                    }
                    spheres.push((center, radius));
                }
                Interface::Plane { normal, offset } => {
                    let len = normal.norm();
                    if !(len > 0.0) {
                        return Err(Error::InvalidGeometry("cut normal must be nonzero".into()));
                    }
                    planes.push((normal / len, offset / len));
                }
            }
        }
        spheres.sort_by(|a, b| b.1.total_cmp(&a.1));
        if planes.len() > 16 {
            return Err(Error::InvalidGeometry("at most 16 straight cuts".into()));
        }
        Ok(SubdomainPartition {
            spheres,
            planes,
            max_crossings,
        })
    }

    /// Crossing bound implied by the interfaces: two per sphere, one per cut.
    pub fn natural_crossing_bound(&self) -> usize {
        2 * self.spheres.len() + self.planes.len()
    }

    pub fn max_crossings(&self) -> usize {
        self.max_crossings
    }

    pub fn interfaces(&self) -> Vec<Interface> {
        self.spheres
            .iter()
            .map(|&(center, radius)| Interface::Sphere { center, radius })
            .chain(
                self.planes
                    .iter()
                    .map(|&(normal, offset)| Interface::Plane { normal, offset }),
            )
            .collect()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.spheres.is_empty() && self.planes.is_empty()
    }

    /// Number of subdomain labels.
    pub fn piece_count(&self) -> usize {
        (self.spheres.len() + 1) << self.planes.len()
    }

    #[inline]
    pub fn label(&self, x: Vec3) -> usize {
        let depth = self
            .spheres
            .iter()
            .filter(|(c, r)| (x - *c).norm_sq() < r * r)
            .count();
        let mut bits = 0usize;
        for (i, (n, o)) in self.planes.iter().enumerate() {
            if n.dot(x) > *o {
                bits |= 1 << i;
            }
        }
        depth + (self.spheres.len() + 1) * bits
    }

    /// Ordered times `t` in `[0, span]` where `x - t xi` meets an interface.
    /// Rays whose squared half-chord through a sphere is below
    /// `TANGENT_TOL * diameter^2` touch it once.
    pub fn interface_times(
        &self,
        geometry: &DomainGeometry,
        x: Vec3,
        xi: Vec3,
        span: f64,
    ) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        self.interface_times_into(geometry.diameter(), x, xi, span, &mut out)?;
        Ok(out)
    }

    /// Allocation-free variant of [`interface_times`](Self::interface_times);
    /// `out` is cleared first.
    #[inline]
    pub fn interface_times_into(
        &self,
        diameter: f64,
        x: Vec3,
        xi: Vec3,
        span: f64,
        out: &mut Vec<f64>,
    ) -> Result<()> {
        out.clear();
        if self.is_homogeneous() {
            return Ok(());
        }
        let tol = 1e-12 * diameter;
        let mut push = |t: f64| {
            if t >= -tol && t <= span + tol {
                out.push(t.clamp(0.0, span));
            }
        };
        for &(c, r) in &self.spheres {
            // |x - t xi - c|^2 = r^2  <=>  t^2 - 2 b t + cc = 0
            let d = x - c;
            let b = xi.dot(d);
            let cc = d.norm_sq() - r * r;
            let disc = b * b - cc;
            // rounding can push an exact tangency either way; treat it as a
            // single touching point so segment labels stay off the sphere
            if disc.abs() <= TANGENT_TOL * diameter * diameter {
                push(b);
                continue;
            }
            if disc < 0.0 {
                continue;
            }
            let sq = disc.sqrt();
            let q = if b >= 0.0 { b + sq } else { b - sq };
            push(q);
            push(cc / q);
        }
        for &(n, o) in &self.planes {
            let denom = n.dot(xi);
            if denom.abs() > 1e-15 {
                push((n.dot(x) - o) / denom);
            }
        }
        out.sort_by(|a, b| a.total_cmp(b));
        out.dedup_by(|a, b| (*a - *b).abs() <= tol);
        if out.len() > self.max_crossings {
            return Err(Error::CrossingBoundExceeded {
                found: out.len(),
                max: self.max_crossings,
            });
        }
        Ok(())
    }

    /// Largest crossing count seen over `samples` quasi-random chords through
    /// the domain. Exceeding `max_crossings` is reported as an error.
    pub fn check_crossings(&self, geometry: &DomainGeometry, samples: usize) -> Result<usize> {
        let (lo, hi) = geometry.bounding_box();
        let mut worst = 0;
        let mut buf = Vec::new();
        let dim = geometry.dim();
        for i in 1..=samples {
            let u = [halton(i, 2), halton(i, 3), halton(i, 5)];
            let x = Vec3::new(
                lo.x + u[0] * (hi.x - lo.x),
                lo.y + u[1] * (hi.y - lo.y),
                if dim == 3 { lo.z + u[2] * (hi.z - lo.z) } else { 0.0 },
            );
            if !geometry.is_interior(x) {
                continue;
            }
            let xi = if dim == 2 {
                Vec3::from_angle(2.0 * std::f64::consts::PI * halton(i, 7))
            } else {
                let z = 1.0 - 2.0 * halton(i, 7);
                let phi = 2.0 * std::f64::consts::PI * halton(i, 11);
                let r = (1.0 - z * z).max(0.0).sqrt();
                Vec3::new(r * phi.cos(), r * phi.sin(), z)
            };
            // full chord: start at the exit point and look back
            let (lo_t, hi_t) = geometry.chord_params(x, xi);
            let start = x + xi * hi_t;
            self.interface_times_into(geometry.diameter(), start, xi, hi_t - lo_t, &mut buf)?;
            worst = worst.max(buf.len());
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_region() -> (DomainGeometry, SubdomainPartition) {
        let g = DomainGeometry::unit_disk();
        let p = SubdomainPartition::new(
            &[Interface::Sphere {
                center: Vec3::ZERO,
                radius: 0.5,
            }],
            2,
        )
        .unwrap();
        (g, p)
    }

    #[test]
    fn interface_times_examples() {
        let (g, p) = two_region();
        let t = p
            .interface_times(&g, Vec3::planar(1.0, 0.0), Vec3::planar(1.0, 0.0), 2.0)
            .unwrap();
        assert_eq!(t.len(), 2);
        assert!((t[0] - 0.5).abs() < 1e-15 && (t[1] - 1.5).abs() < 1e-15);

        let x = Vec3::planar(0.0, 0.9);
        let up = Vec3::planar(0.0, 1.0);
        let span = g.tau_minus(x, up).unwrap();
        let t = p.interface_times(&g, x, up, span).unwrap();
        assert!((t[0] - 0.4).abs() < 1e-15 && (t[1] - 1.4).abs() < 1e-15);

        // chord at distance 0.9 from the center misses the inner circle
        let x = Vec3::planar(0.9, 0.0);
        let t = p.interface_times(&g, x, up, g.tau_minus(x, up).unwrap()).unwrap();
        assert!(t.is_empty());
    }

    #[test]
    fn tangent_ray_gives_single_time() {
        let (g, p) = two_region();
        let x = Vec3::planar(0.5, 0.5);
        let t = p
            .interface_times(&g, x, Vec3::planar(0.0, 1.0), g.tau_minus(x, Vec3::planar(0.0, 1.0)).unwrap())
            .unwrap();
        assert_eq!(t.len(), 1);
        assert!((t[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn crossing_bound_is_enforced() {
        let g = DomainGeometry::unit_disk();
        let p = SubdomainPartition::new(
            &[Interface::Sphere {
                center: Vec3::ZERO,
                radius: 0.5,
            }],
            0,
        )
        .unwrap();
        let err = p.interface_times(&g, Vec3::planar(1.0, 0.0), Vec3::planar(1.0, 0.0), 2.0);
        assert_eq!(err, Err(Error::CrossingBoundExceeded { found: 2, max: 0 }));
        assert!(p.check_crossings(&g, 500).is_err());
    }

    #[test]
    fn labels_count_depth_and_cuts() {
        let p = SubdomainPartition::new(
            &[
                Interface::Sphere {
                    center: Vec3::ZERO,
                    radius: 0.3,
                },
                Interface::Sphere {
                    center: Vec3::ZERO,
                    radius: 0.6,
                },
                Interface::Plane {
                    normal: Vec3::planar(2.0, 0.0),
                    offset: 0.0,
                },
            ],
            5,
        )
        .unwrap();
        assert_eq!(p.piece_count(), 6);
        assert_eq!(p.label(Vec3::planar(-0.9, 0.0)), 0);
        assert_eq!(p.label(Vec3::planar(-0.5, 0.0)), 1);
        assert_eq!(p.label(Vec3::planar(-0.1, 0.0)), 2);
        assert_eq!(p.label(Vec3::planar(0.1, 0.0)), 5);
        assert_eq!(p.natural_crossing_bound(), 5);
        let g = DomainGeometry::unit_disk();
        assert!(p.check_crossings(&g, 2000).unwrap() <= 5);
    }
}
