//! Convex domains and the ray queries the transport equations need.
//!
//! A characteristic through `x` with direction `xi` is parametrized as
//! `x - t xi`; `tau(.., Sign::Minus)` is the backward distance to the
//! boundary and `tau(.., Sign::Plus)` the forward one.

mod partition;

pub use partition::{Interface, SubdomainPartition, TANGENT_TOL};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{fibonacci_sphere, DirectionSet};
use crate::vector::Vec3;

/// Relative tolerance (in units of the diameter) for points that may sit
/// slightly outside the closure due to rounding.
pub const DOMAIN_TOL: f64 = 1e-9;

/// Below this `|n . xi|` a boundary hit is treated as grazing.
pub const GRAZING_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Minus,
    Plus,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DomainKind {
    Disk { center: Vec3, radius: f64 },
    Ball { center: Vec3, radius: f64 },
    /// Counterclockwise convex polygon. Only piecewise C1.
    Polygon { vertices: Vec<Vec3>, normals: Vec<Vec3> },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SurfaceParam {
    /// Polar angle around the disk center.
    Angle(f64),
    /// Colatitude and azimuth around the ball center.
    Sphere { polar: f64, azimuth: f64 },
    /// Arclength from the first polygon vertex.
    Arclength(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryPoint {
    pub position: Vec3,
    pub normal: Vec3,
    pub param: SurfaceParam,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DomainGeometry {
    kind: DomainKind,
    diameter: f64,
}

impl DomainGeometry {
    pub fn disk(center: [f64; 2], radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(DomainGeometry {
            kind: DomainKind::Disk {
                center: Vec3::planar(center[0], center[1]),
                radius,
            },
            diameter: 2.0 * radius,
        })
    }

    pub fn unit_disk() -> Self {
        Self::disk([0.0, 0.0], 1.0).expect("unit disk is valid")
    }

    pub fn ball(center: [f64; 3], radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(DomainGeometry {
            kind: DomainKind::Ball {
                center: Vec3::new(center[0], center[1], center[2]),
                radius,
            },
            diameter: 2.0 * radius,
        })
    }

    /// Convex polygon from counterclockwise vertices.
    pub fn polygon(vertices: &[[f64; 2]]) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidGeometry(
                "polygon needs at least 3 vertices".into(),
            ));
        }
        let v: Vec<Vec3> = vertices.iter().map(|p| Vec3::planar(p[0], p[1])).collect();
        let n = v.len();
        let mut normals = Vec::with_capacity(n);
        for i in 0..n {
            let e0 = v[(i + 1) % n] - v[i];
            let e1 = v[(i + 2) % n] - v[(i + 1) % n];
            let cross = e0.x * e1.y - e0.y * e1.x;
            if cross <= 0.0 {
                return Err(Error::InvalidGeometry(format!(
                    "polygon is not strictly convex and counterclockwise at vertex {}",
                    (i + 1) % n
                )));
            }
            let len = e0.norm();
            if len == 0.0 {
                return Err(Error::InvalidGeometry("repeated polygon vertex".into()));
            }
            normals.push(Vec3::planar(e0.y, -e0.x) / len);
        }
        let mut diameter: f64 = 0.0;
        for a in &v {
            for b in &v {
                diameter = diameter.max(a.distance(*b));
            }
        }
        Ok(DomainGeometry {
            kind: DomainKind::Polygon {
                vertices: v,
                normals,
            },
            diameter,
        })
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            DomainKind::Ball { .. } => 3,
            _ => 2,
        }
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Whether the boundary is C1 (disk and ball) rather than piecewise C1.
    pub fn is_c1(&self) -> bool {
        !matches!(self.kind, DomainKind::Polygon { .. })
    }

    /// Disk/ball center or polygon vertex centroid.
    pub fn center(&self) -> Vec3 {
        match &self.kind {
            DomainKind::Disk { center, .. } | DomainKind::Ball { center, .. } => *center,
            DomainKind::Polygon { vertices, .. } => {
                let mut c = Vec3::ZERO;
                for v in vertices {
                    c += *v;
                }
                c / vertices.len() as f64
            }
        }
    }

    /// Radius for disk and ball, `None` for polygons.
    pub fn radius(&self) -> Option<f64> {
        match self.kind {
            DomainKind::Disk { radius, .. } | DomainKind::Ball { radius, .. } => Some(radius),
            DomainKind::Polygon { .. } => None,
        }
    }

    pub fn bounding_box(&self) -> (Vec3, Vec3) {
        match &self.kind {
            DomainKind::Disk { center, radius } => (
                *center - Vec3::planar(*radius, *radius),
                *center + Vec3::planar(*radius, *radius),
            ),
            DomainKind::Ball { center, radius } => (
                *center - Vec3::new(*radius, *radius, *radius),
                *center + Vec3::new(*radius, *radius, *radius),
            ),
            DomainKind::Polygon { vertices, .. } => {
                let mut lo = Vec3::planar(f64::INFINITY, f64::INFINITY);
                let mut hi = Vec3::planar(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for v in vertices {
                    lo.x = lo.x.min(v.x);
                    lo.y = lo.y.min(v.y);
                    hi.x = hi.x.max(v.x);
                    hi.y = hi.y.max(v.y);
                }
                (lo, hi)
            }
        }
    }

    /// Signed excess of `x` beyond the boundary: negative inside, positive
    /// outside (exact distance for disk/ball, max half-plane violation for
    /// polygons).
    pub fn outside_excess(&self, x: Vec3) -> f64 {
        match &self.kind {
            DomainKind::Disk { center, radius } | DomainKind::Ball { center, radius } => {
                (x - *center).norm() - radius
            }
            DomainKind::Polygon { vertices, normals } => vertices
                .iter()
                .zip(normals)
                .map(|(v, n)| n.dot(x - *v))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Open-set membership.
    pub fn is_interior(&self, x: Vec3) -> bool {
        self.outside_excess(x) < 0.0
    }

    /// Membership in the closure, up to [`DOMAIN_TOL`].
    pub fn contains(&self, x: Vec3) -> bool {
        self.outside_excess(x) <= DOMAIN_TOL * self.diameter
    }

    fn check_in_closure(&self, x: Vec3) -> Result<()> {
        let excess = self.outside_excess(x);
        if excess > DOMAIN_TOL * self.diameter || excess.is_nan() {
            return Err(Error::NotInDomain {
                point: x.to_array(),
                excess,
            });
        }
        Ok(())
    }

    /// Parameters `t_lo <= 0 <= t_hi` where the line `x + t xi` meets the
    /// boundary, for `x` in the closure. Both are clamped to the correct
    /// sign so points marginally outside behave like boundary points.
    #[inline]
    pub fn chord_params(&self, x: Vec3, xi: Vec3) -> (f64, f64) {
        match &self.kind {
            DomainKind::Disk { center, radius } | DomainKind::Ball { center, radius } => {
                let d = x - *center;
                let b = xi.dot(d);
                let c = d.norm_sq() - radius * radius;
                // t^2 + 2 b t + c = 0, roots via the cancellation-free form
                let disc = (b * b - c).max(0.0);
                let sq = disc.sqrt();
                let (lo, hi) = if b >= 0.0 {
                    let q = -(b + sq);
                    if q == 0.0 {
                        (0.0, 0.0)
                    } else {
                        (q, c / q)
                    }
                } else {
                    let q = sq - b;
                    (c / q, q)
                };
                (lo.min(0.0), hi.max(0.0))
            }
            DomainKind::Polygon { vertices, normals } => {
                let mut lo = f64::NEG_INFINITY;
                let mut hi = f64::INFINITY;
                for (v, n) in vertices.iter().zip(normals) {
                    let denom = n.dot(xi);
                    let num = n.dot(*v - x);
                    if denom > 0.0 {
                        hi = hi.min(num / denom);
                    } else if denom < 0.0 {
                        lo = lo.max(num / denom);
                    }
                }
                (lo.min(0.0), hi.max(0.0))
            }
        }
    }

    /// Parameter interval `[t0, t1]` where the line `x + t d` lies in the
    /// closed domain, for any `x`; `None` if the line misses it. Lines
    /// within [`TANGENT_TOL`] of tangency touch a round domain at one point.
    pub fn line_params(&self, x: Vec3, d: Vec3) -> Option<(f64, f64)> {
        match &self.kind {
            DomainKind::Disk { center, radius } | DomainKind::Ball { center, radius } => {
                let p = x - *center;
                let b = d.dot(p);
                let c = p.norm_sq() - radius * radius;
                let disc = b * b - c;
                let diameter = 2.0 * radius;
                if disc.abs() <= TANGENT_TOL * diameter * diameter {
                    return Some((-b, -b));
                }
                if disc < 0.0 {
                    return None;
                }
                let q = -(b + b.signum() * disc.sqrt());
                if q == 0.0 {
                    return Some((0.0, 0.0));
                }
                let (a, e) = (q, c / q);
                Some((a.min(e), a.max(e)))
            }
            DomainKind::Polygon { vertices, normals } => {
                let mut lo = f64::NEG_INFINITY;
                let mut hi = f64::INFINITY;
                for (v, n) in vertices.iter().zip(normals) {
                    let denom = n.dot(d);
                    let num = n.dot(*v - x);
                    if denom > 0.0 {
                        hi = hi.min(num / denom);
                    } else if denom < 0.0 {
                        lo = lo.max(num / denom);
                    } else if num < 0.0 {
                        return None;
                    }
                }
                (lo <= hi).then_some((lo, hi))
            }
        }
    }

    /// `tau_-` or `tau_+`: distance from `x` to the boundary along `-xi` or `xi`.
    pub fn tau(&self, x: Vec3, xi: Vec3, sign: Sign) -> Result<f64> {
        self.check_in_closure(x)?;
        let (lo, hi) = self.chord_params(x, xi);
        Ok(match sign {
            Sign::Minus => -lo,
            Sign::Plus => hi,
        })
    }

    pub fn tau_minus(&self, x: Vec3, xi: Vec3) -> Result<f64> {
        self.tau(x, xi, Sign::Minus)
    }

    pub fn tau_plus(&self, x: Vec3, xi: Vec3) -> Result<f64> {
        self.tau(x, xi, Sign::Plus)
    }

    /// Outward unit normal at a boundary point.
    pub fn normal_at(&self, y: Vec3) -> Vec3 {
        match &self.kind {
            DomainKind::Disk { center, .. } | DomainKind::Ball { center, .. } => {
                (y - *center).normalized()
            }
            DomainKind::Polygon { vertices, normals } => {
                let (i, _) = active_edge(vertices, normals, y);
                normals[i]
            }
        }
    }

    /// Boundary point record for a position on (or projected onto) the boundary.
    pub fn boundary_point(&self, y: Vec3) -> BoundaryPoint {
        match &self.kind {
            DomainKind::Disk { center, radius } => {
                let d = y - *center;
                let theta = d.angle();
                let normal = Vec3::from_angle(theta);
                BoundaryPoint {
                    position: *center + normal * *radius,
                    normal,
                    param: SurfaceParam::Angle(theta),
                }
            }
            DomainKind::Ball { center, radius } => {
                let normal = (y - *center).normalized();
                BoundaryPoint {
                    position: *center + normal * *radius,
                    normal,
                    param: SurfaceParam::Sphere {
                        polar: normal.z.clamp(-1.0, 1.0).acos(),
                        azimuth: normal.y.atan2(normal.x),
                    },
                }
            }
            DomainKind::Polygon { vertices, normals } => {
                let (i, _) = active_edge(vertices, normals, y);
                let mut arclength = 0.0;
                for j in 0..i {
                    arclength += (vertices[(j + 1) % vertices.len()] - vertices[j]).norm();
                }
                arclength += (y - vertices[i]).norm();
                BoundaryPoint {
                    position: y,
                    normal: normals[i],
                    param: SurfaceParam::Arclength(arclength),
                }
            }
        }
    }

    /// Entry point `P(x, xi) = x - tau_-(x, xi) xi` of the characteristic.
    pub fn backtrace_point(&self, x: Vec3, xi: Vec3) -> Result<BoundaryPoint> {
        let t = self.tau_minus(x, xi)?;
        let bp = self.boundary_point(x - xi * t);
        if t > 0.0 && bp.normal.dot(xi).abs() < GRAZING_TOL {
            log::warn!(
                "grazing backtrace from {:?} along {:?} (n . xi = {:.2e})",
                x,
                xi,
                bp.normal.dot(xi)
            );
        }
        Ok(bp)
    }

    /// Exit point `x + tau_+(x, xi) xi`.
    pub fn exit_point(&self, x: Vec3, xi: Vec3) -> Result<BoundaryPoint> {
        let t = self.tau_plus(x, xi)?;
        Ok(self.boundary_point(x + xi * t))
    }

    /// Boundary point hit by the ray from the center at planar angle `phi`.
    pub fn boundary_at_angle(&self, phi: f64) -> BoundaryPoint {
        let c = self.center();
        let dir = Vec3::from_angle(phi);
        let (_, hi) = self.chord_params(c, dir);
        self.boundary_point(c + dir * hi)
    }

    /// Moves a planar boundary point by signed arclength `delta`
    /// (counterclockwise positive).
    pub fn boundary_step(&self, y: &BoundaryPoint, delta: f64) -> BoundaryPoint {
        match &self.kind {
            DomainKind::Disk { center, radius } => {
                let theta = (y.position - *center).angle() + delta / radius;
                let normal = Vec3::from_angle(theta);
                BoundaryPoint {
                    position: *center + normal * *radius,
                    normal,
                    param: SurfaceParam::Angle(theta),
                }
            }
            DomainKind::Ball { center, radius } => {
                // move along the great circle in the planar tangent direction
                let n = y.normal;
                let mut t = Vec3::new(-n.y, n.x, 0.0);
                if t.norm() < 1e-12 {
                    t = Vec3::new(1.0, 0.0, 0.0);
                }
                let t = t.normalized();
                let ang = delta / radius;
                let normal = n * ang.cos() + t * ang.sin();
                self.boundary_point(*center + normal * *radius)
            }
            DomainKind::Polygon { vertices, .. } => {
                let perimeter = self.boundary_measure();
                let s0 = match y.param {
                    SurfaceParam::Arclength(s) => s,
                    _ => 0.0,
                };
                let s = (s0 + delta).rem_euclid(perimeter);
                self.polygon_point_at_arclength(vertices, s)
            }
        }
    }

    /// Moves a boundary point by arclength `delta` along the geodesic whose
    /// initial tangent is the projection of `toward`. In d = 2 the sign of
    /// the tangent picks the orientation.
    pub fn boundary_step_toward(&self, y: &BoundaryPoint, toward: Vec3, delta: f64) -> BoundaryPoint {
        let t = toward - y.normal * y.normal.dot(toward);
        if self.dim() == 2 {
            let ccw = y.normal.perp();
            let sign = if t.dot(ccw) >= 0.0 { 1.0 } else { -1.0 };
            return self.boundary_step(y, sign * delta);
        }
        let (center, radius) = match &self.kind {
            DomainKind::Ball { center, radius } => (*center, *radius),
            _ => unreachable!("3D domains are balls"),
        };
        let t = if t.norm() < 1e-12 { y.normal.cross(Vec3::new(0.0, 0.0, 1.0)) } else { t };
        let t = t.normalized();
        let ang = delta / radius;
        let normal = y.normal * ang.cos() + t * ang.sin();
        self.boundary_point(center + normal * radius)
    }

    fn polygon_point_at_arclength(&self, vertices: &[Vec3], mut s: f64) -> BoundaryPoint {
        let n = vertices.len();
        for i in 0..n {
            let e = vertices[(i + 1) % n] - vertices[i];
            let len = e.norm();
            if s <= len || i == n - 1 {
                let p = vertices[i] + e * (s.min(len) / len);
                let mut bp = self.boundary_point(p);
                bp.normal = Vec3::planar(e.y, -e.x) / len;
                return bp;
            }
            s -= len;
        }
        unreachable!("polygon has at least three edges")
    }

    /// The two sides of the change of variables `y = P_x(xi')` for a test
    /// function `g` on the boundary: the direction-space integral of
    /// `g(P_x(xi'))` and the boundary integral of
    /// `g(y) |n(y) . (x - y)| / |x - y|^d`, each with `n_nodes` nodes.
    pub fn measure_change_integrals(
        &self,
        x: Vec3,
        n_nodes: usize,
        g: impl Fn(Vec3) -> f64,
    ) -> Result<(f64, f64)> {
        if !self.is_interior(x) {
            return Err(Error::NotInDomain {
                point: x.to_array(),
                excess: self.outside_excess(x),
            });
        }
        let dirs = DirectionSet::for_dimension(self.dim(), n_nodes);
        let mut directional = 0.0;
        for (xi, w) in dirs.directions().iter().zip(dirs.weights()) {
            directional += w * g(self.backtrace_point(x, *xi)?.position);
        }
        let d = self.dim() as i32;
        let boundary = self
            .boundary_quadrature(n_nodes)
            .iter()
            .map(|(y, w)| {
                let r = x - y.position;
                w * g(y.position) * y.normal.dot(r).abs() / r.norm().powi(d)
            })
            .sum();
        Ok((directional, boundary))
    }

    /// Perimeter (d = 2) or surface area (d = 3).
    pub fn boundary_measure(&self) -> f64 {
        match &self.kind {
            DomainKind::Disk { radius, .. } => 2.0 * PI * radius,
            DomainKind::Ball { radius, .. } => 4.0 * PI * radius * radius,
            DomainKind::Polygon { vertices, .. } => {
                let n = vertices.len();
                (0..n).map(|i| (vertices[(i + 1) % n] - vertices[i]).norm()).sum()
            }
        }
    }

    /// Boundary nodes with positive weights summing to the boundary measure.
    ///
    /// Disk: uniform angles `2 pi j / n`. Ball: Fibonacci lattice with equal
    /// weights. Polygon: per-edge midpoint rule with node counts proportional
    /// to edge length.
    pub fn boundary_quadrature(&self, n_nodes: usize) -> Vec<(BoundaryPoint, f64)> {
        let n_nodes = n_nodes.max(4);
        match &self.kind {
            DomainKind::Disk { center, radius } => {
                let w = 2.0 * PI * radius / n_nodes as f64;
                (0..n_nodes)
                    .map(|j| {
                        let theta = 2.0 * PI * j as f64 / n_nodes as f64;
                        let normal = Vec3::from_angle(theta);
                        (
                            BoundaryPoint {
                                position: *center + normal * *radius,
                                normal,
                                param: SurfaceParam::Angle(theta),
                            },
                            w,
                        )
                    })
                    .collect()
            }
            DomainKind::Ball { center, radius } => {
                let w = 4.0 * PI * radius * radius / n_nodes as f64;
                fibonacci_sphere(n_nodes)
                    .into_iter()
                    .map(|u| (self.boundary_point(*center + u * *radius), w))
                    .collect()
            }
            DomainKind::Polygon { vertices, normals } => {
                let n = vertices.len();
                let perimeter = self.boundary_measure();
                let mut out = Vec::with_capacity(n_nodes + n);
                let mut s_start = 0.0;
                for i in 0..n {
                    let a = vertices[i];
                    let e = vertices[(i + 1) % n] - a;
                    let len = e.norm();
                    let m = ((n_nodes as f64 * len / perimeter).round() as usize).max(1);
                    let w = len / m as f64;
                    for j in 0..m {
                        let f = (j as f64 + 0.5) / m as f64;
                        out.push((
                            BoundaryPoint {
                                position: a + e * f,
                                normal: normals[i],
                                param: SurfaceParam::Arclength(s_start + f * len),
                            },
                            w,
                        ));
                    }
                    s_start += len;
                }
                out
            }
        }
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidGeometry(format!(
            "radius must be positive and finite, got {radius}"
        )));
    }
    Ok(())
}

/// Edge whose supporting line is closest to `y` (largest half-plane value).
fn active_edge(vertices: &[Vec3], normals: &[Vec3], y: Vec3) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, (v, n)) in vertices.iter().zip(normals).enumerate() {
        let val = n.dot(y - *v);
        if val > best.1 {
            best = (i, val);
        }
    }
    best
}
