//! Optical coefficients, phase functions and optical-depth line integrals.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{DomainGeometry, SubdomainPartition, DOMAIN_TOL};
use crate::quadrature::{halton, sphere_measure, GaussLegendre};
use crate::vector::Vec3;

/// A coefficient on one subdomain, in units of 1/length.
#[derive(Clone, Debug, PartialEq)]
pub enum CoefficientField {
    Constant(f64),
    /// `value + gradient . (x - origin)`
    Affine {
        value: f64,
        gradient: Vec3,
        origin: Vec3,
    },
    /// `base + amplitude * exp(-|x - center|^2 / width^2)`
    Gaussian {
        base: f64,
        amplitude: f64,
        center: Vec3,
        width: f64,
    },
}

impl CoefficientField {
    #[inline]
    pub fn eval(&self, x: Vec3) -> f64 {
        match *self {
            CoefficientField::Constant(c) => c,
            CoefficientField::Affine {
                value,
                gradient,
                origin,
            } => value + gradient.dot(x - origin),
            CoefficientField::Gaussian {
                base,
                amplitude,
                center,
                width,
            } => base + amplitude * (-(x - center).norm_sq() / (width * width)).exp(),
        }
    }

    #[inline]
    pub fn as_constant(&self) -> Option<f64> {
        match *self {
            CoefficientField::Constant(c) => Some(c),
            _ => None,
        }
    }

    fn is_finite(&self) -> bool {
        match *self {
            CoefficientField::Constant(c) => c.is_finite(),
            CoefficientField::Affine {
                value, gradient, ..
            } => value.is_finite() && gradient.norm().is_finite(),
            CoefficientField::Gaussian {
                base,
                amplitude,
                width,
                ..
            } => base.is_finite() && amplitude.is_finite() && width.is_finite() && width > 0.0,
        }
    }
}

impl From<f64> for CoefficientField {
    fn from(c: f64) -> Self {
        CoefficientField::Constant(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhaseFunction {
    Isotropic,
    /// Henyey-Greenstein kernel normalized over `S^{d-1}` of the problem
    /// dimension (circular form in d = 2).
    HenyeyGreenstein { g: f64 },
}

impl PhaseFunction {
    /// Density for the cosine of the angle between `xi` and `xi'`.
    #[inline]
    pub fn eval(&self, dim: usize, cos: f64) -> f64 {
        match *self {
            PhaseFunction::Isotropic => 1.0 / sphere_measure(dim),
            PhaseFunction::HenyeyGreenstein { g } => {
                let denom = 1.0 + g * g - 2.0 * g * cos;
                if dim == 2 {
                    (1.0 - g * g) / (2.0 * PI * denom)
                } else {
                    (1.0 - g * g) / (4.0 * PI * denom * denom.sqrt())
                }
            }
        }
    }

    pub fn is_isotropic(&self) -> bool {
        match *self {
            PhaseFunction::Isotropic => true,
            PhaseFunction::HenyeyGreenstein { g } => g == 0.0,
        }
    }
}

/// Dimensionless optical depth `M_t(x, xi; s)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct OpticalDepth(pub f64);

impl OpticalDepth {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn attenuation(self) -> f64 {
        (-self.0).exp()
    }
}

/// Piecewise coefficients indexed by subdomain label.
#[derive(Clone, Debug)]
pub struct MediumModel {
    mu_t: Vec<CoefficientField>,
    mu_s: Vec<CoefficientField>,
    phase: PhaseFunction,
    dim: usize,
    gl: GaussLegendre,
    scattering_free: bool,
}

impl MediumModel {
    /// Validates label counts, nonnegativity and `mu_s <= mu_t` (checked
    /// exactly for constants, by quasi-random sampling otherwise).
    pub fn new(
        mu_t: Vec<CoefficientField>,
        mu_s: Vec<CoefficientField>,
        phase: PhaseFunction,
        geometry: &DomainGeometry,
        partition: &SubdomainPartition,
    ) -> Result<Self> {
        let pieces = partition.piece_count();
        if mu_t.len() != pieces || mu_s.len() != pieces {
            return Err(Error::InvalidMedium(format!(
                "partition has {pieces} subdomains but mu_t has {} and mu_s has {} entries",
                mu_t.len(),
                mu_s.len()
            )));
        }
        if let PhaseFunction::HenyeyGreenstein { g } = phase {
            if !(g > -1.0 && g < 1.0) {
                return Err(Error::InvalidMedium(format!(
                    "Henyey-Greenstein asymmetry must lie in (-1, 1), got {g}"
                )));
            }
        }
        if mu_t.iter().chain(&mu_s).any(|f| !f.is_finite()) {
            return Err(Error::InvalidMedium("coefficients must be finite".into()));
        }
        for (label, (t, s)) in mu_t.iter().zip(&mu_s).enumerate() {
            if let (Some(t), Some(s)) = (t.as_constant(), s.as_constant()) {
                check_pair(label, t, s, None)?;
            }
        }
        let scattering_free = mu_s.iter().all(|f| f.as_constant() == Some(0.0));
        let model = MediumModel {
            mu_t,
            mu_s,
            phase,
            dim: geometry.dim(),
            gl: GaussLegendre::new(8),
            scattering_free,
        };
        model.check_sampled(geometry, partition)?;
        Ok(model)
    }

    /// Constant coefficients on an unpartitioned domain.
    pub fn homogeneous(mu_t: f64, mu_s: f64, phase: PhaseFunction, geometry: &DomainGeometry) -> Result<Self> {
        Self::new(
            vec![mu_t.into()],
            vec![mu_s.into()],
            phase,
            geometry,
            &SubdomainPartition::homogeneous(),
        )
    }

    /// Per-segment Gauss-Legendre order for non-constant coefficients.
    pub fn with_quad_order(mut self, order: usize) -> Self {
        self.gl = GaussLegendre::new(order.max(1));
        self
    }

    pub fn quad_order(&self) -> usize {
        self.gl.order()
    }

    pub fn phase(&self) -> PhaseFunction {
        self.phase
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mu_t_fields(&self) -> &[CoefficientField] {
        &self.mu_t
    }

    pub fn mu_s_fields(&self) -> &[CoefficientField] {
        &self.mu_s
    }

    /// True when every `mu_s` is identically zero.
    pub fn is_scattering_free(&self) -> bool {
        self.scattering_free
    }

    fn check_sampled(&self, geometry: &DomainGeometry, partition: &SubdomainPartition) -> Result<()> {
        if self.mu_t.iter().chain(&self.mu_s).all(|f| f.as_constant().is_some()) {
            return Ok(());
        }
        let (lo, hi) = geometry.bounding_box();
        for i in 1..=4096 {
            let x = Vec3::new(
                lo.x + halton(i, 2) * (hi.x - lo.x),
                lo.y + halton(i, 3) * (hi.y - lo.y),
                if self.dim == 3 { lo.z + halton(i, 5) * (hi.z - lo.z) } else { 0.0 },
            );
            if !geometry.is_interior(x) {
                continue;
            }
            let label = partition.label(x);
            check_pair(label, self.mu_t[label].eval(x), self.mu_s[label].eval(x), Some(x))?;
        }
        Ok(())
    }

    #[inline]
    pub fn mu_t_label(&self, label: usize, x: Vec3) -> f64 {
        self.mu_t[label].eval(x)
    }

    #[inline]
    pub fn mu_s_label(&self, label: usize, x: Vec3) -> f64 {
        self.mu_s[label].eval(x)
    }

    /// `mu_t(x)`, zero outside the domain.
    pub fn mu_t_at(&self, geometry: &DomainGeometry, partition: &SubdomainPartition, x: Vec3) -> f64 {
        if !geometry.contains(x) {
            return 0.0;
        }
        self.mu_t_label(partition.label(x), x)
    }

    /// `mu_s(x)`, zero outside the domain.
    pub fn mu_s_at(&self, geometry: &DomainGeometry, partition: &SubdomainPartition, x: Vec3) -> f64 {
        if !geometry.contains(x) {
            return 0.0;
        }
        self.mu_s_label(partition.label(x), x)
    }

    /// Upper bound on `mu_t` over the domain (exact for constants, sampled
    /// otherwise).
    pub fn sup_mu_t(&self, geometry: &DomainGeometry, partition: &SubdomainPartition) -> f64 {
        let mut sup: f64 = self
            .mu_t
            .iter()
            .filter_map(|f| f.as_constant())
            .fold(0.0, f64::max);
        if self.mu_t.iter().any(|f| f.as_constant().is_none()) {
            let (lo, hi) = geometry.bounding_box();
            for i in 1..=4096 {
                let x = Vec3::new(
                    lo.x + halton(i, 2) * (hi.x - lo.x),
                    lo.y + halton(i, 3) * (hi.y - lo.y),
                    if self.dim == 3 { lo.z + halton(i, 5) * (hi.z - lo.z) } else { 0.0 },
                );
                sup = sup.max(self.mu_t_at(geometry, partition, x));
            }
        }
        sup
    }

    /// Phase function density `p(x, xi, xi')` (1/steradian).
    #[inline]
    pub fn phase_eval(&self, xi: Vec3, xi_prime: Vec3) -> f64 {
        self.phase.eval(self.dim, xi.dot(xi_prime).clamp(-1.0, 1.0))
    }

    /// `M_t(x, xi; s) = int_0^s mu_t(x - r xi) dr`, split at interface
    /// crossings; exact for constant pieces.
    pub fn optical_depth(
        &self,
        geometry: &DomainGeometry,
        partition: &SubdomainPartition,
        x: Vec3,
        xi: Vec3,
        s: f64,
    ) -> Result<OpticalDepth> {
        let chord = geometry.tau_minus(x, xi)?;
        if s > chord + DOMAIN_TOL * geometry.diameter() {
            return Err(Error::SpanExceedsChord { span: s, chord });
        }
        let mut path = RayPath::default();
        path.trace(self, geometry, partition, x, xi, s.min(chord).max(0.0))?;
        Ok(OpticalDepth(path.total_depth()))
    }

    /// `exp(-M_t(x, xi; s))`.
    pub fn attenuation(
        &self,
        geometry: &DomainGeometry,
        partition: &SubdomainPartition,
        x: Vec3,
        xi: Vec3,
        s: f64,
    ) -> Result<f64> {
        Ok(self.optical_depth(geometry, partition, x, xi, s)?.attenuation())
    }

    fn segment_depth(&self, label: usize, x: Vec3, xi: Vec3, a: f64, b: f64) -> f64 {
        match self.mu_t[label].as_constant() {
            Some(c) => c * (b - a),
            None => self.gl.integrate(a, b, |r| self.mu_t[label].eval(x - xi * r)),
        }
    }
}

fn check_pair(label: usize, mu_t: f64, mu_s: f64, at: Option<Vec3>) -> Result<()> {
    let loc = at.map(|x| format!(" at {:?}", x.to_array())).unwrap_or_default();
    if mu_t < 0.0 || mu_s < 0.0 {
        return Err(Error::InvalidMedium(format!(
            "coefficients must be nonnegative (subdomain {label}{loc}: mu_t={mu_t}, mu_s={mu_s})"
        )));
    }
    if mu_s > mu_t {
        return Err(Error::InvalidMedium(format!(
            "mu_s <= mu_t is required (subdomain {label}{loc}: mu_t={mu_t}, mu_s={mu_s})"
        )));
    }
    Ok(())
}

/// One piece of a backward ray `x - r xi`, `r in [start, end]`, inside a
/// single subdomain.
#[derive(Clone, Copy, Debug)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub label: usize,
    /// Optical depth accumulated over `[0, start]`.
    pub depth_start: f64,
    pub mu_t: Option<f64>,
    pub mu_s: Option<f64>,
}

/// Segmentation of a backward ray at interface crossings with cumulative
/// optical depths. Reused across calls to avoid allocation.
#[derive(Clone, Debug, Default)]
pub struct RayPath {
    origin: Vec3,
    dir: Vec3,
    span: f64,
    segments: Vec<Segment>,
    times: Vec<f64>,
    total: f64,
}

impl RayPath {
    /// Segments `x - r xi` for `r in [0, span]`; `span` must not exceed the
    /// backward chord.
    pub fn trace(
        &mut self,
        medium: &MediumModel,
        geometry: &DomainGeometry,
        partition: &SubdomainPartition,
        x: Vec3,
        xi: Vec3,
        span: f64,
    ) -> Result<()> {
        self.origin = x;
        self.dir = xi;
        self.span = span;
        self.segments.clear();
        partition.interface_times_into(geometry.diameter(), x, xi, span, &mut self.times)?;
        let mut depth = 0.0;
        let mut start = 0.0;
        let n = self.times.len();
        for i in 0..=n {
            let end = if i < n { self.times[i] } else { span };
            if end > start {
                let mid = x - xi * (0.5 * (start + end));
                let label = partition.label(mid);
                let seg = Segment {
                    start,
                    end,
                    label,
                    depth_start: depth,
                    mu_t: medium.mu_t[label].as_constant(),
                    mu_s: medium.mu_s[label].as_constant(),
                };
                depth += medium.segment_depth(label, x, xi, start, end);
                self.segments.push(seg);
                start = end;
            }
        }
        if self.segments.is_empty() {
            // zero-length path still records the label at the origin
            let label = partition.label(x);
            self.segments.push(Segment {
                start: 0.0,
                end: 0.0,
                label,
                depth_start: 0.0,
                mu_t: medium.mu_t[label].as_constant(),
                mu_s: medium.mu_s[label].as_constant(),
            });
        }
        self.total = depth;
        Ok(())
    }

    pub fn span(&self) -> f64 {
        self.span
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total_depth(&self) -> f64 {
        self.total
    }

    /// Optical depth over `[0, s]` for `s` inside segment `seg`.
    #[inline]
    pub fn depth_in_segment(&self, medium: &MediumModel, seg: &Segment, s: f64) -> f64 {
        match seg.mu_t {
            Some(c) => seg.depth_start + c * (s - seg.start),
            None => seg.depth_start + medium.segment_depth(seg.label, self.origin, self.dir, seg.start, s),
        }
    }

    /// Collision integral `int_0^span mu_s(x - s xi) exp(-M_t(s)) g(x - s xi) ds`
    /// with a Gauss-Legendre rule per segment.
    #[inline]
    pub fn collision_integral(
        &self,
        medium: &MediumModel,
        gl: &GaussLegendre,
        mut g: impl FnMut(Vec3) -> f64,
    ) -> f64 {
        let mut acc = 0.0;
        for seg in &self.segments {
            if seg.end <= seg.start || seg.mu_s == Some(0.0) {
                continue;
            }
            for (s, w) in gl.mapped(seg.start, seg.end) {
                let pos = self.origin - self.dir * s;
                let mu_s = match seg.mu_s {
                    Some(c) => c,
                    None => medium.mu_s[seg.label].eval(pos),
                };
                let att = (-self.depth_in_segment(medium, seg, s)).exp();
                acc += w * mu_s * att * g(pos);
            }
        }
        acc
    }
}
