//! Neumann-series solver for the stationary transport equation on a
//! Cartesian grid with a discrete direction set.

mod grid;
mod residual;
mod trace;

pub use grid::SpatialGrid;
pub use residual::{random_interior_samples, residual, ResidualReport};
pub use trace::{trace_outgoing, ScatteredComponent};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::media::RayPath;
use crate::problem::TransportProblem;
use crate::quadrature::{DirectionSet, GaussLegendre};
use crate::vector::Vec3;

/// Slack applied to sampled optical depths before forming the contraction
/// constant, covering chords the sampling net misses.
pub const DEPTH_SAFETY: f64 = 1.05;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverSettings {
    pub h: f64,
    pub n_directions: usize,
    pub tol: f64,
    pub quad_order: usize,
    pub max_terms: usize,
    /// Number of individual terms `f^(1)..f^(keep_terms)` retained.
    pub keep_terms: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            h: 1.0 / 32.0,
            n_directions: 32,
            tol: 1e-6,
            quad_order: 8,
            max_terms: 2000,
            keep_terms: 0,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self, diameter: f64) -> Result<()> {
        if !(self.h > 0.0 && self.h <= diameter / 4.0) {
            return Err(Error::InvalidSolver(format!(
                "h = {} must lie in (0, diameter/4]",
                self.h
            )));
        }
        if self.n_directions < 4 {
            return Err(Error::InvalidSolver("at least 4 directions are required".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidSolver("tol must be positive".into()));
        }
        if self.quad_order == 0 {
            return Err(Error::InvalidSolver("quad_order must be positive".into()));
        }
        Ok(())
    }
}

/// Sampled bound on the largest optical depth of any chord.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContractionEstimate {
    pub tau_max: f64,
    /// `1 - exp(-tau_max)` over the samples.
    pub m_sampled: f64,
    /// Certified constant `1 - exp(-DEPTH_SAFETY * tau_max)`.
    pub m: f64,
}

pub fn estimate_contraction(
    problem: &TransportProblem,
    dirs: &DirectionSet,
) -> Result<ContractionEstimate> {
    let geo = &problem.geometry;
    let (lo, hi) = geo.bounding_box();
    let dim = geo.dim();
    let net = if dim == 2 { 64 } else { 24 };
    let mut points = Vec::new();
    for i in 0..net {
        for j in 0..net {
            for l in 0..(if dim == 3 { net } else { 1 }) {
                let t = |a: usize| (a as f64 + 0.5) / net as f64;
                let p = Vec3::new(
                    lo.x + t(i) * (hi.x - lo.x),
                    lo.y + t(j) * (hi.y - lo.y),
                    if dim == 3 { lo.z + t(l) * (hi.z - lo.z) } else { 0.0 },
                );
                if geo.is_interior(p) {
                    points.push((p, None));
                }
            }
        }
    }
    let n_boundary = if dim == 2 { 256 } else { 512 };
    for (y, _) in geo.boundary_quadrature(n_boundary) {
        points.push((y.position, Some(y.normal)));
    }
    let tau_max = points
        .par_iter()
        .map_init(RayPath::default, |path, &(p, normal)| -> Result<f64> {
            let mut best: f64 = 0.0;
            for &xi in dirs.directions() {
                if let Some(n) = normal {
                    if n.dot(xi) <= 1e-12 {
                        continue;
                    }
                }
                let tau = geo.tau_minus(p, xi)?;
                path.trace(&problem.medium, geo, &problem.partition, p, xi, tau)?;
                best = best.max(path.total_depth());
            }
            Ok(best)
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
    Ok(ContractionEstimate {
        tau_max,
        m_sampled: 1.0 - (-tau_max).exp(),
        m: 1.0 - (-DEPTH_SAFETY * tau_max).exp(),
    })
}

/// Number of terms `N` after which `sup|f_0| M^(N+1) / (1 - M) <= tol`.
pub fn terms_needed(sup_f0: f64, m: f64, tol: f64) -> (usize, f64) {
    let tail = |n: usize| sup_f0 * m.powi(n as i32 + 1) / (1.0 - m);
    if sup_f0 == 0.0 || m == 0.0 {
        return (0, 0.0);
    }
    let guess = ((tol * (1.0 - m) / sup_f0).ln() / m.ln() - 1.0).ceil().max(0.0) as usize;
    let mut n = guess.saturating_sub(1);
    while tail(n) > tol {
        n += 1;
    }
    (n, tail(n))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceCert {
    pub m: f64,
    pub m_sampled: f64,
    pub tau_max: f64,
    pub n_terms: usize,
    pub tail_bound: f64,
    /// `sup |f^(n)|` over grid nodes for `n = 0..=n_terms`.
    pub term_sups: Vec<f64>,
}

/// `int p(xi . xi') f(xi') dxi'` on a direction set, with the phase weights
/// normalized so constants are reproduced exactly.
pub fn scattering_integral(
    problem: &TransportProblem,
    dirs: &DirectionSet,
    xi: Vec3,
    mut f: impl FnMut(Vec3) -> f64,
) -> f64 {
    let mut acc = 0.0;
    let mut norm = 0.0;
    for (&d, &w) in dirs.directions().iter().zip(dirs.weights()) {
        let c = w * problem.medium.phase_eval(xi, d);
        acc += c * f(d);
        norm += c;
    }
    acc / norm
}

/// Discrete angular averaging of nodal values.
#[derive(Clone, Debug)]
enum ScatterKernel {
    /// `S = sum_k c_k f_k`, one value per node.
    Isotropic(Vec<f64>),
    /// Row-normalized `K x K` phase matrix, one value per node and direction.
    Anisotropic(Vec<f64>),
}

impl ScatterKernel {
    fn new(problem: &TransportProblem, dirs: &DirectionSet) -> Self {
        let total = dirs.total_measure();
        if problem.medium.phase().is_isotropic() {
            return ScatterKernel::Isotropic(dirs.weights().iter().map(|w| w / total).collect());
        }
        let k = dirs.len();
        let mut m = vec![0.0; k * k];
        for a in 0..k {
            let row = &mut m[a * k..(a + 1) * k];
            let xa = dirs.direction(a);
            let mut norm = 0.0;
            for b in 0..k {
                let v = dirs.weights()[b] * problem.medium.phase_eval(xa, dirs.direction(b));
                row[b] = v;
                norm += v;
            }
            for v in row.iter_mut() {
                *v /= norm;
            }
        }
        ScatterKernel::Anisotropic(m)
    }

    fn apply(&self, grid: &SpatialGrid, values: &[f64], out: &mut Vec<f64>) {
        let n = grid.node_count();
        match self {
            ScatterKernel::Isotropic(c) => {
                out.clear();
                out.resize(n, 0.0);
                for (k, ck) in c.iter().enumerate() {
                    let f = &values[k * n..(k + 1) * n];
                    for &node in grid.interior_nodes() {
                        out[node] += ck * f[node];
                    }
                }
                grid.extend_ghosts(out);
            }
            ScatterKernel::Anisotropic(m) => {
                let kk = c_len(m);
                out.clear();
                out.resize(kk * n, 0.0);
                out.par_chunks_mut(n).enumerate().for_each(|(a, s)| {
                    for b in 0..kk {
                        let w = m[a * kk + b];
                        let f = &values[b * n..(b + 1) * n];
                        for &node in grid.interior_nodes() {
                            s[node] += w * f[node];
                        }
                    }
                    grid.extend_ghosts(s);
                });
            }
        }
    }

    /// Discrete source at one node from direction-major values.
    fn node_value(&self, values: &[f64], n: usize, node: usize, k: usize) -> f64 {
        match self {
            ScatterKernel::Isotropic(c) => c.iter().enumerate().map(|(j, cj)| cj * values[j * n + node]).sum(),
            ScatterKernel::Anisotropic(m) => {
                let kk = c_len(m);
                (0..kk).map(|j| m[k * kk + j] * values[j * n + node]).sum()
            }
        }
    }

    #[inline]
    fn sample(&self, grid: &SpatialGrid, source: &[f64], k: usize, x: Vec3) -> f64 {
        match self {
            ScatterKernel::Isotropic(_) => grid.interpolate(source, x),
            ScatterKernel::Anisotropic(_) => {
                let n = grid.node_count();
                grid.interpolate(&source[k * n..(k + 1) * n], x)
            }
        }
    }
}

fn c_len(m: &[f64]) -> usize {
    (m.len() as f64).sqrt().round() as usize
}

/// Angular nodes for integrating `F_0(x, .)` when the incoming data jumps
/// across `gamma`: the circle is split at the directions from each point of
/// `gamma` towards `x`, and each arc gets its own Gauss-Legendre rule. A
/// uniform direction rule would smear the jump into the first-collision
/// source along the characteristics of its own directions.
fn split_angular_nodes(problem: &TransportProblem, gl: &GaussLegendre, x: Vec3) -> Option<Vec<(Vec3, f64)>> {
    if problem.dim() != 2 {
        return None;
    }
    let gamma = problem.source.gamma()?;
    let mut cuts: Vec<f64> = gamma
        .points()
        .iter()
        .filter(|g| (x - **g).norm() > 1e-12)
        .map(|g| (x - *g).angle())
        .collect();
    if cuts.is_empty() {
        return None;
    }
    cuts.sort_by(|a, b| a.total_cmp(b));
    let mut nodes = Vec::with_capacity(cuts.len() * gl.order());
    for i in 0..cuts.len() {
        let a = cuts[i];
        let b = if i + 1 < cuts.len() {
            cuts[i + 1]
        } else {
            cuts[0] + 2.0 * std::f64::consts::PI
        };
        if b - a <= 0.0 {
            continue;
        }
        for (phi, w) in gl.mapped(a, b) {
            nodes.push((Vec3::from_angle(phi), w));
        }
    }
    Some(nodes)
}

/// Scattering source of the ballistic term at `x` in direction `xi`
/// (ignored for isotropic scattering), from split angular quadrature.
fn first_collision_at(
    problem: &TransportProblem,
    nodes: &[(Vec3, f64)],
    path: &mut RayPath,
    x: Vec3,
    dirs_out: &[Vec3],
    out: &mut [f64],
) -> Result<()> {
    let values: Vec<f64> = nodes
        .iter()
        .map(|&(d, _)| problem.ballistic_with(path, x, d))
        .collect::<Result<_>>()?;
    let phase = problem.medium.phase();
    for (o, &xi) in out.iter_mut().zip(dirs_out) {
        let mut acc = 0.0;
        let mut norm = 0.0;
        for (&(d, w), v) in nodes.iter().zip(&values) {
            let c = if phase.is_isotropic() {
                w
            } else {
                w * problem.medium.phase_eval(xi, d)
            };
            acc += c * v;
            norm += c;
        }
        *o = acc / norm;
    }
    Ok(())
}

/// Nodal scattering source of `F_0`. Falls back to the discrete kernel when
/// the incoming data is continuous.
fn first_collision_source(
    problem: &TransportProblem,
    grid: &SpatialGrid,
    dirs: &DirectionSet,
    kernel: &ScatterKernel,
    f0: &[f64],
) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let angular = GaussLegendre::new(32);
    if problem.dim() != 2 || problem.source.gamma().is_none() {
        kernel.apply(grid, f0, &mut out);
        return Ok(out);
    }
    let n = grid.node_count();
    let iso = matches!(kernel, ScatterKernel::Isotropic(_));
    let out_dirs: Vec<Vec3> = if iso {
        vec![Vec3::ZERO]
    } else {
        dirs.directions().to_vec()
    };
    let per_node: Vec<Vec<f64>> = grid
        .interior_nodes()
        .par_iter()
        .map_init(RayPath::default, |path, &node| -> Result<Vec<f64>> {
            let x = grid.position(node);
            let mut vals = vec![0.0; out_dirs.len()];
            match split_angular_nodes(problem, &angular, x) {
                Some(nodes) => first_collision_at(problem, &nodes, path, x, &out_dirs, &mut vals)?,
                None => {
                    for (k, v) in vals.iter_mut().enumerate() {
                        *v = kernel.node_value(f0, n, node, k);
                    }
                }
            }
            Ok(vals)
        })
        .collect::<Result<_>>()?;
    out.resize(out_dirs.len() * n, 0.0);
    for (vals, &node) in per_node.iter().zip(grid.interior_nodes()) {
        for (k, v) in vals.iter().enumerate() {
            out[k * n + node] = *v;
        }
    }
    for chunk in out.chunks_mut(n) {
        grid.extend_ghosts(chunk);
    }
    Ok(out)
}

/// Converged radiance on the grid: ballistic part `F_0`, scattered part
/// `F_1`, total `f`, and the scattering source of `f`.
#[derive(Clone, Debug)]
pub struct RadianceField {
    grid: SpatialGrid,
    dirs: DirectionSet,
    gl: GaussLegendre,
    kernel: ScatterKernel,
    f0: Vec<f64>,
    f1: Vec<f64>,
    total: Vec<f64>,
    /// Scattering source of the total field.
    source: Vec<f64>,
    terms: Vec<Vec<f64>>,
    cert: ConvergenceCert,
    settings: SolverSettings,
}

/// Runs the Neumann iteration to the requested tolerance.
pub fn solve(problem: &TransportProblem, settings: &SolverSettings) -> Result<RadianceField> {
    settings.validate(problem.geometry.diameter())?;
    let grid = SpatialGrid::new(&problem.geometry, settings.h);
    let dirs = DirectionSet::for_dimension(problem.dim(), settings.n_directions);
    let gl = GaussLegendre::new(settings.quad_order);
    let kernel = ScatterKernel::new(problem, &dirs);
    let est = estimate_contraction(problem, &dirs)?;
    let sup_f0 = problem.source.sup_abs();
    let scattering = !problem.medium.is_scattering_free() && sup_f0 > 0.0;
    if scattering && est.m >= 1.0 - 1e-6 {
        return Err(Error::NotContractive { m: est.m });
    }
    let (n_terms, tail_bound) = if scattering {
        terms_needed(sup_f0, est.m, settings.tol)
    } else {
        (0, 0.0)
    };
    if n_terms > settings.max_terms {
        return Err(Error::IterationBudget {
            needed: n_terms,
            max: settings.max_terms,
        });
    }
    log::info!(
        "solve: {} nodes x {} directions, M = {:.6}, N = {}",
        grid.interior_nodes().len(),
        dirs.len(),
        est.m,
        n_terms
    );

    let n = grid.node_count();
    let mut f0 = vec![0.0; dirs.len() * n];
    f0.par_chunks_mut(n)
        .enumerate()
        .try_for_each_init(RayPath::default, |path, (k, chunk)| -> Result<()> {
            let xi = dirs.direction(k);
            for &node in grid.interior_nodes() {
                chunk[node] = problem.ballistic_with(path, grid.position(node), xi)?;
            }
            grid.extend_ghosts(chunk);
            Ok(())
        })?;

    let sup = |v: &[f64]| -> f64 {
        let mut s: f64 = 0.0;
        for chunk in v.chunks(n) {
            for &node in grid.interior_nodes() {
                s = s.max(chunk[node].abs());
            }
        }
        s
    };

    let mut term_sups = vec![sup(&f0)];
    let mut f1 = vec![0.0; f0.len()];
    let mut total = f0.clone();
    let mut terms = Vec::new();
    let source0 = if scattering {
        first_collision_source(problem, &grid, &dirs, &kernel, &f0)?
    } else {
        let mut s = Vec::new();
        kernel.apply(&grid, &f0, &mut s);
        s
    };
    let mut source = source0.clone();
    if n_terms > 0 {
        let mut term = f0.clone();
        let mut next = vec![0.0; f0.len()];
        for iter in 1..=n_terms {
            sweep(problem, &grid, &dirs, &gl, &kernel, &source, &mut next, true)?;
            let s_next = sup(&next);
            let s_prev = *term_sups.last().unwrap();
            if s_next > est.m * s_prev * (1.0 + 1e-9) + 1e-300 {
                return Err(Error::ContractionViolated {
                    term: iter,
                    ratio: s_next / s_prev,
                    bound: est.m,
                });
            }
            term_sups.push(s_next);
            for (a, b) in f1.iter_mut().zip(&next) {
                *a += b;
            }
            for (a, b) in total.iter_mut().zip(&next) {
                *a += b;
            }
            if iter <= settings.keep_terms {
                terms.push(next.clone());
            }
            std::mem::swap(&mut term, &mut next);
            kernel.apply(&grid, &term, &mut source);
            if iter % 10 == 0 {
                log::debug!("term {iter}: sup = {s_next:.3e}");
            }
        }
    }
    source = total_source(&grid, &kernel, &source0, &f1);

    let bound = sup_f0 / (1.0 - est.m.min(1.0 - 1e-12));
    let s_total = sup(&total);
    if scattering && s_total > bound * (1.0 + 1e-9) {
        return Err(Error::ContractionViolated {
            term: n_terms,
            ratio: s_total / sup_f0,
            bound: 1.0 / (1.0 - est.m),
        });
    }
    if problem.source.is_nonnegative() {
        let neg = total.iter().fold(0.0f64, |a, &b| a.min(b));
        if neg < -1e-12 * sup_f0.max(1.0) {
            return Err(Error::InvalidSolver(format!(
                "negative radiance {neg:.3e} from nonnegative data"
            )));
        }
    }

    Ok(RadianceField {
        grid,
        dirs,
        gl,
        kernel,
        f0,
        f1,
        total,
        source,
        terms,
        cert: ConvergenceCert {
            m: est.m,
            m_sampled: est.m_sampled,
            tau_max: est.tau_max,
            n_terms,
            tail_bound,
            term_sups,
        },
        settings: settings.clone(),
    })
}

/// `S(F_0) + S(F_1)`, ghost nodes included.
fn total_source(grid: &SpatialGrid, kernel: &ScatterKernel, source0: &[f64], f1: &[f64]) -> Vec<f64> {
    let mut s = Vec::new();
    kernel.apply(grid, f1, &mut s);
    for (a, b) in s.iter_mut().zip(source0) {
        *a += b;
    }
    s
}

/// One application of the collision operator, `out = K S`, at interior
/// nodes and/or ghost nodes. Ghost nodes take the value carried along the
/// characteristic from where it leaves the domain, which extends `F_1`
/// continuously past the boundary.
#[allow(clippy::too_many_arguments)]
fn sweep(
    problem: &TransportProblem,
    grid: &SpatialGrid,
    dirs: &DirectionSet,
    gl: &GaussLegendre,
    kernel: &ScatterKernel,
    source: &[f64],
    out: &mut [f64],
    interior: bool,
) -> Result<()> {
    let n = grid.node_count();
    let geo = &problem.geometry;
    out.par_chunks_mut(n)
        .enumerate()
        .try_for_each_init(RayPath::default, |path, (k, chunk)| -> Result<()> {
            let xi = dirs.direction(k);
            let sample = |p: Vec3| kernel.sample(grid, source, k, p);
            if interior {
                chunk.fill(0.0);
                for &node in grid.interior_nodes() {
                    let x = grid.position(node);
                    let (lo, _) = geo.chord_params(x, xi);
                    path.trace(&problem.medium, geo, &problem.partition, x, xi, -lo)?;
                    chunk[node] = path.collision_integral(&problem.medium, gl, sample);
                }
            }
            for &node in grid.ghost_nodes() {
                let x = grid.position(node);
                chunk[node] = match geo.line_params(x, -xi) {
                    Some((t0, t1)) if t1 > t0 && t0 >= 0.0 => {
                        let y = x - xi * t0;
                        path.trace(&problem.medium, geo, &problem.partition, y, xi, t1 - t0)?;
                        path.collision_integral(&problem.medium, gl, sample)
                    }
                    _ => 0.0,
                };
            }
            Ok(())
        })
}

impl RadianceField {
    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn directions(&self) -> &DirectionSet {
        &self.dirs
    }

    pub fn certificate(&self) -> &ConvergenceCert {
        &self.cert
    }

    pub fn settings(&self) -> &SolverSettings {
        &self.settings
    }

    pub fn spacing(&self) -> f64 {
        self.grid.spacing()
    }

    #[inline]
    fn at(&self, v: &[f64], node: usize, k: usize) -> f64 {
        v[k * self.grid.node_count() + node]
    }

    pub fn f0_node(&self, node: usize, k: usize) -> f64 {
        self.at(&self.f0, node, k)
    }

    pub fn f1_node(&self, node: usize, k: usize) -> f64 {
        self.at(&self.f1, node, k)
    }

    pub fn total_node(&self, node: usize, k: usize) -> f64 {
        self.at(&self.total, node, k)
    }

    /// Individual term `f^(n)` at a node; `n = 0` is the ballistic term.
    pub fn term_node(&self, n: usize, node: usize, k: usize) -> Option<f64> {
        if n == 0 {
            return Some(self.f0_node(node, k));
        }
        self.terms.get(n - 1).map(|t| self.at(t, node, k))
    }

    /// Scattering source `int p(xi_k . xi') f(x_i, xi') dxi'` at a node.
    pub fn scattering_source(&self, node: usize, k: usize) -> f64 {
        match &self.kernel {
            ScatterKernel::Isotropic(_) => self.source[node],
            ScatterKernel::Anisotropic(_) => self.at(&self.source, node, k),
        }
    }

    /// Scattering source at an arbitrary point and direction.
    pub fn source_at(&self, problem: &TransportProblem, x: Vec3, xi: Vec3) -> f64 {
        match &self.kernel {
            ScatterKernel::Isotropic(_) => self.grid.interpolate(&self.source, x),
            ScatterKernel::Anisotropic(_) => {
                if let Some(k) = self.dirs.find(xi) {
                    return self.kernel.sample(&self.grid, &self.source, k, x);
                }
                let n = self.grid.node_count();
                let mut acc = 0.0;
                let mut norm = 0.0;
                let split = split_angular_nodes(problem, &GaussLegendre::new(32), x);
                let scattered = if split.is_some() { &self.f1 } else { &self.total };
                for (b, &w) in self.dirs.weights().iter().enumerate() {
                    let c = w * problem.medium.phase_eval(xi, self.dirs.direction(b));
                    acc += c * self.grid.interpolate(&scattered[b * n..(b + 1) * n], x);
                    norm += c;
                }
                let mut s = acc / norm;
                if let Some(nodes) = split {
                    // pointwise first-collision source; zero outside the domain
                    let mut s0 = [0.0];
                    let mut path = RayPath::default();
                    if first_collision_at(problem, &nodes, &mut path, x, &[xi], &mut s0).is_ok() {
                        s += s0[0];
                    }
                }
                s
            }
        }
    }

    /// Grid interpolation of `F_1` in a direction of the set.
    pub fn f1_interpolated(&self, x: Vec3, k: usize) -> f64 {
        let n = self.grid.node_count();
        self.grid.interpolate(&self.f1[k * n..(k + 1) * n], x)
    }

    /// Grid interpolation of the total radiance in a direction of the set.
    pub fn total_interpolated(&self, x: Vec3, k: usize) -> f64 {
        let n = self.grid.node_count();
        self.grid.interpolate(&self.total[k * n..(k + 1) * n], x)
    }

    /// `F_1(x, xi)` for any direction, from one transport step of the
    /// converged scattering source.
    pub fn f1_at(&self, problem: &TransportProblem, x: Vec3, xi: Vec3) -> Result<f64> {
        let tau = problem.geometry.tau_minus(x, xi)?;
        let mut path = RayPath::default();
        path.trace(&problem.medium, &problem.geometry, &problem.partition, x, xi, tau)?;
        Ok(match (&self.kernel, self.dirs.find(xi)) {
            (ScatterKernel::Anisotropic(_), None) => {
                path.collision_integral(&problem.medium, &self.gl, |p| self.source_at(problem, p, xi))
            }
            (_, k) => {
                let k = k.unwrap_or(0);
                path.collision_integral(&problem.medium, &self.gl, |p| {
                    self.kernel.sample(&self.grid, &self.source, k, p)
                })
            }
        })
    }

    /// Total radiance at any point: exact ballistic term plus `F_1`.
    pub fn value_at(&self, problem: &TransportProblem, x: Vec3, xi: Vec3) -> Result<f64> {
        Ok(problem.ballistic(x, xi)? + self.f1_at(problem, x, xi)?)
    }

    /// Collision integral of the converged source along the backward chord,
    /// `int_0^tau mu_s exp(-M_t) S ds`, in direction `k` of the set.
    pub fn collision_term(&self, problem: &TransportProblem, x: Vec3, k: usize) -> Result<f64> {
        self.f1_at(problem, x, self.dirs.direction(k))
    }

    /// Nodal scattering source of the total field: one value per node for
    /// isotropic scattering, otherwise direction-major.
    pub fn source_nodal(&self) -> &[f64] {
        &self.source
    }

    /// Raw arrays in direction-major layout (`k * nodes + node`).
    pub fn arrays(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.f0, &self.f1, &self.total)
    }

    /// Rebuilds a field from stored nodal values of `F_0` and `F_1`.
    pub fn from_nodal(
        problem: &TransportProblem,
        settings: &SolverSettings,
        cert: ConvergenceCert,
        f0: Vec<f64>,
        f1: Vec<f64>,
    ) -> Result<Self> {
        settings.validate(problem.geometry.diameter())?;
        let grid = SpatialGrid::new(&problem.geometry, settings.h);
        let dirs = DirectionSet::for_dimension(problem.dim(), settings.n_directions);
        let n = grid.node_count();
        if f0.len() != n * dirs.len() || f1.len() != f0.len() {
            return Err(Error::InvalidSolver("nodal arrays do not match the grid".into()));
        }
        let kernel = ScatterKernel::new(problem, &dirs);
        let gl = GaussLegendre::new(settings.quad_order);
        let mut f0 = f0;
        for chunk in f0.chunks_mut(n) {
            grid.extend_ghosts(chunk);
        }
        let mut total: Vec<f64> = f0.iter().zip(&f1).map(|(a, b)| a + b).collect();
        let source0 = first_collision_source(problem, &grid, &dirs, &kernel, &f0)?;
        let source = total_source(&grid, &kernel, &source0, &f1);
        // ghost values of F_1 from one more transport step of the source
        let mut f1 = f1;
        if !problem.medium.is_scattering_free() {
            sweep(problem, &grid, &dirs, &gl, &kernel, &source, &mut f1, false)?;
            for (t, (a, b)) in total.iter_mut().zip(f0.iter().zip(&f1)) {
                *t = a + b;
            }
        }
        Ok(RadianceField {
            gl,
            grid,
            dirs,
            kernel,
            f0,
            f1,
            total,
            source,
            terms: Vec::new(),
            cert,
            settings: settings.clone(),
        })
    }
}

impl ScatteredComponent for RadianceField {
    fn f1_at(&self, problem: &TransportProblem, x: Vec3, xi: Vec3) -> Result<f64> {
        RadianceField::f1_at(self, problem, x, xi)
    }

    fn spacing(&self) -> f64 {
        self.grid.spacing()
    }
}
