use crate::geometry::DomainGeometry;
use crate::vector::Vec3;

/// Extrapolation rule for one node outside the domain.
#[derive(Clone, Debug)]
struct Ghost {
    node: usize,
    terms: Vec<(usize, f64)>,
}

/// Uniform Cartesian grid over the bounding box of the domain. Values live
/// on nodes; nodes outside the domain are filled by two layers of
/// extrapolation so interpolation near the boundary stays first-order
/// accurate.
#[derive(Clone, Debug)]
pub struct SpatialGrid {
    dim: usize,
    origin: Vec3,
    h: f64,
    n: [usize; 3],
    interior: Vec<bool>,
    interior_nodes: Vec<usize>,
    ghosts: Vec<Ghost>,
    ghost_nodes: Vec<usize>,
}

impl SpatialGrid {
    pub fn new(geometry: &DomainGeometry, h: f64) -> Self {
        let dim = geometry.dim();
        let (lo, hi) = geometry.bounding_box();
        let count = |a: f64, b: f64| ((b - a) / h - 1e-9).ceil().max(1.0) as usize + 1;
        let n = [
            count(lo.x, hi.x),
            count(lo.y, hi.y),
            if dim == 3 { count(lo.z, hi.z) } else { 1 },
        ];
        let total = n[0] * n[1] * n[2];
        let mut grid = SpatialGrid {
            dim,
            origin: lo,
            h,
            n,
            interior: vec![false; total],
            interior_nodes: Vec::new(),
            ghosts: Vec::new(),
            ghost_nodes: Vec::new(),
        };
        for node in 0..total {
            if geometry.is_interior(grid.position(node)) {
                grid.interior[node] = true;
                grid.interior_nodes.push(node);
            }
        }
        grid.build_ghosts();
        grid.ghost_nodes = grid.ghosts.iter().map(|g| g.node).collect();
        grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn shape(&self) -> [usize; 3] {
        self.n
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn node_count(&self) -> usize {
        self.interior.len()
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior_nodes
    }

    /// Exterior nodes within two layers of the domain.
    pub fn ghost_nodes(&self) -> &[usize] {
        &self.ghost_nodes
    }

    pub fn is_interior_node(&self, node: usize) -> bool {
        self.interior[node]
    }

    #[inline]
    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.n[1] + j) * self.n[0] + i
    }

    #[inline]
    fn coords(&self, node: usize) -> [usize; 3] {
        let i = node % self.n[0];
        let j = (node / self.n[0]) % self.n[1];
        let k = node / (self.n[0] * self.n[1]);
        [i, j, k]
    }

    pub fn position(&self, node: usize) -> Vec3 {
        let [i, j, k] = self.coords(node);
        Vec3::new(
            self.origin.x + i as f64 * self.h,
            self.origin.y + j as f64 * self.h,
            if self.dim == 3 {
                self.origin.z + k as f64 * self.h
            } else {
                0.0
            },
        )
    }

    /// Node sitting at `x` (to within a millionth of a cell), if any.
    pub fn node_at(&self, x: Vec3) -> Option<usize> {
        let mut idx = [0usize; 3];
        for axis in 0..self.dim {
            let f = (x.get(axis) - self.origin.get(axis)) / self.h;
            let r = f.round();
            if (f - r).abs() > 1e-6 || r < 0.0 || r as usize >= self.n[axis] {
                return None;
            }
            idx[axis] = r as usize;
        }
        Some(self.index(idx[0], idx[1], idx[2]))
    }

    fn offset(&self, node: usize, d: [isize; 3]) -> Option<usize> {
        let c = self.coords(node);
        let mut out = [0usize; 3];
        for a in 0..3 {
            let v = c[a] as isize + d[a];
            if v < 0 || v >= self.n[a] as isize {
                return None;
            }
            out[a] = v as usize;
        }
        Some(self.index(out[0], out[1], out[2]))
    }

    fn build_ghosts(&mut self) {
        let total = self.node_count();
        let mut known = self.interior.clone();
        let axes: Vec<[isize; 3]> = (0..self.dim)
            .flat_map(|a| {
                let mut p = [0isize; 3];
                p[a] = 1;
                let mut m = [0isize; 3];
                m[a] = -1;
                [p, m]
            })
            .collect();
        let zr: isize = if self.dim == 3 { 1 } else { 0 };
        for _layer in 0..2 {
            let mut layer = Vec::new();
            for node in 0..total {
                if known[node] {
                    continue;
                }
                let mut terms = Vec::new();
                let mut lines = 0usize;
                for d in &axes {
                    let n1 = self.offset(node, *d);
                    let n2 = self.offset(node, [2 * d[0], 2 * d[1], 2 * d[2]]);
                    if let (Some(a), Some(b)) = (n1, n2) {
                        if known[a] && known[b] {
                            terms.push((a, 2.0));
                            terms.push((b, -1.0));
                            lines += 1;
                        }
                    }
                }
                if lines == 0 {
                    for dz in -zr..=zr {
                        for dy in -1..=1isize {
                            for dx in -1..=1isize {
                                if let Some(a) = self.offset(node, [dx, dy, dz]) {
                                    if a != node && known[a] {
                                        terms.push((a, 1.0));
                                        lines += 1;
                                    }
                                }
                            }
                        }
                    }
                }
                if lines > 0 {
                    let scale = 1.0 / lines as f64;
                    for t in &mut terms {
                        t.1 *= scale;
                    }
                    layer.push(Ghost { node, terms });
                }
            }
            for g in &layer {
                known[g.node] = true;
            }
            self.ghosts.extend(layer);
        }
    }

    /// Fills the ghost layers of a node-indexed array from its interior
    /// values, clamped to the interior range.
    pub fn extend_ghosts(&self, values: &mut [f64]) {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &n in &self.interior_nodes {
            lo = lo.min(values[n]);
            hi = hi.max(values[n]);
        }
        if !lo.is_finite() {
            return;
        }
        for g in &self.ghosts {
            let v: f64 = g.terms.iter().map(|&(a, w)| w * values[a]).sum();
            values[g.node] = v.clamp(lo, hi);
        }
    }

    /// Multilinear interpolation of node values at `x`; positions off the
    /// grid are clamped to it.
    #[inline]
    pub fn interpolate(&self, values: &[f64], x: Vec3) -> f64 {
        let locate = |v: f64, o: f64, n: usize| -> (usize, f64) {
            let f = (v - o) / self.h;
            let last = n.saturating_sub(2);
            let i = (f.floor().max(0.0) as usize).min(last);
            (i, (f - i as f64).clamp(0.0, 1.0))
        };
        let (i, tx) = locate(x.x, self.origin.x, self.n[0]);
        let (j, ty) = locate(x.y, self.origin.y, self.n[1]);
        let nx = self.n[0];
        if self.dim == 2 {
            let b = j * nx + i;
            let v00 = values[b];
            let v10 = values[b + 1];
            let v01 = values[b + nx];
            let v11 = values[b + nx + 1];
            let a = v00 + tx * (v10 - v00);
            let c = v01 + tx * (v11 - v01);
            a + ty * (c - a)
        } else {
            let (k, tz) = locate(x.z, self.origin.z, self.n[2]);
            let plane = nx * self.n[1];
            let b = k * plane + j * nx + i;
            let mut layer = [0.0; 2];
            for (dz, out) in layer.iter_mut().enumerate() {
                let o = b + dz * plane;
                let a = values[o] + tx * (values[o + 1] - values[o]);
                let c = values[o + nx] + tx * (values[o + nx + 1] - values[o + nx]);
                *out = a + ty * (c - a);
            }
            layer[0] + tz * (layer[1] - layer[0])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_covers_disk() {
        let g = SpatialGrid::new(&DomainGeometry::unit_disk(), 0.25);
        assert_eq!(g.shape(), [9, 9, 1]);
        let centre = g.node_at(Vec3::ZERO).unwrap();
        assert!(g.is_interior_node(centre));
        assert!(!g.is_interior_node(0));
    }

    #[test]
    fn linear_data_is_reproduced_including_ghosts() {
        let geo = DomainGeometry::unit_disk();
        let g = SpatialGrid::new(&geo, 1.0 / 16.0);
        let f = |p: Vec3| 1.0 + 0.5 * p.x - 0.25 * p.y;
        let mut v: Vec<f64> = (0..g.node_count())
            .map(|n| if g.is_interior_node(n) { f(g.position(n)) } else { 0.0 })
            .collect();
        g.extend_ghosts(&mut v);
        for t in 0..64 {
            let a = t as f64 * 0.1;
            let p = Vec3::new(a.cos(), a.sin(), 0.0) * 0.85;
            assert!((g.interpolate(&v, p) - f(p)).abs() < 1e-12);
        }
        // beyond the last interior nodes values are held to the interior range
        let lo = g.interior_nodes().iter().map(|&n| v[n]).fold(f64::INFINITY, f64::min);
        let hi = g.interior_nodes().iter().map(|&n| v[n]).fold(f64::NEG_INFINITY, f64::max);
        for t in 0..64 {
            let a = t as f64 * 0.1;
            let p = Vec3::new(a.cos(), a.sin(), 0.0);
            let y = g.interpolate(&v, p);
            assert!(y >= lo - 1e-12 && y <= hi + 1e-12);
            assert!((y - f(p)).abs() < 0.05);
        }
    }
}
