//! Plain-text artifacts: CSV tables with C-style `%.12e` floats and ASCII
//! PGM images.

use std::io::{self, BufRead, Write};

use crate::error::{Error, Result};
use crate::jump::JumpMeasurement;
use crate::solver::{RadianceField, SpatialGrid};
use crate::vector::Vec3;
use crate::xray::ReconstructedImage;
use crate::xray::{ChordPlan, Sinogram, SinogramGrid};

/// Formats like C's `%.12e`: 13 significant digits, signed exponent of at
/// least two digits.
pub fn sci(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let s = format!("{x:.12e}");
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let e: i32 = exp.parse().expect("integer exponent");
    let sign = if e < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", e.abs())
}

fn axis_names(prefix: &str, dim: usize) -> String {
    ["x", "y", "z"][..dim]
        .iter()
        .map(|a| format!("{prefix}_{a}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn components(v: Vec3, dim: usize) -> String {
    v.to_array()[..dim]
        .iter()
        .map(|&c| sci(c))
        .collect::<Vec<_>>()
        .join(",")
}

/// Interior nodes times directions: `x,y(,z),k,xi_x,xi_y(,xi_z),f,F0,F1`.
pub fn write_field_csv<W: Write>(mut w: W, field: &RadianceField) -> io::Result<()> {
    let grid = field.grid();
    let dim = grid.dim();
    let axes = &["x", "y", "z"][..dim];
    writeln!(w, "{},k,{},f,F0,F1", axes.join(","), axis_names("xi", dim))?;
    let dirs = field.directions();
    for &node in grid.interior_nodes() {
        let x = grid.position(node);
        for k in 0..dirs.len() {
            writeln!(
                w,
                "{},{k},{},{},{},{}",
                components(x, dim),
                components(dirs.direction(k), dim),
                sci(field.total_node(node, k)),
                sci(field.f0_node(node, k)),
                sci(field.f1_node(node, k)),
            )?;
        }
    }
    Ok(())
}

/// One row per measured characteristic. Points and directions are expanded
/// into components (`x_star_x,x_star_y,...`).
pub fn write_jumps_csv<W: Write>(mut w: W, dim: usize, rows: &[JumpMeasurement]) -> io::Result<()> {
    writeln!(
        w,
        "{},{},{},{},chord,jump_extracted,jump_predicted,rel_err",
        axis_names("x_star", dim),
        axis_names("xi_star", dim),
        axis_names("exit_x", dim),
        axis_names("exit_xi", dim),
    )?;
    for m in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            components(m.base, dim),
            components(m.dir, dim),
            components(m.exit, dim),
            components(m.dir, dim),
            sci(m.chord),
            sci(m.extracted),
            sci(m.predicted),
            sci(m.rel_err()),
        )?;
    }
    Ok(())
}

pub fn write_sinogram_csv<W: Write>(mut w: W, sino: &Sinogram) -> io::Result<()> {
    writeln!(w, "theta,s,g")?;
    let grid = sino.grid;
    for m in 0..grid.n_angles {
        for q in 0..grid.n_offsets {
            writeln!(
                w,
                "{},{},{}",
                sci(grid.theta(m)),
                sci(grid.offset(q)),
                sci(sino.get(m, q))
            )?;
        }
    }
    Ok(())
}

/// Reads a sinogram written by [`write_sinogram_csv`] and checks it against
/// the expected grid.
pub fn read_sinogram_csv<R: BufRead>(r: R, grid: SinogramGrid) -> Result<Sinogram> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .transpose()
        .map_err(|e| Error::Format(e.to_string()))?
        .unwrap_or_default();
    if header.trim() != "theta,s,g" {
        return Err(Error::Format(format!("unexpected sinogram header `{header}`")));
    }
    let mut sino = Sinogram::zeros(grid);
    let mut count = 0;
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::Format(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let vals = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Format(format!("line {}: {e}", i + 2)))?;
        if vals.len() != 3 || count >= grid.len() {
            return Err(Error::Format(format!("line {}: expected theta,s,g", i + 2)));
        }
        let (m, q) = (count / grid.n_offsets, count % grid.n_offsets);
        let scale = grid.rho.max(1.0);
        if (vals[0] - grid.theta(m)).abs() > 1e-9 || (vals[1] - grid.offset(q)).abs() > 1e-9 * scale {
            return Err(Error::Format(format!(
                "line {}: sample ({}, {}) does not match the configured grid",
                i + 2,
                vals[0],
                vals[1]
            )));
        }
        sino.values[count] = vals[2];
        count += 1;
    }
    if count != grid.len() {
        return Err(Error::Format(format!(
            "sinogram has {count} samples, grid expects {}",
            grid.len()
        )));
    }
    Ok(sino)
}

/// Reads nodal `F_0` and `F_1` back from a field dump on `grid` with
/// `n_directions` directions. Arrays are direction-major; ghost entries are
/// left at zero.
pub fn read_field_csv<R: BufRead>(r: R, grid: &SpatialGrid, n_directions: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let dim = grid.dim();
    let mut lines = r.lines();
    let header = lines
        .next()
        .transpose()
        .map_err(|e| Error::Format(e.to_string()))?
        .unwrap_or_default();
    let axes = ["x", "y", "z"][..dim].join(",");
    let want = format!("{axes},k,{},f,F0,F1", axis_names("xi", dim));
    if header.trim() != want {
        return Err(Error::Format(format!("unexpected field header `{header}`")));
    }
    let n = grid.node_count();
    let mut f0 = vec![0.0; n * n_directions];
    let mut f1 = vec![0.0; n * n_directions];
    let mut seen = vec![false; n * n_directions];
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::Format(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let vals = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Format(format!("line {}: {e}", i + 2)))?;
        if vals.len() != 2 * dim + 4 {
            return Err(Error::Format(format!("line {}: expected {} columns", i + 2, 2 * dim + 4)));
        }
        let x = Vec3::from_slice(&vals[..dim]).expect("length checked");
        let k = vals[dim] as usize;
        let node = grid
            .node_at(x)
            .filter(|&node| grid.is_interior_node(node) && k < n_directions && vals[dim] == k as f64)
            .ok_or_else(|| Error::Format(format!("line {}: sample is not an interior grid node", i + 2)))?;
        let idx = k * n + node;
        f0[idx] = vals[2 * dim + 2];
        f1[idx] = vals[2 * dim + 3];
        seen[idx] = true;
    }
    let expected = grid.interior_nodes().len() * n_directions;
    let found = seen.iter().filter(|&&s| s).count();
    if found != expected {
        return Err(Error::Format(format!("field has {found} samples, grid expects {expected}")));
    }
    Ok((f0, f1))
}

/// Sinogram line plan: which `gamma` points realize each `(theta, s)`.
pub fn write_plan_csv<W: Write>(mut w: W, plans: &[ChordPlan]) -> io::Result<()> {
    writeln!(w, "m,q,theta,s,gamma_a_x,gamma_a_y,gamma_b_x,gamma_b_y")?;
    for p in plans {
        let pts = match p.gamma_points() {
            Some([a, b]) => format!("{},{}", components(a, 2), components(b, 2)),
            None => "nan,nan,nan,nan".into(),
        };
        writeln!(w, "{},{},{},{},{pts}", p.m, p.q, sci(p.theta), sci(p.s))?;
    }
    Ok(())
}

/// ASCII PGM (P2, maxval 65535). Values map linearly from `[lo, hi]`; the
/// scale is recorded in a header comment and returned.
pub fn write_pgm<W: Write>(mut w: W, image: &ReconstructedImage) -> io::Result<(f64, f64)> {
    let lo = image.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = image.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() && hi > lo { (lo, hi) } else { (lo.min(0.0), lo.min(0.0) + 1.0) };
    writeln!(w, "P2")?;
    writeln!(w, "# value = {} + level * {}", sci(lo), sci((hi - lo) / 65535.0))?;
    writeln!(w, "{} {}", image.n, image.n)?;
    writeln!(w, "65535")?;
    // PGM rows run top to bottom
    for j in (0..image.n).rev() {
        let row = (0..image.n)
            .map(|i| {
                let level = ((image.get(i, j) - lo) / (hi - lo) * 65535.0).round();
                (level.clamp(0.0, 65535.0) as u32).to_string()
            })
            .collect::<Vec<_>>()
            .join(" ");
        writeln!(w, "{row}")?;
    }
    Ok((lo, hi))
}

/// Pixel-center grid dump: `x,y,value`.
pub fn write_image_csv<W: Write>(mut w: W, image: &ReconstructedImage) -> io::Result<()> {
    writeln!(w, "x,y,value")?;
    for j in 0..image.n {
        for i in 0..image.n {
            let c = image.pixel_center(i, j);
            writeln!(w, "{},{},{}", sci(c.x), sci(c.y), sci(image.get(i, j)))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainGeometry;

    #[test]
    fn sci_matches_c_format() {
        assert_eq!(sci(1.0), "1.000000000000e+00");
        assert_eq!(sci(-0.00123), "-1.230000000000e-03");
        assert_eq!(sci(0.0), "0.000000000000e+00");
        assert_eq!(sci(6.02214076e123), "6.022140760000e+123");
        assert_eq!(sci((-2.0f64).exp()), "1.353352832366e-01");
    }

    #[test]
    fn sinogram_round_trip() {
        let g = DomainGeometry::unit_disk();
        let grid = SinogramGrid::new(&g, 4, 5).unwrap();
        let mut sino = Sinogram::zeros(grid);
        for (i, v) in sino.values.iter_mut().enumerate() {
            *v = (i as f64).sqrt() / 7.0;
        }
        let mut buf = Vec::new();
        write_sinogram_csv(&mut buf, &sino).unwrap();
        let back = read_sinogram_csv(&buf[..], grid).unwrap();
        for (a, b) in back.values.iter().zip(&sino.values) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300));
        }
        let other = SinogramGrid::new(&g, 5, 5).unwrap();
        assert!(read_sinogram_csv(&buf[..], other).is_err());
    }

    #[test]
    fn pgm_records_scale() {
        let image = ReconstructedImage {
            n: 2,
            center: Vec3::ZERO,
            rho: 1.0,
            values: vec![0.0, 1.0, 2.0, 3.0],
        };
        let mut buf = Vec::new();
        let (lo, hi) = write_pgm(&mut buf, &image).unwrap();
        assert_eq!((lo, hi), (0.0, 3.0));
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "P2");
        assert!(lines[1].starts_with("# value = "));
        assert_eq!(lines[2], "2 2");
        assert_eq!(lines[4], "43690 65535");
        assert_eq!(lines[5], "0 21845");
    }

    #[test]
    fn field_round_trip() {
        use crate::media::{MediumModel, PhaseFunction};
        use crate::problem::TransportProblem;
        use crate::solver::{solve, SolverSettings};
        use crate::{BoundarySource, SubdomainPartition};

        let g = DomainGeometry::unit_disk();
        let m = MediumModel::homogeneous(1.0, 0.5, PhaseFunction::Isotropic, &g).unwrap();
        let p = TransportProblem::new(g, SubdomainPartition::homogeneous(), m, BoundarySource::constant(1.0)).unwrap();
        let s = SolverSettings {
            h: 0.25,
            n_directions: 8,
            tol: 1e-3,
            ..Default::default()
        };
        let field = solve(&p, &s).unwrap();
        let mut buf = Vec::new();
        write_field_csv(&mut buf, &field).unwrap();
        let (f0, f1) = read_field_csv(&buf[..], field.grid(), 8).unwrap();
        let n = field.grid().node_count();
        for &node in field.grid().interior_nodes() {
            for k in 0..8 {
                assert!((f0[k * n + node] - field.f0_node(node, k)).abs() < 1e-12);
                assert!((f1[k * n + node] - field.f1_node(node, k)).abs() < 1e-12);
            }
        }
        assert!(read_field_csv(&buf[..buf.len() / 2], field.grid(), 8).is_err());
    }
}
