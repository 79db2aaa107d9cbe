use std::f64::consts::PI;

use rayon::prelude::*;

use super::Sinogram;
use crate::error::{Error, Result};
use crate::vector::Vec3;

/// Reconstruction on an `n x n` pixel grid over the square circumscribing
/// the disk; pixels outside the disk are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructedImage {
    pub n: usize,
    pub center: Vec3,
    pub rho: f64,
    /// Row-major, row `j` at `y = center.y - rho + (j + 1/2) * pixel`.
    pub values: Vec<f64>,
}

impl ReconstructedImage {
    pub fn pixel(&self) -> f64 {
        2.0 * self.rho / self.n as f64
    }

    pub fn pixel_center(&self, i: usize, j: usize) -> Vec3 {
        let p = self.pixel();
        Vec3::new(
            self.center.x - self.rho + (i as f64 + 0.5) * p,
            self.center.y - self.rho + (j as f64 + 0.5) * p,
            0.0,
        )
    }

    pub fn in_support(&self, i: usize, j: usize) -> bool {
        (self.pixel_center(i, j) - self.center).norm() < self.rho
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.n + i]
    }
}

/// Ram-Lak filtering of one projection sampled at spacing `tau`, by direct
/// convolution with the band-limited kernel (zero padding implied).
pub fn ramp_filter(projection: &[f64], tau: f64) -> Vec<f64> {
    let q = projection.len();
    let kernel: Vec<f64> = (0..q)
        .map(|n| match n {
            0 => 1.0 / (4.0 * tau * tau),
            n if n % 2 == 1 => -1.0 / ((n * n) as f64 * PI * PI * tau * tau),
            _ => 0.0,
        })
        .collect();
    (0..q)
        .map(|k| {
            let mut acc = 0.0;
            for (j, p) in projection.iter().enumerate() {
                acc += kernel[k.abs_diff(j)] * p;
            }
            tau * acc
        })
        .collect()
}

/// Filtered backprojection of a parallel-beam sinogram over `[0, pi)`.
pub fn fbp_reconstruct(sino: &Sinogram, n: usize) -> Result<ReconstructedImage> {
    let g = sino.grid;
    if g.n_offsets < 65 || g.n_offsets % 2 == 0 || g.n_angles < 60 {
        return Err(Error::GridTooCoarse {
            angles: g.n_angles,
            offsets: g.n_offsets,
        });
    }
    let tau = g.spacing();
    let filtered: Vec<Vec<f64>> = (0..g.n_angles)
        .into_par_iter()
        .map(|m| ramp_filter(sino.row(m), tau))
        .collect();
    let normals: Vec<Vec3> = (0..g.n_angles).map(|m| Vec3::from_angle(g.theta(m))).collect();
    let mut image = ReconstructedImage {
        n,
        center: g.center,
        rho: g.rho,
        values: vec![0.0; n * n],
    };
    let scale = PI / g.n_angles as f64;
    let last = (g.n_offsets - 1) as f64;
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            (0..n)
                .map(|i| {
                    if !image.in_support(i, j) {
                        return 0.0;
                    }
                    let x = image.pixel_center(i, j) - g.center;
                    let mut acc = 0.0;
                    for (q, nm) in filtered.iter().zip(&normals) {
                        let u = (x.dot(*nm) + g.rho) / tau;
                        if u < 0.0 || u > last {
                            continue;
                        }
                        let k = (u.floor() as usize).min(g.n_offsets - 2);
                        let t = u - k as f64;
                        acc += q[k] * (1.0 - t) + q[k + 1] * t;
                    }
                    scale * acc
                })
                .collect()
        })
        .collect();
    for (j, row) in rows.into_iter().enumerate() {
        image.values[j * n..(j + 1) * n].copy_from_slice(&row);
    }
    Ok(image)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImageError {
    pub rel_l2: f64,
    pub max_abs: f64,
}

/// Errors against `truth` over pixels within `mask_fraction * rho` of the
/// centre.
pub fn image_error(
    image: &ReconstructedImage,
    truth: impl Fn(Vec3) -> f64,
    mask_fraction: f64,
) -> ImageError {
    let mut num = 0.0;
    let mut den = 0.0;
    let mut max_abs: f64 = 0.0;
    for j in 0..image.n {
        for i in 0..image.n {
            let p = image.pixel_center(i, j);
            if (p - image.center).norm() >= mask_fraction * image.rho {
                continue;
            }
            let t = truth(p);
            let e = image.get(i, j) - t;
            num += e * e;
            den += t * t;
            max_abs = max_abs.max(e.abs());
        }
    }
    ImageError {
        rel_l2: if den > 0.0 { (num / den).sqrt() } else { num.sqrt() },
        max_abs,
    }
}
