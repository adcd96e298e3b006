//! Monte Carlo estimate of `lambda_2(F_eps)` for planar self-similar sets.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ifs_zeta::IfsSystem;

/// Samples per independently seeded chunk.
pub const MC_CHUNK: usize = 1 << 14;

/// `x -> scale R(angle) x + (tx, ty)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarMap {
    pub scale: f64,
    pub angle: f64,
    pub tx: f64,
    pub ty: f64,
}

impl PlanarMap {
    fn linear(&self) -> Complex64 {
        Complex64::from_polar(self.scale, self.angle)
    }

    fn offset(&self) -> Complex64 {
        Complex64::new(self.tx, self.ty)
    }
}

/// Similarity maps together with the convex hull `K` of their attractor.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarIfs {
    maps: Vec<PlanarMap>,
    hull: Vec<Complex64>,
    diameter: f64,
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let t = ((p - a).re * ab.re + (p - a).im * ab.im) / ab.norm_sqr();
    (p - (a + ab * t.clamp(0.0, 1.0))).norm()
}

impl PlanarIfs {
    /// `hull` must be the convex hull of the attractor, so its vertices lie
    /// on the attractor. Map scales must reproduce `system`'s ratios.
    pub fn new(system: &IfsSystem, maps: Vec<PlanarMap>, hull: &[(f64, f64)]) -> Result<Self> {
        if system.ambient_dim() != 2 {
            return Err(Error::InvalidGeometry("planar geometry needs d = 2".into()));
        }
        if maps.len() != system.num_maps() {
            return Err(Error::InvalidGeometry(format!(
                "{} maps for {} ratios",
                maps.len(),
                system.num_maps()
            )));
        }
        let mut scales: Vec<f64> = maps.iter().map(|m| m.scale).collect();
        scales.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (s, r) in scales.iter().zip(system.ratios()) {
            if (s - r).abs() > 1e-14 {
                return Err(Error::InvalidGeometry(format!(
                    "map scale {s} does not match ratio {r}"
                )));
            }
        }
        if hull.len() < 3 {
            return Err(Error::InvalidGeometry(
                "hull needs at least three vertices".into(),
            ));
        }
        let mut hull: Vec<Complex64> = hull.iter().map(|&(x, y)| Complex64::new(x, y)).collect();
        let n = hull.len();
        let signed: f64 = (0..n).map(|i| cross(hull[i], hull[(i + 1) % n])).sum();
        if signed < 0.0 {
            hull.reverse();
        }
        for i in 0..n {
            let (a, b, c) = (hull[i], hull[(i + 1) % n], hull[(i + 2) % n]);
            if cross(b - a, c - b) <= 0.0 {
                return Err(Error::InvalidGeometry("hull is not strictly convex".into()));
            }
        }
        let diameter = hull
            .iter()
            .flat_map(|a| hull.iter().map(move |b| (a - b).norm()))
            .fold(0.0, f64::max);
        let ifs = Self {
            maps,
            hull,
            diameter,
        };
        for m in &ifs.maps {
            for &v in &ifs.hull {
                let image = m.linear() * v + m.offset();
                if ifs.polygon_distance(&ifs.hull, image) > 1e-12 * diameter {
                    return Err(Error::InvalidGeometry(format!(
                        "map sends hull vertex {v} outside the hull"
                    )));
                }
            }
        }
        Ok(ifs)
    }

    pub fn maps(&self) -> &[PlanarMap] {
        &self.maps
    }

    pub fn hull(&self) -> Vec<(f64, f64)> {
        self.hull.iter().map(|z| (z.re, z.im)).collect()
    }

    pub fn area(&self) -> f64 {
        let n = self.hull.len();
        0.5 * (0..n)
            .map(|i| cross(self.hull[i], self.hull[(i + 1) % n]))
            .sum::<f64>()
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.hull.len();
        (0..n)
            .map(|i| (self.hull[(i + 1) % n] - self.hull[i]).norm())
            .sum()
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// `lambda_2(K_eps) - lambda_2(K)` for the convex hull.
    pub fn outer_steiner(&self, eps: f64) -> f64 {
        self.perimeter() * eps + std::f64::consts::PI * eps * eps
    }

    fn polygon_distance(&self, poly: &[Complex64], p: Complex64) -> f64 {
        let n = poly.len();
        if (0..n).all(|i| cross(poly[(i + 1) % n] - poly[i], p - poly[i]) >= 0.0) {
            return 0.0;
        }
        (0..n)
            .map(|i| segment_distance(p, poly[i], poly[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest depth whose cells have diameter below `eps / 100`.
    pub fn depth_for(&self, eps: f64) -> u32 {
        let r1 = self.maps.iter().map(|m| m.scale).fold(0.0, f64::max);
        let mut n = 0;
        let mut size = self.diameter;
        while size >= eps / 100.0 {
            size *= r1;
            n += 1;
        }
        n
    }

    /// Classify `p` against `F_eps`: `Some(true)` inside, `Some(false)` outside,
    /// `None` when depth-`depth` cells cannot separate it.
    pub fn classify(&self, p: Complex64, eps: f64, depth: u32) -> Option<bool> {
        let mut undecided = false;
        let mut stack: Vec<(Complex64, Complex64, u32)> =
            vec![(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), 0)];
        let mut cell = vec![Complex64::new(0.0, 0.0); self.hull.len()];
        while let Some((lin, off, level)) = stack.pop() {
            for (c, &v) in cell.iter_mut().zip(&self.hull) {
                *c = lin * v + off;
            }
            // Hull vertices lie on F, so a close vertex certifies membership.
            if cell.iter().any(|c| (c - p).norm() <= eps) {
                return Some(true);
            }
            if self.polygon_distance(&cell, p) > eps {
                continue;
            }
            if level == depth {
                undecided = true;
                continue;
            }
            for m in &self.maps {
                stack.push((lin * m.linear(), lin * m.offset() + off, level + 1));
            }
        }
        if undecided {
            None
        } else {
            Some(false)
        }
    }

    /// Sierpinski gasket on the unit-side triangle.
    pub fn sierpinski_gasket(system: &IfsSystem) -> Result<Self> {
        let h = 3f64.sqrt() / 2.0;
        let maps = [(0.0, 0.0), (0.5, 0.0), (0.25, 0.5 * h)]
            .iter()
            .map(|&(tx, ty)| PlanarMap {
                scale: 0.5,
                angle: 0.0,
                tx,
                ty,
            })
            .collect();
        Self::new(system, maps, &[(0.0, 0.0), (1.0, 0.0), (0.5, h)])
    }

    /// Sierpinski carpet on the unit square.
    pub fn sierpinski_carpet(system: &IfsSystem) -> Result<Self> {
        let third = 1.0 / 3.0;
        let maps = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .filter(|&(i, j)| (i, j) != (1, 1))
            .map(|(i, j)| PlanarMap {
                scale: third,
                angle: 0.0,
                tx: i as f64 * third,
                ty: j as f64 * third,
            })
            .collect();
        Self::new(
            system,
            maps,
            &[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
        )
    }
}

/// Monte Carlo estimate of `lambda_2(F_eps)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    /// `1.96 stderr` plus half the area of the undecided boundary samples.
    pub half_width: f64,
    pub boundary_fraction: f64,
    pub depth: u32,
}

/// Uniform sampling over the bounding box of `K_eps`; undecided samples count 1/2.
/// Chunk `i` draws from stream `i` of a generator seeded with `seed`, so the
/// result does not depend on the thread count.
pub fn mc_parallel_area(
    planar: &PlanarIfs,
    eps: f64,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!(
            "eps must be positive, got {eps}"
        )));
    }
    if samples < 10_000 {
        return Err(Error::InvalidInput(format!(
            "need at least 10^4 samples, got {samples}"
        )));
    }
    let depth = planar.depth_for(eps);
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for v in &planar.hull {
        x0 = x0.min(v.re);
        x1 = x1.max(v.re);
        y0 = y0.min(v.im);
        y1 = y1.max(v.im);
    }
    let (x0, x1, y0, y1) = (x0 - eps, x1 + eps, y0 - eps, y1 + eps);
    let box_area = (x1 - x0) * (y1 - y0);

    let chunks = samples.div_ceil(MC_CHUNK as u64);
    let (hits, boundary) = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let count = (samples - chunk * MC_CHUNK as u64).min(MC_CHUNK as u64);
            let (mut hits, mut boundary) = (0u64, 0u64);
            for _ in 0..count {
                let p = Complex64::new(rng.random_range(x0..x1), rng.random_range(y0..y1));
                match planar.classify(p, eps, depth) {
                    Some(true) => hits += 1,
                    Some(false) => {}
                    None => boundary += 1,
                }
            }
            (hits, boundary)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));

    let n = samples as f64;
    let frac = (hits as f64 + 0.5 * boundary as f64) / n;
    let stderr = box_area * (frac * (1.0 - frac) / n).sqrt();
    Ok(McEstimate {
        mean: box_area * frac,
        stderr,
        half_width: 1.96 * stderr + 0.5 * box_area * boundary as f64 / n,
        boundary_fraction: boundary as f64 / n,
        depth,
    })
}
