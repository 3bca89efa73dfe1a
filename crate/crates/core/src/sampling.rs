//! Deterministic point and direction sets used for sampled hypothesis checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Point;

fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base) as f64 * inv;
        index /= base;
        inv /= base as f64;
    }
    out
}

/// Halton points (bases 2, 3, 5) in the unit cube, skipping the origin.
pub fn halton_unit(n: usize) -> Vec<[f64; 3]> {
    (1..=n as u64)
        .map(|i| [radical_inverse(i, 2), radical_inverse(i, 3), radical_inverse(i, 5)])
        .collect()
}

/// Halton points mapped into the axis-aligned box `[lo, hi]`.
pub fn halton_box(n: usize, lo: Point, hi: Point) -> Vec<Point> {
    halton_unit(n)
        .into_iter()
        .map(|u| Point::new(lo.x + u[0] * (hi.x - lo.x), lo.y + u[1] * (hi.y - lo.y), lo.z + u[2] * (hi.z - lo.z)))
        .collect()
}

/// Quasi-uniform unit vectors on the sphere (golden-angle spiral).
pub fn fibonacci_sphere(n: usize) -> Vec<Point> {
    let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            Point::new(rho * phi.cos(), rho * phi.sin(), z)
        })
        .collect()
}

/// Coordinate axes, face diagonals and `extra` seeded random unit vectors.
pub fn test_directions(extra: usize, seed: u64) -> Vec<Point> {
    let mut dirs = vec![Point::x(), Point::y(), Point::z()];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    dirs.push(Point::new(s, s, 0.0));
    dirs.push(Point::new(s, 0.0, s));
    dirs.push(Point::new(0.0, s, s));
    dirs.push(Point::new(s, -s, 0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while dirs.len() < 7 + extra {
        let v = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            dirs.push(v / n);
        }
    }
    dirs
}

/// Seeded uniform points in a ball of the given radius.
pub fn random_ball(n: usize, radius: f64, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let v = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if v.norm_squared() <= 1.0 {
            out.push(v * radius);
        }
    }
    out
}
