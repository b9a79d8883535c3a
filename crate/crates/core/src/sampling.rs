//! Seeded sample families.
//!
//! All randomness flows through `ChaCha8Rng::seed_from_u64(seed)` with normals
//! drawn by `rand_distr::StandardNormal`, so any implementation of ChaCha8 with
//! the same seeding reproduces the streams.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::grid::{Field, Grid, RadialProfile};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random field whose spectrum is Gaussian noise tapered by `exp(-|xi|^2 / b^2)`
/// and cut off at `|xi| <= 2b`.
pub fn random_field(grid: Grid, seed: u64, bandwidth: f64) -> Field {
    let mut r = rng(seed);
    let raw: Vec<Complex64> = (0..grid.len())
        .map(|i| {
            let re: f64 = r.sample(StandardNormal);
            let im: f64 = r.sample(StandardNormal);
            let xi = grid.frequency_norm(i);
            if xi > 2.0 * bandwidth {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(re, im) * (-(xi * xi) / (bandwidth * bandwidth)).exp()
            }
        })
        .collect();
    let f = Field::from_raw_spectrum(grid, raw, 0.0);
    let norm = f.l2_norm();
    f.scaled(Complex64::new(1.0 / norm, 0.0))
}

/// Random nonnegative field: a sum of Gaussian bumps at random centers.
pub fn random_bumps(grid: Grid, seed: u64, count: usize, min_width: f64) -> Field {
    let mut r = rng(seed);
    let l = grid.half_extent();
    let bumps: Vec<([f64; 3], f64, f64)> = (0..count)
        .map(|_| {
            let mut c = [0.0; 3];
            for d in c.iter_mut().take(grid.dims()) {
                *d = r.random_range(-0.4 * l..0.4 * l);
            }
            let w = r.random_range(min_width..2.5 * min_width);
            let a = r.random_range(0.2..1.0);
            (c, w, a)
        })
        .collect();
    Field::from_fn(grid, |x| {
        let v: f64 = bumps
            .iter()
            .map(|(c, w, a)| {
                let d2: f64 = (0..3).map(|d| (x[d] - c[d]).powi(2)).sum();
                a * (-std::f64::consts::PI * d2 / (w * w)).exp()
            })
            .sum();
        Complex64::new(v, 0.0)
    })
}

/// Random radial Gaussian mixture with widths in `[min_width, max_width]`
/// and random complex amplitudes.
pub fn random_radial(grid: Grid, seed: u64, min_width: f64, max_width: f64) -> Field {
    let mut r = rng(seed);
    let terms: Vec<(Complex64, f64)> = (0..3)
        .map(|_| {
            let w = r.random_range(min_width..max_width);
            let a = Complex64::new(r.sample(StandardNormal), r.sample(StandardNormal));
            (a, w)
        })
        .collect();
    Field::from_fn(grid, |x| {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        terms
            .iter()
            .map(|(a, w)| a * (-std::f64::consts::PI * r2 / (w * w)).exp())
            .sum()
    })
}

/// Family of radial Gaussians `exp(-pi |x|^2 / a^2)` with widths spread
/// geometrically over `[min_width, max_width]`.
pub fn gaussian_family(count: usize, min_width: f64, max_width: f64) -> Vec<RadialProfile> {
    (0..count)
        .map(|i| {
            let s = if count > 1 {
                i as f64 / (count - 1) as f64
            } else {
                0.0
            };
            RadialProfile::Gaussian {
                width: min_width * (max_width / min_width).powf(s),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let g = Grid::new(2, 4.0, 16).unwrap();
        assert_eq!(random_field(g, 3, 1.0), random_field(g, 3, 1.0));
        assert_ne!(random_field(g, 3, 1.0), random_field(g, 4, 1.0));
        assert!((random_field(g, 3, 1.0).l2_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn radial_samples_are_symmetric() {
        let g = Grid::new(2, 8.0, 64).unwrap();
        let f = random_radial(g, 9, 1.0, 3.0);
        assert!(f.symmetry_defect() < 1e-13);
    }
}
