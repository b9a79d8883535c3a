//! Isotropic n-dimensional FFTs on `M^n` row-major arrays (last axis fastest).
//!
//! Transforms run axis by axis. Each line is transformed independently, so the
//! result is bit-identical whatever the size of the rayon pool.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(m: usize) -> Plans {
    static CACHE: OnceLock<Mutex<HashMap<usize, Plans>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(m)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(m), planner.plan_fft_inverse(m))
        })
        .clone()
}

const LINES_PER_TASK: usize = 8;

fn transform(data: &mut [Complex64], m: usize, dims: usize, inverse: bool) {
    debug_assert_eq!(data.len(), m.pow(dims as u32));
    let (fwd, inv) = plans(m);
    let fft = if inverse { inv } else { fwd };

    let mut scratch = vec![Complex64::new(0.0, 0.0); data.len()];
    for axis in 0..dims {
        let stride = m.pow((dims - 1 - axis) as u32);
        if stride == 1 {
            data.par_chunks_mut(m * LINES_PER_TASK)
                .for_each(|lines| fft.process(lines));
            continue;
        }
        let block = m * stride;
        for (src, tmp) in data.chunks_mut(block).zip(scratch.chunks_mut(block)) {
            // (m x stride) -> (stride x m) so each line is contiguous
            for i in 0..m {
                for j in 0..stride {
                    tmp[j * m + i] = src[i * stride + j];
                }
            }
            tmp.par_chunks_mut(m * LINES_PER_TASK)
                .for_each(|lines| fft.process(lines));
            for i in 0..m {
                for j in 0..stride {
                    src[i * stride + j] = tmp[j * m + i];
                }
            }
        }
    }
    if inverse {
        let scale = 1.0 / data.len() as f64;
        data.par_chunks_mut(4096)
            .for_each(|c| c.iter_mut().for_each(|z| *z *= scale));
    }
}

/// Unnormalized forward DFT, `F_k = sum_j f_j e^{-2 pi i j.k / M}`.
pub fn forward_raw(data: &mut [Complex64], m: usize, dims: usize) {
    transform(data, m, dims, false);
}

/// Inverse of [`forward_raw`] (includes the `1/M^n` factor).
pub fn inverse_raw(data: &mut [Complex64], m: usize, dims: usize) {
    transform(data, m, dims, true);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft_2d(x: &[Complex64], m: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); m * m];
        for k0 in 0..m {
            for k1 in 0..m {
                let mut acc = Complex64::new(0.0, 0.0);
                for j0 in 0..m {
                    for j1 in 0..m {
                        let ph =
                            -2.0 * std::f64::consts::PI * ((j0 * k0 + j1 * k1) as f64) / m as f64;
                        acc += x[j0 * m + j1] * Complex64::from_polar(1.0, ph);
                    }
                }
                out[k0 * m + k1] = acc;
            }
        }
        out
    }

    #[test]
    fn matches_naive_dft_in_2d() {
        let m = 8;
        let x: Vec<Complex64> = (0..m * m)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut y = x.clone();
        forward_raw(&mut y, m, 2);
        let reference = naive_dft_2d(&x, m);
        for (a, b) in y.iter().zip(&reference) {
            assert!((a - b).norm() < 1e-10);
        }
        inverse_raw(&mut y, m, 2);
        for (a, b) in y.iter().zip(&x) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn three_d_round_trip() {
        let m = 8;
        let x: Vec<Complex64> = (0..m * m * m)
            .map(|i| Complex64::new((i as f64).sqrt(), -(i as f64 * 0.3).sin()))
            .collect();
        let mut y = x.clone();
        forward_raw(&mut y, m, 3);
        inverse_raw(&mut y, m, 3);
        let err: f64 = y
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
    }
}
