//! Periodic computational torus `[-L, L)^n` standing in for `R^n`, the sampled
//! fields that live on it, and the normalized discrete Fourier transform.
//!
//! Frequencies are measured in cycles per unit length, matching the kernel
//! `e^{2 pi i xi.x}`: the lattice is `(1/(2L)) * {-M/2, ..., M/2 - 1}^n`.
//! A [`Spectrum`] stores samples of `f^(xi) = int f(x) e^{-2 pi i xi.x} dx`
//! in FFT index order, so `||f||_{L^2} = ||f^||_{L^2}` holds with the grid
//! measures `dx^n` and `dxi^n`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fft;

/// Isotropic periodic grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dims: usize,
    half_extent: f64,
    points: usize,
}

impl Grid {
    /// `dims` in {1,2,3}, `points` a power of two no smaller than 8.
    pub fn new(dims: usize, half_extent: f64, points: usize) -> Result<Self> {
        if !(1..=3).contains(&dims) {
            return Err(LabError::InvalidGrid(format!(
                "dimension {dims} outside {{1, 2, 3}}"
            )));
        }
        if !(half_extent.is_finite() && half_extent > 0.0) {
            return Err(LabError::InvalidGrid(format!(
                "half-extent must be positive, got {half_extent}"
            )));
        }
        if points % 2 == 1 {
            return Err(LabError::InvalidGrid(format!(
                "odd resolution M = {points}"
            )));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(LabError::InvalidGrid(format!(
                "resolution M = {points} must be a power of two >= 8"
            )));
        }
        Ok(Self {
            dims,
            half_extent,
            points,
        })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Half-extent `L`.
    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    /// Points per axis `M`.
    pub fn points(&self) -> usize {
        self.points
    }

    /// Total sample count `M^n`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dims as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_extent / self.points as f64
    }

    /// Frequency spacing `1/(2L)`.
    pub fn dxi(&self) -> f64 {
        0.5 / self.half_extent
    }

    /// Spatial cell volume `dx^n`.
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dims as i32)
    }

    /// Frequency cell volume `dxi^n`.
    pub fn frequency_cell_volume(&self) -> f64 {
        self.dxi().powi(self.dims as i32)
    }

    /// Largest per-axis frequency magnitude, `M/(4L)`.
    pub fn band_edge(&self) -> f64 {
        self.points as f64 * self.dxi() / 2.0
    }

    /// Splits a flat index into per-axis indices (last axis fastest).
    pub fn unravel(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        for axis in (0..self.dims).rev() {
            out[axis] = idx % self.points;
            idx /= self.points;
        }
        out
    }

    pub fn ravel(&self, axes: &[usize]) -> usize {
        axes.iter()
            .take(self.dims)
            .fold(0, |acc, &i| acc * self.points + i)
    }

    pub fn coordinate(&self, j: usize) -> f64 {
        -self.half_extent + j as f64 * self.dx()
    }

    /// Spatial position of a flat index; unused axes are zero.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let ax = self.unravel(idx);
        let mut x = [0.0; 3];
        for d in 0..self.dims {
            x[d] = self.coordinate(ax[d]);
        }
        x
    }

    /// Signed integer frequency label of an FFT index.
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i < self.points / 2 {
            i as i64
        } else {
            i as i64 - self.points as i64
        }
    }

    /// FFT index of a signed integer frequency label.
    pub fn wavenumber_index(&self, k: i64) -> usize {
        k.rem_euclid(self.points as i64) as usize
    }

    /// Frequency vector `xi` (cycles per unit length) at a flat FFT index.
    pub fn frequency(&self, idx: usize) -> [f64; 3] {
        let ax = self.unravel(idx);
        let mut xi = [0.0; 3];
        for d in 0..self.dims {
            xi[d] = self.wavenumber(ax[d]) as f64 * self.dxi();
        }
        xi
    }

    pub fn frequency_norm(&self, idx: usize) -> f64 {
        let xi = self.frequency(idx);
        (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt()
    }

    /// `|xi|` for every FFT index.
    pub fn frequency_norms(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.frequency_norm(i)).collect()
    }

    pub fn radius(&self, idx: usize) -> f64 {
        let x = self.position(idx);
        (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
    }

    pub fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(LabError::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

/// Complex samples of `u(., t)` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<Complex64>,
    time: f64,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<Complex64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LabError::GridMismatch(format!(
                "{} samples for a grid of {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values, time })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            time: 0.0,
        }
    }

    /// Samples `f(x)` at every grid point.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64; 3]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.position(i))).collect();
        Self {
            grid,
            values,
            time: 0.0,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&z| f(z)).collect(),
            time: self.time,
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        self.map(|z| z * c)
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn zip_with(
        &self,
        other: &Field,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Field> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            time: self.time,
        })
    }

    /// Discrete `L^p` norm with the grid measure; `p = inf` is the sample max.
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_norm(&self.values, p, self.grid.cell_volume())
    }

    pub fn l2_norm(&self) -> f64 {
        self.mass().sqrt()
    }

    /// `M[u] = int |u|^2 dx`.
    pub fn mass(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    /// `<f, g> = int f conj(g) dx`.
    pub fn inner(&self, other: &Field) -> Result<Complex64> {
        self.grid.ensure_same(&other.grid)?;
        let s: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(s * self.grid.cell_volume())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn ensure_finite(&self, context: &str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            let bad = self
                .values
                .iter()
                .position(|z| !(z.re.is_finite() && z.im.is_finite()))
                .unwrap_or(0);
            Err(LabError::NonFinite(format!(
                "{context}: sample {bad} at t = {}",
                self.time
            )))
        }
    }

    /// Relative L^2 distance `||self - other|| / ||other||`.
    pub fn relative_l2_distance(&self, other: &Field) -> Result<f64> {
        let diff = self.sub(other)?.l2_norm();
        let base = other.l2_norm();
        Ok(if base > 0.0 { diff / base } else { diff })
    }

    /// Largest modulus on the boundary faces relative to the peak; bounds the
    /// error of the torus surrogate for data on `R^n`.
    pub fn edge_ratio(&self) -> f64 {
        let peak = self.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        let m = self.grid.points;
        let edge = (0..self.grid.len())
            .filter(|&i| {
                let ax = self.grid.unravel(i);
                ax[..self.grid.dims].iter().any(|&a| a == 0 || a == m - 1)
            })
            .map(|i| self.values[i].norm())
            .fold(0.0, f64::max);
        edge / peak
    }

    /// Worst relative deviation under the lattice symmetries (axis sign flips
    /// and axis permutations) that fix the origin of the torus.
    pub fn symmetry_defect(&self) -> f64 {
        let peak = self.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        let g = self.grid;
        let m = g.points;
        let mut worst = 0.0f64;
        let mut check = |map: &dyn Fn([usize; 3]) -> [usize; 3]| {
            for i in 0..g.len() {
                let j = g.ravel(&map(g.unravel(i)));
                worst = worst.max((self.values[i] - self.values[j]).norm());
            }
        };
        // j -> M - j reflects x -> -x on the lattice x_j = -L + j dx
        for axis in 0..g.dims {
            check(&|mut a: [usize; 3]| {
                a[axis] = (m - a[axis]) % m;
                a
            });
        }
        for axis in 1..g.dims {
            check(&|mut a: [usize; 3]| {
                a.swap(axis - 1, axis);
                a
            });
        }
        worst / peak
    }

    /// Unnormalized DFT of the samples in FFT order.
    pub fn raw_spectrum(&self) -> Vec<Complex64> {
        let mut data = self.values.clone();
        fft::forward_raw(&mut data, self.grid.points, self.grid.dims);
        data
    }

    /// Builds a field from an unnormalized spectrum (inverse of [`Field::raw_spectrum`]).
    pub fn from_raw_spectrum(grid: Grid, mut raw: Vec<Complex64>, time: f64) -> Self {
        fft::inverse_raw(&mut raw, grid.points, grid.dims);
        Self {
            grid,
            values: raw,
            time,
        }
    }

    /// Applies the Fourier multiplier `symbol(idx)` (indexed in FFT order).
    pub fn apply_symbol(&self, symbol: impl Fn(usize) -> Complex64) -> Self {
        let mut raw = self.raw_spectrum();
        raw.iter_mut()
            .enumerate()
            .for_each(|(i, z)| *z *= symbol(i));
        Self::from_raw_spectrum(self.grid, raw, self.time)
    }
}

pub(crate) fn lp_norm(values: &[Complex64], p: f64, cell: f64) -> f64 {
    if p.is_infinite() {
        values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    } else if p == 2.0 {
        (values.iter().map(|z| z.norm_sqr()).sum::<f64>() * cell).sqrt()
    } else {
        (values.iter().map(|z| z.norm().powf(p)).sum::<f64>() * cell).powf(1.0 / p)
    }
}

/// Samples of the continuous Fourier transform on the frequency lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    values: Vec<Complex64>,
    time: f64,
}

impl Spectrum {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Coefficients in FFT index order; see [`Grid::frequency`].
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn from_values(grid: Grid, values: Vec<Complex64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LabError::GridMismatch(format!(
                "{} coefficients for a grid of {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values, time })
    }

    /// Coefficient at the signed integer frequency labels `k` (xi = k / (2L)).
    pub fn at(&self, k: &[i64]) -> Complex64 {
        let idx: Vec<usize> = k.iter().map(|&kk| self.grid.wavenumber_index(kk)).collect();
        self.values[self.grid.ravel(&idx)]
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.frequency_cell_volume())
            .sqrt()
    }
}

/// `(-1)^{sum of signed frequency labels}` accounts for the lattice starting at `-L`.
fn parity(grid: &Grid, idx: usize) -> f64 {
    let ax = grid.unravel(idx);
    let s: usize = ax[..grid.dims()].iter().sum();
    if s % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Discrete surrogate of the Fourier transform with the `e^{-2 pi i x.xi}` kernel.
pub fn forward_transform(f: &Field) -> Spectrum {
    let grid = f.grid;
    let cell = grid.cell_volume();
    let mut raw = f.raw_spectrum();
    raw.iter_mut()
        .enumerate()
        .for_each(|(i, z)| *z *= parity(&grid, i) * cell);
    Spectrum {
        grid,
        values: raw,
        time: f.time,
    }
}

/// Exact inverse of [`forward_transform`].
pub fn inverse_transform(s: &Spectrum) -> Field {
    let grid = s.grid;
    let cell = grid.cell_volume();
    let raw: Vec<Complex64> = s
        .values
        .iter()
        .enumerate()
        .map(|(i, z)| z * (parity(&grid, i) / cell))
        .collect();
    Field::from_raw_spectrum(grid, raw, s.time)
}

/// Radially symmetric initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RadialProfile {
    /// `exp(-pi |x|^2 / a^2)`.
    Gaussian { width: f64 },
    /// `sech(|x| / a)`.
    SechBump { width: f64 },
    /// `exp(-(|x| - r0)^2 / (2 sigma^2))`.
    Ring { radius: f64, width: f64 },
    /// Sum of `amplitude * exp(-pi |x|^2 / width^2)` terms.
    GaussianMix { terms: Vec<(f64, f64)> },
}

impl RadialProfile {
    fn widths(&self) -> Vec<f64> {
        match self {
            RadialProfile::Gaussian { width } | RadialProfile::SechBump { width } => vec![*width],
            RadialProfile::Ring { width, .. } => vec![*width],
            RadialProfile::GaussianMix { terms } => terms.iter().map(|t| t.1).collect(),
        }
    }

    fn eval(&self, r: f64) -> f64 {
        use std::f64::consts::PI;
        match self {
            RadialProfile::Gaussian { width } => (-PI * r * r / (width * width)).exp(),
            RadialProfile::SechBump { width } => 1.0 / (r / width).cosh(),
            RadialProfile::Ring { radius, width } => {
                (-(r - radius).powi(2) / (2.0 * width * width)).exp()
            }
            RadialProfile::GaussianMix { terms } => terms
                .iter()
                .map(|(a, w)| a * (-PI * r * r / (w * w)).exp())
                .sum(),
        }
    }
}

/// Samples a radial profile; widths below four grid spacings are rejected.
pub fn radial_profile(grid: Grid, profile: &RadialProfile) -> Result<Field> {
    let widths = profile.widths();
    if widths.is_empty() {
        return Err(LabError::InvalidProfile("empty gaussian mix".into()));
    }
    if let RadialProfile::Ring { radius, .. } = profile {
        if !(*radius > 0.0) {
            return Err(LabError::InvalidProfile(format!(
                "ring radius must be positive, got {radius}"
            )));
        }
    }
    for w in widths {
        if !(w > 0.0) || !w.is_finite() {
            return Err(LabError::InvalidProfile(format!(
                "width must be positive, got {w}"
            )));
        }
        if w < 4.0 * grid.dx() {
            return Err(LabError::InvalidProfile(format!(
                "width {w} under-resolved: needs >= 4 dx = {}",
                4.0 * grid.dx()
            )));
        }
    }
    let values = (0..grid.len())
        .map(|i| Complex64::new(profile.eval(grid.radius(i)), 0.0))
        .collect();
    Field::new(grid, values, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn grid_arithmetic() {
        let g = Grid::new(1, 16.0, 256).unwrap();
        assert_eq!(g.dx(), 0.125);
        assert_eq!(g.dxi(), 1.0 / 32.0);
        let xi: Vec<f64> = (0..256).map(|i| g.frequency(i)[0]).collect();
        let lo = xi.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xi.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        // M/2 lattice steps of 1/(2L) on either side: Nyquist 1/(2 dx) = 4
        assert_eq!(lo, -4.0);
        assert_eq!(hi, 3.96875);

        let g2 = Grid::new(2, 8.0, 128).unwrap();
        assert_eq!(g2.dx(), 0.125);
        assert_eq!(g2.len(), 128 * 128);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(matches!(
            Grid::new(2, 8.0, 127),
            Err(LabError::InvalidGrid(_))
        ));
        assert!(Grid::new(2, 0.0, 128).is_err());
        assert!(Grid::new(2, -1.0, 128).is_err());
        assert!(Grid::new(4, 8.0, 128).is_err());
        assert!(Grid::new(0, 8.0, 128).is_err());
        assert!(Grid::new(2, 8.0, 96).is_err());
        assert!(Grid::new(2, 8.0, 4).is_err());
    }

    #[test]
    fn constant_field_has_all_mass_at_zero_frequency() {
        let g = Grid::new(2, 4.0, 32).unwrap();
        let f = Field::from_fn(g, |_| Complex64::new(1.0, 0.0));
        let s = forward_transform(&f);
        let dc = s.at(&[0, 0]);
        // int_{[-L,L)^2} 1 dx = (2L)^2
        assert!((dc - Complex64::new(64.0, 0.0)).norm() < 1e-12);
        let rest: f64 = s
            .values()
            .iter()
            .skip(1)
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(rest < 1e-12);
    }

    #[test]
    fn plane_wave_is_a_single_bin() {
        let g = Grid::new(2, 4.0, 32).unwrap();
        let k = [3i64, -2];
        let xi0 = [k[0] as f64 * g.dxi(), k[1] as f64 * g.dxi()];
        let f = Field::from_fn(g, |x| {
            Complex64::from_polar(1.0, 2.0 * PI * (xi0[0] * x[0] + xi0[1] * x[1]))
        });
        let s = forward_transform(&f);
        let peak = s.at(&k);
        assert!((peak.norm() - 64.0).abs() < 1e-10);
        let others = s
            .values()
            .iter()
            .filter(|z| z.norm() < 1.0)
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(others < 1e-11);
        assert_eq!(s.values().iter().filter(|z| z.norm() > 1.0).count(), 1);

        // inverse of a single bin is the plane wave
        let back = inverse_transform(&s);
        assert!(back.relative_l2_distance(&f).unwrap() < 1e-13);
    }

    #[test]
    fn gaussian_transform_matches_closed_form() {
        let g = Grid::new(2, 8.0, 128).unwrap();
        let f = radial_profile(g, &RadialProfile::Gaussian { width: 1.0 }).unwrap();
        let s = forward_transform(&f);
        let err = (0..g.len())
            .map(|i| {
                let xi2 = g.frequency_norm(i).powi(2);
                (s.values()[i] - Complex64::new((-PI * xi2).exp(), 0.0)).norm()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "gaussian transform error {err}");
    }

    #[test]
    fn zero_spectrum_inverts_to_zero() {
        let g = Grid::new(1, 4.0, 16).unwrap();
        let s = Spectrum::from_values(g, vec![Complex64::new(0.0, 0.0); 16], 0.0).unwrap();
        assert_eq!(inverse_transform(&s).max_abs(), 0.0);
    }

    #[test]
    fn radial_profiles_are_lattice_symmetric() {
        let g = Grid::new(2, 8.0, 128).unwrap();
        for p in [
            RadialProfile::Gaussian { width: 1.0 },
            RadialProfile::Ring {
                radius: 2.0,
                width: 0.5,
            },
            RadialProfile::SechBump { width: 1.0 },
        ] {
            let f = radial_profile(g, &p).unwrap();
            assert!(f.symmetry_defect() <= 1e-13, "{p:?}");
        }
        let g3 = Grid::new(3, 4.0, 16).unwrap();
        let f = radial_profile(g3, &RadialProfile::Gaussian { width: 2.0 }).unwrap();
        assert!(f.symmetry_defect() <= 1e-13);
    }

    #[test]
    fn ring_profile_matches_formula() {
        let g = Grid::new(2, 8.0, 128).unwrap();
        let f = radial_profile(
            g,
            &RadialProfile::Ring {
                radius: 2.0,
                width: 0.5,
            },
        )
        .unwrap();
        for i in [0usize, 17, 8256, 9000] {
            let r = g.radius(i);
            let expect = (-(r - 2.0).powi(2) / 0.5).exp();
            assert!((f.values()[i].re - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn under_resolved_profile_is_rejected() {
        let g = Grid::new(2, 8.0, 64).unwrap();
        // dx = 0.25, so widths below 1.0 are rejected
        assert!(matches!(
            radial_profile(g, &RadialProfile::Gaussian { width: 0.9 }),
            Err(LabError::InvalidProfile(_))
        ));
        assert!(radial_profile(g, &RadialProfile::Gaussian { width: 1.0 }).is_ok());
        assert!(radial_profile(g, &RadialProfile::Gaussian { width: -1.0 }).is_err());
    }
}
