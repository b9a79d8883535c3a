//! The fractional Schrödinger group `U_beta(t) = exp(-i t (-Delta)^{beta/2})`,
//! realized exactly as the Fourier multiplier `exp(-i (2 pi |xi|)^beta t)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::{Field, Grid};
use crate::modulation::{ModNormSpec, ModulationPartition};

/// Dispersion order `beta > 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dispersion(f64);

impl Dispersion {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.5) {
            return Err(LabError::InvalidParameter(format!(
                "dispersion order beta = {beta} must exceed 1/2"
            )));
        }
        Ok(Self(beta))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Precomputed dispersion relation `(2 pi |xi|)^beta` on a grid.
///
/// The symbol at `xi = 0` is `0`; no regularization is applied there.
#[derive(Debug, Clone)]
pub struct Propagator {
    grid: Grid,
    beta: Dispersion,
    omega: Vec<f64>,
}

impl Propagator {
    pub fn new(grid: Grid, beta: Dispersion) -> Self {
        let b = beta.value();
        let omega = grid
            .frequency_norms()
            .into_iter()
            .map(|r| (2.0 * std::f64::consts::PI * r).powf(b))
            .collect();
        Self { grid, beta, omega }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn beta(&self) -> Dispersion {
        self.beta
    }

    /// `(2 pi |xi|)^beta` in FFT order.
    pub fn dispersion_relation(&self) -> &[f64] {
        &self.omega
    }

    /// Multiplies an unnormalized FFT-ordered spectrum by `exp(-i omega t)`.
    pub fn evolve_raw(&self, raw: &mut [Complex64], t: f64) {
        if t == 0.0 {
            return;
        }
        raw.iter_mut()
            .zip(&self.omega)
            .for_each(|(z, &w)| *z *= Complex64::from_polar(1.0, -w * t));
    }

    /// `U_beta(t) f`; the output time tag is advanced by `t`.
    pub fn apply(&self, f: &Field, t: f64) -> Result<Field> {
        self.grid.ensure_same(f.grid())?;
        if t == 0.0 {
            return Ok(f.clone());
        }
        let mut raw = f.raw_spectrum();
        self.evolve_raw(&mut raw, t);
        Ok(Field::from_raw_spectrum(self.grid, raw, f.time() + t))
    }
}

/// `U_beta(t) f` with a freshly computed multiplier.
pub fn apply_propagator(f: &Field, beta: Dispersion, t: f64) -> Field {
    Propagator::new(*f.grid(), beta)
        .apply(f, t)
        .expect("propagator built on the field's own grid")
}

/// `||U(t1) U(t2) f - U(t1 + t2) f|| / ||f||`.
pub fn group_property_check(f: &Field, beta: Dispersion, t1: f64, t2: f64) -> f64 {
    let prop = Propagator::new(*f.grid(), beta);
    let two_step = prop
        .apply(&prop.apply(f, t2).expect("same grid"), t1)
        .expect("same grid");
    let one_step = prop.apply(f, t1 + t2).expect("same grid");
    let norm = f.l2_norm();
    let diff = two_step.sub(&one_step).expect("same grid").l2_norm();
    if norm > 0.0 {
        diff / norm
    } else {
        diff
    }
}

/// Modulation-space growth ratio
/// `||U(t) f||_{M^{p,q}} / ((1 + |t|)^{n |1/p - 1/2|} ||f||_{M^{p,q}})`.
pub fn measure_modulation_bound(
    f: &Field,
    part: &ModulationPartition,
    beta: Dispersion,
    t: f64,
    spec: ModNormSpec,
) -> Result<f64> {
    let before = part.mod_norm(f, spec)?;
    if before == 0.0 {
        return Err(LabError::ZeroNorm("modulation norm of the input".into()));
    }
    let evolved = apply_propagator(f, beta, t);
    let after = part.mod_norm(&evolved, spec)?;
    let n = f.grid().dims() as f64;
    let growth = (1.0 + t.abs()).powf(n * (1.0 / spec.p - 0.5).abs());
    Ok(after / (growth * before))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{radial_profile, RadialProfile};
    use crate::sampling::random_field;
    use std::f64::consts::PI;

    fn beta(b: f64) -> Dispersion {
        Dispersion::new(b).unwrap()
    }

    #[test]
    fn dispersion_rejects_small_orders() {
        assert!(Dispersion::new(0.5).is_err());
        assert!(Dispersion::new(f64::NAN).is_err());
        assert!(Dispersion::new(0.51).is_ok());
    }

    #[test]
    fn zero_time_is_identity() {
        let g = Grid::new(2, 4.0, 32).unwrap();
        let f = random_field(g, 11, 2.0);
        let out = apply_propagator(&f, beta(1.5), 0.0);
        assert!(out.relative_l2_distance(&f).unwrap() <= 1e-12);
    }

    #[test]
    fn unitary_on_random_fields() {
        let g = Grid::new(2, 4.0, 32).unwrap();
        for seed in 0..10 {
            let f = random_field(g, seed, 3.0);
            let t = 0.37 * seed as f64 - 1.1;
            let out = apply_propagator(&f, beta(1.2 + 0.1 * seed as f64), t);
            let drift = (out.l2_norm() - f.l2_norm()).abs() / f.l2_norm();
            assert!(drift <= 1e-12, "drift {drift}");
            assert!((out.time() - t).abs() < 1e-15);
        }
    }

    #[test]
    fn free_schrodinger_gaussian_closed_form() {
        let g = Grid::new(2, 8.0, 128).unwrap();
        let f = radial_profile(g, &RadialProfile::Gaussian { width: 1.0 }).unwrap();
        let t = 0.1;
        let out = apply_propagator(&f, beta(2.0), t);
        // multiplier exp(-4 pi^2 i |xi|^2 t) on exp(-pi |xi|^2):
        // u(x, t) = (1 + 4 pi i t)^{-n/2} exp(-pi |x|^2 / (1 + 4 pi i t))
        let z = Complex64::new(1.0, 4.0 * PI * t);
        let err = (0..g.len())
            .map(|i| {
                let r2 = g.radius(i).powi(2);
                let exact = (-(PI * r2) / z).exp() / z;
                (out.values()[i] - exact).norm()
            })
            .fold(0.0, f64::max);
        assert!(err <= 1e-6, "closed-form mismatch {err}");
    }

    #[test]
    fn group_law() {
        let g = Grid::new(2, 4.0, 32).unwrap();
        let f = random_field(g, 5, 2.0);
        assert_eq!(group_property_check(&f, beta(1.5), 0.0, 0.0), 0.0);
        assert!(group_property_check(&f, beta(1.5), 0.3, -0.3) <= 1e-12);
        assert!(group_property_check(&f, beta(1.5), 0.1, 0.2) <= 1e-11);
    }

    #[test]
    fn radial_input_stays_radial() {
        let g = Grid::new(2, 8.0, 64).unwrap();
        let f = radial_profile(
            g,
            &RadialProfile::Ring {
                radius: 2.0,
                width: 1.0,
            },
        )
        .unwrap();
        let out = apply_propagator(&f, beta(1.5), 0.7);
        assert!(out.symmetry_defect() <= 1e-11);
    }
}
