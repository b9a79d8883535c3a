//! Admissible exponent pairs and empirical Strichartz constants.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{LabError, Result};
use crate::grid::{radial_profile, Field, Grid, RadialProfile};
use crate::modulation::conjugate_exponent;
use crate::propagator::{Dispersion, Propagator};
use crate::solver::trajectory::{spacetime_norm, Trajectory};

/// Radiality tolerance for the fractional estimates.
const RADIAL_TOL: f64 = 1e-8;

fn exponent<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*x)
    }
}

/// `(q, r)` with `beta / q = n (1/2 - 1/r)`, `q, r >= 2`, `(q, r, n) != (inf, 2, 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissiblePair {
    #[serde(serialize_with = "exponent")]
    pub q: f64,
    pub r: f64,
    pub beta: f64,
    pub n: usize,
}

impl AdmissiblePair {
    pub fn new(q: f64, r: f64, beta: f64, n: usize) -> Result<Self> {
        let pair = Self { q, r, beta, n };
        match admissible_q(r, beta, n) {
            Some(expect) if (expect.is_infinite() && q.is_infinite()) || (q - expect).abs() <= 1e-12 * expect => Ok(pair),
            Some(expect) => Err(LabError::Inadmissible(format!(
                "(q, r) = ({q}, {r}) with n = {n}, beta = {beta}: the relation forces q = {expect}"
            ))),
            None => Err(LabError::Inadmissible(format!(
                "no admissible q for r = {r}, n = {n}, beta = {beta} (q < 2 or the excluded endpoint (inf, 2, 2))"
            ))),
        }
    }

    pub fn from_r(r: f64, beta: f64, n: usize) -> Result<Self> {
        let q = admissible_q(r, beta, n).ok_or_else(|| {
            LabError::Inadmissible(format!(
                "no admissible q for r = {r}, n = {n}, beta = {beta}"
            ))
        })?;
        Ok(Self { q, r, beta, n })
    }

    /// `beta / q - n (1/2 - 1/r)`.
    pub fn defect(&self) -> f64 {
        self.beta / self.q - self.n as f64 * (0.5 - 1.0 / self.r)
    }

    pub fn dual(&self) -> (f64, f64) {
        (conjugate_exponent(self.q), conjugate_exponent(self.r))
    }
}

/// Solves `beta / q = n (1/2 - 1/r)` for `q`; `None` when `q < 2`, `r < 2`, or
/// the triple is the excluded `(inf, 2, 2)`.
pub fn admissible_q(r: f64, beta: f64, n: usize) -> Option<f64> {
    if !(r >= 2.0) || !(beta > 0.0) || n == 0 {
        return None;
    }
    let rhs = n as f64 * (0.5 - 1.0 / r);
    if rhs == 0.0 {
        return if n == 2 { None } else { Some(f64::INFINITY) };
    }
    let q = beta / rhs;
    (q >= 2.0).then_some(q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrichartzSetup {
    pub horizon: f64,
    /// Number of time steps; the norm uses `snapshots + 1` equally spaced samples.
    pub snapshots: usize,
}

impl StrichartzSetup {
    fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite())
            || self.snapshots < 2
            || self.snapshots % 2 == 1
        {
            return Err(LabError::InvalidParameter(format!(
                "Strichartz setup needs T > 0 and an even snapshot count >= 2, got T = {}, S = {}",
                self.horizon, self.snapshots
            )));
        }
        Ok(())
    }

    fn times(&self) -> Vec<f64> {
        (0..=self.snapshots)
            .map(|j| self.horizon * j as f64 / self.snapshots as f64)
            .collect()
    }

    fn refined(&self) -> Self {
        Self {
            horizon: self.horizon,
            snapshots: 2 * self.snapshots,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrichartzStats {
    pub pair: AdmissiblePair,
    pub beta: f64,
    pub n: usize,
    pub max_ratio: f64,
    /// `|max_ratio(2M, 2S) / max_ratio(M, S) - 1|`.
    pub refinement_drift: f64,
    pub refined_max_ratio: f64,
    pub ratios: Vec<f64>,
    pub max_quadrature_error: f64,
}

fn ensure_radial(f: &Field, beta: f64) -> Result<()> {
    if beta != 2.0 && f.symmetry_defect() > RADIAL_TOL {
        return Err(LabError::HypothesisViolation(format!(
            "fractional Strichartz estimates need radial data (beta = {beta}); symmetry defect {:.3e}",
            f.symmetry_defect()
        )));
    }
    Ok(())
}

fn free_trajectory(prop: &Propagator, u0: &Field, times: &[f64]) -> Result<Trajectory> {
    let raw = u0.raw_spectrum();
    let snaps = times
        .iter()
        .map(|&t| {
            let mut s = raw.clone();
            prop.evolve_raw(&mut s, t);
            Field::from_raw_spectrum(*u0.grid(), s, t).into_values()
        })
        .collect();
    Trajectory::from_parts(*u0.grid(), times.to_vec(), snaps)
}

/// `||U(.) u0||_{L^q_T L^r} / ||u0||_{L^2}` for each datum, with the
/// quadrature error estimate of each norm.
pub fn strichartz_ratios(
    family: &[Field],
    pair: AdmissiblePair,
    setup: StrichartzSetup,
) -> Result<Vec<(f64, f64)>> {
    setup.validate()?;
    let beta = Dispersion::new(pair.beta)?;
    let times = setup.times();
    family
        .par_iter()
        .map(|u0| {
            if u0.grid().dims() != pair.n {
                return Err(LabError::InvalidParameter(format!(
                    "pair is for n = {}, datum lives in n = {}",
                    pair.n,
                    u0.grid().dims()
                )));
            }
            ensure_radial(u0, pair.beta)?;
            let norm = u0.l2_norm();
            if norm == 0.0 {
                return Err(LabError::ZeroNorm("Strichartz datum".into()));
            }
            let prop = Propagator::new(*u0.grid(), beta);
            let traj = free_trajectory(&prop, u0, &times)?;
            let st = spacetime_norm(&traj, pair.q, pair.r, setup.horizon)?;
            Ok((st.value / norm, st.quadrature_error / norm))
        })
        .collect()
}

fn summarize(
    pair: AdmissiblePair,
    coarse: Vec<(f64, f64)>,
    fine: Vec<(f64, f64)>,
) -> StrichartzStats {
    let max = |v: &[(f64, f64)]| v.iter().map(|x| x.0).fold(0.0, f64::max);
    let max_ratio = max(&coarse);
    let refined_max_ratio = max(&fine);
    StrichartzStats {
        pair,
        beta: pair.beta,
        n: pair.n,
        max_ratio,
        refinement_drift: (refined_max_ratio / max_ratio - 1.0).abs(),
        refined_max_ratio,
        max_quadrature_error: coarse.iter().map(|x| x.1).fold(0.0, f64::max),
        ratios: coarse.into_iter().map(|x| x.0).collect(),
    }
}

/// Empirical homogeneous Strichartz constant over a radial family, together
/// with its drift when both the grid resolution and the snapshot count double.
pub fn strichartz_constant(
    grid: Grid,
    family: &[RadialProfile],
    pair: AdmissiblePair,
    setup: StrichartzSetup,
) -> Result<StrichartzStats> {
    if family.is_empty() {
        return Err(LabError::Insufficient("empty Strichartz family".into()));
    }
    let fine_grid = Grid::new(grid.dims(), grid.half_extent(), 2 * grid.points())?;
    let sample =
        |g: Grid| -> Result<Vec<Field>> { family.iter().map(|p| radial_profile(g, p)).collect() };
    let coarse = strichartz_ratios(&sample(grid)?, pair, setup)?;
    let fine = strichartz_ratios(&sample(fine_grid)?, pair, setup.refined())?;
    Ok(summarize(pair, coarse, fine))
}

/// `int_0^t U(t - s) g ds` for time-independent `g`, evaluated exactly:
/// `(1 - e^{-i w t}) / (i w) g^` (and `t g^` where `w = 0`).
pub fn duhamel_of_constant(prop: &Propagator, g: &Field, t: f64) -> Result<Field> {
    prop.grid().ensure_same(g.grid())?;
    let mut raw = g.raw_spectrum();
    for (z, &w) in raw.iter_mut().zip(prop.dispersion_relation()) {
        let factor = if w * t.abs() < 1e-8 {
            // series keeps full precision for tiny w t
            Complex64::new(t, -0.5 * w * t * t)
        } else {
            (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -w * t)) / Complex64::new(0.0, w)
        };
        *z *= factor;
    }
    Ok(Field::from_raw_spectrum(*g.grid(), raw, t))
}

/// Retarded estimate for constant-in-time forcing:
/// `||int_0^t U(t-s) g ds||_{L^{q1}_T L^{r1}} / (T^{1/q2'} ||g||_{L^{r2'}})`.
pub fn retarded_ratios(
    family: &[Field],
    out_pair: AdmissiblePair,
    in_pair: AdmissiblePair,
    setup: StrichartzSetup,
) -> Result<Vec<(f64, f64)>> {
    setup.validate()?;
    if out_pair.beta != in_pair.beta || out_pair.n != in_pair.n {
        return Err(LabError::InvalidParameter(
            "retarded estimate pairs must share beta and n".into(),
        ));
    }
    let beta = Dispersion::new(out_pair.beta)?;
    let (q2d, r2d) = in_pair.dual();
    let times = setup.times();
    family
        .par_iter()
        .map(|g| {
            ensure_radial(g, out_pair.beta)?;
            let forcing = setup.horizon.powf(1.0 / q2d) * g.lp_norm(r2d);
            if forcing == 0.0 {
                return Err(LabError::ZeroNorm("retarded forcing".into()));
            }
            let prop = Propagator::new(*g.grid(), beta);
            let snaps = times
                .iter()
                .map(|&t| duhamel_of_constant(&prop, g, t).map(Field::into_values))
                .collect::<Result<Vec<_>>>()?;
            let traj = Trajectory::from_parts(*g.grid(), times.clone(), snaps)?;
            let st = spacetime_norm(&traj, out_pair.q, out_pair.r, setup.horizon)?;
            Ok((st.value / forcing, st.quadrature_error / forcing))
        })
        .collect()
}

/// Retarded analogue of [`strichartz_constant`].
pub fn retarded_constant(
    grid: Grid,
    family: &[RadialProfile],
    out_pair: AdmissiblePair,
    in_pair: AdmissiblePair,
    setup: StrichartzSetup,
) -> Result<StrichartzStats> {
    if family.is_empty() {
        return Err(LabError::Insufficient("empty Strichartz family".into()));
    }
    let fine_grid = Grid::new(grid.dims(), grid.half_extent(), 2 * grid.points())?;
    let sample =
        |g: Grid| -> Result<Vec<Field>> { family.iter().map(|p| radial_profile(g, p)).collect() };
    let coarse = retarded_ratios(&sample(grid)?, out_pair, in_pair, setup)?;
    let fine = retarded_ratios(&sample(fine_grid)?, out_pair, in_pair, setup.refined())?;
    Ok(summarize(out_pair, coarse, fine))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{gaussian_family, random_field};

    #[test]
    fn admissible_q_examples() {
        assert_eq!(admissible_q(4.0, 1.5, 2), Some(3.0));
        assert_eq!(admissible_q(2.0, 1.5, 2), None);
        assert_eq!(admissible_q(2.0, 1.5, 3), Some(f64::INFINITY));
        assert_eq!(admissible_q(2.0, 2.0, 1), Some(f64::INFINITY));
        // q would be below 2
        assert_eq!(admissible_q(100.0, 1.0, 3), None);
        assert_eq!(admissible_q(1.5, 1.0, 3), None);
    }

    #[test]
    fn pair_validation() {
        assert!(AdmissiblePair::new(3.0, 4.0, 1.5, 2).is_ok());
        assert!(matches!(
            AdmissiblePair::new(4.0, 4.0, 1.5, 2),
            Err(LabError::Inadmissible(_))
        ));
        assert!(matches!(
            AdmissiblePair::new(f64::INFINITY, 2.0, 1.5, 2),
            Err(LabError::Inadmissible(_))
        ));
        let p = AdmissiblePair::from_r(2.0, 1.5, 3).unwrap();
        assert!(p.q.is_infinite() && p.defect() == 0.0);
        let json = serde_json::to_string(&p).unwrap();
        assert!(json.contains("\"q\":\"inf\""));
    }

    #[test]
    fn energy_pair_is_an_isometry() {
        let g = Grid::new(3, 8.0, 32).unwrap();
        let pair = AdmissiblePair::from_r(2.0, 1.5, 3).unwrap();
        let fam: Vec<Field> = gaussian_family(3, 2.0, 4.0)
            .iter()
            .map(|p| radial_profile(g, p).unwrap())
            .collect();
        let setup = StrichartzSetup {
            horizon: 1.0,
            snapshots: 8,
        };
        for (ratio, _) in strichartz_ratios(&fam, pair, setup).unwrap() {
            assert!((ratio - 1.0).abs() < 1e-12, "{ratio}");
        }
    }

    #[test]
    fn fractional_estimate_rejects_non_radial_data() {
        let g = Grid::new(2, 8.0, 64).unwrap();
        let pair = AdmissiblePair::from_r(4.0, 1.5, 2).unwrap();
        let f = random_field(g, 3, 1.0);
        let setup = StrichartzSetup {
            horizon: 0.5,
            snapshots: 8,
        };
        assert!(matches!(
            strichartz_ratios(&[f.clone()], pair, setup),
            Err(LabError::HypothesisViolation(_))
        ));
        // beta = 2 carries no radial hypothesis
        let pair2 = AdmissiblePair::from_r(4.0, 2.0, 2).unwrap();
        let r = strichartz_ratios(&[f], pair2, setup).unwrap();
        assert!(r[0].0.is_finite() && r[0].0 > 0.0);
    }

    #[test]
    fn duhamel_of_constant_solves_the_forced_equation() {
        // d/dt D = -i w D + g, checked by a centered difference in time
        let g = Grid::new(2, 8.0, 64).unwrap();
        let prop = Propagator::new(g, Dispersion::new(1.5).unwrap());
        let f = radial_profile(g, &RadialProfile::Gaussian { width: 2.0 }).unwrap();
        let (t, h) = (0.3, 1e-4);
        let d = |s| duhamel_of_constant(&prop, &f, s).unwrap();
        let deriv = d(t + h)
            .sub(&d(t - h))
            .unwrap()
            .scaled(Complex64::new(0.5 / h, 0.0));
        let w = d(t);
        let lhs = deriv.sub(&f).unwrap();
        let rhs = w.apply_symbol(|i| Complex64::new(0.0, -prop.dispersion_relation()[i]));
        assert!(lhs.relative_l2_distance(&rhs).unwrap() < 1e-6);
        assert_eq!(d(0.0).max_abs(), 0.0);
    }
}
