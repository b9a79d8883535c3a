//! Sharp radial frequency cutoff splitting data into an `L^2` part and a
//! small modulation-space part.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::grid::Field;
use crate::modulation::{ModNormSpec, ModulationPartition};

#[derive(Debug, Clone, Serialize)]
pub struct SplitResult {
    #[serde(skip)]
    pub v: Field,
    #[serde(skip)]
    pub w: Field,
    pub n_param: f64,
    /// `(1/2 - 1/p) / (1/p - 1/r)`.
    pub gamma: f64,
    pub p: f64,
    pub r: f64,
    /// `||u||_{M^{p,p'}}`.
    pub data_norm: f64,
    /// `||u||_{M^{p,p'}} / N`.
    pub target: f64,
    pub measured_v_norm: f64,
    pub measured_w_norm: f64,
    pub cutoff: f64,
}

/// `v = F^{-1}[1_{|xi| <= R} u^]`, `w = u - v`. A radius at or beyond the band
/// edge keeps every mode in `v`.
pub fn split_at_radius(u: &Field, radius: f64) -> (Field, Field) {
    let g = *u.grid();
    if radius >= g.band_edge() {
        return (u.clone(), Field::zeros(g).with_time(u.time()));
    }
    let mut raw = u.raw_spectrum();
    let mut high = vec![Complex64::new(0.0, 0.0); raw.len()];
    for (i, z) in raw.iter_mut().enumerate() {
        if g.frequency_norm(i) > radius {
            high[i] = *z;
            *z = Complex64::new(0.0, 0.0);
        }
    }
    (
        Field::from_raw_spectrum(g, raw, u.time()),
        Field::from_raw_spectrum(g, high, u.time()),
    )
}

/// Distinct lattice radii strictly inside the band edge, ascending.
fn lattice_radii(u: &Field) -> Vec<f64> {
    let g = u.grid();
    let edge = g.band_edge();
    let mut r: Vec<f64> = (0..g.len())
        .map(|i| g.frequency_norm(i))
        .filter(|&x| x < edge)
        .collect();
    r.sort_by(f64::total_cmp);
    r.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.max(1.0));
    r
}

/// Splits `u` with the smallest lattice radius `R` for which
/// `||w||_{M^{r,r'}} <= ||u||_{M^{p,p'}} / N` (bisection over the sorted radii).
pub fn split_data(
    u: &Field,
    p: f64,
    r: f64,
    n_param: f64,
    part: &ModulationPartition,
) -> Result<SplitResult> {
    if !(2.0 < p && p < r) {
        return Err(LabError::InvalidParameter(format!(
            "splitting needs 2 < p < r, got p = {p}, r = {r}"
        )));
    }
    if !(n_param > 1.0 && n_param.is_finite()) {
        return Err(LabError::InvalidParameter(format!(
            "splitting parameter N must exceed 1, got {n_param}"
        )));
    }
    part.grid().ensure_same(u.grid())?;
    let data_norm = part.mod_norm(u, ModNormSpec::dual_pair(p)?)?;
    if data_norm == 0.0 {
        return Err(LabError::ZeroNorm("datum to split".into()));
    }
    let target = data_norm / n_param;
    let w_spec = ModNormSpec::dual_pair(r)?;
    let w_norm = |radius: f64| -> Result<(f64, Field, Field)> {
        let (v, w) = split_at_radius(u, radius);
        Ok((part.mod_norm(&w, w_spec)?, v, w))
    };
    let radii = lattice_radii(u);
    let last = *radii.last().expect("the zero frequency is always present");
    let (top, _, _) = w_norm(last)?;
    if top > target {
        return Err(LabError::CutoffBeyondBand {
            radius: u.grid().band_edge(),
            band: u.grid().band_edge(),
        });
    }
    let (mut lo, mut hi) = (0usize, radii.len() - 1);
    // invariant: radii[hi] meets the target; radii[lo] is below it unless lo == hi == 0
    let (zero_norm, _, _) = w_norm(radii[0])?;
    if zero_norm <= target {
        hi = 0;
    }
    while hi > lo + 1 {
        let mid = (lo + hi) / 2;
        if w_norm(radii[mid])?.0 <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let cutoff = radii[hi];
    let (measured_w_norm, v, w) = w_norm(cutoff)?;
    Ok(SplitResult {
        measured_v_norm: v.l2_norm(),
        v,
        w,
        n_param,
        gamma: (0.5 - 1.0 / p) / (1.0 / p - 1.0 / r),
        p,
        r,
        data_norm,
        target,
        measured_w_norm,
        cutoff,
    })
}
