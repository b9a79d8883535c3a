//! Power and Hartree nonlinearities, the Riesz potential as a Fourier
//! multiplier, and the difference forms `G` and `G~`.
//!
//! Sign convention: the evolution is `i u_t - (-Delta)^{beta/2} u + N(u) = 0`
//! with `N(u) = sign * coupling * F(u)`, so the Duhamel form reads
//! `u = U(t) u0 + i int_0^t U(t - s) N(u(s)) ds`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::{Field, Grid};
use crate::propagator::Dispersion;
use crate::sampling::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NonlinearityKind {
    Power { alpha: f64 },
    Hartree { nu: f64 },
}

/// A concrete equation instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquationSpec {
    pub kind: NonlinearityKind,
    /// `+1` or `-1`.
    pub sign: f64,
    /// Multiplies the nonlinearity; `0` gives the free evolution.
    pub coupling: f64,
    pub beta: Dispersion,
    pub n: usize,
}

impl EquationSpec {
    pub fn power(n: usize, beta: f64, alpha: f64, sign: f64) -> Result<Self> {
        let spec = Self {
            kind: NonlinearityKind::Power { alpha },
            sign,
            coupling: 1.0,
            beta: Dispersion::new(beta)?,
            n,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn hartree(n: usize, beta: f64, nu: f64, sign: f64) -> Result<Self> {
        let spec = Self {
            kind: NonlinearityKind::Hartree { nu },
            sign,
            coupling: 1.0,
            beta: Dispersion::new(beta)?,
            n,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_coupling(mut self, coupling: f64) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn beta(&self) -> f64 {
        self.beta.value()
    }

    pub fn is_linear(&self) -> bool {
        self.coupling == 0.0
    }

    /// Requirements of the raw evaluators.
    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.n) {
            return Err(LabError::InvalidParameter(format!(
                "dimension {} outside {{1, 2, 3}}",
                self.n
            )));
        }
        if self.sign != 1.0 && self.sign != -1.0 {
            return Err(LabError::InvalidParameter(format!(
                "sign must be +1 or -1, got {}",
                self.sign
            )));
        }
        if !self.coupling.is_finite() {
            return Err(LabError::InvalidParameter("coupling must be finite".into()));
        }
        Dispersion::new(self.beta())?;
        match self.kind {
            NonlinearityKind::Power { alpha } if !(alpha.is_finite() && alpha > 0.0) => {
                Err(LabError::InvalidParameter(format!(
                    "power exponent alpha = {alpha} must be positive"
                )))
            }
            NonlinearityKind::Hartree { nu } if !(nu > 0.0 && nu < self.n as f64) => {
                Err(LabError::InvalidParameter(format!(
                    "Riesz exponent nu = {nu} must lie in (0, n) = (0, {})",
                    self.n
                )))
            }
            _ => Ok(()),
        }
    }

    /// Violated hypotheses of the local and global existence theory, each
    /// phrased as the failing inequality. Empty when the instance is in scope.
    pub fn hypothesis_violations(&self) -> Vec<String> {
        let n = self.n as f64;
        let b = self.beta();
        let mut out = Vec::new();
        match self.kind {
            NonlinearityKind::Power { alpha } => {
                if alpha >= 2.0 * b / n {
                    out.push(format!(
                        "alpha = {alpha} >= 2 beta / n = {} (local theory needs alpha < 2 beta / n)",
                        2.0 * b / n
                    ));
                }
            }
            NonlinearityKind::Hartree { nu } => {
                if nu >= b.min(n) {
                    out.push(format!(
                        "nu = {nu} >= min(beta, n) = {} (Hartree local theory needs nu < min(beta, n))",
                        b.min(n)
                    ));
                }
            }
        }
        let lo = 2.0 * n / (2.0 * n - 1.0);
        if !(b > lo && b < 2.0) {
            out.push(format!(
                "beta = {b} outside (2n/(2n-1), 2) = ({lo}, 2) required by the radial Strichartz estimates"
            ));
        }
        out
    }

    pub fn check_hypotheses(&self) -> Result<()> {
        let v = self.hypothesis_violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(LabError::HypothesisViolation(v.join("; ")))
        }
    }
}

/// `sign * |u|^alpha u` pointwise.
pub fn power_nl(u: &Field, alpha: f64, sign: f64) -> Field {
    u.map(|z| power_point(z, alpha) * sign)
}

#[inline]
fn power_point(z: Complex64, alpha: f64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        z * r.powf(alpha)
    }
}

/// `c_{n,nu} = pi^{nu - n/2} Gamma((n - nu)/2) / Gamma(nu/2)`, the constant
/// with `F[|x|^{-nu}](xi) = c_{n,nu} |xi|^{nu - n}`.
pub fn riesz_constant(n: usize, nu: f64) -> f64 {
    let n = n as f64;
    std::f64::consts::PI.powf(nu - n / 2.0) * libm::tgamma((n - nu) / 2.0) / libm::tgamma(nu / 2.0)
}

/// Precomputed Riesz multiplier `c_{n,nu} |xi|^{nu-n}` with the `xi = 0` bin
/// set to zero (the torus surrogate: the mean of the input is discarded).
#[derive(Debug, Clone)]
pub struct RieszKernel {
    grid: Grid,
    nu: f64,
    symbol: Vec<f64>,
}

impl RieszKernel {
    pub fn new(grid: Grid, nu: f64) -> Result<Self> {
        let n = grid.dims();
        if !(nu > 0.0 && nu < n as f64) {
            return Err(LabError::InvalidParameter(format!(
                "Riesz exponent nu = {nu} must lie in (0, n) = (0, {n})"
            )));
        }
        let c = riesz_constant(n, nu);
        let symbol = grid
            .frequency_norms()
            .into_iter()
            .map(|r| {
                if r == 0.0 {
                    0.0
                } else {
                    c * r.powf(nu - n as f64)
                }
            })
            .collect();
        Ok(Self { grid, nu, symbol })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    /// Riesz potential of a real density given as samples.
    pub fn potential(&self, density: &[f64]) -> Vec<f64> {
        let mut data: Vec<Complex64> = density.iter().map(|&d| Complex64::new(d, 0.0)).collect();
        let (m, n) = (self.grid.points(), self.grid.dims());
        crate::fft::forward_raw(&mut data, m, n);
        data.iter_mut()
            .zip(&self.symbol)
            .for_each(|(z, &s)| *z *= s);
        crate::fft::inverse_raw(&mut data, m, n);
        data.into_iter().map(|z| z.re).collect()
    }

    pub fn convolve(&self, g: &Field) -> Result<Field> {
        self.grid.ensure_same(g.grid())?;
        let mut raw = g.raw_spectrum();
        raw.iter_mut().zip(&self.symbol).for_each(|(z, &s)| *z *= s);
        Ok(Field::from_raw_spectrum(self.grid, raw, g.time()))
    }

    /// `V = |x|^{-nu} * |u|^2` sampled on the grid.
    pub fn hartree_potential(&self, u: &[Complex64]) -> Vec<f64> {
        let density: Vec<f64> = u.iter().map(|z| z.norm_sqr()).collect();
        self.potential(&density)
    }
}

/// `|x|^{-nu} * g`.
pub fn riesz_convolve(g: &Field, nu: f64) -> Result<Field> {
    RieszKernel::new(*g.grid(), nu)?.convolve(g)
}

/// `(|x|^{-nu} * |u|^2) u`.
pub fn hartree_nl(u: &Field, nu: f64) -> Result<Field> {
    let kernel = RieszKernel::new(*u.grid(), nu)?;
    let v = kernel.hartree_potential(u.values());
    let values = u.values().iter().zip(&v).map(|(z, &p)| z * p).collect();
    Field::new(*u.grid(), values, u.time())
}

/// `G(u, v, w) = |u + v|^alpha (u + v) - |u + w|^alpha (u + w)`.
pub fn g_diff(u: &Field, v: &Field, w: &Field, alpha: f64) -> Result<Field> {
    u.grid().ensure_same(v.grid())?;
    u.grid().ensure_same(w.grid())?;
    let values = u
        .values()
        .iter()
        .zip(v.values())
        .zip(w.values())
        .map(|((&a, &b), &c)| g_point(a, b, c, alpha))
        .collect();
    Field::new(*u.grid(), values, u.time())
}

#[inline]
pub fn g_point(u: Complex64, v: Complex64, w: Complex64, alpha: f64) -> Complex64 {
    if v == w {
        return Complex64::new(0.0, 0.0);
    }
    let (z1, z2) = (u + v, u + w);
    let (r1, r2) = (z1.norm(), z2.norm());
    if r1 == 0.0 || r2 == 0.0 {
        return power_point(z1, alpha) - power_point(z2, alpha);
    }
    // z1|z1|^a - z2|z2|^a = (v - w)|z1|^a + z2 (|z1|^a - |z2|^a), with the
    // modulus difference formed from v - w so nearby arguments do not cancel
    let d = v - w;
    let dr = (d * (z1 + z2).conj()).re / (r1 + r2);
    // far apart there is no cancellation, and dr / r2 may round below -1
    let dpow = if dr.abs() <= 0.5 * r2 {
        r2.powf(alpha) * (alpha * (dr / r2).ln_1p()).exp_m1()
    } else {
        r1.powf(alpha) - r2.powf(alpha)
    };
    d * r1.powf(alpha) + z2 * dpow
}

/// `G~(v, w1, w2)` through the split
/// `(I(|u1|^2)) (u1 - u2) + (I(|u1|^2 - |u2|^2)) u2` with `u_i = v + w_i`.
pub fn hartree_difference(v: &Field, w1: &Field, w2: &Field, nu: f64) -> Result<Field> {
    v.grid().ensure_same(w1.grid())?;
    v.grid().ensure_same(w2.grid())?;
    let kernel = RieszKernel::new(*v.grid(), nu)?;
    let u1 = v.add(w1)?;
    let u2 = v.add(w2)?;
    let pot1 = kernel.hartree_potential(u1.values());
    let diff_density: Vec<f64> = u1
        .values()
        .iter()
        .zip(u2.values())
        .map(|(a, b)| a.norm_sqr() - b.norm_sqr())
        .collect();
    let pot_diff = kernel.potential(&diff_density);
    let values = (0..v.grid().len())
        .map(|i| {
            let (a, b) = (u1.values()[i], u2.values()[i]);
            (a - b) * pot1[i] + b * pot_diff[i]
        })
        .collect();
    Field::new(*v.grid(), values, v.time())
}

/// `G~` by two direct Hartree evaluations.
pub fn hartree_difference_direct(v: &Field, w1: &Field, w2: &Field, nu: f64) -> Result<Field> {
    hartree_nl(&v.add(w1)?, nu)?.sub(&hartree_nl(&v.add(w2)?, nu)?)
}

/// Grid-bound evaluator of `N(u) = sign * coupling * F(u)` and of the exact
/// nonlinear substep `u -> u exp(i h N(u)/u)`.
#[derive(Debug, Clone)]
pub struct Nonlinearity {
    spec: EquationSpec,
    kernel: Option<RieszKernel>,
}

impl Nonlinearity {
    pub fn new(grid: Grid, spec: EquationSpec) -> Result<Self> {
        spec.validate()?;
        if spec.n != grid.dims() {
            return Err(LabError::GridMismatch(format!(
                "equation dimension {} differs from grid dimension {}",
                spec.n,
                grid.dims()
            )));
        }
        let kernel = match spec.kind {
            NonlinearityKind::Hartree { nu } => Some(RieszKernel::new(grid, nu)?),
            NonlinearityKind::Power { .. } => None,
        };
        Ok(Self { spec, kernel })
    }

    pub fn spec(&self) -> &EquationSpec {
        &self.spec
    }

    /// Real multiplier `m(u)` with `N(u) = m(u) u` pointwise.
    pub fn multiplier(&self, u: &[Complex64]) -> Vec<f64> {
        let c = self.spec.sign * self.spec.coupling;
        match (&self.kernel, self.spec.kind) {
            (Some(k), _) => k.hartree_potential(u).into_iter().map(|v| c * v).collect(),
            (None, NonlinearityKind::Power { alpha }) => {
                u.iter().map(|z| c * z.norm().powf(alpha)).collect()
            }
            (None, NonlinearityKind::Hartree { .. }) => unreachable!("kernel built for Hartree"),
        }
    }

    pub fn eval(&self, u: &[Complex64]) -> Vec<Complex64> {
        if self.spec.is_linear() {
            return vec![Complex64::new(0.0, 0.0); u.len()];
        }
        self.multiplier(u)
            .into_iter()
            .zip(u)
            .map(|(m, z)| z * m)
            .collect()
    }

    /// `N(a + b) - N(a + c)` (the forms `G` and `G~` scaled by sign and coupling).
    pub fn difference(&self, a: &[Complex64], b: &[Complex64], c: &[Complex64]) -> Vec<Complex64> {
        let len = a.len();
        if self.spec.is_linear() {
            return vec![Complex64::new(0.0, 0.0); len];
        }
        let scale = self.spec.sign * self.spec.coupling;
        match self.spec.kind {
            NonlinearityKind::Power { alpha } => (0..len)
                .map(|i| g_point(a[i], b[i], c[i], alpha) * scale)
                .collect(),
            NonlinearityKind::Hartree { .. } => {
                let k = self.kernel.as_ref().expect("kernel built for Hartree");
                let u1: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                let u2: Vec<Complex64> = a.iter().zip(c).map(|(x, y)| x + y).collect();
                let pot1 = k.hartree_potential(&u1);
                let dd: Vec<f64> = u1
                    .iter()
                    .zip(&u2)
                    .map(|(x, y)| x.norm_sqr() - y.norm_sqr())
                    .collect();
                let pd = k.potential(&dd);
                (0..len)
                    .map(|i| ((u1[i] - u2[i]) * pot1[i] + u2[i] * pd[i]) * scale)
                    .collect()
            }
        }
    }

    /// Exact flow of `i u_t + N(u) = 0` over time `h`; `|u|` is invariant so
    /// the multiplier is frozen.
    pub fn phase_step(&self, u: &mut [Complex64], h: f64) {
        if self.spec.is_linear() {
            return;
        }
        let m = self.multiplier(u);
        u.iter_mut()
            .zip(m)
            .for_each(|(z, v)| *z *= Complex64::from_polar(1.0, h * v));
    }
}

/// `(p, q)` with `1/p + nu/n - 1 = 1/q`.
pub fn hls_target_exponent(n: usize, nu: f64, p: f64) -> Result<f64> {
    let inv_q = 1.0 / p + nu / n as f64 - 1.0;
    if !(p > 1.0 && inv_q > 0.0) {
        return Err(LabError::InvalidParameter(format!(
            "no Hardy-Littlewood-Sobolev target for p = {p}, nu = {nu}, n = {n}"
        )));
    }
    Ok(1.0 / inv_q)
}

/// `||I_nu g||_{L^q} / ||g||_{L^p}`.
pub fn hls_ratio(g: &Field, nu: f64, p: f64) -> Result<f64> {
    let q = hls_target_exponent(g.grid().dims(), nu, p)?;
    let denom = g.lp_norm(p);
    if denom == 0.0 {
        return Err(LabError::ZeroNorm("HLS sample".into()));
    }
    Ok(riesz_convolve(g, nu)?.lp_norm(q) / denom)
}

/// Upper bound `(alpha + 1) max(1, 3^{alpha - 1})` for
/// `|G(u,v,w)| / ((|u|^a + |v|^a + |w|^a) |v - w|)`.
pub fn difference_bound(alpha: f64) -> f64 {
    (alpha + 1.0) * 1f64.max(3f64.powf(alpha - 1.0))
}

/// Largest observed `|G(u,v,w)| / ((|u|^a + |v|^a + |w|^a) |v - w|)` over
/// random complex triples with magnitudes spread over six decades.
pub fn difference_constant_monte_carlo(alpha: f64, samples: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let draw = |r: &mut rand_chacha::ChaCha8Rng| {
        let scale = 10f64.powf(r.random_range(-3.0..3.0));
        let re: f64 = r.sample(StandardNormal);
        let im: f64 = r.sample(StandardNormal);
        Complex64::new(re, im) * scale
    };
    let mut worst = 0.0f64;
    for i in 0..samples {
        let u = draw(&mut r);
        let v = draw(&mut r);
        // every fourth triple probes nearly equal v, w
        let w = if i % 4 == 0 {
            v + draw(&mut r) * 1e-6
        } else {
            draw(&mut r)
        };
        let d = (v - w).norm();
        if d == 0.0 {
            continue;
        }
        let denom = (u.norm().powf(alpha) + v.norm().powf(alpha) + w.norm().powf(alpha)) * d;
        worst = worst.max(g_point(u, v, w, alpha).norm() / denom);
    }
    worst
}
