//! Scaling exponents, admissible ranges and horizon exponents.

use serde::Serialize;

use crate::error::Result;
use crate::nonlinearity::{EquationSpec, NonlinearityKind};

/// `omega = 1 - n alpha / (2 beta)`.
pub fn omega(n: f64, beta: f64, alpha: f64) -> f64 {
    1.0 - n * alpha / (2.0 * beta)
}

/// `kappa = n alpha / (2 beta (alpha + 2))`.
pub fn kappa(n: f64, beta: f64, alpha: f64) -> f64 {
    n * alpha / (2.0 * beta * (alpha + 2.0))
}

/// Interpolation exponent between `L^2` and `M^{alpha+2, (alpha+2)'}`:
/// `(1/2 - 1/p) / (1/p - 1/(alpha + 2))`.
pub fn gamma_power(p: f64, alpha: f64) -> f64 {
    (0.5 - 1.0 / p) / (1.0 / p - 1.0 / (alpha + 2.0))
}

/// Hartree analogue `(1/2 - 1/s) / (1/s - (2n - nu)/(4n))`.
pub fn gamma_hartree(s: f64, n: f64, nu: f64) -> f64 {
    (0.5 - 1.0 / s) / (1.0 / s - (2.0 * n - nu) / (4.0 * n))
}

/// `alpha (1 - kappa) - omega`, whose sign selects the branch of `p_max`.
pub fn case_value(n: f64, beta: f64, alpha: f64) -> f64 {
    alpha * (1.0 - kappa(n, beta, alpha)) - omega(n, beta, alpha)
}

pub fn p_max(n: f64, beta: f64, alpha: f64) -> f64 {
    if case_value(n, beta, alpha) > 0.0 {
        2.0 + 2.0 / (alpha + 1.0) - n * alpha / (beta * (alpha + 1.0))
    } else {
        alpha + 2.0
    }
}

pub fn s_max(n: f64, beta: f64, nu: f64) -> f64 {
    2.0 * n * (4.0 * beta - nu) / (n * (4.0 * beta - nu) - nu * (beta - nu))
}

/// Upper limit on `gamma` keeping the power horizon exponent positive
/// (`+inf` when the case value is not positive).
pub fn gamma_bound_power(n: f64, beta: f64, alpha: f64) -> f64 {
    let c = case_value(n, beta, alpha);
    if c > 0.0 {
        omega(n, beta, alpha) / c
    } else {
        f64::INFINITY
    }
}

/// Upper limit on `gamma~` keeping the Hartree horizon exponent positive.
pub fn gamma_bound_hartree(beta: f64, nu: f64) -> f64 {
    let theta = nu / beta;
    2.0 * (1.0 - theta) / (2.0 + theta)
}

/// `1 - gamma (-1 + alpha (1 - kappa) / omega)`.
pub fn horizon_exponent_power(n: f64, beta: f64, alpha: f64, gamma: f64) -> f64 {
    1.0 - gamma * (-1.0 + alpha * (1.0 - kappa(n, beta, alpha)) / omega(n, beta, alpha))
}

/// `1 - gamma~ (2 + theta) / (2 (1 - theta))`.
pub fn horizon_exponent_hartree(beta: f64, nu: f64, gamma: f64) -> f64 {
    let theta = nu / beta;
    1.0 - gamma * (2.0 + theta) / (2.0 * (1.0 - theta))
}

/// All exponents attached to an equation and a data exponent (`p` for the
/// power case, `s` for Hartree).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exponents {
    pub n: usize,
    pub beta: f64,
    pub data_exponent: f64,
    pub alpha: Option<f64>,
    pub nu: Option<f64>,
    pub omega: Option<f64>,
    pub kappa: Option<f64>,
    pub theta: Option<f64>,
    pub case_value: Option<f64>,
    pub p_max: Option<f64>,
    pub s_max: Option<f64>,
    /// `gamma(p)` or `gamma~(s)`.
    pub gamma: f64,
    pub gamma_bound: f64,
    pub horizon_exponent: f64,
    pub critical_index: f64,
    /// `p` in `(2, p_max)` resp. `s` in `(2, s_max)`.
    pub in_range: bool,
    /// Exponent of the modulation space holding the small part:
    /// `alpha + 2` or `4n / (2n - nu)`.
    pub target_exponent: f64,
    pub violations: Vec<String>,
}

impl Exponents {
    /// Time-decay exponent of the interaction term: `kappa` or `theta / 4`.
    pub fn interaction_exponent(&self) -> f64 {
        match (self.kappa, self.theta) {
            (Some(k), _) => k,
            (None, Some(t)) => t / 4.0,
            _ => unreachable!("one of kappa, theta is always set"),
        }
    }

    /// Exponent of the local window in the data norm: `-alpha/omega` or `-2/(1-theta)`.
    pub fn window_exponent(&self) -> f64 {
        match (self.alpha, self.omega, self.theta) {
            (Some(a), Some(w), _) => -a / w,
            (None, _, Some(t)) => -2.0 / (1.0 - t),
            _ => unreachable!("one branch is always set"),
        }
    }
}

pub fn compute_exponents(spec: &EquationSpec, data_exponent: f64) -> Result<Exponents> {
    spec.validate()?;
    let n = spec.n as f64;
    let beta = spec.beta();
    let mut violations = spec.hypothesis_violations();
    let e = match spec.kind {
        NonlinearityKind::Power { alpha } => {
            let om = omega(n, beta, alpha);
            let pm = p_max(n, beta, alpha);
            let in_range = data_exponent > 2.0 && data_exponent < pm;
            if !in_range {
                violations.push(format!(
                    "p = {data_exponent} outside (2, p_max) = (2, {pm})"
                ));
            }
            let gamma = gamma_power(data_exponent, alpha);
            Exponents {
                n: spec.n,
                beta,
                data_exponent,
                alpha: Some(alpha),
                nu: None,
                omega: Some(om),
                kappa: Some(kappa(n, beta, alpha)),
                theta: None,
                case_value: Some(case_value(n, beta, alpha)),
                p_max: Some(pm),
                s_max: None,
                gamma,
                gamma_bound: gamma_bound_power(n, beta, alpha),
                horizon_exponent: horizon_exponent_power(n, beta, alpha, gamma),
                critical_index: n / 2.0 - beta / alpha,
                in_range,
                target_exponent: alpha + 2.0,
                violations,
            }
        }
        NonlinearityKind::Hartree { nu } => {
            let sm = s_max(n, beta, nu);
            let in_range = data_exponent > 2.0 && data_exponent < sm;
            if !in_range {
                violations.push(format!(
                    "s = {data_exponent} outside (2, s_max) = (2, {sm})"
                ));
            }
            let gamma = gamma_hartree(data_exponent, n, nu);
            Exponents {
                n: spec.n,
                beta,
                data_exponent,
                alpha: None,
                nu: Some(nu),
                omega: None,
                kappa: None,
                theta: Some(nu / beta),
                case_value: None,
                p_max: None,
                s_max: Some(sm),
                gamma,
                gamma_bound: gamma_bound_hartree(beta, nu),
                horizon_exponent: horizon_exponent_hartree(beta, nu, gamma),
                critical_index: (nu - beta) / 2.0,
                in_range,
                target_exponent: 4.0 * n / (2.0 * n - nu),
                violations,
            }
        }
    };
    Ok(e)
}

/// Case split and consistency of the admissible data range.
#[derive(Debug, Clone, Serialize)]
pub struct GammaRangeReport {
    pub gamma: f64,
    pub gamma_bound: f64,
    pub case_value: Option<f64>,
    pub horizon_exponent: f64,
    pub horizon_positive: bool,
    pub data_exponent: f64,
    pub data_exponent_max: f64,
    pub below_max: bool,
    /// `data_exponent < max` agrees with `horizon_exponent > 0`.
    pub consistent: bool,
}

pub fn check_gamma_range(spec: &EquationSpec, data_exponent: f64) -> Result<GammaRangeReport> {
    let e = compute_exponents(spec, data_exponent)?;
    let max = e.p_max.or(e.s_max).expect("one maximum is always set");
    let horizon_positive = e.horizon_exponent > 0.0;
    let below_max = data_exponent < max;
    Ok(GammaRangeReport {
        gamma: e.gamma,
        gamma_bound: e.gamma_bound,
        case_value: e.case_value,
        horizon_exponent: e.horizon_exponent,
        horizon_positive,
        data_exponent,
        data_exponent_max: max,
        below_max,
        consistent: horizon_positive == below_max,
    })
}
