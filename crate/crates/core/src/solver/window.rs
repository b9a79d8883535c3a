//! Local existence windows.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::nonlinearity::{EquationSpec, NonlinearityKind};
use crate::solver::exponents;

/// Which window formula produced a time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowRule {
    /// `min(1, C ||u0||^{-alpha/omega})`.
    Power,
    /// `min(1, C ||u0||^{-2/(1-theta)})`.
    Hartree,
    /// `min(1, C (||phi|| + ||psi||)^{-alpha/omega}, C ||psi||^{-alpha/(omega + alpha kappa)})`.
    PowerInteraction,
    /// `min(1, C (||phi|| + ||psi||)^{-2/(1-theta)}, C ||psi||^{-4/(2-theta)})`.
    HartreeInteraction,
}

impl WindowRule {
    pub fn single_for(spec: &EquationSpec) -> Self {
        match spec.kind {
            NonlinearityKind::Power { .. } => WindowRule::Power,
            NonlinearityKind::Hartree { .. } => WindowRule::Hartree,
        }
    }

    pub fn interaction_for(spec: &EquationSpec) -> Self {
        match spec.kind {
            NonlinearityKind::Power { .. } => WindowRule::PowerInteraction,
            NonlinearityKind::Hartree { .. } => WindowRule::HartreeInteraction,
        }
    }
}

/// Norms entering a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WindowInputs {
    /// Norm of the datum.
    Single { norm: f64 },
    /// `||phi||_{L^2}` and the modulation norm of the small part.
    Pair { phi: f64, psi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowCondition {
    pub name: String,
    pub exponent: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExistenceWindow {
    pub t: f64,
    pub rule: WindowRule,
    pub constant: f64,
    pub inputs: WindowInputs,
    /// Every bound entering the minimum (the cap `1` included).
    pub conditions: Vec<WindowCondition>,
}

impl ExistenceWindow {
    /// Whether a given time satisfies every condition.
    pub fn admits(&self, t: f64) -> bool {
        self.conditions.iter().all(|c| t <= c.value * (1.0 + 1e-12))
    }
}

fn bound(c: f64, norm: f64, exponent: f64) -> f64 {
    // a vanishing norm removes the constraint; the cap at 1 remains
    if norm == 0.0 {
        f64::INFINITY
    } else {
        c * norm.powf(exponent)
    }
}

pub fn existence_window(
    spec: &EquationSpec,
    rule: WindowRule,
    inputs: WindowInputs,
    constant: f64,
) -> Result<ExistenceWindow> {
    spec.validate()?;
    if !(constant > 0.0 && constant.is_finite()) {
        return Err(LabError::InvalidParameter(format!(
            "window constant must be positive, got {constant}"
        )));
    }
    let n = spec.n as f64;
    let beta = spec.beta();
    let (alpha, theta) = match spec.kind {
        NonlinearityKind::Power { alpha } => (Some(alpha), None),
        NonlinearityKind::Hartree { nu } => (None, Some(nu / beta)),
    };
    let matches_kind = matches!(
        (rule, spec.kind),
        (
            WindowRule::Power | WindowRule::PowerInteraction,
            NonlinearityKind::Power { .. }
        ) | (
            WindowRule::Hartree | WindowRule::HartreeInteraction,
            NonlinearityKind::Hartree { .. }
        )
    );
    if !matches_kind {
        return Err(LabError::InvalidParameter(format!(
            "window rule {rule:?} does not match the nonlinearity"
        )));
    }
    let main_exponent = match (alpha, theta) {
        (Some(a), _) => {
            let om = exponents::omega(n, beta, a);
            if om <= 0.0 {
                return Err(LabError::HypothesisViolation(format!(
                    "omega = 1 - n alpha / (2 beta) = {om} <= 0; no local window (needs alpha < 2 beta / n)"
                )));
            }
            -a / om
        }
        (None, Some(t)) => {
            if t >= 1.0 {
                return Err(LabError::HypothesisViolation(format!(
                    "theta = nu / beta = {t} >= 1; no local window (needs nu < beta)"
                )));
            }
            -2.0 / (1.0 - t)
        }
        _ => unreachable!(),
    };

    let mut conditions = vec![WindowCondition {
        name: "cap".into(),
        exponent: 0.0,
        value: 1.0,
    }];
    match (rule, inputs) {
        (WindowRule::Power | WindowRule::Hartree, WindowInputs::Single { norm }) => {
            check_norm(norm)?;
            conditions.push(WindowCondition {
                name: "datum".into(),
                exponent: main_exponent,
                value: bound(constant, norm, main_exponent),
            });
        }
        (
            WindowRule::PowerInteraction | WindowRule::HartreeInteraction,
            WindowInputs::Pair { phi, psi },
        ) => {
            check_norm(phi)?;
            check_norm(psi)?;
            let small_exponent = match (alpha, theta) {
                (Some(a), _) => {
                    let om = exponents::omega(n, beta, a);
                    -a / (om + a * exponents::kappa(n, beta, a))
                }
                (None, Some(t)) => -4.0 / (2.0 - t),
                _ => unreachable!(),
            };
            conditions.push(WindowCondition {
                name: "sum".into(),
                exponent: main_exponent,
                value: bound(constant, phi + psi, main_exponent),
            });
            conditions.push(WindowCondition {
                name: "small-part".into(),
                exponent: small_exponent,
                value: bound(constant, psi, small_exponent),
            });
        }
        _ => {
            return Err(LabError::InvalidParameter(format!(
                "inputs {inputs:?} do not fit window rule {rule:?}"
            )))
        }
    }
    let t = conditions
        .iter()
        .map(|c| c.value)
        .fold(f64::INFINITY, f64::min);
    Ok(ExistenceWindow {
        t,
        rule,
        constant,
        inputs,
        conditions,
    })
}

fn check_norm(x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(LabError::InvalidParameter(format!(
            "norms must be finite and nonnegative, got {x}"
        )))
    }
}
