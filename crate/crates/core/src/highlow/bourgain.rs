//! The high-low iteration: split the datum, evolve the `L^2` part with the
//! conservation-law solver, absorb the interaction term into the next `L^2`
//! datum, and keep the ledger of every norm along the way.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::Field;
use crate::highlow::interaction::solve_interaction;
use crate::highlow::split::split_data;
use crate::modulation::{ModNormSpec, ModulationPartition, TransitionProfile};
use crate::nonlinearity::EquationSpec;
use crate::propagator::apply_propagator;
use crate::solver::exponents::{compute_exponents, Exponents};
use crate::solver::picard::{PicardConfig, PicardSolver};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BourgainConfig {
    /// Splitting parameter `N > 1`.
    pub n_param: f64,
    pub horizon: f64,
    /// Constant `C` in the step time `(3 C N^gamma)^{e}`.
    pub step_constant: f64,
    /// Constant in the local windows of the `L^2` and interaction solves.
    pub window_constant: f64,
    /// Constant of the reported growth bound.
    pub growth_constant: f64,
    pub max_steps: usize,
    pub picard: PicardConfig,
    pub transition: TransitionProfile,
    /// Compare the composed solution with a direct solve at every step.
    pub reconstruction_check: bool,
}

impl Default for BourgainConfig {
    fn default() -> Self {
        Self {
            n_param: 4.0,
            horizon: 0.5,
            step_constant: 1.0,
            window_constant: 1.0,
            growth_constant: 1.0,
            max_steps: 64,
            picard: PicardConfig::default(),
            transition: TransitionProfile::default(),
            reconstruction_check: true,
        }
    }
}

/// One step of the iteration. CSV column order follows the field order;
/// `reconstruction_error` is empty when the check is off.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerRow {
    pub step: usize,
    /// `k T`.
    pub time: f64,
    /// `||phi_k||_{L^2}`.
    pub phi_l2: f64,
    /// `||w_{k-1}(k T)||_{L^2}` (zero at the first step).
    pub w_prev_l2: f64,
    /// `||U(k T) psi_0||_{M^{r,r'}}`.
    pub psi_mod: f64,
    /// Step time `T(N)`.
    pub window: f64,
    /// `||v_k(T)||_{L^2} - ||phi_k||_{L^2}` (conservation defect).
    pub v_norm_defect: f64,
    /// `sup_t ||w_k(t)||_{L^2}`.
    pub w_sup_l2: f64,
    /// `||w_k(T)||_{L^2}`.
    pub w_final_l2: f64,
    /// `||phi_{k+1}||_{L^2}`.
    pub phi_next_l2: f64,
    /// `||phi_{k+1}|| <= ||v_k(T)|| + sup ||w_k||`.
    pub step_chain_ok: bool,
    /// `||phi_{k+1}|| <= ||phi_0|| + sum_{i<=k} (sup ||w_i|| + |defect_i|)`.
    pub long_chain_ok: bool,
    /// Whether `T(N)` met every interaction window condition.
    pub conditions_ok: bool,
    pub v_iterations: usize,
    pub w_iterations: usize,
    pub w_max_ratio: f64,
    /// Relative `L^2` gap between `phi_{k+1} + U((k+1) T) psi_0` and a direct solve.
    pub reconstruction_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerSummary {
    pub n_param: f64,
    pub data_exponent: f64,
    pub target_exponent: f64,
    pub gamma: f64,
    /// `kappa` (power) or `theta / 4` (Hartree).
    pub decay_exponent: f64,
    pub step_time: f64,
    pub steps: usize,
    pub achieved_horizon: f64,
    pub requested_horizon: f64,
    pub horizon_exponent: f64,
    /// `N^{horizon_exponent}`.
    pub predicted_horizon_scale: f64,
    pub split_cutoff: f64,
    pub phi0_l2: f64,
    pub psi0_mod: f64,
    /// `||phi_K|| / (C (N^gamma + T^decay K / N))`.
    pub growth_ratio: f64,
    /// `max_k sup ||w_k|| N / T^decay`.
    pub increment_constant: f64,
    pub chain_ok: bool,
    pub all_conditions_ok: bool,
    pub max_reconstruction_error: Option<f64>,
    pub stop_reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationLedger {
    pub rows: Vec<LedgerRow>,
    pub summary: LedgerSummary,
    pub exponents: Exponents,
}

impl IterationLedger {
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(out);
        for row in &self.rows {
            w.serialize(row).map_err(|e| LabError::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| LabError::Io(e.to_string()))
    }
}

/// Step time `(3 C N^gamma)^{-alpha/omega}` resp. `(3 C N^gamma~)^{-2/(1-theta)}`.
pub fn step_time(exps: &Exponents, n_param: f64, constant: f64) -> f64 {
    (3.0 * constant * n_param.powf(exps.gamma)).powf(exps.window_exponent())
}

pub fn bourgain_iterate(
    u0: &Field,
    spec: EquationSpec,
    data_exponent: f64,
    cfg: &BourgainConfig,
) -> Result<IterationLedger> {
    let grid = *u0.grid();
    let exps = compute_exponents(&spec, data_exponent)?;
    if !(cfg.horizon > 0.0) || cfg.max_steps == 0 {
        return Err(LabError::InvalidParameter(
            "horizon must be positive and max_steps >= 1".into(),
        ));
    }
    let part = ModulationPartition::build(grid, cfg.transition)?;
    let r = exps.target_exponent;
    let split = split_data(u0, data_exponent, r, cfg.n_param, &part)?;
    let t = step_time(&exps, cfg.n_param, cfg.step_constant);
    let decay = exps.interaction_exponent();
    let solver = PicardSolver::new(grid, spec, cfg.picard)?;
    let mod_spec = ModNormSpec::dual_pair(r)?;

    let planned = ((cfg.horizon / t) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let steps = planned.min(cfg.max_steps);
    let mut stop_reason = if planned > cfg.max_steps {
        format!("step cap {} reached before the horizon", cfg.max_steps)
    } else {
        "horizon reached".to_string()
    };

    let psi0 = split.w.clone();
    let mut phi = split.v.clone();
    let phi0_l2 = phi.l2_norm();
    let mut direct = u0.clone();
    let mut rows = Vec::with_capacity(steps);
    let mut w_prev_l2 = 0.0;
    let mut long_budget = phi0_l2;
    for k in 0..steps {
        let psi_k = apply_propagator(&psi0, spec.beta, k as f64 * t);
        let psi_mod = part.mod_norm(&psi_k, mod_spec)?;
        let phi_l2 = phi.l2_norm();
        let v = solver.global_evolve(&phi, t, cfg.window_constant)?;
        let v_end = v.trajectory.last_field().expect("nonempty trajectory");
        let w =
            match solve_interaction(&solver, &v.trajectory, &psi_k, psi_mod, cfg.window_constant) {
                Ok(w) => w,
                Err(e @ (LabError::NonContraction { .. } | LabError::NonFinite(_))) => {
                    stop_reason = format!("interaction solve failed at step {k}: {e}");
                    break;
                }
                Err(e) => return Err(e),
            };
        let w_end = w.trajectory.last_field().expect("nonempty trajectory");
        let next = v_end.add(&w_end)?.with_time((k + 1) as f64 * t);
        let phi_next_l2 = next.l2_norm();
        let v_norm_defect = v_end.l2_norm() - phi_l2;
        let slack = 1e-12 * phi_next_l2.max(1.0);
        let step_chain_ok = phi_next_l2 <= v_end.l2_norm() + w.sup_l2 + slack;
        long_budget += w.sup_l2 + v_norm_defect.abs();
        let long_chain_ok = phi_next_l2 <= long_budget + slack;

        let reconstruction_error = if cfg.reconstruction_check {
            direct = solver
                .global_evolve(&direct, t, cfg.window_constant)?
                .trajectory
                .last_field()
                .expect("nonempty trajectory");
            let composed = next.add(&apply_propagator(&psi0, spec.beta, (k + 1) as f64 * t))?;
            Some(composed.relative_l2_distance(&direct)?)
        } else {
            None
        };
        let v_iterations = v.logs.iter().map(|l| l.iterations).sum();
        rows.push(LedgerRow {
            step: k,
            time: k as f64 * t,
            phi_l2,
            w_prev_l2,
            psi_mod,
            window: t,
            v_norm_defect,
            w_sup_l2: w.sup_l2,
            w_final_l2: w.final_l2,
            phi_next_l2,
            step_chain_ok,
            long_chain_ok,
            conditions_ok: w.window_ok,
            v_iterations,
            w_iterations: w.log.iterations,
            w_max_ratio: w.log.max_ratio(),
            reconstruction_error,
        });
        w_prev_l2 = w.final_l2;
        phi = next;
    }

    let done = rows.len();
    let last_phi = rows.last().map_or(phi0_l2, |r| r.phi_next_l2);
    let growth_bound = cfg.growth_constant
        * (cfg.n_param.powf(exps.gamma) + t.powf(decay) * done as f64 / cfg.n_param);
    let summary = LedgerSummary {
        n_param: cfg.n_param,
        data_exponent,
        target_exponent: r,
        gamma: exps.gamma,
        decay_exponent: decay,
        step_time: t,
        steps: done,
        achieved_horizon: done as f64 * t,
        requested_horizon: cfg.horizon,
        horizon_exponent: exps.horizon_exponent,
        predicted_horizon_scale: cfg.n_param.powf(exps.horizon_exponent),
        split_cutoff: split.cutoff,
        phi0_l2,
        psi0_mod: split.measured_w_norm,
        growth_ratio: last_phi / growth_bound,
        increment_constant: rows
            .iter()
            .map(|r| r.w_sup_l2 * cfg.n_param / t.powf(decay))
            .fold(0.0, f64::max),
        chain_ok: rows.iter().all(|r| r.step_chain_ok && r.long_chain_ok),
        all_conditions_ok: rows.iter().all(|r| r.conditions_ok),
        max_reconstruction_error: rows
            .iter()
            .filter_map(|r| r.reconstruction_error)
            .reduce(f64::max),
        stop_reason,
    };
    Ok(IterationLedger {
        rows,
        summary,
        exponents: exps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{radial_profile, Grid, RadialProfile};

    fn datum() -> Field {
        let g = Grid::new(2, 8.0, 128).unwrap();
        radial_profile(
            g,
            &RadialProfile::GaussianMix {
                terms: vec![(1.0, 1.5), (0.5, 1.0)],
            },
        )
        .unwrap()
    }

    #[test]
    fn linear_dynamics_give_a_trivial_ledger() {
        let spec = EquationSpec::power(2, 1.5, 1.0, 1.0)
            .unwrap()
            .with_coupling(0.0);
        let cfg = BourgainConfig {
            horizon: 0.1,
            step_constant: 0.75,
            ..Default::default()
        };
        let ledger = bourgain_iterate(&datum(), spec, 2.2, &cfg).unwrap();
        let phi0 = ledger.summary.phi0_l2;
        assert!(ledger.rows.len() >= 5);
        for row in &ledger.rows {
            assert_eq!(row.w_sup_l2, 0.0);
            assert!((row.phi_l2 - phi0).abs() <= 1e-12 * phi0);
            assert!(row.reconstruction_error.unwrap() < 1e-12);
        }
        assert!(ledger.summary.chain_ok);
        let times: Vec<f64> = ledger.rows.iter().map(|r| r.time).collect();
        assert!(times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn short_nonlinear_run_reconstructs() {
        let spec = EquationSpec::power(2, 1.5, 1.0, 1.0).unwrap();
        let cfg = BourgainConfig {
            horizon: 0.05,
            step_constant: 0.75,
            ..Default::default()
        };
        let ledger = bourgain_iterate(&datum(), spec, 2.2, &cfg).unwrap();
        assert!(ledger.summary.chain_ok);
        assert!(ledger.summary.max_reconstruction_error.unwrap() < 1e-5);
        let mut csv = Vec::new();
        ledger.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("step,time,phi_l2,w_prev_l2,psi_mod,window"));
        assert_eq!(text.lines().count(), ledger.rows.len() + 1);
    }

    #[test]
    fn step_time_formula() {
        let spec = EquationSpec::power(2, 1.5, 1.0, 1.0).unwrap();
        let e = compute_exponents(&spec, 2.2).unwrap();
        let expect = (3.0 * 4f64.powf(0.375)).powf(-3.0);
        assert!((step_time(&e, 4.0, 1.0) - expect).abs() < 1e-15);
    }
}
