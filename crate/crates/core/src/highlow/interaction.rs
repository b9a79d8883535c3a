//! The interaction term `w` between the evolved `L^2` part and the free flow
//! of the small part:
//! `w = i int U(t - s) [N(v + U psi + w) - N(v + U psi)] ds
//!    + i int U(t - s) [N(v + U psi) - N(v)] ds`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::grid::Field;
use crate::solver::picard::{
    auxiliary_exponents, ContractionLog, DuhamelMesh, IterationMode, PicardSolver,
};
use crate::solver::trajectory::Trajectory;
use crate::solver::window::{existence_window, ExistenceWindow, WindowInputs, WindowRule};

#[derive(Debug, Clone, Serialize)]
pub struct InteractionSolution {
    #[serde(skip)]
    pub trajectory: Trajectory,
    pub log: ContractionLog,
    pub window: ExistenceWindow,
    /// Whether the solve time satisfies every window condition.
    pub window_ok: bool,
    pub span: f64,
    pub final_l2: f64,
    /// `sup_t ||w(t)||_{L^2}`.
    pub sup_l2: f64,
}

/// Solves for `w` on the mesh of `v_traj` (uniform, odd number of nodes) with
/// `w = 0` as the first iterate. `psi` is the small part at the start time and
/// `psi_norm` its modulation norm, used for the window conditions.
pub fn solve_interaction(
    solver: &PicardSolver,
    v_traj: &Trajectory,
    psi: &Field,
    psi_norm: f64,
    constant: f64,
) -> Result<InteractionSolution> {
    let grid = *solver.grid();
    grid.ensure_same(v_traj.grid())?;
    grid.ensure_same(psi.grid())?;
    let times = v_traj.times();
    if times.len() < 3 || times.len() % 2 == 0 {
        return Err(LabError::Insufficient(format!(
            "interaction solve needs an odd number (>= 3) of mesh nodes, got {}",
            times.len()
        )));
    }
    let span = times[times.len() - 1] - times[0];
    let sub = times.len() - 1;
    let h = span / sub as f64;
    if times
        .windows(2)
        .any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1e-300))
    {
        return Err(LabError::InvalidParameter(
            "interaction solve needs a uniform mesh".into(),
        ));
    }
    let spec = solver.spec();
    let window = existence_window(
        spec,
        WindowRule::interaction_for(spec),
        WindowInputs::Pair {
            phi: v_traj.field(0).l2_norm(),
            psi: psi_norm,
        },
        constant,
    )?;
    let window_ok = window.admits(span);

    let mesh = DuhamelMesh::new(solver.propagator(), span, sub)?;
    let free_psi = mesh.free(&psi.raw_spectrum());
    let nl = solver.nonlinearity();
    let zero = vec![Complex64::new(0.0, 0.0); grid.len()];
    let lifted: Vec<Vec<Complex64>> = (0..mesh.nodes())
        .map(|j| {
            v_traj
                .snapshot(j)
                .iter()
                .zip(&free_psi[j])
                .map(|(a, b)| a + b)
                .collect()
        })
        .collect();
    // second Duhamel term does not depend on w
    let source: Vec<Vec<Complex64>> = (0..mesh.nodes())
        .map(|j| nl.difference(v_traj.snapshot(j), &free_psi[j], &zero))
        .collect();
    let context = format!(
        "interaction window conditions violated numerically: T = {span:.6e}, ||phi||_L2 = {:.6e}, ||psi||_M = {psi_norm:.6e}",
        v_traj.field(0).l2_norm()
    );
    let (phys, log) = mesh.iterate(
        None,
        |j, w| {
            let mut f = nl.difference(&lifted[j], w, &zero);
            f.iter_mut().zip(&source[j]).for_each(|(a, b)| *a += b);
            f
        },
        solver.config(),
        auxiliary_exponents(spec),
        IterationMode::Strict,
        &context,
    )?;
    let traj = Trajectory::from_parts(grid, times.to_vec(), phys)?;
    let final_l2 = traj.field(traj.len() - 1).l2_norm();
    let sup_l2 = traj.sup_l2();
    Ok(InteractionSolution {
        trajectory: traj,
        log,
        window,
        window_ok,
        span,
        final_l2,
        sup_l2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{radial_profile, Grid, RadialProfile};
    use crate::nonlinearity::EquationSpec;
    use crate::propagator::apply_propagator;
    use crate::solver::picard::PicardConfig;

    fn grid() -> Grid {
        Grid::new(2, 8.0, 64).unwrap()
    }

    fn gauss(w: f64, a: f64) -> Field {
        radial_profile(grid(), &RadialProfile::Gaussian { width: w })
            .unwrap()
            .scaled(Complex64::new(a, 0.0))
    }

    #[test]
    fn zero_small_part_gives_zero() {
        for spec in [
            EquationSpec::power(2, 1.5, 1.0, 1.0).unwrap(),
            EquationSpec::hartree(2, 1.5, 1.0, 1.0).unwrap(),
        ] {
            let solver = PicardSolver::new(grid(), spec, PicardConfig::default()).unwrap();
            let v = solver.solve(&gauss(2.0, 1.0), 0.1).unwrap().trajectory;
            let sol = solve_interaction(&solver, &v, &Field::zeros(grid()), 0.0, 1.0).unwrap();
            assert!(sol
                .trajectory
                .snapshots()
                .iter()
                .all(|s| s.iter().all(|z| z.re == 0.0 && z.im == 0.0)));
            assert_eq!(sol.final_l2, 0.0);
        }
    }

    #[test]
    fn zero_low_part_matches_full_solver() {
        let spec = EquationSpec::power(2, 1.5, 1.0, 1.0).unwrap();
        let cfg = PicardConfig {
            tol: 1e-12,
            ..Default::default()
        };
        let solver = PicardSolver::new(grid(), spec, cfg).unwrap();
        let psi = gauss(1.5, 0.5);
        let t = 0.2;
        let zero_v = solver.solve(&Field::zeros(grid()), t).unwrap().trajectory;
        let w = solve_interaction(&solver, &zero_v, &psi, 0.1, 1.0).unwrap();
        let full = solver
            .solve(&psi, t)
            .unwrap()
            .trajectory
            .last_field()
            .unwrap();
        let composed = apply_propagator(&psi, spec.beta, t)
            .add(&w.trajectory.last_field().unwrap())
            .unwrap();
        assert!(composed.relative_l2_distance(&full).unwrap() <= 1e-7);
    }
}
