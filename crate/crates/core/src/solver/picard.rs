//! Duhamel-Picard iteration in the interaction picture.
//!
//! With `a(t) = e^{i omega t} u^(t)` the Duhamel formula becomes
//! `a(t) = a(0) + i int_0^t e^{i omega s} N(u(s))^ ds`; the integrand is smooth
//! in `s` once the free oscillation is factored out, so a cumulative Simpson
//! rule on a uniform mesh is accurate. Iterates are stored as physical-space
//! snapshots at the mesh nodes.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fft;
use crate::grid::{lp_norm, Field, Grid};
use crate::nonlinearity::{EquationSpec, Nonlinearity, NonlinearityKind};
use crate::propagator::Propagator;
use crate::solver::exponents::{compute_exponents, kappa};
use crate::solver::trajectory::{spacetime_norm, Trajectory};
use crate::solver::window::{existence_window, ExistenceWindow, WindowInputs, WindowRule};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PicardConfig {
    /// Uniform subintervals per window; even (Simpson pairs them).
    pub subintervals: usize,
    /// Relative sup-in-time `L^2` update at which the iteration stops.
    pub tol: f64,
    pub max_iter: usize,
    /// Updates below this relative size are not used to measure ratios.
    pub noise_floor: f64,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            subintervals: 16,
            tol: 1e-10,
            max_iter: 60,
            noise_floor: 1e-12,
        }
    }
}

impl PicardConfig {
    pub fn validate(&self) -> Result<()> {
        if self.subintervals < 2 || self.subintervals % 2 == 1 {
            return Err(LabError::InvalidParameter(format!(
                "subintervals must be even and >= 2, got {}",
                self.subintervals
            )));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(LabError::InvalidParameter(
                "Picard tolerance must be positive and max_iter >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Per-iteration record of a fixed-point solve.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ContractionLog {
    /// `sup_j ||u^{m+1}(t_j) - u^m(t_j)||_{L^2} / sup_j ||u^{m+1}(t_j)||_{L^2}`.
    pub updates: Vec<f64>,
    /// `updates[m] / updates[m-1]`, recorded while both exceed the noise floor.
    pub ratios: Vec<f64>,
    /// Space-time norm `max(sup L^2, L^q_T L^r)` of each update.
    pub x_norms: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl ContractionLog {
    /// Largest measured contraction ratio (0 when none could be measured).
    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().cloned().fold(0.0, f64::max)
    }
}

/// Space-time exponents `(q, r)` of the auxiliary norm: `(1/kappa, alpha+2)`
/// for powers, `(4/theta, 4n/(2n - nu))` for Hartree.
pub fn auxiliary_exponents(spec: &EquationSpec) -> (f64, f64) {
    let n = spec.n as f64;
    let beta = spec.beta();
    match spec.kind {
        NonlinearityKind::Power { alpha } => (1.0 / kappa(n, beta, alpha), alpha + 2.0),
        NonlinearityKind::Hartree { nu } => (4.0 * beta / nu, 4.0 * n / (2.0 * n - nu)),
    }
}

/// Discrete `max(sup_t ||f||_{L^2}, ||f||_{L^q_T L^r})`.
pub fn auxiliary_norm(traj: &Trajectory, q: f64, r: f64) -> Result<f64> {
    let span = traj.times().last().copied().unwrap_or(0.0) - traj.times()[0];
    let st = spacetime_norm(traj, q, r, span)?;
    Ok(traj.sup_l2().max(st.value))
}

/// Uniform mesh with precomputed phase tables `e^{-i omega t_j}`.
#[derive(Debug, Clone)]
pub struct DuhamelMesh {
    grid: Grid,
    step: f64,
    times: Vec<f64>,
    phases: Vec<Vec<Complex64>>,
}

impl DuhamelMesh {
    pub fn new(prop: &Propagator, span: f64, subintervals: usize) -> Result<Self> {
        if !(span > 0.0 && span.is_finite()) {
            return Err(LabError::InvalidParameter(format!(
                "time span must be positive, got {span}"
            )));
        }
        if subintervals < 2 || subintervals % 2 == 1 {
            return Err(LabError::InvalidParameter(format!(
                "subintervals must be even and >= 2, got {subintervals}"
            )));
        }
        let step = span / subintervals as f64;
        let times: Vec<f64> = (0..=subintervals).map(|j| j as f64 * step).collect();
        let phases = times
            .iter()
            .map(|&t| {
                prop.dispersion_relation()
                    .iter()
                    .map(|&w| Complex64::from_polar(1.0, -w * t))
                    .collect()
            })
            .collect();
        Ok(Self {
            grid: *prop.grid(),
            step,
            times,
            phases,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn nodes(&self) -> usize {
        self.times.len()
    }

    pub fn span(&self) -> f64 {
        *self.times.last().expect("mesh has nodes")
    }

    /// Physical snapshots of the free evolution of a raw spectrum.
    pub fn free(&self, a0: &[Complex64]) -> Vec<Vec<Complex64>> {
        let zero = a0.iter().all(|z| *z == Complex64::new(0.0, 0.0));
        self.phases
            .par_iter()
            .map(|ph| {
                if zero {
                    return vec![Complex64::new(0.0, 0.0); a0.len()];
                }
                let mut d: Vec<Complex64> = a0.iter().zip(ph).map(|(a, p)| a * p).collect();
                fft::inverse_raw(&mut d, self.grid.points(), self.grid.dims());
                d
            })
            .collect()
    }

    /// Interaction-picture integrands `e^{i omega t_j} F(t_j)^`.
    fn integrands(&self, forcing: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        forcing
            .par_iter()
            .zip(&self.phases)
            .map(|(f, ph)| {
                let mut d = f.clone();
                fft::forward_raw(&mut d, self.grid.points(), self.grid.dims());
                d.iter_mut().zip(ph).for_each(|(z, p)| *z *= p.conj());
                d
            })
            .collect()
    }

    /// Cumulative Simpson integrals `int_0^{t_j} g`: composite Simpson at even
    /// nodes, plus a three-point partial interval at odd nodes.
    fn cumulative(&self, g: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        let len = g[0].len();
        let h = self.step;
        let mut out = vec![vec![Complex64::new(0.0, 0.0); len]; g.len()];
        for j in (2..g.len()).step_by(2) {
            let (head, rest) = out.split_at_mut(j - 1);
            let base = &head[j - 2];
            let (odd, even) = rest.split_at_mut(1);
            let (odd, even) = (&mut odd[0], &mut even[0]);
            for i in 0..len {
                let (g0, g1, g2) = (g[j - 2][i], g[j - 1][i], g[j][i]);
                odd[i] = base[i] + (g0 * 5.0 + g1 * 8.0 - g2) * (h / 12.0);
                even[i] = base[i] + (g0 + g1 * 4.0 + g2) * (h / 3.0);
            }
        }
        out
    }

    /// `a0 + i int_0^{t_j} g`, returned in physical space.
    fn assemble(
        &self,
        a0: Option<&[Complex64]>,
        integrals: Vec<Vec<Complex64>>,
    ) -> Vec<Vec<Complex64>> {
        integrals
            .into_par_iter()
            .zip(&self.phases)
            .map(|(mut d, ph)| {
                for (i, z) in d.iter_mut().enumerate() {
                    let a = a0.map_or(Complex64::new(0.0, 0.0), |a| a[i]);
                    *z = (a + Complex64::i() * *z) * ph[i];
                }
                fft::inverse_raw(&mut d, self.grid.points(), self.grid.dims());
                d
            })
            .collect()
    }

    /// `i int_0^{t_j} U(t_j - s) F(s) ds` for a prescribed forcing sampled at the nodes.
    pub fn duhamel(&self, forcing: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        let g = self.integrands(forcing);
        self.assemble(None, self.cumulative(&g))
    }

    /// Iterates `u <- U(t) u0 + i int U(t - s) F(j, u(s)) ds` from the free
    /// evolution (or from zero when `a0` is `None`).
    pub fn iterate(
        &self,
        a0: Option<&[Complex64]>,
        forcing: impl Fn(usize, &[Complex64]) -> Vec<Complex64> + Sync,
        cfg: &PicardConfig,
        aux: (f64, f64),
        mode: IterationMode,
        context: &str,
    ) -> Result<(Vec<Vec<Complex64>>, ContractionLog)> {
        let mut phys = match a0 {
            Some(a) => self.free(a),
            None => vec![vec![Complex64::new(0.0, 0.0); self.grid.len()]; self.nodes()],
        };
        let cell = self.grid.cell_volume();
        let mut log = ContractionLog::default();
        let mut streak = 0usize;
        for m in 1..=cfg.max_iter {
            let f: Vec<Vec<Complex64>> = phys
                .par_iter()
                .enumerate()
                .map(|(j, u)| forcing(j, u))
                .collect();
            let g = self.integrands(&f);
            let next = self.assemble(a0, self.cumulative(&g));
            let diffs: Vec<Vec<Complex64>> = next
                .iter()
                .zip(&phys)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
                .collect();
            let diff_sup = diffs
                .iter()
                .map(|d| lp_norm(d, 2.0, cell))
                .fold(0.0, f64::max);
            let scale = next
                .iter()
                .map(|d| lp_norm(d, 2.0, cell))
                .fold(0.0, f64::max);
            if !(diff_sup.is_finite() && scale.is_finite()) {
                return Err(LabError::NonFinite(format!(
                    "Picard iterate became non-finite at iteration {m} [{context}]"
                )));
            }
            let update = if scale > 0.0 { diff_sup / scale } else { 0.0 };
            let dtraj = Trajectory::from_parts(self.grid, self.times.clone(), diffs)?;
            log.x_norms.push(auxiliary_norm(&dtraj, aux.0, aux.1)?);
            if let Some(&prev) = log.updates.last() {
                if prev > cfg.noise_floor && update > cfg.noise_floor {
                    let ratio = update / prev;
                    log.ratios.push(ratio);
                    streak = if ratio >= 1.0 { streak + 1 } else { 0 };
                    if streak >= 3 && mode == IterationMode::Strict {
                        return Err(LabError::NonContraction {
                            ratio,
                            iteration: m,
                            context: context.to_string(),
                        });
                    }
                }
            }
            log.updates.push(update);
            log.iterations = m;
            phys = next;
            if update <= cfg.tol {
                log.converged = true;
                break;
            }
            if mode == IterationMode::Probe(m) {
                break;
            }
        }
        if !log.converged && mode == IterationMode::Strict {
            return Err(LabError::NonContraction {
                ratio: log.ratios.last().copied().unwrap_or(f64::NAN),
                iteration: log.iterations,
                context: format!(
                    "{context}; no convergence to tol {} within {} iterations",
                    cfg.tol, cfg.max_iter
                ),
            });
        }
        Ok((phys, log))
    }
}

/// How a fixed-point loop treats failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IterationMode {
    /// Abort on non-contraction and on missing convergence.
    Strict,
    /// Stop after the given number of iterations and report the log.
    Probe(usize),
}

/// Result of a single-window fixed-point solve.
#[derive(Debug, Clone)]
pub struct PicardSolution {
    pub trajectory: Trajectory,
    pub log: ContractionLog,
    pub window: f64,
}

/// Grid-bound fixed-point solver for one equation.
#[derive(Debug, Clone)]
pub struct PicardSolver {
    grid: Grid,
    spec: EquationSpec,
    prop: Propagator,
    nl: Nonlinearity,
    cfg: PicardConfig,
}

impl PicardSolver {
    pub fn new(grid: Grid, spec: EquationSpec, cfg: PicardConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            grid,
            spec,
            prop: Propagator::new(grid, spec.beta),
            nl: Nonlinearity::new(grid, spec)?,
            cfg,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn spec(&self) -> &EquationSpec {
        &self.spec
    }

    pub fn config(&self) -> &PicardConfig {
        &self.cfg
    }

    pub fn propagator(&self) -> &Propagator {
        &self.prop
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nl
    }

    pub fn mesh(&self, span: f64) -> Result<DuhamelMesh> {
        DuhamelMesh::new(&self.prop, span, self.cfg.subintervals)
    }

    /// Fixed point of `Lambda(u) = U(t) u0 + i int_0^t U(t - s) N(u(s)) ds` on
    /// the given mesh.
    pub fn solve_on(
        &self,
        u0: &Field,
        mesh: &DuhamelMesh,
        mode: IterationMode,
    ) -> Result<PicardSolution> {
        self.grid.ensure_same(u0.grid())?;
        u0.ensure_finite("initial datum")?;
        let a0 = u0.raw_spectrum();
        let context = format!(
            "single-datum window T = {:.6e}, ||u0||_L2 = {:.6e}",
            mesh.span(),
            u0.l2_norm()
        );
        let (phys, log) = mesh.iterate(
            Some(&a0),
            |_, u| self.nl.eval(u),
            &self.cfg,
            auxiliary_exponents(&self.spec),
            mode,
            &context,
        )?;
        let times = mesh.times().iter().map(|t| u0.time() + t).collect();
        Ok(PicardSolution {
            trajectory: Trajectory::from_parts(self.grid, times, phys)?,
            log,
            window: mesh.span(),
        })
    }

    pub fn solve(&self, u0: &Field, window: f64) -> Result<PicardSolution> {
        self.solve_on(u0, &self.mesh(window)?, IterationMode::Strict)
    }

    /// Largest contraction ratio measured over the first `iterations` steps.
    pub fn contraction_probe(&self, u0: &Field, window: f64, iterations: usize) -> Result<f64> {
        let sol = self.solve_on(u0, &self.mesh(window)?, IterationMode::Probe(iterations))?;
        Ok(sol.log.max_ratio())
    }
}

/// Solves the Duhamel fixed point over `[0, window]`.
pub fn picard_local_solve(
    u0: &Field,
    spec: EquationSpec,
    window: &ExistenceWindow,
    cfg: PicardConfig,
) -> Result<PicardSolution> {
    PicardSolver::new(*u0.grid(), spec, cfg)?.solve(u0, window.t)
}

/// Concatenated fixed-point solves covering a horizon.
#[derive(Debug, Clone)]
pub struct GlobalEvolution {
    pub trajectory: Trajectory,
    pub window: ExistenceWindow,
    /// Length of each window actually used (the horizon split evenly).
    pub step: f64,
    /// Window time assigned at each step from the conserved mass.
    pub windows: Vec<f64>,
    /// `||u(k step)||_{L^2}` measured at the start of each step.
    pub measured_norms: Vec<f64>,
    pub logs: Vec<ContractionLog>,
}

impl PicardSolver {
    /// Repeated local solves on equal windows. The window is computed from
    /// the conserved `L^2` norm of the datum, so it is the same at every step;
    /// the horizon is split into `ceil(horizon / T)` equal pieces so that the
    /// concatenated mesh is uniform.
    pub fn global_evolve(
        &self,
        u0: &Field,
        horizon: f64,
        constant: f64,
    ) -> Result<GlobalEvolution> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(LabError::InvalidParameter(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        let norm = u0.l2_norm();
        let window = existence_window(
            &self.spec,
            WindowRule::single_for(&self.spec),
            WindowInputs::Single { norm },
            constant,
        )?;
        let steps = ((horizon / window.t) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let step = horizon / steps as f64;
        let mesh = self.mesh(step)?;
        let mut traj = Trajectory::new(self.grid);
        let mut state = u0.clone();
        let mut windows = Vec::with_capacity(steps);
        let mut measured = Vec::with_capacity(steps);
        let mut logs = Vec::with_capacity(steps);
        for _ in 0..steps {
            windows.push(window.t);
            measured.push(state.l2_norm());
            let sol = self.solve_on(&state, &mesh, IterationMode::Strict)?;
            state = sol.trajectory.last_field().expect("mesh has nodes");
            traj.extend_from(sol.trajectory)?;
            logs.push(sol.log);
        }
        Ok(GlobalEvolution {
            trajectory: traj,
            window,
            step,
            windows,
            measured_norms: measured,
            logs,
        })
    }
}

pub fn l2_global_evolve(
    u0: &Field,
    spec: EquationSpec,
    horizon: f64,
    constant: f64,
    cfg: PicardConfig,
) -> Result<GlobalEvolution> {
    PicardSolver::new(*u0.grid(), spec, cfg)?.global_evolve(u0, horizon, constant)
}

/// Outcome of the window-constant calibration.
#[derive(Debug, Clone, Serialize)]
pub struct Calibration {
    pub constant: f64,
    pub window: f64,
    pub ratio: f64,
    pub target_ratio: f64,
    pub probes: usize,
}

impl PicardSolver {
    /// Largest constant `C` (bisection in `log T`) whose single-datum window
    /// keeps the measured contraction ratio at or below `target_ratio`.
    pub fn calibrate_constant(&self, u0: &Field, target_ratio: f64) -> Result<Calibration> {
        const PROBE_ITERS: usize = 6;
        let norm = u0.l2_norm();
        let unit = existence_window(
            &self.spec,
            WindowRule::single_for(&self.spec),
            WindowInputs::Single { norm },
            1.0,
        )?;
        let exponent = unit.conditions.get(1).map_or(0.0, |c| c.exponent);
        // T = C norm^exponent below the cap
        let scale = if norm > 0.0 {
            norm.powf(exponent)
        } else {
            f64::INFINITY
        };
        let to_constant = |t: f64| if scale.is_finite() { t / scale } else { 1.0 };
        // an iterate that overflows marks the window as non-contracting
        let probe = |t: f64| match self.contraction_probe(u0, t, PROBE_ITERS) {
            Err(LabError::NonFinite(_)) => Ok(f64::INFINITY),
            r => r,
        };
        let mut probes = 1;
        let r1 = probe(1.0)?;
        if r1 <= target_ratio {
            return Ok(Calibration {
                constant: to_constant(1.0),
                window: 1.0,
                ratio: r1,
                target_ratio,
                probes,
            });
        }
        let (mut good, mut bad) = (0.5, 1.0);
        let mut good_ratio = loop {
            probes += 1;
            let r = probe(good)?;
            if r <= target_ratio {
                break r;
            }
            bad = good;
            good *= 0.5;
            if good < 1e-9 {
                return Err(LabError::NonContraction {
                    ratio: r,
                    iteration: PROBE_ITERS,
                    context: "calibration found no contracting window above 1e-9".into(),
                });
            }
        };
        for _ in 0..10 {
            let mid = (good * bad).sqrt();
            probes += 1;
            let r = probe(mid)?;
            if r <= target_ratio {
                good = mid;
                good_ratio = r;
            } else {
                bad = mid;
            }
        }
        Ok(Calibration {
            constant: to_constant(good),
            window: good,
            ratio: good_ratio,
            target_ratio,
            probes,
        })
    }
}

/// Empirical form of the difference estimate for the Duhamel term: for the
/// free evolutions `u, v, w` of three data on `[0, T]`,
/// `||i int U(t-s) G(u,v,w) ds||_Y / (T^omega ||v - w||_Y (||u||_Y^a + ||v||_Y^a + ||w||_Y^a))`
/// with `||f||_Y = max(sup L^2, L^{1/kappa}_T L^{alpha+2})`.
pub fn duhamel_difference_ratio(
    u0: &Field,
    v0: &Field,
    w0: &Field,
    spec: EquationSpec,
    t: f64,
    subintervals: usize,
) -> Result<f64> {
    let alpha = match spec.kind {
        NonlinearityKind::Power { alpha } => alpha,
        NonlinearityKind::Hartree { .. } => {
            return Err(LabError::InvalidParameter(
                "the difference estimate is stated for the power nonlinearity".into(),
            ))
        }
    };
    let grid = *u0.grid();
    grid.ensure_same(v0.grid())?;
    grid.ensure_same(w0.grid())?;
    let exps = compute_exponents(&spec, 2.0 + 1e-9)?;
    let om = exps.omega.expect("power branch");
    let prop = Propagator::new(grid, spec.beta);
    let mesh = DuhamelMesh::new(&prop, t, subintervals)?;
    let free = |f: &Field| -> Result<Trajectory> {
        Trajectory::from_parts(grid, mesh.times().to_vec(), mesh.free(&f.raw_spectrum()))
    };
    let (u, v, w) = (free(u0)?, free(v0)?, free(w0)?);
    let nl = Nonlinearity::new(grid, spec.with_coupling(1.0))?;
    let forcing: Vec<Vec<Complex64>> = (0..mesh.nodes())
        .map(|j| nl.difference(u.snapshot(j), v.snapshot(j), w.snapshot(j)))
        .collect();
    let d = Trajectory::from_parts(grid, mesh.times().to_vec(), mesh.duhamel(&forcing))?;
    let aux = auxiliary_exponents(&spec);
    let y = |tr: &Trajectory| auxiliary_norm(tr, aux.0, aux.1);
    let denom = t.powf(om)
        * y(&v.difference(&w)?)?
        * (y(&u)?.powf(alpha) + y(&v)?.powf(alpha) + y(&w)?.powf(alpha));
    if denom == 0.0 {
        return Err(LabError::ZeroNorm("difference estimate denominator".into()));
    }
    Ok(y(&d)? / denom)
}
