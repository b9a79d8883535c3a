//! Strang splitting: half linear flow, exact nonlinear phase, half linear flow.

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::fft;
use crate::grid::{Field, Grid};
use crate::nonlinearity::{EquationSpec, Nonlinearity};
use crate::propagator::Propagator;
use crate::solver::trajectory::Trajectory;

#[derive(Debug, Clone)]
pub struct SplitStep {
    grid: Grid,
    prop: Propagator,
    nl: Nonlinearity,
}

impl SplitStep {
    pub fn new(grid: Grid, spec: EquationSpec) -> Result<Self> {
        Ok(Self {
            grid,
            prop: Propagator::new(grid, spec.beta),
            nl: Nonlinearity::new(grid, spec)?,
        })
    }

    fn linear(&self, u: &mut [Complex64], t: f64) {
        let (m, n) = (self.grid.points(), self.grid.dims());
        fft::forward_raw(u, m, n);
        self.prop.evolve_raw(u, t);
        fft::inverse_raw(u, m, n);
    }

    /// Advances `u` by `steps` Strang steps of size `h`, merging adjacent half
    /// linear flows; `observe(k, u)` runs after every `every`-th step.
    fn run(
        &self,
        u: &mut [Complex64],
        h: f64,
        steps: usize,
        every: usize,
        mut observe: impl FnMut(usize, &[Complex64]) -> Result<()>,
    ) -> Result<()> {
        if steps == 0 {
            return Ok(());
        }
        self.linear(u, 0.5 * h);
        for k in 1..=steps {
            self.nl.phase_step(u, h);
            let last = k == steps;
            let record = k % every == 0 || last;
            if record {
                self.linear(u, 0.5 * h);
                check_finite(u, k)?;
                if record {
                    observe(k, u)?;
                }
                if !last {
                    self.linear(u, 0.5 * h);
                }
            } else {
                self.linear(u, h);
                check_finite(u, k)?;
            }
        }
        Ok(())
    }

    pub fn step(&self, u: &Field, h: f64) -> Result<Field> {
        self.grid.ensure_same(u.grid())?;
        check_step(h)?;
        let mut v = u.values().to_vec();
        self.run(&mut v, h, 1, 1, |_, _| Ok(()))?;
        Field::new(self.grid, v, u.time() + h)
    }

    /// `steps` steps of size `h`, storing the initial state and every
    /// `every`-th state (the final state is always stored).
    pub fn evolve(&self, u0: &Field, h: f64, steps: usize, every: usize) -> Result<Trajectory> {
        self.grid.ensure_same(u0.grid())?;
        check_step(h)?;
        let every = every.max(1);
        let t0 = u0.time();
        let mut traj = Trajectory::new(self.grid);
        traj.push(t0, u0.values().to_vec())?;
        let mut v = u0.values().to_vec();
        self.run(&mut v, h, steps, every, |k, s| {
            traj.push(t0 + k as f64 * h, s.to_vec())
        })?;
        Ok(traj)
    }

    /// Final state after `steps` steps.
    pub fn advance(&self, u0: &Field, h: f64, steps: usize) -> Result<Field> {
        self.grid.ensure_same(u0.grid())?;
        check_step(h)?;
        let mut v = u0.values().to_vec();
        self.run(&mut v, h, steps, steps.max(1), |_, _| Ok(()))?;
        Field::new(self.grid, v, u0.time() + steps as f64 * h)
    }
}

fn check_step(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(LabError::InvalidParameter(format!(
            "time step must be positive, got {h}"
        )))
    }
}

fn check_finite(u: &[Complex64], step: usize) -> Result<()> {
    if u.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(LabError::NonFinite(format!(
            "split-step state became non-finite at step {step}; reduce the time step"
        )))
    }
}

/// One Strang step.
pub fn split_step(u: &Field, spec: EquationSpec, h: f64) -> Result<Field> {
    SplitStep::new(*u.grid(), spec)?.step(u, h)
}
