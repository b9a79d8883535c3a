//! Fast property suite behind `fnls-lab verify`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::analysis::{admissible_q, strichartz_ratios, AdmissiblePair, StrichartzSetup};
use crate::error::{LabError, Result};
use crate::grid::{
    forward_transform, inverse_transform, radial_profile, Field, Grid, RadialProfile,
};
use crate::highlow::{solve_interaction, split_data};
use crate::modulation::{ModulationPartition, TransitionProfile};
use crate::nonlinearity::{
    difference_bound, difference_constant_monte_carlo, hartree_difference,
    hartree_difference_direct, EquationSpec, Nonlinearity,
};
use crate::propagator::{apply_propagator, group_property_check, Dispersion};
use crate::sampling::random_field;
use crate::solver::picard::{PicardConfig, PicardSolver};
use crate::solver::{compute_exponents, SplitStep};

pub const MODULES: [&str; 7] = [
    "grid_spectral",
    "propagator",
    "modulation",
    "nonlinearity",
    "solver",
    "highlow",
    "analysis",
];

/// Outcome of one property: passes when `value <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub module: &'static str,
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub error: Option<String>,
}

type Probe = fn(u64) -> Result<f64>;

fn grid2(points: usize) -> Grid {
    Grid::new(2, 8.0, points).expect("static grid")
}

fn gauss(g: Grid, width: f64) -> Field {
    radial_profile(g, &RadialProfile::Gaussian { width }).expect("resolved width")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn parseval(seed: u64) -> Result<f64> {
    let f = random_field(grid2(64), seed, 1.0);
    Ok(rel(forward_transform(&f).l2_norm(), f.l2_norm()))
}

fn round_trip(seed: u64) -> Result<f64> {
    let f = random_field(grid2(64), seed, 1.0);
    inverse_transform(&forward_transform(&f)).relative_l2_distance(&f)
}

fn unitarity(seed: u64) -> Result<f64> {
    let f = random_field(grid2(64), seed, 1.0);
    Ok(rel(
        apply_propagator(&f, Dispersion::new(1.5)?, 0.7).l2_norm(),
        f.l2_norm(),
    ))
}

fn group_law(seed: u64) -> Result<f64> {
    let f = random_field(grid2(64), seed, 1.0);
    Ok(group_property_check(&f, Dispersion::new(1.5)?, 0.3, 0.45))
}

fn schrodinger_closed_form(_: u64) -> Result<f64> {
    let g = grid2(128);
    let t = 0.1;
    let out = apply_propagator(&gauss(g, 1.0), Dispersion::new(2.0)?, t);
    let z = Complex64::new(1.0, 4.0 * PI * t);
    Ok((0..g.len())
        .map(|i| (out.values()[i] - (-(PI * g.radius(i).powi(2)) / z).exp() / z).norm())
        .fold(0.0, f64::max))
}

fn partition_of_unity(_: u64) -> Result<f64> {
    let part = ModulationPartition::build(grid2(128), TransitionProfile::default())?;
    Ok(part
        .partition_sum()
        .iter()
        .map(|s| (s - 1.0).abs())
        .fold(0.0, f64::max))
}

fn box_reconstruction(seed: u64) -> Result<f64> {
    let g = grid2(128);
    let part = ModulationPartition::build(g, TransitionProfile::default())?;
    let f = random_field(g, seed, 1.0);
    let mut sum = Field::zeros(g);
    for k in part.indices() {
        sum = sum.add(&part.box_piece(&f, &k)?)?;
    }
    sum.relative_l2_distance(&f)
}

fn gauge_covariance(seed: u64) -> Result<f64> {
    let g = grid2(64);
    let f = random_field(g, seed, 1.0);
    let phase = Complex64::from_polar(1.0, 0.9);
    let mut worst = 0.0f64;
    for spec in [
        EquationSpec::power(2, 1.5, 0.7, 1.0)?,
        EquationSpec::hartree(2, 1.5, 1.0, -1.0)?,
    ] {
        let nl = Nonlinearity::new(g, spec)?;
        let rotated = Field::new(g, nl.eval(f.scaled(phase).values()), 0.0)?;
        let expect = Field::new(g, nl.eval(f.values()), 0.0)?.scaled(phase);
        worst = worst.max(rotated.relative_l2_distance(&expect)?);
    }
    Ok(worst)
}

fn hartree_identity(seed: u64) -> Result<f64> {
    let g = grid2(64);
    let v = random_field(g, seed, 1.0);
    let w1 = random_field(g, seed + 1, 1.0);
    let w2 = random_field(g, seed + 2, 1.0);
    hartree_difference(&v, &w1, &w2, 1.0)?
        .relative_l2_distance(&hartree_difference_direct(&v, &w1, &w2, 1.0)?)
}

fn difference_bound_ratio(seed: u64) -> Result<f64> {
    [0.5, 1.0, 2.0]
        .iter()
        .map(|&a| Ok(difference_constant_monte_carlo(a, 10_000, seed) / difference_bound(a)))
        .try_fold(0.0f64, |m, r: Result<f64>| Ok(m.max(r?)))
}

fn exponent_values(_: u64) -> Result<f64> {
    let e = compute_exponents(&EquationSpec::power(2, 1.5, 1.0, 1.0)?, 2.2)?;
    let got = [
        e.omega.unwrap_or(f64::NAN),
        e.kappa.unwrap_or(f64::NAN),
        e.p_max.unwrap_or(f64::NAN),
        e.gamma,
    ];
    let want = [1.0 / 3.0, 2.0 / 9.0, 7.0 / 3.0, 0.375];
    Ok(got
        .iter()
        .zip(want)
        .map(|(a, b)| rel(*a, b))
        .fold(0.0, f64::max))
}

fn split_step_mass(_: u64) -> Result<f64> {
    let g = grid2(64);
    let u0 = gauss(g, 1.5);
    let ss = SplitStep::new(g, EquationSpec::power(2, 1.5, 1.0, 1.0)?)?;
    Ok(ss.evolve(&u0, 0.0025, 200, 50)?.mass_drift())
}

fn picard_vs_split_step(_: u64) -> Result<f64> {
    let g = grid2(64);
    let u0 = gauss(g, 1.5).scaled(Complex64::new(0.5, 0.0));
    let spec = EquationSpec::power(2, 1.5, 1.0, 1.0)?;
    let cfg = PicardConfig {
        subintervals: 32,
        ..Default::default()
    };
    let picard = PicardSolver::new(g, spec, cfg)?.global_evolve(&u0, 0.2, 1.0)?;
    let reference = SplitStep::new(g, spec)?.advance(&u0, 0.2 / 800.0, 800)?;
    picard
        .trajectory
        .last_field()
        .ok_or_else(|| LabError::Insufficient("empty trajectory".into()))?
        .relative_l2_distance(&reference)
}

fn split_consistency(_: u64) -> Result<f64> {
    let g = grid2(128);
    let part = ModulationPartition::build(g, TransitionProfile::default())?;
    let u = radial_profile(
        g,
        &RadialProfile::GaussianMix {
            terms: vec![(1.0, 1.5), (0.5, 0.5)],
        },
    )?;
    let s = split_data(&u, 2.2, 3.0, 4.0, &part)?;
    let excess = (s.measured_w_norm - s.target).max(0.0);
    Ok(s.v.add(&s.w)?.relative_l2_distance(&u)? + excess)
}

fn interaction_vanishes(_: u64) -> Result<f64> {
    let g = grid2(64);
    let spec = EquationSpec::power(2, 1.5, 1.0, 1.0)?;
    let solver = PicardSolver::new(g, spec, PicardConfig::default())?;
    let v = solver.solve(&gauss(g, 1.5), 0.05)?.trajectory;
    let w = solve_interaction(&solver, &v, &Field::zeros(g), 0.0, 1.0)?;
    Ok(w.sup_l2)
}

fn admissible_inverse(_: u64) -> Result<f64> {
    let mut worst = 0.0f64;
    for n in 1..=3 {
        for &beta in &[0.8, 1.2, 1.5, 1.9, 2.0] {
            for i in 0..40 {
                let r = 2.0 + 0.25 * i as f64;
                if let Some(q) = admissible_q(r, beta, n) {
                    worst = worst.max(AdmissiblePair { q, r, beta, n }.defect().abs());
                }
            }
        }
    }
    let excluded = admissible_q(2.0, 1.5, 2).is_some() as u8 as f64;
    Ok(worst + excluded)
}

fn energy_isometry(_: u64) -> Result<f64> {
    let g = Grid::new(3, 8.0, 32)?;
    let pair = AdmissiblePair::from_r(2.0, 1.5, 3)?;
    let fam = vec![gauss(g, 2.0), gauss(g, 3.0)];
    let ratios = strichartz_ratios(
        &fam,
        pair,
        StrichartzSetup {
            horizon: 1.0,
            snapshots: 8,
        },
    )?;
    Ok(ratios.iter().map(|r| (r.0 - 1.0).abs()).fold(0.0, f64::max))
}

fn registry() -> Vec<(&'static str, &'static str, f64, Probe)> {
    vec![
        ("grid_spectral", "parseval", 1e-12, parseval),
        ("grid_spectral", "round_trip", 1e-13, round_trip),
        ("propagator", "unitarity", 1e-12, unitarity),
        ("propagator", "group_law", 1e-11, group_law),
        (
            "propagator",
            "schrodinger_gaussian_closed_form",
            1e-6,
            schrodinger_closed_form,
        ),
        (
            "modulation",
            "partition_of_unity",
            1e-12,
            partition_of_unity,
        ),
        (
            "modulation",
            "box_reconstruction",
            1e-11,
            box_reconstruction,
        ),
        ("nonlinearity", "gauge_covariance", 1e-13, gauge_covariance),
        (
            "nonlinearity",
            "hartree_identity_split",
            1e-10,
            hartree_identity,
        ),
        (
            "nonlinearity",
            "difference_bound_ratio",
            1.0,
            difference_bound_ratio,
        ),
        ("solver", "exponent_values", 1e-14, exponent_values),
        ("solver", "split_step_mass_drift", 1e-10, split_step_mass),
        ("solver", "picard_vs_split_step", 1e-5, picard_vs_split_step),
        ("highlow", "split_consistency", 1e-11, split_consistency),
        (
            "highlow",
            "interaction_vanishes_without_small_part",
            0.0,
            interaction_vanishes,
        ),
        ("analysis", "admissible_inverse", 1e-14, admissible_inverse),
        ("analysis", "energy_pair_isometry", 1e-12, energy_isometry),
    ]
}

/// Runs every check of the named module (all modules when `filter` is `None`).
pub fn run_checks(filter: Option<&str>, seed: u64) -> Result<Vec<Check>> {
    if let Some(f) = filter {
        if !MODULES.contains(&f) {
            return Err(LabError::Config(format!(
                "unknown module '{f}'; expected one of {}",
                MODULES.join(", ")
            )));
        }
    }
    Ok(registry()
        .into_iter()
        .filter(|(m, ..)| filter.is_none_or(|f| f == *m))
        .map(|(module, name, tolerance, probe)| match probe(seed) {
            Ok(value) => Check {
                module,
                name,
                value,
                tolerance,
                passed: value <= tolerance,
                error: None,
            },
            Err(e) => Check {
                module,
                name,
                value: f64::NAN,
                tolerance,
                passed: false,
                error: Some(e.to_string()),
            },
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_selects_one_module() {
        let checks = run_checks(Some("analysis"), 0).unwrap();
        assert_eq!(checks.len(), 2);
        assert!(
            checks.iter().all(|c| c.module == "analysis" && c.passed),
            "{checks:?}"
        );
        assert!(run_checks(Some("nope"), 0).is_err());
    }
}
