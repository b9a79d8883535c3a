//! Scenario execution. Each scenario turns a validated configuration into a
//! [`Report`].

use serde_json::json;

use crate::analysis::{
    retarded_constant, strichartz_constant, AdmissiblePair, StrichartzSetup, StrichartzStats,
};
use crate::cli::config::{ExperimentConfig, Method, Scenario};
use crate::cli::output::{num, Report, Table};
use crate::cli::verify::run_checks;
use crate::error::{LabError, Result};
use crate::highlow::{bourgain_iterate, solve_interaction, split_data};
use crate::modulation::{ModNormSpec, ModulationPartition};
use crate::sampling::gaussian_family;
use crate::solver::picard::{auxiliary_exponents, PicardSolver};
use crate::solver::trajectory::write_checkpoint;
use crate::solver::{check_gamma_range, compute_exponents, SplitStep, Trajectory};

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub fn run_scenario(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    match cfg.scenario {
        Scenario::Exponents => exponents(cfg),
        Scenario::Norms => norms(cfg),
        Scenario::Evolve => evolve(cfg),
        Scenario::Split => split(cfg),
        Scenario::Interaction => interaction(cfg),
        Scenario::Bourgain => bourgain(cfg),
        Scenario::Strichartz => strichartz(cfg),
        Scenario::Verify => verify(cfg.filter.as_deref(), cfg.seed),
    }
}

fn exponents(cfg: &ExperimentConfig) -> Result<Report> {
    let spec = cfg.equation()?;
    let p = cfg.exponents.data_exponent;
    let mut rep = Report::new();
    let e = compute_exponents(&spec, p)?;
    rep.put_record("", &e, "solver::exponents::compute_exponents")?;
    rep.put(
        "window_exponent",
        e.window_exponent(),
        "solver::exponents::Exponents::window_exponent",
    );
    rep.put(
        "interaction_exponent",
        e.interaction_exponent(),
        "solver::exponents::Exponents::interaction_exponent",
    );
    rep.put_record(
        "gamma_range",
        &check_gamma_range(&spec, p)?,
        "solver::exponents::check_gamma_range",
    )?;
    Ok(rep)
}

fn norms(cfg: &ExperimentConfig) -> Result<Report> {
    let u = cfg.datum()?;
    let part = ModulationPartition::build(*u.grid(), cfg.budget.transition)?;
    let mut rep = Report::new();
    rep.put("mass", u.mass(), "grid_spectral::Field::mass");
    rep.put(
        "edge_ratio",
        u.edge_ratio(),
        "grid_spectral::Field::edge_ratio",
    );
    rep.put(
        "symmetry_defect",
        u.symmetry_defect(),
        "grid_spectral::Field::symmetry_defect",
    );
    rep.put(
        "k_max",
        part.k_max() as f64,
        "modulation::ModulationPartition::build",
    );
    let pu = part
        .partition_sum()
        .iter()
        .map(|s| (s - 1.0).abs())
        .fold(0.0, f64::max);
    rep.put(
        "partition_of_unity_defect",
        pu,
        "modulation::ModulationPartition::partition_sum",
    );
    for &p in &cfg.norms.lebesgue {
        rep.put(
            format!("lebesgue[{p}]"),
            u.lp_norm(p),
            "grid_spectral::Field::lp_norm",
        );
    }
    for &p in &cfg.norms.modulation {
        let v = part.mod_norm(&u, ModNormSpec::dual_pair(p)?)?;
        rep.put(
            format!("modulation[{p}]"),
            v,
            "modulation::ModulationPartition::mod_norm",
        );
    }
    Ok(rep)
}

fn trajectory_table(name: &str, traj: &Trajectory, r: f64) -> Table {
    let mut t = Table::new(name, &["t", "mass", "l2", "lr", "mass_drift"]);
    let m0 = traj.masses()[0];
    let lr = traj.lr_norms(r);
    for (i, (&time, m)) in traj.times().iter().zip(traj.masses()).enumerate() {
        t.push_numbers(&[time, m, m.sqrt(), lr[i], (m - m0).abs() / m0]);
    }
    t
}

fn checkpoint_bytes(traj: &Trajectory) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    write_checkpoint(traj, &mut bytes)?;
    Ok(bytes)
}

fn evolve(cfg: &ExperimentConfig) -> Result<Report> {
    let spec = cfg.equation()?;
    let u0 = cfg.datum()?;
    let grid = *u0.grid();
    let b = &cfg.budget;
    let (_, r) = auxiliary_exponents(&spec);
    let mut rep = Report::new();
    rep.put("lr_exponent", r, "solver::picard::auxiliary_exponents");
    let mut picard_end = None;
    if matches!(b.method, Method::Picard | Method::Both) {
        let solver = PicardSolver::new(grid, spec, b.picard())?;
        let constant = if b.calibrate {
            let cal = solver.calibrate_constant(&u0, b.target_ratio)?;
            rep.put_record(
                "calibration",
                &cal,
                "solver::picard::PicardSolver::calibrate_constant",
            )?;
            cal.constant
        } else {
            b.window_constant
        };
        let ev = solver.global_evolve(&u0, b.horizon, constant)?;
        let src = "solver::picard::PicardSolver::global_evolve";
        rep.put("picard.window", ev.window.t, src);
        rep.put("picard.step", ev.step, src);
        rep.put("picard.steps", ev.logs.len() as f64, src);
        rep.put(
            "picard.mass_drift",
            ev.trajectory.mass_drift(),
            "solver::trajectory::Trajectory::mass_drift",
        );
        let max_ratio = ev.logs.iter().map(|l| l.max_ratio()).fold(0.0, f64::max);
        rep.put(
            "picard.max_contraction_ratio",
            max_ratio,
            "solver::picard::ContractionLog::max_ratio",
        );
        let iters: usize = ev.logs.iter().map(|l| l.iterations).sum();
        rep.put("picard.iterations", iters as f64, src);
        rep.tables
            .push(trajectory_table("picard", &ev.trajectory, r));
        if b.checkpoint {
            rep.checkpoint = Some(checkpoint_bytes(&ev.trajectory)?);
        }
        picard_end = ev.trajectory.last_field();
    }
    if matches!(b.method, Method::SplitStep | Method::Both) {
        if b.split_steps == 0 {
            return Err(LabError::Config("budget.split_steps must be >= 1".into()));
        }
        let h = b.horizon / b.split_steps as f64;
        let traj = SplitStep::new(grid, spec)?.evolve(&u0, h, b.split_steps, b.record_every)?;
        let src = "solver::split_step::SplitStep::evolve";
        rep.put("split_step.h", h, src);
        rep.put(
            "split_step.mass_drift",
            traj.mass_drift(),
            "solver::trajectory::Trajectory::mass_drift",
        );
        rep.tables.push(trajectory_table("split_step", &traj, r));
        if let (Some(p), Some(s)) = (&picard_end, traj.last_field()) {
            rep.put(
                "picard_vs_split_step_gap",
                p.relative_l2_distance(&s)?,
                "grid_spectral::Field::relative_l2_distance",
            );
        }
        if rep.checkpoint.is_none() && b.checkpoint {
            rep.checkpoint = Some(checkpoint_bytes(&traj)?);
        }
    }
    Ok(rep)
}

fn split(cfg: &ExperimentConfig) -> Result<Report> {
    let spec = cfg.equation()?;
    let u = cfg.datum()?;
    let e = compute_exponents(&spec, cfg.exponents.data_exponent)?;
    let part = ModulationPartition::build(*u.grid(), cfg.budget.transition)?;
    let mut rep = Report::new();
    let mut table = Table::new(
        "split",
        &["n_param", "cutoff", "v_l2", "w_mod", "target", "data_norm"],
    );
    let (mut vs, mut ws) = (Vec::new(), Vec::new());
    for &n in &cfg.split.n_values {
        let s = split_data(&u, e.data_exponent, e.target_exponent, n, &part)?;
        table.push_numbers(&[
            n,
            s.cutoff,
            s.measured_v_norm,
            s.measured_w_norm,
            s.target,
            s.data_norm,
        ]);
        vs.push(s.measured_v_norm);
        ws.push(s.measured_w_norm);
        rep.put(
            format!("split[{n}].cutoff"),
            s.cutoff,
            "highlow::split_data",
        );
    }
    rep.put("gamma", e.gamma, "solver::exponents::compute_exponents");
    rep.put(
        "target_exponent",
        e.target_exponent,
        "solver::exponents::compute_exponents",
    );
    if cfg.split.n_values.len() >= 2 {
        rep.put(
            "slope_v_l2",
            loglog_slope(&cfg.split.n_values, &vs),
            "cli::scenarios::loglog_slope",
        );
        rep.put(
            "slope_w_mod",
            loglog_slope(&cfg.split.n_values, &ws),
            "cli::scenarios::loglog_slope",
        );
    }
    rep.tables.push(table);
    Ok(rep)
}

fn interaction(cfg: &ExperimentConfig) -> Result<Report> {
    let spec = cfg.equation()?;
    let u = cfg.datum()?;
    let grid = *u.grid();
    let e = compute_exponents(&spec, cfg.exponents.data_exponent)?;
    let part = ModulationPartition::build(grid, cfg.budget.transition)?;
    let ic = &cfg.interaction;
    let s = split_data(&u, e.data_exponent, e.target_exponent, ic.n_param, &part)?;
    let solver = PicardSolver::new(grid, spec, cfg.budget.picard())?;
    let mut rep = Report::new();
    rep.put(
        "decay_exponent",
        e.interaction_exponent(),
        "solver::exponents::Exponents::interaction_exponent",
    );
    rep.put("psi_mod", s.measured_w_norm, "highlow::split_data");
    let mut table = Table::new(
        "interaction",
        &["t", "w_sup_l2", "w_final_l2", "max_ratio", "window_ok"],
    );
    let mut sups = Vec::new();
    for &t in &ic.windows {
        let v = solver.global_evolve(&s.v, t, ic.window_constant)?;
        let w = solve_interaction(
            &solver,
            &v.trajectory,
            &s.w,
            s.measured_w_norm,
            ic.window_constant,
        )?;
        table.push_numbers(&[
            t,
            w.sup_l2,
            w.final_l2,
            w.log.max_ratio(),
            w.window_ok as u8 as f64,
        ]);
        sups.push(w.sup_l2);
    }
    if ic.windows.len() >= 2 {
        rep.put(
            "slope_w_sup",
            loglog_slope(&ic.windows, &sups),
            "cli::scenarios::loglog_slope",
        );
    }
    rep.tables.push(table);
    Ok(rep)
}

fn bourgain(cfg: &ExperimentConfig) -> Result<Report> {
    let spec = cfg.equation()?;
    let u = cfg.datum()?;
    let mut bc = cfg.bourgain;
    bc.picard = cfg.budget.picard();
    bc.transition = cfg.budget.transition;
    let ledger = bourgain_iterate(&u, spec, cfg.exponents.data_exponent, &bc)?;
    let mut rep = Report::new();
    rep.put_record("summary", &ledger.summary, "highlow::bourgain_iterate")?;
    let mut csv = Vec::new();
    ledger.write_csv(&mut csv)?;
    rep.files.push(("ledger.csv".into(), csv));
    rep.passed = ledger.summary.chain_ok;
    Ok(rep)
}

fn stats_quantities(rep: &mut Report, label: &str, st: &StrichartzStats, src: &str) {
    rep.put_value(
        format!("{label}.pair"),
        json!({"q": num(st.pair.q), "r": st.pair.r}),
        src,
    );
    rep.put(format!("{label}.max_ratio"), st.max_ratio, src);
    rep.put(
        format!("{label}.refined_max_ratio"),
        st.refined_max_ratio,
        src,
    );
    rep.put(
        format!("{label}.refinement_drift"),
        st.refinement_drift,
        src,
    );
    rep.put(
        format!("{label}.max_quadrature_error"),
        st.max_quadrature_error,
        src,
    );
}

fn strichartz(cfg: &ExperimentConfig) -> Result<Report> {
    let spec = cfg.equation()?;
    let grid = cfg.grid()?;
    let sc = &cfg.strichartz;
    let family = gaussian_family(sc.family_size, sc.min_width, sc.max_width);
    let setup = StrichartzSetup {
        horizon: sc.horizon,
        snapshots: sc.snapshots,
    };
    let mut rep = Report::new();
    let mut table = Table::new("strichartz", &["q", "r", "member", "ratio"]);
    for &r in &sc.r_values {
        let pair = AdmissiblePair::from_r(r, spec.beta(), spec.n)?;
        let st = strichartz_constant(grid, &family, pair, setup)?;
        stats_quantities(
            &mut rep,
            &format!("homogeneous[{r}]"),
            &st,
            "analysis::strichartz_constant",
        );
        for (i, x) in st.ratios.iter().enumerate() {
            table.push_numbers(&[pair.q, r, i as f64, *x]);
        }
        rep.passed &= st.refinement_drift <= 0.1;
    }
    if let Some((r1, r2)) = sc.retarded {
        let out = AdmissiblePair::from_r(r1, spec.beta(), spec.n)?;
        let inn = AdmissiblePair::from_r(r2, spec.beta(), spec.n)?;
        let st = retarded_constant(grid, &family, out, inn, setup)?;
        stats_quantities(&mut rep, "retarded", &st, "analysis::retarded_constant");
        rep.passed &= st.refinement_drift <= 0.1;
    }
    rep.tables.push(table);
    Ok(rep)
}

pub fn verify(filter: Option<&str>, seed: u64) -> Result<Report> {
    let checks = run_checks(filter, seed)?;
    let mut rep = Report::new();
    let mut table = Table::new(
        "checks",
        &["module", "name", "value", "tolerance", "passed"],
    );
    for c in &checks {
        let src = format!("{}::{}", c.module, c.name);
        rep.put(format!("{}.{}", c.module, c.name), c.value, &src);
        table.rows.push(vec![
            c.module.into(),
            c.name.into(),
            crate::cli::output::fmt_f64(c.value),
            crate::cli::output::fmt_f64(c.tolerance),
            c.passed.to_string(),
        ]);
        if let Some(e) = &c.error {
            rep.put_value(format!("{}.{}.error", c.module, c.name), json!(e), &src);
        }
    }
    rep.passed = checks.iter().all(|c| c.passed);
    rep.tables.push(table);
    Ok(rep)
}
