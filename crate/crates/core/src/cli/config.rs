//! TOML experiment configuration.
//!
//! ```toml
//! scenario = "evolve"
//! seed = 7
//!
//! [equation]
//! nonlinearity = "power"   # or "hartree"
//! exponent = 1.0           # alpha (power) or nu (hartree)
//! n = 2
//! beta = 1.5
//!
//! [grid]
//! half_extent = 8.0
//! points = 128
//!
//! [datum]
//! kind = "gaussian"
//! width = 1.5
//! ```
//!
//! Every other section is optional and falls back to its defaults. Unknown
//! keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::{radial_profile, Field, Grid, RadialProfile};
use crate::highlow::BourgainConfig;
use crate::modulation::TransitionProfile;
use crate::nonlinearity::EquationSpec;
use crate::sampling::{random_field, random_radial};
use crate::solver::picard::PicardConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Evolve,
    Norms,
    Split,
    Interaction,
    Bourgain,
    Strichartz,
    Exponents,
    Verify,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Evolve => "evolve",
            Scenario::Norms => "norms",
            Scenario::Split => "split",
            Scenario::Interaction => "interaction",
            Scenario::Bourgain => "bourgain",
            Scenario::Strichartz => "strichartz",
            Scenario::Exponents => "exponents",
            Scenario::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonlinearityChoice {
    Power,
    Hartree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationSection {
    pub nonlinearity: NonlinearityChoice,
    /// `alpha` for the power law, `nu` for the Hartree kernel.
    pub exponent: f64,
    pub n: usize,
    pub beta: f64,
    #[serde(default = "one")]
    pub sign: f64,
    #[serde(default = "one")]
    pub coupling: f64,
}

fn one() -> f64 {
    1.0
}

impl EquationSection {
    pub fn spec(&self) -> Result<EquationSpec> {
        let spec = match self.nonlinearity {
            NonlinearityChoice::Power => {
                EquationSpec::power(self.n, self.beta, self.exponent, self.sign)?
            }
            NonlinearityChoice::Hartree => {
                EquationSpec::hartree(self.n, self.beta, self.exponent, self.sign)?
            }
        };
        Ok(spec.with_coupling(self.coupling))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub half_extent: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DatumSection {
    Gaussian {
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    SechBump {
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    Ring {
        radius: f64,
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    GaussianMix {
        terms: Vec<(f64, f64)>,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Seeded band-limited noise (not radial), unit `L^2` norm before scaling.
    Random {
        bandwidth: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Seeded radial mixture of Gaussians.
    RandomRadial {
        min_width: f64,
        max_width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
}

impl DatumSection {
    pub fn amplitude(&self) -> f64 {
        match *self {
            DatumSection::Gaussian { amplitude, .. }
            | DatumSection::SechBump { amplitude, .. }
            | DatumSection::Ring { amplitude, .. }
            | DatumSection::GaussianMix { amplitude, .. }
            | DatumSection::Random { amplitude, .. }
            | DatumSection::RandomRadial { amplitude, .. } => amplitude,
        }
    }

    pub fn is_radial(&self) -> bool {
        !matches!(self, DatumSection::Random { .. })
    }

    pub fn sample(&self, grid: Grid, seed: u64) -> Result<Field> {
        let raw = match self {
            DatumSection::Gaussian { width, .. } => {
                radial_profile(grid, &RadialProfile::Gaussian { width: *width })?
            }
            DatumSection::SechBump { width, .. } => {
                radial_profile(grid, &RadialProfile::SechBump { width: *width })?
            }
            DatumSection::Ring { radius, width, .. } => radial_profile(
                grid,
                &RadialProfile::Ring {
                    radius: *radius,
                    width: *width,
                },
            )?,
            DatumSection::GaussianMix { terms, .. } => radial_profile(
                grid,
                &RadialProfile::GaussianMix {
                    terms: terms.clone(),
                },
            )?,
            DatumSection::Random { bandwidth, .. } => {
                if !(*bandwidth > 0.0 && 2.0 * bandwidth <= grid.band_edge()) {
                    return Err(LabError::Config(format!(
                        "random datum bandwidth {bandwidth} must lie in (0, band edge / 2 = {}]",
                        grid.band_edge() / 2.0
                    )));
                }
                random_field(grid, seed, *bandwidth)
            }
            DatumSection::RandomRadial {
                min_width,
                max_width,
                ..
            } => {
                if !(*min_width >= 4.0 * grid.dx() && max_width >= min_width) {
                    return Err(LabError::Config(format!(
                        "random radial widths need 4 dx = {} <= min_width <= max_width",
                        4.0 * grid.dx()
                    )));
                }
                random_radial(grid, seed, *min_width, *max_width)
            }
        };
        Ok(raw.scaled(num_complex::Complex64::new(self.amplitude(), 0.0)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Picard,
    SplitStep,
    Both,
}

/// Numeric budgets shared by the time-dependent scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetSection {
    pub horizon: f64,
    pub method: Method,
    pub subintervals: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub noise_floor: f64,
    /// Window constant `C`; ignored when `calibrate` is set.
    pub window_constant: f64,
    pub calibrate: bool,
    pub target_ratio: f64,
    /// Split-step steps over the horizon.
    pub split_steps: usize,
    /// Split-step steps between recorded snapshots.
    pub record_every: usize,
    pub transition: TransitionProfile,
    /// Largest tolerated boundary-to-peak ratio of the datum.
    pub max_edge_ratio: f64,
    pub checkpoint: bool,
}

impl Default for BudgetSection {
    fn default() -> Self {
        let p = PicardConfig::default();
        Self {
            horizon: 1.0,
            method: Method::Picard,
            subintervals: p.subintervals,
            tol: p.tol,
            max_iter: p.max_iter,
            noise_floor: p.noise_floor,
            window_constant: 1.0,
            calibrate: false,
            target_ratio: 0.5,
            split_steps: 1000,
            record_every: 50,
            transition: TransitionProfile::default(),
            max_edge_ratio: 1e-12,
            checkpoint: true,
        }
    }
}

impl BudgetSection {
    pub fn picard(&self) -> PicardConfig {
        PicardConfig {
            subintervals: self.subintervals,
            tol: self.tol,
            max_iter: self.max_iter,
            noise_floor: self.noise_floor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExponentsSection {
    /// `p` (power) or `s` (Hartree) of the data space.
    pub data_exponent: f64,
}

impl Default for ExponentsSection {
    fn default() -> Self {
        Self { data_exponent: 2.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormsSection {
    pub lebesgue: Vec<f64>,
    /// `p` of each `M^{p,p'}` norm.
    pub modulation: Vec<f64>,
}

impl Default for NormsSection {
    fn default() -> Self {
        Self {
            lebesgue: vec![2.0, 3.0, 4.0],
            modulation: vec![2.0, 2.2, 3.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSection {
    /// Splitting parameters `N`.
    pub n_values: Vec<f64>,
}

impl Default for SplitSection {
    fn default() -> Self {
        Self {
            n_values: vec![2.0, 4.0, 8.0, 16.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InteractionSection {
    pub n_param: f64,
    /// Solve times `T` for the interaction term.
    pub windows: Vec<f64>,
    pub window_constant: f64,
}

impl Default for InteractionSection {
    fn default() -> Self {
        Self {
            n_param: 4.0,
            windows: vec![0.0125, 0.025, 0.05, 0.1],
            window_constant: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrichartzSection {
    /// Spatial exponents `r`; `q` follows from the admissibility relation.
    pub r_values: Vec<f64>,
    pub family_size: usize,
    pub min_width: f64,
    pub max_width: f64,
    pub horizon: f64,
    pub snapshots: usize,
    /// Optional `[r1, r2]` for the retarded estimate.
    pub retarded: Option<(f64, f64)>,
}

impl Default for StrichartzSection {
    fn default() -> Self {
        Self {
            r_values: vec![4.0],
            family_size: 6,
            min_width: 1.0,
            max_width: 2.5,
            horizon: 1.0,
            snapshots: 32,
            retarded: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub seed: u64,
    pub equation: Option<EquationSection>,
    pub grid: Option<GridSection>,
    pub datum: Option<DatumSection>,
    #[serde(default)]
    pub budget: BudgetSection,
    #[serde(default)]
    pub exponents: ExponentsSection,
    #[serde(default)]
    pub norms: NormsSection,
    #[serde(default)]
    pub split: SplitSection,
    #[serde(default)]
    pub interaction: InteractionSection,
    #[serde(default)]
    pub bourgain: BourgainConfig,
    #[serde(default)]
    pub strichartz: StrichartzSection,
    /// Module filter of the verify scenario.
    #[serde(default)]
    pub filter: Option<String>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    fn require<'a, T>(&self, field: &'a Option<T>, name: &str) -> Result<&'a T> {
        field.as_ref().ok_or_else(|| {
            LabError::Config(format!(
                "scenario '{}' needs a [{name}] section",
                self.scenario.name()
            ))
        })
    }

    pub fn equation(&self) -> Result<EquationSpec> {
        self.require(&self.equation, "equation")?.spec()
    }

    pub fn grid(&self) -> Result<Grid> {
        let g = self.require(&self.grid, "grid")?;
        Grid::new(self.equation()?.n, g.half_extent, g.points)
    }

    pub fn datum(&self) -> Result<Field> {
        let grid = self.grid()?;
        let f = self
            .require(&self.datum, "datum")?
            .sample(grid, self.seed)?;
        let edge = f.edge_ratio();
        if edge > self.budget.max_edge_ratio {
            return Err(LabError::Config(format!(
                "datum reaches the torus boundary: edge/peak ratio {edge:.3e} exceeds {:.3e}; enlarge half_extent",
                self.budget.max_edge_ratio
            )));
        }
        Ok(f)
    }

    /// Cross-field validation, run before any computation.
    pub fn validate(&self) -> Result<()> {
        self.budget.picard().validate()?;
        if !(self.budget.horizon > 0.0) {
            return Err(LabError::Config("budget.horizon must be positive".into()));
        }
        if !(self.budget.window_constant > 0.0) {
            return Err(LabError::Config(
                "budget.window_constant must be positive".into(),
            ));
        }
        if self.budget.record_every == 0 {
            return Err(LabError::Config("budget.record_every must be >= 1".into()));
        }
        let needs_eq = !matches!(self.scenario, Scenario::Verify);
        if needs_eq {
            let spec = self.equation()?;
            let theory = matches!(
                self.scenario,
                Scenario::Evolve | Scenario::Split | Scenario::Interaction | Scenario::Bourgain
            );
            if theory {
                spec.check_hypotheses()?;
            }
        }
        let needs_data = !matches!(
            self.scenario,
            Scenario::Verify | Scenario::Exponents | Scenario::Strichartz
        );
        if needs_data {
            let datum = self.require(&self.datum, "datum")?;
            let grid = self.grid()?;
            let beta = self.equation()?.beta();
            if beta != 2.0 && !datum.is_radial() && self.scenario != Scenario::Norms {
                return Err(LabError::HypothesisViolation(format!(
                    "fractional dispersion beta = {beta} needs radial data; datum kind is not radial"
                )));
            }
            if matches!(
                self.scenario,
                Scenario::Split | Scenario::Interaction | Scenario::Bourgain | Scenario::Norms
            ) {
                crate::modulation::ModulationPartition::build(grid, self.budget.transition)?;
            }
        }
        if matches!(
            self.scenario,
            Scenario::Split | Scenario::Interaction | Scenario::Bourgain
        ) {
            let e =
                crate::solver::compute_exponents(&self.equation()?, self.exponents.data_exponent)?;
            if !e.in_range {
                return Err(LabError::HypothesisViolation(e.violations.join("; ")));
            }
        }
        if self.scenario == Scenario::Split && self.split.n_values.iter().any(|&n| !(n > 1.0)) {
            return Err(LabError::Config("split.n_values must all exceed 1".into()));
        }
        if self.scenario == Scenario::Interaction
            && self.interaction.windows.iter().any(|&t| !(t > 0.0))
        {
            return Err(LabError::Config(
                "interaction.windows must be positive".into(),
            ));
        }
        if self.scenario == Scenario::Bourgain && !(self.bourgain.n_param > 1.0) {
            return Err(LabError::Config("bourgain.n_param must exceed 1".into()));
        }
        if self.scenario == Scenario::Strichartz {
            let s = &self.strichartz;
            if s.family_size == 0 || s.r_values.is_empty() {
                return Err(LabError::Config(
                    "strichartz needs r_values and family_size >= 1".into(),
                ));
            }
        }
        Ok(())
    }

    /// Canonical JSON rendering used for the configuration hash.
    pub fn canonical(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}
