//! Experiment configuration: a versioned TOML document.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{Form, RunOptions};
use crate::grid::Grid;
use crate::profile::{ode, shock_speed, EndStates, ProfileParams};
use crate::relent::RelConstants;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndStateSpec {
    pub v_minus: f64,
    #[serde(default)]
    pub u_minus: f64,
    pub v_plus: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Half width `L`; `None` means `60 / delta_S`.
    #[serde(default)]
    pub half_width: Option<f64>,
    pub n_cells: usize,
    #[serde(default)]
    pub center: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub t_final: f64,
    #[serde(default = "default_safety")]
    pub safety: f64,
    #[serde(default = "default_observe")]
    pub observe_every: f64,
}

fn default_safety() -> f64 {
    0.4
}

fn default_observe() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    #[default]
    None,
    Gaussian,
    Dipole,
    ShiftedProfile,
    RandomBumps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    #[default]
    U,
    V,
    Uv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MassMode {
    #[default]
    Free,
    Zero,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbationSpec {
    pub family: Family,
    pub target: Target,
    pub amplitude: f64,
    pub width: f64,
    pub center: f64,
    /// Translation `s` of the shifted-profile family.
    pub shift: f64,
    pub mass_mode: MassMode,
    /// Number of bumps of the random-bumps family.
    pub count: usize,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        Self {
            family: Family::None,
            target: Target::U,
            amplitude: 0.0,
            width: 1.0,
            center: 0.0,
            shift: 0.0,
            mass_mode: MassMode::Free,
            count: 4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Conservation discrepancy accepted by the acceptance report.
    pub conservation: f64,
    /// `|Xdot(t_final)|` accepted by the decay verdict.
    pub xdot_final: f64,
    /// Perturbation level treated as "no perturbation" (family none).
    pub scheme_error: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            conservation: 1e-6,
            xdot_final: 1e-3,
            scheme_error: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    /// Write per-snapshot field files every `dump_every` time units.
    pub dump_every: Option<f64>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            dump_every: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub version: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub form: Form,
    pub endstates: EndStateSpec,
    pub grid: GridSpec,
    pub time: TimeSpec,
    #[serde(default)]
    pub perturbation: PerturbationSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub profile: ProfileParams,
    /// Reject domains too small for the run (see [`Config::margin`]).
    #[serde(default = "yes")]
    pub enforce_margin: bool,
}

fn yes() -> bool {
    true
}

/// Physical constants re-derived from the end states.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Derived {
    pub endstates: EndStates,
    pub constants: RelConstants,
    /// Slowest linearised tail decay rate of the profile.
    pub tail_rate: f64,
    pub grid: Grid,
}

/// Terms of the domain margin rule
/// `|sigma| T + perturbation reach + 10 / tail_rate < L`, measured from the
/// grid centre to the nearer boundary in the direction of travel.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Margin {
    pub travel: f64,
    pub perturbation: f64,
    pub tail: f64,
    pub available: f64,
}

impl Margin {
    pub fn ok(&self) -> bool {
        self.travel + self.perturbation + self.tail < self.available
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.derive()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn half_width(&self, es: &EndStates) -> f64 {
        self.grid.half_width.unwrap_or(60.0 / es.delta_s)
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            safety: self.time.safety,
            observe_every: self.time.observe_every,
        }
    }

    /// Validates every invariant and returns the derived constants. All
    /// violations are reported together.
    pub fn derive(&self) -> Result<Derived> {
        let mut errs = Vec::new();
        if self.version != CONFIG_VERSION {
            errs.push(format!("unsupported config version {} (expected {CONFIG_VERSION})", self.version));
        }
        let e = &self.endstates;
        if !(e.v_minus > 0.0) || !(e.v_plus > 0.0) {
            errs.push(format!("positivity: volumes must be positive (v_minus = {}, v_plus = {})", e.v_minus, e.v_plus));
        } else if !(e.v_minus < e.v_plus) {
            errs.push(format!("Lax condition: need v_minus < v_plus (v_minus = {}, v_plus = {})", e.v_minus, e.v_plus));
        }
        if self.grid.n_cells < Grid::MIN_CELLS {
            errs.push(format!("grid: n_cells = {} below {}", self.grid.n_cells, Grid::MIN_CELLS));
        }
        if let Some(l) = self.grid.half_width {
            if !(l > 0.0) {
                errs.push(format!("grid: half_width must be positive, got {l}"));
            }
        }
        let t = &self.time;
        if !(t.t_final > 0.0) {
            errs.push(format!("time: t_final must be positive, got {}", t.t_final));
        }
        if !(t.safety > 0.0 && t.safety <= 1.0) {
            errs.push(format!("time: safety must lie in (0, 1], got {}", t.safety));
        }
        if !(t.observe_every > 0.0) {
            errs.push(format!("time: observe_every must be positive, got {}", t.observe_every));
        }
        let p = &self.perturbation;
        if !(p.width > 0.0) {
            errs.push(format!("perturbation: width must be positive, got {}", p.width));
        }
        if !p.amplitude.is_finite() {
            errs.push("perturbation: amplitude must be finite".into());
        }
        if p.family == Family::RandomBumps && p.count == 0 {
            errs.push("perturbation: random-bumps needs count >= 1".into());
        }
        if !errs.is_empty() {
            return Err(Error::Validation(errs));
        }
        let es = shock_speed(e.v_minus, e.u_minus, e.v_plus)?;
        if es.delta_s > self.profile.delta_ceiling {
            errs.push(format!(
                "shock strength {} exceeds the ceiling {}",
                es.delta_s, self.profile.delta_ceiling
            ));
        }
        let left = ode::spectrum(es.left_rest(), &es).slowest_rate(true);
        let right = ode::spectrum(es.right_rest(), &es).slowest_rate(false);
        let tail_rate = match (left, right) {
            (Some(a), Some(b)) => a.min(b),
            _ => {
                errs.push("profile: rest points lack the expected unstable/stable directions".into());
                f64::NAN
            }
        };
        let grid = Grid::centered(self.half_width(&es), self.grid.n_cells.max(Grid::MIN_CELLS), self.grid.center)?;
        let derived = Derived {
            endstates: es,
            constants: RelConstants::new(&es),
            tail_rate,
            grid,
        };
        if self.enforce_margin && tail_rate.is_finite() {
            let m = self.margin(&derived);
            if !m.ok() {
                errs.push(format!(
                    "margin rule: travel {:.3} + perturbation {:.3} + tail {:.3} must be below {:.3}",
                    m.travel, m.perturbation, m.tail, m.available
                ));
            }
        }
        if !errs.is_empty() {
            return Err(Error::Validation(errs));
        }
        Ok(derived)
    }

    pub fn margin(&self, d: &Derived) -> Margin {
        let es = &d.endstates;
        let travel = es.sigma.abs() * self.time.t_final;
        let reach = super::perturb::reach(&self.perturbation);
        let available = if es.sigma >= 0.0 {
            d.grid.right()
        } else {
            -d.grid.left()
        };
        Margin {
            travel,
            perturbation: reach,
            tail: 10.0 / d.tail_rate,
            available,
        }
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<Config> {
    let text = std::fs::read_to_string(path.as_ref())?;
    Config::from_toml(&text)
}
