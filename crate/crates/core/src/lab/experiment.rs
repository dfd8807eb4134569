//! Coupled PDE + shift runs with per-observation diagnostics.

use serde::{Deserialize, Serialize};

use super::config::{Config, Derived, Family};
use super::perturb::make_initial;
use crate::error::Result;
use crate::evolve::{self, conservation_report, FluxHistory, Observer, StageHook, StageView, State, Stepper};
use crate::grid::Grid;
use crate::poisson::PhiField;
use crate::profile::{solve_profile, ShockProfile, SolverMeta};
use crate::relent::{eta_from_perturbation, good_terms, seminorm_sq, sobolev_norm, Perturbation};
use crate::shift::{advance_shift, shift_rate, shifted_frame, ShiftState};

/// One row of the diagnostics series. Column order is the CSV header.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub x: f64,
    pub xdot: f64,
    pub v_linf: f64,
    pub v_l2: f64,
    pub v_h1: f64,
    pub v_h2: f64,
    pub u_linf: f64,
    pub u_l2: f64,
    pub u_h1: f64,
    pub u_h2: f64,
    pub phi_h1: f64,
    pub phi_h2: f64,
    pub phi_h3: f64,
    /// `||(v~, u~, phi~)||_{H2}^2`
    pub pert_h2_sq: f64,
    pub eta_weighted: f64,
    pub eta_plain: f64,
    pub quad_norm: f64,
    pub entsim_min: f64,
    pub entsim_max: f64,
    pub g1: f64,
    pub gs: f64,
    pub d: f64,
    /// `delta_S Xdot^2 + G1 + GS + D`
    pub dissipation: f64,
    /// Trapezoidal time integral of `dissipation` over the observations.
    pub cumulative: f64,
    /// `||(v~_x, u~_x, phi~_x)||_{L2}^2`
    pub g: f64,
    pub cumulative_g: f64,
    pub delta_mass: f64,
    pub delta_momentum: f64,
    pub newton_iters: usize,
    /// `||phi~||_{H1} / ||v~||_{L2}`, NaN when `v~ = 0`.
    pub elliptic_ratio: f64,
}

/// Nodal fields at one observation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldDump {
    pub t: f64,
    pub x_shift: f64,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub phi: Vec<f64>,
    pub vbar: Vec<f64>,
    pub ubar: Vec<f64>,
    pub phibar: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum RunStatus {
    Completed,
    Aborted { t: f64, reason: String },
}

/// Run-level measured constants; `None` where undefined.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalConstants {
    /// `max_t [||pert||_{H2}^2 + cumulative] / ||pert(0)||_{H2}^2`
    pub c_emp: Option<f64>,
    /// `max_t |Xdot| / ||u~||_{Linf}`
    pub c_shift: Option<f64>,
    pub entsim_c: Option<f64>,
    pub entsim_cap: Option<f64>,
    pub elliptic_max: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: Config,
    pub derived: Derived,
    pub profile_meta: SolverMeta,
    pub status: RunStatus,
    pub steps: usize,
    pub max_newton_iters: usize,
    /// `||(v0 - vbar, u0 - ubar)||_{H2}^2`
    pub initial_h2_sq: f64,
    pub initial_mass: f64,
    pub records: Vec<DiagnosticsRecord>,
    pub constants: EmpiricalConstants,
    #[serde(skip)]
    pub dumps: Vec<FieldDump>,
}

impl ExperimentResult {
    pub fn completed(&self) -> bool {
        self.status == RunStatus::Completed
    }

    pub fn last(&self) -> Option<&DiagnosticsRecord> {
        self.records.last()
    }
}

/// Builds the profile and runs the configured experiment.
pub fn run_experiment(config: &Config) -> Result<ExperimentResult> {
    let derived = config.derive()?;
    let profile = solve_profile(&derived.endstates, &config.profile)?;
    run_with_profile(config, &derived, &profile)
}

/// Runs against a prebuilt profile (sweeps share one).
pub fn run_with_profile(config: &Config, derived: &Derived, profile: &ShockProfile) -> Result<ExperimentResult> {
    let grid = derived.grid;
    let initial = make_initial(profile, &grid, &config.perturbation, config.seed)?;
    let frame0 = shifted_frame(profile, 0.0, 0.0, &grid);
    let vt: Vec<f64> = initial.v.iter().zip(&frame0.vbar_x).map(|(a, b)| a - b).collect();
    let ut: Vec<f64> = initial.u.iter().zip(&frame0.ubar_x).map(|(a, b)| a - b).collect();
    let initial_h2_sq = sobolev_norm(&[&vt, &ut], 2, &grid)?.powi(2);
    let initial_mass = grid.integrate(&ut) + grid.integrate(&vt);

    let mut tracker = Tracker::new(profile, grid, derived, initial.clone(), config.output.dump_every);
    let mut stepper = Stepper::new(grid, config.form);
    let outcome = evolve::run(
        initial,
        &mut stepper,
        config.time.t_final,
        &config.run_options(),
        &mut tracker,
    );
    let (status, steps, max_newton) = match outcome {
        Ok(out) => (RunStatus::Completed, out.steps, out.max_newton_iters),
        Err(fail) => {
            log::warn!("run aborted at t = {}: {}", fail.last.state.t, fail.error);
            (
                RunStatus::Aborted {
                    t: fail.last.state.t,
                    reason: fail.error.to_string(),
                },
                fail.last.steps,
                fail.last.max_newton_iters,
            )
        }
    };
    if let Some(e) = tracker.error.take() {
        return Err(e);
    }
    let constants = empirical_constants(&tracker.records, initial_h2_sq);
    Ok(ExperimentResult {
        config: config.clone(),
        derived: *derived,
        profile_meta: profile.meta.clone(),
        status,
        steps,
        max_newton_iters: max_newton,
        initial_h2_sq,
        initial_mass,
        records: tracker.records,
        constants,
        dumps: tracker.dumps,
    })
}

pub fn empirical_constants(records: &[DiagnosticsRecord], initial_h2_sq: f64) -> EmpiricalConstants {
    let finite_max = |it: &mut dyn Iterator<Item = f64>| {
        it.filter(|x| x.is_finite()).fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x))))
    };
    let finite_min = |it: &mut dyn Iterator<Item = f64>| {
        it.filter(|x| x.is_finite()).fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.min(x))))
    };
    let c_emp = if initial_h2_sq > 0.0 {
        finite_max(&mut records.iter().map(|r| (r.pert_h2_sq + r.cumulative) / initial_h2_sq))
    } else {
        None
    };
    EmpiricalConstants {
        c_emp,
        c_shift: finite_max(&mut records.iter().filter(|r| r.u_linf > 1e-14).map(|r| r.xdot.abs() / r.u_linf)),
        entsim_c: finite_min(&mut records.iter().map(|r| r.entsim_min)),
        entsim_cap: finite_max(&mut records.iter().map(|r| r.entsim_max)),
        elliptic_max: finite_max(&mut records.iter().map(|r| r.elliptic_ratio)),
    }
}

/// Advances the shift alongside the fields and assembles records.
struct Tracker<'a> {
    profile: &'a ShockProfile,
    grid: Grid,
    derived: &'a Derived,
    initial: State,
    shift: ShiftState,
    x0: f64,
    rates: [f64; 2],
    records: Vec<DiagnosticsRecord>,
    dump_every: Option<f64>,
    next_dump: f64,
    dumps: Vec<FieldDump>,
    error: Option<crate::Error>,
}

impl<'a> Tracker<'a> {
    fn new(profile: &'a ShockProfile, grid: Grid, derived: &'a Derived, initial: State, dump_every: Option<f64>) -> Self {
        Self {
            profile,
            grid,
            derived,
            initial,
            shift: ShiftState::new(),
            x0: 0.0,
            rates: [0.0; 2],
            records: Vec::new(),
            dump_every,
            next_dump: 0.0,
            dumps: Vec::new(),
            error: None,
        }
    }

    fn rate(&self, state: &State, t: f64, x: f64) -> Result<f64> {
        let frame = shifted_frame(self.profile, t, x, &self.grid);
        shift_rate(&state.u, &frame, self.profile, &self.grid)
    }

    fn record(&mut self, state: &State, phi: &PhiField, flux: &FluxHistory) -> Result<DiagnosticsRecord> {
        let grid = &self.grid;
        let es = &self.derived.endstates;
        let frame = shifted_frame(self.profile, state.t, self.shift.x, grid);
        let xdot = shift_rate(&state.u, &frame, self.profile, grid)?;
        self.shift.xdot = xdot;
        self.shift.record(state.t);
        let p = Perturbation::new(state, &phi.phi, &frame, grid)?;
        let linf = |f: &[f64]| f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let norm = |f: &[f64], k: usize| sobolev_norm(&[f], k, grid);
        let (v_h2, u_h2, phi_h2) = (norm(&p.v, 2)?, norm(&p.u, 2)?, norm(&p.phi, 2)?);
        let v_l2 = norm(&p.v, 0)?;
        let phi_h1 = norm(&p.phi, 1)?;
        let eta = eta_from_perturbation(state, &p, &frame, grid)?;
        let good = good_terms(state, &frame, grid, es, &self.derived.constants)?;
        let dissipation = es.delta_s * xdot * xdot + good.g1 + good.gs + good.d;
        let g = seminorm_sq(&p.v, 1, grid) + seminorm_sq(&p.u, 1, grid) + seminorm_sq(&p.phi, 1, grid);
        let (cumulative, cumulative_g) = match self.records.last() {
            Some(prev) => {
                let h = state.t - prev.t;
                (
                    prev.cumulative + 0.5 * h * (prev.dissipation + dissipation),
                    prev.cumulative_g + 0.5 * h * (prev.g + g),
                )
            }
            None => (0.0, 0.0),
        };
        let cons = conservation_report(&self.initial, state, flux, grid);
        let rec = DiagnosticsRecord {
            t: state.t,
            x: self.shift.x,
            xdot,
            v_linf: linf(&p.v),
            v_l2,
            v_h1: norm(&p.v, 1)?,
            v_h2,
            u_linf: linf(&p.u),
            u_l2: norm(&p.u, 0)?,
            u_h1: norm(&p.u, 1)?,
            u_h2,
            phi_h1,
            phi_h2,
            phi_h3: norm(&p.phi, 3)?,
            pert_h2_sq: v_h2 * v_h2 + u_h2 * u_h2 + phi_h2 * phi_h2,
            eta_weighted: eta.eta_weighted,
            eta_plain: eta.eta_plain,
            quad_norm: eta.quad_norm,
            entsim_min: eta.ratio_min,
            entsim_max: eta.ratio_max,
            g1: good.g1,
            gs: good.gs,
            d: good.d,
            dissipation,
            cumulative,
            g,
            cumulative_g,
            delta_mass: cons.delta_mass,
            delta_momentum: cons.delta_momentum,
            newton_iters: phi.newton_iters,
            elliptic_ratio: if v_l2 > 0.0 { phi_h1 / v_l2 } else { f64::NAN },
        };
        if let Some(every) = self.dump_every {
            if state.t >= self.next_dump - 1e-9 * every {
                self.next_dump += every;
                self.dumps.push(FieldDump {
                    t: state.t,
                    x_shift: self.shift.x,
                    v: state.v.clone(),
                    u: state.u.clone(),
                    phi: phi.phi.clone(),
                    vbar: frame.vbar_x,
                    ubar: frame.ubar_x,
                    phibar: frame.phibar_x,
                });
            }
        }
        Ok(rec)
    }
}

impl StageHook for Tracker<'_> {
    fn stage(&mut self, view: &StageView<'_>) -> Result<()> {
        if view.stage == 0 {
            self.x0 = self.shift.x;
            self.rates[0] = self.rate(view.state, view.time, self.x0)?;
            self.shift.xdot = self.rates[0];
        } else {
            let x1 = self.x0 + view.dt * self.rates[0];
            self.rates[1] = self.rate(view.state, view.time, x1)?;
        }
        Ok(())
    }
}

impl Observer for Tracker<'_> {
    fn observe(&mut self, state: &State, phi: &PhiField, flux: &FluxHistory) -> Result<()> {
        match self.record(state, phi, flux) {
            Ok(r) => {
                self.records.push(r);
                Ok(())
            }
            Err(e) => {
                let msg = e.to_string();
                self.error = Some(e);
                Err(crate::Error::InvalidArgument(format!("diagnostics failed: {msg}")))
            }
        }
    }

    fn step_done(&mut self, _state: &State, dt: f64) -> Result<()> {
        let mut s = std::mem::take(&mut self.shift);
        s.x = self.x0;
        self.shift = advance_shift(s, self.rates, dt);
        Ok(())
    }
}

/// True for families that leave the initial data on the traveling wave.
pub fn is_unperturbed(config: &Config) -> bool {
    config.perturbation.family == Family::None
        || (config.perturbation.amplitude == 0.0 && config.perturbation.family != Family::ShiftedProfile)
}
