//! Multi-run studies: refinement of the traveling wave, amplitude sweeps,
//! and the elliptic-ratio ensemble.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Config, Derived, EndStateSpec, Family, GridSpec, PerturbationSpec, TimeSpec};
use super::experiment::{run_with_profile, ExperimentResult};
use super::perturb::{bumps_field, random_bumps};
use crate::error::Result;
use crate::evolve::{self, conservation_report, ConservationReport, FnObserver, Form, RunOptions, Stepper};
use crate::grid::Grid;
use crate::poisson::solve_phi;
use crate::profile::ShockProfile;
use crate::relent::elliptic_ratio;

/// Profile initial data evolved to `t_final` without perturbation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TravelingWaveRun {
    pub n_cells: usize,
    pub form: Form,
    pub t_final: f64,
    /// `max_i max(|v - vbar(x_i - sigma T)|, |u - ubar(x_i - sigma T)|)`
    pub sup_error: f64,
    pub conservation: ConservationReport,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
}

/// Runs on `[-L, L]` with `L = half_width_scaled / delta_S`.
pub fn traveling_wave_run(
    profile: &ShockProfile,
    half_width_scaled: f64,
    n_cells: usize,
    t_final: f64,
    form: Form,
) -> Result<TravelingWaveRun> {
    let es = &profile.endstates;
    let grid = Grid::new(half_width_scaled / es.delta_s, n_cells)?;
    let s = profile.sample_on_grid(&grid, 0.0, 0.0);
    let initial = evolve::State::new(s.v, s.u, 0.0)?;
    let mut stepper = Stepper::new(grid, form);
    let opts = RunOptions {
        safety: 0.4,
        observe_every: t_final,
    };
    let mut noop = FnObserver(|_: &evolve::State, _: &crate::PhiField, _: &evolve::FluxHistory| Ok(()));
    let out = evolve::run(initial.clone(), &mut stepper, t_final, &opts, &mut noop).map_err(|f| f.error)?;
    let exact = profile.sample_on_grid(&grid, t_final, 0.0);
    let sup_error = (0..grid.n_nodes())
        .map(|i| (out.state.v[i] - exact.v[i]).abs().max((out.state.u[i] - exact.u[i]).abs()))
        .fold(0.0, f64::max);
    Ok(TravelingWaveRun {
        n_cells,
        form,
        t_final,
        sup_error,
        conservation: conservation_report(&initial, &out.state, &out.flux, &grid),
        v: out.state.v,
        u: out.state.u,
    })
}

/// Sup-norm distance between two runs on the same grid.
pub fn sup_difference(a: &TravelingWaveRun, b: &TravelingWaveRun) -> f64 {
    a.v.iter()
        .zip(&b.v)
        .chain(a.u.iter().zip(&b.u))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// The reference decay setup: endstates `(1, 0, 1.2)`, Gaussian `u`
/// perturbation of width 5 on the shock, domain `[-400, 400]`.
pub fn decay_config(amplitude: f64, n_cells: usize, t_final: f64) -> Config {
    Config {
        version: super::config::CONFIG_VERSION,
        name: format!("decay-A{amplitude}-N{n_cells}"),
        seed: 0,
        form: Form::Divergence,
        endstates: EndStateSpec {
            v_minus: 1.0,
            u_minus: 0.0,
            v_plus: 1.2,
        },
        grid: GridSpec {
            half_width: Some(400.0),
            n_cells,
            center: 0.0,
        },
        time: TimeSpec {
            t_final,
            safety: 0.4,
            observe_every: 1.0,
        },
        perturbation: PerturbationSpec {
            family: Family::Gaussian,
            amplitude,
            width: 5.0,
            ..PerturbationSpec::default()
        },
        tolerances: Default::default(),
        output: Default::default(),
        profile: Default::default(),
        enforce_margin: true,
    }
}

/// Runs the configs in parallel against one shared profile.
pub fn sweep(configs: &[Config], derived: &Derived, profile: &ShockProfile) -> Vec<Result<ExperimentResult>> {
    configs.par_iter().map(|c| run_with_profile(c, derived, profile)).collect()
}

/// `||phi~||_{H1} / ||v~||_{L2}` for `count` seeded compact bumps `v~` added
/// to the profile, with `phi~` the difference of the two Poisson solutions.
pub fn elliptic_ensemble(profile: &ShockProfile, grid: &Grid, count: usize, seed: u64) -> Result<Vec<f64>> {
    let es = &profile.endstates;
    let xs = grid.nodes();
    let base = profile.sample_on_grid(grid, 0.0, 0.0);
    let bc = (es.phi_minus, es.phi_plus);
    let phi0 = solve_phi(&base.v, grid, bc, None)?;
    (0..count)
        .into_par_iter()
        .map(|k| {
            let bumps = random_bumps(seed.wrapping_add(k as u64), 1, 0.02, 0.0, 20.0);
            let vt = bumps_field(&bumps, &xs);
            let v: Vec<f64> = base.v.iter().zip(&vt).map(|(a, b)| a + b).collect();
            let phi = solve_phi(&v, grid, bc, Some(&phi0.phi))?;
            let pt: Vec<f64> = phi.phi.iter().zip(&phi0.phi).map(|(a, b)| a - b).collect();
            elliptic_ratio(&pt, &vt, grid, 1)
        })
        .collect()
}
