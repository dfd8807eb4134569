//! Method-of-lines evolution of the Cauchy problem on a truncated domain.
//!
//! Second-order central differences in space, SSP-RK2 (Heun) in time, and
//! the Poisson constraint re-solved at every stage with a warm start. The
//! end nodes hold the far-field data and are never updated.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, check_positive, Error, Result};
use crate::grid::Grid;
use crate::poisson::{self, NewtonOptions, PhiField};
use crate::{p_tilde, pressure};

/// Which momentum equation is discretised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    /// `u_t = -p(v)_x + (u_x/v)_x - phi_x/v`
    Primitive,
    /// `u_t = -p~(v)_x + (u_x/v)_x + Phi(v, phi)_x`
    #[default]
    Divergence,
}

impl std::str::FromStr for Form {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "primitive" => Ok(Form::Primitive),
            "divergence" => Ok(Form::Divergence),
            other => Err(Error::InvalidArgument(format!(
                "unknown form '{other}' (expected primitive|divergence)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub t: f64,
}

impl State {
    pub fn new(v: Vec<f64>, u: Vec<f64>, t: f64) -> Result<Self> {
        check_len(v.len(), u.len())?;
        check_positive(&v)?;
        Ok(Self { v, u, t })
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    /// Quasi-neutral Dirichlet data `-ln v` at the two end nodes.
    pub fn phi_bc(&self) -> (f64, f64) {
        (-self.v[0].ln(), -self.v[self.v.len() - 1].ln())
    }

    pub fn min_v(&self) -> f64 {
        self.v.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Time integrals of the boundary fluxes: `int (u_R - u_L) dt` for the
/// mass and `int (F_R - F_L) dt` with `F = -p~(v) + u_x/v + Phi` for the
/// momentum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FluxHistory {
    pub mass: f64,
    pub momentum: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub delta_mass: f64,
    pub delta_momentum: f64,
}

/// Explicit timestep bound
/// `safety * min(dx^2 min(v) / 2, dx / (sqrt(2)/min(v) + |frame_speed|))`.
pub fn cfl_dt(state: &State, grid: &Grid, safety: f64) -> Result<f64> {
    cfl_dt_moving(state, grid, safety, 0.0)
}

pub fn cfl_dt_moving(state: &State, grid: &Grid, safety: f64, frame_speed: f64) -> Result<f64> {
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(Error::InvalidArgument(format!("CFL safety must lie in (0, 1], got {safety}")));
    }
    check_positive(&state.v)?;
    let vmin = state.min_v();
    let dx = grid.dx();
    let parabolic = dx * dx * vmin / 2.0;
    let hyperbolic = dx / (2f64.sqrt() / vmin + frame_speed.abs());
    Ok(safety * parabolic.min(hyperbolic))
}

/// One RK stage as seen by a [`StageHook`].
pub struct StageView<'a> {
    pub stage: usize,
    pub time: f64,
    pub dt: f64,
    pub state: &'a State,
    pub phi: &'a PhiField,
}

/// Callbacks from inside the time stepper. Stage `0` is the state at the
/// start of the step (time `t`), stage `1` the Euler predictor (time
/// `t + dt`).
pub trait StageHook {
    fn stage(&mut self, _view: &StageView<'_>) -> Result<()> {
        Ok(())
    }
}

impl StageHook for () {}

/// Reusable stepper holding the spatial operator configuration and the
/// warm-start potential.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub grid: Grid,
    pub form: Form,
    /// Speed of the moving frame `xi = x - c t`; zero for the lab frame.
    pub frame_speed: f64,
    pub newton: NewtonOptions,
    phi_cache: Option<Vec<f64>>,
    max_newton_iters: usize,
}

/// Result of a single step.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub state: State,
    pub flux: FluxHistory,
    pub newton_iters: usize,
}

impl Stepper {
    pub fn new(grid: Grid, form: Form) -> Self {
        Self {
            grid,
            form,
            frame_speed: 0.0,
            newton: NewtonOptions::default(),
            phi_cache: None,
            max_newton_iters: 0,
        }
    }

    pub fn with_frame_speed(mut self, c: f64) -> Self {
        self.frame_speed = c;
        self
    }

    /// Largest Newton count seen in any stage solve so far.
    pub fn max_newton_iters(&self) -> usize {
        self.max_newton_iters
    }

    /// Potential for `state`, warm-started from the last solve.
    pub fn solve_phi(&mut self, state: &State) -> Result<PhiField> {
        let guess = self.phi_cache.as_deref().filter(|g| g.len() == state.len());
        let sol = poisson::solve_phi_with(&state.v, &self.grid, state.phi_bc(), guess, &self.newton)?;
        self.max_newton_iters = self.max_newton_iters.max(sol.newton_iters);
        if sol.newton_iters > 8 && guess.is_some() {
            log::warn!(
                "warm-started Poisson solve needed {} Newton iterations at t = {}",
                sol.newton_iters,
                state.t
            );
        }
        self.phi_cache = Some(sol.phi.clone());
        Ok(sol)
    }

    /// Semi-discrete right-hand side `(v_t, u_t)` and the boundary fluxes
    /// `(u_R - u_L, F_R - F_L)`.
    pub fn rhs(&self, state: &State, phi: &[f64]) -> (Vec<f64>, Vec<f64>, [f64; 2]) {
        let n = state.len();
        let dx = self.grid.dx();
        let inv2dx = 0.5 / dx;
        let inv_dx2 = 1.0 / (dx * dx);
        let (v, u) = (&state.v, &state.u);
        let c = self.frame_speed;
        let mut dv = vec![0.0; n];
        let mut du = vec![0.0; n];
        let force = match self.form {
            Form::Divergence => {
                let (e, k) = poisson::field_and_gradient(v, phi, dx);
                Some(
                    (0..n)
                        .map(|i| 0.5 * e[i] * e[i] - k[i] / v[i])
                        .collect::<Vec<f64>>(),
                )
            }
            Form::Primitive => None,
        };
        for i in 1..n - 1 {
            let ux = (u[i + 1] - u[i - 1]) * inv2dx;
            dv[i] = ux + c * (v[i + 1] - v[i - 1]) * inv2dx;
            let visc = poisson::flux_div(v, u, i, inv_dx2);
            let mut ut = visc + c * ux;
            match &force {
                Some(f) => {
                    ut += -(p_tilde(v[i + 1]) - p_tilde(v[i - 1])) * inv2dx + (f[i + 1] - f[i - 1]) * inv2dx;
                }
                None => {
                    ut += -(pressure(v[i + 1]) - pressure(v[i - 1])) * inv2dx
                        - (phi[i + 1] - phi[i - 1]) * inv2dx / v[i];
                }
            }
            du[i] = ut;
        }
        let mass_flux = u[n - 1] - u[0];
        let boundary_flux = |idx: usize, ux: f64| -> f64 {
            let phi_force = match &force {
                Some(f) => f[idx],
                None => {
                    let (e, k) = poisson::field_and_gradient(v, phi, dx);
                    0.5 * e[idx] * e[idx] - k[idx] / v[idx]
                }
            };
            -p_tilde(v[idx]) + ux / v[idx] + phi_force
        };
        let ux_l = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dx);
        let ux_r = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * dx);
        let momentum_flux = boundary_flux(n - 1, ux_r) - boundary_flux(0, ux_l);
        (dv, du, [mass_flux, momentum_flux])
    }

    /// One SSP-RK2 step without stage callbacks.
    pub fn step(&mut self, state: &State, dt: f64) -> Result<StepOutput> {
        self.step_with(state, dt, &mut ())
    }

    /// One SSP-RK2 step; `hook` sees both stage states with their potentials.
    pub fn step_with(&mut self, state: &State, dt: f64, hook: &mut dyn StageHook) -> Result<StepOutput> {
        let n = state.len();
        check_len(self.grid.n_nodes(), n)?;
        let phi0 = self.solve_phi(state)?;
        hook.stage(&StageView {
            stage: 0,
            time: state.t,
            dt,
            state,
            phi: &phi0,
        })?;
        let (dv0, du0, f0) = self.rhs(state, &phi0.phi);
        let mut s1 = state.clone();
        for i in 1..n - 1 {
            s1.v[i] += dt * dv0[i];
            s1.u[i] += dt * du0[i];
        }
        s1.t = state.t + dt;
        check_positive(&s1.v)?;
        let phi1 = self.solve_phi(&s1)?;
        hook.stage(&StageView {
            stage: 1,
            time: s1.t,
            dt,
            state: &s1,
            phi: &phi1,
        })?;
        let (dv1, du1, f1) = self.rhs(&s1, &phi1.phi);
        let mut out = state.clone();
        for i in 1..n - 1 {
            out.v[i] = 0.5 * state.v[i] + 0.5 * (s1.v[i] + dt * dv1[i]);
            out.u[i] = 0.5 * state.u[i] + 0.5 * (s1.u[i] + dt * du1[i]);
        }
        out.t = state.t + dt;
        check_positive(&out.v)?;
        Ok(StepOutput {
            state: out,
            flux: FluxHistory {
                mass: 0.5 * dt * (f0[0] + f1[0]),
                momentum: 0.5 * dt * (f0[1] + f1[1]),
            },
            newton_iters: phi0.newton_iters.max(phi1.newton_iters),
        })
    }
}

/// One SSP-RK2 step of `state` in the lab frame.
pub fn step(state: &State, grid: &Grid, dt: f64, form: Form) -> Result<State> {
    Stepper::new(*grid, form).step(state, dt).map(|o| o.state)
}

/// Receives the state at every observation time.
pub trait Observer: StageHook {
    fn observe(&mut self, state: &State, phi: &PhiField, flux: &FluxHistory) -> Result<()>;

    /// Called after every accepted step.
    fn step_done(&mut self, _state: &State, _dt: f64) -> Result<()> {
        Ok(())
    }
}

/// Adapter turning a closure into an [`Observer`].
pub struct FnObserver<F>(pub F);

impl<F> StageHook for FnObserver<F> {}

impl<F> Observer for FnObserver<F>
where
    F: FnMut(&State, &PhiField, &FluxHistory) -> Result<()>,
{
    fn observe(&mut self, state: &State, phi: &PhiField, flux: &FluxHistory) -> Result<()> {
        (self.0)(state, phi, flux)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RunOptions {
    pub safety: f64,
    /// Time between observer calls; steps are shortened to land on them.
    pub observe_every: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            safety: 0.4,
            observe_every: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub state: State,
    pub flux: FluxHistory,
    pub steps: usize,
    pub max_newton_iters: usize,
}

/// Runs up to `t_final`, partial results included when a step fails.
#[derive(Debug)]
pub struct RunFailure {
    pub error: Error,
    pub last: RunOutput,
}

/// Advances `initial` to `t_final` with adaptive `dt = cfl_dt`, calling the
/// observer at `t = initial.t`, every `observe_every`, and at `t_final`.
pub fn run(
    initial: State,
    stepper: &mut Stepper,
    t_final: f64,
    opts: &RunOptions,
    observer: &mut dyn Observer,
) -> std::result::Result<RunOutput, RunFailure> {
    let mut out = RunOutput {
        state: initial,
        flux: FluxHistory::default(),
        steps: 0,
        max_newton_iters: 0,
    };
    let fail = |error: Error, out: RunOutput| RunFailure { error, last: out };
    if !(t_final >= out.state.t) || !(opts.observe_every > 0.0) {
        let e = Error::InvalidArgument(format!(
            "need t_final >= t0 and a positive observation interval (t_final = {t_final})"
        ));
        return Err(fail(e, out));
    }
    let t0 = out.state.t;
    let observe = |stepper: &mut Stepper, out: &RunOutput, obs: &mut dyn Observer| -> Result<()> {
        let phi = stepper.solve_phi(&out.state)?;
        obs.observe(&out.state, &phi, &out.flux)
    };
    if let Err(e) = observe(stepper, &out, observer) {
        return Err(fail(e, out));
    }
    let mut k_obs = 1usize;
    let time_eps = 1e-12 * t_final.abs().max(1.0);
    while out.state.t < t_final - time_eps {
        let next_obs = (t0 + k_obs as f64 * opts.observe_every).min(t_final);
        let dt_cfl = match cfl_dt_moving(&out.state, &stepper.grid, opts.safety, stepper.frame_speed) {
            Ok(dt) => dt,
            Err(e) => return Err(fail(e, out)),
        };
        let remaining = next_obs - out.state.t;
        // avoid a sliver step right before an observation time
        let dt = if remaining <= dt_cfl * 1.000001 {
            remaining
        } else if remaining < 2.0 * dt_cfl {
            0.5 * remaining
        } else {
            dt_cfl
        };
        let step = match stepper.step_with(&out.state, dt, observer) {
            Ok(s) => s,
            Err(e) => return Err(fail(e, out)),
        };
        out.state = step.state;
        if dt == remaining {
            out.state.t = next_obs;
        }
        out.flux.mass += step.flux.mass;
        out.flux.momentum += step.flux.momentum;
        out.steps += 1;
        out.max_newton_iters = out.max_newton_iters.max(step.newton_iters);
        if let Err(e) = observer.step_done(&out.state, dt) {
            return Err(fail(e, out));
        }
        if out.state.t >= next_obs - time_eps {
            k_obs += 1;
            if let Err(e) = observe(stepper, &out, observer) {
                return Err(fail(e, out));
            }
        }
    }
    Ok(out)
}

/// Change of `int v` and `int u` net of the accumulated boundary fluxes.
pub fn conservation_report(initial: &State, last: &State, flux: &FluxHistory, grid: &Grid) -> ConservationReport {
    let mass = grid.integrate(&last.v) - grid.integrate(&initial.v);
    let momentum = grid.integrate(&last.u) - grid.integrate(&initial.u);
    ConservationReport {
        delta_mass: mass - flux.mass,
        delta_momentum: momentum - flux.momentum,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_state(g: &Grid, v0: f64, u0: f64) -> State {
        State::new(vec![v0; g.n_nodes()], vec![u0; g.n_nodes()], 0.0).unwrap()
    }

    #[test]
    fn cfl_hand_value_and_scalings() {
        let g = Grid::new(1.6, 32).unwrap();
        assert!((g.dx() - 0.1).abs() < 1e-15);
        let s = constant_state(&g, 1.0, 0.0);
        let dt = cfl_dt(&s, &g, 0.4).unwrap();
        assert!((dt - 0.002).abs() < 1e-15);
        let s2 = constant_state(&g, 2.0, 0.0);
        assert!((cfl_dt(&s2, &g, 0.4).unwrap() - 2.0 * dt).abs() < 1e-15);
        let g2 = g.refined(2);
        assert!((cfl_dt(&constant_state(&g2, 1.0, 0.0), &g2, 0.4).unwrap() - dt / 4.0).abs() < 1e-15);
        assert!(cfl_dt(&s, &g, 0.0).is_err());
        assert!(cfl_dt(&s, &g, 1.5).is_err());
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let g = Grid::new(10.0, 100).unwrap();
        for form in [Form::Primitive, Form::Divergence] {
            let s = constant_state(&g, 1.25, -0.3);
            let dt = cfl_dt(&s, &g, 0.4).unwrap();
            let out = step(&s, &g, dt, form).unwrap();
            for i in 0..g.n_nodes() {
                assert!((out.v[i] - 1.25).abs() < 1e-14);
                assert!((out.u[i] + 0.3).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_length_run_observes_once() {
        let g = Grid::new(10.0, 64).unwrap();
        let s = constant_state(&g, 1.0, 0.0);
        let mut calls = 0;
        let mut stepper = Stepper::new(g, Form::Divergence);
        let out = {
            let mut obs = FnObserver(|_: &State, _: &PhiField, _: &FluxHistory| {
                calls += 1;
                Ok(())
            });
            run(s.clone(), &mut stepper, 0.0, &RunOptions::default(), &mut obs).unwrap()
        };
        assert_eq!(out.state, s);
        assert_eq!(out.steps, 0);
        assert_eq!(calls, 1);
    }

    #[test]
    fn observer_lands_on_requested_times() {
        let g = Grid::new(10.0, 64).unwrap();
        let v: Vec<f64> = g.nodes().iter().map(|x| 1.0 + 0.05 * (-(x * x)).exp()).collect();
        let s = State::new(v, vec![0.0; g.n_nodes()], 0.0).unwrap();
        let mut times = Vec::new();
        let mut stepper = Stepper::new(g, Form::Divergence);
        let opts = RunOptions {
            safety: 0.4,
            observe_every: 0.25,
        };
        {
            let mut obs = FnObserver(|st: &State, _: &PhiField, _: &FluxHistory| {
                times.push(st.t);
                Ok(())
            });
            run(s, &mut stepper, 1.0, &opts, &mut obs).unwrap();
        }
        assert_eq!(times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn equilibrium_conserves_exactly() {
        let g = Grid::new(10.0, 64).unwrap();
        let s = constant_state(&g, 1.0, 0.5);
        let mut stepper = Stepper::new(g, Form::Divergence);
        let mut obs = FnObserver(|_: &State, _: &PhiField, _: &FluxHistory| Ok(()));
        let out = run(s.clone(), &mut stepper, 0.5, &RunOptions::default(), &mut obs).unwrap();
        let rep = conservation_report(&s, &out.state, &out.flux, &g);
        assert!(rep.delta_mass.abs() < 1e-13);
        assert!(rep.delta_momentum.abs() < 1e-13);
    }

    #[test]
    fn mass_is_conserved_for_a_localised_pulse() {
        let g = Grid::new(30.0, 300).unwrap();
        let v: Vec<f64> = g.nodes().iter().map(|x| 1.0 + 0.1 * (-(x * x) / 4.0).exp()).collect();
        let u: Vec<f64> = g.nodes().iter().map(|x| 0.05 * (-(x - 1.0) * (x - 1.0)).exp()).collect();
        let s = State::new(v, u, 0.0).unwrap();
        let mut stepper = Stepper::new(g, Form::Divergence);
        let mut obs = FnObserver(|_: &State, _: &PhiField, _: &FluxHistory| Ok(()));
        let out = run(s.clone(), &mut stepper, 2.0, &RunOptions::default(), &mut obs).unwrap();
        let rep = conservation_report(&s, &out.state, &out.flux, &g);
        assert!(rep.delta_mass.abs() < 1e-10, "{rep:?}");
        assert!(rep.delta_momentum.abs() < 1e-10, "{rep:?}");
        assert!(stepper.max_newton_iters() <= 8);
    }

    #[test]
    fn collapsing_volume_is_reported() {
        let g = Grid::new(5.0, 50).unwrap();
        let mut v = vec![1.0; g.n_nodes()];
        v[25] = 0.05;
        let u: Vec<f64> = g.nodes().iter().map(|x| -5.0 * x.signum() * (-(x * x)).exp()).collect();
        let s = State::new(v, u, 0.0).unwrap();
        let r = step(&s, &g, 0.2, Form::Primitive);
        assert!(matches!(r, Err(Error::NonPositiveVolume { .. })), "{r:?}");
    }
}
