//! Fallback construction: evolve a smoothed step in the frame moving with
//! the shock until it stops changing.

use serde::{Deserialize, Serialize};

use super::{EndStates, ProfileMethod, ProfileParams, ShockProfile, SolverMeta};
use crate::error::{Error, Result};
use crate::evolve::{cfl_dt_moving, Form, State, Stepper};
use crate::grid::{diff1, Grid};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RelaxationParams {
    /// Domain half width in units of `1/delta_S`.
    pub half_width_scaled: f64,
    pub n_cells: usize,
    /// Time budget in units of `1/delta_S^2`.
    pub t_max_scaled: f64,
    /// Stop once `max |d(v,u)/dt|` falls below this.
    pub steady_tol: f64,
    pub safety: f64,
}

impl Default for RelaxationParams {
    fn default() -> Self {
        Self {
            half_width_scaled: 30.0,
            n_cells: 1200,
            t_max_scaled: 100.0,
            steady_tol: 1e-6,
            safety: 0.4,
        }
    }
}

pub(crate) fn relax_profile(es: &EndStates, params: &ProfileParams, reason: String) -> Result<ShockProfile> {
    let rp = &params.relaxation;
    let delta = es.delta_s;
    let grid = Grid::new(rp.half_width_scaled / delta, rp.n_cells)?;
    let xs = grid.nodes();
    let width = 2.0 / delta;
    let v: Vec<f64> = xs
        .iter()
        .map(|x| es.v_minus + 0.5 * (es.v_plus - es.v_minus) * (1.0 + (x / width).tanh()))
        .collect();
    let mut v = v;
    v[0] = es.v_minus;
    *v.last_mut().expect("nonempty") = es.v_plus;
    let u: Vec<f64> = v.iter().map(|&vi| es.u_of_v(vi)).collect();
    let mut state = State::new(v, u, 0.0)?;
    let mut stepper = Stepper::new(grid, Form::Divergence).with_frame_speed(es.sigma);
    let t_max = rp.t_max_scaled / (delta * delta);
    let mut residual = f64::INFINITY;
    let mut steps = 0usize;
    while state.t < t_max {
        let dt = cfl_dt_moving(&state, &grid, rp.safety, es.sigma)?;
        state = stepper.step(&state, dt)?.state;
        steps += 1;
        if steps.is_multiple_of(200) {
            let phi = stepper.solve_phi(&state)?;
            let (dv, du, _) = stepper.rhs(&state, &phi.phi);
            residual = dv.iter().chain(&du).fold(0.0, |m, x| m.max(x.abs()));
            if residual < rp.steady_tol {
                break;
            }
        }
    }
    if !(residual < rp.steady_tol) {
        return Err(Error::NoConnection(format!(
            "relaxation did not reach a steady state by t = {t_max} (residual {residual:e})"
        )));
    }
    let phi = stepper.solve_phi(&state)?.phi;
    tabulate(es, &grid, &state.v, &phi, reason)
}

/// Re-centres relaxed nodal data at the midpoint crossing and builds the profile.
fn tabulate(
    es: &EndStates,
    grid: &Grid,
    v: &[f64],
    phi: &[f64],
    reason: String,
) -> Result<ShockProfile> {
    let dx = grid.dx();
    let mut xi = grid.nodes();
    let mut v = v.to_vec();
    let mut phi = phi.to_vec();
    let mut dv = diff1(&v, dx);
    let mut dphi = diff1(&phi, dx);
    let mid = 0.5 * (es.v_minus + es.v_plus);
    let k = v
        .windows(2)
        .position(|w| w[0] <= mid && mid < w[1])
        .ok_or_else(|| Error::NoConnection("relaxed state never crosses the midpoint volume".into()))?;
    let s = (mid - v[k]) / (v[k + 1] - v[k]);
    let lerp = |f: &[f64]| f[k] + s * (f[k + 1] - f[k]);
    let x_mid = xi[k] + s * dx;
    let (pa, dva, dpa) = (lerp(&phi), lerp(&dv), lerp(&dphi));
    let anchor = if s < 0.25 {
        k
    } else if s > 0.75 {
        k + 1
    } else {
        xi.insert(k + 1, x_mid);
        v.insert(k + 1, mid);
        phi.insert(k + 1, pa);
        dv.insert(k + 1, dva);
        dphi.insert(k + 1, dpa);
        k + 1
    };
    xi[anchor] = x_mid;
    v[anchor] = mid;
    phi[anchor] = pa;
    dv[anchor] = dva;
    dphi[anchor] = dpa;
    for x in xi.iter_mut() {
        *x -= x_mid;
    }
    xi[anchor] = 0.0;
    let ebar: Vec<f64> = dphi.iter().zip(&v).map(|(d, vi)| d / vi).collect();
    ShockProfile::from_states(
        *es,
        xi,
        v,
        phi,
        ebar,
        dv,
        dphi,
        anchor,
        SolverMeta {
            method: ProfileMethod::Relaxation,
            step: dx,
            segments: 0,
            launch_angle: None,
            unstable_dim: super::ode::spectrum(es.left_rest(), es).unstable_dim(),
            fallback_reason: Some(reason),
        },
    )
}
