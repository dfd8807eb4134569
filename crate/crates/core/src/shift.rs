//! The weight `a`, the shift ODE for `X(t)` and the shifted reference
//! frame.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Result};
use crate::evolve::State;
use crate::grid::Grid;
use crate::p_tilde_prime;
use crate::profile::ShockProfile;

/// Shift gain `M = 5 sqrt(2) / (2 v_-^3)`.
pub fn shift_gain(v_minus: f64) -> f64 {
    5.0 * std::f64::consts::SQRT_2 / (2.0 * v_minus.powi(3))
}

/// `a(xi) = 1 + (u_- - ubar(xi)) / sqrt(delta_S)`.
pub fn weight_a(profile: &ShockProfile, xi: f64) -> f64 {
    let es = &profile.endstates;
    1.0 + (es.u_minus - profile.value_at(xi).u) / es.delta_s.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftSample {
    pub t: f64,
    pub x: f64,
    pub xdot: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ShiftState {
    pub x: f64,
    pub xdot: f64,
    pub history: Vec<ShiftSample>,
}

impl ShiftState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, t: f64) {
        self.history.push(ShiftSample {
            t,
            x: self.x,
            xdot: self.xdot,
        });
    }
}

/// Profile quantities at `xi_i = x_i - sigma t - X`.
#[derive(Debug, Clone)]
pub struct ShiftedFrame {
    pub vbar_x: Vec<f64>,
    pub ubar_x: Vec<f64>,
    pub phibar_x: Vec<f64>,
    pub dvbar_x: Vec<f64>,
    pub dubar_x: Vec<f64>,
    pub dphibar_x: Vec<f64>,
    pub a_x: Vec<f64>,
}

impl ShiftedFrame {
    pub fn len(&self) -> usize {
        self.vbar_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vbar_x.is_empty()
    }
}

pub fn shifted_frame(profile: &ShockProfile, t: f64, x_shift: f64, grid: &Grid) -> ShiftedFrame {
    let s = profile.sample_on_grid(grid, t, x_shift);
    let es = &profile.endstates;
    let sq = es.delta_s.sqrt();
    let a_x = s.u.iter().map(|u| 1.0 + (es.u_minus - u) / sq).collect();
    ShiftedFrame {
        vbar_x: s.v,
        ubar_x: s.u,
        phibar_x: s.phi,
        dvbar_x: s.dv,
        dubar_x: s.du,
        dphibar_x: s.dphi,
        a_x,
    }
}

/// `Xdot` for a given velocity field against a precomputed frame.
pub fn shift_rate(u: &[f64], frame: &ShiftedFrame, profile: &ShockProfile, grid: &Grid) -> Result<f64> {
    check_len(frame.len(), u.len())?;
    let es = &profile.endstates;
    let m = shift_gain(es.v_minus);
    let inv_sigma = 1.0 / es.sigma;
    let integrand: Vec<f64> = (0..u.len())
        .map(|i| {
            let ut = u[i] - frame.ubar_x[i];
            let dp = p_tilde_prime(frame.vbar_x[i]) * frame.dvbar_x[i];
            frame.a_x[i] * (frame.dubar_x[i] + inv_sigma * dp) * ut
        })
        .collect();
    Ok(-m / es.delta_s * grid.integrate(&integrand))
}

/// `Xdot = -(M/delta_S) [ int a ubar_x u~ + (1/sigma) int a p~(vbar)_x u~ ]`
/// with the profile shifted to `x - sigma t - X`.
pub fn shift_rhs(state: &State, profile: &ShockProfile, x_shift: f64, t: f64, grid: &Grid) -> Result<f64> {
    let frame = shifted_frame(profile, t, x_shift, grid);
    shift_rate(&state.u, &frame, profile, grid)
}

/// Heun update of `X` from the rates at the two stage times of a step of
/// length `dt`, matching the field update.
pub fn advance_shift(mut shift: ShiftState, rates: [f64; 2], dt: f64) -> ShiftState {
    shift.x += 0.5 * dt * (rates[0] + rates[1]);
    shift
}
