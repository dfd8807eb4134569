//! Nonlinear Poisson constraint `-(phi_x / v)_x = 1 - v e^phi` and the
//! divergence-form identities built on it.
//!
//! The discrete operator uses the compact flux form
//! `[(phi_{i+1} - phi_i)/v_{i+1/2} - (phi_i - phi_{i-1})/v_{i-1/2}] / dx^2`
//! with arithmetic face averages of `v`, so its Newton Jacobian is
//! tridiagonal and strictly diagonally dominant for `v > 0`.

use crate::error::{check_len, check_positive, Error, Result};
use crate::grid::Grid;
use crate::linalg::solve_tridiagonal;

/// Potential on the grid together with solver statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiField {
    pub phi: Vec<f64>,
    pub newton_iters: usize,
    pub residual_norm: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 50,
            max_halvings: 10,
        }
    }
}

/// `(phi_x / v)_x` at interior node `i` with the compact stencil.
#[inline]
pub(crate) fn flux_div(v: &[f64], phi: &[f64], i: usize, inv_dx2: f64) -> f64 {
    let vr = 0.5 * (v[i] + v[i + 1]);
    let vl = 0.5 * (v[i] + v[i - 1]);
    ((phi[i + 1] - phi[i]) / vr - (phi[i] - phi[i - 1]) / vl) * inv_dx2
}

fn residual_vec(v: &[f64], phi: &[f64], inv_dx2: f64, out: &mut [f64]) {
    let n = v.len();
    out[0] = 0.0;
    out[n - 1] = 0.0;
    for i in 1..n - 1 {
        out[i] = -flux_div(v, phi, i, inv_dx2) - 1.0 + v[i] * phi[i].exp();
    }
}

fn l2(r: &[f64], dx: f64) -> f64 {
    (dx * r.iter().map(|x| x * x).sum::<f64>()).sqrt()
}

/// Solves the Poisson constraint for `v` with Dirichlet data `bc` by damped
/// Newton iteration, warm-started from `guess` when given (otherwise from
/// the quasi-neutral state `-ln v`). At least one Newton update is taken.
pub fn solve_phi(v: &[f64], grid: &Grid, bc: (f64, f64), guess: Option<&[f64]>) -> Result<PhiField> {
    solve_phi_with(v, grid, bc, guess, &NewtonOptions::default())
}

pub fn solve_phi_with(
    v: &[f64],
    grid: &Grid,
    bc: (f64, f64),
    guess: Option<&[f64]>,
    opts: &NewtonOptions,
) -> Result<PhiField> {
    let n = grid.n_nodes();
    check_len(n, v.len())?;
    check_positive(v)?;
    let dx = grid.dx();
    let inv_dx2 = 1.0 / (dx * dx);
    let mut phi: Vec<f64> = match guess {
        Some(g) => {
            check_len(n, g.len())?;
            g.to_vec()
        }
        None => v.iter().map(|x| -x.ln()).collect(),
    };
    phi[0] = bc.0;
    phi[n - 1] = bc.1;

    let m = n - 2;
    let mut r = vec![0.0; n];
    let mut trial = phi.clone();
    let mut r_trial = vec![0.0; n];
    let (mut lower, mut diag, mut upper, mut rhs) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    residual_vec(v, &phi, inv_dx2, &mut r);
    let mut norm = l2(&r, dx);
    let mut iters = 0;
    loop {
        if iters > 0 && norm < opts.tol {
            break;
        }
        if iters >= opts.max_iters || !norm.is_finite() {
            return Err(Error::NewtonDiverged {
                iterations: iters,
                residual: norm,
            });
        }
        for j in 0..m {
            let i = j + 1;
            let cr = inv_dx2 / (0.5 * (v[i] + v[i + 1]));
            let cl = inv_dx2 / (0.5 * (v[i] + v[i - 1]));
            diag[j] = cr + cl + v[i] * phi[i].exp();
            lower[j] = -cl;
            upper[j] = -cr;
            rhs[j] = -r[i];
        }
        let delta = solve_tridiagonal(&lower, &diag, &upper, &rhs).ok_or(Error::NewtonDiverged {
            iterations: iters,
            residual: norm,
        })?;
        iters += 1;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            trial.copy_from_slice(&phi);
            for j in 0..m {
                trial[j + 1] += step * delta[j];
            }
            residual_vec(v, &trial, inv_dx2, &mut r_trial);
            let trial_norm = l2(&r_trial, dx);
            if trial_norm.is_finite() && (trial_norm <= norm || norm < opts.tol) {
                std::mem::swap(&mut phi, &mut trial);
                std::mem::swap(&mut r, &mut r_trial);
                norm = trial_norm;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // Residual stagnated at round-off; accept if already converged.
            if norm < opts.tol {
                break;
            }
            return Err(Error::NewtonDiverged {
                iterations: iters,
                residual: norm,
            });
        }
    }
    Ok(PhiField {
        phi,
        newton_iters: iters,
        residual_norm: norm,
    })
}

/// Discrete L2 norm of `-(phi_x/v)_x - 1 + v e^phi` over interior nodes.
pub fn poisson_residual(v: &[f64], phi: &[f64], grid: &Grid) -> Result<f64> {
    check_len(grid.n_nodes(), v.len())?;
    check_len(v.len(), phi.len())?;
    let dx = grid.dx();
    let mut r = vec![0.0; v.len()];
    residual_vec(v, phi, 1.0 / (dx * dx), &mut r);
    Ok(l2(&r, dx))
}

/// Nodal `E = phi_x / v` and `K = (phi_x / v)_x`. Interior `K` uses the
/// compact stencil; end values use one-sided second-order differences.
pub(crate) fn field_and_gradient(v: &[f64], phi: &[f64], dx: f64) -> (Vec<f64>, Vec<f64>) {
    let n = v.len();
    let dphi = crate::grid::diff1(phi, dx);
    let e: Vec<f64> = dphi.iter().zip(v).map(|(d, vi)| d / vi).collect();
    let inv_dx2 = 1.0 / (dx * dx);
    let mut k = vec![0.0; n];
    for i in 1..n - 1 {
        k[i] = flux_div(v, phi, i, inv_dx2);
    }
    if n >= 3 {
        k[0] = (-3.0 * e[0] + 4.0 * e[1] - e[2]) / (2.0 * dx);
        k[n - 1] = (3.0 * e[n - 1] - 4.0 * e[n - 2] + e[n - 3]) / (2.0 * dx);
    }
    (e, k)
}

/// Electric force `Phi = (phi_x/v)^2 / 2 - (phi_x/v)_x / v` at every node.
pub fn electric_force(v: &[f64], phi: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    check_len(grid.n_nodes(), v.len())?;
    check_len(v.len(), phi.len())?;
    check_positive(v)?;
    let (e, k) = field_and_gradient(v, phi, grid.dx());
    Ok(e.iter()
        .zip(&k)
        .zip(v)
        .map(|((ei, ki), vi)| 0.5 * ei * ei - ki / vi)
        .collect())
}

/// Discrete L2 norm of `phi_x/v - [1/v + (phi_x/v)_x / v - (phi_x/v)^2 / 2]_x`
/// over nodes `2..n-2`, where the outer derivative is a central difference.
pub fn trf_residual(v: &[f64], phi: &[f64], grid: &Grid) -> Result<f64> {
    check_len(grid.n_nodes(), v.len())?;
    check_len(v.len(), phi.len())?;
    check_positive(v)?;
    let dx = grid.dx();
    let n = v.len();
    let (e, k) = field_and_gradient(v, phi, dx);
    let g: Vec<f64> = (0..n)
        .map(|i| 1.0 / v[i] + k[i] / v[i] - 0.5 * e[i] * e[i])
        .collect();
    let mut sum = 0.0;
    for i in 2..n - 2 {
        let r = e[i] - (g[i + 1] - g[i - 1]) / (2.0 * dx);
        sum += r * r;
    }
    Ok((dx * sum).sqrt())
}
