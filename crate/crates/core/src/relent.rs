//! Relative quantities, the modulated relative functional `eta`, the good
//! terms `G1`, `GS`, `D`, and discrete Sobolev norms.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, check_positive, Error, Result};
use crate::evolve::State;
use crate::grid::{diff1, diff2, Grid};
use crate::poisson::PhiField;
use crate::profile::EndStates;
use crate::shift::{shift_gain, ShiftedFrame};
use crate::p_tilde;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelConstants {
    /// `(1 - sqrt(delta_S)/2) v_-`
    pub c_star: f64,
    /// Shift gain `5 sqrt(2) / (2 v_-^3)`.
    pub m: f64,
    pub delta_s: f64,
}

impl RelConstants {
    pub fn new(es: &EndStates) -> Self {
        Self {
            c_star: (1.0 - 0.5 * es.delta_s.sqrt()) * es.v_minus,
            m: shift_gain(es.v_minus),
            delta_s: es.delta_s,
        }
    }
}

fn positive_pair(v: f64, vbar: f64) -> Result<()> {
    if !(v > 0.0) {
        return Err(Error::NonPositiveVolume { index: 0, value: v });
    }
    if !(vbar > 0.0) {
        return Err(Error::NonPositiveVolume { index: 1, value: vbar });
    }
    Ok(())
}

/// `2 (s - ln(1 + s))`, with a series near `s = 0` to keep relative accuracy.
fn two_s_minus_log1p(s: f64) -> f64 {
    if s.abs() < 1e-3 {
        let s2 = s * s;
        2.0 * s2 * (0.5 - s / 3.0 + s2 / 4.0 - s2 * s / 5.0 + s2 * s2 / 6.0)
    } else {
        2.0 * (s - s.ln_1p())
    }
}

fn rel_q_unchecked(v: f64, vbar: f64) -> f64 {
    two_s_minus_log1p((v - vbar) / vbar)
}

fn rel_p_unchecked(v: f64, vbar: f64) -> f64 {
    let s = (v - vbar) / vbar;
    2.0 / vbar * s * s / (1.0 + s)
}

/// `Q(v|vbar) = -2 ln v + 2 ln vbar + (2/vbar)(v - vbar)` for `Q(v) = -2 ln v`.
pub fn rel_q(v: f64, vbar: f64) -> Result<f64> {
    positive_pair(v, vbar)?;
    Ok(rel_q_unchecked(v, vbar))
}

/// `p~(v|vbar) = 2/v - 2/vbar + (2/vbar^2)(v - vbar)`.
pub fn rel_p(v: f64, vbar: f64) -> Result<f64> {
    positive_pair(v, vbar)?;
    Ok(rel_p_unchecked(v, vbar))
}

/// Both sides of the four relative-quantity bounds at one `(v, vbar)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelBounds {
    pub q: f64,
    pub p_rel: f64,
    /// `dp^2 / p~(vbar)^2 - 4 dp^3 / (3 p~(vbar)^3)` with `dp = p~(v) - p~(vbar)`.
    pub relbd2_rhs: f64,
    /// `dv^2 / vbar^2 - 2 dv^3 / (3 vbar^3)`.
    pub relbd3_rhs: f64,
    /// Smallest `C` in `p~(v|vbar) <= dp^2/p~(vbar) + C |dp|^3`.
    pub relbd1_c: f64,
    /// Smallest `C` in `Q(v|vbar) <= dv^2/vbar^2 + C |dv|^3`.
    pub relbd4_c: f64,
}

pub fn rel_bounds(v: f64, vbar: f64) -> Result<RelBounds> {
    positive_pair(v, vbar)?;
    let q = rel_q_unchecked(v, vbar);
    let p_rel = rel_p_unchecked(v, vbar);
    let pb = p_tilde(vbar);
    let dp = p_tilde(v) - pb;
    let dv = v - vbar;
    let relbd2_rhs = dp * dp / (pb * pb) - 4.0 * dp.powi(3) / (3.0 * pb.powi(3));
    let relbd3_rhs = dv * dv / (vbar * vbar) - 2.0 * dv.powi(3) / (3.0 * vbar.powi(3));
    let ratio = |excess: f64, cube: f64| if cube > 0.0 { excess / cube } else { f64::NEG_INFINITY };
    Ok(RelBounds {
        q,
        p_rel,
        relbd2_rhs,
        relbd3_rhs,
        relbd1_c: ratio(p_rel - dp * dp / pb, dp.abs().powi(3)),
        relbd4_c: ratio(q - dv * dv / (vbar * vbar), dv.abs().powi(3)),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LemmaReport {
    pub samples: usize,
    pub vbar_range: (f64, f64),
    pub radius: f64,
    pub relbd2_ok: bool,
    pub relbd3_ok: bool,
    /// Smallest `Q - rhs` over the sample for each lower bound.
    pub relbd2_margin: f64,
    pub relbd3_margin: f64,
    pub relbd1_c: f64,
    pub relbd4_c: f64,
    pub q_nonnegative: bool,
    pub p_rel_nonnegative: bool,
}

/// Checks the bounds on an `n x n` lattice of `vbar` in `[vbar_lo, vbar_hi]`
/// and `v - vbar` in `[-radius, radius]`.
pub fn lemma_check_on(vbar_lo: f64, vbar_hi: f64, radius: f64, n: usize) -> Result<LemmaReport> {
    if !(vbar_lo > 0.0 && vbar_hi >= vbar_lo && radius > 0.0 && n >= 2) {
        return Err(Error::InvalidArgument("need 0 < vbar_lo <= vbar_hi, radius > 0, n >= 2".into()));
    }
    if radius > 0.25 * vbar_lo {
        return Err(Error::InvalidArgument(format!(
            "radius {radius} exceeds the admissible 0.25 * vbar = {}",
            0.25 * vbar_lo
        )));
    }
    let mut rep = LemmaReport {
        samples: 0,
        vbar_range: (vbar_lo, vbar_hi),
        radius,
        relbd2_ok: true,
        relbd3_ok: true,
        relbd2_margin: f64::INFINITY,
        relbd3_margin: f64::INFINITY,
        relbd1_c: 0.0,
        relbd4_c: 0.0,
        q_nonnegative: true,
        p_rel_nonnegative: true,
    };
    let lin = |lo: f64, hi: f64, k: usize| lo + (hi - lo) * k as f64 / (n - 1) as f64;
    for i in 0..n {
        let vbar = lin(vbar_lo, vbar_hi, i);
        for j in 0..n {
            let v = vbar + lin(-radius, radius, j);
            let b = rel_bounds(v, vbar)?;
            // round-off slack relative to the size of the compared terms
            let slack = 1e-14 * b.q.max(b.relbd2_rhs.abs()).max(b.relbd3_rhs.abs());
            let m2 = b.q - b.relbd2_rhs;
            let m3 = b.q - b.relbd3_rhs;
            rep.relbd2_margin = rep.relbd2_margin.min(m2);
            rep.relbd3_margin = rep.relbd3_margin.min(m3);
            rep.relbd2_ok &= m2 >= -slack;
            rep.relbd3_ok &= m3 >= -slack;
            rep.relbd1_c = rep.relbd1_c.max(b.relbd1_c);
            rep.relbd4_c = rep.relbd4_c.max(b.relbd4_c);
            rep.q_nonnegative &= b.q >= 0.0 && (v == vbar || b.q > 0.0);
            rep.p_rel_nonnegative &= b.p_rel >= 0.0 && (v == vbar || b.p_rel > 0.0);
            rep.samples += 1;
        }
    }
    Ok(rep)
}

/// Lemma check on `|v - vbar| <= bar_delta`, `|vbar - vbar_center| <= bar_delta`.
pub fn lemma21_check(vbar_center: f64, bar_delta: f64, samples: usize) -> Result<LemmaReport> {
    lemma_check_on(vbar_center - bar_delta, vbar_center + bar_delta, bar_delta, samples)
}

/// Pointwise `eta(W | Wbar^X)` given `phi~_x` and `phi~_xx`.
pub fn eta_density(v: f64, u: f64, vbar: f64, ubar: f64, phibar: f64, dphi: f64, ddphi: f64) -> Result<f64> {
    positive_pair(v, vbar)?;
    let ut = u - ubar;
    let vt = v - vbar;
    let w = (-phibar).exp();
    let vb2 = vbar * vbar;
    Ok(0.5 * ut * ut + rel_q_unchecked(v, vbar) - vt * ddphi / vb2
        + w * ddphi * ddphi / (2.0 * vb2 * vbar)
        + w * dphi * dphi / (2.0 * vb2))
}

/// Reference quadratic `u~^2 + v~^2 + phi~_xx^2 + phi~_x^2`.
pub fn quad_density(ut: f64, vt: f64, dphi: f64, ddphi: f64) -> f64 {
    ut * ut + vt * vt + ddphi * ddphi + dphi * dphi
}

/// Perturbation fields against a shifted frame.
#[derive(Debug, Clone)]
pub struct Perturbation {
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub phi: Vec<f64>,
    pub phi_x: Vec<f64>,
    pub phi_xx: Vec<f64>,
}

impl Perturbation {
    pub fn new(state: &State, phi: &[f64], frame: &ShiftedFrame, grid: &Grid) -> Result<Self> {
        check_len(frame.len(), state.len())?;
        check_len(frame.len(), phi.len())?;
        let sub = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<f64>>();
        let phi_t = sub(phi, &frame.phibar_x);
        let dx = grid.dx();
        Ok(Self {
            v: sub(&state.v, &frame.vbar_x),
            u: sub(&state.u, &frame.ubar_x),
            phi_x: diff1(&phi_t, dx),
            phi_xx: diff2(&phi_t, dx),
            phi: phi_t,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EtaSnapshot {
    pub eta_weighted: f64,
    pub eta_plain: f64,
    pub quad_norm: f64,
    /// Smallest and largest pointwise `eta / quad` over nodes where `quad`
    /// is at least `1e-12` of its maximum.
    pub ratio_min: f64,
    pub ratio_max: f64,
}

/// Integrals of `a^X eta` and `eta` with the pointwise equivalence envelope.
pub fn eta_integral(state: &State, phi: &PhiField, frame: &ShiftedFrame, grid: &Grid) -> Result<EtaSnapshot> {
    let p = Perturbation::new(state, &phi.phi, frame, grid)?;
    eta_from_perturbation(state, &p, frame, grid)
}

pub fn eta_from_perturbation(state: &State, p: &Perturbation, frame: &ShiftedFrame, grid: &Grid) -> Result<EtaSnapshot> {
    check_positive(&state.v)?;
    let n = state.len();
    let mut eta = Vec::with_capacity(n);
    let mut quad = Vec::with_capacity(n);
    for i in 0..n {
        eta.push(eta_density(
            state.v[i],
            state.u[i],
            frame.vbar_x[i],
            frame.ubar_x[i],
            frame.phibar_x[i],
            p.phi_x[i],
            p.phi_xx[i],
        )?);
        quad.push(quad_density(p.u[i], p.v[i], p.phi_x[i], p.phi_xx[i]));
    }
    let weighted: Vec<f64> = eta.iter().zip(&frame.a_x).map(|(e, a)| e * a).collect();
    let qmax = quad.iter().copied().fold(0.0, f64::max);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    if qmax > 0.0 {
        for (e, q) in eta.iter().zip(&quad) {
            if *q >= 1e-12 * qmax {
                lo = lo.min(e / q);
                hi = hi.max(e / q);
            }
        }
    }
    Ok(EtaSnapshot {
        eta_weighted: grid.integrate(&weighted),
        eta_plain: grid.integrate(&eta),
        quad_norm: grid.integrate(&quad),
        ratio_min: lo,
        ratio_max: hi,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GoodTerms {
    pub g1: f64,
    pub gs: f64,
    pub d: f64,
}

/// `G1 = (sigma/sqrt(delta)) int vbar_x |p~(v) - p~(vbar) - u~/(2C*)|^2`,
/// `GS = int vbar_x u~^2`, `D = int u~_x^2`.
pub fn good_terms(state: &State, frame: &ShiftedFrame, grid: &Grid, es: &EndStates, c: &RelConstants) -> Result<GoodTerms> {
    check_len(frame.len(), state.len())?;
    let n = state.len();
    let ut: Vec<f64> = (0..n).map(|i| state.u[i] - frame.ubar_x[i]).collect();
    let mut g1 = Vec::with_capacity(n);
    let mut gs = Vec::with_capacity(n);
    for i in 0..n {
        let w = frame.dvbar_x[i];
        let dev = p_tilde(state.v[i]) - p_tilde(frame.vbar_x[i]) - ut[i] / (2.0 * c.c_star);
        g1.push(w * dev * dev);
        gs.push(w * ut[i] * ut[i]);
    }
    let dux = diff1(&ut, grid.dx());
    let d: Vec<f64> = dux.iter().map(|x| x * x).collect();
    Ok(GoodTerms {
        g1: es.sigma / c.delta_s.sqrt() * grid.integrate(&g1),
        gs: grid.integrate(&gs),
        d: grid.integrate(&d),
    })
}

/// Discrete `H^k` norm of the stacked fields: trapezoidal `L2` of each field
/// and its forward-difference derivatives up to order `k` (at most 3).
pub fn sobolev_norm(fields: &[&[f64]], k: usize, grid: &Grid) -> Result<f64> {
    if k > 3 {
        return Err(Error::InvalidArgument(format!("Sobolev order {k} not supported (max 3)")));
    }
    let mut sum = 0.0;
    for f in fields {
        check_len(grid.n_nodes(), f.len())?;
        for order in 0..=k {
            sum += seminorm_sq(f, order, grid);
        }
    }
    Ok(sum.sqrt())
}

/// Squared trapezoidal `L2` norm of the `order`-th forward difference.
pub fn seminorm_sq(f: &[f64], order: usize, grid: &Grid) -> f64 {
    let dx = grid.dx();
    let mut d = f.to_vec();
    for _ in 0..order {
        d = d.windows(2).map(|w| (w[1] - w[0]) / dx).collect();
    }
    let sq: Vec<f64> = d.iter().map(|x| x * x).collect();
    crate::grid::trapezoid(&sq, dx)
}

/// `||phi~||_{H^k} / ||v~||_{H^{k-1}}` for `k` in 1..=3.
pub fn elliptic_ratio(phi_tilde: &[f64], v_tilde: &[f64], grid: &Grid, k: usize) -> Result<f64> {
    if !(1..=3).contains(&k) {
        return Err(Error::InvalidArgument(format!("elliptic ratio order must be 1, 2 or 3, got {k}")));
    }
    let den = sobolev_norm(&[v_tilde], k - 1, grid)?;
    if den == 0.0 {
        return Err(Error::ZeroDenominator("perturbation v~ vanishes"));
    }
    Ok(sobolev_norm(&[phi_tilde], k, grid)? / den)
}
