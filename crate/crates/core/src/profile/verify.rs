//! Post-hoc checks of a tabulated profile.

use serde::{Deserialize, Serialize};

use super::{ProfileMethod, ShockProfile};
use crate::pressure;

/// Least-squares fit of `ln|vbar - v_end|` against `|xi|` on one tail.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TailFit {
    /// Fitted slope; negative for a decaying tail.
    pub slope: f64,
    pub intercept: f64,
    pub correlation: f64,
    pub points: usize,
    /// `-slope / delta_S`.
    pub theta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileReport {
    /// Max-norm distance of the first and last node to the left and right
    /// rest points in `(v, u, phi, E)`.
    pub farfield_residuals: [f64; 2],
    pub v_increasing: bool,
    pub u_decreasing: bool,
    pub phi_decreasing: bool,
    pub monotonicity_ok: bool,
    /// Smallest and largest `phibar' / ubar'` over interior nodes.
    pub ratio_bounds: (f64, f64),
    pub ratio_sign_ok: bool,
    pub left_tail: Option<TailFit>,
    pub right_tail: Option<TailFit>,
    /// Decay exponent `theta` from the right tail (real spectrum there).
    pub theta_fit: f64,
    /// `max |sigma vbar' + ubar'|`.
    pub sigma_identity: f64,
    /// Grid spacings of the two residual evaluations.
    pub pde_spacing: (f64, f64),
    /// Traveling-wave residual norm at the coarse and fine spacing.
    pub pde_residual_norm: (f64, f64),
    pub pde_residual_ratio: f64,
    pub method: ProfileMethod,
}

impl ProfileReport {
    /// Far field within `tol`, monotone, sign-consistent ratio and a
    /// second-order residual ratio.
    pub fn passes(&self, farfield_tol: f64) -> bool {
        self.farfield_residuals.iter().all(|r| *r < farfield_tol)
            && self.monotonicity_ok
            && self.ratio_sign_ok
            && self.theta_fit > 0.0
            && (3.0..=5.0).contains(&self.pde_residual_ratio)
    }
}

/// Coarse spacing of the traveling-wave residual study.
pub const RESIDUAL_SPACING: f64 = 0.2;

pub fn verify_profile(profile: &ShockProfile, refine: usize) -> ProfileReport {
    let es = &profile.endstates;
    let n = profile.len();
    let first = 0;
    let last = n - 1;
    let e_rest = |i: usize, v: f64, u: f64, phi: f64| {
        (profile.vbar[i] - v)
            .abs()
            .max((profile.ubar[i] - u).abs())
            .max((profile.phibar[i] - phi).abs())
            .max(profile.ebar[i].abs())
    };
    let farfield_residuals = [
        e_rest(first, es.v_minus, es.u_minus, es.phi_minus),
        e_rest(last, es.v_plus, es.u_plus, es.phi_plus),
    ];
    let v_increasing = profile.vbar.windows(2).all(|w| w[1] > w[0]);
    let u_decreasing = profile.ubar.windows(2).all(|w| w[1] < w[0]);
    let phi_decreasing = profile.phibar.windows(2).all(|w| w[1] < w[0]);

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut sign_ok = true;
    for i in 1..n - 1 {
        let (dphi, du) = (profile.dphibar[i], profile.dubar[i]);
        let r = dphi / du;
        if !(r > 0.0) || !r.is_finite() {
            sign_ok = false;
            continue;
        }
        lo = lo.min(r);
        hi = hi.max(r);
    }

    let dv = es.v_plus - es.v_minus;
    let left_tail = fit_tail(profile, es.v_minus, dv, true);
    let right_tail = fit_tail(profile, es.v_plus, dv, false);
    let theta_fit = right_tail.map(|f| f.theta).unwrap_or(f64::NAN);

    let sigma_identity = profile
        .dvbar
        .iter()
        .zip(&profile.dubar)
        .map(|(dv, du)| (es.sigma * dv + du).abs())
        .fold(0.0, f64::max);

    let refine = refine.max(2);
    let h0 = RESIDUAL_SPACING;
    let h1 = h0 / refine as f64;
    let r0 = traveling_wave_residual(profile, h0);
    let r1 = traveling_wave_residual(profile, h1);

    ProfileReport {
        farfield_residuals,
        v_increasing,
        u_decreasing,
        phi_decreasing,
        monotonicity_ok: v_increasing && u_decreasing && phi_decreasing,
        ratio_bounds: (lo, hi),
        ratio_sign_ok: sign_ok && lo.is_finite() && hi.is_finite(),
        left_tail,
        right_tail,
        theta_fit,
        sigma_identity,
        pde_spacing: (h0, h1),
        pde_residual_norm: (r0, r1),
        pde_residual_ratio: r0 / r1,
        method: profile.meta.method,
    }
}

/// Tail points with `1e-6 < |vbar - v_end| / |dv| < 1e-2`.
fn fit_tail(profile: &ShockProfile, v_end: f64, dv: f64, left: bool) -> Option<TailFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, &xi) in profile.xi_nodes.iter().enumerate() {
        if (xi < 0.0) != left {
            continue;
        }
        let d = (profile.vbar[i] - v_end).abs() / dv.abs();
        if d > 1e-6 && d < 1e-2 {
            xs.push(xi.abs());
            ys.push(d.ln());
        }
    }
    if xs.len() < 10 {
        return None;
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    Some(TailFit {
        slope,
        intercept: my - slope * mx,
        correlation: sxy / (sxx * syy).sqrt(),
        points: xs.len(),
        theta: -slope / profile.endstates.delta_s,
    })
}

/// L2 norm of the steady traveling-wave equations
///
/// ```text
/// -sigma v' - u' = 0
/// -sigma u' + p(v)' - (u'/v)' + phi'/v = 0
/// -(phi'/v)' - 1 + v e^phi = 0
/// ```
///
/// with central differences of the profile sampled at spacing `h` on the
/// tabulated range.
pub fn traveling_wave_residual(profile: &ShockProfile, h: f64) -> f64 {
    let (lo, hi) = profile.xi_range();
    // a common lattice through xi = 0 so refinements nest
    let k0 = (lo / h).ceil() as i64;
    let k1 = (hi / h).floor() as i64;
    let xs: Vec<f64> = (k0..=k1).map(|k| k as f64 * h).collect();
    let s = profile.sample_sorted(&xs);
    let sigma = profile.endstates.sigma;
    let m = xs.len();
    let mut sum = 0.0;
    for i in 1..m - 1 {
        let (v, u, phi) = (&s.v, &s.u, &s.phi);
        let c = |f: &[f64]| (f[i + 1] - f[i - 1]) / (2.0 * h);
        let r1 = -sigma * c(v) - c(u);
        let vr = 0.5 * (v[i] + v[i + 1]);
        let vl = 0.5 * (v[i] + v[i - 1]);
        let visc = ((u[i + 1] - u[i]) / vr - (u[i] - u[i - 1]) / vl) / (h * h);
        let r2 = -sigma * c(u) + (pressure(v[i + 1]) - pressure(v[i - 1])) / (2.0 * h) - visc + c(phi) / v[i];
        let ell = ((phi[i + 1] - phi[i]) / vr - (phi[i] - phi[i - 1]) / vl) / (h * h);
        let r3 = -ell - 1.0 + v[i] * phi[i].exp();
        sum += r1 * r1 + r2 * r2 + r3 * r3;
    }
    (h * sum).sqrt()
}
