//! Heteroclinic connection by shooting with bisection restarts.
//!
//! The orbit leaves the left rest point inside its unstable subspace. When
//! that subspace is two dimensional the launch angle is bisected; in every
//! case the fast unstable mode along the orbit amplifies round-off, so the
//! trajectory is continued in segments. Each segment bisects a transverse
//! offset until the two bracketing trajectories agree to a tolerance, keeps
//! the common prefix and restarts from its last node.

use nalgebra::Vector3;

use super::ode::{rhs, rk4_step, spectrum};
use super::{EndStates, ProfileParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Fate {
    Arrived,
    Escaped(i8),
    Exhausted,
}

#[derive(Debug, Clone)]
struct Shot {
    nodes: Vec<[f64; 3]>,
    fate: Fate,
    closest: f64,
}

/// Raw output of the shooting solver: states on a uniform `xi` mesh.
#[derive(Debug, Clone)]
pub(crate) struct Orbit {
    pub nodes: Vec<[f64; 3]>,
    pub step: f64,
    pub segments: usize,
    pub launch_angle: Option<f64>,
    pub unstable_dim: usize,
}

struct Tube {
    v_low: f64,
    v_high: f64,
    e_cap: f64,
    dev_cap: f64,
    target: [f64; 3],
    arrive_tol: f64,
}

impl Tube {
    fn classify(&self, y: &[f64; 3]) -> Option<Fate> {
        let v = y[0];
        if !(v > self.v_low) || !y.iter().all(|c| c.is_finite()) {
            return Some(Fate::Escaped(-1));
        }
        if v >= self.v_high {
            return Some(Fate::Escaped(1));
        }
        let dev = v.ln() + y[1];
        if y[2].abs() > self.e_cap || dev.abs() > self.dev_cap {
            return Some(Fate::Escaped(if dev < 0.0 { 1 } else { -1 }));
        }
        if dist(y, &self.target) <= self.arrive_tol {
            return Some(Fate::Arrived);
        }
        None
    }
}

#[inline]
fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
}

fn shoot(y0: [f64; 3], h: f64, max_steps: usize, tube: &Tube, es: &EndStates) -> Shot {
    let mut nodes = Vec::with_capacity(max_steps.min(1 << 16));
    nodes.push(y0);
    let mut closest = dist(&y0, &tube.target);
    let mut y = y0;
    for _ in 0..max_steps {
        y = rk4_step(y, h, es);
        nodes.push(y);
        closest = closest.min(dist(&y, &tube.target));
        if let Some(fate) = tube.classify(&y) {
            return Shot {
                nodes,
                fate,
                closest,
            };
        }
    }
    Shot {
        nodes,
        fate: Fate::Exhausted,
        closest,
    }
}

enum Bisected {
    Arrived(Shot),
    Bracket(Shot, Shot),
}

/// Bisects `param` on `[lo, hi]` whose end shots escape on opposite sides.
fn bisect<F>(param: F, mut lo: f64, mut hi: f64, mut shot_lo: Shot, mut shot_hi: Shot, run: &dyn Fn([f64; 3]) -> Shot) -> Bisected
where
    F: Fn(f64) -> [f64; 3],
{
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let shot = run(param(mid));
        match shot.fate {
            Fate::Arrived => return Bisected::Arrived(shot),
            f if f == shot_lo.fate => {
                lo = mid;
                shot_lo = shot;
            }
            _ => {
                hi = mid;
                shot_hi = shot;
            }
        }
    }
    Bisected::Bracket(shot_lo, shot_hi)
}

fn opposite(a: Fate, b: Fate) -> bool {
    matches!((a, b), (Fate::Escaped(x), Fate::Escaped(y)) if x != y)
}

pub(crate) fn shoot_profile(es: &EndStates, params: &ProfileParams) -> Result<Orbit> {
    let delta = es.delta_s;
    let h = params.step.unwrap_or_else(|| 0.01f64.min(0.01 / delta));
    let budget = params.xi_budget.unwrap_or(200.0 / delta);
    let max_total = (budget / h).ceil() as usize;
    let left = es.left_rest();
    let right = es.right_rest();
    let dv = es.v_plus - es.v_minus;
    let tube = Tube {
        v_low: es.v_minus - 0.5 * dv,
        v_high: es.v_plus + 0.5 * dv,
        e_cap: 0.5,
        dev_cap: 0.2,
        target: right,
        arrive_tol: params.far_tol,
    };

    let left_spec = spectrum(left, es);
    let unstable_dim = left_spec.unstable_dim();
    if !(1..=2).contains(&unstable_dim) {
        return Err(Error::UnexpectedSpectrum(unstable_dim));
    }
    let right_spec = spectrum(right, es);
    let transverse = right_spec
        .unstable_basis
        .first()
        .copied()
        .ok_or_else(|| Error::NoConnection("right rest point has no unstable direction".into()))?;

    let eps = params.launch_scale * delta;
    let run_budget = |used: usize| max_total.saturating_sub(used).max(1);

    let mut nodes: Vec<[f64; 3]> = Vec::new();
    let mut segments = 0usize;
    let mut launch_angle = None;

    // First segment.
    let (mut lo, mut hi) = if unstable_dim == 2 {
        let b1 = left_spec.unstable_basis[0];
        let b2 = left_spec.unstable_basis[1];
        let launch = |alpha: f64| -> [f64; 3] {
            let d = b1 * alpha.cos() + b2 * alpha.sin();
            [left[0] + eps * d[0], left[1] + eps * d[1], left[2] + eps * d[2]]
        };
        let run = |y0: [f64; 3]| shoot(y0, h, run_budget(0), &tube, es);
        let k = params.angle_samples.max(8);
        let angles: Vec<f64> = (0..=k)
            .map(|i| std::f64::consts::TAU * i as f64 / k as f64)
            .collect();
        let shots: Vec<Shot> = angles.iter().map(|&a| run(launch(a))).collect();
        let mut best: Option<(f64, f64, Shot, Shot)> = None;
        for i in 0..k {
            let (a, b) = (&shots[i], &shots[i + 1]);
            if a.fate == Fate::Arrived {
                best = Some((0.0, angles[i], a.clone(), a.clone()));
                break;
            }
            if !opposite(a.fate, b.fate) {
                continue;
            }
            let (s_lo, s_hi) = match bisect(launch, angles[i], angles[i + 1], a.clone(), b.clone(), &run) {
                Bisected::Arrived(s) => (s.clone(), s),
                Bisected::Bracket(l, h) => (l, h),
            };
            let closest = s_lo.closest.min(s_hi.closest);
            if best.as_ref().is_none_or(|b| closest < b.0) {
                best = Some((closest, angles[i], s_lo, s_hi));
            }
        }
        let (_, angle, l, h) = best.ok_or_else(|| {
            Error::NoConnection("no sign change of the escape direction over launch angles".into())
        })?;
        launch_angle = Some(angle);
        (l, h)
    } else {
        let mut d = left_spec.unstable_basis[0];
        if d[0] < 0.0 {
            d = -d;
        }
        let y0 = [left[0] + eps * d[0], left[1] + eps * d[1], left[2] + eps * d[2]];
        nodes.push(y0);
        segments += 1;
        restart_bracket(y0, &transverse, h, run_budget(0), &tube, es, params.far_tol)?
    };
    if nodes.is_empty() {
        nodes.push(lo.nodes[0]);
    }

    let mut stalls = 0usize;
    loop {
        segments += 1;
        if lo.fate == Fate::Arrived {
            nodes.extend_from_slice(&lo.nodes[1..]);
            break;
        }
        let n = lo.nodes.len().min(hi.nodes.len());
        let mut accepted = 1;
        while accepted < n {
            let y = &lo.nodes[accepted];
            let f = rhs(*y, es);
            let speed = f.iter().map(|c| c.abs()).fold(0.0, f64::max);
            let tol = (1e-3 * h * speed).clamp(1e-15, params.sep_tol);
            if dist(y, &hi.nodes[accepted]) > tol {
                break;
            }
            accepted += 1;
        }
        // Keep one node of margin before the trajectories separate.
        let keep = accepted.saturating_sub(1).max(1);
        if keep < 10 {
            stalls += 1;
            if stalls > 8 {
                return Err(Error::NoConnection(format!(
                    "restarts stalled after {segments} segments at xi = {:.3}",
                    nodes.len() as f64 * h
                )));
            }
        } else {
            stalls = 0;
        }
        nodes.extend_from_slice(&lo.nodes[1..=keep.min(n - 1)]);
        let y0 = *nodes.last().expect("nonempty");
        if dist(&y0, &right) <= params.far_tol {
            break;
        }
        if nodes.len() >= max_total {
            return Err(Error::NoConnection(format!(
                "xi budget {budget:.1} exhausted at distance {:.3e} from the right state",
                dist(&y0, &right)
            )));
        }
        let (l, h2) = restart_bracket(y0, &transverse, h, run_budget(nodes.len()), &tube, es, params.far_tol)?;
        lo = l;
        hi = h2;
    }
    // Trim anything past the first arrival.
    if let Some(k) = nodes.iter().position(|y| dist(y, &right) <= params.far_tol) {
        nodes.truncate(k + 1);
    }
    Ok(Orbit {
        nodes,
        step: h,
        segments,
        launch_angle,
        unstable_dim,
    })
}

fn restart_bracket(
    y0: [f64; 3],
    direction: &Vector3<f64>,
    h: f64,
    max_steps: usize,
    tube: &Tube,
    es: &EndStates,
    far_tol: f64,
) -> Result<(Shot, Shot)> {
    let run = |y: [f64; 3]| shoot(y, h, max_steps, tube, es);
    let param = |s: f64| [y0[0] + s * direction[0], y0[1] + s * direction[1], y0[2] + s * direction[2]];
    let mut s_max = (1e-3 * far_tol).max(1e-12);
    while s_max <= 1e-3 {
        let a = run(param(-s_max));
        let b = run(param(s_max));
        if a.fate == Fate::Arrived {
            return Ok((a.clone(), a));
        }
        if b.fate == Fate::Arrived {
            return Ok((b.clone(), b));
        }
        if opposite(a.fate, b.fate) {
            return Ok(match bisect(param, -s_max, s_max, a, b, &run) {
                Bisected::Arrived(s) => (s.clone(), s),
                Bisected::Bracket(l, h) => (l, h),
            });
        }
        s_max *= 10.0;
    }
    Err(Error::NoConnection(format!(
        "could not bracket the orbit at v = {:.6}",
        y0[0]
    )))
}
