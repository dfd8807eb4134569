//! Perturbation families and initial data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Family, MassMode, PerturbationSpec, Target};
use crate::error::{Error, Result};
use crate::evolve::State;
use crate::grid::Grid;
use crate::profile::ShockProfile;

/// Gaussian support radius in units of the width (`exp(-18) ~ 1.5e-8`).
const GAUSS_REACH: f64 = 6.0;

pub fn gaussian(x: f64, center: f64, width: f64) -> f64 {
    let z = (x - center) / width;
    (-0.5 * z * z).exp()
}

/// `-(x - c)/w * exp(-(x - c)^2 / (2 w^2))`, the derivative of a Gaussian
/// scaled to unit width; odd about `c` so its integral vanishes.
pub fn dipole(x: f64, center: f64, width: f64) -> f64 {
    let z = (x - center) / width;
    -z * (-0.5 * z * z).exp()
}

/// C-infinity bump `exp(1 - 1/(1 - r^2))` for `|r| < 1`, peak 1 at the centre.
pub fn compact_bump(x: f64, center: f64, radius: f64) -> f64 {
    let r = (x - center) / radius;
    if r.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r * r)).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub amplitude: f64,
    pub center: f64,
    pub radius: f64,
}

/// `count` compact bumps with seeded centres in `[c - w, c + w]`, radii in
/// `[w/4, w]` and amplitudes in `[A/2, A]` with random signs.
pub fn random_bumps(seed: u64, count: usize, amplitude: f64, center: f64, width: f64) -> Vec<Bump> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            Bump {
                amplitude: sign * amplitude * rng.gen_range(0.5..=1.0),
                center: center + width * rng.gen_range(-1.0..=1.0),
                radius: width * rng.gen_range(0.25..=1.0),
            }
        })
        .collect()
}

pub fn bumps_field(bumps: &[Bump], xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|&x| bumps.iter().map(|b| b.amplitude * compact_bump(x, b.center, b.radius)).sum())
        .collect()
}

/// Distance from the origin beyond which the perturbation vanishes to
/// round-off.
pub fn reach(spec: &PerturbationSpec) -> f64 {
    match spec.family {
        Family::None => 0.0,
        Family::Gaussian | Family::Dipole => {
            let w = match spec.mass_mode {
                MassMode::Zero if spec.family == Family::Gaussian => 2.0 * spec.width,
                _ => spec.width,
            };
            spec.center.abs() + GAUSS_REACH * w
        }
        Family::ShiftedProfile => spec.shift.abs(),
        Family::RandomBumps => spec.center.abs() + 2.0 * spec.width,
    }
}

/// Additive perturbation profile on `xs` (before the target is applied).
pub fn shape(spec: &PerturbationSpec, xs: &[f64], seed: u64) -> Vec<f64> {
    let (a, c, w) = (spec.amplitude, spec.center, spec.width);
    match spec.family {
        Family::None | Family::ShiftedProfile => vec![0.0; xs.len()],
        Family::Gaussian => xs
            .iter()
            .map(|&x| match spec.mass_mode {
                MassMode::Free => a * gaussian(x, c, w),
                // subtract a Gaussian of twice the width and equal mass
                MassMode::Zero => a * (gaussian(x, c, w) - 0.5 * gaussian(x, c, 2.0 * w)),
            })
            .collect(),
        Family::Dipole => xs.iter().map(|&x| a * dipole(x, c, w)).collect(),
        Family::RandomBumps => bumps_field(&random_bumps(seed, spec.count, a, c, w), xs),
    }
}

/// Profile sampled on the grid plus the configured perturbation. End nodes
/// carry the far-field constants exactly.
pub fn make_initial(profile: &ShockProfile, grid: &Grid, spec: &PerturbationSpec, seed: u64) -> Result<State> {
    let xs = grid.nodes();
    let r = reach(spec);
    let room = grid.left().abs().min(grid.right().abs());
    if spec.family != Family::None && !(r < room) {
        return Err(Error::Validation(vec![format!(
            "perturbation support (reach {r:.3}) leaves the domain [{:.3}, {:.3}]",
            grid.left(),
            grid.right()
        )]));
    }
    let x_shift = if spec.family == Family::ShiftedProfile { spec.shift } else { 0.0 };
    let base = profile.sample_on_grid(grid, 0.0, x_shift);
    let mut v = base.v;
    let mut u = base.u;
    let p = shape(spec, &xs, seed);
    let (to_v, to_u) = match spec.target {
        Target::U => (false, true),
        Target::V => (true, false),
        Target::Uv => (true, true),
    };
    for i in 0..xs.len() {
        if to_v {
            v[i] += p[i];
        }
        if to_u {
            u[i] += p[i];
        }
    }
    let es = &profile.endstates;
    let n = xs.len();
    v[0] = es.v_minus;
    u[0] = es.u_minus;
    v[n - 1] = es.v_plus;
    u[n - 1] = es.u_plus;
    State::new(v, u, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_mass_and_dipole_zero_mass() {
        let g = Grid::new(100.0, 4000).unwrap();
        let xs = g.nodes();
        let spec = PerturbationSpec {
            family: Family::Gaussian,
            amplitude: 0.01,
            width: 5.0,
            ..PerturbationSpec::default()
        };
        let m = g.integrate(&shape(&spec, &xs, 0));
        assert!((m - 0.1253314).abs() < 1e-7, "{m}");
        let zero = PerturbationSpec {
            mass_mode: MassMode::Zero,
            ..spec.clone()
        };
        assert!(g.integrate(&shape(&zero, &xs, 0)).abs() < 1e-12);
        let d = PerturbationSpec {
            family: Family::Dipole,
            center: 3.0,
            ..spec
        };
        assert!(g.integrate(&shape(&d, &xs, 0)).abs() < 1e-12);
    }

    #[test]
    fn bumps_are_compact_smooth_and_seeded() {
        assert_eq!(compact_bump(2.0, 0.0, 2.0), 0.0);
        assert_eq!(compact_bump(0.0, 0.0, 2.0), 1.0);
        assert!(compact_bump(1.999, 0.0, 2.0) < 1e-100);
        let a = random_bumps(7, 5, 0.01, 0.0, 10.0);
        assert_eq!(a, random_bumps(7, 5, 0.01, 0.0, 10.0));
        assert_ne!(a, random_bumps(8, 5, 0.01, 0.0, 10.0));
        for b in &a {
            assert!(b.amplitude.abs() <= 0.01 && b.amplitude.abs() >= 0.005);
            assert!(b.center.abs() <= 10.0);
        }
    }
}
