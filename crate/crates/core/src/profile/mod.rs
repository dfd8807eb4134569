//! The 2-shock traveling wave `(v, u, phi)(x - sigma t)`: end states,
//! construction, interpolated evaluation and verification.

mod endstates;
mod interp;
mod io;
pub mod ode;
mod relax;
mod shooting;
mod verify;

pub use endstates::{check_lax, shock_speed, EndStates};
pub use interp::MonotoneCubic;
pub use io::PROFILE_FORMAT_VERSION;
pub use ode::{jacobian, profile_rhs, spectrum, RestPointSpectrum};
pub use relax::RelaxationParams;
pub use verify::{verify_profile, ProfileReport, TailFit};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Knobs of the profile solver. Defaults follow the reference setup: RK4
/// step `min(0.01, 0.01/delta)`, launch distance `1e-7 delta`, budget
/// `200/delta`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ProfileParams {
    pub delta_ceiling: f64,
    pub launch_scale: f64,
    pub step: Option<f64>,
    pub xi_budget: Option<f64>,
    /// Max-norm distance to the right rest point that ends the orbit.
    pub far_tol: f64,
    /// Upper bound on the separation of bracketing trajectories kept.
    pub sep_tol: f64,
    pub angle_samples: usize,
    pub relaxation_fallback: bool,
    pub force_relaxation: bool,
    pub relaxation: RelaxationParams,
}

impl Default for ProfileParams {
    fn default() -> Self {
        Self {
            delta_ceiling: 0.3,
            launch_scale: 1e-7,
            step: None,
            xi_budget: None,
            far_tol: 1e-8,
            sep_tol: 1e-10,
            angle_samples: 72,
            relaxation_fallback: true,
            force_relaxation: false,
            relaxation: RelaxationParams::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileMethod {
    Shooting,
    Relaxation,
}

/// How the tabulated profile was obtained.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverMeta {
    pub method: ProfileMethod,
    pub step: f64,
    pub segments: usize,
    pub launch_angle: Option<f64>,
    pub unstable_dim: usize,
    /// Why shooting was abandoned, when the relaxation fallback ran.
    pub fallback_reason: Option<String>,
}

/// Point values (or derivatives) of `(v, u, phi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub v: f64,
    pub u: f64,
    pub phi: f64,
}

/// Profile fields and first derivatives at a batch of coordinates.
#[derive(Debug, Clone, Default)]
pub struct SampledProfile {
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub phi: Vec<f64>,
    pub dv: Vec<f64>,
    pub du: Vec<f64>,
    pub dphi: Vec<f64>,
}

/// Tabulated traveling wave, normalised so `vbar(0) = (v_- + v_+)/2` at
/// `xi_nodes[anchor_index] = 0`.
#[derive(Debug, Clone)]
pub struct ShockProfile {
    pub endstates: EndStates,
    pub xi_nodes: Vec<f64>,
    pub vbar: Vec<f64>,
    pub ubar: Vec<f64>,
    pub phibar: Vec<f64>,
    /// `phibar' / vbar`.
    pub ebar: Vec<f64>,
    pub dvbar: Vec<f64>,
    pub dubar: Vec<f64>,
    pub dphibar: Vec<f64>,
    pub anchor_index: usize,
    pub meta: SolverMeta,
    interp_v: MonotoneCubic,
    interp_u: MonotoneCubic,
    interp_phi: MonotoneCubic,
}

impl ShockProfile {
    /// Assembles a profile from `(v, phi, E)` samples and slopes; `u` is
    /// rebuilt from `v` so that `sigma v' + u' = 0` holds exactly.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_states(
        endstates: EndStates,
        xi_nodes: Vec<f64>,
        vbar: Vec<f64>,
        phibar: Vec<f64>,
        ebar: Vec<f64>,
        dvbar: Vec<f64>,
        dphibar: Vec<f64>,
        anchor_index: usize,
        meta: SolverMeta,
    ) -> Result<Self> {
        let n = xi_nodes.len();
        for len in [vbar.len(), phibar.len(), ebar.len(), dvbar.len(), dphibar.len()] {
            crate::error::check_len(n, len)?;
        }
        if n < 4 {
            return Err(Error::InvalidArgument("profile needs at least 4 nodes".into()));
        }
        if xi_nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("profile nodes must increase strictly".into()));
        }
        if anchor_index >= n {
            return Err(Error::InvalidArgument("anchor index out of range".into()));
        }
        let sigma = endstates.sigma;
        let ubar: Vec<f64> = vbar.iter().map(|&v| endstates.u_of_v(v)).collect();
        let dubar: Vec<f64> = dvbar.iter().map(|&dv| -sigma * dv).collect();
        let interp_v = MonotoneCubic::new(&xi_nodes, &vbar, &dvbar);
        let interp_u = MonotoneCubic::new(&xi_nodes, &ubar, &dubar);
        let interp_phi = MonotoneCubic::new(&xi_nodes, &phibar, &dphibar);
        Ok(Self {
            endstates,
            xi_nodes,
            vbar,
            ubar,
            phibar,
            ebar,
            dvbar,
            dubar,
            dphibar,
            anchor_index,
            meta,
            interp_v,
            interp_u,
            interp_phi,
        })
    }

    pub fn len(&self) -> usize {
        self.xi_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi_nodes.is_empty()
    }

    pub fn xi_range(&self) -> (f64, f64) {
        (self.xi_nodes[0], *self.xi_nodes.last().expect("nonempty"))
    }

    fn far_field(&self, xi: f64) -> Sample {
        let es = &self.endstates;
        if xi < self.xi_nodes[0] {
            Sample {
                v: es.v_minus,
                u: es.u_minus,
                phi: es.phi_minus,
            }
        } else {
            Sample {
                v: es.v_plus,
                u: es.u_plus,
                phi: es.phi_plus,
            }
        }
    }

    #[inline]
    fn eval_interval(&self, k: usize, xi: f64) -> (Sample, Sample) {
        let (v, dv) = self.interp_v.eval_in(k, xi);
        let (u, du) = self.interp_u.eval_in(k, xi);
        let (phi, dphi) = self.interp_phi.eval_in(k, xi);
        (Sample { v, u, phi }, Sample { v: dv, u: du, phi: dphi })
    }

    /// `(vbar, ubar, phibar)` at `xi`; far-field constants outside the table.
    pub fn value_at(&self, xi: f64) -> Sample {
        match self.interp_v.locate(xi) {
            Some(k) => self.eval_interval(k, xi).0,
            None => self.far_field(xi),
        }
    }

    /// First derivatives at `xi`; zero outside the table.
    pub fn slope_at(&self, xi: f64) -> Sample {
        match self.interp_v.locate(xi) {
            Some(k) => self.eval_interval(k, xi).1,
            None => Sample {
                v: 0.0,
                u: 0.0,
                phi: 0.0,
            },
        }
    }

    /// Values and slopes at nondecreasing coordinates `xis`, walking the
    /// table once.
    pub fn sample_sorted(&self, xis: &[f64]) -> SampledProfile {
        let n = xis.len();
        let mut out = SampledProfile {
            v: Vec::with_capacity(n),
            u: Vec::with_capacity(n),
            phi: Vec::with_capacity(n),
            dv: Vec::with_capacity(n),
            du: Vec::with_capacity(n),
            dphi: Vec::with_capacity(n),
        };
        let nodes = &self.xi_nodes;
        let (lo, hi) = self.xi_range();
        let mut k = 0usize;
        for &xi in xis {
            let (val, der) = if xi >= lo && xi <= hi {
                while k + 2 < nodes.len() && nodes[k + 1] <= xi {
                    k += 1;
                }
                if nodes[k] > xi {
                    // unsorted input: fall back to a search
                    k = interp::locate(nodes, xi).expect("inside range");
                }
                self.eval_interval(k, xi)
            } else {
                (
                    self.far_field(xi),
                    Sample {
                        v: 0.0,
                        u: 0.0,
                        phi: 0.0,
                    },
                )
            };
            out.v.push(val.v);
            out.u.push(val.u);
            out.phi.push(val.phi);
            out.dv.push(der.v);
            out.du.push(der.u);
            out.dphi.push(der.phi);
        }
        out
    }

    /// Profile evaluated on a grid at time `t` and shift `x_shift`, i.e. at
    /// `xi_i = x_i - sigma t - x_shift`.
    pub fn sample_on_grid(&self, grid: &crate::Grid, t: f64, x_shift: f64) -> SampledProfile {
        let offset = self.endstates.sigma * t + x_shift;
        let xis: Vec<f64> = (0..grid.n_nodes()).map(|i| grid.x(i) - offset).collect();
        self.sample_sorted(&xis)
    }
}

/// Evaluates the profile (`order = 0`) or its first derivative
/// (`order = 1`) at `xi`.
pub fn eval_profile(profile: &ShockProfile, xi: f64, order: usize) -> Result<Sample> {
    match order {
        0 => Ok(profile.value_at(xi)),
        1 => Ok(profile.slope_at(xi)),
        _ => Err(Error::InvalidArgument(format!(
            "profile evaluation order must be 0 or 1, got {order}"
        ))),
    }
}

/// Builds the normalised 2-shock profile for `endstates`.
pub fn solve_profile(endstates: &EndStates, params: &ProfileParams) -> Result<ShockProfile> {
    let es = *endstates;
    if !check_lax(&es) {
        return Err(Error::LaxViolation {
            v_minus: es.v_minus,
            v_plus: es.v_plus,
        });
    }
    if es.delta_s > params.delta_ceiling {
        return Err(Error::StrengthAboveCeiling {
            delta: es.delta_s,
            ceiling: params.delta_ceiling,
        });
    }
    if params.force_relaxation {
        return relax::relax_profile(&es, params, "forced by configuration".into());
    }
    match shooting::shoot_profile(&es, params) {
        Ok(orbit) => from_orbit(&es, orbit),
        Err(Error::UnexpectedSpectrum(d)) => Err(Error::UnexpectedSpectrum(d)),
        Err(e) if params.relaxation_fallback => {
            log::warn!("shooting failed ({e}); running relaxation fallback");
            relax::relax_profile(&es, params, e.to_string())
        }
        Err(e) => Err(e),
    }
}

/// Re-centres a shot orbit at the midpoint crossing and tabulates it.
fn from_orbit(es: &EndStates, orbit: shooting::Orbit) -> Result<ShockProfile> {
    let h = orbit.step;
    let mut xi: Vec<f64> = (0..orbit.nodes.len()).map(|k| k as f64 * h).collect();
    let mut ys = orbit.nodes;
    let mid = 0.5 * (es.v_minus + es.v_plus);
    let k = ys
        .windows(2)
        .position(|w| w[0][0] <= mid && mid < w[1][0])
        .ok_or_else(|| Error::NoConnection("orbit never crosses the midpoint volume".into()))?;
    let anchor = if ys[k][0] == mid {
        k
    } else {
        // Solve v(RK4(y_k, d)) = mid for d in (0, h) by bisection.
        let (mut lo, mut hi) = (0.0, h);
        let mut y_mid = ys[k];
        for _ in 0..200 {
            let d = 0.5 * (lo + hi);
            if d <= lo || d >= hi {
                break;
            }
            let y = ode::rk4_step(ys[k], d, es);
            y_mid = y;
            if y[0] < mid {
                lo = d;
            } else {
                hi = d;
            }
        }
        let d = 0.5 * (lo + hi);
        let mut y_anchor = ode::rk4_step(ys[k], d, es);
        if (y_anchor[0] - mid).abs() > (y_mid[0] - mid).abs() {
            y_anchor = y_mid;
        }
        y_anchor[0] = mid;
        // Replace the nearer node so every interval stays within [h/2, 3h/2].
        let slot = if d < 0.5 * h && k > 0 { k } else { k + 1 };
        if slot == k + 1 && k + 2 >= ys.len() {
            ys.insert(k + 1, y_anchor);
            xi.insert(k + 1, xi[k] + d);
        } else {
            ys[slot] = y_anchor;
            xi[slot] = xi[k] + d;
        }
        slot
    };
    let x0 = xi[anchor];
    for x in xi.iter_mut() {
        *x -= x0;
    }
    xi[anchor] = 0.0;
    let n = ys.len();
    let mut vbar = Vec::with_capacity(n);
    let mut phibar = Vec::with_capacity(n);
    let mut ebar = Vec::with_capacity(n);
    let mut dvbar = Vec::with_capacity(n);
    let mut dphibar = Vec::with_capacity(n);
    for y in &ys {
        let f = ode::rhs(*y, es);
        vbar.push(y[0]);
        phibar.push(y[1]);
        ebar.push(y[2]);
        dvbar.push(f[0]);
        dphibar.push(f[1]);
    }
    ShockProfile::from_states(
        *es,
        xi,
        vbar,
        phibar,
        ebar,
        dvbar,
        dphibar,
        anchor,
        SolverMeta {
            method: ProfileMethod::Shooting,
            step: h,
            segments: orbit.segments,
            launch_angle: orbit.launch_angle,
            unstable_dim: orbit.unstable_dim,
            fallback_reason: None,
        },
    )
}
