use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{p_tilde, p_tilde_prime};

/// Far-field data of a 2-shock together with its speed and strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndStates {
    pub v_minus: f64,
    pub u_minus: f64,
    pub v_plus: f64,
    pub u_plus: f64,
    pub sigma: f64,
    pub delta_s: f64,
    pub phi_minus: f64,
    pub phi_plus: f64,
}

impl EndStates {
    /// Residuals of the two jump relations
    /// `-sigma [v] - [u] = 0` and `-sigma [u] + [p~(v)] = 0`.
    pub fn rh_residuals(&self) -> [f64; 2] {
        let dv = self.v_plus - self.v_minus;
        let du = self.u_plus - self.u_minus;
        let dp = p_tilde(self.v_plus) - p_tilde(self.v_minus);
        [-self.sigma * dv - du, -self.sigma * du + dp]
    }

    /// `(v, phi, E)` at the left rest point.
    pub fn left_rest(&self) -> [f64; 3] {
        [self.v_minus, self.phi_minus, 0.0]
    }

    /// `(v, phi, E)` at the right rest point.
    pub fn right_rest(&self) -> [f64; 3] {
        [self.v_plus, self.phi_plus, 0.0]
    }

    /// Velocity on the traveling wave from the integrated mass equation.
    #[inline]
    pub fn u_of_v(&self, v: f64) -> f64 {
        self.u_minus - self.sigma * (v - self.v_minus)
    }
}

/// Shock speed and far-field data of the 2-shock connecting `v_minus` to
/// `v_plus`, with `phi_± = -ln v_±`.
pub fn shock_speed(v_minus: f64, u_minus: f64, v_plus: f64) -> Result<EndStates> {
    if !(v_minus > 0.0) {
        return Err(Error::NonPositiveVolume {
            index: 0,
            value: v_minus,
        });
    }
    if !(v_plus > 0.0) {
        return Err(Error::NonPositiveVolume {
            index: 1,
            value: v_plus,
        });
    }
    if !u_minus.is_finite() || !v_minus.is_finite() || !v_plus.is_finite() {
        return Err(Error::InvalidArgument("end states must be finite".into()));
    }
    if v_plus == v_minus {
        return Err(Error::DegenerateShock(v_minus));
    }
    if v_plus < v_minus {
        return Err(Error::LaxViolation { v_minus, v_plus });
    }
    // -(p~(v+) - p~(v-)) / (v+ - v-) simplifies to 2 / (v- v+) for p~ = 2/v;
    // the simplified form stays accurate for nearly coincident states.
    let sigma = (2.0 / (v_minus * v_plus)).sqrt();
    let u_plus = u_minus - sigma * (v_plus - v_minus);
    Ok(EndStates {
        v_minus,
        u_minus,
        v_plus,
        u_plus,
        sigma,
        delta_s: u_minus - u_plus,
        phi_minus: -v_minus.ln(),
        phi_plus: -v_plus.ln(),
    })
}

/// Lax entropy condition `sqrt(-p~'(v+)) < sigma < sqrt(-p~'(v-))`.
pub fn check_lax(es: &EndStates) -> bool {
    let lo = (-p_tilde_prime(es.v_plus)).sqrt();
    let hi = (-p_tilde_prime(es.v_minus)).sqrt();
    lo < es.sigma && es.sigma < hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_shock() {
        let es = shock_speed(1.0, 0.0, 1.2).unwrap();
        assert!((es.sigma - 1.290994).abs() < 1e-6);
        assert!((es.u_plus + 0.258199).abs() < 1e-6);
        assert!((es.delta_s - 0.258199).abs() < 1e-6);
        assert_eq!(es.phi_minus, 0.0);
        assert_eq!(es.phi_plus, -(1.2f64).ln());
        for r in es.rh_residuals() {
            assert!(r.abs() < 1e-12);
        }
        assert!(check_lax(&es));
    }

    #[test]
    fn weak_limit_approaches_sound_speed() {
        let mut last = 0.0;
        for k in 2..9 {
            let eps = 10f64.powi(-k);
            let es = shock_speed(1.0, 0.0, 1.0 + eps).unwrap();
            last = es.sigma;
            assert!(check_lax(&es));
        }
        assert!((last - 2f64.sqrt()).abs() < 1e-7);
    }

    #[test]
    fn degenerate_and_reversed() {
        assert!(matches!(shock_speed(1.0, 0.0, 1.0), Err(Error::DegenerateShock(_))));
        assert!(matches!(shock_speed(1.2, 0.0, 1.0), Err(Error::LaxViolation { .. })));
        assert!(matches!(shock_speed(0.0, 0.0, 1.0), Err(Error::NonPositiveVolume { .. })));
    }

    #[test]
    fn lax_check_on_hand_built_states() {
        let mut es = shock_speed(1.0, 0.0, 1.2).unwrap();
        std::mem::swap(&mut es.v_minus, &mut es.v_plus);
        assert!(!check_lax(&es));
        let flat = EndStates {
            v_minus: 1.0,
            u_minus: 0.0,
            v_plus: 1.0,
            u_plus: 0.0,
            sigma: 2f64.sqrt(),
            delta_s: 0.0,
            phi_minus: 0.0,
            phi_plus: 0.0,
        };
        assert!(!check_lax(&flat));
    }

    proptest! {
        #[test]
        fn rankine_hugoniot_holds(v_minus in 0.2f64..5.0, u_minus in -3.0f64..3.0, ratio in 1.0001f64..2.0) {
            let es = shock_speed(v_minus, u_minus, v_minus * ratio).unwrap();
            let [r1, r2] = es.rh_residuals();
            prop_assert!(r1.abs() < 1e-12 && r2.abs() < 1e-12);
            let dv = es.v_plus - es.v_minus;
            let identity = es.sigma * es.sigma * dv + (p_tilde(es.v_plus) - p_tilde(es.v_minus));
            prop_assert!(identity.abs() < 1e-12);
            prop_assert!(es.delta_s > 0.0 && es.sigma > 0.0);
            prop_assert!(check_lax(&es));
        }
    }
}
