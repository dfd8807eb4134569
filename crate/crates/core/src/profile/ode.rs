//! Reduced traveling-wave system in the unknowns `(v, phi, E)` with
//! `E = phi' / v`, obtained by integrating the mass and momentum equations
//! once from the left state and eliminating `u = u_- - sigma (v - v_-)`.

use nalgebra::{Complex, Matrix3, Vector3};

use super::EndStates;
use crate::error::{Error, Result};
use crate::p_tilde;

/// Right-hand side `(v', phi', E')` of the reduced profile system.
pub fn profile_rhs(y: [f64; 3], es: &EndStates) -> Result<[f64; 3]> {
    if !(y[0] > 0.0) {
        return Err(Error::NonPositiveVolume {
            index: 0,
            value: y[0],
        });
    }
    Ok(rhs(y, es))
}

#[inline]
pub(crate) fn rhs(y: [f64; 3], es: &EndStates) -> [f64; 3] {
    let [v, phi, e] = y;
    let s = es.sigma;
    let exp_phi = phi.exp();
    let bracket = s * s * (v - es.v_minus) + p_tilde(v) - p_tilde(es.v_minus) - 0.5 * e * e
        - 1.0 / v
        + exp_phi;
    [-(v / s) * bracket, v * e, v * exp_phi - 1.0]
}

/// Analytic Jacobian of [`profile_rhs`].
pub fn jacobian(y: [f64; 3], es: &EndStates) -> Matrix3<f64> {
    let [v, phi, e] = y;
    let s = es.sigma;
    let exp_phi = phi.exp();
    let bracket = s * s * (v - es.v_minus) + 1.0 / v - 2.0 / es.v_minus - 0.5 * e * e + exp_phi;
    Matrix3::new(
        -bracket / s - (v / s) * (s * s - 1.0 / (v * v)),
        -(v / s) * exp_phi,
        (v / s) * e,
        e,
        0.0,
        v,
        exp_phi,
        v * exp_phi,
        0.0,
    )
}

/// Eigen-decomposition summary of the linearisation at a rest point.
#[derive(Debug, Clone)]
pub struct RestPointSpectrum {
    pub eigenvalues: Vec<Complex<f64>>,
    /// Real basis of the unstable subspace: real eigenvectors, or the real
    /// and imaginary parts of a complex eigenvector.
    pub unstable_basis: Vec<Vector3<f64>>,
    /// Real basis of the stable subspace, built the same way.
    pub stable_basis: Vec<Vector3<f64>>,
}

impl RestPointSpectrum {
    pub fn unstable_dim(&self) -> usize {
        self.eigenvalues.iter().filter(|l| l.re > 0.0).count()
    }

    /// Slowest decay rate `min |Re lambda|` over the given half plane.
    pub fn slowest_rate(&self, unstable: bool) -> Option<f64> {
        self.eigenvalues
            .iter()
            .filter(|l| if unstable { l.re > 0.0 } else { l.re < 0.0 })
            .map(|l| l.re.abs())
            .min_by(|a, b| a.total_cmp(b))
    }
}

pub fn spectrum(y: [f64; 3], es: &EndStates) -> RestPointSpectrum {
    let j = jacobian(y, es);
    let mut eigenvalues: Vec<Complex<f64>> = j.complex_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut unstable_basis = Vec::new();
    let mut stable_basis = Vec::new();
    let mut skip_conjugate = false;
    for (idx, lambda) in eigenvalues.iter().enumerate() {
        if skip_conjugate {
            skip_conjugate = false;
            continue;
        }
        let w = null_vector(&j, *lambda);
        let target = if lambda.re > 0.0 {
            &mut unstable_basis
        } else {
            &mut stable_basis
        };
        if lambda.im.abs() > 1e-12 * lambda.norm().max(1.0) {
            target.push(w.map(|c| c.re).normalize());
            target.push(w.map(|c| c.im).normalize());
            skip_conjugate = eigenvalues
                .get(idx + 1)
                .map(|next| (next - lambda.conj()).norm() < 1e-8 * lambda.norm().max(1.0))
                .unwrap_or(false);
        } else {
            target.push(w.map(|c| c.re).normalize());
        }
    }
    RestPointSpectrum {
        eigenvalues,
        unstable_basis,
        stable_basis,
    }
}

/// Null vector of `J - lambda I` from the largest cross product of two rows.
fn null_vector(j: &Matrix3<f64>, lambda: Complex<f64>) -> Vector3<Complex<f64>> {
    let a = j.map(|x| Complex::new(x, 0.0)) - Matrix3::identity().map(|x: f64| Complex::new(x, 0.0)) * lambda;
    let rows = [a.row(0).transpose(), a.row(1).transpose(), a.row(2).transpose()];
    let cross = |p: &Vector3<Complex<f64>>, q: &Vector3<Complex<f64>>| {
        Vector3::new(
            p[1] * q[2] - p[2] * q[1],
            p[2] * q[0] - p[0] * q[2],
            p[0] * q[1] - p[1] * q[0],
        )
    };
    let candidates = [
        cross(&rows[0], &rows[1]),
        cross(&rows[0], &rows[2]),
        cross(&rows[1], &rows[2]),
    ];
    let best = candidates
        .into_iter()
        .max_by(|p, q| p.norm().total_cmp(&q.norm()))
        .expect("three candidates");
    // Rotate the phase so the largest component is real and positive.
    let (k, _) = best
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .expect("nonempty");
    let phase = best[k] / Complex::new(best[k].norm(), 0.0);
    let w = best.map(|c| c / phase);
    let n = w.norm();
    w.map(|c| c / n)
}

/// One classical RK4 step of the reduced system.
#[inline]
pub(crate) fn rk4_step(y: [f64; 3], h: f64, es: &EndStates) -> [f64; 3] {
    let add = |a: [f64; 3], b: [f64; 3], s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]];
    let k1 = rhs(y, es);
    let k2 = rhs(add(y, k1, 0.5 * h), es);
    let k3 = rhs(add(y, k2, 0.5 * h), es);
    let k4 = rhs(add(y, k3, h), es);
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        y[2] + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::shock_speed;

    #[test]
    fn rest_points_are_equilibria() {
        let es = shock_speed(1.0, 0.0, 1.2).unwrap();
        let l = profile_rhs([1.0, 0.0, 0.0], &es).unwrap();
        assert_eq!(l, [0.0, 0.0, 0.0]);
        let r = profile_rhs([1.2, -(1.2f64).ln(), 0.0], &es).unwrap();
        for c in r {
            assert!(c.abs() < 1e-14, "{r:?}");
        }
    }

    #[test]
    fn hand_evaluated_interior_point() {
        let es = shock_speed(1.0, 0.0, 1.2).unwrap();
        let r = profile_rhs([1.1, -(1.1f64).ln(), 0.0], &es).unwrap();
        // bracket = sigma^2 (0.1) + 2/1.1 - 2 - 1/1.1 + 1/1.1 = 1/6 - 2/11
        let bracket = 1.0 / 6.0 - 2.0 / 11.0;
        let expected = -(1.1 / es.sigma) * bracket;
        assert!((r[0] - expected).abs() < 1e-14);
        assert!((r[0] - 0.012910).abs() < 1e-6);
        assert!(r[1].abs() < 1e-15);
        assert!(r[2].abs() < 1e-14);
    }

    #[test]
    fn rejects_nonpositive_volume() {
        let es = shock_speed(1.0, 0.0, 1.2).unwrap();
        assert!(profile_rhs([0.0, 0.0, 0.0], &es).is_err());
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let es = shock_speed(1.0, 0.0, 1.2).unwrap();
        let y = [1.07, -0.05, -0.013];
        let j = jacobian(y, &es);
        let h = 1e-6;
        for k in 0..3 {
            let mut yp = y;
            let mut ym = y;
            yp[k] += h;
            ym[k] -= h;
            let fp = rhs(yp, &es);
            let fm = rhs(ym, &es);
            for i in 0..3 {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                assert!((j[(i, k)] - fd).abs() < 1e-8, "J[{i},{k}] = {} vs {fd}", j[(i, k)]);
            }
        }
    }

    #[test]
    fn reference_spectra() {
        let es = shock_speed(1.0, 0.0, 1.2).unwrap();
        let left = spectrum(es.left_rest(), &es);
        assert_eq!(left.unstable_dim(), 2);
        assert_eq!(left.unstable_basis.len(), 2);
        let right = spectrum(es.right_rest(), &es);
        assert_eq!(right.unstable_dim(), 1);
        assert_eq!(right.stable_basis.len(), 2);
        // slow decay into the right state is of the order of the strength
        let slow = right.slowest_rate(false).unwrap();
        assert!(slow > 0.1 * es.delta_s && slow < 2.0 * es.delta_s, "{slow}");
    }

    #[test]
    fn eigenvectors_satisfy_eigen_equation() {
        let es = shock_speed(1.0, 0.0, 1.1).unwrap();
        let j = jacobian(es.left_rest(), &es);
        let spec = spectrum(es.left_rest(), &es);
        for lambda in &spec.eigenvalues {
            let w = null_vector(&j, *lambda);
            let jw = j.map(|x| Complex::new(x, 0.0)) * w;
            assert!((jw - w * *lambda).norm() < 1e-10);
        }
    }
}
