//! Monotone cubic Hermite interpolation (Fritsch–Carlson limiter).

/// Piecewise cubic Hermite interpolant whose node slopes have been limited
/// so that monotone data stays monotone between nodes.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl MonotoneCubic {
    /// Builds the interpolant from nodal values and slopes. `x` must be
    /// strictly increasing.
    pub fn new(x: &[f64], y: &[f64], slopes: &[f64]) -> Self {
        assert_eq!(x.len(), y.len());
        assert_eq!(x.len(), slopes.len());
        let n = x.len();
        let mut m = slopes.to_vec();
        for k in 0..n.saturating_sub(1) {
            let delta = (y[k + 1] - y[k]) / (x[k + 1] - x[k]);
            if delta == 0.0 {
                m[k] = 0.0;
                m[k + 1] = 0.0;
                continue;
            }
            let mut alpha = m[k] / delta;
            let mut beta = m[k + 1] / delta;
            if alpha < 0.0 {
                m[k] = 0.0;
                alpha = 0.0;
            }
            if beta < 0.0 {
                m[k + 1] = 0.0;
                beta = 0.0;
            }
            let r2 = alpha * alpha + beta * beta;
            if r2 > 9.0 {
                let tau = 3.0 / r2.sqrt();
                m[k] = tau * alpha * delta;
                m[k + 1] = tau * beta * delta;
            }
        }
        Self {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        }
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Limited slopes actually used by the interpolant.
    pub fn slopes(&self) -> &[f64] {
        &self.m
    }

    /// Index `k` with `x[k] <= t <= x[k+1]`, or `None` outside the range.
    pub fn locate(&self, t: f64) -> Option<usize> {
        locate(&self.x, t)
    }

    /// Value and derivative on interval `k`.
    #[inline]
    pub fn eval_in(&self, k: usize, t: f64) -> (f64, f64) {
        hermite(
            self.x[k],
            self.x[k + 1],
            self.y[k],
            self.y[k + 1],
            self.m[k],
            self.m[k + 1],
            t,
        )
    }
}

/// Interval lookup on a strictly increasing node vector.
pub(crate) fn locate(x: &[f64], t: f64) -> Option<usize> {
    let n = x.len();
    if n < 2 || !(t >= x[0]) || !(t <= x[n - 1]) {
        return None;
    }
    let k = x.partition_point(|&xi| xi <= t);
    Some(k.saturating_sub(1).min(n - 2))
}

#[inline]
fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, m0: f64, m1: f64, t: f64) -> (f64, f64) {
    let h = x1 - x0;
    let s = (t - x0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let value = h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1;
    let d00 = 6.0 * s2 - 6.0 * s;
    let d10 = 3.0 * s2 - 4.0 * s + 1.0;
    let d01 = -6.0 * s2 + 6.0 * s;
    let d11 = 3.0 * s2 - 2.0 * s;
    let slope = (d00 * y0 + d01 * y1) / h + d10 * m0 + d11 * m1;
    (value, slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_cubic_with_exact_slopes() {
        let x: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|t| t * t * t + t).collect();
        let m: Vec<f64> = x.iter().map(|t| 3.0 * t * t + 1.0).collect();
        let c = MonotoneCubic::new(&x, &y, &m);
        for j in 0..100 {
            let t = j as f64 * 0.01 + 0.003;
            let k = c.locate(t).unwrap();
            let (v, d) = c.eval_in(k, t);
            assert!((v - (t * t * t + t)).abs() < 1e-13);
            assert!((d - (3.0 * t * t + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn limiter_removes_overshoot() {
        let x = [0.0, 1.0, 2.0];
        let y = [0.0, 0.0, 1.0];
        let m = [5.0, 5.0, 5.0];
        let c = MonotoneCubic::new(&x, &y, &m);
        for j in 0..=200 {
            let t = j as f64 * 0.01;
            let k = c.locate(t).unwrap();
            let (v, _) = c.eval_in(k, t);
            assert!((-1e-15..=1.0 + 1e-15).contains(&v), "{t} -> {v}");
        }
    }

    #[test]
    fn locate_handles_edges() {
        let x = [0.0, 1.0, 2.0];
        assert_eq!(locate(&x, 0.0), Some(0));
        assert_eq!(locate(&x, 2.0), Some(1));
        assert_eq!(locate(&x, 1.0), Some(1));
        assert_eq!(locate(&x, -0.1), None);
        assert_eq!(locate(&x, f64::NAN), None);
    }

    proptest! {
        #[test]
        fn monotone_data_stays_monotone(
            steps in proptest::collection::vec(0.0f64..1.0, 3..20),
            slopes in proptest::collection::vec(0.0f64..50.0, 20),
        ) {
            let n = steps.len();
            let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
            let mut y = vec![0.0; n];
            for i in 1..n { y[i] = y[i - 1] + steps[i]; }
            let c = MonotoneCubic::new(&x, &y, &slopes[..n]);
            for k in 0..n - 1 {
                let mut prev = y[k];
                for j in 1..=16 {
                    let t = k as f64 + j as f64 / 16.0;
                    let (v, _) = c.eval_in(k, t);
                    prop_assert!(v >= prev - 1e-12);
                    prop_assert!(v <= y[k + 1] + 1e-12);
                    prev = v;
                }
            }
        }
    }
}
