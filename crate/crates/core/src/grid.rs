//! Uniform grid in the Lagrangian mass coordinate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform node-centred grid on `[center - L, center + L]` with `n_cells`
/// cells and `n_cells + 1` nodes. Node 0 and node `n_cells` carry the
/// Dirichlet far-field data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub half_width: f64,
    pub n_cells: usize,
    #[serde(default)]
    pub center: f64,
}

impl Grid {
    pub const MIN_CELLS: usize = 16;

    pub fn new(half_width: f64, n_cells: usize) -> Result<Self> {
        Self::centered(half_width, n_cells, 0.0)
    }

    pub fn centered(half_width: f64, n_cells: usize, center: f64) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "grid half width must be positive, got {half_width}"
            )));
        }
        if n_cells < Self::MIN_CELLS {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least {} cells, got {n_cells}",
                Self::MIN_CELLS
            )));
        }
        Ok(Self {
            half_width,
            n_cells,
            center,
        })
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.n_cells as f64
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    #[inline]
    pub fn left(&self) -> f64 {
        self.center - self.half_width
    }

    #[inline]
    pub fn right(&self) -> f64 {
        self.center + self.half_width
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.left() + i as f64 * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_nodes()).map(|i| self.x(i)).collect()
    }

    /// Same domain with `factor` times as many cells.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            n_cells: self.n_cells * factor,
            ..*self
        }
    }

    /// Trapezoidal quadrature of nodal values.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        trapezoid(f, self.dx())
    }
}

/// Trapezoidal rule on uniformly spaced samples.
pub fn trapezoid(f: &[f64], h: f64) -> f64 {
    match f.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = f[1..n - 1].iter().sum();
            h * (inner + 0.5 * (f[0] + f[n - 1]))
        }
    }
}

/// Second-order first derivative: central in the interior, one-sided
/// three-point closures at the ends.
pub fn diff1(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    if n < 3 {
        if n == 2 {
            let s = (f[1] - f[0]) / h;
            d[0] = s;
            d[1] = s;
        }
        return d;
    }
    for i in 1..n - 1 {
        d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    }
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    d
}

/// Second-order second derivative: three-point central in the interior,
/// four-point one-sided closures at the ends.
pub fn diff2(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    if n < 4 {
        return d;
    }
    let h2 = h * h;
    for i in 1..n - 1 {
        d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
    }
    d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
    d[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_nodes() {
        let g = Grid::new(1.0, 20).unwrap();
        assert!((g.dx() - 0.1).abs() < 1e-15);
        assert_eq!(g.n_nodes(), 21);
        assert!((g.x(20) - 1.0).abs() < 1e-14);
        assert!(Grid::new(1.0, 8).is_err());
        assert!(Grid::new(-1.0, 32).is_err());
    }

    #[test]
    fn trapezoid_exact_on_linear() {
        let g = Grid::new(2.0, 40).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|x| 3.0 * x + 1.0).collect();
        assert!((g.integrate(&f) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn difference_stencils_exact_on_quadratics() {
        let h = 0.1;
        let f: Vec<f64> = (0..12).map(|i| (i as f64 * h).powi(2)).collect();
        let d1 = diff1(&f, h);
        let d2 = diff2(&f, h);
        for i in 0..12 {
            assert!((d1[i] - 2.0 * i as f64 * h).abs() < 1e-11, "d1 at {i}");
            assert!((d2[i] - 2.0).abs() < 1e-9, "d2 at {i}");
        }
    }
}
