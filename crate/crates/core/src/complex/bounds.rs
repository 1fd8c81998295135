use std::f64::consts::PI;

use serde::Serialize;

use super::Complex;
use crate::error::{Error, Result};

/// Degree, edge-length and angle bounds of a complex together with the
/// constants of the uniform Poincaré theory that they determine.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeometryBounds {
    pub n: usize,
    /// Maximum number of edges at a vertex.
    pub m: usize,
    /// Shortest edge.
    pub ell: f64,
    /// Smallest interior angle (π for graphs).
    pub alpha: f64,
    pub kappa: f64,
    pub r0: f64,
    pub c_weak: f64,
    pub c_x: f64,
    pub p0: f64,
    /// Overlap bound for the dilated Whitney balls.
    pub k_overlap: f64,
    /// Volume doubling constant used in the chain argument.
    pub c_vol: f64,
}

impl GeometryBounds {
    /// Evaluate every constant from (n, M, ℓ, α). Works for any n ≥ 1.
    pub fn new(n: usize, m: usize, ell: f64, alpha: f64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::Degenerate("dimension and degree must be positive".into()));
        }
        if !(ell > 0.0) || !ell.is_finite() {
            return Err(Error::Degenerate(format!("shortest edge length {ell}")));
        }
        if !(alpha > 0.0) || alpha > PI + 1e-12 {
            return Err(Error::Degenerate(format!("angle bound {alpha}")));
        }
        let nf = n as f64;
        let mf = m as f64;
        let kappa = 6.0 * (2.0 / (2.0 * (1.0 - alpha.cos())).sqrt() + 1.0).powi(n as i32);
        let r0 = ell / kappa;
        let two = 2f64.powi(3 * n as i32 + 3);
        let c_weak = two * mf.powi(3) * kappa.powi(n as i32 + 1) / (alpha * nf);
        let c_x = two * mf * mf / (alpha * nf);
        let k_overlap = mf * (8.0 * (1.0 + 1e3 * kappa)).powi(n as i32);
        let chain = 1.0 + 3.0 * mf.powi(3) * 2f64.powi(n as i32) * (1e3 * kappa + 9.0).powi(n as i32);
        let p0 = chain * k_overlap * c_weak * 6.0 * kappa;
        let c_vol = mf * 2f64.powi(n as i32);
        Ok(GeometryBounds { n, m, ell, alpha, kappa, r0, c_weak, c_x, p0, k_overlap, c_vol })
    }

    /// Scan a complex for M, ℓ and α.
    pub fn of(x: &Complex) -> Result<Self> {
        let m = (0..x.vertices().len()).map(|v| x.degree(v)).max().unwrap_or(0);
        let ell = x.min_edge_length();
        if !(ell > 0.0) {
            return Err(Error::Degenerate("zero-length edge".into()));
        }
        let alpha = if x.dimension() == 1 {
            PI
        } else {
            x.faces()
                .iter()
                .flat_map(|f| (0..f.vertices.len()).map(move |i| f.angle(i)))
                .fold(PI, f64::min)
        };
        GeometryBounds::new(x.dimension(), m, ell, alpha)
    }

    /// Volume growth exponent used in the doubling bound (N = n).
    pub fn growth_exponent(&self) -> f64 {
        self.n as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::library;

    #[test]
    fn square_grid_constants() {
        let b = GeometryBounds::of(&library::square_grid(3, 3)).unwrap();
        let k = 6.0 * (2f64.sqrt() + 1.0).powi(2);
        assert!((b.kappa - k).abs() < 1e-12 * k);
        assert!((b.kappa - 34.97).abs() < 0.01);
        assert!((b.r0 - 0.0286).abs() < 1e-4);
        assert_eq!(b.m, 4);
    }

    #[test]
    fn graph_constants() {
        let b = GeometryBounds::of(&library::star(3)).unwrap();
        assert!((b.kappa - 12.0).abs() < 1e-12);
        assert!((b.r0 - 1.0 / 12.0).abs() < 1e-15);
        assert!((b.c_x - 2f64.powi(6) * 9.0 / PI).abs() < 1e-9);
    }

    #[test]
    fn degenerate_rejected() {
        assert!(matches!(GeometryBounds::new(1, 2, 0.0, PI), Err(Error::Degenerate(_))));
        assert!(matches!(GeometryBounds::new(2, 4, 1.0, 0.0), Err(Error::Degenerate(_))));
        let mut s = library::interval(1.0).to_spec();
        s.edges[0].length = 0.0;
        let x = Complex::from_spec(&s).unwrap();
        assert!(matches!(GeometryBounds::of(&x), Err(Error::Degenerate(_))));
    }

    #[test]
    fn higher_dimensions_accepted() {
        let b = GeometryBounds::new(3, 6, 1.0, PI / 2.0).unwrap();
        assert!((b.kappa - 6.0 * (2f64.sqrt() + 1.0).powi(3)).abs() < 1e-9);
    }
}
