//! Discrete Laplacians on skeleta, their spectra and heat kernels.

pub mod eigen;
pub mod krylov;
pub mod mesh;
pub mod sparse;

use std::fmt::Write as _;

use serde::Serialize;

pub use eigen::{eigensolve, eigensolve_iterative, SpectralDecomposition};
pub use mesh::{BoundaryCondition, DiscreteOperator, Element};
pub use sparse::CsrMatrix;

use crate::complex::{Complex, PointRef};
use crate::error::{Error, Result};

/// Smallest admissible fit time, in units of h².
pub const FIT_MIN_H2: f64 = 4.0;

/// One heat kernel evaluation with its truncation bound.
#[derive(Clone, Debug, Serialize)]
pub struct KernelValue {
    pub t: f64,
    pub value: f64,
    pub trunc: f64,
    /// Distance from the requested points to the nodes used.
    pub snap: f64,
    pub warning: bool,
}

/// h_t(p, q) from a decomposition of `d`. `tol` triggers the warning flag
/// when the truncation bound exceeds it.
pub fn heat_kernel_eval(
    s: &SpectralDecomposition,
    d: &DiscreteOperator,
    x: &Complex,
    t: f64,
    p: PointRef,
    q: PointRef,
    tol: f64,
) -> Result<KernelValue> {
    if !(t > 0.0) {
        return Err(Error::Invalid(format!("time {t} must be positive")));
    }
    let (i, si) = d.nearest_node(x, p)?;
    let (j, sj) = d.nearest_node(x, q)?;
    Ok(kernel_at_nodes(s, t, i, j, si.max(sj), tol))
}

pub fn kernel_at_nodes(s: &SpectralDecomposition, t: f64, i: usize, j: usize, snap: f64, tol: f64) -> KernelValue {
    let value = s.kernel(t, i, j);
    let trunc = s.truncation_bound(t, i, j);
    KernelValue { t, value, trunc, snap, warning: trunc > tol }
}

/// Σ exp(-λ_i t) over the computed pairs with the bound on the rest.
pub fn heat_trace(s: &SpectralDecomposition, t: f64, tol: f64) -> Result<KernelValue> {
    if !(t > 0.0) {
        return Err(Error::Invalid(format!("time {t} must be positive")));
    }
    let trunc = s.trace_truncation(t);
    Ok(KernelValue { t, value: s.trace(t), trunc, snap: 0.0, warning: trunc > tol })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub samples: Vec<(f64, f64)>,
    pub max_trunc: f64,
}

/// Least-squares slope of log h_t(p,p) against log t over `window`, with
/// log-spaced samples. The window must avoid the mesh scale (t ≥ 4h²) and
/// boundary effects (t ≤ clearance(p)²/4).
pub fn diagonal_exponent_fit(
    s: &SpectralDecomposition,
    d: &DiscreteOperator,
    x: &Complex,
    p: PointRef,
    window: (f64, f64),
    samples: usize,
) -> Result<ExponentFit> {
    let (lo, hi) = window;
    let clear = x.clearance(x.canonical(p));
    let min_t = FIT_MIN_H2 * d.h * d.h;
    let max_t = clear * clear / 4.0;
    if samples < 2 || !(lo > 0.0) || !(hi > lo) || lo < min_t || hi > max_t {
        return Err(Error::Window(format!("[{lo}, {hi}] with {samples} samples; allowed [{min_t:.3e}, {max_t:.3e}]")));
    }
    let (node, _) = d.nearest_node(x, p)?;
    let mut pts = Vec::with_capacity(samples);
    let mut max_trunc: f64 = 0.0;
    for k in 0..samples {
        let t = (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (samples - 1) as f64).exp();
        let v = kernel_at_nodes(s, t, node, node, 0.0, f64::INFINITY);
        max_trunc = max_trunc.max(v.trunc / v.value);
        pts.push((t.ln(), v.value.ln()));
    }
    let (slope, intercept) = least_squares(&pts);
    Ok(ExponentFit { slope, intercept, samples: pts, max_trunc })
}

pub(crate) fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// `index,eigenvalue` table.
pub fn spectrum_csv(s: &SpectralDecomposition) -> String {
    let mut out = String::from("index,eigenvalue\n");
    for (i, l) in s.values.iter().enumerate() {
        writeln!(out, "{i},{l:.12e}").unwrap();
    }
    out
}

/// `t,p,q,value,trunc_error` rows.
pub fn kernel_csv(rows: &[(KernelValue, String, String)]) -> String {
    let mut out = String::from("t,p,q,value,trunc_error\n");
    for (k, p, q) in rows {
        writeln!(out, "{},{p},{q},{:.12e},{:.3e}", k.t, k.value, k.trunc).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form;
    use crate::complex::library;
    use std::f64::consts::PI;

    fn full(x: &Complex, h: f64) -> (DiscreteOperator, SpectralDecomposition) {
        let d = DiscreteOperator::build(x, h).unwrap();
        let s = eigensolve(&d, d.len()).unwrap();
        (d, s)
    }

    #[test]
    fn star_spectrum() {
        let x = library::star(3);
        let d = DiscreteOperator::build(&x, 1.0 / 200.0).unwrap();
        let s = eigensolve(&d, 6).unwrap();
        let q = (PI / 2.0).powi(2);
        let exact = [0.0, q, q, PI * PI, 9.0 * q, 9.0 * q];
        for k in 1..6 {
            assert!((s.values[k] - exact[k]).abs() < 0.005 * exact[k], "{k} {}", s.values[k]);
        }
    }

    #[test]
    fn semigroup_and_mass() {
        let x = library::star(3);
        let (d, s) = full(&x, 0.1);
        let n = d.len();
        for &(i, j) in &[(0, 0), (0, 5), (3, 17)] {
            let conv: f64 = (0..n).map(|z| s.kernel(0.03, i, z) * s.kernel(0.05, z, j) * d.mass[z]).sum();
            assert!((conv - s.kernel(0.08, i, j)).abs() < 1e-9);
        }
        for i in [0, 4, 20] {
            let row = s.kernel_row(0.2, i);
            let total: f64 = row.iter().zip(&d.mass).map(|(a, m)| a * m).sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
        assert!((s.kernel(0.3, 2, 9) - s.kernel(0.3, 9, 2)).abs() < 1e-15);
    }

    #[test]
    fn traces() {
        let (d, s) = full(&library::interval(1.0), 1.0 / 200.0);
        let series: f64 = (0..60).map(|k| (-(k as f64 * PI).powi(2) / 2.0).exp()).sum();
        let tr = heat_trace(&s, 0.5, 1e-9).unwrap();
        assert!((tr.value - series).abs() < 1e-4, "{}", tr.value);
        assert!((heat_trace(&s, 50.0, 1e-9).unwrap().value - 1.0).abs() < 1e-12);
        let interior = d.dirichlet_subdomain(|i| !matches!(d.points[i], PointRef::Vertex(_))).unwrap();
        let sd = eigensolve(&interior, interior.len()).unwrap();
        assert!((heat_trace(&sd, 0.5, 1e-9).unwrap().value - (series - 1.0)).abs() < 1e-4);
        // trace equals the mass-weighted diagonal integral
        let diag: f64 = (0..d.len()).map(|i| s.kernel(0.1, i, i) * d.mass[i]).sum();
        assert!((diag - s.trace(0.1)).abs() < 1e-9);
    }

    #[test]
    fn dirichlet_domination_and_half_interval() {
        let x = library::interval(1.0);
        let (d, s) = full(&x, 0.01);
        let sub = d
            .dirichlet_subdomain(|i| match d.points[i] {
                PointRef::Edge { offset, .. } => offset < 0.5 - 1e-9,
                _ => false,
            })
            .unwrap();
        let ss = eigensolve(&sub, sub.len()).unwrap();
        assert!((ss.values[0] - 4.0 * PI * PI).abs() < 0.04 * PI * PI, "{}", ss.values[0]);
        for (a, &oa) in sub.origin.iter().enumerate().step_by(7) {
            for (b, &ob) in sub.origin.iter().enumerate().step_by(5) {
                assert!(ss.kernel(0.02, a, b) <= s.kernel(0.02, oa, ob) + 1e-9);
            }
        }
        let one = d.dirichlet_subdomain(|i| i == 40).unwrap();
        let so = eigensolve(&one, 1).unwrap();
        assert!((so.values[0] - d.stiffness.get(40, 40) / d.mass[40]).abs() < 1e-9);
    }

    #[test]
    fn kernel_matches_circle() {
        let x = library::circle();
        let d = DiscreteOperator::build(&x, 1.0 / 60.0).unwrap();
        let s = eigensolve(&d, 40).unwrap();
        let p = x.parse_point("e1:0.1").unwrap();
        let v = heat_kernel_eval(&s, &d, &x, 10.0, p, p, 1e-9).unwrap();
        assert!((v.value - 1.0).abs() < 1e-6);
        let v = heat_kernel_eval(&s, &d, &x, 0.05, p, p, 1e-6).unwrap();
        let exact = closed_form::circle_kernel(0.0, 0.0, 0.05);
        assert!((v.value - exact).abs() < 0.005 * exact);
    }

    #[test]
    fn exponent_windows() {
        let x = library::interval(1.0);
        let (d, s) = full(&x, 1.0 / 200.0);
        let mid = x.parse_point("e1:0.5").unwrap();
        let fit = diagonal_exponent_fit(&s, &d, &x, mid, (1e-3, 1e-2), 12).unwrap();
        assert!((fit.slope + 0.5).abs() < 0.05, "{}", fit.slope);
        assert!(matches!(diagonal_exponent_fit(&s, &d, &x, mid, (1e-6, 1e-2), 12), Err(Error::Window(_))));
        assert!(matches!(diagonal_exponent_fit(&s, &d, &x, mid, (1e-3, 0.5), 12), Err(Error::Window(_))));
    }

    #[test]
    fn energy_identities() {
        let x = library::interval(1.0);
        let (d, s) = full(&x, 0.01);
        let lin: Vec<f64> = d.points.iter().map(|p| match *p {
            PointRef::Vertex(v) => v as f64,
            PointRef::Edge { offset, .. } => offset,
            _ => 0.0,
        }).collect();
        assert!((d.energy(&lin) - 1.0).abs() < 1e-4);
        assert!(d.energy(&vec![3.0; d.len()]).abs() < 1e-12);
        assert!((d.energy(s.vector(3)) - s.values[3]).abs() < 1e-8 * s.values[3]);
    }
}
