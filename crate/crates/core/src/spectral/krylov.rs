//! Heat kernel diagonal by Lanczos quadrature, for meshes too large for a
//! complete eigendecomposition.

use super::eigen::tridiagonal_eigen;
use super::mesh::DiscreteOperator;
use crate::error::{Error, Result};

const MAX_STEPS: usize = 3000;

/// h_t(i, i) for every t in `times`, via the Gauss quadrature
/// e_iᵀ exp(-tA) e_i ≈ Σ_k Q_{0k}² exp(-tθ_k) on the Lanczos tridiagonal.
pub fn heat_diagonal(d: &DiscreteOperator, node: usize, times: &[f64], tol: f64) -> Result<Vec<f64>> {
    let n = d.len();
    if node >= n {
        return Err(Error::Invalid(format!("node {node} out of range")));
    }
    let inv_sqrt: Vec<f64> = d.mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let a = d.stiffness.scaled(&inv_sqrt);
    let mut prev = vec![0.0; n];
    let mut cur = vec![0.0; n];
    cur[node] = 1.0;
    let mut w = vec![0.0; n];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut last: Option<Vec<f64>> = None;
    for step in 0..MAX_STEPS.min(n) {
        a.matvec(&cur, &mut w);
        let aj: f64 = w.iter().zip(&cur).map(|(x, y)| x * y).sum();
        alpha.push(aj);
        let bprev = beta.last().copied().unwrap_or(0.0);
        for i in 0..n {
            w[i] -= aj * cur[i] + bprev * prev[i];
        }
        let b = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let done = b < 1e-13 || step + 1 == MAX_STEPS.min(n);
        if (step + 1) % 10 == 0 || done {
            let (theta, q) = tridiagonal_eigen(&alpha, &beta);
            let m = alpha.len();
            let vals: Vec<f64> = times
                .iter()
                .map(|&t| (0..m).map(|k| q[k * m].powi(2) * (-t * theta[k].max(0.0)).exp()).sum::<f64>() / d.mass[node])
                .collect();
            if let Some(old) = &last {
                let converged = vals.iter().zip(old).all(|(v, o)| (v - o).abs() <= tol * v.abs());
                if converged || done {
                    return Ok(vals);
                }
            } else if done {
                return Ok(vals);
            }
            last = Some(vals);
        }
        if done {
            break;
        }
        beta.push(b);
        std::mem::swap(&mut prev, &mut cur);
        for i in 0..n {
            cur[i] = w[i] / b;
        }
    }
    Err(Error::Convergence(format!("Lanczos quadrature did not settle in {MAX_STEPS} steps")))
}

/// Rows h_t(i, ·) for every t in `times`, as exp(-tA)e_i on a stored
/// Lanczos basis. Converged when the last Krylov coefficient falls below
/// `tol` relative to the coefficient norm.
pub fn heat_rows(d: &DiscreteOperator, node: usize, times: &[f64], tol: f64) -> Result<Vec<Vec<f64>>> {
    let n = d.len();
    if node >= n {
        return Err(Error::Invalid(format!("node {node} out of range")));
    }
    let inv_sqrt: Vec<f64> = d.mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let a = d.stiffness.scaled(&inv_sqrt);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut start = vec![0.0; n];
    start[node] = 1.0;
    basis.push(start);
    let mut w = vec![0.0; n];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let cap = MAX_STEPS.min(n);
    for step in 0..cap {
        let cur = &basis[step];
        a.matvec(cur, &mut w);
        let aj: f64 = w.iter().zip(cur).map(|(x, y)| x * y).sum();
        alpha.push(aj);
        let bprev = beta.last().copied().unwrap_or(0.0);
        for i in 0..n {
            w[i] -= aj * cur[i] + if step > 0 { bprev * basis[step - 1][i] } else { 0.0 };
        }
        let b = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let done = b < 1e-13 || step + 1 == cap;
        if (step + 1) % 10 == 0 || done {
            let (theta, q) = tridiagonal_eigen(&alpha, &beta);
            let m = alpha.len();
            let coeffs: Vec<Vec<f64>> = times
                .iter()
                .map(|&t| {
                    let weights: Vec<f64> = (0..m).map(|k| q[k * m] * (-t * theta[k].max(0.0)).exp()).collect();
                    (0..m).map(|r| (0..m).map(|k| q[k * m + r] * weights[k]).sum()).collect()
                })
                .collect();
            let settled = coeffs.iter().all(|c: &Vec<f64>| {
                let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
                c[m - 1].abs() <= tol * norm
            });
            if settled || done {
                if !settled && b >= 1e-13 {
                    break;
                }
                return Ok(coeffs
                    .iter()
                    .map(|c| {
                        let mut row = vec![0.0; n];
                        for (v, &ck) in basis.iter().zip(c) {
                            for (r, x) in row.iter_mut().zip(v) {
                                *r += ck * x;
                            }
                        }
                        for (j, r) in row.iter_mut().enumerate() {
                            *r *= inv_sqrt[node] * inv_sqrt[j];
                        }
                        row
                    })
                    .collect());
            }
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    Err(Error::Convergence(format!("Krylov heat rows did not settle in {cap} steps")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::library;
    use crate::spectral::eigen::eigensolve;

    #[test]
    fn matches_full_decomposition() {
        let d = DiscreteOperator::build(&library::star(3), 0.05).unwrap();
        let s = eigensolve(&d, d.len()).unwrap();
        let times = [0.01, 0.1, 1.0, 5.0];
        let k = heat_diagonal(&d, 0, &times, 1e-12).unwrap();
        for (t, v) in times.iter().zip(&k) {
            let exact = s.kernel(*t, 0, 0);
            assert!((v - exact).abs() < 1e-9 * exact, "{t} {v} {exact}");
        }
    }

    #[test]
    fn rows_match_full_decomposition() {
        let d = DiscreteOperator::build(&library::star(3), 0.02).unwrap();
        let s = eigensolve(&d, d.len()).unwrap();
        let times = [0.002, 0.05, 0.7];
        let rows = heat_rows(&d, 7, &times, 1e-12).unwrap();
        for (t, row) in times.iter().zip(&rows) {
            let exact = s.kernel_row(*t, 7);
            let scale = exact.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            for (a, b) in row.iter().zip(&exact) {
                assert!((a - b).abs() < 1e-9 * scale, "{t} {a} {b}");
            }
        }
    }
}
