//! Generalized symmetric eigenproblem K φ = λ M φ with diagonal M.

use faer::{Mat, Side};

use super::mesh::DiscreteOperator;
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// Largest problem handed to the dense solver.
pub const DENSE_LIMIT: usize = 3000;
/// Relative residual required of every returned pair.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Eigenpairs, smallest first, with mass-orthonormal vectors.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub values: Vec<f64>,
    /// Column-major n × count.
    vectors: Vec<f64>,
    pub n: usize,
    pub mass: Vec<f64>,
    pub h: f64,
    /// Worst relative residual ‖Kφ − λMφ‖ / (‖A‖ ‖φ‖_M).
    pub residual: f64,
}

impl SpectralDecomposition {
    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn is_complete(&self) -> bool {
        self.values.len() == self.n
    }

    pub fn vector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.n..(k + 1) * self.n]
    }

    pub fn largest(&self) -> f64 {
        *self.values.last().unwrap_or(&0.0)
    }

    /// Bound on the contribution of the modes that were not computed to
    /// h_t(i, j): each mass-normalised mode has φ(i)² ≤ 1/m_i.
    pub fn truncation_bound(&self, t: f64, i: usize, j: usize) -> f64 {
        if self.is_complete() {
            return 0.0;
        }
        (self.n - self.count()) as f64 * (-self.largest() * t).exp() / (self.mass[i] * self.mass[j]).sqrt()
    }

    /// Σ_k e^{-λ_k t} φ_k(i) φ_k(j).
    pub fn kernel(&self, t: f64, i: usize, j: usize) -> f64 {
        let mut s = 0.0;
        for k in 0..self.count() {
            let v = self.vector(k);
            s += (-self.values[k] * t).exp() * v[i] * v[j];
        }
        s
    }

    /// h_t(i, ·) at every node.
    pub fn kernel_row(&self, t: f64, i: usize) -> Vec<f64> {
        let mut row = vec![0.0; self.n];
        for k in 0..self.count() {
            let v = self.vector(k);
            let w = (-self.values[k] * t).exp() * v[i];
            for (r, x) in row.iter_mut().zip(v) {
                *r += w * x;
            }
        }
        row
    }

    pub fn trace(&self, t: f64) -> f64 {
        self.values.iter().map(|l| (-l * t).exp()).sum()
    }

    pub fn trace_truncation(&self, t: f64) -> f64 {
        (self.n - self.count()) as f64 * (-self.largest() * t).exp()
    }
}

fn scaled_operator(d: &DiscreteOperator) -> (CsrMatrix, Vec<f64>) {
    let inv_sqrt: Vec<f64> = d.mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    (d.stiffness.scaled(&inv_sqrt), inv_sqrt)
}

/// The `count` smallest eigenpairs. Dense below [`DENSE_LIMIT`] nodes,
/// shift-invert Lanczos with conjugate-gradient solves above.
pub fn eigensolve(d: &DiscreteOperator, count: usize) -> Result<SpectralDecomposition> {
    let n = d.len();
    if count == 0 || count > n {
        return Err(Error::Invalid(format!("requested {count} pairs from {n} nodes")));
    }
    let (a, inv_sqrt) = scaled_operator(d);
    let (values, psi) = if n <= DENSE_LIMIT { dense_pairs(&a, count)? } else { lanczos_pairs(&a, count, None)? };
    finish(d, &a, &inv_sqrt, values, psi)
}

/// As [`eigensolve`] but always uses the iterative path with shift `sigma`.
pub fn eigensolve_iterative(d: &DiscreteOperator, count: usize, sigma: f64) -> Result<SpectralDecomposition> {
    let n = d.len();
    if count == 0 || count > n {
        return Err(Error::Invalid(format!("requested {count} pairs from {n} nodes")));
    }
    let (a, inv_sqrt) = scaled_operator(d);
    let (values, psi) = lanczos_pairs(&a, count, Some(sigma))?;
    finish(d, &a, &inv_sqrt, values, psi)
}

fn finish(d: &DiscreteOperator, a: &CsrMatrix, inv_sqrt: &[f64], values: Vec<f64>, psi: Vec<f64>) -> Result<SpectralDecomposition> {
    let n = d.len();
    let norm_a = a.gershgorin().max(1e-300);
    let mut worst: f64 = 0.0;
    let mut r = vec![0.0; n];
    for (k, &lam) in values.iter().enumerate() {
        let v = &psi[k * n..(k + 1) * n];
        a.matvec(v, &mut r);
        let res = r.iter().zip(v).map(|(x, y)| (x - lam * y).powi(2)).sum::<f64>().sqrt();
        worst = worst.max(res / norm_a);
    }
    if worst > RESIDUAL_TOL {
        return Err(Error::Convergence(format!("worst relative residual {worst:.3e} exceeds {RESIDUAL_TOL:e}")));
    }
    let mut vectors = psi;
    for k in 0..values.len() {
        for i in 0..n {
            vectors[k * n + i] *= inv_sqrt[i];
        }
    }
    Ok(SpectralDecomposition { values, vectors, n, mass: d.mass.clone(), h: d.h, residual: worst })
}

fn dense_pairs(a: &CsrMatrix, count: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = a.dim();
    let mut m = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        for (j, v) in a.row(i) {
            m[(i, j)] = v;
        }
    }
    let eig = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Convergence(format!("dense eigensolver: {e:?}")))?;
    let s = eig.S().column_vector();
    let u = eig.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[i].partial_cmp(&s[j]).unwrap());
    let mut values = Vec::with_capacity(count);
    let mut vecs = Vec::with_capacity(count * n);
    for &k in order.iter().take(count) {
        values.push(s[k].max(0.0));
        for i in 0..n {
            vecs.push(u[(i, k)]);
        }
    }
    Ok((values, vecs))
}

/// Eigenvalues of a dense symmetric matrix given row-major, ascending.
pub fn dense_symmetric_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    let m = Mat::<f64>::from_fn(n, n, |i, j| a[i * n + j]);
    let mut v: Vec<f64> = m
        .self_adjoint_eigenvalues(Side::Lower)
        .expect("dense symmetric eigenvalues");
    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
    v
}

/// Eigenpairs of a dense symmetric matrix given row-major: ascending
/// values and the matching unit vectors, one per row.
pub fn dense_symmetric_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let m = Mat::<f64>::from_fn(n, n, |i, j| a[i * n + j]);
    let eig = m.self_adjoint_eigen(Side::Lower).expect("dense symmetric eigensolve");
    let s = eig.S().column_vector();
    let u = eig.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[i].partial_cmp(&s[j]).unwrap());
    let values = order.iter().map(|&k| s[k]).collect();
    let mut vectors = Vec::with_capacity(n * n);
    for &k in &order {
        for i in 0..n {
            vectors.push(u[(i, k)]);
        }
    }
    (values, vectors)
}

/// Eigen-decomposition of a small symmetric tridiagonal matrix: (values, Q
/// column-major), ascending.
pub(crate) fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = alpha.len();
    let mut t = Mat::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = t.self_adjoint_eigen(Side::Lower).expect("tridiagonal eigensolve");
    let s = eig.S().column_vector();
    let u = eig.U();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| s[i].partial_cmp(&s[j]).unwrap());
    let values = order.iter().map(|&k| s[k]).collect();
    let mut q = Vec::with_capacity(m * m);
    for &k in &order {
        for i in 0..m {
            q.push(u[(i, k)]);
        }
    }
    (values, q)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solve (A + σI) x = b by conjugate gradients with Jacobi preconditioning.
fn cg_solve(a: &CsrMatrix, sigma: f64, diag: &[f64], b: &[f64], tol: f64) -> Result<Vec<f64>> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(ri, d)| ri / (d + sigma)).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let bnorm = dot(b, b).sqrt().max(1e-300);
    let mut q = vec![0.0; n];
    for _ in 0..20 * n + 1000 {
        a.matvec(&p, &mut q);
        for i in 0..n {
            q[i] += sigma * p[i];
        }
        let alpha = rz / dot(&p, &q);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        if dot(&r, &r).sqrt() <= tol * bnorm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] / (diag[i] + sigma);
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Convergence("conjugate gradients stalled".into()))
}

fn lanczos_pairs(a: &CsrMatrix, count: usize, sigma: Option<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = a.dim();
    let sigma = sigma.unwrap_or(0.05);
    let diag = a.diagonal();
    let mut steps = (2 * count + 30).min(n);
    loop {
        // deterministic, non-degenerate start vector
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64 * 0.7548776662466927).fract() - 0.5)).collect();
        let nv = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|x| *x /= nv);
        let mut basis: Vec<Vec<f64>> = vec![v];
        let mut alpha = Vec::new();
        let mut beta = Vec::new();
        for j in 0..steps {
            let mut w = cg_solve(a, sigma, &diag, &basis[j], 1e-13)?;
            let aj = dot(&w, &basis[j]);
            alpha.push(aj);
            // full reorthogonalisation, twice
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(&w, q);
                    w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                }
            }
            let b = dot(&w, &w).sqrt();
            if j + 1 == steps || b < 1e-14 {
                break;
            }
            beta.push(b);
            w.iter_mut().for_each(|x| *x /= b);
            basis.push(w);
        }
        let m = alpha.len();
        let (theta, q) = tridiagonal_eigen(&alpha, &beta[..m - 1]);
        // largest θ of the inverse are the smallest λ
        let mut values = Vec::new();
        let mut vecs = Vec::new();
        for k in (0..m).rev().take(count) {
            let lam = 1.0 / theta[k] - sigma;
            values.push(lam.max(0.0));
            let mut y = vec![0.0; n];
            for (j, b) in basis.iter().enumerate() {
                let c = q[k * m + j];
                y.iter_mut().zip(b).for_each(|(x, bb)| *x += c * bb);
            }
            let ny = dot(&y, &y).sqrt();
            y.iter_mut().for_each(|x| *x /= ny);
            vecs.extend(y);
        }
        let norm_a = a.gershgorin().max(1e-300);
        let mut r = vec![0.0; n];
        let mut worst: f64 = 0.0;
        for (k, &lam) in values.iter().enumerate() {
            let y = &vecs[k * n..(k + 1) * n];
            a.matvec(y, &mut r);
            worst = worst.max(r.iter().zip(y).map(|(x, yy)| (x - lam * yy).powi(2)).sum::<f64>().sqrt() / norm_a);
        }
        if values.len() == count && worst <= RESIDUAL_TOL * 0.5 {
            return Ok((values, vecs));
        }
        if steps >= n || steps > 4000 {
            return Err(Error::Convergence(format!("Lanczos residual {worst:.3e} after {steps} steps")));
        }
        steps = (steps * 3 / 2).min(n);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::library;
    use std::f64::consts::PI;

    #[test]
    fn interval_spectrum() {
        let d = DiscreteOperator::build(&library::interval(1.0), 1.0 / 200.0).unwrap();
        let s = eigensolve(&d, 4).unwrap();
        assert!(s.values[0].abs() < 1e-9);
        for k in 1..4 {
            let exact = (k as f64 * PI).powi(2);
            assert!((s.values[k] - exact).abs() < 0.005 * exact, "{k} {}", s.values[k]);
        }
        // mass orthonormal
        let v = s.vector(1);
        let nrm: f64 = v.iter().zip(&d.mass).map(|(a, m)| a * a * m).sum();
        assert!((nrm - 1.0).abs() < 1e-10);
    }

    #[test]
    fn iterative_matches_dense() {
        let x = library::star(3);
        let d = DiscreteOperator::build(&x, 1.0 / 50.0).unwrap();
        let a = eigensolve(&d, 6).unwrap();
        let b = eigensolve_iterative(&d, 6, 0.05).unwrap();
        for k in 0..6 {
            assert!((a.values[k] - b.values[k]).abs() < 1e-8 * (1.0 + a.values[k]), "{k} {} {}", a.values[k], b.values[k]);
        }
    }

    #[test]
    fn disconnected_has_double_zero() {
        let text = r#"{"dimension":1,"vertices":["a","b","c","d"],
            "edges":[{"id":"e1","ends":["a","b"],"length":1},{"id":"e2","ends":["c","d"],"length":1}]}"#;
        let x = crate::complex::Complex::from_json(text).unwrap();
        let d = DiscreteOperator::build(&x, 0.1).unwrap();
        let s = eigensolve(&d, 3).unwrap();
        assert!(s.values[0].abs() < 1e-10 && s.values[1].abs() < 1e-10 && s.values[2] > 1.0);
    }
}
