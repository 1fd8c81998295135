//! Dirichlet eigenvalues on a neighbourhood of a finite set of group points
//! against the spectrum of the killed random walk on that set.

use serde::Serialize;

use super::unity::{PartitionOfUnity, gradient_audit, norm_audit};
use super::Lattice;
use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::spectral::eigen::{dense_symmetric_eigen, dense_symmetric_eigenvalues, DENSE_LIMIT};
use crate::spectral::{eigensolve, DiscreteOperator};
use crate::stochastic::{restricted_kernel, restricted_walk_spectrum, Elem};

#[derive(Clone, Debug, Serialize)]
pub struct TraceRow {
    pub n: usize,
    /// Tr(K_A^{2n+2}).
    pub walk: f64,
    /// 2 Σ_i exp(−(2n/C) λ_i) over the computed eigenvalues.
    pub heat: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SplitRow {
    pub t: f64,
    /// Σ_λ e^{−tλ} over the whole spectrum.
    pub total: f64,
    /// Σ_{λ ≤ 1/B} e^{−tλ}.
    pub low: f64,
    /// sup_x h_{1/2}(x,x) μ(W) e^{−t/(2B)}.
    pub tail: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenComparison {
    pub set_size: usize,
    /// Nodes of the neighbourhood mesh.
    pub nodes: usize,
    pub c_sup: f64,
    /// sup ‖f‖² / ‖⌈f⌉‖² over functions on the set.
    pub c1: f64,
    /// sup E(⌈f⌉) / ⟨(I − K_A)f, f⟩ over functions on the set.
    pub c2: f64,
    /// 1/μ(B(e, 1/4)), the smoothing map's lower norm constant squared.
    pub c1_formula: f64,
    /// Twice the smoothing map's gradient constant (the group form counts
    /// every edge from both ends).
    pub c2_formula: f64,
    pub formula_dominates: bool,
    /// Dirichlet eigenvalues, ascending.
    pub lambda: Vec<f64>,
    /// Killed-walk eigenvalues, descending.
    pub beta: Vec<f64>,
    /// max_i λ_i / (C_1 C_2 (1 − β_i)).
    pub worst_ratio: f64,
    pub inequality_holds: bool,
    pub trace: Vec<TraceRow>,
    pub trace_holds: bool,
    /// Only when the neighbourhood is small enough for its full spectrum.
    pub split: Option<Vec<SplitRow>>,
    pub split_holds: Option<bool>,
}

impl EigenComparison {
    pub fn pass(&self) -> bool {
        self.inequality_holds && self.trace_holds && self.split_holds.unwrap_or(true)
    }
}

/// Compare the first #A Dirichlet eigenvalues of the C_sup-neighbourhood
/// A_0 of A with 1 − β_A(i), through the smoothing map built on A.
pub fn eigenvalue_comparison(y: &Complex, a: &[Elem], h: f64) -> Result<EigenComparison> {
    let k = a.len();
    if k == 0 {
        return Err(Error::EmptyDomain);
    }
    if k > MAX_SET {
        return Err(Error::Size(format!("{k} group points; at most {MAX_SET}")));
    }
    let c_sup = PartitionOfUnity::default_support(y);
    let (lat, core) = Lattice::around(y, a, 2.0 * c_sup, h)?;
    let pu = PartitionOfUnity::build(&lat, &core, c_sup)?;
    let d_full = &lat.mesh;
    let region = pu.region.clone();
    let w = d_full.dirichlet_subdomain(|i| region[i])?;
    if w.len() < k {
        return Err(Error::Size(format!("neighbourhood has {} nodes for {k} eigenvalues", w.len())));
    }
    let kept: Vec<usize> = (0..d_full.len()).filter(|&i| region[i]).collect();

    // columns χ_a on the kept nodes
    let cols: Vec<Vec<f64>> = core
        .iter()
        .map(|&g| {
            let chi = pu.chi(g);
            kept.iter().map(|&i| chi[i]).collect()
        })
        .collect();
    let mut gram = vec![0.0; k * k];
    let mut energy = vec![0.0; k * k];
    let mut kc = vec![0.0; w.len()];
    for j in 0..k {
        w.stiffness.matvec(&cols[j], &mut kc);
        for i in 0..k {
            gram[i * k + j] = w.inner(&cols[i], &cols[j]);
            energy[i * k + j] = cols[i].iter().zip(&kc).map(|(x, y)| x * y).sum();
        }
    }
    let c1 = 1.0 / dense_symmetric_eigenvalues(&gram, k)[0];
    let kernel = restricted_kernel(lat.group(), a);
    let lap: Vec<f64> = (0..k * k).map(|ij| if ij / k == ij % k { 1.0 } else { 0.0 } - kernel[ij]).collect();
    let (mu, v) = dense_symmetric_eigen(&lap, k);
    if mu[0] <= 0.0 {
        return Err(Error::Degenerate("killed walk has eigenvalue 1".into()));
    }
    // L^{-1/2} E L^{-1/2}
    let mut isqrt = vec![0.0; k * k];
    for r in 0..k {
        let s = 1.0 / mu[r].sqrt();
        for i in 0..k {
            for j in 0..k {
                isqrt[i * k + j] += v[r * k + i] * s * v[r * k + j];
            }
        }
    }
    let tmp = matmul(&isqrt, &energy, k);
    let c2 = *dense_symmetric_eigenvalues(&symmetrize(&matmul(&tmp, &isqrt, k), k), k).last().unwrap();

    let s = eigensolve(&w, k)?;
    let lambda = s.values.clone();
    let mut beta = restricted_walk_spectrum(lat.group(), a);
    beta.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let cc = c1 * c2;
    let worst_ratio = lambda.iter().zip(&beta).map(|(l, b)| l / (cc * (1.0 - b))).fold(0.0, f64::max);

    let trace: Vec<TraceRow> = (1..=TRACE_STEPS)
        .map(|n| TraceRow {
            n,
            walk: beta.iter().map(|b| b.powi(2 * n as i32 + 2)).sum(),
            heat: 2.0 * lambda.iter().map(|l| (-(2.0 * n as f64 / cc) * l).exp()).sum::<f64>(),
        })
        .collect();
    let trace_holds = trace.iter().all(|r| r.walk <= r.heat * (1.0 + 1e-9));

    let c1_formula = 1.0 / pu.ball_mass(&lat, 0.25, false);
    let c2_formula = 2.0 * pu.gradient_constant(&lat, 2.0);
    let (split, split_holds) = if w.len() <= SPLIT_LIMIT { split_rows(&w, cc).map(|r| {
        let ok = r.iter().all(|row| row.total <= (row.low + row.tail) * (1.0 + 1e-9));
        (Some(r), Some(ok))
    })? } else { (None, None) };
    Ok(EigenComparison {
        set_size: k,
        nodes: w.len(),
        c_sup,
        c1,
        c2,
        c1_formula,
        c2_formula,
        formula_dominates: c1 <= c1_formula * (1.0 + 1e-9) && c2 <= c2_formula * (1.0 + 1e-9),
        lambda,
        beta,
        worst_ratio,
        inequality_holds: worst_ratio <= 1.0 + 1e-9,
        trace,
        trace_holds,
        split,
        split_holds,
    })
}

fn split_rows(w: &DiscreteOperator, b: f64) -> Result<Vec<SplitRow>> {
    let full = eigensolve(w, w.len())?;
    let sup_half = (0..w.len()).map(|i| full.kernel(0.5, i, i)).fold(0.0, f64::max);
    let measure = w.total_mass();
    Ok(SPLIT_TIMES
        .iter()
        .map(|&t| SplitRow {
            t,
            total: full.values.iter().map(|l| (-t * l).exp()).sum(),
            low: full.values.iter().filter(|&&l| l <= 1.0 / b).map(|l| (-t * l).exp()).sum(),
            tail: sup_half * measure * (-t / (2.0 * b)).exp(),
        })
        .collect())
}

fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for l in 0..n {
            let x = a[i * n + l];
            for j in 0..n {
                c[i * n + j] += x * b[l * n + j];
            }
        }
    }
    c
}

fn symmetrize(a: &[f64], n: usize) -> Vec<f64> {
    (0..n * n).map(|ij| 0.5 * (a[ij] + a[(ij % n) * n + ij / n])).collect()
}

const MAX_SET: usize = 200;
const TRACE_STEPS: usize = 10;
const SPLIT_LIMIT: usize = DENSE_LIMIT / 2;
const SPLIT_TIMES: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 16.0];

/// Norm and gradient audits of the smoothing map on the same set.
pub fn smoothing_audits(y: &Complex, a: &[Elem], h: f64, samples: usize, seed: u64) -> Result<(super::NormAudit, super::GradAudit)> {
    let c_sup = PartitionOfUnity::default_support(y);
    let (lat, core) = Lattice::around(y, a, 2.0 * c_sup, h)?;
    let pu = PartitionOfUnity::build(&lat, &core, c_sup)?;
    Ok((norm_audit(&lat, &pu, 2.0, samples, seed), gradient_audit(&lat, &pu, 2.0, samples, seed ^ 1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::library;
    use crate::stochastic::folner_set;
    use crate::GroupModel;

    #[test]
    fn line_path_and_singleton() {
        let y = library::z1_cell();
        let g = GroupModel::zd(1);
        let a = folner_set(&g, 2).unwrap();
        let r = eigenvalue_comparison(&y, &a, 1.0 / 20.0).unwrap();
        assert!(r.pass(), "{r:?}");
        assert!(r.split.is_some());
        // killed walk on five points: cos(kπ/6)
        for (k, b) in r.beta.iter().enumerate() {
            assert!((b - (std::f64::consts::PI * (k + 1) as f64 / 6.0).cos()).abs() < 1e-12);
        }
        let one = eigenvalue_comparison(&y, &[vec![0]], 1.0 / 20.0).unwrap();
        assert_eq!(one.beta, vec![0.0]);
        assert!(one.pass());
    }

    #[test]
    fn plane_box() {
        let a = folner_set(&GroupModel::zd(2), 1).unwrap();
        let r = eigenvalue_comparison(&library::z2_cell(), &a, 1.0 / 20.0).unwrap();
        assert_eq!(r.set_size, 9);
        assert!(r.inequality_holds && r.trace_holds, "{r:?}");
        assert!(r.formula_dominates);
    }
}
