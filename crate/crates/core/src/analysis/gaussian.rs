//! Fitted constants for the Gaussian upper and near-diagonal lower bound
//! shapes of the heat kernel at times below R_0².

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::complex::{Complex, DistanceField, GeometryBounds, PointRef};
use crate::error::{Error, Result};
use crate::spectral::krylov::heat_rows;
use crate::spectral::{DiscreteOperator, SpectralDecomposition, FIT_MIN_H2};

#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeFit {
    /// max of log h + d²/4t − (N/2)log(1 + d²/t) + (n/2)log min(t, R_0²).
    pub upper: f64,
    /// min of log h + log μ(B(p,√t)) over pairs with d² ≤ t.
    pub lower_intercept: f64,
    /// Smallest C with log h + log μ(B(p,√t)) ≥ lower_intercept − C d²/t.
    pub lower_rate: f64,
    /// Number of (p, t) draws.
    pub draws: usize,
    /// Number of (p, q, t) triples evaluated.
    pub triples: usize,
    pub window: (f64, f64),
}

impl EnvelopeFit {
    pub fn is_finite(&self) -> bool {
        self.upper.is_finite() && self.lower_intercept.is_finite() && self.lower_rate.is_finite()
    }

    /// Both fits agree within a factor `1 + rel` on every constant (the
    /// log-scale constants are compared through their exponentials).
    pub fn agrees_with(&self, other: &EnvelopeFit, rel: f64) -> bool {
        let tol = (1.0 + rel).ln();
        (self.upper - other.upper).abs() <= tol
            && (self.lower_intercept - other.lower_intercept).abs() <= tol
            && (self.lower_rate - other.lower_rate).abs() <= rel * self.lower_rate.abs().max(other.lower_rate.abs())
    }
}

/// Draw `draws` pairs (p, t) with t log-uniform in [4h², R_0²] and p a
/// vertex node with probability 1/4 and otherwise any node, and evaluate
/// every node q within 4√t of p. Kernel rows come from `full` when given
/// and from Krylov quadrature otherwise.
pub fn gaussian_envelope_fit(
    x: &Complex,
    d: &DiscreteOperator,
    full: Option<&SpectralDecomposition>,
    draws: usize,
    seed: u64,
) -> Result<EnvelopeFit> {
    let bounds = GeometryBounds::of(x)?;
    let lo = FIT_MIN_H2 * d.h * d.h;
    let hi = bounds.r0 * bounds.r0;
    if lo >= hi {
        return Err(Error::Window(format!("mesh too coarse: 4h² = {lo:.3e} ≥ R_0² = {hi:.3e}")));
    }
    if !d.is_full() {
        return Err(Error::Invalid("envelope fits need the operator of the whole complex".into()));
    }
    let vertex_nodes: Vec<usize> = (0..d.len()).filter(|&i| matches!(d.points[i], PointRef::Vertex(_))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = bounds.n as f64;
    let growth = bounds.growth_exponent();
    let reach_max = 4.0 * hi.sqrt();
    // (d²/t, log h + log μ) per far pair, resolved once the intercept is known
    let mut far: Vec<(f64, f64)> = Vec::new();
    let mut fit = EnvelopeFit {
        upper: f64::NEG_INFINITY,
        lower_intercept: f64::INFINITY,
        lower_rate: 0.0,
        draws: 0,
        triples: 0,
        window: (lo, hi),
    };
    while fit.draws < draws {
        let p = if !vertex_nodes.is_empty() && rng.random::<f64>() < 0.25 {
            vertex_nodes[rng.random_range(0..vertex_nodes.len())]
        } else {
            rng.random_range(0..d.len())
        };
        let field = DistanceField::new(x, d.points[p], d.h / 2.0)?;
        let near: Vec<(usize, f64)> =
            (0..d.len()).map(|q| (q, field.to(d.points[q]))).filter(|&(_, r)| r <= reach_max).collect();
        let k = PER_SOURCE.min(draws - fit.draws);
        let times: Vec<f64> = (0..k).map(|_| (lo.ln() + rng.random::<f64>() * (hi / lo).ln()).exp()).collect();
        let rows: Vec<Vec<f64>> = match full {
            Some(s) => times.iter().map(|&t| s.kernel_row(t, p)).collect(),
            None => heat_rows(d, p, &times, 1e-10)?,
        };
        for (&t, row) in times.iter().zip(&rows) {
            let log_ball = x.ball_volume_in(&field, t.sqrt(), d.h / 2.0).ln();
            let reach = 4.0 * t.sqrt();
            for &(q, dist) in near.iter().filter(|&&(_, r)| r <= reach) {
                let kernel = row[q];
                if !(kernel > 0.0) {
                    return Err(Error::Convergence(format!("non-positive kernel {kernel} at t = {t}")));
                }
                let r = dist * dist / t;
                let upper = kernel.ln() + r / 4.0 - growth / 2.0 * (1.0 + r).ln() + n / 2.0 * t.min(hi).ln();
                fit.upper = fit.upper.max(upper);
                let lower = kernel.ln() + log_ball;
                if r <= 1.0 {
                    fit.lower_intercept = fit.lower_intercept.min(lower);
                } else {
                    far.push((r, lower));
                }
                fit.triples += 1;
            }
            fit.draws += 1;
        }
    }
    fit.lower_rate = far.iter().map(|&(r, v)| (fit.lower_intercept - v) / r).fold(0.0, f64::max);
    Ok(fit)
}

const PER_SOURCE: usize = 10;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::library;
    use crate::spectral::eigensolve;

    #[test]
    fn star_envelopes_are_finite_and_stable() {
        let x = library::star(3);
        let d = DiscreteOperator::build(&x, 1.0 / 100.0).unwrap();
        let s = eigensolve(&d, d.len()).unwrap();
        let a = gaussian_envelope_fit(&x, &d, Some(&s), 200, 1).unwrap();
        let b = gaussian_envelope_fit(&x, &d, Some(&s), 200, 2).unwrap();
        assert!(a.is_finite() && b.is_finite());
        assert!(a.agrees_with(&b, 0.1), "{} {} {} / {} {} {}", a.upper, a.lower_intercept, a.lower_rate, b.upper, b.lower_intercept, b.lower_rate);
        assert!(a.lower_rate > 0.1 && a.lower_rate < 0.5, "{}", a.lower_rate);
        let k = gaussian_envelope_fit(&x, &d, None, 30, 1).unwrap();
        let f = gaussian_envelope_fit(&x, &d, Some(&s), 30, 1).unwrap();
        assert_eq!(k.triples, f.triples);
        assert!((k.upper - f.upper).abs() < 1e-8 && (k.lower_rate - f.lower_rate).abs() < 1e-8);
    }

    #[test]
    fn coarse_mesh_is_rejected() {
        let x = library::unit_square();
        let d = DiscreteOperator::build(&x, 1.0 / 10.0).unwrap();
        assert!(matches!(gaussian_envelope_fit(&x, &d, None, 10, 1), Err(Error::Window(_))));
    }
}
