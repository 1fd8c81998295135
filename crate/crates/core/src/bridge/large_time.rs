//! Large-time comparison of the walk return probability with the on-diagonal
//! heat kernel of the periodic complex, and the spectral-gap experiments for
//! nonamenable deck groups.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::spectral::krylov::heat_diagonal;
use crate::spectral::{eigensolve, eigensolve_iterative, least_squares, DiscreteOperator};
use crate::stochastic::{aitken, group_return_probability, log_rate_limit, GroupModel};

#[derive(Clone, Debug, Serialize)]
pub struct RatioRow {
    pub t: f64,
    /// p_{2⌊t⌋}(e, e).
    pub walk: f64,
    /// sup over fundamental-domain nodes of h_t(x, x).
    pub heat: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LargeTimeReport {
    pub group: String,
    pub rho: usize,
    pub h: f64,
    pub horizon: f64,
    pub rows: Vec<RatioRow>,
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// −d/dt log of each column, by least squares over the window.
    pub walk_rate: f64,
    pub heat_rate: f64,
}

impl LargeTimeReport {
    /// Amenable groups: the ratio stays inside [lo, hi].
    pub fn ratio_within(&self, lo: f64, hi: f64) -> bool {
        self.ratio_min >= lo && self.ratio_max <= hi
    }

    /// Both columns decay at rates within `rel` of each other.
    pub fn rates_agree(&self, rel: f64) -> bool {
        (self.walk_rate - self.heat_rate).abs() <= rel * self.walk_rate.abs().max(self.heat_rate.abs())
    }
}

fn deck_group(y: &Complex) -> Result<GroupModel> {
    Ok(y.deck().ok_or_else(|| Error::Invalid("fundamental domain carries no deck group".into()))?.group.clone())
}

/// (ρ · smallest cell diameter)² / 4.
pub fn validity_horizon(y: &Complex, rho: usize) -> f64 {
    let cell = if y.dimension() == 1 {
        y.min_edge_length()
    } else {
        y.faces().iter().map(|f| f.diameter()).fold(f64::INFINITY, f64::min)
    };
    (rho as f64 * cell).powi(2) / 4.0
}

/// Nodes of the truncation lying in the base copy of the fundamental domain.
fn fundamental_nodes(x: &Complex, d: &DiscreteOperator) -> Vec<usize> {
    let o = x.orbits().expect("truncation carries orbits");
    (0..d.len()).filter(|&i| o.elem_of(d.points[i]) == 0).collect()
}

/// Tabulate p_{2⌊t⌋}(e,e) against sup_x h_t(x,x) on the truncation to the
/// word ball of radius `rho` (natural boundary conditions on the cut).
pub fn large_time_compare(y: &Complex, times: &[f64], rho: usize, h: f64) -> Result<LargeTimeReport> {
    let group = deck_group(y)?;
    let horizon = validity_horizon(y, rho);
    if let Some(&t) = times.iter().find(|&&t| t > horizon) {
        return Err(Error::Horizon { t, horizon });
    }
    if times.iter().any(|&t| !(t >= 1.0)) {
        return Err(Error::Window("times must be at least 1".into()));
    }
    let x = y.truncate(rho)?;
    let d = DiscreteOperator::build(&x, h)?;
    let mut heat = vec![0.0f64; times.len()];
    for node in fundamental_nodes(&x, &d) {
        let diag = heat_diagonal(&d, node, times, 1e-10)?;
        for (s, v) in heat.iter_mut().zip(diag) {
            *s = s.max(v);
        }
    }
    let mut rows = Vec::with_capacity(times.len());
    for (&t, &hv) in times.iter().zip(&heat) {
        let walk = group_return_probability(&group, 2 * t.floor() as usize)?;
        rows.push(RatioRow { t, walk, heat: hv, ratio: walk / hv });
    }
    let rate = |col: &dyn Fn(&RatioRow) -> f64| -> f64 {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, col(r).ln())).collect();
        if pts.len() < 2 {
            return f64::NAN;
        }
        -least_squares(&pts).0
    };
    let walk_rate = rate(&|r| r.walk);
    let heat_rate = rate(&|r| r.heat);
    Ok(LargeTimeReport {
        group: group.name(),
        rho,
        h,
        horizon,
        ratio_min: rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min),
        ratio_max: rows.iter().map(|r| r.ratio).fold(0.0, f64::max),
        rows,
        walk_rate,
        heat_rate,
    })
}

/// The truncation to radius `rho` killed on its cut boundary.
fn killed_truncation(y: &Complex, rho: usize, h: f64) -> Result<(Complex, DiscreteOperator)> {
    let x = y.truncate(rho)?;
    let d = DiscreteOperator::build(&x, h)?;
    let o = x.orbits().expect("truncation carries orbits");
    let cut: Vec<bool> = d.points.iter().map(|&p| o.on_cut(&x, p)).collect();
    let w = d.dirichlet_subdomain(|i| !cut[i])?;
    Ok((x, w))
}

fn bottom_eigenvalue(w: &DiscreteOperator) -> Result<f64> {
    let s = if w.len() <= ITERATIVE_ABOVE { eigensolve(w, 1)? } else { eigensolve_iterative(w, 1, 0.0)? };
    Ok(s.values[0])
}

const ITERATIVE_ABOVE: usize = 800;
const RATE_STEPS: usize = 800;

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub radii: Vec<usize>,
    pub gaps: Vec<f64>,
    pub decreasing: bool,
    /// Aitken limit of the gap sequence, used as the lower threshold.
    pub threshold: f64,
    pub pass: bool,
    /// −2 lim (log p_{2n})/(2n): decay rate of p_{2⌊t⌋} in t.
    pub walk_rate: f64,
    /// Relative gap between `walk_rate` and `threshold`, the extrapolated
    /// bottom of the spectrum.
    pub rate_mismatch: f64,
}

/// Bottom Dirichlet eigenvalue of the killed truncations.
pub fn dirichlet_gaps(y: &Complex, radii: &[usize], h: f64) -> Result<GapReport> {
    let mut gaps = Vec::with_capacity(radii.len());
    for &rho in radii {
        let (_, w) = killed_truncation(y, rho, h)?;
        gaps.push(bottom_eigenvalue(&w)?);
    }
    let decreasing = gaps.windows(2).all(|p| p[1] < p[0]);
    let threshold = aitken(&gaps).unwrap_or(f64::NAN);
    let pass = decreasing && threshold > 0.0 && gaps.iter().all(|&g| g >= threshold);
    let walk_rate = -2.0 * log_rate_limit(&deck_group(y)?, RATE_STEPS)?;
    let rate_mismatch = (walk_rate - threshold).abs() / walk_rate.max(threshold);
    Ok(GapReport { radii: radii.to_vec(), gaps, decreasing, threshold, pass, walk_rate, rate_mismatch })
}

#[derive(Clone, Debug, Serialize)]
pub struct LinkReport {
    pub rho: usize,
    pub nodes: usize,
    pub lambda1: f64,
    /// −d/dt log Tr(H_t) over [4/λ_1, 8/λ_1].
    pub trace_rate: f64,
    /// Largest ‖f‖²/‖∇f‖² over heat-smoothed random f.
    pub c_measured: f64,
    /// trace_rate · c_measured; 1 when the two sides match.
    pub product: f64,
    /// max over z, t' < t of h_t(z,z) / (h_{t'}(z,z) e^{−(t−t')/C}), with
    /// C = (1 + tol) c_measured.
    pub monotone_worst: f64,
    pub pass: bool,
}

/// Trace decay rate against the measured constant of ‖f‖² ≤ C‖∇f‖² on the
/// killed truncation, and the monotone time-shift bound on the diagonal.
pub fn nonamenable_link(y: &Complex, rho: usize, h: f64, samples: usize, seed: u64, tol: f64) -> Result<LinkReport> {
    let (x, w) = killed_truncation(y, rho, h)?;
    if w.len() > crate::spectral::eigen::DENSE_LIMIT {
        return Err(Error::Size(format!("{} nodes; the trace needs the full spectrum", w.len())));
    }
    let s = eigensolve(&w, w.len())?;
    let lambda1 = s.values[0];
    let (t1, t2) = (4.0 / lambda1, 8.0 / lambda1);
    let trace_rate = (s.trace(t1).ln() - s.trace(t2).ln()) / (t2 - t1);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c_measured: f64 = 0.0;
    for k in 0..samples {
        let tau = SMOOTHING[k % SMOOTHING.len()] / lambda1;
        let mut f = vec![0.0; w.len()];
        for m in 0..s.count() {
            let c: f64 = StandardNormal.sample(&mut rng);
            let c = c * (-tau * s.values[m]).exp();
            for (fi, vi) in f.iter_mut().zip(s.vector(m)) {
                *fi += c * vi;
            }
        }
        c_measured = c_measured.max(w.inner(&f, &f) / w.energy(&f));
    }
    let product = trace_rate * c_measured;

    let c = (1.0 + tol) * c_measured;
    let o = x.orbits().expect("truncation carries orbits");
    let times: Vec<f64> = (1..=6).map(|k| k as f64 / lambda1).collect();
    let mut monotone_worst: f64 = 0.0;
    for i in (0..w.len()).filter(|&i| o.elem_of(w.points[i]) == 0) {
        let diag: Vec<f64> = times.iter().map(|&t| s.kernel(t, i, i)).collect();
        for a in 0..times.len() {
            for b in a + 1..times.len() {
                let bound = diag[a] * (-(times[b] - times[a]) / c).exp();
                monotone_worst = monotone_worst.max(diag[b] / bound);
            }
        }
    }
    Ok(LinkReport {
        rho,
        nodes: w.len(),
        lambda1,
        trace_rate,
        c_measured,
        product,
        monotone_worst,
        pass: (product - 1.0).abs() <= tol && monotone_worst <= 1.0 + 1e-9,
    })
}

const SMOOTHING: [f64; 3] = [3.0, 5.0, 8.0];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::library;

    #[test]
    fn line_ratio_tends_to_two() {
        let times = [10.0, 20.0, 50.0, 100.0, 200.0];
        let r = large_time_compare(&library::z1_cell(), &times, 60, 0.25).unwrap();
        assert!(r.ratio_within(1.6, 2.4), "{:?}", r.rows);
        assert!(matches!(
            large_time_compare(&library::z1_cell(), &[1000.0], 60, 0.25),
            Err(Error::Horizon { .. })
        ));
    }

    #[test]
    fn plane_ratio_stays_in_a_band() {
        let r = large_time_compare(&library::z2_cell(), &[5.0, 10.0, 20.0, 35.0, 50.0], 24, 0.25).unwrap();
        assert!(r.ratio_max / r.ratio_min < 1.2, "{:?}", r.rows);
        assert!(r.rates_agree(0.15));
    }

    #[test]
    fn free_group_gaps_and_link() {
        let y = library::l_complex();
        let g = dirichlet_gaps(&y, &[1, 2, 3], 0.25).unwrap();
        assert!(g.pass, "{g:?}");
        let l = nonamenable_link(&y, 2, 0.25, 30, 1, 0.1).unwrap();
        assert!(l.pass, "{l:?}");
    }
}
