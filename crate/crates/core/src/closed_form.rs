//! Exact series heat kernels on the line, circle, interval, star graphs and
//! joined stars. These are the reference values for every numerical path.

use std::f64::consts::PI;

/// Tail tolerance used by the convenience kernels.
pub const DEFAULT_TOL: f64 = 1e-14;

/// Below this value of `s` the Gaussian image sum converges faster than the
/// Fourier side of the theta identity.
pub const THETA_SWITCH: f64 = 1.0 / (2.0 * PI);

/// Σ_k exp(-(x-k)²/(2s)), summed directly until the next term is below `tol`.
pub fn theta_gaussian(x: f64, s: f64, tol: f64) -> f64 {
    let x = x - x.round();
    let mut sum = (-x * x / (2.0 * s)).exp();
    let mut k = 1.0;
    loop {
        let a = (-(x - k).powi(2) / (2.0 * s)).exp();
        let b = (-(x + k).powi(2) / (2.0 * s)).exp();
        sum += a + b;
        if a + b < tol * sum.max(f64::MIN_POSITIVE) || k > 1e6 {
            break;
        }
        k += 1.0;
    }
    sum
}

/// √(2πs) Σ_k exp(-2π²k²s) cos(2πkx), summed until the next term is below `tol`.
pub fn theta_fourier(x: f64, s: f64, tol: f64) -> f64 {
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        let w = (-2.0 * PI * PI * k * k * s).exp();
        sum += 2.0 * w * (2.0 * PI * k * x).cos();
        if 2.0 * w < tol || k > 1e6 {
            break;
        }
        k += 1.0;
    }
    (2.0 * PI * s).sqrt() * sum
}

/// Both sides of Jacobi's theta identity
/// Σ_k e^{-(x-k)²/(2s)} = √(2πs) Σ_k e^{-2π²k²s} cos(2πkx).
pub fn theta_identity(x: f64, s: f64, tol: f64) -> (f64, f64) {
    (theta_gaussian(x, s, tol), theta_fourier(x, s, tol))
}

/// Σ_k exp(-(x-k)²/(2s)) using whichever side of the identity converges faster.
pub fn theta(x: f64, s: f64, tol: f64) -> f64 {
    if s < THETA_SWITCH {
        theta_gaussian(x, s, tol)
    } else {
        theta_fourier(x, s, tol)
    }
}

/// Periodic image sum Σ_k exp(-(a - kP)²/(4t)).
pub fn image_sum(a: f64, period: f64, t: f64) -> f64 {
    theta(a / period, 2.0 * t / (period * period), DEFAULT_TOL)
}

/// Gauss kernel on R^n.
pub fn line_kernel(x: &[f64], y: &[f64], t: f64) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    (4.0 * PI * t).powf(-n / 2.0) * (-d2 / (4.0 * t)).exp()
}

/// Heat kernel on the circle of circumference 1, arclength coordinates.
pub fn circle_kernel(x: f64, y: f64, t: f64) -> f64 {
    image_sum(x - y, 1.0, t) / (4.0 * PI * t).sqrt()
}

/// Neumann heat kernel on [0, L] by the method of images.
pub fn interval_kernel(len: f64, x: f64, y: f64, t: f64) -> f64 {
    (image_sum(x - y, 2.0 * len, t) + image_sum(x + y, 2.0 * len, t)) / (4.0 * PI * t).sqrt()
}

/// A point on a star graph: leg index and distance from the center.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LegPoint {
    pub leg: usize,
    pub offset: f64,
}

impl LegPoint {
    pub fn new(leg: usize, offset: f64) -> Self {
        LegPoint { leg, offset }
    }

    pub fn center() -> Self {
        LegPoint { leg: 0, offset: 0.0 }
    }

    pub fn tip(leg: usize) -> Self {
        LegPoint { leg, offset: 1.0 }
    }
}

fn star_coefficient(legs: usize, p: LegPoint, q: LegPoint) -> f64 {
    let n = legs as f64;
    if p.leg == q.leg {
        2.0 * (1.0 - 1.0 / n)
    } else {
        -2.0 / n
    }
}

/// Heat kernel of the star with `legs` unit legs, assembled from image sums.
pub fn star_kernel(legs: usize, p: LegPoint, q: LegPoint, t: f64) -> f64 {
    assert!(legs >= 1);
    let (x, y) = (p.offset, q.offset);
    let n = legs as f64;
    let c = star_coefficient(legs, p, q);
    let g = (PI * t).sqrt();
    let s2m = image_sum(x - y, 2.0, t);
    let s2p = image_sum(x + y, 2.0, t);
    let even = (s2m + s2p) / (2.0 * g * n);
    let odd4 = c * (image_sum(x - y, 4.0, t) - image_sum(x + y, 4.0, t)) / (2.0 * g);
    let odd2 = c * (s2p - s2m) / (4.0 * g);
    even + odd4 + odd2
}

/// The same kernel summed directly over eigenfunctions, `modes` per family.
pub fn star_kernel_modes(legs: usize, p: LegPoint, q: LegPoint, t: f64, modes: usize) -> f64 {
    let n = legs as f64;
    let (x, y) = (p.offset, q.offset);
    let c = star_coefficient(legs, p, q);
    let mut sum = 1.0 / n;
    for k in 1..=modes {
        let w = k as f64 * PI;
        sum += 2.0 / n * (w * x).cos() * (w * y).cos() * (-w * w * t).exp();
    }
    for k in 0..modes {
        let w = (2 * k + 1) as f64 * PI / 2.0;
        sum += c * (w * x).sin() * (w * y).sin() * (-w * w * t).exp();
    }
    sum
}

/// Which pair of centers a two-star evaluation refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwoStarPair {
    /// Between the two centers.
    V1V2,
    /// Diagonal at the center carrying the `n` legs.
    V1V1,
}

/// √λ₀ for the two-star, the root of cos²(√λ) = mn/((m+1)(n+1)) in (0, π/2].
pub fn two_star_root(m: usize, n: usize) -> f64 {
    let (m, n) = (m as f64, n as f64);
    (m * n / ((m + 1.0) * (n + 1.0))).sqrt().acos()
}

/// Heat kernel between centers of two stars (m and n unit legs) joined by a
/// unit edge.
pub fn two_star_kernel(m: usize, n: usize, which: TwoStarPair, t: f64) -> f64 {
    let root = two_star_root(m, n);
    let (mf, nf) = (m as f64, n as f64);
    let pre = 1.0 / ((mf + nf + 1.0) * (PI * t).sqrt());
    let mut sum = 0.0;
    match which {
        TwoStarPair::V1V2 => {
            let a = (mf * nf).sqrt() / ((mf + 1.0) * (nf + 1.0)).sqrt();
            let mut k = 0i64;
            loop {
                let j = (2 * k + 1) as f64;
                let w = (-j * j / (4.0 * t)).exp();
                // k and -k-1 give the same odd integer in absolute value
                sum += 2.0 * w * (1.0 - a * (j * root).cos());
                if w < DEFAULT_TOL * sum.abs().max(f64::MIN_POSITIVE) || k > 1_000_000 {
                    break;
                }
                k += 1;
            }
        }
        TwoStarPair::V1V1 => {
            let b = mf / (nf + 1.0);
            sum += 1.0 + b;
            let mut k = 1i64;
            loop {
                let kf = k as f64;
                let w = (-kf * kf / t).exp();
                sum += 2.0 * w * (1.0 + b * (2.0 * kf * root).cos());
                if w < DEFAULT_TOL * sum.abs() || k > 1_000_000 {
                    break;
                }
                k += 1;
            }
        }
    }
    pre * sum
}

/// Family tag and parameters for a closed-form kernel.
#[derive(Clone, Debug, PartialEq)]
pub enum SeriesKernel {
    Line { dim: usize },
    Circle,
    Interval { len: f64 },
    Star { legs: usize },
    TwoStar { m: usize, n: usize },
}

impl SeriesKernel {
    pub fn name(&self) -> &'static str {
        match self {
            SeriesKernel::Line { .. } => "line",
            SeriesKernel::Circle => "circle",
            SeriesKernel::Interval { .. } => "interval",
            SeriesKernel::Star { .. } => "star",
            SeriesKernel::TwoStar { .. } => "two_star",
        }
    }

    pub fn params(&self) -> String {
        match self {
            SeriesKernel::Line { dim } => format!("n={dim}"),
            SeriesKernel::Circle => "L=1".to_string(),
            SeriesKernel::Interval { len } => format!("L={len}"),
            SeriesKernel::Star { legs } => format!("n={legs}"),
            SeriesKernel::TwoStar { m, n } => format!("m={m};n={n}"),
        }
    }

    /// Leading small-time diagonal constant: h_t(x,x)·√(πt) → value
    /// (for the line family the normalisation is (4πt)^{n/2}).
    pub fn small_time_constant(&self, site: DiagonalSite) -> f64 {
        match (self, site) {
            (SeriesKernel::Line { .. }, _) => 1.0,
            (SeriesKernel::Circle, _) => 0.5,
            (SeriesKernel::Interval { .. }, DiagonalSite::Interior) => 0.5,
            (SeriesKernel::Interval { .. }, _) => 1.0,
            (SeriesKernel::Star { legs }, DiagonalSite::Center) => 1.0 / *legs as f64,
            (SeriesKernel::Star { .. }, DiagonalSite::Tip) => 1.0,
            (SeriesKernel::Star { .. }, DiagonalSite::Interior) => 0.5,
            (SeriesKernel::TwoStar { n, .. }, _) => 1.0 / (*n as f64 + 1.0),
        }
    }
}

/// Where a diagonal value is taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagonalSite {
    Center,
    Tip,
    Interior,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_sides_agree() {
        for &(x, s) in &[(0.0, 1.0), (0.5, 0.02), (0.25, 5.0), (0.9, 1e-3)] {
            let (l, r) = theta_identity(x, s, 1e-16);
            assert!((l - r).abs() <= 1e-12 * l.max(1.0), "{x} {s} {l} {r}");
        }
    }

    #[test]
    fn gauss_normalisation() {
        assert!((line_kernel(&[0.3], &[0.3], 1.0 / (4.0 * PI)) - 1.0).abs() < 1e-15);
        let v = line_kernel(&[0.0, 0.0], &[1.0, 0.0], 0.25);
        assert!((v - (-1.0f64).exp() / PI).abs() < 1e-15);
        assert!((v - 0.11709).abs() < 1e-5);
    }

    #[test]
    fn circle_uniform_at_large_time() {
        assert!((circle_kernel(0.1, 0.7, 10.0) - 1.0).abs() < 1e-10);
        let a = circle_kernel(0.1, 0.3, 0.01);
        let b = circle_kernel(0.6, 0.8, 0.01);
        let c = circle_kernel(0.95, 0.15, 0.01);
        assert!((a - b).abs() < 1e-13 && (a - c).abs() < 1e-13);
    }

    #[test]
    fn interval_mass_is_one() {
        for &t in &[1e-3, 0.05, 0.7, 4.0] {
            let n = 4000;
            let h = 3.0 / n as f64;
            // Simpson rule over y
            let mut s = 0.0;
            for i in 0..=n {
                let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * interval_kernel(3.0, 1.2, i as f64 * h, t);
            }
            s *= h / 3.0;
            assert!((s - 1.0).abs() < 1e-8, "{t} {s}");
        }
    }

    #[test]
    fn star_image_form_matches_eigen_sum() {
        for &legs in &[1usize, 2, 3, 5] {
            for &(p, q) in &[
                (LegPoint::new(0, 0.3), LegPoint::new(0, 0.7)),
                (LegPoint::new(0, 0.3), LegPoint::new(1 % legs, 0.8)),
                (LegPoint::center(), LegPoint::tip(0)),
                (LegPoint::tip(0), LegPoint::tip(0)),
            ] {
                for &t in &[0.02, 0.1, 0.5, 2.0] {
                    let a = star_kernel(legs, p, q, t);
                    let b = star_kernel_modes(legs, p, q, t, 2000);
                    assert!((a - b).abs() < 1e-10 * a.abs().max(1.0), "{legs} {p:?} {q:?} {t} {a} {b}");
                }
            }
        }
    }

    #[test]
    fn single_leg_star_is_interval() {
        let a = star_kernel(1, LegPoint::new(0, 0.2), LegPoint::new(0, 0.9), 0.03);
        let b = interval_kernel(1.0, 0.2, 0.9, 0.03);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn two_star_root_range() {
        for m in 0..5 {
            for n in 0..5 {
                let r = two_star_root(m, n);
                assert!(r > 0.0 && r <= PI / 2.0 + 1e-15);
            }
        }
        assert!((two_star_root(1, 1) - PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn two_star_small_time() {
        let t = 1e-3;
        let (m, n) = (2usize, 3usize);
        let d = two_star_kernel(m, n, TwoStarPair::V1V1, t) * (PI * t).sqrt();
        assert!((d - 0.25).abs() < 1e-6);
        let o = two_star_kernel(m, n, TwoStarPair::V1V2, t);
        let lead = 2.0 / ((PI * t).sqrt() * 12.0) * (-1.0 / (4.0 * t)).exp();
        assert!((o / lead - 1.0).abs() < 1e-6);
    }
}
