//! Empirical audits of Poincaré-type inequalities on balls of complexes and
//! of groups.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::complex::{Complex, DistanceField, GeometryBounds, PointRef};
use crate::error::{Error, Result};
use crate::spectral::{eigensolve, DiscreteOperator};
use crate::stochastic::{Elem, GroupKind, GroupModel};

#[derive(Clone, Debug, Serialize)]
pub struct PoincareReport {
    pub inequality: String,
    pub samples: usize,
    /// Largest observed LHS / (RHS without the constant).
    pub worst_constant: f64,
    pub bound: f64,
    pub worst_family: String,
    pub pass: bool,
}

/// Natural-boundary operator on the nodes of `d` within distance `r` of
/// `center`.
pub fn ball_operator(x: &Complex, d: &DiscreteOperator, center: PointRef, r: f64) -> Result<DiscreteOperator> {
    let field = DistanceField::new(x, center, d.h / 2.0)?;
    let dist: Vec<f64> = d.points.iter().map(|&p| field.to(p)).collect();
    d.neumann_restriction(|i| dist[i] <= r + 1e-9 * r.max(1.0))
}

/// 1/√λ_1 of a Neumann ball operator: the optimal constant in
/// ‖f − f_E‖_2 ≤ C‖∇f‖_2.
pub fn neumann_poincare_constant(d_ball: &DiscreteOperator) -> Result<f64> {
    if d_ball.len() < 2 {
        return Err(Error::EmptyDomain);
    }
    let s = eigensolve(d_ball, 2)?;
    if !(s.values[1] > 1e-12) {
        return Err(Error::Disconnected("ball operator has a second zero eigenvalue".into()));
    }
    Ok(1.0 / s.values[1].sqrt())
}

/// Test functions on the nodes of a ball operator: half are random
/// combinations of low Neumann modes, half are tents and mollified
/// indicators around random nodes.
pub fn sample_functions(x: &Complex, d: &DiscreteOperator, count: usize, rng: &mut ChaCha8Rng) -> Result<Vec<(String, Vec<f64>)>> {
    let n = d.len();
    let modes = eigensolve(d, n.min(12))?;
    let diam = {
        let field = DistanceField::new(x, d.points[0], d.h / 2.0)?;
        d.points.iter().map(|&p| field.to(p)).fold(0.0, f64::max) * 2.0
    };
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        if k % 2 == 0 {
            let mut f = vec![0.0; n];
            for m in 1..modes.count() {
                let a: f64 = rng.sample::<f64, _>(StandardNormal) / m as f64;
                for (fi, v) in f.iter_mut().zip(modes.vector(m)) {
                    *fi += a * v;
                }
            }
            out.push(("spectral".to_string(), f));
        } else {
            let c = d.points[rng.random_range(0..n)];
            let field = DistanceField::new(x, c, d.h / 2.0)?;
            let w = diam * (0.05 + 0.5 * rng.random::<f64>()).max(2.0 * d.h / diam.max(1e-300));
            let f: Vec<f64> = if k % 4 == 1 {
                d.points.iter().map(|&p| (w - field.to(p)).max(0.0)).collect()
            } else {
                let delta = (2.0 * d.h).max(0.1 * w);
                d.points.iter().map(|&p| ((w - field.to(p)) / delta).clamp(0.0, 1.0)).collect()
            };
            out.push((if k % 4 == 1 { "tent" } else { "indicator" }.to_string(), f));
        }
    }
    Ok(out)
}

fn sub_const(f: &[f64], c: f64) -> Vec<f64> {
    f.iter().map(|v| v - c).collect()
}

/// Uniform Poincaré inequality on the ball E = B(center, r):
/// ‖f − f_E‖_{p,E} ≤ c_p P_0 r ‖∇f‖_{p,E} with c_1 = 1 and c_p = 2p.
pub fn complex_poincare_check(
    x: &Complex,
    d_ball: &DiscreteOperator,
    r: f64,
    p: f64,
    samples: usize,
    seed: u64,
) -> Result<PoincareReport> {
    let bounds = GeometryBounds::of(x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let funcs = sample_functions(x, d_ball, samples, &mut rng)?;
    let factor = if p == 1.0 { 1.0 } else { 2.0 * p };
    let bound = factor * bounds.p0;
    let mut worst = 0.0;
    let mut family = String::new();
    for (name, f) in &funcs {
        let lhs = d_ball.lp_norm(&sub_const(f, d_ball.mean(f)), p);
        let grad = d_ball.gradient_lp_norm(f, p);
        let ratio = if lhs <= 1e-14 { 0.0 } else { lhs / (r * grad) };
        if ratio > worst {
            worst = ratio;
            family = name.clone();
        }
    }
    Ok(PoincareReport {
        inequality: format!("complex p={p}"),
        samples: funcs.len(),
        worst_constant: worst,
        bound,
        worst_family: family,
        pass: worst <= bound,
    })
}

/// |∇f|(x) = sqrt(Σ_s |f(x) − f(xs)|² / |S|).
fn group_gradient(g: &GroupModel, f: &HashMap<Elem, f64>, at: &Elem) -> f64 {
    let s = g.num_generators() as f64;
    let fx = f[at];
    (g.generators().iter().map(|&k| (fx - f[&g.mul_gen(at, k)]).powi(2)).sum::<f64>() / s).sqrt()
}

fn group_functions(g: &GroupModel, support: &[Elem], r: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<(String, HashMap<Elem, f64>)> {
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let f: HashMap<Elem, f64> = match k % 4 {
            0 => {
                let waves: Vec<(Vec<f64>, f64, f64)> = (0..4)
                    .map(|_| {
                        let w: Vec<f64> = (0..g.rank()).map(|_| rng.sample::<f64, _>(StandardNormal) * 0.6 / (r as f64 + 1.0)).collect();
                        (w, rng.random::<f64>() * std::f64::consts::TAU, rng.sample(StandardNormal))
                    })
                    .collect();
                support
                    .iter()
                    .map(|e| {
                        let coords = coordinates(g, e);
                        let v = waves.iter().map(|(w, ph, a)| a * (w.iter().zip(&coords).map(|(a, b)| a * b).sum::<f64>() + ph).cos()).sum();
                        (e.clone(), v)
                    })
                    .collect()
            }
            1 => {
                let c = &support[rng.random_range(0..support.len())];
                let w = 1.0 + rng.random::<f64>() * 2.0 * r as f64;
                support.iter().map(|e| (e.clone(), (w - g.distance(c, e) as f64).max(0.0))).collect()
            }
            2 => {
                let c = &support[rng.random_range(0..support.len())];
                let w = rng.random_range(0..=2 * r);
                support.iter().map(|e| (e.clone(), if g.distance(c, e) <= w { 1.0 } else { 0.0 })).collect()
            }
            _ => support.iter().map(|e| (e.clone(), rng.random::<f64>())).collect(),
        };
        let name = ["wave", "tent", "indicator", "noise"][k % 4].to_string();
        out.push((name, f));
    }
    out
}

/// Coordinates used by the smooth test functions: the lattice point for
/// Z^d, and (word length, signed first letter) for free groups.
fn coordinates(g: &GroupModel, e: &Elem) -> Vec<f64> {
    match g.kind {
        GroupKind::Zd { .. } => e.iter().map(|&c| c as f64).collect(),
        GroupKind::Free { rank } => {
            let mut v = vec![e.len() as f64];
            v.extend((1..rank).map(|i| e.first().map_or(0.0, |&l| if l.unsigned_abs() as usize == i { l.signum() as f64 } else { 0.0 })));
            v
        }
    }
}

/// ‖f − f_{B_r}‖_{1,B_r} ≤ (|B_2r|/|B_r|)·2r·√|S|·‖∇f‖_{1,B_3r} over sampled f,
/// plus the constant function.
pub fn group_poincare_check(g: &GroupModel, r: usize, samples: usize, seed: u64) -> Result<PoincareReport> {
    if g.ball_size(3 * r + 1) > 5_000_000 {
        return Err(Error::Size(format!("ball of radius {} in {}", 3 * r + 1, g.name())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let support = g.ball(3 * r + 1);
    let inner: Vec<&Elem> = support.iter().filter(|e| g.word_length(e) <= r).collect();
    let big: Vec<&Elem> = support.iter().filter(|e| g.word_length(e) <= 3 * r).collect();
    let bound = g.ball_size(2 * r) as f64 / g.ball_size(r) as f64 * 2.0 * r as f64 * (g.num_generators() as f64).sqrt();
    let mut funcs = group_functions(g, &support, r, samples, &mut rng);
    funcs.push(("constant".into(), support.iter().map(|e| (e.clone(), 3.5)).collect()));
    let mut worst = 0.0;
    let mut family = String::new();
    for (name, f) in &funcs {
        let mean = inner.iter().map(|e| f[*e]).sum::<f64>() / inner.len() as f64;
        let lhs: f64 = inner.iter().map(|e| (f[*e] - mean).abs()).sum();
        let grad: f64 = big.iter().map(|e| group_gradient(g, f, e)).sum();
        let ratio = if lhs <= 1e-12 { 0.0 } else { lhs / grad };
        if ratio > worst {
            worst = ratio;
            family = name.clone();
        }
    }
    Ok(PoincareReport {
        inequality: format!("{} weak r={r}", g.name()),
        samples: funcs.len(),
        worst_constant: worst,
        bound,
        worst_family: family,
        pass: worst <= bound,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TransferReport {
    /// Measured p = 1 constant C with ‖f − f_E‖_1 ≤ C r ‖∇f‖_1.
    pub c1: f64,
    /// (p, worst inf_c‖f − c‖_p / (p C r ‖∇f‖_p)).
    pub ratios: Vec<(f64, f64)>,
    pub pass: bool,
}

/// c with Σ m |f − c|^p sign(f − c) = 0.
fn balancing_constant(d: &DiscreteOperator, f: &[f64], p: f64) -> f64 {
    let moment = |c: f64| -> f64 { f.iter().zip(&d.mass).map(|(v, m)| m * (v - c).abs().powf(p) * (v - c).signum()).sum() };
    let (mut lo, mut hi) = f.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if moment(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// inf over c of ‖f − c‖_p, by golden-section search (the map is convex).
pub fn best_constant_norm(d: &DiscreteOperator, f: &[f64], p: f64) -> f64 {
    let norm = |c: f64| d.lp_norm(&sub_const(f, c), p);
    let (mut a, mut b) = f.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut e = a + g * (b - a);
    let (mut fc, mut fe) = (norm(c), norm(e));
    for _ in 0..120 {
        if fc < fe {
            b = e;
            e = c;
            fe = fc;
            c = b - g * (b - a);
            fc = norm(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + g * (b - a);
            fe = norm(e);
        }
    }
    fc.min(fe)
}

/// Check the p-extension of a p = 1 Poincaré inequality: the p = 1 constant
/// is measured over the sampled functions together with the transformed
/// functions |f − c_f|^p sign(f − c_f) that the extension argument feeds
/// back into it.
pub fn poincare_transfer(x: &Complex, d_ball: &DiscreteOperator, r: f64, ps: &[f64], samples: usize, seed: u64) -> Result<TransferReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let funcs = sample_functions(x, d_ball, samples, &mut rng)?;
    let ratio1 = |h: &[f64]| -> f64 {
        let lhs = d_ball.lp_norm(&sub_const(h, d_ball.mean(h)), 1.0);
        if lhs <= 1e-14 {
            0.0
        } else {
            lhs / (r * d_ball.gradient_lp_norm(h, 1.0))
        }
    };
    let mut c1: f64 = 0.0;
    for (_, f) in &funcs {
        c1 = c1.max(ratio1(f));
        for &p in ps {
            let c = balancing_constant(d_ball, f, p);
            let g: Vec<f64> = f.iter().map(|v| (v - c).abs().powf(p) * (v - c).signum()).collect();
            c1 = c1.max(ratio1(&g));
        }
    }
    let mut ratios = Vec::new();
    for &p in ps {
        let mut worst: f64 = 0.0;
        for (_, f) in &funcs {
            let lhs = best_constant_norm(d_ball, f, p);
            if lhs > 1e-14 {
                worst = worst.max(lhs / (p * c1 * r * d_ball.gradient_lp_norm(f, p)));
            }
        }
        ratios.push((p, worst));
    }
    let pass = ratios.iter().all(|&(_, w)| w <= 1.0 + 1e-9);
    Ok(TransferReport { c1, ratios, pass })
}

/// Axis-aligned box in a face chart (the second axis is ignored for n = 1).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ChartBox {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl ChartBox {
    fn measure(&self, n: usize) -> f64 {
        (0..n).map(|k| self.hi[k] - self.lo[k]).product()
    }

    fn diameter(&self, n: usize) -> f64 {
        (0..n).map(|k| (self.hi[k] - self.lo[k]).powi(2)).sum::<f64>().sqrt()
    }

    /// Midpoint quadrature nodes with `g` cells per axis.
    fn nodes(&self, n: usize, g: usize) -> (Vec<[f64; 2]>, f64) {
        let mut pts = Vec::new();
        let h: Vec<f64> = (0..2).map(|k| (self.hi[k] - self.lo[k]) / g as f64).collect();
        let gy = if n == 1 { 1 } else { g };
        for j in 0..gy {
            for i in 0..g {
                pts.push([self.lo[0] + (i as f64 + 0.5) * h[0], self.lo[1] + (j as f64 + 0.5) * h[1]]);
            }
        }
        (pts, self.measure(n) / (pts_len(g, n)) as f64)
    }
}

fn pts_len(g: usize, n: usize) -> usize {
    if n == 1 {
        g
    } else {
        g * g
    }
}

/// Lipschitz test function on a chart with its gradient.
#[derive(Clone, Debug)]
enum ChartFn {
    Constant(f64),
    Linear([f64; 2]),
    Wave { k: [f64; 2], phase: f64 },
    Tent { c: [f64; 2], w: f64 },
}

impl ChartFn {
    fn value(&self, p: [f64; 2]) -> f64 {
        match self {
            ChartFn::Constant(c) => *c,
            ChartFn::Linear(a) => a[0] * p[0] + a[1] * p[1],
            ChartFn::Wave { k, phase } => (k[0] * p[0] + k[1] * p[1] + phase).sin(),
            ChartFn::Tent { c, w } => (w - ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt()).max(0.0),
        }
    }

    fn grad(&self, p: [f64; 2]) -> f64 {
        match self {
            ChartFn::Constant(_) => 0.0,
            ChartFn::Linear(a) => a[0].hypot(a[1]),
            ChartFn::Wave { k, phase } => (k[0] * p[0] + k[1] * p[1] + phase).cos().abs() * k[0].hypot(k[1]),
            ChartFn::Tent { c, w } => {
                if ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt() < *w {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// ∬_{Ω2×Ω1} |f(z) − f(y)| ≤ 2^{n−1} (diam Ω / n)(μΩ1 + μΩ2) ∫_Ω |∇f| on
/// sampled Lipschitz f, by midpoint quadrature.
pub fn convex_mean_inequality_check(n: usize, omega: ChartBox, o1: ChartBox, o2: ChartBox, samples: usize, seed: u64) -> Result<PoincareReport> {
    if n != 1 && n != 2 {
        return Err(Error::Invalid(format!("dimension {n}")));
    }
    for b in [&o1, &o2] {
        for k in 0..n {
            if b.lo[k] < omega.lo[k] - 1e-12 || b.hi[k] > omega.hi[k] + 1e-12 || b.lo[k] >= b.hi[k] {
                return Err(Error::Invalid("subsets must be non-empty boxes inside Ω".into()));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut funcs = vec![ChartFn::Constant(1.0), ChartFn::Linear([1.0, if n == 2 { 0.5 } else { 0.0 }])];
    let scale = 1.0 / omega.diameter(n);
    while funcs.len() < samples.max(2) {
        let mut v = || -> [f64; 2] {
            let a = [rng.sample::<f64, _>(StandardNormal), if n == 2 { rng.sample(StandardNormal) } else { 0.0 }];
            a
        };
        let f = match funcs.len() % 3 {
            0 => ChartFn::Linear(v()),
            1 => {
                let k = v();
                ChartFn::Wave { k: [k[0] * 8.0 * scale, k[1] * 8.0 * scale], phase: rng.random::<f64>() * 6.28 }
            }
            _ => {
                let c = [
                    omega.lo[0] + rng.random::<f64>() * (omega.hi[0] - omega.lo[0]),
                    if n == 2 { omega.lo[1] + rng.random::<f64>() * (omega.hi[1] - omega.lo[1]) } else { 0.0 },
                ];
                ChartFn::Tent { c, w: omega.diameter(n) * (0.05 + 0.5 * rng.random::<f64>()) }
            }
        };
        funcs.push(f);
    }
    let (gq, gi) = if n == 1 { (400, 2000) } else { (20, 200) };
    let (n1, w1) = o1.nodes(n, gq);
    let (n2, w2) = o2.nodes(n, gq);
    let (ni, wi) = omega.nodes(n, gi);
    let bound = 2f64.powi(n as i32 - 1) * omega.diameter(n) / n as f64 * (o1.measure(n) + o2.measure(n));
    let mut worst: f64 = 0.0;
    let mut family = String::new();
    for f in &funcs {
        let v1: Vec<f64> = n1.iter().map(|&p| f.value(p)).collect();
        let v2: Vec<f64> = n2.iter().map(|&p| f.value(p)).collect();
        let lhs: f64 = v2.iter().map(|a| v1.iter().map(|b| (a - b).abs()).sum::<f64>()).sum::<f64>() * w1 * w2;
        let grad: f64 = ni.iter().map(|&p| f.grad(p)).sum::<f64>() * wi;
        let ratio = if lhs <= 1e-14 { 0.0 } else { lhs / grad };
        if ratio > worst {
            worst = ratio;
            family = format!("{f:?}");
        }
    }
    Ok(PoincareReport {
        inequality: format!("convex n={n}"),
        samples: funcs.len(),
        worst_constant: worst,
        bound,
        worst_family: family,
        pass: worst <= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::library;
    use std::f64::consts::PI;

    #[test]
    fn canonical_constants() {
        let x = library::interval(1.0);
        let d = DiscreteOperator::build(&x, 1.0 / 200.0).unwrap();
        let c = neumann_poincare_constant(&d).unwrap();
        assert!((c - 1.0 / PI).abs() < 0.01 / PI);
        let x = library::star(3);
        let d = DiscreteOperator::build(&x, 1.0 / 100.0).unwrap();
        let ball = ball_operator(&x, &d, PointRef::Vertex(0), 1.0).unwrap();
        assert_eq!(ball.len(), d.len());
        let c = neumann_poincare_constant(&ball).unwrap();
        assert!((c - 2.0 / PI).abs() < 0.02 / PI);
    }

    #[test]
    fn group_check_passes_and_constant_is_zero() {
        let r = group_poincare_check(&GroupModel::zd(2), 3, 40, 5).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.bound - 85.0 / 25.0 * 6.0 * 2.0).abs() < 1e-9);
    }

    #[test]
    fn transfer_and_interval_ball() {
        let x = library::interval(1.0);
        let d = DiscreteOperator::build(&x, 1.0 / 100.0).unwrap();
        let ball = ball_operator(&x, &d, x.parse_point("e1:0.5").unwrap(), 0.25).unwrap();
        let rep = complex_poincare_check(&x, &ball, 0.25, 1.0, 20, 3).unwrap();
        assert!(rep.pass && rep.worst_constant < 10.0);
        let t = poincare_transfer(&x, &ball, 0.25, &[1.5, 2.0, 3.0], 20, 4).unwrap();
        assert!(t.pass, "{t:?}");
    }

    #[test]
    fn convex_checks() {
        let unit = ChartBox { lo: [0.0, 0.0], hi: [1.0, 1.0] };
        let r = convex_mean_inequality_check(2, unit, unit, unit, 12, 1).unwrap();
        assert!(r.pass, "{r:?}");
        let seg = ChartBox { lo: [0.0, 0.0], hi: [2.0, 0.0] };
        let a = ChartBox { lo: [0.0, 0.0], hi: [0.5, 0.0] };
        let b = ChartBox { lo: [1.5, 0.0], hi: [2.0, 0.0] };
        let r = convex_mean_inequality_check(1, seg, a, b, 12, 2).unwrap();
        assert!(r.pass, "{r:?}");
    }
}
