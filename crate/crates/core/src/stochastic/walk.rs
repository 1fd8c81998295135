//! Simple random walks on Z^d and free groups, exact and in floating point.

use std::collections::{HashMap, HashSet};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::group::{Elem, GroupKind, GroupModel};
use crate::error::{Error, Result};

/// Largest number of lattice cells a Z^d walk table may occupy.
pub const MAX_CELLS: usize = 50_000_000;

/// Law of the walk after `steps` steps started at the identity.
#[derive(Clone, Debug, Serialize)]
pub struct WalkDistribution {
    pub steps: usize,
    pub masses: Vec<(Elem, f64)>,
}

impl WalkDistribution {
    pub fn total_mass(&self) -> f64 {
        self.masses.iter().map(|(_, m)| m).sum()
    }

    pub fn mass(&self, g: &Elem) -> f64 {
        self.masses.iter().find(|(h, _)| h == g).map_or(0.0, |(_, m)| *m)
    }
}

fn grid_cells(d: usize, radius: usize) -> Result<usize> {
    let side = 2 * radius + 1;
    let mut cells: usize = 1;
    for _ in 0..d {
        cells = cells.checked_mul(side).filter(|&c| c <= MAX_CELLS).ok_or_else(|| {
            Error::Size(format!("Z^{d} walk of {radius} steps needs more than {MAX_CELLS} cells"))
        })?;
    }
    Ok(cells)
}

/// Dense lattice propagation of a Z^d walk.
struct Lattice {
    d: usize,
    radius: usize,
    side: usize,
}

impl Lattice {
    fn index(&self, g: &[i32]) -> usize {
        g.iter().fold(0, |acc, &c| acc * self.side + (c + self.radius as i32) as usize)
    }

    fn step<T: Clone + Zero + for<'a> std::ops::AddAssign<&'a T>>(&self, cur: &[T]) -> Vec<T> {
        let mut next = vec![T::zero(); cur.len()];
        let strides: Vec<usize> = (0..self.d).map(|k| self.side.pow((self.d - 1 - k) as u32)).collect();
        for (i, v) in cur.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            for &st in &strides {
                let c = (i / st) % self.side;
                if c + 1 < self.side {
                    next[i + st] += v;
                }
                if c > 0 {
                    next[i - st] += v;
                }
            }
        }
        next
    }
}

fn free_profile_step<T: Clone + Zero + for<'a> std::ops::AddAssign<&'a T>>(c: &[T], gens: usize, scale_up: impl Fn(&T, usize) -> T) -> Vec<T> {
    let mut next = vec![T::zero(); c.len() + 1];
    for (j, v) in c.iter().enumerate() {
        if v.is_zero() {
            continue;
        }
        if j == 0 {
            next[1] += &scale_up(v, gens);
        } else {
            next[j - 1] += v;
            next[j + 1] += &scale_up(v, gens - 1);
        }
    }
    next
}

/// Number of closed walks of length `steps` at the identity.
pub fn closed_walk_count(g: &GroupModel, steps: usize) -> Result<BigUint> {
    match g.kind {
        GroupKind::Zd { d } => {
            let radius = steps / 2 + 1;
            grid_cells(d, radius)?;
            let lat = Lattice { d, radius, side: 2 * radius + 1 };
            let cells = lat.side.pow(d as u32);
            let mut cur = vec![BigUint::zero(); cells];
            let origin = lat.index(&vec![0; d]);
            cur[origin] = BigUint::one();
            for _ in 0..steps {
                cur = lat.step(&cur);
            }
            Ok(cur[origin].clone())
        }
        GroupKind::Free { rank } => {
            let mut c = vec![BigUint::one()];
            for _ in 0..steps {
                c = free_profile_step(&c, 2 * rank, |v, k| v * BigUint::from(k));
            }
            Ok(c[0].clone())
        }
    }
}

/// Exact return probability after `steps` steps as (numerator, denominator).
pub fn return_probability_exact(g: &GroupModel, steps: usize) -> Result<(BigUint, BigUint)> {
    let num = closed_walk_count(g, steps)?;
    let den = BigUint::from(g.num_generators()).pow(steps as u32);
    Ok((num, den))
}

/// p_n(e,e).
pub fn group_return_probability(g: &GroupModel, steps: usize) -> Result<f64> {
    Ok(*return_probabilities(g, steps)?.last().unwrap())
}

/// p_k(e,e) for k = 0..=max_steps in one propagation.
pub fn return_probabilities(g: &GroupModel, max_steps: usize) -> Result<Vec<f64>> {
    let s = g.num_generators() as f64;
    let mut out = Vec::with_capacity(max_steps + 1);
    match g.kind {
        GroupKind::Zd { d } => {
            // only the first half of the steps can move mass that still returns
            let radius = max_steps / 2 + 1;
            grid_cells(d, radius)?;
            let lat = Lattice { d, radius, side: 2 * radius + 1 };
            let cells = lat.side.pow(d as u32);
            let mut cur = vec![0.0f64; cells];
            let origin = lat.index(&vec![0; d]);
            cur[origin] = 1.0;
            out.push(1.0);
            for _ in 0..max_steps {
                cur = lat.step(&cur);
                cur.iter_mut().for_each(|v| *v /= s);
                out.push(cur[origin]);
            }
        }
        GroupKind::Free { rank } => {
            let mut c = vec![1.0f64];
            out.push(1.0);
            for _ in 0..max_steps {
                c = free_profile_step(&c, 2 * rank, |v, k| v * k as f64);
                c.iter_mut().for_each(|v| *v /= s);
                out.push(c[0]);
            }
        }
    }
    Ok(out)
}

/// Full distribution after `steps` steps. Free-group laws are expanded from
/// the word-length profile, so keep `steps` small there.
pub fn walk_distribution(g: &GroupModel, steps: usize) -> Result<WalkDistribution> {
    let s = g.num_generators() as f64;
    match g.kind {
        GroupKind::Zd { d } => {
            let radius = steps;
            grid_cells(d, radius)?;
            let lat = Lattice { d, radius, side: 2 * radius + 1 };
            let cells = lat.side.pow(d as u32);
            let mut cur = vec![0.0f64; cells];
            cur[lat.index(&vec![0; d])] = 1.0;
            for _ in 0..steps {
                cur = lat.step(&cur);
                cur.iter_mut().for_each(|v| *v /= s);
            }
            let masses = g
                .ball(steps)
                .into_iter()
                .map(|e| {
                    let m = cur[lat.index(&e)];
                    (e, m)
                })
                .filter(|(_, m)| *m > 0.0)
                .collect();
            Ok(WalkDistribution { steps, masses })
        }
        GroupKind::Free { rank } => {
            if g.ball_size(steps) > 2_000_000 {
                return Err(Error::Size(format!("free-group ball of radius {steps}")));
            }
            let mut c = vec![1.0f64];
            for _ in 0..steps {
                c = free_profile_step(&c, 2 * rank, |v, k| v * k as f64);
                c.iter_mut().for_each(|v| *v /= s);
            }
            let sphere = |j: usize| if j == 0 { 1.0 } else { (2 * rank) as f64 * ((2 * rank - 1) as f64).powi(j as i32 - 1) };
            let masses = g
                .ball(steps)
                .into_iter()
                .filter_map(|e| {
                    let j = g.word_length(&e);
                    let m = c[j] / sphere(j);
                    (m > 0.0).then_some((e, m))
                })
                .collect();
            Ok(WalkDistribution { steps, masses })
        }
    }
}

/// Kill-on-exit transition matrix on `a` (row-major).
pub fn restricted_kernel(g: &GroupModel, a: &[Elem]) -> Vec<f64> {
    let n = a.len();
    let index: HashMap<&Elem, usize> = a.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let w = 1.0 / g.num_generators() as f64;
    let mut k = vec![0.0; n * n];
    for (i, e) in a.iter().enumerate() {
        for s in g.generators() {
            if let Some(&j) = index.get(&g.mul_gen(e, s)) {
                k[i * n + j] += w;
            }
        }
    }
    k
}

/// Eigenvalues of the kill-on-exit walk on `a`, by decreasing modulus.
pub fn restricted_walk_spectrum(g: &GroupModel, a: &[Elem]) -> Vec<f64> {
    let n = a.len();
    if n == 0 {
        return Vec::new();
    }
    let k = restricted_kernel(g, a);
    let mut vals = crate::spectral::eigen::dense_symmetric_eigenvalues(&k, n);
    vals.sort_by(|x, y| {
        if (x.abs() - y.abs()).abs() > 1e-12 {
            y.abs().partial_cmp(&x.abs()).unwrap()
        } else {
            y.partial_cmp(x).unwrap()
        }
    });
    vals
}

/// The box [-i, i]^d.
pub fn folner_set(g: &GroupModel, i: usize) -> Result<Vec<Elem>> {
    let d = match g.kind {
        GroupKind::Zd { d } => d,
        GroupKind::Free { .. } => return Err(Error::Amenability(format!("{} has no Følner sequence", g.name()))),
    };
    let side = 2 * i + 1;
    grid_cells(d, i)?;
    let total = side.pow(d as u32);
    let mut out = Vec::with_capacity(total);
    for mut k in 0..total {
        let mut e = vec![0i32; d];
        for c in e.iter_mut().rev() {
            *c = (k % side) as i32 - i as i32;
            k /= side;
        }
        out.push(e);
    }
    Ok(out)
}

/// #(QF)/#F.
pub fn folner_ratio(g: &GroupModel, q: &[Elem], f: &[Elem]) -> f64 {
    let mut qf: HashSet<Elem> = HashSet::new();
    for a in q {
        for b in f {
            qf.insert(g.mul(a, b));
        }
    }
    qf.len() as f64 / f.len() as f64
}

/// Aitken Δ² extrapolation of the last three terms of a sequence.
pub fn aitken(seq: &[f64]) -> Option<f64> {
    if seq.len() < 3 {
        return None;
    }
    let n = seq.len();
    let (a, b, c) = (seq[n - 3], seq[n - 2], seq[n - 1]);
    let den = c - 2.0 * b + a;
    if den.abs() < 1e-300 {
        return Some(c);
    }
    Some(c - (c - b).powi(2) / den)
}

/// (log p_{2n})/(2n) for n = 1..=max_half.
pub fn log_rates(g: &GroupModel, max_half: usize) -> Result<Vec<f64>> {
    let p = return_probabilities(g, 2 * max_half)?;
    Ok((1..=max_half).map(|n| p[2 * n].ln() / (2 * n) as f64).collect())
}

/// Limit of (log p_{2n})/(2n): Aitken Δ² on the terms at n/4, n/2 and n,
/// whose error shrinks by a near-constant factor per doubling.
pub fn log_rate_limit(g: &GroupModel, max_half: usize) -> Result<f64> {
    if max_half < 4 {
        return Err(Error::Window("need at least 8 steps".into()));
    }
    let r = log_rates(g, max_half)?;
    let n = max_half;
    Ok(aitken(&[r[n / 4 - 1], r[n / 2 - 1], r[n - 1]]).expect("three terms"))
}

pub fn to_f64(num: &BigUint, den: &BigUint) -> f64 {
    // scale to keep precision for large denominators
    let shift = den.bits().saturating_sub(60);
    let n = (num >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (den >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_return_probabilities() {
        let z1 = GroupModel::zd(1);
        let z2 = GroupModel::zd(2);
        let f2 = GroupModel::free(2);
        assert_eq!(group_return_probability(&z1, 2).unwrap(), 0.5);
        assert_eq!(group_return_probability(&z2, 2).unwrap(), 0.25);
        assert!((group_return_probability(&f2, 4).unwrap() - 7.0 / 64.0).abs() < 1e-16);
        let (n, d) = return_probability_exact(&f2, 4).unwrap();
        assert_eq!((n, d), (BigUint::from(28u32), BigUint::from(256u32)));
    }

    #[test]
    fn free_group_rate_limit() {
        let lim = log_rate_limit(&GroupModel::free(2), 800).unwrap();
        assert!((lim - (3f64.sqrt() / 2.0).ln()).abs() < 1e-3, "{lim}");
        assert!((log_rate_limit(&GroupModel::zd(1), 800).unwrap()).abs() < 1e-3);
    }

    #[test]
    fn masses_sum_to_one() {
        for g in [GroupModel::zd(1), GroupModel::zd(2), GroupModel::free(2)] {
            for n in 0..6 {
                let w = walk_distribution(&g, n).unwrap();
                assert!((w.total_mass() - 1.0).abs() < 1e-12, "{} {n}", g.name());
                assert!(w.masses.iter().all(|(e, _)| g.word_length(e) <= n));
            }
        }
    }

    #[test]
    fn path_spectra() {
        let z1 = GroupModel::zd(1);
        let a: Vec<Elem> = (-2..=2).map(|i| vec![i]).collect();
        let b = restricted_walk_spectrum(&z1, &a);
        let c = (std::f64::consts::PI / 6.0).cos();
        let want = [c, -c, 0.5, -0.5, 0.0];
        for (x, y) in b.iter().zip(want) {
            assert!((x - y).abs() < 1e-12, "{b:?}");
        }
        assert_eq!(restricted_walk_spectrum(&z1, &[vec![0]]), vec![0.0]);
        let b1 = restricted_walk_spectrum(&z1, &z1.ball(1));
        assert!((b1[0] - 0.5f64.sqrt()).abs() < 1e-12 && b1[2].abs() < 1e-12);
    }

    #[test]
    fn folner() {
        let z1 = GroupModel::zd(1);
        let s: Vec<Elem> = vec![vec![1], vec![-1]];
        let f = folner_set(&z1, 10).unwrap();
        assert!((folner_ratio(&z1, &s, &f) - 23.0 / 21.0).abs() < 1e-15);
        assert_eq!(folner_ratio(&z1, &[vec![0]], &f), 1.0);
        assert!(matches!(folner_set(&GroupModel::free(2), 3), Err(Error::Amenability(_))));
    }
}
