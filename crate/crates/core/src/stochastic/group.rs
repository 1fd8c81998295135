use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

/// Group element. For Z^d: integer coordinates. For F_k: a reduced word of
/// signed generator letters (`i` is the i-th generator, `-i` its inverse).
pub type Elem = Vec<i32>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum GroupKind {
    Zd { d: usize },
    Free { rank: usize },
}

/// A finitely generated group with its standard symmetric generating set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupModel {
    pub kind: GroupKind,
}

impl GroupModel {
    pub fn zd(d: usize) -> Self {
        assert!(d >= 1);
        GroupModel { kind: GroupKind::Zd { d } }
    }

    pub fn free(rank: usize) -> Self {
        assert!(rank >= 1);
        GroupModel { kind: GroupKind::Free { rank } }
    }

    pub fn rank(&self) -> usize {
        match self.kind {
            GroupKind::Zd { d } => d,
            GroupKind::Free { rank } => rank,
        }
    }

    pub fn name(&self) -> String {
        match self.kind {
            GroupKind::Zd { d } => format!("Z^{d}"),
            GroupKind::Free { rank } => format!("F_{rank}"),
        }
    }

    pub fn is_amenable(&self) -> bool {
        matches!(self.kind, GroupKind::Zd { .. }) || self.rank() == 1
    }

    /// Generators as signed letters: +1, -1, +2, -2, ...
    pub fn generators(&self) -> Vec<i32> {
        (1..=self.rank() as i32).flat_map(|i| [i, -i]).collect()
    }

    pub fn num_generators(&self) -> usize {
        2 * self.rank()
    }

    pub fn identity(&self) -> Elem {
        match self.kind {
            GroupKind::Zd { d } => vec![0; d],
            GroupKind::Free { .. } => Vec::new(),
        }
    }

    pub fn is_identity(&self, g: &Elem) -> bool {
        match self.kind {
            GroupKind::Zd { .. } => g.iter().all(|&c| c == 0),
            GroupKind::Free { .. } => g.is_empty(),
        }
    }

    /// Right multiplication by a generator letter.
    pub fn mul_gen(&self, g: &Elem, s: i32) -> Elem {
        debug_assert!(s != 0 && s.unsigned_abs() as usize <= self.rank());
        let mut out = g.clone();
        match self.kind {
            GroupKind::Zd { .. } => out[s.unsigned_abs() as usize - 1] += s.signum(),
            GroupKind::Free { .. } => {
                if out.last() == Some(&-s) {
                    out.pop();
                } else {
                    out.push(s);
                }
            }
        }
        out
    }

    pub fn mul(&self, g: &Elem, h: &Elem) -> Elem {
        match self.kind {
            GroupKind::Zd { .. } => g.iter().zip(h).map(|(a, b)| a + b).collect(),
            GroupKind::Free { .. } => h.iter().fold(g.clone(), |acc, &s| self.mul_gen(&acc, s)),
        }
    }

    pub fn inverse(&self, g: &Elem) -> Elem {
        match self.kind {
            GroupKind::Zd { .. } => g.iter().map(|a| -a).collect(),
            GroupKind::Free { .. } => g.iter().rev().map(|a| -a).collect(),
        }
    }

    pub fn word_length(&self, g: &Elem) -> usize {
        match self.kind {
            GroupKind::Zd { .. } => g.iter().map(|a| a.unsigned_abs() as usize).sum(),
            GroupKind::Free { .. } => g.len(),
        }
    }

    /// d_G(g, h) = |g⁻¹h|.
    pub fn distance(&self, g: &Elem, h: &Elem) -> usize {
        self.word_length(&self.mul(&self.inverse(g), h))
    }

    /// Elements of the closed word ball B_G(r), in breadth-first order.
    pub fn ball(&self, r: usize) -> Vec<Elem> {
        let mut seen: HashMap<Elem, usize> = HashMap::new();
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        let e = self.identity();
        seen.insert(e.clone(), 0);
        queue.push_back(e);
        while let Some(g) = queue.pop_front() {
            let dg = seen[&g];
            order.push(g.clone());
            if dg == r {
                continue;
            }
            for s in self.generators() {
                let h = self.mul_gen(&g, s);
                if !seen.contains_key(&h) {
                    seen.insert(h.clone(), dg + 1);
                    queue.push_back(h);
                }
            }
        }
        order
    }

    /// Closed-form |B_G(r)|.
    pub fn ball_size(&self, r: usize) -> u128 {
        match self.kind {
            GroupKind::Zd { d } => {
                // Σ_k 2^k C(d,k) C(r,k)
                let mut total: u128 = 0;
                for k in 0..=d.min(r) {
                    total += (1u128 << k) * binom(d, k) * binom(r, k);
                }
                total
            }
            GroupKind::Free { rank } => {
                let q = 2 * rank as u128 - 1;
                let mut total = 1u128;
                let mut shell = 2 * rank as u128;
                for _ in 0..r {
                    total += shell;
                    shell *= q;
                }
                total
            }
        }
    }
}

fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_counts_match_closed_form() {
        for g in [GroupModel::zd(1), GroupModel::zd(2), GroupModel::zd(3), GroupModel::free(2)] {
            for r in 0..5 {
                assert_eq!(g.ball(r).len() as u128, g.ball_size(r), "{} r={r}", g.name());
            }
        }
        assert_eq!(GroupModel::zd(1).ball_size(7), 15);
        assert_eq!(GroupModel::free(2).ball_size(2), 17);
    }

    #[test]
    fn free_reduction() {
        let g = GroupModel::free(2);
        let w = g.mul_gen(&g.mul_gen(&g.identity(), 1), -1);
        assert!(g.is_identity(&w));
        let a = vec![1, 2, -1];
        assert!(g.is_identity(&g.mul(&a, &g.inverse(&a))));
        assert_eq!(g.distance(&vec![1, 2], &vec![1, -2]), 2);
    }
}
