//! Partition of unity subordinate to the group points, the smoothing map
//! ⌈f⌉ = Σ f(g)χ_g, and audits of its norm and gradient bounds.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::distance::distance_constants;
use super::net::{build_net, diameter};
use super::{copy_point, Lattice};
use crate::complex::{Complex, DistanceField, GeometryBounds, PointRef};
use crate::error::{Error, Result};
use crate::stochastic::{Elem, GroupModel};

/// χ_g(x) before normalisation: 1 inside B(g, 1/4), 0 beyond C_sup, a
/// smoothstep in between.
fn bump(d: f64, c_sup: f64) -> f64 {
    let u = ((c_sup - d) / (c_sup - 0.25)).clamp(0.0, 1.0);
    u * u * (3.0 - 2.0 * u)
}

#[derive(Clone, Debug)]
pub struct PartitionOfUnity {
    pub c_sup: f64,
    /// Largest |∇χ_g| over mesh elements, for g in the core.
    pub c_g: f64,
    /// Largest number of χ_g positive at one node.
    pub c_over: usize,
    /// Lattice indices of the elements whose χ_g are tabulated.
    pub core: Vec<usize>,
    /// Nodes within C_sup of a core element.
    pub region: Vec<bool>,
    /// Positive (element, χ) pairs at each region node.
    pub weights: Vec<Vec<(usize, f64)>>,
    /// χ_g = 1 wherever d(x, g) ≤ 1/4.
    pub plateau_ok: bool,
    /// max |Σ_g χ_g − 1| over region nodes.
    pub max_sum_error: f64,
}

impl PartitionOfUnity {
    /// min(1, ℓ/2 + 1/4) for shortest edge ℓ.
    pub fn default_support(y: &Complex) -> f64 {
        (y.min_edge_length() / 2.0 + 0.25).min(1.0)
    }

    /// Tabulate χ on the C_sup-neighbourhood of the core elements. The
    /// lattice must hold every group point within 2C_sup of the core (see
    /// [`Lattice::around`]).
    pub fn build(lat: &Lattice, core: &[usize], c_sup: f64) -> Result<PartitionOfUnity> {
        if !(c_sup > 0.25) {
            return Err(Error::Construction(format!("support radius {c_sup} must exceed 1/4")));
        }
        let n = lat.mesh.len();
        let mut region = vec![false; n];
        for &g in core {
            for (k, &d) in lat.anchor_distances(g).iter().enumerate() {
                if d < c_sup {
                    region[k] = true;
                }
            }
        }
        let cut = lat.cut_nodes();
        let mut weights = vec![Vec::new(); n];
        let mut plateau_ok = true;
        let mut max_sum_error: f64 = 0.0;
        let mut c_over = 0;
        for k in (0..n).filter(|&k| region[k]) {
            if cut[k] {
                return Err(Error::Truncation("χ support reaches the cut boundary".into()));
            }
            let raw: Vec<(usize, f64)> = (0..lat.len())
                .map(|h| (h, bump(lat.anchor_distances(h)[k], c_sup)))
                .filter(|&(_, s)| s > 0.0)
                .collect();
            let total: f64 = raw.iter().map(|&(_, s)| s).sum();
            let w: Vec<(usize, f64)> = raw.iter().map(|&(h, s)| (h, s / total)).collect();
            max_sum_error = max_sum_error.max((w.iter().map(|&(_, c)| c).sum::<f64>() - 1.0).abs());
            for &(h, c) in &w {
                if lat.anchor_distances(h)[k] <= 0.25 && (c - 1.0).abs() > 1e-12 {
                    plateau_ok = false;
                }
            }
            c_over = c_over.max(w.len());
            weights[k] = w;
        }
        let mut pu = PartitionOfUnity {
            c_sup,
            c_g: 0.0,
            c_over,
            core: core.to_vec(),
            region,
            weights,
            plateau_ok,
            max_sum_error,
        };
        for &g in core {
            let chi = pu.chi(g);
            for e in &lat.mesh.elements {
                if e.nodes().iter().any(|&i| pu.region[i]) {
                    pu.c_g = pu.c_g.max(e.gradient_magnitude(&chi));
                }
            }
        }
        Ok(pu)
    }

    /// χ_g as a node vector (zero away from the tabulated region).
    pub fn chi(&self, g: usize) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| w.iter().find(|&&(h, _)| h == g).map_or(0.0, |&(_, c)| c))
            .collect()
    }

    /// ⌈f⌉ for `f` given on the core (parallel to `self.core`), zero
    /// elsewhere on the group.
    pub fn smooth_extend(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.core.len());
        let value: HashMap<usize, f64> = self.core.iter().cloned().zip(f.iter().cloned()).collect();
        self.weights
            .iter()
            .map(|w| w.iter().map(|&(h, c)| value.get(&h).map_or(0.0, |v| v * c)).sum())
            .collect()
    }

    /// Smallest lumped measure of B(g, r) over core elements g.
    pub fn ball_mass(&self, lat: &Lattice, r: f64, strict: bool) -> f64 {
        self.core
            .iter()
            .map(|&g| {
                lat.anchor_distances(g)
                    .iter()
                    .zip(&lat.mesh.mass)
                    .filter(|&(&d, _)| if strict { d < r } else { d <= r })
                    .map(|(_, m)| m)
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// #(G ∩ B_X(e, 2C_sup)) at the first core element.
    pub fn double_support_count(&self, lat: &Lattice) -> usize {
        let e = self.core[0];
        (0..lat.len()).filter(|&h| lat.anchor_distance(e, h) < 2.0 * self.c_sup).count()
    }

    /// C_1 = μ(B(e, 1/4))^{1/p} in the lower bound C_1‖f‖ ≤ ‖⌈f⌉‖.
    pub fn norm_lower(&self, lat: &Lattice, p: f64) -> f64 {
        self.ball_mass(lat, 0.25, false).powf(1.0 / p)
    }

    /// C_2 = C_Over^{(p−1)/p}‖χ_e‖_p in the upper bound ‖⌈f⌉‖ ≤ C_2‖f‖.
    pub fn norm_upper(&self, lat: &Lattice, p: f64) -> f64 {
        (self.c_over as f64).powf((p - 1.0) / p) * lat.mesh.lp_norm(&self.chi(self.core[0]), p)
    }

    /// C_g^p μ(B(e, C_sup)) Vol_G(G ∩ B(e, 2C_sup))^p |S|^p.
    pub fn gradient_constant(&self, lat: &Lattice, p: f64) -> f64 {
        let s = lat.group().num_generators() as f64;
        self.c_g.powf(p)
            * self.ball_mass(lat, self.c_sup, true)
            * (self.double_support_count(lat) as f64).powf(p)
            * s.powf(p)
    }
}

/// ‖∇f‖_p^p on the group with |∇f(g)|² = (1/|S|)Σ_s |f(gs) − f(g)|², for
/// f supported on `support`.
pub(crate) fn group_gradient_pp(group: &GroupModel, support: &[Elem], f: &[f64], p: f64) -> f64 {
    let value: HashMap<&Elem, f64> = support.iter().zip(f.iter().cloned()).collect();
    let get = |g: &Elem| value.get(g).copied().unwrap_or(0.0);
    let mut sites: Vec<Elem> = support.to_vec();
    for g in support {
        for s in group.generators() {
            sites.push(group.mul_gen(g, s));
        }
    }
    sites.sort();
    sites.dedup();
    let ns = group.num_generators() as f64;
    sites
        .iter()
        .map(|g| {
            let sq: f64 = group.generators().iter().map(|&s| (get(&group.mul_gen(g, s)) - get(g)).powi(2)).sum::<f64>() / ns;
            sq.powf(p / 2.0)
        })
        .sum()
}

fn sample_group_functions(count: usize, len: usize, rng: &mut ChaCha8Rng) -> Vec<(String, Vec<f64>)> {
    let mut out = vec![("constant".to_string(), vec![1.0; len])];
    let mut first = vec![0.0; len];
    first[0] = 1.0;
    out.push(("indicator".to_string(), first));
    while out.len() < count {
        let f = if out.len() % 2 == 0 {
            ("noise".to_string(), (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        } else {
            ("signs".to_string(), (0..len).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect())
        };
        out.push(f);
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct NormAudit {
    pub p: f64,
    pub c1: f64,
    pub c2: f64,
    /// min and max of ‖⌈f⌉‖_p / ‖f‖_p over the samples.
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub samples: usize,
    pub pass: bool,
}

/// Two-sided bound C_1‖f‖_p ≤ ‖⌈f⌉‖_p ≤ C_2‖f‖_p on sampled f over the core.
pub fn norm_audit(lat: &Lattice, pu: &PartitionOfUnity, p: f64, samples: usize, seed: u64) -> NormAudit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (c1, c2) = (pu.norm_lower(lat, p), pu.norm_upper(lat, p));
    let mut a = NormAudit { p, c1, c2, min_ratio: f64::INFINITY, max_ratio: 0.0, samples: 0, pass: true };
    for (_, f) in sample_group_functions(samples, pu.core.len(), &mut rng) {
        let norm_g = f.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p);
        let r = lat.mesh.lp_norm(&pu.smooth_extend(&f), p) / norm_g;
        a.min_ratio = a.min_ratio.min(r);
        a.max_ratio = a.max_ratio.max(r);
        a.samples += 1;
    }
    a.pass = c1 <= a.min_ratio * (1.0 + 1e-9) && a.max_ratio <= c2 * (1.0 + 1e-9);
    a
}

#[derive(Clone, Debug, Serialize)]
pub struct GradAudit {
    pub p: f64,
    pub constant: f64,
    /// max ‖∇⌈f⌉‖_p^p / (C ‖∇f‖_p^p).
    pub worst_ratio: f64,
    pub samples: usize,
    pub pass: bool,
}

/// ‖∇⌈f⌉‖_p^p ≤ C‖∇f‖_p^p on sampled non-constant f over the core.
pub fn gradient_audit(lat: &Lattice, pu: &PartitionOfUnity, p: f64, samples: usize, seed: u64) -> GradAudit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let constant = pu.gradient_constant(lat, p);
    let support: Vec<Elem> = pu.core.iter().map(|&g| lat.orbits().elements[g].clone()).collect();
    let mut a = GradAudit { p, constant, worst_ratio: 0.0, samples: 0, pass: true };
    for (_, f) in sample_group_functions(samples, pu.core.len(), &mut rng) {
        let rhs = group_gradient_pp(lat.group(), &support, &f, p);
        if !(rhs > 0.0) {
            continue;
        }
        let lhs = lat.mesh.gradient_lp_norm(&pu.smooth_extend(&f), p).powf(p);
        a.worst_ratio = a.worst_ratio.max(lhs / (constant * rhs));
        a.samples += 1;
    }
    a.pass = a.worst_ratio <= 1.0 + 1e-9;
    a
}

/// Every comparison constant of a periodic complex, for p = 2.
#[derive(Clone, Debug, Serialize)]
pub struct TransferConstants {
    pub group: String,
    pub h: f64,
    pub c0: f64,
    pub c_xg: f64,
    pub diam_y: f64,
    pub delta: f64,
    pub centers: usize,
    pub c_ns: usize,
    pub c_sup: f64,
    pub c_g: f64,
    pub c_over: usize,
    pub c1: f64,
    pub c2: f64,
    /// Constant of the gradient bound for the smoothing map.
    pub c_grad: f64,
    /// Constant of the gradient bound for the averaging map with
    /// R = 2 diam(Y); absent when the needed truncation is too large.
    pub c_delta: Option<f64>,
    pub norm_audit: NormAudit,
    pub gradient_audit: GradAudit,
}

/// Build the net with δ = diam(Y) and the partition of unity on the unit
/// word ball, and evaluate every constant.
pub fn transfer_constants(y: &Complex, h: f64, samples: usize, seed: u64) -> Result<TransferConstants> {
    let dc = distance_constants(y)?;
    let diam_y = diameter(y)?;
    let net = build_net(y, diam_y)?;
    let group = y.deck().ok_or_else(|| Error::Invalid("fundamental domain carries no deck group".into()))?.group.clone();
    let c_sup = PartitionOfUnity::default_support(y);
    let core_elems = group.ball(1);
    let (lat, core) = Lattice::around(y, &core_elems, 2.0 * c_sup, h)?;
    let pu = PartitionOfUnity::build(&lat, &core, c_sup)?;
    let na = norm_audit(&lat, &pu, 2.0, samples, seed);
    let ga = gradient_audit(&lat, &pu, 2.0, samples, seed ^ 1);
    Ok(TransferConstants {
        group: group.name(),
        h,
        c0: dc.c0,
        c_xg: dc.c_xg,
        diam_y,
        delta: diam_y,
        centers: net.centers.len(),
        c_ns: net.c_ns,
        c_sup,
        c_g: pu.c_g,
        c_over: pu.c_over,
        c1: na.c1,
        c2: na.c2,
        c_grad: ga.constant,
        c_delta: averaging_constant(y, &net.centers, diam_y, net.delta)?,
        norm_audit: na,
        gradient_audit: ga,
    })
}

/// max_i μ(B(γ_i, R))/μ(B(γ_i, δ))² · N · overlap_R · P_0 · R² with R = 2 diam(Y).
fn averaging_constant(y: &Complex, centers: &[PointRef], diam: f64, delta: f64) -> Result<Option<f64>> {
    let r = 2.0 * diam;
    let group = &y.deck().expect("checked by caller").group;
    let cell = y.faces().iter().map(|f| f.diameter()).chain(y.edges().iter().map(|e| e.length)).fold(0.0, f64::max);
    let reach = r + diam + cell;
    let res = if y.dimension() == 1 { 1.0 } else { y.min_edge_length() / 20.0 };
    for radius in 1.. {
        if group.ball_size(radius) > MAX_ELEMENTS {
            return Ok(None);
        }
        let x = y.truncate(radius)?;
        let o = x.orbits().expect("truncation carries orbits");
        let anchor = DistanceField::new(&x, copy_point(y, &x, PointRef::Vertex(0), 0), res)?;
        let clear = (0..x.vertices().len())
            .filter(|&v| group.word_length(&o.elements[o.vertex[v].elem]) == radius)
            .all(|v| anchor.to_vertex(v) > reach);
        if !clear {
            continue;
        }
        let mut worst: f64 = 0.0;
        for &c in centers {
            let field = DistanceField::new(&x, copy_point(y, &x, c, 0), res)?;
            let big = x.ball_volume_in(&field, r, res);
            let small = x.ball_volume_in(&field, delta, res);
            worst = worst.max(big / (small * small));
        }
        // overlap of the radius-R balls around group points, sampled in Y
        let mut overlap = 0;
        for &c in centers.iter().chain(std::iter::once(&PointRef::Vertex(0))) {
            let field = DistanceField::new(&x, copy_point(y, &x, c, 0), res)?;
            let count = (0..o.elements.len())
                .filter(|&gi| field.to(copy_point(y, &x, PointRef::Vertex(0), gi)) <= r)
                .count();
            overlap = overlap.max(count);
        }
        let p0 = GeometryBounds::of(&x)?.p0;
        return Ok(Some(worst * centers.len() as f64 * overlap as f64 * p0 * r * r));
    }
    unreachable!()
}

const MAX_ELEMENTS: u128 = 400;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::library;

    fn setup(y: &Complex, radius: usize, h: f64) -> (Lattice, PartitionOfUnity) {
        let group = y.deck().unwrap().group.clone();
        let c_sup = PartitionOfUnity::default_support(y);
        let (lat, core) = Lattice::around(y, &group.ball(radius), 2.0 * c_sup, h).unwrap();
        let pu = PartitionOfUnity::build(&lat, &core, c_sup).unwrap();
        (lat, pu)
    }

    #[test]
    fn unity_on_the_line() {
        let (lat, pu) = setup(&library::z1_cell(), 2, 1.0 / 40.0);
        assert!(pu.plateau_ok && pu.max_sum_error < 1e-12);
        assert_eq!(pu.c_over, 2);
        // constant on the core is reproduced around the identity
        let ext = pu.smooth_extend(&vec![3.0; pu.core.len()]);
        let e = pu.core[0];
        for (k, &d) in lat.anchor_distances(e).iter().enumerate() {
            if d <= 1.0 {
                assert!((ext[k] - 3.0).abs() < 1e-12);
            }
        }
        // indicator of e stays within C_sup of e
        let mut ind = vec![0.0; pu.core.len()];
        ind[0] = 1.0;
        let ext = pu.smooth_extend(&ind);
        for (k, &d) in lat.anchor_distances(e).iter().enumerate() {
            if d >= pu.c_sup {
                assert_eq!(ext[k], 0.0);
            }
        }
        let na = norm_audit(&lat, &pu, 2.0, 50, 3);
        assert!(na.pass, "{na:?}");
        let ga = gradient_audit(&lat, &pu, 2.0, 100, 4);
        assert!(ga.pass, "{ga:?}");
    }

    #[test]
    fn unity_on_the_plane() {
        let (lat, pu) = setup(&library::z2_cell(), 1, 1.0 / 10.0);
        assert!(pu.plateau_ok && pu.max_sum_error < 1e-12);
        assert!(pu.c_over >= 2);
        assert!(norm_audit(&lat, &pu, 2.0, 30, 1).pass);
        assert!(gradient_audit(&lat, &pu, 2.0, 30, 2).pass);
        assert!(norm_audit(&lat, &pu, 1.5, 30, 1).pass);
    }

    #[test]
    fn constants_dump_for_the_line() {
        let c = transfer_constants(&library::z1_cell(), 1.0 / 20.0, 20, 1).unwrap();
        assert_eq!(c.centers, 1);
        assert!((c.c0 - 1.0).abs() < 1e-12 && (c.c_sup - 0.75).abs() < 1e-12);
        assert!(c.c_delta.is_some());
        assert!(c.norm_audit.pass && c.gradient_audit.pass);
    }
}
