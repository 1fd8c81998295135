//! Whitney-type covers of small balls and the chains used to propagate
//! Poincaré inequalities across them.
//!
//! A ball E = B(z, R) below the clearance of z is isometric to a union of
//! rays (graphs) or to a flat cone (2-complexes). Balls of the cover are laid
//! out in rings around z: ring k sits at distance ρ_k with radius
//! r_k = β(R − ρ_k), β = c/(1+c), c = 10⁻³/κ, so that r_B = c·d(B, ∂E)
//! holds exactly. Consecutive rings touch, which makes the ring sequence the
//! greedy packing in order of decreasing radius. The number of balls grows
//! without bound towards ∂E, so balls are addressed implicitly and the
//! construction stops once R − ρ_k < 10⁻⁶R.

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::complex::{Complex, GeometryBounds, PointRef};
use crate::error::{Error, Result};

/// Relative distance to ∂E below which no further rings are placed.
pub const CUTOFF: f64 = 1e-6;
/// Longest chain accepted before reporting an overflow.
pub const CHAIN_CAP: usize = 5_000_000;
const SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum CoverGeometry {
    /// `count` segments leaving z (graphs).
    Rays { count: usize },
    /// A flat cone of total angle `theta`; `wrap` when z is interior.
    Cone { theta: f64, wrap: bool },
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Ring {
    pub rho: f64,
    pub radius: f64,
    pub count: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct BallId {
    pub ring: usize,
    pub index: usize,
}

/// Distance from z and direction (ray index for graphs, angle for cones).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Polar {
    pub rho: f64,
    pub angle: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Ball {
    pub id: BallId,
    pub center: Polar,
    pub radius: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WhitneyCover {
    pub center: String,
    pub radius: f64,
    pub kappa: f64,
    /// 10⁻³κ⁻¹.
    pub c: f64,
    pub beta: f64,
    pub geometry: CoverGeometry,
    pub rings: Vec<Ring>,
    /// Points farther than this from z are beyond the constructed rings.
    pub reach: f64,
    pub k_bound: f64,
    pub dimension: usize,
    /// E is larger than R_0.
    pub above_r0: bool,
}

fn cone_of(x: &Complex, z: PointRef) -> Result<CoverGeometry> {
    if x.dimension() == 1 {
        return Ok(CoverGeometry::Rays {
            count: match z {
                PointRef::Vertex(v) => x.degree(v),
                _ => 2,
            },
        });
    }
    match z {
        PointRef::Face { .. } => Ok(CoverGeometry::Cone { theta: 2.0 * PI, wrap: true }),
        PointRef::Edge { edge, .. } => match x.edge_faces(edge).len() {
            1 => Ok(CoverGeometry::Cone { theta: PI, wrap: false }),
            2 => Ok(CoverGeometry::Cone { theta: 2.0 * PI, wrap: true }),
            k => Err(Error::Construction(format!("edge meets {k} faces; branching balls are not cones"))),
        },
        PointRef::Vertex(v) => {
            let faces = x.vertex_faces(v);
            let theta: f64 = faces.iter().map(|&f| x.faces()[f].angle(x.faces()[f].corner_of(v).unwrap())).sum();
            let edges = x.vertex_edges(v);
            let degs: Vec<usize> = edges.iter().map(|&e| x.edge_faces(e).len()).collect();
            if degs.iter().any(|&d| d > 2) {
                return Err(Error::Construction("vertex link branches; ball is not a cone".into()));
            }
            let ends = degs.iter().filter(|&&d| d == 1).count();
            // link is a cycle (no ends) or a path (two ends) when connected
            let link_edges = faces.len();
            let link_vertices = edges.len();
            let wrap = match ends {
                0 if link_edges == link_vertices => true,
                2 if link_edges + 1 == link_vertices => false,
                _ => return Err(Error::Construction("vertex link is not a single cycle or path".into())),
            };
            Ok(CoverGeometry::Cone { theta, wrap })
        }
    }
}

/// Build the cover of E = B(z, r).
pub fn whitney_cover(x: &Complex, z: PointRef, r: f64) -> Result<WhitneyCover> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Construction(format!("radius {r} must be positive")));
    }
    x.check_point(z)?;
    let z = x.canonical(z);
    let clear = x.clearance(z);
    if r >= clear {
        return Err(Error::Construction(format!("radius {r} reaches another cell (clearance {clear})")));
    }
    let bounds = GeometryBounds::of(x)?;
    let geometry = cone_of(x, z)?;
    let kappa = bounds.kappa;
    let c = 1e-3 / kappa;
    let beta = c / (1.0 + c);
    let mut rings = vec![Ring { rho: 0.0, radius: beta * r, count: 1 }];
    loop {
        let last = *rings.last().unwrap();
        let rho = (last.rho + last.radius + beta * r) / (1.0 + beta);
        if r - rho < CUTOFF * r {
            break;
        }
        let radius = beta * (r - rho);
        let count = match geometry {
            CoverGeometry::Rays { count } => count,
            CoverGeometry::Cone { theta, .. } => ((theta / (2.0 * (radius / rho).asin())) * (1.0 + 1e-12)).floor().max(1.0) as usize,
        };
        rings.push(Ring { rho, radius, count });
    }
    let last = rings.last().unwrap();
    Ok(WhitneyCover {
        center: x.format_point(z),
        radius: r,
        kappa,
        c,
        beta,
        geometry,
        reach: last.rho + last.radius,
        rings,
        k_bound: bounds.k_overlap,
        dimension: x.dimension(),
        above_r0: r > bounds.r0,
    })
}

impl WhitneyCover {
    pub fn ball_count(&self) -> u128 {
        self.rings.iter().map(|r| r.count as u128).sum()
    }

    pub fn central(&self) -> BallId {
        BallId { ring: 0, index: 0 }
    }

    fn angle_of(&self, ring: usize, index: usize) -> f64 {
        if ring == 0 {
            return 0.0;
        }
        let n = self.rings[ring].count as f64;
        match self.geometry {
            CoverGeometry::Rays { .. } => index as f64,
            CoverGeometry::Cone { theta, wrap: true } => index as f64 * theta / n,
            CoverGeometry::Cone { theta, wrap: false } => (index as f64 + 0.5) * theta / n,
        }
    }

    pub fn ball(&self, id: BallId) -> Ball {
        let ring = &self.rings[id.ring];
        Ball { id, center: Polar { rho: ring.rho, angle: self.angle_of(id.ring, id.index) }, radius: ring.radius }
    }

    /// Intrinsic distance inside E.
    pub fn dist(&self, a: Polar, b: Polar) -> f64 {
        match self.geometry {
            CoverGeometry::Rays { .. } => {
                if a.rho == 0.0 || b.rho == 0.0 || a.angle == b.angle {
                    (a.rho - b.rho).abs()
                } else {
                    a.rho + b.rho
                }
            }
            CoverGeometry::Cone { theta, wrap } => {
                let mut d = (a.angle - b.angle).abs();
                if wrap {
                    d = d.min(theta - d);
                }
                if d >= PI {
                    a.rho + b.rho
                } else {
                    let s = (d / 2.0).sin();
                    ((a.rho - b.rho).powi(2) + 4.0 * a.rho * b.rho * s * s).sqrt()
                }
            }
        }
    }

    /// Distance from a ball to ∂E.
    pub fn boundary_distance(&self, b: &Ball) -> f64 {
        self.radius - b.center.rho - b.radius
    }

    /// Ring whose distance from z is closest to `rho`.
    fn nearest_ring(&self, rho: f64) -> usize {
        let k = self.rings.partition_point(|r| r.rho < rho);
        if k == 0 {
            0
        } else if k == self.rings.len() || rho - self.rings[k - 1].rho < self.rings[k].rho - rho {
            k - 1
        } else {
            k
        }
    }

    /// Ball indices in `ring` whose centers are angularly near `angle`.
    fn indices_near(&self, ring: usize, angle: f64, spread: usize) -> Vec<usize> {
        let n = self.rings[ring].count;
        if ring == 0 {
            return vec![0];
        }
        match self.geometry {
            CoverGeometry::Rays { count } => {
                if self.rings[ring].rho < 4.0 * self.rings[ring].radius {
                    (0..count).collect()
                } else {
                    vec![angle as usize]
                }
            }
            CoverGeometry::Cone { theta, wrap } => {
                let pos = angle / theta * n as f64 - if wrap { 0.0 } else { 0.5 };
                let j0 = pos.round() as i64;
                let mut out = Vec::new();
                for dj in -(spread as i64)..=(spread as i64) {
                    let j = j0 + dj;
                    let j = if wrap {
                        j.rem_euclid(n as i64)
                    } else if j < 0 || j >= n as i64 {
                        continue;
                    } else {
                        j
                    };
                    if !out.contains(&(j as usize)) {
                        out.push(j as usize);
                    }
                }
                out
            }
        }
    }

    /// Balls near a point, for containment searches.
    fn candidates(&self, p: Polar) -> Vec<Ball> {
        let k = self.nearest_ring(p.rho);
        let lo = k.saturating_sub(4);
        let hi = (k + 4).min(self.rings.len() - 1);
        let mut out = Vec::new();
        for ring in lo..=hi {
            for index in self.indices_near(ring, p.angle, 3) {
                out.push(self.ball(BallId { ring, index }));
            }
        }
        if lo > 0 && p.rho < 4.0 * self.rings[0].radius {
            out.push(self.ball(self.central()));
        }
        out
    }

    /// Some ball whose double contains `p`.
    pub fn covering_ball(&self, p: Polar) -> Option<BallId> {
        self.candidates(p).into_iter().find(|b| self.dist(b.center, p) < 2.0 * b.radius).map(|b| b.id)
    }

    /// Largest s with γ(s) in the closed double of `b`, where γ is the ray
    /// from z in direction `angle`.
    fn exit_along(&self, b: &Ball, angle: f64) -> f64 {
        let r2 = 2.0 * b.radius;
        match self.geometry {
            CoverGeometry::Rays { .. } => {
                if b.center.rho == 0.0 || b.center.angle == angle {
                    b.center.rho + r2
                } else {
                    r2 - b.center.rho
                }
            }
            CoverGeometry::Cone { theta, wrap } => {
                let mut d = (b.center.angle - angle).abs();
                if wrap {
                    d = d.min(theta - d);
                }
                if d >= PI {
                    r2 - b.center.rho
                } else {
                    let s = b.center.rho * d.sin();
                    b.center.rho * d.cos() + (r2 * r2 - s * s).max(0.0).sqrt()
                }
            }
        }
    }

    /// Closed doubles intersect, up to the numeric slack.
    fn doubles_meet(&self, a: &Ball, b: &Ball) -> bool {
        self.dist(a.center, b.center) <= 2.0 * (a.radius + b.radius) + self.tol(a.radius.min(b.radius))
    }

    /// Comparison slack at scale `r`: relative SLACK plus the rounding of
    /// coordinates of size R.
    pub fn tol(&self, r: f64) -> f64 {
        SLACK * r + 16.0 * f64::EPSILON * self.radius
    }

    /// The chain from the central ball to `target`.
    pub fn chain(&self, target: BallId) -> Result<Vec<BallId>> {
        let tb = self.ball(target);
        let angle = tb.center.angle;
        let len = tb.center.rho;
        let mut chain = vec![self.central()];
        if target == self.central() {
            return Ok(chain);
        }
        loop {
            let cur = self.ball(*chain.last().unwrap());
            if self.doubles_meet(&cur, &tb) {
                chain.push(target);
                return Ok(chain);
            }
            let s = self.exit_along(&cur, angle);
            let q = Polar { rho: (s + 0.5 * self.tol(cur.radius)).min(len), angle };
            let next = self
                .candidates(q)
                .into_iter()
                .filter(|b| self.dist(b.center, q) < 2.0 * b.radius)
                .map(|b| (self.exit_along(&b, angle), b.id))
                .filter(|(e, _)| *e > s)
                .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(b.1.cmp(&a.1)));
            match next {
                Some((_, id)) => chain.push(id),
                None => {
                    return Err(Error::Construction(format!("no ball covers γ at distance {} from z", q.rho)));
                }
            }
            if chain.len() > CHAIN_CAP {
                return Err(Error::ChainOverflow(CHAIN_CAP));
            }
        }
    }

    /// A point drawn uniformly from E (with respect to its measure).
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Polar {
        match self.geometry {
            CoverGeometry::Rays { count } => Polar { rho: self.radius * rng.random::<f64>(), angle: rng.random_range(0..count) as f64 },
            CoverGeometry::Cone { theta, .. } => Polar { rho: self.radius * rng.random::<f64>().sqrt(), angle: theta * rng.random::<f64>() },
        }
    }

    pub fn random_ball<R: Rng + ?Sized>(&self, rng: &mut R) -> BallId {
        let ring = rng.random_range(0..self.rings.len());
        BallId { ring, index: rng.random_range(0..self.rings[ring].count) }
    }

    /// Number of balls B with x ∈ λB.
    pub fn overlap_at(&self, x: Polar, lambda: f64) -> usize {
        let hit = |k: usize| -> bool {
            let r = &self.rings[k];
            (r.rho - x.rho).abs() < lambda * r.radius || (r.rho + x.rho) < lambda * r.radius
        };
        let k0 = self.nearest_ring(x.rho);
        let mut total = 0;
        let mut k = k0;
        loop {
            if !hit(k) && k > k0 + 1 {
                break;
            }
            total += self.ring_overlap(k, x, lambda);
            k += 1;
            if k == self.rings.len() {
                break;
            }
        }
        let mut k = k0;
        while k > 0 {
            k -= 1;
            if !hit(k) && k + 1 < k0 {
                break;
            }
            total += self.ring_overlap(k, x, lambda);
        }
        total
    }

    fn ring_overlap(&self, k: usize, x: Polar, lambda: f64) -> usize {
        let ring = &self.rings[k];
        let reach = lambda * ring.radius;
        if k == 0 {
            return usize::from(x.rho < reach);
        }
        match self.geometry {
            CoverGeometry::Rays { .. } => (0..ring.count)
                .filter(|&j| self.dist(Polar { rho: ring.rho, angle: j as f64 }, x) < reach)
                .count(),
            CoverGeometry::Cone { theta, wrap } => {
                if x.rho + ring.rho < reach {
                    return ring.count;
                }
                if x.rho == 0.0 {
                    return 0;
                }
                let gap = reach * reach - (x.rho - ring.rho).powi(2);
                if gap <= 0.0 {
                    return 0;
                }
                let sin_half = (gap / (4.0 * x.rho * ring.rho)).sqrt();
                let half = if sin_half >= 1.0 { PI } else { 2.0 * sin_half.asin() };
                let n = ring.count as f64;
                let off = if wrap { 0.0 } else { 0.5 };
                if wrap && 2.0 * half >= theta {
                    return ring.count;
                }
                let lo = ((x.angle - half) * n / theta - off).ceil() as i64;
                let hi = ((x.angle + half) * n / theta - off).floor() as i64;
                if hi < lo {
                    return 0;
                }
                if wrap {
                    ((hi - lo + 1) as usize).min(ring.count)
                } else {
                    let lo = lo.max(0);
                    let hi = hi.min(ring.count as i64 - 1);
                    if hi < lo {
                        0
                    } else {
                        (hi - lo + 1) as usize
                    }
                }
            }
        }
    }

    /// Rows `ring,index,rho,angle,radius` for the first `limit` balls.
    pub fn to_csv(&self, limit: usize) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("ring,index,rho,angle,radius\n");
        let mut written = 0;
        'outer: for (k, r) in self.rings.iter().enumerate() {
            for j in 0..r.count {
                if written == limit {
                    break 'outer;
                }
                let b = self.ball(BallId { ring: k, index: j });
                writeln!(out, "{k},{j},{:.15e},{:.15e},{:.15e}", b.center.rho, b.center.angle, b.radius).unwrap();
                written += 1;
            }
        }
        out
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CoverAudit {
    pub balls: u128,
    pub rings: usize,
    pub disjoint_checked: usize,
    pub disjoint_failures: usize,
    pub cover_checked: usize,
    pub cover_skipped: usize,
    pub cover_failures: usize,
    pub radius_rule_worst: f64,
    pub overlap_max: usize,
    pub k_bound: f64,
    pub chains: usize,
    pub longest_chain: usize,
    pub chain_radius_failures: usize,
    pub step_ratio_worst: f64,
    pub step_ratio_bound: f64,
    pub step_failures: usize,
    pub reach_failures: usize,
}

impl CoverAudit {
    pub fn pass(&self) -> bool {
        self.disjoint_failures == 0
            && self.cover_failures == 0
            && self.radius_rule_worst <= SLACK
            && (self.overlap_max as f64) <= self.k_bound
            && self.chain_radius_failures == 0
            && self.step_failures == 0
            && self.reach_failures == 0
    }
}

/// Check properties (1)–(4) of the cover at sampled balls and points, and
/// the chain lemmas on the farthest ball plus `chains` random ones.
pub fn audit_cover<R: Rng + ?Sized>(w: &WhitneyCover, points: usize, chains: usize, rng: &mut R) -> CoverAudit {
    let mut a = CoverAudit { balls: w.ball_count(), rings: w.rings.len(), k_bound: w.k_bound, ..Default::default() };
    // (1) disjointness against every nearby ball
    let mut sample: Vec<BallId> = Vec::new();
    for ring in 0..w.rings.len().min(4) {
        for index in 0..w.rings[ring].count {
            sample.push(BallId { ring, index });
        }
    }
    for _ in 0..points {
        sample.push(w.random_ball(rng));
    }
    for &id in &sample {
        let b = w.ball(id);
        for o in w.candidates(b.center) {
            if o.id == id {
                continue;
            }
            a.disjoint_checked += 1;
            if w.dist(b.center, o.center) < b.radius + o.radius - w.tol(b.radius.min(o.radius)) {
                a.disjoint_failures += 1;
            }
        }
        // (3) radius rule
        let rule = w.c * w.boundary_distance(&b);
        a.radius_rule_worst = a.radius_rule_worst.max((b.radius - rule).abs() / b.radius);
    }
    // (2) doubled balls cover E, (4) overlap of 36κ-dilates
    for _ in 0..points {
        let p = w.random_point(rng);
        if p.rho > w.reach {
            a.cover_skipped += 1;
            continue;
        }
        a.cover_checked += 1;
        if w.covering_ball(p).is_none() {
            a.cover_failures += 1;
        }
        a.overlap_max = a.overlap_max.max(w.overlap_at(p, 36.0 * w.kappa));
    }
    // chains
    let bound = 1.0 + 1e-2 / w.kappa;
    a.step_ratio_bound = bound;
    a.step_ratio_worst = 1.0;
    let last = w.rings.len() - 1;
    let mut targets = vec![BallId { ring: last, index: 0 }];
    for _ in 0..chains {
        targets.push(w.random_ball(rng));
    }
    for t in targets {
        let chain = match w.chain(t) {
            Ok(c) => c,
            Err(_) => {
                a.step_failures += 1;
                continue;
            }
        };
        a.chains += 1;
        a.longest_chain = a.longest_chain.max(chain.len());
        let tb = w.ball(t);
        let d_gamma = w.radius - tb.center.rho;
        if d_gamma < 0.5 * w.boundary_distance(&tb) - w.tol(tb.radius) {
            a.chain_radius_failures += 1;
        }
        for pair in chain.windows(2) {
            let (b0, b1) = (w.ball(pair[0]), w.ball(pair[1]));
            let ratio = b1.radius / b0.radius;
            a.step_ratio_worst = if (ratio - 1.0).abs() > (a.step_ratio_worst - 1.0).abs() { ratio } else { a.step_ratio_worst };
            let d = w.dist(b0.center, b1.center);
            let tol = w.tol(b0.radius.min(b1.radius));
            let ok = ratio <= bound * (1.0 + SLACK)
                && ratio >= (1.0 - SLACK) / bound
                && d + b1.radius <= 6.0 * b0.radius + tol
                && d + b0.radius <= 6.0 * b1.radius + tol
                && w.doubles_meet(&b0, &b1);
            if !ok {
                a.step_failures += 1;
            }
        }
        for &m in &chain[..chain.len() - 1] {
            let mb = w.ball(m);
            if mb.radius < tb.radius / 4.0 * (1.0 - SLACK) {
                a.chain_radius_failures += 1;
            }
            if w.dist(mb.center, tb.center) + tb.radius > (1e3 * w.kappa + 9.0) * mb.radius + w.tol(tb.radius) {
                a.reach_failures += 1;
            }
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::library;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn interval_cover_is_exact_packing() {
        let x = library::interval(1.0);
        let b = GeometryBounds::of(&x).unwrap();
        let mid = x.parse_point("e1:0.5").unwrap();
        let w = whitney_cover(&x, mid, 0.4 * b.r0).unwrap();
        assert!(matches!(w.geometry, CoverGeometry::Rays { count: 2 }));
        for k in 1..w.rings.len() {
            let (p, q) = (w.rings[k - 1], w.rings[k]);
            assert!((q.rho - q.radius - (p.rho + p.radius)).abs() < 1e-12 * w.radius);
            assert!((q.radius - w.c * (w.radius - q.rho - q.radius)).abs() < 1e-12 * q.radius);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = audit_cover(&w, 1000, 3, &mut rng);
        assert!(a.pass(), "{a:?}");
        assert_eq!(w.chain(w.central()).unwrap().len(), 1);
    }

    #[test]
    fn square_vertex_and_face_covers() {
        let x = library::square_grid(2, 2);
        let b = GeometryBounds::of(&x).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for label in ["v:p1_1", "f0_0:0.5,0.5", "v:p0_0", "h0_0:0.5"] {
            let z = x.parse_point(label).unwrap();
            let w = whitney_cover(&x, z, 0.9 * b.r0).unwrap();
            let a = audit_cover(&w, 300, 2, &mut rng);
            assert!(a.pass(), "{label}: {a:?}");
        }
    }

    #[test]
    fn degenerate_radius() {
        let x = library::star(3);
        assert!(matches!(whitney_cover(&x, PointRef::Vertex(0), 0.0), Err(Error::Construction(_))));
        assert!(matches!(whitney_cover(&x, PointRef::Vertex(0), 1.5), Err(Error::Construction(_))));
    }
}
