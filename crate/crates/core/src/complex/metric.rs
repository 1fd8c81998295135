//! Intrinsic distances, ball volumes, wedges and volume doubling.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use super::{dist2, Complex, GeometryBounds, PointRef};
use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.partial_cmp(&self.0).unwrap_or(Ordering::Equal).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Boundary sample points used for 2-D geodesics: vertices plus equally
/// spaced interior points of every edge.
struct BoundaryNodes {
    /// For each face, (node id, chart position).
    face_nodes: Vec<Vec<(usize, [f64; 2])>>,
    /// Faces touching each node.
    node_faces: Vec<Vec<usize>>,
    count: usize,
}

impl BoundaryNodes {
    fn new(x: &Complex, resolution: f64) -> Self {
        let nv = x.vertices().len();
        let mut count = nv;
        let mut edge_nodes = Vec::with_capacity(x.edges().len());
        for e in x.edges() {
            let m = (e.length / resolution).ceil().max(1.0) as usize;
            let mut ids = vec![e.ends[0]];
            for _ in 1..m {
                ids.push(count);
                count += 1;
            }
            ids.push(e.ends[1]);
            edge_nodes.push(ids);
        }
        let mut node_faces = vec![Vec::new(); count];
        let mut face_nodes = Vec::with_capacity(x.faces().len());
        for (fi, f) in x.faces().iter().enumerate() {
            let mut list = Vec::new();
            for (slot, &e) in f.edges.iter().enumerate() {
                let edge = &x.edges()[e];
                let ids = &edge_nodes[e];
                let m = ids.len() - 1;
                let forward = f.vertices[slot] == edge.ends[0];
                // walk from this corner towards the next one, stopping short of it
                for step in 0..m {
                    let j = if forward { step } else { m - step };
                    let pos = f.edge_point(slot, edge.ends, edge.length * j as f64 / m as f64, edge.length);
                    list.push((ids[j], pos));
                }
            }
            for &(id, _) in &list {
                node_faces[id].push(fi);
            }
            face_nodes.push(list);
        }
        BoundaryNodes { face_nodes, node_faces, count }
    }
}

/// Distances from one source point to every point of a complex.
///
/// Graphs are handled exactly. For 2-complexes geodesics are straight in
/// each face, so paths are approximated by chords between sample points on
/// cell boundaries spaced at most `resolution` apart; the result is an upper
/// bound converging to the intrinsic distance.
pub struct DistanceField<'a> {
    x: &'a Complex,
    source: PointRef,
    vertex_dist: Vec<f64>,
    nodes: Option<BoundaryNodes>,
    node_dist: Vec<f64>,
}

impl<'a> DistanceField<'a> {
    pub fn new(x: &'a Complex, source: PointRef, resolution: f64) -> Result<Self> {
        if !(resolution > 0.0) {
            return Err(Error::Invalid("resolution must be positive".into()));
        }
        x.check_point(source)?;
        let source = x.canonical(source);
        if x.dimension() == 1 {
            let mut dist = vec![f64::INFINITY; x.vertices().len()];
            let mut heap = BinaryHeap::new();
            match source {
                PointRef::Vertex(v) => {
                    dist[v] = 0.0;
                    heap.push(HeapItem(0.0, v));
                }
                PointRef::Edge { edge, offset } => {
                    let e = &x.edges()[edge];
                    for (v, d) in [(e.ends[0], offset), (e.ends[1], e.length - offset)] {
                        if d < dist[v] {
                            dist[v] = d;
                            heap.push(HeapItem(d, v));
                        }
                    }
                }
                PointRef::Face { .. } => unreachable!("graphs have no faces"),
            }
            while let Some(HeapItem(d, v)) = heap.pop() {
                if d > dist[v] {
                    continue;
                }
                for &e in x.vertex_edges(v) {
                    let edge = &x.edges()[e];
                    let w = if edge.ends[0] == v { edge.ends[1] } else { edge.ends[0] };
                    let nd = d + edge.length;
                    if nd < dist[w] {
                        dist[w] = nd;
                        heap.push(HeapItem(nd, w));
                    }
                }
            }
            return Ok(DistanceField { x, source, vertex_dist: dist, nodes: None, node_dist: Vec::new() });
        }
        let nodes = BoundaryNodes::new(x, resolution);
        let mut dist = vec![f64::INFINITY; nodes.count];
        let mut heap = BinaryHeap::new();
        for f in x.faces_containing(source) {
            let p = x.chart_position(source, f).expect("source lies in face");
            for &(id, pos) in &nodes.face_nodes[f] {
                let d = dist2(p, pos);
                if d < dist[id] {
                    dist[id] = d;
                    heap.push(HeapItem(d, id));
                }
            }
        }
        let mut done = vec![false; nodes.count];
        while let Some(HeapItem(d, id)) = heap.pop() {
            if done[id] {
                continue;
            }
            done[id] = true;
            for &f in &nodes.node_faces[id] {
                let p = nodes.face_nodes[f].iter().find(|(j, _)| *j == id).unwrap().1;
                for &(j, pos) in &nodes.face_nodes[f] {
                    let nd = d + dist2(p, pos);
                    if nd < dist[j] {
                        dist[j] = nd;
                        heap.push(HeapItem(nd, j));
                    }
                }
            }
        }
        let vertex_dist = dist[..x.vertices().len()].to_vec();
        Ok(DistanceField { x, source, vertex_dist, nodes: Some(nodes), node_dist: dist })
    }

    pub fn source(&self) -> PointRef {
        self.source
    }

    pub fn to_vertex(&self, v: usize) -> f64 {
        self.vertex_dist[v]
    }

    pub fn to(&self, q: PointRef) -> f64 {
        let q = self.x.canonical(q);
        match &self.nodes {
            None => self.to_graph_point(q),
            Some(nodes) => {
                let mut best = f64::INFINITY;
                for f in self.x.faces_containing(q) {
                    let pq = self.x.chart_position(q, f).unwrap();
                    best = best.min(self.to_face_point(nodes, f, pq));
                }
                best
            }
        }
    }

    /// Distance to the point with chart coordinates `pos` in face `f`.
    pub fn to_face_coords(&self, f: usize, pos: [f64; 2]) -> f64 {
        let nodes = self.nodes.as_ref().expect("2-complex");
        self.to_face_point(nodes, f, pos)
    }

    fn to_face_point(&self, nodes: &BoundaryNodes, f: usize, pos: [f64; 2]) -> f64 {
        let mut best = f64::INFINITY;
        if let Some(ps) = self.x.chart_position(self.source, f) {
            best = dist2(ps, pos);
        }
        for &(id, npos) in &nodes.face_nodes[f] {
            best = best.min(self.node_dist[id] + dist2(npos, pos));
        }
        best
    }

    fn to_graph_point(&self, q: PointRef) -> f64 {
        match q {
            PointRef::Vertex(v) => self.vertex_dist[v],
            PointRef::Edge { edge, offset } => {
                let e = &self.x.edges()[edge];
                let mut d = (self.vertex_dist[e.ends[0]] + offset).min(self.vertex_dist[e.ends[1]] + e.length - offset);
                if let PointRef::Edge { edge: se, offset: so } = self.source {
                    if se == edge {
                        d = d.min((so - offset).abs());
                    }
                }
                d
            }
            PointRef::Face { .. } => unreachable!(),
        }
    }

    /// Exact measure of {s ∈ [0, L] : d(source, point at s on edge) < r}.
    fn edge_ball_measure(&self, edge: usize, r: f64) -> f64 {
        let e = &self.x.edges()[edge];
        let len = e.length;
        let mut intervals = vec![
            (0.0, (r - self.vertex_dist[e.ends[0]]).min(len)),
            ((len - (r - self.vertex_dist[e.ends[1]])).max(0.0), len),
        ];
        if let PointRef::Edge { edge: se, offset } = self.source {
            if se == edge {
                intervals.push(((offset - r).max(0.0), (offset + r).min(len)));
            }
        }
        union_length(&mut intervals)
    }
}

fn union_length(intervals: &mut [(f64, f64)]) -> f64 {
    intervals.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut total = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for &(a, b) in intervals.iter() {
        if b <= a {
            continue;
        }
        cur = match cur {
            None => Some((a, b)),
            Some((ca, cb)) if a <= cb => Some((ca, cb.max(b))),
            Some((ca, cb)) => {
                total += cb - ca;
                Some((a, b))
            }
        };
    }
    if let Some((a, b)) = cur {
        total += b - a;
    }
    total
}

/// A connected component of a small ball minus the codimension-one skeleton.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Wedge {
    /// `edge:<id>` or `face:<id>` of the top-dimensional cell holding it.
    pub cell: String,
    pub measure: f64,
    /// μ(W) / μ(unit-ball scaled to r).
    pub ratio: f64,
    pub diameter: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VolumeDoublingReport {
    pub c: f64,
    pub bound: f64,
    pub samples: usize,
    pub skipped: usize,
    pub worst_ratio: f64,
    pub worst_center: String,
    pub worst_radius: f64,
    pub pass: bool,
}

fn seg_dist(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let l2 = dx * dx + dy * dy;
    let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / l2).clamp(0.0, 1.0);
    dist2(p, [a[0] + t * dx, a[1] + t * dy])
}

impl Complex {
    /// Top-dimensional faces containing a point (empty for graphs).
    pub fn faces_containing(&self, p: PointRef) -> Vec<usize> {
        match p {
            PointRef::Vertex(v) => self.vertex_faces(v).to_vec(),
            PointRef::Edge { edge, .. } => self.edge_faces(edge).to_vec(),
            PointRef::Face { face, .. } => vec![face],
        }
    }

    /// Chart coordinates of `p` in face `f`, if `p` lies in `f`.
    pub fn chart_position(&self, p: PointRef, f: usize) -> Option<[f64; 2]> {
        let face = &self.faces()[f];
        match p {
            PointRef::Vertex(v) => face.corner_of(v).map(|i| face.chart[i]),
            PointRef::Edge { edge, offset } => {
                let slot = face.edges.iter().position(|&e| e == edge)?;
                let e = &self.edges()[edge];
                Some(face.edge_point(slot, e.ends, offset, e.length))
            }
            PointRef::Face { face: g, coords } => (g == f).then_some(coords),
        }
    }

    /// Intrinsic distance between two points; see [`DistanceField`].
    pub fn geodesic_distance(&self, p: PointRef, q: PointRef, resolution: f64) -> Result<f64> {
        self.check_point(q)?;
        let d = DistanceField::new(self, p, resolution)?.to(q);
        if d.is_finite() {
            Ok(d)
        } else {
            Err(Error::Disconnected(format!("{} to {}", self.format_point(p), self.format_point(q))))
        }
    }

    /// μ(B(center, r)): exact on graphs, adaptive quadrature on faces with
    /// cells no larger than `resolution` (and r/32) at the ball's edge.
    pub fn ball_volume(&self, center: PointRef, r: f64, resolution: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Invalid(format!("radius {r} must be positive")));
        }
        let field = DistanceField::new(self, center, resolution)?;
        Ok(self.ball_volume_in(&field, r, resolution))
    }

    pub fn ball_volume_in(&self, field: &DistanceField<'_>, r: f64, resolution: f64) -> f64 {
        if self.dimension() == 1 {
            return (0..self.edges().len()).map(|e| field.edge_ball_measure(e, r)).sum();
        }
        let fine = resolution.min(r / 32.0);
        let mut total = 0.0;
        for (fi, f) in self.faces().iter().enumerate() {
            let k = f.chart.len();
            for i in 1..k - 1 {
                let tri = [f.chart[0], f.chart[i], f.chart[i + 1]];
                total += tri_ball_measure(field, fi, tri, r, fine);
            }
        }
        total
    }

    /// Distance from `p` to the nearest cell of lower dimension than the
    /// top cells containing it that does not contain `p`.
    pub fn clearance(&self, p: PointRef) -> f64 {
        let p = self.canonical(p);
        if self.dimension() == 1 {
            return match p {
                PointRef::Vertex(v) => self.vertex_edges(v).iter().map(|&e| self.edges()[e].length).fold(f64::INFINITY, f64::min),
                PointRef::Edge { edge, offset } => offset.min(self.edges()[edge].length - offset),
                PointRef::Face { .. } => unreachable!(),
            };
        }
        let mut best = f64::INFINITY;
        for f in self.faces_containing(p) {
            let face = &self.faces()[f];
            let pos = self.chart_position(p, f).unwrap();
            let k = face.chart.len();
            for i in 0..k {
                let e = face.edges[i];
                let contains = match p {
                    PointRef::Vertex(v) => self.edges()[e].ends.contains(&v),
                    PointRef::Edge { edge, .. } => edge == e,
                    PointRef::Face { .. } => false,
                };
                if !contains {
                    best = best.min(seg_dist(pos, face.chart[i], face.chart[(i + 1) % k]));
                }
                let v = face.vertices[i];
                if !matches!(p, PointRef::Vertex(w) if w == v) {
                    best = best.min(dist2(pos, face.chart[i]));
                }
            }
        }
        best
    }

    /// Closures of the components of B(center, r) minus the codimension-one
    /// skeleton, for r below the clearance of the center.
    pub fn wedge_decomposition(&self, center: PointRef, r: f64) -> Result<Vec<Wedge>> {
        self.check_point(center)?;
        let c = self.canonical(center);
        let clear = self.clearance(c);
        if !(r > 0.0) || r >= clear {
            return Err(Error::Radius(format!("radius {r} must lie in (0, {clear})")));
        }
        let mut out = Vec::new();
        if self.dimension() == 1 {
            match c {
                PointRef::Vertex(v) => {
                    for &e in self.vertex_edges(v) {
                        out.push(Wedge { cell: format!("edge:{}", self.edges()[e].label), measure: r, ratio: 0.5, diameter: r });
                    }
                }
                PointRef::Edge { edge, .. } => {
                    out.push(Wedge { cell: format!("edge:{}", self.edges()[edge].label), measure: 2.0 * r, ratio: 1.0, diameter: 2.0 * r });
                }
                PointRef::Face { .. } => unreachable!(),
            }
            return Ok(out);
        }
        let full = PI * r * r;
        for f in self.faces_containing(c) {
            let label = format!("face:{}", self.faces()[f].label);
            let (angle, diameter) = match c {
                PointRef::Vertex(v) => {
                    let face = &self.faces()[f];
                    let a = face.angle(face.corner_of(v).unwrap());
                    let d = if a >= PI { 2.0 * r } else { r.max(2.0 * r * (a / 2.0).sin()) };
                    (a, d)
                }
                PointRef::Edge { .. } => (PI, 2.0 * r),
                PointRef::Face { .. } => (2.0 * PI, 2.0 * r),
            };
            let measure = angle * r * r / 2.0;
            out.push(Wedge { cell: label, measure, ratio: measure / full, diameter });
        }
        Ok(out)
    }

    /// A point drawn uniformly with respect to the measure of the complex.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> PointRef {
        if self.dimension() == 1 {
            let total: f64 = self.edges().iter().map(|e| e.length).sum();
            let mut u = rng.random::<f64>() * total;
            for (i, e) in self.edges().iter().enumerate() {
                if u < e.length || i + 1 == self.edges().len() {
                    return self.canonical(PointRef::Edge { edge: i, offset: u.min(e.length) });
                }
                u -= e.length;
            }
            unreachable!()
        }
        let total: f64 = self.faces().iter().map(|f| f.area()).sum();
        let mut u = rng.random::<f64>() * total;
        for (i, f) in self.faces().iter().enumerate() {
            let a = f.area();
            if u < a || i + 1 == self.faces().len() {
                // fan triangle by area, then uniform in the triangle
                let k = f.chart.len();
                let mut v = rng.random::<f64>() * a;
                for j in 1..k - 1 {
                    let tri = [f.chart[0], f.chart[j], f.chart[j + 1]];
                    let ta = tri_area(tri);
                    if v < ta || j + 2 == k {
                        let (mut s, mut t) = (rng.random::<f64>(), rng.random::<f64>());
                        if s + t > 1.0 {
                            s = 1.0 - s;
                            t = 1.0 - t;
                        }
                        let p = [
                            tri[0][0] + s * (tri[1][0] - tri[0][0]) + t * (tri[2][0] - tri[0][0]),
                            tri[0][1] + s * (tri[1][1] - tri[0][1]) + t * (tri[2][1] - tri[0][1]),
                        ];
                        return self.canonical(PointRef::Face { face: i, coords: p });
                    }
                    v -= ta;
                }
            }
            u -= a;
        }
        unreachable!()
    }

    /// Sample centers and radii and test μ(B(x, c r)) ≤ M c^N μ(B(x, r)).
    /// Radii are drawn in (0, ℓ/c]; samples with c r > ℓ are counted as skipped.
    pub fn check_volume_doubling<R: Rng + ?Sized>(
        &self,
        samples: usize,
        c: f64,
        radii: Option<&[f64]>,
        resolution: f64,
        rng: &mut R,
    ) -> Result<VolumeDoublingReport> {
        if !(c > 1.0) {
            return Err(Error::Invalid(format!("dilation {c} must exceed 1")));
        }
        let b = GeometryBounds::of(self)?;
        let bound = b.m as f64 * c.powf(b.growth_exponent());
        let mut report = VolumeDoublingReport {
            c,
            bound,
            samples: 0,
            skipped: 0,
            worst_ratio: 0.0,
            worst_center: String::new(),
            worst_radius: 0.0,
            pass: true,
        };
        for i in 0..samples {
            let p = self.random_point(rng);
            let r = match radii {
                Some(rs) => rs[i % rs.len()],
                None => rng.random::<f64>().max(1e-3) * b.ell / c,
            };
            if c * r > b.ell {
                report.skipped += 1;
                continue;
            }
            let field = DistanceField::new(self, p, resolution)?;
            let small = self.ball_volume_in(&field, r, resolution);
            let large = self.ball_volume_in(&field, c * r, resolution);
            let ratio = large / small;
            report.samples += 1;
            if ratio > report.worst_ratio {
                report.worst_ratio = ratio;
                report.worst_center = self.format_point(p);
                report.worst_radius = r;
            }
        }
        report.pass = report.worst_ratio <= bound * (1.0 + 1e-9);
        Ok(report)
    }
}

fn tri_area(t: [[f64; 2]; 3]) -> f64 {
    0.5 * ((t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (t[1][1] - t[0][1])).abs()
}

fn tri_ball_measure(field: &DistanceField<'_>, f: usize, t: [[f64; 2]; 3], r: f64, fine: f64) -> f64 {
    let c = [(t[0][0] + t[1][0] + t[2][0]) / 3.0, (t[0][1] + t[1][1] + t[2][1]) / 3.0];
    let reach = t.iter().map(|p| dist2(*p, c)).fold(0.0, f64::max);
    let d = field.to_face_coords(f, c);
    if d + reach < r {
        return tri_area(t);
    }
    if d - reach >= r {
        return 0.0;
    }
    if reach <= fine {
        return if d < r { tri_area(t) } else { 0.0 };
    }
    let m = |a: [f64; 2], b: [f64; 2]| [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
    let (a, b, cc) = (t[0], t[1], t[2]);
    let (ab, bc, ca) = (m(a, b), m(b, cc), m(cc, a));
    tri_ball_measure(field, f, [a, ab, ca], r, fine)
        + tri_ball_measure(field, f, [ab, b, bc], r, fine)
        + tri_ball_measure(field, f, [ca, bc, cc], r, fine)
        + tri_ball_measure(field, f, [ab, bc, ca], r, fine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::library;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_edge_and_star_distances() {
        let x = library::interval(1.0);
        assert_eq!(x.geodesic_distance(PointRef::Vertex(0), PointRef::Vertex(1), 0.1).unwrap(), 1.0);
        let s = library::star(3);
        let t1 = s.parse_point("v:t1").unwrap();
        let t2 = s.parse_point("v:t2").unwrap();
        assert!((s.geodesic_distance(t1, t2, 0.1).unwrap() - 2.0).abs() < 1e-15);
        let a = s.parse_point("e1:0.25").unwrap();
        let b = s.parse_point("e1:0.75").unwrap();
        assert!((s.geodesic_distance(a, b, 0.1).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn square_diagonal() {
        let x = library::unit_square();
        let d = x.geodesic_distance(PointRef::Vertex(0), PointRef::Vertex(2), 1.0 / 64.0).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 0.02 * 2f64.sqrt());
        // across faces of a grid
        let g = library::square_grid(3, 1);
        let p = PointRef::Face { face: 0, coords: [0.5, 0.2] };
        let q = PointRef::Face { face: 2, coords: [2.5, 0.7] };
        let d = g.geodesic_distance(p, q, 1.0 / 64.0).unwrap();
        let exact = (4.0f64 + 0.25).sqrt();
        assert!(d >= exact - 1e-12 && d < exact + 0.01, "{d} {exact}");
    }

    #[test]
    fn disconnected_detected() {
        let text = r#"{"dimension":1,"vertices":["a","b","c","d"],
            "edges":[{"id":"e1","ends":["a","b"],"length":1},{"id":"e2","ends":["c","d"],"length":1}]}"#;
        let x = Complex::from_json(text).unwrap();
        assert!(matches!(x.geodesic_distance(PointRef::Vertex(0), PointRef::Vertex(3), 0.1), Err(Error::Disconnected(_))));
    }

    #[test]
    fn graph_ball_volumes() {
        let x = library::interval(1.0);
        let p = PointRef::Edge { edge: 0, offset: 0.5 };
        assert!((x.ball_volume(p, 0.2, 0.1).unwrap() - 0.4).abs() < 1e-15);
        let s = library::star(3);
        assert!((s.ball_volume(PointRef::Vertex(0), 0.5, 0.1).unwrap() - 1.5).abs() < 1e-15);
        // circle: ball of radius 0.3 has length 0.6, radius 0.6 is everything
        let c = library::circle();
        let q = PointRef::Edge { edge: 1, offset: 0.1 };
        assert!((c.ball_volume(q, 0.3, 0.1).unwrap() - 0.6).abs() < 1e-14);
        assert!((c.ball_volume(q, 0.6, 0.1).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn disk_volume() {
        let x = library::unit_square();
        let p = PointRef::Face { face: 0, coords: [0.5, 0.5] };
        let v = x.ball_volume(p, 0.1, 1.0 / 32.0).unwrap();
        assert!((v - PI * 0.01).abs() < 0.01 * PI * 0.01, "{v}");
        let v = x.ball_volume(PointRef::Vertex(0), 0.5, 1.0 / 64.0).unwrap();
        assert!((v - PI * 0.25 / 4.0).abs() < 0.01 * v, "{v}");
    }

    #[test]
    fn wedges() {
        let s = library::star(3);
        let w = s.wedge_decomposition(PointRef::Vertex(0), 0.5).unwrap();
        assert_eq!(w.len(), 3);
        assert!(w.iter().all(|w| (w.measure - 0.5).abs() < 1e-15));
        let g = library::square_grid(2, 2);
        let c = g.parse_point("v:p1_1").unwrap();
        let w = g.wedge_decomposition(c, 0.3).unwrap();
        assert_eq!(w.len(), 4);
        assert!(w.iter().all(|w| (w.ratio - 0.25).abs() < 1e-12));
        let total: f64 = w.iter().map(|w| w.measure).sum();
        let vol = g.ball_volume(c, 0.3, 1.0 / 32.0).unwrap();
        assert!((total - vol).abs() < 0.01 * vol);
        let sq = library::unit_square();
        let p = PointRef::Face { face: 0, coords: [0.5, 0.5] };
        assert_eq!(sq.wedge_decomposition(p, 0.2).unwrap().len(), 1);
        assert!(matches!(sq.wedge_decomposition(p, 0.6), Err(Error::Radius(_))));
    }

    #[test]
    fn doubling_on_grid_and_graph() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = library::square_grid(2, 2);
        let r = g.check_volume_doubling(20, 2.0, None, 1.0 / 16.0, &mut rng).unwrap();
        assert!(r.pass && r.worst_ratio <= 16.0, "{r:?}");
        let s = library::square_grid(2, 2).skeleton(1).unwrap();
        let r = s.check_volume_doubling(100, 2.0, None, 0.1, &mut rng).unwrap();
        assert!(r.pass && r.worst_ratio <= 8.0, "{r:?}");
        let r = s.check_volume_doubling(10, 2.0, Some(&[0.8]), 0.1, &mut rng).unwrap();
        assert_eq!(r.skipped, 10);
    }
}
