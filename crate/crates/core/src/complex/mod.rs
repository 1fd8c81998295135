//! Euclidean polyhedral complexes of dimension one and two: cells, gluing,
//! admissibility checks, points, and the deck-group truncation.

mod bounds;
pub mod library;
mod metric;
mod periodic;
pub mod spec;

use std::collections::{BTreeMap, HashMap};

pub use bounds::GeometryBounds;
pub use metric::{DistanceField, VolumeDoublingReport, Wedge};
pub use periodic::{Orbit, OrbitLabels};
pub use spec::{ComplexSpec, EdgeSpec, FaceSpec, GlueSpec, GroupSpec};

use crate::error::{Error, Result};
use crate::stochastic::group::GroupModel;

const LENGTH_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub label: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub label: String,
    pub ends: [usize; 2],
    pub length: f64,
}

/// A convex planar polygon. `edges[i]` joins `vertices[i]` and
/// `vertices[i + 1]` (cyclically); `chart` is counter-clockwise.
#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    pub label: String,
    pub vertices: Vec<usize>,
    pub chart: Vec<[f64; 2]>,
    pub edges: Vec<usize>,
}

impl Face {
    pub fn area(&self) -> f64 {
        polygon_area(&self.chart)
    }

    /// Interior angle at corner `i`.
    pub fn angle(&self, i: usize) -> f64 {
        let k = self.chart.len();
        let p = self.chart[i];
        let a = self.chart[(i + k - 1) % k];
        let b = self.chart[(i + 1) % k];
        let u = [a[0] - p[0], a[1] - p[1]];
        let v = [b[0] - p[0], b[1] - p[1]];
        let c = (u[0] * v[0] + u[1] * v[1]) / (norm(u) * norm(v));
        c.clamp(-1.0, 1.0).acos()
    }

    pub fn corner_of(&self, v: usize) -> Option<usize> {
        self.vertices.iter().position(|&w| w == v)
    }

    /// Chart position of the point at arclength `s` along edge slot `i`,
    /// measured from the edge's first endpoint `ends[0]`.
    pub fn edge_point(&self, i: usize, ends: [usize; 2], s: f64, len: f64) -> [f64; 2] {
        let k = self.chart.len();
        let (a, b) = if self.vertices[i] == ends[0] {
            (self.chart[i], self.chart[(i + 1) % k])
        } else {
            (self.chart[(i + 1) % k], self.chart[i])
        };
        let u = s / len;
        [a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1])]
    }

    pub fn contains(&self, p: [f64; 2], tol: f64) -> bool {
        let k = self.chart.len();
        (0..k).all(|i| cross(self.chart[i], self.chart[(i + 1) % k], p) >= -tol)
    }

    pub fn centroid(&self) -> [f64; 2] {
        let k = self.chart.len() as f64;
        let (x, y) = self.chart.iter().fold((0.0, 0.0), |(x, y), p| (x + p[0], y + p[1]));
        [x / k, y / k]
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for a in &self.chart {
            for b in &self.chart {
                d = d.max(dist2(*a, *b));
            }
        }
        d
    }
}

pub(crate) fn norm(u: [f64; 2]) -> f64 {
    (u[0] * u[0] + u[1] * u[1]).sqrt()
}

pub(crate) fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    norm([a[0] - b[0], a[1] - b[1]])
}

fn cross(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
}

fn polygon_area(chart: &[[f64; 2]]) -> f64 {
    let k = chart.len();
    0.5 * (0..k)
        .map(|i| {
            let (a, b) = (chart[i], chart[(i + 1) % k]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
}

/// Gluing data carried by a fundamental domain.
#[derive(Clone, Debug, PartialEq)]
pub struct Deck {
    pub group: GroupModel,
    pub rules: Vec<GlueRule>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellRef {
    Vertex(usize),
    Edge(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GlueRule {
    pub from: CellRef,
    pub generator: i32,
    pub to: CellRef,
}

/// A validated complex.
#[derive(Clone, Debug)]
pub struct Complex {
    dimension: usize,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    faces: Vec<Face>,
    vertex_edges: Vec<Vec<usize>>,
    edge_faces: Vec<Vec<usize>>,
    vertex_faces: Vec<Vec<usize>>,
    deck: Option<Deck>,
    orbits: Option<OrbitLabels>,
}

/// A point of a complex. Edge offsets are measured from `ends[0]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PointRef {
    Vertex(usize),
    Edge { edge: usize, offset: f64 },
    Face { face: usize, coords: [f64; 2] },
}

impl Complex {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn vertex_edges(&self, v: usize) -> &[usize] {
        &self.vertex_edges[v]
    }

    pub fn edge_faces(&self, e: usize) -> &[usize] {
        &self.edge_faces[e]
    }

    pub fn vertex_faces(&self, v: usize) -> &[usize] {
        &self.vertex_faces[v]
    }

    pub fn deck(&self) -> Option<&Deck> {
        self.deck.as_ref()
    }

    pub fn orbits(&self) -> Option<&OrbitLabels> {
        self.orbits.as_ref()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.vertex_edges[v].len()
    }

    pub fn vertex_by_label(&self, label: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.label == label)
    }

    pub fn edge_by_label(&self, label: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.label == label)
    }

    pub fn face_by_label(&self, label: &str) -> Option<usize> {
        self.faces.iter().position(|f| f.label == label)
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.vertex_edges[a]
            .iter()
            .copied()
            .find(|&e| { let [x, y] = self.edges[e].ends; (x == a && y == b) || (x == b && y == a) })
    }

    pub fn min_edge_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(f64::INFINITY, f64::min)
    }

    pub fn total_measure(&self) -> f64 {
        match self.dimension {
            1 => self.edges.iter().map(|e| e.length).sum(),
            _ => self.faces.iter().map(|f| f.area()).sum(),
        }
    }

    /// Build and validate from a parsed document.
    pub fn from_spec(spec: &ComplexSpec) -> Result<Complex> {
        let mut vindex = HashMap::new();
        let mut vertices = Vec::new();
        for label in &spec.vertices {
            if vindex.insert(label.clone(), vertices.len()).is_some() {
                return Err(Error::Parse(format!("duplicate vertex id `{label}`")));
            }
            vertices.push(Vertex { label: label.clone() });
        }
        let lookup_v = |l: &str| vindex.get(l).copied().ok_or_else(|| Error::Parse(format!("unknown vertex `{l}`")));
        let mut eindex = HashMap::new();
        let mut edges = Vec::new();
        for e in &spec.edges {
            let ends = [lookup_v(&e.ends[0])?, lookup_v(&e.ends[1])?];
            if eindex.insert(e.id.clone(), edges.len()).is_some() {
                return Err(Error::Parse(format!("duplicate edge id `{}`", e.id)));
            }
            edges.push(Edge { label: e.id.clone(), ends, length: e.length });
        }
        let mut faces = Vec::new();
        let mut findex = HashMap::new();
        for f in &spec.faces {
            let vs = f.vertices.iter().map(|l| lookup_v(l)).collect::<Result<Vec<_>>>()?;
            if vs.len() != f.chart.len() {
                return Err(Error::Parse(format!("face `{}`: chart and vertex cycle differ in length", f.id)));
            }
            let explicit = match &f.edges {
                Some(ids) => Some(
                    ids.iter()
                        .map(|l| eindex.get(l).copied().ok_or_else(|| Error::Parse(format!("unknown edge `{l}`"))))
                        .collect::<Result<Vec<_>>>()?,
                ),
                None => None,
            };
            if findex.insert(f.id.clone(), faces.len()).is_some() {
                return Err(Error::Parse(format!("duplicate face id `{}`", f.id)));
            }
            faces.push((f.id.clone(), vs, f.chart.clone(), explicit));
        }
        let deck = match &spec.group {
            None => None,
            Some(g) => {
                let group = match (g.kind.as_str(), g.d, g.rank) {
                    ("zd", Some(d), _) if d >= 1 => GroupModel::zd(d),
                    ("free", _, Some(k)) if k >= 1 => GroupModel::free(k),
                    _ => return Err(Error::Parse(format!("bad group declaration `{}`", g.kind))),
                };
                let cell = |l: &str| -> Result<CellRef> {
                    if let Some(&v) = vindex.get(l) {
                        Ok(CellRef::Vertex(v))
                    } else if let Some(&e) = eindex.get(l) {
                        Ok(CellRef::Edge(e))
                    } else {
                        Err(Error::Parse(format!("gluing references unknown cell `{l}`")))
                    }
                };
                let mut rules = Vec::new();
                for r in &g.gluing {
                    if r.generator == 0 || r.generator.unsigned_abs() as usize > group.rank() {
                        return Err(Error::Parse(format!("generator {} out of range", r.generator)));
                    }
                    rules.push(GlueRule { from: cell(&r.from)?, generator: r.generator, to: cell(&r.to)? });
                }
                Some(Deck { group, rules })
            }
        };
        Complex::assemble(spec.dimension, vertices, edges, faces, deck)
    }

    pub fn from_json(text: &str) -> Result<Complex> {
        Complex::from_spec(&ComplexSpec::from_json(text)?)
    }

    pub(crate) fn assemble(
        dimension: usize,
        vertices: Vec<Vertex>,
        edges: Vec<Edge>,
        raw_faces: Vec<(String, Vec<usize>, Vec<[f64; 2]>, Option<Vec<usize>>)>,
        deck: Option<Deck>,
    ) -> Result<Complex> {
        if !(1..=2).contains(&dimension) {
            return Err(Error::Admissibility(format!(
                "dimension {dimension} complexes are not supported (use GeometryBounds::new for constants)"
            )));
        }
        if vertices.is_empty() {
            return Err(Error::Admissibility("no vertices".into()));
        }
        let nv = vertices.len();
        let mut vertex_edges = vec![Vec::new(); nv];
        let mut pairs = BTreeMap::new();
        for (i, e) in edges.iter().enumerate() {
            if !(e.length.is_finite() && e.length >= 0.0) {
                return Err(Error::Parse(format!("edge `{}` has invalid length", e.label)));
            }
            if e.ends[0] == e.ends[1] {
                return Err(Error::Admissibility(format!("edge `{}` is a loop", e.label)));
            }
            let key = (e.ends[0].min(e.ends[1]), e.ends[0].max(e.ends[1]));
            if let Some(j) = pairs.insert(key, i) {
                return Err(Error::Admissibility(format!(
                    "edges `{}` and `{}` share both endpoints",
                    edges[j].label, e.label
                )));
            }
            vertex_edges[e.ends[0]].push(i);
            vertex_edges[e.ends[1]].push(i);
        }
        if dimension == 1 && !raw_faces.is_empty() {
            return Err(Error::Admissibility("a 1-complex cannot carry faces".into()));
        }
        let mut faces = Vec::new();
        let mut edge_faces = vec![Vec::new(); edges.len()];
        let mut vertex_faces = vec![Vec::new(); nv];
        for (label, mut vs, mut chart, explicit) in raw_faces {
            let k = vs.len();
            if k < 3 {
                return Err(Error::Parse(format!("face `{label}` has fewer than three corners")));
            }
            let area = polygon_area(&chart);
            if area.abs() < 1e-14 {
                return Err(Error::Parse(format!("face `{label}` is degenerate")));
            }
            let mut explicit = explicit;
            if area < 0.0 {
                vs.reverse();
                chart.reverse();
                // edge i joined corners i, i+1; after reversal slot i joins (k-1-i-1, k-1-i)
                if let Some(ex) = explicit.as_mut() {
                    let old = ex.clone();
                    for i in 0..k {
                        ex[i] = old[(2 * k - 2 - i) % k];
                    }
                }
            }
            for i in 0..k {
                let (a, b, c) = (chart[i], chart[(i + 1) % k], chart[(i + 2) % k]);
                if cross(a, b, c) <= 1e-12 {
                    return Err(Error::Parse(format!("face `{label}` is not strictly convex")));
                }
            }
            let mut fedges = Vec::with_capacity(k);
            for i in 0..k {
                let (a, b) = (vs[i], vs[(i + 1) % k]);
                let key = (a.min(b), a.max(b));
                let e = *pairs
                    .get(&key)
                    .ok_or_else(|| Error::Parse(format!("face `{label}`: no edge between consecutive corners")))?;
                if let Some(ex) = &explicit {
                    if ex.len() != k || ex[i] != e {
                        return Err(Error::Parse(format!("face `{label}`: boundary edge list disagrees with cycle")));
                    }
                }
                let chart_len = dist2(chart[i], chart[(i + 1) % k]);
                let len = edges[e].length;
                if (chart_len - len).abs() > LENGTH_TOL * len.max(1.0) {
                    return Err(Error::Gluing(format!(
                        "edge `{}` has length {len} but chart length {chart_len} in face `{label}`",
                        edges[e].label
                    )));
                }
                fedges.push(e);
            }
            let id = faces.len();
            for &e in &fedges {
                if edge_faces[e].contains(&id) {
                    return Err(Error::Admissibility(format!("face `{label}` uses an edge twice")));
                }
                edge_faces[e].push(id);
            }
            for &v in &vs {
                if vertex_faces[v].contains(&id) {
                    return Err(Error::Admissibility(format!("face `{label}` repeats a vertex")));
                }
                vertex_faces[v].push(id);
            }
            faces.push(Face { label, vertices: vs, chart, edges: fedges });
        }
        let complex = Complex {
            dimension,
            vertices,
            edges,
            faces,
            vertex_edges,
            edge_faces,
            vertex_faces,
            deck,
            orbits: None,
        };
        complex.check_admissible()?;
        Ok(complex)
    }

    fn check_admissible(&self) -> Result<()> {
        for (v, es) in self.vertex_edges.iter().enumerate() {
            if es.is_empty() {
                return Err(Error::Admissibility(format!("vertex `{}` is isolated", self.vertices[v].label)));
            }
        }
        if self.dimension == 2 {
            for (e, fs) in self.edge_faces.iter().enumerate() {
                if fs.is_empty() {
                    return Err(Error::Admissibility(format!(
                        "edge `{}` lies in no face (not dimensionally homogeneous)",
                        self.edges[e].label
                    )));
                }
            }
            // Two faces may share at most one edge.
            let mut shared: HashMap<(usize, usize), usize> = HashMap::new();
            for fs in &self.edge_faces {
                for i in 0..fs.len() {
                    for j in i + 1..fs.len() {
                        let c = shared.entry((fs[i].min(fs[j]), fs[i].max(fs[j]))).or_insert(0);
                        *c += 1;
                        if *c > 1 {
                            return Err(Error::Admissibility(format!(
                                "faces `{}` and `{}` meet in more than one edge",
                                self.faces[fs[i]].label, self.faces[fs[j]].label
                            )));
                        }
                    }
                }
            }
            // Removing a vertex must not disconnect its neighbourhood: faces
            // around each vertex are linked through shared edges at that vertex.
            for v in 0..self.vertices.len() {
                let fs = &self.vertex_faces[v];
                if fs.len() <= 1 {
                    continue;
                }
                let mut comp: Vec<usize> = (0..fs.len()).collect();
                fn find(c: &mut [usize], i: usize) -> usize {
                    let mut r = i;
                    while c[r] != r {
                        r = c[r];
                    }
                    c[i] = r;
                    r
                }
                for &e in &self.vertex_edges[v] {
                    let ef = &self.edge_faces[e];
                    for w in ef.windows(2) {
                        let a = fs.iter().position(|&f| f == w[0]).unwrap();
                        let b = fs.iter().position(|&f| f == w[1]).unwrap();
                        let (ra, rb) = (find(&mut comp, a), find(&mut comp, b));
                        comp[ra] = rb;
                    }
                }
                let root = find(&mut comp, 0);
                if (1..fs.len()).any(|i| find(&mut comp, i) != root) {
                    return Err(Error::Admissibility(format!(
                        "vertex `{}` is a pinch point (not chainable)",
                        self.vertices[v].label
                    )));
                }
            }
        }
        Ok(())
    }

    /// The k-skeleton as a complex of dimension k. The 0-skeleton has no
    /// complex structure here, so it is returned as its vertex list instead
    /// via [`Complex::vertex_skeleton`].
    pub fn skeleton(&self, k: usize) -> Result<Complex> {
        if k == 0 || k > self.dimension {
            return Err(Error::Range(format!("skeleton dimension {k} not in 1..={}", self.dimension)));
        }
        if k == self.dimension {
            return Ok(self.clone());
        }
        let mut sk = Complex::assemble(1, self.vertices.clone(), self.edges.clone(), Vec::new(), None)?;
        sk.orbits = self.orbits.as_ref().map(|o| o.without_faces());
        Ok(sk)
    }

    /// The 0-skeleton: the vertex set, as points.
    pub fn vertex_skeleton(&self) -> Vec<PointRef> {
        (0..self.vertices.len()).map(PointRef::Vertex).collect()
    }

    /// Connected components of the 1-skeleton, as a vertex labelling.
    pub fn components(&self) -> Vec<usize> {
        let n = self.vertices.len();
        let mut comp = vec![usize::MAX; n];
        let mut next = 0;
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            let mut stack = vec![s];
            comp[s] = next;
            while let Some(v) = stack.pop() {
                for &e in &self.vertex_edges[v] {
                    let [a, b] = self.edges[e].ends;
                    let w = if a == v { b } else { a };
                    if comp[w] == usize::MAX {
                        comp[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    /// Replace a point on a shared boundary by the lowest-dimensional cell
    /// containing it (vertex, then edge); ties go to the lowest cell id.
    pub fn canonical(&self, p: PointRef) -> PointRef {
        const EPS: f64 = 1e-12;
        match p {
            PointRef::Vertex(_) => p,
            PointRef::Edge { edge, offset } => {
                let e = &self.edges[edge];
                if offset <= EPS * e.length {
                    PointRef::Vertex(e.ends[0])
                } else if offset >= e.length * (1.0 - EPS) {
                    PointRef::Vertex(e.ends[1])
                } else {
                    p
                }
            }
            PointRef::Face { face, coords } => {
                let f = &self.faces[face];
                let k = f.chart.len();
                for i in 0..k {
                    if dist2(coords, f.chart[i]) <= EPS {
                        return PointRef::Vertex(f.vertices[i]);
                    }
                }
                for i in 0..k {
                    let (a, b) = (f.chart[i], f.chart[(i + 1) % k]);
                    let len = dist2(a, b);
                    if cross(a, b, coords).abs() / len <= EPS {
                        let e = f.edges[i];
                        let from_first = if self.edges[e].ends[0] == f.vertices[i] { a } else { b };
                        return self.canonical(PointRef::Edge { edge: e, offset: dist2(from_first, coords) });
                    }
                }
                p
            }
        }
    }

    /// Validate that a point lies in its named cell.
    pub fn check_point(&self, p: PointRef) -> Result<()> {
        match p {
            PointRef::Vertex(v) if v < self.vertices.len() => Ok(()),
            PointRef::Edge { edge, offset } if edge < self.edges.len() => {
                let len = self.edges[edge].length;
                if (-1e-12..=len * (1.0 + 1e-12)).contains(&offset) {
                    Ok(())
                } else {
                    Err(Error::Invalid(format!("offset {offset} outside edge of length {len}")))
                }
            }
            PointRef::Face { face, coords } if face < self.faces.len() => {
                if self.faces[face].contains(coords, 1e-12) {
                    Ok(())
                } else {
                    Err(Error::Invalid(format!("coordinates {coords:?} outside face")))
                }
            }
            _ => Err(Error::Invalid(format!("point {p:?} references a missing cell"))),
        }
    }

    /// Parse `v:<label>`, `<edge>:<offset>` or `<face>:<x>,<y>`.
    pub fn parse_point(&self, text: &str) -> Result<PointRef> {
        let (head, tail) = text
            .split_once(':')
            .ok_or_else(|| Error::Invalid(format!("point `{text}` must look like v:<id>, <edge>:<s> or <face>:<x>,<y>")))?;
        let p = if head == "v" {
            PointRef::Vertex(self.vertex_by_label(tail).ok_or_else(|| Error::Invalid(format!("unknown vertex `{tail}`")))?)
        } else if let Some(e) = self.edge_by_label(head) {
            let offset: f64 = tail.parse().map_err(|_| Error::Invalid(format!("bad offset `{tail}`")))?;
            PointRef::Edge { edge: e, offset }
        } else if let Some(f) = self.face_by_label(head) {
            let xy: Vec<f64> = tail
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Invalid(format!("bad coordinates `{tail}`")))?;
            if xy.len() != 2 {
                return Err(Error::Invalid(format!("bad coordinates `{tail}`")));
            }
            PointRef::Face { face: f, coords: [xy[0], xy[1]] }
        } else {
            return Err(Error::Invalid(format!("unknown cell `{head}`")));
        };
        self.check_point(p)?;
        Ok(self.canonical(p))
    }

    pub fn format_point(&self, p: PointRef) -> String {
        match p {
            PointRef::Vertex(v) => format!("v:{}", self.vertices[v].label),
            PointRef::Edge { edge, offset } => format!("{}:{}", self.edges[edge].label, offset),
            PointRef::Face { face, coords } => format!("{}:{},{}", self.faces[face].label, coords[0], coords[1]),
        }
    }

    /// Export back to the document format (gluing rules included).
    pub fn to_spec(&self) -> ComplexSpec {
        let vl = |v: usize| self.vertices[v].label.clone();
        ComplexSpec {
            schema: spec::SCHEMA.to_string(),
            dimension: self.dimension,
            vertices: self.vertices.iter().map(|v| v.label.clone()).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeSpec { id: e.label.clone(), ends: [vl(e.ends[0]), vl(e.ends[1])], length: e.length })
                .collect(),
            faces: self
                .faces
                .iter()
                .map(|f| FaceSpec {
                    id: f.label.clone(),
                    vertices: f.vertices.iter().map(|&v| vl(v)).collect(),
                    chart: f.chart.clone(),
                    edges: None,
                })
                .collect(),
            group: self.deck.as_ref().map(|d| {
                let cl = |c: CellRef| match c {
                    CellRef::Vertex(v) => vl(v),
                    CellRef::Edge(e) => self.edges[e].label.clone(),
                };
                let (kind, dd, rank) = match d.group.kind {
                    crate::stochastic::group::GroupKind::Zd { d } => ("zd", Some(d), None),
                    crate::stochastic::group::GroupKind::Free { rank } => ("free", None, Some(rank)),
                };
                GroupSpec {
                    kind: kind.to_string(),
                    d: dd,
                    rank,
                    gluing: d
                        .rules
                        .iter()
                        .map(|r| GlueSpec { from: cl(r.from), generator: r.generator, to: cl(r.to) })
                        .collect(),
                }
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::library;
    use super::*;

    #[test]
    fn unit_square_is_valid() {
        let x = library::unit_square();
        assert_eq!(x.dimension(), 2);
        assert_eq!((x.vertices().len(), x.edges().len(), x.faces().len()), (4, 4, 1));
    }

    #[test]
    fn l_complex_with_free_group() {
        let y = library::l_complex();
        assert_eq!(y.faces().len(), 3);
        assert_eq!(y.deck().unwrap().group, GroupModel::free(2));
    }

    #[test]
    fn bigon_rejected() {
        let text = r#"{"dimension":1,"vertices":["a","b"],
            "edges":[{"id":"e0","ends":["a","b"],"length":0.5},{"id":"e1","ends":["b","a"],"length":0.5}]}"#;
        assert!(matches!(Complex::from_json(text), Err(Error::Admissibility(_))));
    }

    #[test]
    fn chart_mismatch_is_gluing_error() {
        let text = r#"{"dimension":2,"vertices":["a","b","c"],
            "edges":[{"id":"ab","ends":["a","b"],"length":1.0},{"id":"bc","ends":["b","c"],"length":1.0},
                     {"id":"ca","ends":["c","a"],"length":1.0}],
            "faces":[{"id":"f","vertices":["a","b","c"],"chart":[[0,0],[1,0],[0,1]]}]}"#;
        assert!(matches!(Complex::from_json(text), Err(Error::Gluing(_))));
    }

    #[test]
    fn malformed_is_parse_error() {
        assert!(matches!(Complex::from_json("{\"dimension\":"), Err(Error::Parse(_))));
        assert!(matches!(Complex::from_json(r#"{"dimension":1,"vertices":["a"],"edges":[{"id":"e","ends":["a","z"],"length":1}]}"#), Err(Error::Parse(_))));
    }

    #[test]
    fn pinch_point_rejected() {
        // two triangles touching at a single vertex
        let text = r#"{"dimension":2,"vertices":["o","a","b","c","d"],
            "edges":[{"id":"oa","ends":["o","a"],"length":1},{"id":"ab","ends":["a","b"],"length":1},
                     {"id":"bo","ends":["b","o"],"length":1},{"id":"oc","ends":["o","c"],"length":1},
                     {"id":"cd","ends":["c","d"],"length":1},{"id":"do","ends":["d","o"],"length":1}],
            "faces":[{"id":"f","vertices":["o","a","b"],"chart":[[0,0],[1,0],[0.5,0.8660254037844386]]},
                     {"id":"g","vertices":["o","c","d"],"chart":[[0,0],[-1,0],[-0.5,-0.8660254037844386]]}]}"#;
        assert!(matches!(Complex::from_json(text), Err(Error::Admissibility(_))));
    }

    #[test]
    fn edge_outside_faces_rejected() {
        let mut s = library::unit_square().to_spec();
        s.vertices.push("z".into());
        s.edges.push(EdgeSpec { id: "dangling".into(), ends: ["v0".into(), "z".into()], length: 1.0 });
        assert!(matches!(Complex::from_spec(&s), Err(Error::Admissibility(_))));
    }

    #[test]
    fn spec_round_trip() {
        for x in [library::l_complex(), library::star(3), library::square_grid(2, 3)] {
            let s = x.to_spec();
            let y = Complex::from_json(&s.to_json()).unwrap();
            assert_eq!(y.to_spec(), s);
        }
    }

    #[test]
    fn skeleton_cases() {
        let g = library::square_grid(3, 3);
        let s1 = g.skeleton(1).unwrap();
        assert_eq!(s1.dimension(), 1);
        assert_eq!(s1.edges().len(), 24);
        assert!(s1.faces().is_empty());
        assert_eq!(g.skeleton(2).unwrap().faces().len(), 9);
        assert!(matches!(g.skeleton(3), Err(Error::Range(_))));
        assert_eq!(library::star(3).vertex_skeleton().len(), 4);
    }

    #[test]
    fn canonical_points() {
        let x = library::unit_square();
        let p = x.canonical(PointRef::Face { face: 0, coords: [1.0, 0.0] });
        assert!(matches!(p, PointRef::Vertex(_)));
        let q = x.canonical(PointRef::Face { face: 0, coords: [0.5, 0.0] });
        match q {
            PointRef::Edge { offset, .. } => assert!((offset - 0.5).abs() < 1e-12),
            _ => panic!("{q:?}"),
        }
        let star = library::star(3);
        assert_eq!(star.parse_point("v:center").unwrap(), PointRef::Vertex(0));
        assert!(star.parse_point("leg1:2.0").is_err());
    }
}
