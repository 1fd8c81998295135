//! Lumped-mass P1 discretization of the Laplacian on a complex.
//!
//! Edges of a graph carry the three-point stencil; faces carry a structured
//! right-triangle mesh of each parallelogram chart (the five-point stencil on
//! rectangles). Vertex rows sum the contributions of every incident cell,
//! which is the natural (Kirchhoff) vertex condition.

use std::collections::HashMap;

use super::sparse::CsrMatrix;
use crate::complex::{Complex, PointRef};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Element {
    Segment { nodes: [usize; 2], length: f64 },
    Triangle { nodes: [usize; 3], coords: [[f64; 2]; 3] },
}

impl Element {
    pub fn nodes(&self) -> &[usize] {
        match self {
            Element::Segment { nodes, .. } => nodes,
            Element::Triangle { nodes, .. } => nodes,
        }
    }

    pub fn measure(&self) -> f64 {
        match self {
            Element::Segment { length, .. } => *length,
            Element::Triangle { coords: t, .. } => {
                0.5 * ((t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (t[1][1] - t[0][1])).abs()
            }
        }
    }

    fn local_stiffness(&self) -> Vec<(usize, usize, f64)> {
        match self {
            Element::Segment { nodes, length } => {
                let k = 1.0 / length;
                vec![(nodes[0], nodes[0], k), (nodes[1], nodes[1], k), (nodes[0], nodes[1], -k), (nodes[1], nodes[0], -k)]
            }
            Element::Triangle { nodes, coords: t } => {
                let area = self.measure();
                let b = [t[1][1] - t[2][1], t[2][1] - t[0][1], t[0][1] - t[1][1]];
                let c = [t[2][0] - t[1][0], t[0][0] - t[2][0], t[1][0] - t[0][0]];
                let mut out = Vec::with_capacity(9);
                for i in 0..3 {
                    for j in 0..3 {
                        out.push((nodes[i], nodes[j], (b[i] * b[j] + c[i] * c[j]) / (4.0 * area)));
                    }
                }
                out
            }
        }
    }

    /// ∫ |∇f| over the element for the P1 interpolant of f.
    pub fn gradient_norm(&self, f: &[f64]) -> f64 {
        match self {
            Element::Segment { nodes, .. } => (f[nodes[1]] - f[nodes[0]]).abs(),
            Element::Triangle { nodes, coords: t } => {
                let area = self.measure();
                let b = [t[1][1] - t[2][1], t[2][1] - t[0][1], t[0][1] - t[1][1]];
                let c = [t[2][0] - t[1][0], t[0][0] - t[2][0], t[1][0] - t[0][0]];
                let gx: f64 = (0..3).map(|i| b[i] * f[nodes[i]]).sum::<f64>() / (2.0 * area);
                let gy: f64 = (0..3).map(|i| c[i] * f[nodes[i]]).sum::<f64>() / (2.0 * area);
                (gx * gx + gy * gy).sqrt() * area
            }
        }
    }

    /// Constant |∇f| on the element.
    pub fn gradient_magnitude(&self, f: &[f64]) -> f64 {
        self.gradient_norm(f) / self.measure()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundaryCondition {
    /// Natural conditions everywhere (whole space or free boundary).
    Neumann,
    /// Functions vanish outside the kept node set.
    Dirichlet,
}

/// Where each node of a face grid sits.
#[derive(Clone, Debug)]
struct FaceGrid {
    a: usize,
    b: usize,
    origin: [f64; 2],
    u: [f64; 2],
    v: [f64; 2],
    ids: Vec<usize>,
}

#[derive(Clone, Debug)]
struct Layout {
    vertex_node: Vec<usize>,
    edge_nodes: Vec<Vec<usize>>,
    face_grids: Vec<FaceGrid>,
}

/// Stiffness matrix, lumped mass and node positions of a discretized complex.
#[derive(Clone, Debug)]
pub struct DiscreteOperator {
    pub points: Vec<PointRef>,
    pub stiffness: CsrMatrix,
    pub mass: Vec<f64>,
    pub elements: Vec<Element>,
    pub h: f64,
    pub boundary: BoundaryCondition,
    /// Index of each node in the full (unrestricted) discretization.
    pub origin: Vec<usize>,
    /// Edges whose length is not a multiple of h: (edge, segments, effective h).
    pub snapped: Vec<(usize, usize, f64)>,
    layout: Option<std::sync::Arc<Layout>>,
}

impl DiscreteOperator {
    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// Built from a whole complex, not restricted to a subdomain.
    pub fn is_full(&self) -> bool {
        self.layout.is_some()
    }

    /// Discretize the whole complex with natural boundary conditions.
    pub fn build(x: &Complex, h: f64) -> Result<DiscreteOperator> {
        if !(h > 0.0) {
            return Err(Error::Mesh(format!("mesh size {h} must be positive")));
        }
        let nv = x.vertices().len();
        let mut points: Vec<PointRef> = (0..nv).map(PointRef::Vertex).collect();
        let mut snapped = Vec::new();
        let mut edge_nodes = Vec::with_capacity(x.edges().len());
        for (ei, e) in x.edges().iter().enumerate() {
            let m = (e.length / h).round() as usize;
            if m < 2 {
                return Err(Error::Mesh(format!(
                    "edge `{}` of length {} gets fewer than three nodes at h = {h}",
                    e.label, e.length
                )));
            }
            let eff = e.length / m as f64;
            if (eff - h).abs() > 1e-9 * h {
                snapped.push((ei, m, eff));
            }
            let mut ids = vec![e.ends[0]];
            for j in 1..m {
                ids.push(points.len());
                points.push(PointRef::Edge { edge: ei, offset: e.length * j as f64 / m as f64 });
            }
            ids.push(e.ends[1]);
            edge_nodes.push(ids);
        }
        let mut elements = Vec::new();
        let mut face_grids = Vec::new();
        if x.dimension() == 1 {
            for (ei, ids) in edge_nodes.iter().enumerate() {
                let len = x.edges()[ei].length / (ids.len() - 1) as f64;
                for w in ids.windows(2) {
                    elements.push(Element::Segment { nodes: [w[0], w[1]], length: len });
                }
            }
        } else {
            for (fi, f) in x.faces().iter().enumerate() {
                if f.chart.len() != 4 {
                    return Err(Error::Mesh(format!("face `{}` is not a parallelogram", f.label)));
                }
                let c = &f.chart;
                let gap = ((c[0][0] + c[2][0] - c[1][0] - c[3][0]).abs()).max((c[0][1] + c[2][1] - c[1][1] - c[3][1]).abs());
                if gap > 1e-9 {
                    return Err(Error::Mesh(format!("face `{}` is not a parallelogram", f.label)));
                }
                let u = [c[1][0] - c[0][0], c[1][1] - c[0][1]];
                let v = [c[3][0] - c[0][0], c[3][1] - c[0][1]];
                // slot 0 runs along u, slot 3 runs (backwards) along v
                let a = edge_nodes[f.edges[0]].len() - 1;
                let b = edge_nodes[f.edges[3]].len() - 1;
                let along = |slot: usize, from_corner: usize, k: usize, steps: usize| -> usize {
                    let e = f.edges[slot];
                    let ids = &edge_nodes[e];
                    if x.edges()[e].ends[0] == f.vertices[from_corner] {
                        ids[k]
                    } else {
                        ids[steps - k]
                    }
                };
                let mut ids = vec![usize::MAX; (a + 1) * (b + 1)];
                for j in 0..=b {
                    for i in 0..=a {
                        let id = if j == 0 {
                            along(0, 0, i, a)
                        } else if j == b {
                            along(2, 3, i, a)
                        } else if i == 0 {
                            along(3, 0, j, b)
                        } else if i == a {
                            along(1, 1, j, b)
                        } else {
                            let s = i as f64 / a as f64;
                            let t = j as f64 / b as f64;
                            points.push(PointRef::Face {
                                face: fi,
                                coords: [c[0][0] + s * u[0] + t * v[0], c[0][1] + s * u[1] + t * v[1]],
                            });
                            points.len() - 1
                        };
                        ids[j * (a + 1) + i] = id;
                    }
                }
                let pos = |i: usize, j: usize| {
                    let s = i as f64 / a as f64;
                    let t = j as f64 / b as f64;
                    [c[0][0] + s * u[0] + t * v[0], c[0][1] + s * u[1] + t * v[1]]
                };
                for j in 0..b {
                    for i in 0..a {
                        let n00 = ids[j * (a + 1) + i];
                        let n10 = ids[j * (a + 1) + i + 1];
                        let n01 = ids[(j + 1) * (a + 1) + i];
                        let n11 = ids[(j + 1) * (a + 1) + i + 1];
                        elements.push(Element::Triangle { nodes: [n00, n10, n11], coords: [pos(i, j), pos(i + 1, j), pos(i + 1, j + 1)] });
                        elements.push(Element::Triangle { nodes: [n00, n11, n01], coords: [pos(i, j), pos(i + 1, j + 1), pos(i, j + 1)] });
                    }
                }
                face_grids.push(FaceGrid { a, b, origin: c[0], u, v, ids });
            }
        }
        let n = points.len();
        let (stiffness, mass) = assemble(n, &elements);
        if let Some(i) = mass.iter().position(|&m| !(m > 0.0)) {
            return Err(Error::Mesh(format!("node {i} carries no measure")));
        }
        Ok(DiscreteOperator {
            points,
            stiffness,
            mass,
            elements,
            h,
            boundary: BoundaryCondition::Neumann,
            origin: (0..n).collect(),
            snapped,
            layout: Some(std::sync::Arc::new(Layout { vertex_node: (0..nv).collect(), edge_nodes, face_grids })),
        })
    }

    /// Kill-on-exit restriction to the nodes where `keep` holds.
    pub fn dirichlet_subdomain(&self, keep: impl Fn(usize) -> bool) -> Result<DiscreteOperator> {
        let flags: Vec<bool> = (0..self.len()).map(keep).collect();
        if !flags.iter().any(|&k| k) {
            return Err(Error::EmptyDomain);
        }
        let map = renumber(&flags);
        Ok(DiscreteOperator {
            points: select(&self.points, &flags),
            stiffness: self.stiffness.principal_submatrix(&flags),
            mass: select(&self.mass, &flags),
            elements: self
                .elements
                .iter()
                .filter(|e| e.nodes().iter().all(|&i| flags[i]))
                .map(|e| remap(e, &map))
                .collect(),
            h: self.h,
            boundary: if flags.iter().all(|&k| k) { self.boundary.clone() } else { BoundaryCondition::Dirichlet },
            origin: select(&self.origin, &flags),
            snapped: self.snapped.clone(),
            layout: None,
        })
    }

    /// Natural-boundary operator on the union of elements whose nodes all
    /// satisfy `keep` (a subcomplex such as a ball).
    pub fn neumann_restriction(&self, keep: impl Fn(usize) -> bool) -> Result<DiscreteOperator> {
        let flags_in: Vec<bool> = (0..self.len()).map(keep).collect();
        let kept: Vec<&Element> = self.elements.iter().filter(|e| e.nodes().iter().all(|&i| flags_in[i])).collect();
        let mut flags = vec![false; self.len()];
        for e in &kept {
            for &i in e.nodes() {
                flags[i] = true;
            }
        }
        if !flags.iter().any(|&k| k) {
            return Err(Error::EmptyDomain);
        }
        let map = renumber(&flags);
        let elements: Vec<Element> = kept.iter().map(|e| remap(e, &map)).collect();
        let n = map.iter().filter(|&&m| m != usize::MAX).count();
        let (stiffness, mass) = assemble(n, &elements);
        Ok(DiscreteOperator {
            points: select(&self.points, &flags),
            stiffness,
            mass,
            elements,
            h: self.h,
            boundary: BoundaryCondition::Neumann,
            origin: select(&self.origin, &flags),
            snapped: self.snapped.clone(),
            layout: None,
        })
    }

    /// The stiffness quadratic form Σ∫|∇f|².
    pub fn energy(&self, f: &[f64]) -> f64 {
        assert_eq!(f.len(), self.len());
        self.stiffness.quadratic_form(f)
    }

    /// Mass-weighted inner product.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter().zip(g).zip(&self.mass).map(|((a, b), m)| a * b * m).sum()
    }

    /// ‖f‖_p with the lumped mass as quadrature.
    pub fn lp_norm(&self, f: &[f64], p: f64) -> f64 {
        f.iter().zip(&self.mass).map(|(a, m)| a.abs().powf(p) * m).sum::<f64>().powf(1.0 / p)
    }

    pub fn mean(&self, f: &[f64]) -> f64 {
        let total: f64 = self.mass.iter().sum();
        f.iter().zip(&self.mass).map(|(a, m)| a * m).sum::<f64>() / total
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// ‖∇f‖_p using the piecewise-constant gradient on elements.
    pub fn gradient_lp_norm(&self, f: &[f64], p: f64) -> f64 {
        self.elements
            .iter()
            .map(|e| e.gradient_magnitude(f).powf(p) * e.measure())
            .sum::<f64>()
            .powf(1.0 / p)
    }

    /// Node closest to a point together with the snapping distance. Only
    /// available on unrestricted operators; restricted ones search through
    /// `origin`.
    pub fn nearest_node(&self, x: &Complex, p: PointRef) -> Result<(usize, f64)> {
        x.check_point(p)?;
        let p = x.canonical(p);
        let full = match &self.layout {
            Some(l) => locate(x, l, p),
            None => return Err(Error::Invalid("point lookup requires the full operator; use locate_in".into())),
        };
        Ok(full)
    }

    /// Find a point in a restricted operator through the parent operator.
    pub fn locate_in(&self, parent: &DiscreteOperator, x: &Complex, p: PointRef) -> Result<(usize, f64)> {
        let (i, d) = parent.nearest_node(x, p)?;
        let target = parent.origin[i];
        self.origin
            .iter()
            .position(|&o| o == target)
            .map(|j| (j, d))
            .ok_or_else(|| Error::Invalid(format!("point {} lies outside the domain", x.format_point(p))))
    }

    /// Map node index → position in `origin` space for quick lookups.
    pub fn origin_index(&self) -> HashMap<usize, usize> {
        self.origin.iter().enumerate().map(|(i, &o)| (o, i)).collect()
    }
}

fn locate(x: &Complex, l: &Layout, p: PointRef) -> (usize, f64) {
    match p {
        PointRef::Vertex(v) => (l.vertex_node[v], 0.0),
        PointRef::Edge { edge, offset } => {
            let ids = &l.edge_nodes[edge];
            let m = ids.len() - 1;
            let len = x.edges()[edge].length;
            let k = (offset / len * m as f64).round() as usize;
            let k = k.min(m);
            (ids[k], (offset - len * k as f64 / m as f64).abs())
        }
        PointRef::Face { face, coords } => {
            let g = &l.face_grids[face];
            // solve coords = origin + s u + t v
            let det = g.u[0] * g.v[1] - g.u[1] * g.v[0];
            let d = [coords[0] - g.origin[0], coords[1] - g.origin[1]];
            let s = (d[0] * g.v[1] - d[1] * g.v[0]) / det;
            let t = (g.u[0] * d[1] - g.u[1] * d[0]) / det;
            let i = ((s * g.a as f64).round().max(0.0) as usize).min(g.a);
            let j = ((t * g.b as f64).round().max(0.0) as usize).min(g.b);
            let (si, tj) = (i as f64 / g.a as f64, j as f64 / g.b as f64);
            let q = [g.origin[0] + si * g.u[0] + tj * g.v[0], g.origin[1] + si * g.u[1] + tj * g.v[1]];
            (g.ids[j * (g.a + 1) + i], ((q[0] - coords[0]).powi(2) + (q[1] - coords[1]).powi(2)).sqrt())
        }
    }
}

fn assemble(n: usize, elements: &[Element]) -> (CsrMatrix, Vec<f64>) {
    let mut trip = Vec::with_capacity(elements.len() * 9);
    let mut mass = vec![0.0; n];
    for e in elements {
        trip.extend(e.local_stiffness());
        let share = e.measure() / e.nodes().len() as f64;
        for &i in e.nodes() {
            mass[i] += share;
        }
    }
    (CsrMatrix::from_triplets(n, trip), mass)
}

fn renumber(flags: &[bool]) -> Vec<usize> {
    let mut map = vec![usize::MAX; flags.len()];
    let mut m = 0;
    for (i, &f) in flags.iter().enumerate() {
        if f {
            map[i] = m;
            m += 1;
        }
    }
    map
}

fn select<T: Clone>(v: &[T], flags: &[bool]) -> Vec<T> {
    v.iter().zip(flags).filter(|(_, &f)| f).map(|(x, _)| x.clone()).collect()
}

fn remap(e: &Element, map: &[usize]) -> Element {
    match e {
        Element::Segment { nodes, length } => Element::Segment { nodes: [map[nodes[0]], map[nodes[1]]], length: *length },
        Element::Triangle { nodes, coords } => {
            Element::Triangle { nodes: [map[nodes[0]], map[nodes[1]], map[nodes[2]]], coords: *coords }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::library;

    #[test]
    fn interval_operator_shape() {
        let d = DiscreteOperator::build(&library::interval(1.0), 0.25).unwrap();
        assert_eq!(d.len(), 5);
        assert!((d.total_mass() - 1.0).abs() < 1e-15);
        assert_eq!(d.mass[0], 0.125);
        for i in 0..5 {
            let s: f64 = d.stiffness.row(i).map(|(_, v)| v).sum();
            assert!(s.abs() < 1e-12);
        }
        assert!(d.stiffness.max_asymmetry() < 1e-12);
    }

    #[test]
    fn coarse_mesh_rejected() {
        assert!(matches!(DiscreteOperator::build(&library::interval(1.0), 1.0), Err(Error::Mesh(_))));
    }

    #[test]
    fn square_is_five_point_stencil() {
        let d = DiscreteOperator::build(&library::unit_square(), 0.25).unwrap();
        assert_eq!(d.len(), 25);
        assert!((d.total_mass() - 1.0).abs() < 1e-14);
        let (c, _) = d.nearest_node(&library::unit_square(), PointRef::Face { face: 0, coords: [0.5, 0.5] }).unwrap();
        assert!((d.mass[c] - 0.0625).abs() < 1e-15);
        assert!((d.stiffness.get(c, c) - 4.0).abs() < 1e-12);
        let nb: Vec<f64> = d.stiffness.row(c).filter(|&(j, _)| j != c).map(|(_, v)| v).filter(|v| v.abs() > 1e-14).collect();
        assert_eq!(nb.len(), 4);
        assert!(nb.iter().all(|v| (v + 1.0).abs() < 1e-12));
    }

    #[test]
    fn grid_shares_edge_nodes() {
        let x = library::square_grid(2, 1);
        let d = DiscreteOperator::build(&x, 0.25).unwrap();
        assert_eq!(d.len(), 9 * 5);
        assert!((d.total_mass() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn energy_of_linear_function() {
        let x = library::interval(1.0);
        let d = DiscreteOperator::build(&x, 0.01).unwrap();
        let f: Vec<f64> = d.points.iter().map(|p| match *p {
            PointRef::Vertex(v) => v as f64,
            PointRef::Edge { offset, .. } => offset,
            _ => unreachable!(),
        }).collect();
        assert!((d.energy(&f) - 1.0).abs() < 1e-10);
        assert!(d.energy(&vec![3.0; d.len()]).abs() < 1e-12);
    }

    #[test]
    fn restrictions() {
        let x = library::interval(1.0);
        let d = DiscreteOperator::build(&x, 0.1).unwrap();
        let same = d.dirichlet_subdomain(|_| true).unwrap();
        assert_eq!(same.stiffness, d.stiffness);
        assert!(matches!(d.dirichlet_subdomain(|_| false), Err(Error::EmptyDomain)));
        let half = d.neumann_restriction(|i| match d.points[i] {
            PointRef::Vertex(v) => v == 0,
            PointRef::Edge { offset, .. } => offset <= 0.5 + 1e-12,
            _ => false,
        }).unwrap();
        assert!((half.total_mass() - 0.5).abs() < 1e-12);
    }
}
