//! Finite pieces of periodic complexes: copies of a fundamental domain over
//! a word ball of the deck group, glued by the domain's rules.

use std::collections::HashMap;

use super::{CellRef, Complex, Edge, PointRef, Vertex};
use crate::error::{Error, Result};
use crate::stochastic::group::{Elem, GroupKind, GroupModel};

/// Which copy of which fundamental-domain cell a cell came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Orbit {
    /// Index into [`OrbitLabels::elements`].
    pub elem: usize,
    /// Cell index in the fundamental domain.
    pub base: usize,
}

#[derive(Clone, Debug)]
pub struct OrbitLabels {
    pub group: GroupModel,
    pub radius: usize,
    /// Elements of B_G(radius) in breadth-first order; index 0 is the identity.
    pub elements: Vec<Elem>,
    pub vertex: Vec<Orbit>,
    pub edge: Vec<Orbit>,
    pub face: Vec<Orbit>,
    /// Cells whose gluing partner lies outside the truncation.
    pub cut_vertex: Vec<bool>,
    pub cut_edge: Vec<bool>,
    /// Truncated vertex holding slot `elem * nv + base`.
    pub vertex_copy: Vec<usize>,
    /// Truncated edge holding slot `elem * ne + base`.
    pub edge_copy: Vec<usize>,
    /// Vertex, edge and face counts of the fundamental domain.
    pub base_counts: [usize; 3],
}

impl OrbitLabels {
    pub(crate) fn without_faces(&self) -> OrbitLabels {
        let mut o = self.clone();
        o.face.clear();
        o
    }

    pub fn element_index(&self, g: &Elem) -> Option<usize> {
        self.elements.iter().position(|h| h == g)
    }

    /// The copy in element `elem` of a point of the fundamental domain.
    pub fn copy_of(&self, base: PointRef, elem: usize) -> PointRef {
        let [nv, ne, nf] = self.base_counts;
        match base {
            PointRef::Vertex(v) => PointRef::Vertex(self.vertex_copy[elem * nv + v]),
            PointRef::Edge { edge, offset } => PointRef::Edge { edge: self.edge_copy[elem * ne + edge], offset },
            PointRef::Face { face, coords } => PointRef::Face { face: elem * nf + face, coords },
        }
    }

    /// Element of the copy a truncated point was built from; points on
    /// glued cells report the copy with the smallest index.
    pub fn elem_of(&self, p: PointRef) -> usize {
        match p {
            PointRef::Vertex(v) => self.vertex[v].elem,
            PointRef::Edge { edge, .. } => self.edge[edge].elem,
            PointRef::Face { face, .. } => self.face[face].elem,
        }
    }

    /// Whether a truncated point sits on a cell whose gluing partner was cut.
    pub fn on_cut(&self, x: &Complex, p: PointRef) -> bool {
        match x.canonical(p) {
            PointRef::Vertex(v) => self.cut_vertex[v],
            PointRef::Edge { edge, .. } => self.cut_edge[edge],
            PointRef::Face { .. } => false,
        }
    }
}

pub fn elem_label(group: &GroupModel, g: &Elem) -> String {
    if group.is_identity(g) {
        return "e".to_string();
    }
    match group.kind {
        GroupKind::Zd { .. } => g.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","),
        GroupKind::Free { .. } => g
            .iter()
            .map(|&s| {
                let c = (b'a' + (s.unsigned_abs() as u8 - 1)) as char;
                if s > 0 { c } else { c.to_ascii_uppercase() }
            })
            .collect(),
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut j = i;
        while self.0[j] != r {
            let next = self.0[j];
            self.0[j] = r;
            j = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        // keep the smaller slot as root so representatives are deterministic
        if ra < rb {
            self.0[rb] = ra;
        } else if rb < ra {
            self.0[ra] = rb;
        }
    }
}

impl Complex {
    /// Glue copies gY for g in the closed word ball of radius `radius`.
    pub fn truncate(&self, radius: usize) -> Result<Complex> {
        let deck = self
            .deck
            .as_ref()
            .ok_or_else(|| Error::Invalid("complex carries no deck group".into()))?;
        let group = deck.group.clone();
        let elements = group.ball(radius);
        let index: HashMap<Elem, usize> = elements.iter().cloned().enumerate().map(|(i, g)| (g, i)).collect();
        let (nv, ne) = (self.vertices.len(), self.edges.len());
        let ng = elements.len();
        let mut vuf = UnionFind((0..ng * nv).collect());
        let mut euf = UnionFind((0..ng * ne).collect());
        let mut vcut = vec![false; ng * nv];
        let mut ecut = vec![false; ng * ne];
        for (gi, g) in elements.iter().enumerate() {
            for rule in &deck.rules {
                for (cell, partner_cell, letter) in [(rule.from, rule.to, rule.generator), (rule.to, rule.from, -rule.generator)] {
                    let h = group.mul_gen(g, letter);
                    match index.get(&h) {
                        Some(&hi) => match (cell, partner_cell) {
                            (CellRef::Vertex(a), CellRef::Vertex(b)) => vuf.union(gi * nv + a, hi * nv + b),
                            (CellRef::Edge(a), CellRef::Edge(b)) => {
                                let (ea, eb) = (self.edges[a].ends, self.edges[b].ends);
                                euf.union(gi * ne + a, hi * ne + b);
                                vuf.union(gi * nv + ea[0], hi * nv + eb[0]);
                                vuf.union(gi * nv + ea[1], hi * nv + eb[1]);
                            }
                            _ => return Err(Error::Gluing("gluing rule mixes a vertex and an edge".into())),
                        },
                        None => match cell {
                            CellRef::Vertex(a) => vcut[gi * nv + a] = true,
                            CellRef::Edge(a) => {
                                ecut[gi * ne + a] = true;
                                vcut[gi * nv + self.edges[a].ends[0]] = true;
                                vcut[gi * nv + self.edges[a].ends[1]] = true;
                            }
                        },
                    }
                }
            }
        }
        let mut vmap = vec![usize::MAX; ng * nv];
        let mut vertices = Vec::new();
        let mut vorbit = Vec::new();
        let mut cut_vertex = Vec::new();
        for slot in 0..ng * nv {
            let r = vuf.find(slot);
            if vmap[r] == usize::MAX {
                vmap[r] = vertices.len();
                let (gi, v) = (r / nv, r % nv);
                vertices.push(Vertex { label: format!("{}@{}", self.vertices[v].label, elem_label(&group, &elements[gi])) });
                vorbit.push(Orbit { elem: gi, base: v });
                cut_vertex.push(false);
            }
            vmap[slot] = vmap[r];
            if vcut[slot] {
                cut_vertex[vmap[r]] = true;
            }
        }
        let mut emap = vec![usize::MAX; ng * ne];
        let mut edges = Vec::new();
        let mut eorbit = Vec::new();
        let mut cut_edge = Vec::new();
        for slot in 0..ng * ne {
            let r = euf.find(slot);
            if emap[r] == usize::MAX {
                emap[r] = edges.len();
                let (gi, e) = (r / ne, r % ne);
                let base = &self.edges[e];
                edges.push(Edge {
                    label: format!("{}@{}", base.label, elem_label(&group, &elements[gi])),
                    ends: [vmap[gi * nv + base.ends[0]], vmap[gi * nv + base.ends[1]]],
                    length: base.length,
                });
                eorbit.push(Orbit { elem: gi, base: e });
                cut_edge.push(false);
            }
            emap[slot] = emap[r];
            if ecut[slot] {
                cut_edge[emap[r]] = true;
            }
        }
        let mut faces = Vec::new();
        let mut forbit = Vec::new();
        for (gi, g) in elements.iter().enumerate() {
            for (fi, f) in self.faces.iter().enumerate() {
                faces.push((
                    format!("{}@{}", f.label, elem_label(&group, g)),
                    f.vertices.iter().map(|&v| vmap[gi * nv + v]).collect(),
                    f.chart.clone(),
                    Some(f.edges.iter().map(|&e| emap[gi * ne + e]).collect()),
                ));
                forbit.push(Orbit { elem: gi, base: fi });
            }
        }
        let mut out = Complex::assemble(self.dimension, vertices, edges, faces, None)?;
        out.orbits = Some(OrbitLabels {
            group,
            radius,
            elements,
            vertex: vorbit,
            edge: eorbit,
            face: forbit,
            cut_vertex,
            cut_edge,
            vertex_copy: vmap,
            edge_copy: emap,
            base_counts: [nv, ne, self.faces.len()],
        });
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use crate::complex::library;

    #[test]
    fn z1_truncation_is_a_path() {
        let x = library::z1_cell().truncate(3).unwrap();
        assert_eq!(x.edges().len(), 7);
        assert_eq!(x.vertices().len(), 8);
        let o = x.orbits().unwrap();
        assert_eq!(o.cut_vertex.iter().filter(|&&c| c).count(), 2);
    }

    #[test]
    fn z2_truncation_counts() {
        let x = library::z2_cell().truncate(1).unwrap();
        // plus-shaped: 5 squares, 12 vertices, 16 edges
        assert_eq!(x.faces().len(), 5);
        assert_eq!(x.vertices().len(), 12);
        assert_eq!(x.edges().len(), 16);
        let x = library::z2_cell().truncate(4).unwrap();
        assert_eq!(x.faces().len(), 41);
    }

    #[test]
    fn free_truncation_counts() {
        let y = library::l_complex();
        let x = y.truncate(1).unwrap();
        assert_eq!(x.faces().len(), 15);
        // each of the four glued pairs merges one edge and two vertices
        assert_eq!(x.edges().len(), 50 - 4);
        let x2 = y.truncate(2).unwrap();
        assert_eq!(x2.faces().len(), 51);
        let g = library::free_graph_cell(2).truncate(2).unwrap();
        // 16 tree edges inside the ball plus 18 leading out of it
        assert_eq!(g.edges().len(), 34);
        assert_eq!(g.vertices().len(), 35);
    }
}
