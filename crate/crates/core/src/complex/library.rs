//! Ready-made complexes used throughout the examples and tests.

use super::{CellRef, Complex, Deck, Edge, GlueRule, Vertex};
use crate::stochastic::group::GroupModel;

type RawFace = (String, Vec<usize>, Vec<[f64; 2]>, Option<Vec<usize>>);

struct Builder {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    faces: Vec<RawFace>,
}

impl Builder {
    fn new() -> Self {
        Builder { vertices: Vec::new(), edges: Vec::new(), faces: Vec::new() }
    }

    fn vertex(&mut self, label: impl Into<String>) -> usize {
        self.vertices.push(Vertex { label: label.into() });
        self.vertices.len() - 1
    }

    fn edge(&mut self, label: impl Into<String>, a: usize, b: usize, length: f64) -> usize {
        self.edges.push(Edge { label: label.into(), ends: [a, b], length });
        self.edges.len() - 1
    }

    fn face(&mut self, label: impl Into<String>, vs: Vec<usize>, chart: Vec<[f64; 2]>) {
        self.faces.push((label.into(), vs, chart, None));
    }

    fn finish(self, dim: usize, deck: Option<Deck>) -> Complex {
        Complex::assemble(dim, self.vertices, self.edges, self.faces, deck).expect("library complex is valid")
    }
}

/// [0, len] as a single edge `e1` from `a` to `b`.
pub fn interval(len: f64) -> Complex {
    let mut b = Builder::new();
    let (x, y) = (b.vertex("a"), b.vertex("b"));
    b.edge("e1", x, y, len);
    b.finish(1, None)
}

/// Interval of length `len` split into `pieces` equal edges `e1..`.
pub fn path(len: f64, pieces: usize) -> Complex {
    let mut b = Builder::new();
    let vs: Vec<usize> = (0..=pieces).map(|i| b.vertex(format!("p{i}"))).collect();
    for i in 0..pieces {
        b.edge(format!("e{}", i + 1), vs[i], vs[i + 1], len / pieces as f64);
    }
    b.finish(1, None)
}

/// Circle of circumference 1 as a triangle of edges; arclength is measured
/// from `c0` through `e1`, `e2`, `e3`.
pub fn circle() -> Complex {
    let mut b = Builder::new();
    let vs: Vec<usize> = (0..3).map(|i| b.vertex(format!("c{i}"))).collect();
    for i in 0..3 {
        b.edge(format!("e{}", i + 1), vs[i], vs[(i + 1) % 3], 1.0 / 3.0);
    }
    b.finish(1, None)
}

/// Star with `legs` unit legs `e1..` from `center` to tips `t1..`.
pub fn star(legs: usize) -> Complex {
    let mut b = Builder::new();
    let c = b.vertex("center");
    for i in 1..=legs {
        let t = b.vertex(format!("t{i}"));
        b.edge(format!("e{i}"), c, t, 1.0);
    }
    b.finish(1, None)
}

/// Two stars joined by a unit `bridge` from `v1` to `v2`; `v1` carries `n`
/// legs `a1..`, `v2` carries `m` legs `b1..`.
pub fn two_star(m: usize, n: usize) -> Complex {
    let mut b = Builder::new();
    let v1 = b.vertex("v1");
    let v2 = b.vertex("v2");
    b.edge("bridge", v1, v2, 1.0);
    for i in 1..=n {
        let t = b.vertex(format!("x{i}"));
        b.edge(format!("a{i}"), v1, t, 1.0);
    }
    for i in 1..=m {
        let t = b.vertex(format!("y{i}"));
        b.edge(format!("b{i}"), v2, t, 1.0);
    }
    b.finish(1, None)
}

/// The unit square as one face.
pub fn unit_square() -> Complex {
    square_grid(1, 1)
}

/// `nx` by `ny` unit squares; vertex `p{i}_{j}` sits at (i, j).
pub fn square_grid(nx: usize, ny: usize) -> Complex {
    let mut b = Builder::new();
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    if nx == 1 && ny == 1 {
        for (k, _) in [(0, 0), (1, 0), (1, 1), (0, 1)].iter().enumerate() {
            b.vertex(format!("v{k}"));
        }
        b.edge("bottom", 0, 1, 1.0);
        b.edge("right", 1, 2, 1.0);
        b.edge("top", 3, 2, 1.0);
        b.edge("left", 0, 3, 1.0);
        b.face("sq", vec![0, 1, 2, 3], vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        return b.finish(2, None);
    }
    for j in 0..=ny {
        for i in 0..=nx {
            b.vertex(format!("p{i}_{j}"));
        }
    }
    for j in 0..=ny {
        for i in 0..nx {
            b.edge(format!("h{i}_{j}"), id(i, j), id(i + 1, j), 1.0);
        }
    }
    for j in 0..ny {
        for i in 0..=nx {
            b.edge(format!("u{i}_{j}"), id(i, j), id(i, j + 1), 1.0);
        }
    }
    for j in 0..ny {
        for i in 0..nx {
            let (x, y) = (i as f64, j as f64);
            b.face(
                format!("f{i}_{j}"),
                vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)],
                vec![[x, y], [x + 1.0, y], [x + 1.0, y + 1.0], [x, y + 1.0]],
            );
        }
    }
    b.finish(2, None)
}

/// Unit edge `a`–`b` whose copies under Z form the real line.
pub fn z1_cell() -> Complex {
    let mut b = Builder::new();
    let (x, y) = (b.vertex("a"), b.vertex("b"));
    b.edge("e1", x, y, 1.0);
    let deck = Deck {
        group: GroupModel::zd(1),
        rules: vec![GlueRule { from: CellRef::Vertex(y), generator: 1, to: CellRef::Vertex(x) }],
    };
    b.finish(1, Some(deck))
}

/// Unit square whose copies under Z² tile the plane.
pub fn z2_cell() -> Complex {
    let mut x = unit_square();
    let e = |l: &str| x.edge_by_label(l).unwrap();
    let rules = vec![
        GlueRule { from: CellRef::Edge(e("right")), generator: 1, to: CellRef::Edge(e("left")) },
        GlueRule { from: CellRef::Edge(e("top")), generator: 2, to: CellRef::Edge(e("bottom")) },
    ];
    x.deck = Some(Deck { group: GroupModel::zd(2), rules });
    x
}

/// Unit square with only the 1-skeleton periodic structure: the grid graph
/// fundamental domain for Z² (vertex `o` with edges to its +x and +y
/// neighbours).
pub fn z2_graph_cell() -> Complex {
    let mut b = Builder::new();
    let o = b.vertex("o");
    let px = b.vertex("px");
    let py = b.vertex("py");
    b.edge("ex", o, px, 1.0);
    b.edge("ey", o, py, 1.0);
    let deck = Deck {
        group: GroupModel::zd(2),
        rules: vec![
            GlueRule { from: CellRef::Vertex(px), generator: 1, to: CellRef::Vertex(o) },
            GlueRule { from: CellRef::Vertex(py), generator: 2, to: CellRef::Vertex(o) },
        ],
    };
    b.finish(1, Some(deck))
}

/// Three unit squares in an L (lower-left `A`, lower-right `B`, upper `C`).
/// The top of the L is glued to the bottom of `A` in the copy translated by
/// the second generator, the right side of the L to the left side of `A` in
/// the copy translated by the first. Copies under F₂ form a complex that is
/// locally flat and globally tree-like.
pub fn l_complex() -> Complex {
    let mut b = Builder::new();
    let pts = [(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (2, 1), (0, 2), (1, 2)];
    for (x, y) in pts {
        b.vertex(format!("q{x}{y}"));
    }
    let v = |x: usize, y: usize| pts.iter().position(|&p| p == (x, y)).unwrap();
    let bottom_a = b.edge("a_bottom", v(0, 0), v(1, 0), 1.0);
    let left_a = b.edge("a_left", v(0, 0), v(0, 1), 1.0);
    b.edge("a_top", v(0, 1), v(1, 1), 1.0);
    b.edge("a_right", v(1, 0), v(1, 1), 1.0);
    b.edge("b_bottom", v(1, 0), v(2, 0), 1.0);
    let right_b = b.edge("b_right", v(2, 0), v(2, 1), 1.0);
    b.edge("b_top", v(1, 1), v(2, 1), 1.0);
    b.edge("c_left", v(0, 1), v(0, 2), 1.0);
    let top_c = b.edge("c_top", v(0, 2), v(1, 2), 1.0);
    b.edge("c_right", v(1, 1), v(1, 2), 1.0);
    let sq = |x: f64, y: f64| vec![[x, y], [x + 1.0, y], [x + 1.0, y + 1.0], [x, y + 1.0]];
    b.face("A", vec![v(0, 0), v(1, 0), v(1, 1), v(0, 1)], sq(0.0, 0.0));
    b.face("B", vec![v(1, 0), v(2, 0), v(2, 1), v(1, 1)], sq(1.0, 0.0));
    b.face("C", vec![v(0, 1), v(1, 1), v(1, 2), v(0, 2)], sq(0.0, 1.0));
    let deck = Deck {
        group: GroupModel::free(2),
        rules: vec![
            GlueRule { from: CellRef::Edge(top_c), generator: 2, to: CellRef::Edge(bottom_a) },
            GlueRule { from: CellRef::Edge(right_b), generator: 1, to: CellRef::Edge(left_a) },
        ],
    };
    b.finish(2, Some(deck))
}

/// A single vertex at the origin of the free group's Cayley graph: unit
/// edges to the neighbours along each generator.
pub fn free_graph_cell(rank: usize) -> Complex {
    let mut b = Builder::new();
    let o = b.vertex("o");
    let mut rules = Vec::new();
    for i in 1..=rank {
        let w = b.vertex(format!("n{i}"));
        b.edge(format!("g{i}"), o, w, 1.0);
        rules.push(GlueRule { from: CellRef::Vertex(w), generator: i as i32, to: CellRef::Vertex(o) });
    }
    b.finish(1, Some(Deck { group: GroupModel::free(rank), rules }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_shapes() {
        assert_eq!(star(5).edges().len(), 5);
        assert_eq!(two_star(2, 3).edges().len(), 6);
        assert!((circle().total_measure() - 1.0).abs() < 1e-15);
        assert_eq!(square_grid(2, 2).vertices().len(), 9);
        assert!((path(3.0, 3).total_measure() - 3.0).abs() < 1e-15);
        assert_eq!(l_complex().edges().len(), 10);
    }
}
