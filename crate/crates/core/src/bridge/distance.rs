//! Comparison constants between the word metric of the deck group and the
//! intrinsic metric of the complex.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::copy_point;
use crate::complex::{Complex, DistanceField, GeometryBounds, PointRef};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct DimensionFactor {
    pub dimension: usize,
    /// √(2/(1 − cos α)).
    pub angle_term: f64,
    /// Largest (i−1)-skeleton distance between points of Y over the
    /// smallest vertex gap; `None` when the skeleton distance is undefined.
    pub ratio_term: Option<f64>,
    pub factor: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DistanceConstants {
    /// Largest 1-skeleton distance in Y between two of its vertices.
    pub c0: f64,
    pub c_xg: f64,
    /// Shortest 1-skeleton distance in X between distinct vertices of Y.
    pub vertex_gap: f64,
    pub factors: Vec<DimensionFactor>,
}

impl DistanceConstants {
    /// Fails if any factor had to drop an undefined distance ratio.
    pub fn strict(&self) -> Result<()> {
        match self.factors.iter().find(|f| f.ratio_term.is_none()) {
            Some(f) => Err(Error::IllDefinedTerm(format!(
                "factor {} needs a distance on the {}-skeleton",
                f.dimension,
                f.dimension - 1
            ))),
            None => Ok(()),
        }
    }
}

fn one_skeleton(x: &Complex) -> Result<Complex> {
    if x.dimension() == 1 {
        Ok(x.clone())
    } else {
        x.skeleton(1)
    }
}

/// Sample points on every edge of Y: endpoints and `SAMPLES_PER_EDGE - 1`
/// interior points.
fn edge_samples(y: &Complex) -> Vec<PointRef> {
    let mut out: Vec<PointRef> = y.vertex_skeleton();
    for (e, edge) in y.edges().iter().enumerate() {
        for k in 1..SAMPLES_PER_EDGE {
            out.push(PointRef::Edge { edge: e, offset: edge.length * k as f64 / SAMPLES_PER_EDGE as f64 });
        }
    }
    out
}

const SAMPLES_PER_EDGE: usize = 16;

/// C_0 from vertex pairs of Y and C_XG from the per-dimension product. The
/// dimension-1 factor would need a distance on the vertex set, which has no
/// path metric; it keeps only its angle term and is marked.
pub fn distance_constants(y: &Complex) -> Result<DistanceConstants> {
    let n = y.dimension();
    if n > 2 {
        return Err(Error::Invalid(format!("dimension {n} not supported")));
    }
    let nv = y.vertices().len();
    if nv < 2 {
        return Err(Error::Degenerate("fundamental domain needs two vertices".into()));
    }
    let y1 = one_skeleton(y)?;
    let mut c0: f64 = 0.0;
    for v in 0..nv {
        let field = DistanceField::new(&y1, PointRef::Vertex(v), 1.0)?;
        for w in 0..nv {
            let d = field.to_vertex(w);
            if !d.is_finite() {
                return Err(Error::Disconnected(format!("vertices {v} and {w} of Y")));
            }
            c0 = c0.max(d);
        }
    }

    let x = y.truncate(2)?;
    let x1 = one_skeleton(&x)?;
    let mut vertex_gap = f64::INFINITY;
    for v in 0..nv {
        let field = DistanceField::new(&x1, copy_point(y, &x1, PointRef::Vertex(v), 0), 1.0)?;
        for w in 0..nv {
            if w != v {
                vertex_gap = vertex_gap.min(field.to(copy_point(y, &x1, PointRef::Vertex(w), 0)));
            }
        }
    }
    if !(vertex_gap > 0.0) {
        return Err(Error::Degenerate("two vertices of Y coincide in X".into()));
    }

    let alpha = GeometryBounds::of(y)?.alpha;
    let angle_term = (2.0 / (1.0 - alpha.cos())).sqrt();
    let mut factors = vec![DimensionFactor { dimension: 1, angle_term, ratio_term: None, factor: angle_term }];
    if n == 2 {
        let samples = edge_samples(y);
        let mut widest: f64 = 0.0;
        for &s in &samples {
            let field = DistanceField::new(&x1, copy_point(y, &x1, s, 0), 1.0)?;
            for &t in &samples {
                widest = widest.max(field.to(copy_point(y, &x1, t, 0)));
            }
        }
        let ratio = widest / vertex_gap;
        factors.push(DimensionFactor { dimension: 2, angle_term, ratio_term: Some(ratio), factor: angle_term.max(ratio) });
    }
    let c_xg = factors.iter().map(|f| f.factor).product::<f64>() / vertex_gap;
    Ok(DistanceConstants { c0, c_xg, vertex_gap, factors })
}

#[derive(Clone, Debug, Serialize)]
pub struct DistanceAudit {
    pub pairs: usize,
    /// max d_X / (C_0 d_G).
    pub worst_lower: f64,
    /// max d_G / (C_XG d_X).
    pub worst_upper: f64,
    pub pass: bool,
}

/// Check d_X/C_0 ≤ d_G ≤ C_XG·d_X on `pairs` random pairs of distinct
/// elements of the word ball of radius `radius`.
pub fn audit_distances(y: &Complex, c: &DistanceConstants, radius: usize, pairs: usize, seed: u64) -> Result<DistanceAudit> {
    let x = y.truncate(radius + 2)?;
    let o = x.orbits().expect("truncation carries orbits");
    let members: Vec<usize> = (0..o.elements.len()).filter(|&i| o.group.word_length(&o.elements[i]) <= radius).collect();
    if members.len() < 2 {
        return Err(Error::Invalid("word ball holds a single element".into()));
    }
    let res = if x.dimension() == 1 { 1.0 } else { FIELD_RESOLUTION };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fields: Vec<Option<DistanceField<'_>>> = (0..o.elements.len()).map(|_| None).collect();
    let mut audit = DistanceAudit { pairs: 0, worst_lower: 0.0, worst_upper: 0.0, pass: true };
    while audit.pairs < pairs {
        let a = members[rng.random_range(0..members.len())];
        let b = members[rng.random_range(0..members.len())];
        if a == b {
            continue;
        }
        if fields[a].is_none() {
            fields[a] = Some(DistanceField::new(&x, copy_point(y, &x, PointRef::Vertex(0), a), res)?);
        }
        let dx = fields[a].as_ref().unwrap().to(copy_point(y, &x, PointRef::Vertex(0), b));
        let dg = o.group.distance(&o.elements[a], &o.elements[b]) as f64;
        audit.worst_lower = audit.worst_lower.max(dx / (c.c0 * dg));
        audit.worst_upper = audit.worst_upper.max(dg / (c.c_xg * dx));
        audit.pairs += 1;
    }
    audit.pass = audit.worst_lower <= 1.0 + 1e-9 && audit.worst_upper <= 1.0 + 1e-9;
    Ok(audit)
}

const FIELD_RESOLUTION: f64 = 0.05;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::library;

    #[test]
    fn square_and_cayley_graph_constants() {
        let c = distance_constants(&library::z2_cell()).unwrap();
        assert!((c.c0 - 2.0).abs() < 1e-12);
        assert!((c.c_xg - 2.0 * 2f64.sqrt()).abs() < 1e-9, "{}", c.c_xg);
        assert!(matches!(c.strict(), Err(Error::IllDefinedTerm(_))));
        let c = distance_constants(&library::z1_cell()).unwrap();
        assert!((c.c0 - 1.0).abs() < 1e-12 && (c.c_xg - 1.0).abs() < 1e-12, "{} {}", c.c0, c.c_xg);
        // a star-shaped domain has two leaves two edges apart
        for y in [library::z2_graph_cell(), library::free_graph_cell(2)] {
            let c = distance_constants(&y).unwrap();
            assert!((c.c0 - 2.0).abs() < 1e-12 && (c.c_xg - 1.0).abs() < 1e-12, "{} {}", c.c0, c.c_xg);
        }
    }

    #[test]
    fn grid_pairs_satisfy_both_comparisons() {
        let y = library::z2_cell();
        let c = distance_constants(&y).unwrap();
        let a = audit_distances(&y, &c, 3, 1000, 5).unwrap();
        assert!(a.pass, "{a:?}");
        // ℓ¹ against Euclidean: the ratio √2 is attained on diagonals
        assert!(a.worst_upper > 0.49 && a.worst_upper < 0.51);
        let y = library::l_complex();
        let c = distance_constants(&y).unwrap();
        assert!(audit_distances(&y, &c, 2, 200, 1).unwrap().pass);
    }
}
