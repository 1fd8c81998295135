//! δ-nets of the fundamental domain and the ball-averaging map onto the
//! deck group.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{copy_point, Lattice};
use crate::complex::{Complex, DistanceField, PointRef};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct Net {
    pub delta: f64,
    /// Centers γ_i as points of the fundamental domain.
    #[serde(skip)]
    pub centers: Vec<PointRef>,
    pub center_labels: Vec<String>,
    /// Largest number of balls B(gγ_i, δ) over a sampled point of X.
    pub c_ns: usize,
    /// Largest distance from a candidate point of Y to its nearest center.
    pub coverage: f64,
    /// Smallest distance between two centers (∞ for a single center).
    pub separation: f64,
    /// Word radius of the truncation used for the overlap count.
    pub overlap_radius: usize,
}

fn resolution(y: &Complex) -> f64 {
    if y.dimension() == 1 {
        1.0
    } else {
        y.min_edge_length() / 40.0
    }
}

/// Vertices first, then evenly spaced edge points and interior chart grid
/// points with spacing ℓ/m; m is even so edge midpoints are included.
fn candidates(y: &Complex, delta: f64) -> Vec<PointRef> {
    let ell = y.min_edge_length();
    let mut m = ((8.0 * ell / delta).ceil() as usize).max(8);
    m += m % 2;
    let step = ell / m as f64;
    let mut out = y.vertex_skeleton();
    for (e, edge) in y.edges().iter().enumerate() {
        let k = (edge.length / step).round().max(1.0) as usize;
        for j in 1..k {
            out.push(PointRef::Edge { edge: e, offset: edge.length * j as f64 / k as f64 });
        }
    }
    for (fi, f) in y.faces().iter().enumerate() {
        let (lo, hi) = f.chart.iter().fold(([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]), |(lo, hi), p| {
            ([lo[0].min(p[0]), lo[1].min(p[1])], [hi[0].max(p[0]), hi[1].max(p[1])])
        });
        let nx = ((hi[0] - lo[0]) / step).round() as usize;
        let ny = ((hi[1] - lo[1]) / step).round() as usize;
        for i in 1..nx {
            for j in 1..ny {
                let p = [lo[0] + i as f64 * step, lo[1] + j as f64 * step];
                if f.contains(p, -1e-9 * ell) {
                    out.push(PointRef::Face { face: fi, coords: p });
                }
            }
        }
    }
    out
}

/// Intrinsic diameter of a finite complex, over the candidate grid.
pub fn diameter(y: &Complex) -> Result<f64> {
    let pts = candidates(y, y.min_edge_length());
    let mut d: f64 = 0.0;
    for &p in &pts {
        let field = DistanceField::new(y, p, resolution(y))?;
        for &q in &pts {
            d = d.max(field.to(q));
        }
    }
    if !d.is_finite() {
        return Err(Error::Disconnected("fundamental domain".into()));
    }
    Ok(d)
}

/// Greedy net: vertices are taken in order when farther than δ from every
/// chosen center, then the farthest candidate is added while it lies more
/// than δ away. Centers are therefore δ apart and cover Y within δ.
pub fn build_net(y: &Complex, delta: f64) -> Result<Net> {
    let diam = diameter(y)?;
    if !(delta > 0.0) || delta > diam * (1.0 + 1e-9) {
        return Err(Error::Radius(format!("δ = {delta} outside (0, diam(Y) = {diam}]")));
    }
    let pts = candidates(y, delta);
    let res = resolution(y);
    let mut nearest = vec![f64::INFINITY; pts.len()];
    let mut centers: Vec<usize> = Vec::new();
    let mut separation = f64::INFINITY;
    let add = |c: usize, nearest: &mut Vec<f64>, centers: &mut Vec<usize>| -> Result<()> {
        let field = DistanceField::new(y, pts[c], res)?;
        for (k, &q) in pts.iter().enumerate() {
            nearest[k] = nearest[k].min(field.to(q));
        }
        centers.push(c);
        Ok(())
    };
    for v in 0..y.vertices().len() {
        if nearest[v] > delta * (1.0 + 1e-12) {
            separation = separation.min(nearest[v]);
            add(v, &mut nearest, &mut centers)?;
        }
    }
    loop {
        let (k, far) = nearest
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bk, bd), (k, &d)| if d > bd { (k, d) } else { (bk, bd) });
        if far <= delta {
            break;
        }
        separation = separation.min(far);
        add(k, &mut nearest, &mut centers)?;
    }
    let coverage = nearest.iter().cloned().fold(0.0, f64::max);
    let centers: Vec<PointRef> = centers.iter().map(|&c| y.canonical(pts[c])).collect();
    let (c_ns, overlap_radius) = overlap_count(y, &centers, delta, diam)?;
    Ok(Net {
        delta,
        center_labels: centers.iter().map(|&c| y.format_point(c)).collect(),
        centers,
        c_ns,
        coverage,
        separation,
        overlap_radius,
    })
}

/// Max over sampled x in Y of #{(g, i) : d(x, gγ_i) ≤ δ}. The truncation
/// grows until every vertex of the outermost copies is farther than
/// δ + diam(Y) + (largest cell) from the base copy's anchor.
fn overlap_count(y: &Complex, centers: &[PointRef], delta: f64, diam: f64) -> Result<(usize, usize)> {
    let cell = y.faces().iter().map(|f| f.diameter()).chain(y.edges().iter().map(|e| e.length)).fold(0.0, f64::max);
    let reach = delta + diam + cell;
    let mut samples: Vec<PointRef> = y.vertex_skeleton();
    samples.extend(y.edges().iter().enumerate().map(|(e, edge)| PointRef::Edge { edge: e, offset: edge.length / 2.0 }));
    samples.extend(y.faces().iter().enumerate().map(|(f, face)| PointRef::Face { face: f, coords: face.centroid() }));
    let mut rng = ChaCha8Rng::seed_from_u64(OVERLAP_SEED);
    samples.extend((0..OVERLAP_RANDOM).map(|_| y.random_point(&mut rng)));
    for radius in 1..=MAX_RADIUS {
        let x = y.truncate(radius)?;
        let o = x.orbits().expect("truncation carries orbits");
        let res = resolution(y);
        let anchor = DistanceField::new(&x, copy_point(y, &x, PointRef::Vertex(0), 0), res)?;
        let clear = (0..x.vertices().len())
            .filter(|&v| o.group.word_length(&o.elements[o.vertex[v].elem]) == radius)
            .all(|v| anchor.to_vertex(v) > reach);
        if !clear {
            continue;
        }
        let mut best = 0;
        for &s in &samples {
            let field = DistanceField::new(&x, copy_point(y, &x, s, 0), res)?;
            let mut count = 0;
            for gi in 0..o.elements.len() {
                count += centers
                    .iter()
                    .filter(|&&c| field.to(copy_point(y, &x, c, gi)) <= delta * (1.0 + 1e-9))
                    .count();
            }
            best = best.max(count);
        }
        return Ok((best, radius));
    }
    Err(Error::Truncation(format!("overlap count needs a word ball beyond radius {MAX_RADIUS}")))
}

const OVERLAP_SEED: u64 = 0x6e6574;
const OVERLAP_RANDOM: usize = 32;
const MAX_RADIUS: usize = 8;

/// ⌊f⌋(g, i): mass-weighted mean of the node vector `f` over the nodes of
/// B(gγ_i, δ), for each listed element index `elems` of the lattice.
pub fn group_average(lat: &Lattice, net: &Net, f: &[f64], elems: &[usize]) -> Result<Vec<Vec<f64>>> {
    let d = &lat.mesh;
    if f.len() != d.len() {
        return Err(Error::Invalid(format!("{} values for {} nodes", f.len(), d.len())));
    }
    let cut = lat.cut_nodes();
    let res = d.h / 2.0;
    let mut out = Vec::with_capacity(elems.len());
    for &gi in elems {
        let mut row = Vec::with_capacity(net.centers.len());
        for &c in &net.centers {
            let center = copy_point(&lat.y, &lat.x, c, gi);
            let field = DistanceField::new(&lat.x, center, res)?;
            let (mut num, mut den) = (0.0, 0.0);
            for (k, &p) in d.points.iter().enumerate() {
                let r = field.to(p);
                if r <= net.delta {
                    if cut[k] {
                        return Err(Error::Truncation(format!(
                            "ball around {} reaches the cut boundary",
                            lat.x.format_point(center)
                        )));
                    }
                    num += d.mass[k] * f[k];
                    den += d.mass[k];
                }
            }
            row.push(num / den);
        }
        out.push(row);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::library;

    #[test]
    fn square_net_matches_worked_example() {
        let y = library::z2_cell();
        let net = build_net(&y, 0.6).unwrap();
        assert_eq!(net.centers.len(), 5, "{:?}", net.center_labels);
        assert_eq!(net.c_ns, 10);
        assert!(net.coverage <= 0.6 && net.separation >= 0.6);
        let whole = build_net(&y, diameter(&y).unwrap()).unwrap();
        assert_eq!(whole.centers.len(), 1);
    }

    #[test]
    fn averages_on_the_line() {
        let y = library::z1_cell();
        let net = build_net(&y, 0.4).unwrap();
        let lat = Lattice::build(&y, 4, 1.0 / 20.0).unwrap();
        let o = lat.orbits();
        // coordinate of each node along the line
        let pos: Vec<f64> = lat
            .mesh
            .points
            .iter()
            .map(|&p| match p {
                PointRef::Vertex(v) => o.elements[o.vertex[v].elem][0] as f64 + o.vertex[v].base as f64,
                PointRef::Edge { edge, offset } => o.elements[o.edge[edge].elem][0] as f64 + offset,
                PointRef::Face { .. } => unreachable!(),
            })
            .collect();
        let inner: Vec<usize> = (0..lat.len()).filter(|&g| lat.word_length(g) <= 2).collect();
        let avg = group_average(&lat, &net, &pos, &inner).unwrap();
        let ones = group_average(&lat, &net, &vec![1.0; pos.len()], &inner).unwrap();
        for (k, &gi) in inner.iter().enumerate() {
            for (i, &c) in net.centers.iter().enumerate() {
                let center = copy_point(&y, &lat.x, c, gi);
                let (node, _) = lat.mesh.nearest_node(&lat.x, center).unwrap();
                assert!((avg[k][i] - pos[node]).abs() < 1e-9);
                assert!((ones[k][i] - 1.0).abs() < 1e-12);
            }
        }
        let all: Vec<usize> = (0..lat.len()).collect();
        assert!(matches!(group_average(&lat, &net, &pos, &all), Err(Error::Truncation(_))));
    }
}
