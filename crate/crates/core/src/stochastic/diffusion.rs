//! Brownian motion on metric graphs with uniform edge choice at vertices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::complex::{Complex, DistanceField, PointRef};
use crate::error::{Error, Result};

/// Position on an edge, measured from `ends[0]`.
#[derive(Clone, Copy, Debug)]
struct State {
    edge: usize,
    offset: f64,
}

fn check_step(x: &Complex, t: f64, dt: f64) -> Result<()> {
    if x.dimension() != 1 {
        return Err(Error::Invalid("diffusion sampling needs a 1-dimensional complex".into()));
    }
    let cap = (x.min_edge_length() / 10.0).powi(2);
    if !(dt > 0.0) || dt > cap * (1.0 + 1e-12) {
        return Err(Error::Step(format!("dt = {dt} exceeds (ℓ/10)² = {cap}")));
    }
    if t < dt {
        return Err(Error::Step(format!("t = {t} is shorter than one step {dt}")));
    }
    Ok(())
}

/// Walk `dist` away from vertex `v` along a uniformly chosen incident edge,
/// passing through further vertices as needed.
fn leave_vertex<R: Rng>(x: &Complex, mut v: usize, mut dist: f64, rng: &mut R) -> State {
    loop {
        let inc = x.vertex_edges(v);
        let e = inc[rng.random_range(0..inc.len())];
        let edge = &x.edges()[e];
        if dist <= edge.length {
            let offset = if edge.ends[0] == v { dist } else { edge.length - dist };
            return State { edge: e, offset };
        }
        dist -= edge.length;
        v = if edge.ends[0] == v { edge.ends[1] } else { edge.ends[0] };
    }
}

fn start_state<R: Rng>(x: &Complex, p: PointRef, rng: &mut R) -> State {
    match x.canonical(p) {
        PointRef::Vertex(v) => leave_vertex(x, v, 0.0, rng),
        PointRef::Edge { edge, offset } => State { edge, offset },
        PointRef::Face { .. } => unreachable!(),
    }
}

/// One increment of variance 2dt. When the increment stays on the edge, a
/// vertex visit in between is detected with the Brownian-bridge hitting
/// probability exp(-ab/dt) and the path is redistributed over the legs.
fn advance<R: Rng>(x: &Complex, s: State, dt: f64, rng: &mut R) -> State {
    let edge = &x.edges()[s.edge];
    let len = edge.length;
    let xi: f64 = rng.sample::<f64, _>(StandardNormal) * (2.0 * dt).sqrt();
    let y = s.offset + xi;
    if y < 0.0 {
        return leave_vertex(x, edge.ends[0], -y, rng);
    }
    if y > len {
        return leave_vertex(x, edge.ends[1], y - len, rng);
    }
    let u: f64 = rng.random();
    if u < (-s.offset * y / dt).exp() {
        return leave_vertex(x, edge.ends[0], y, rng);
    }
    let u: f64 = rng.random();
    if u < (-(len - s.offset) * (len - y) / dt).exp() {
        return leave_vertex(x, edge.ends[1], len - y, rng);
    }
    State { edge: s.edge, offset: y }
}

fn run<R: Rng>(x: &Complex, start: PointRef, t: f64, dt: f64, rng: &mut R) -> PointRef {
    let steps = (t / dt).ceil() as usize;
    let dt_eff = t / steps as f64;
    let mut s = start_state(x, start, rng);
    for _ in 0..steps {
        s = advance(x, s, dt_eff, rng);
    }
    x.canonical(PointRef::Edge { edge: s.edge, offset: s.offset })
}

/// Position at time t of the diffusion started at `start`.
pub fn simulate_path(x: &Complex, start: PointRef, t: f64, dt: f64, seed: u64) -> Result<PointRef> {
    check_step(x, t, dt)?;
    x.check_point(start)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(run(x, start, t, dt, &mut rng))
}

/// `n` independent endpoints from one seeded stream.
pub fn simulate_endpoints(x: &Complex, start: PointRef, t: f64, dt: f64, n: usize, seed: u64) -> Result<Vec<PointRef>> {
    check_step(x, t, dt)?;
    x.check_point(start)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| run(x, start, t, dt, &mut rng)).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_err: f64,
    pub hits: usize,
    pub samples: usize,
    pub ball_measure: f64,
}

/// Box-kernel density estimate of h_t(p, q) from `n` endpoints, with the
/// binomial standard error.
pub fn mc_kernel_estimate(
    x: &Complex,
    p: PointRef,
    q: PointRef,
    t: f64,
    n: usize,
    bandwidth: f64,
    dt: f64,
    seed: u64,
) -> Result<McEstimate> {
    check_step(x, t, dt)?;
    if bandwidth < 2.0 * dt.sqrt() {
        return Err(Error::Step(format!("bandwidth {bandwidth} below 2√dt = {}", 2.0 * dt.sqrt())));
    }
    if n < 1000 {
        return Err(Error::Invalid(format!("{n} samples; at least 1000 required")));
    }
    x.check_point(q)?;
    let field = DistanceField::new(x, q, bandwidth)?;
    let ball_measure = x.ball_volume_in(&field, bandwidth, bandwidth);
    let ends = simulate_endpoints(x, p, t, dt, n, seed)?;
    let hits = ends.iter().filter(|&&e| field.to(e) <= bandwidth).count();
    let frac = hits as f64 / n as f64;
    Ok(McEstimate {
        estimate: frac / ball_measure,
        std_err: (frac * (1.0 - frac) / n as f64).sqrt() / ball_measure,
        hits,
        samples: n,
        ball_measure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::library;

    #[test]
    fn deterministic_and_guarded() {
        let x = library::star(3);
        let c = PointRef::Vertex(0);
        let a = simulate_endpoints(&x, c, 0.05, 1e-4, 50, 7).unwrap();
        let b = simulate_endpoints(&x, c, 0.05, 1e-4, 50, 7).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
        assert!(matches!(simulate_path(&x, c, 0.05, 0.02, 1), Err(Error::Step(_))));
        assert!(matches!(simulate_path(&x, c, 1e-5, 1e-4, 1), Err(Error::Step(_))));
    }

    #[test]
    fn legs_are_uniform_from_center() {
        let x = library::star(3);
        let ends = simulate_endpoints(&x, PointRef::Vertex(0), 0.05, 1e-4, 6000, 11).unwrap();
        let mut counts = [0usize; 3];
        for e in ends {
            if let PointRef::Edge { edge, .. } = e {
                counts[edge] += 1;
            }
        }
        let n: usize = counts.iter().sum();
        let sd = (n as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for c in counts {
            assert!((c as f64 - n as f64 / 3.0).abs() < 3.0 * sd, "{counts:?}");
        }
    }

    #[test]
    fn single_step_is_centered() {
        let x = library::interval(1.0);
        let p = x.parse_point("e1:0.5").unwrap();
        let n = 4000;
        let ends = simulate_endpoints(&x, p, 1e-3, 1e-3, n, 3).unwrap();
        let xs: Vec<f64> = ends
            .iter()
            .map(|e| match *e {
                PointRef::Edge { offset, .. } => offset - 0.5,
                _ => unreachable!(),
            })
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        assert!(mean.abs() < 3.0 * (2e-3f64).sqrt() / (n as f64).sqrt());
    }
}
