//! Transfer between a periodic complex and its deck group: distance
//! constants, nets, averaging and smoothing maps, and spectral comparisons.

pub mod compare;
pub mod distance;
pub mod large_time;
pub mod net;
pub mod unity;

pub use compare::{eigenvalue_comparison, smoothing_audits, EigenComparison, SplitRow, TraceRow};
pub use distance::{audit_distances, distance_constants, DimensionFactor, DistanceAudit, DistanceConstants};
pub use large_time::{
    dirichlet_gaps, large_time_compare, nonamenable_link, validity_horizon, GapReport, LargeTimeReport, LinkReport,
    RatioRow,
};
pub use net::{build_net, diameter, group_average, Net};
pub use unity::{gradient_audit, norm_audit, transfer_constants, GradAudit, NormAudit, PartitionOfUnity, TransferConstants};

use crate::complex::{Complex, DistanceField, OrbitLabels, PointRef};
use crate::error::{Error, Result};
use crate::spectral::DiscreteOperator;
use crate::stochastic::{Elem, GroupModel};

/// A truncated periodic complex, its mesh, and the distance from every
/// group point to every node. Group points are the copies of vertex 0 of
/// the fundamental domain.
pub struct Lattice {
    pub y: Complex,
    pub x: Complex,
    pub mesh: DiscreteOperator,
    anchor_dist: Vec<Vec<f64>>,
}

impl Lattice {
    pub fn build(y: &Complex, radius: usize, h: f64) -> Result<Lattice> {
        let x = y.truncate(radius)?;
        let mesh = DiscreteOperator::build(&x, h)?;
        let o = x.orbits().expect("truncation carries orbits");
        let mut anchor_dist = Vec::with_capacity(o.elements.len());
        for gi in 0..o.elements.len() {
            let field = DistanceField::new(&x, o.copy_of(PointRef::Vertex(0), gi), h / 2.0)?;
            anchor_dist.push(mesh.points.iter().map(|&p| field.to(p)).collect());
        }
        Ok(Lattice { y: y.clone(), x, mesh, anchor_dist })
    }

    /// Smallest truncation in which every group point within `reach` of a
    /// core element is strictly inside the word ball.
    pub fn around(y: &Complex, core: &[Elem], reach: f64, h: f64) -> Result<(Lattice, Vec<usize>)> {
        let group = &y.deck().ok_or_else(|| Error::Invalid("fundamental domain carries no deck group".into()))?.group;
        let inner = core.iter().map(|g| group.word_length(g)).max().ok_or(Error::EmptyDomain)?;
        for radius in inner + 1..=inner + MAX_MARGIN {
            let lat = Lattice::build(y, radius, h)?;
            let idx: Vec<usize> = core
                .iter()
                .map(|g| lat.orbits().element_index(g).expect("core inside the ball"))
                .collect();
            let shell_clear = (0..lat.len())
                .filter(|&hi| lat.word_length(hi) == radius)
                .all(|hi| idx.iter().all(|&gi| lat.anchor_distance(gi, hi) >= reach));
            if shell_clear {
                return Ok((lat, idx));
            }
        }
        Err(Error::Truncation(format!("no word ball up to radius {} clears reach {reach}", inner + MAX_MARGIN)))
    }

    pub fn orbits(&self) -> &OrbitLabels {
        self.x.orbits().expect("truncation carries orbits")
    }

    pub fn group(&self) -> &GroupModel {
        &self.orbits().group
    }

    /// Number of group elements in the truncation.
    pub fn len(&self) -> usize {
        self.anchor_dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchor_dist.is_empty()
    }

    pub fn word_length(&self, gi: usize) -> usize {
        self.group().word_length(&self.orbits().elements[gi])
    }

    pub fn anchor(&self, gi: usize) -> PointRef {
        self.orbits().copy_of(PointRef::Vertex(0), gi)
    }

    /// Node sitting on the group point `gi` (vertices are the first nodes).
    pub fn anchor_node(&self, gi: usize) -> usize {
        match self.anchor(gi) {
            PointRef::Vertex(v) => v,
            _ => unreachable!(),
        }
    }

    /// Distance from group point `gi` to every node.
    pub fn anchor_distances(&self, gi: usize) -> &[f64] {
        &self.anchor_dist[gi]
    }

    pub fn anchor_distance(&self, gi: usize, hi: usize) -> f64 {
        self.anchor_dist[gi][self.anchor_node(hi)]
    }

    /// Nodes on cells whose gluing partner was cut away.
    pub fn cut_nodes(&self) -> Vec<bool> {
        let o = self.orbits();
        self.mesh.points.iter().map(|&p| o.on_cut(&self.x, p)).collect()
    }
}

const MAX_MARGIN: usize = 8;

/// The copy of a fundamental-domain point in element `gi` of `x`.
pub(crate) fn copy_point(y: &Complex, x: &Complex, p: PointRef, gi: usize) -> PointRef {
    x.orbits().expect("truncation carries orbits").copy_of(y.canonical(p), gi)
}
