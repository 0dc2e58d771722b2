use crate::error::{Error, Result};
use crate::geom::{intersects, GeomObject, GridPoint, Point, Shape, REL_EPS};

use super::union::{union_of_circles, UnionBoundary};

/// A cluster `U_q` held for intersection queries under deletions.
///
/// Members are addressed by their local index in the slice the structure was
/// built from. `query` returns the smallest live index whose object meets the
/// probe, so every implementation answers identically.
pub trait ClusterQuery {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn query(&mut self, probe: &GeomObject) -> Option<usize>;

    fn delete(&mut self, i: usize);

    /// Restores every member deleted since the last rollback.
    fn rollback_all(&mut self);
}

/// Linear scan with a deletion mark per member and an undo log.
#[derive(Clone, Debug)]
pub struct NaiveQuery {
    members: Vec<GeomObject>,
    deleted: Vec<bool>,
    log: Vec<usize>,
}

impl NaiveQuery {
    pub fn new(members: &[GeomObject]) -> Self {
        NaiveQuery {
            members: members.to_vec(),
            deleted: vec![false; members.len()],
            log: Vec::new(),
        }
    }
}

impl ClusterQuery for NaiveQuery {
    fn len(&self) -> usize {
        self.members.len()
    }

    fn query(&mut self, probe: &GeomObject) -> Option<usize> {
        (0..self.members.len()).find(|&i| !self.deleted[i] && intersects(probe, &self.members[i]))
    }

    fn delete(&mut self, i: usize) {
        if !self.deleted[i] {
            self.deleted[i] = true;
            self.log.push(i);
        }
    }

    fn rollback_all(&mut self) {
        for i in self.log.drain(..) {
            self.deleted[i] = false;
        }
    }
}

/// Relative slack on the node regions, so that rounding in the envelope
/// never hides a member; leaves use the exact predicate.
const REGION_SLACK: f64 = 1e-6;

#[derive(Clone, Debug)]
struct Node {
    lo: usize,
    hi: usize,
    children: Option<(usize, usize)>,
    region: UnionBoundary,
}

/// Intersection queries with unit-disk probes against unit disks that share
/// a grid point `q`.
///
/// A unit probe centered at `x` meets member `i` exactly when `x` lies in
/// the radius-2 disk `W_i` around its center. All `W_i` contain `q` in their
/// interior, so the union over any index range is star-shaped around `q`.
/// A balanced tree over indices stores that union per node, and
/// [`UnitDiskQuery::query_from`] descends it to the smallest index `≥ a`
/// whose `W_i` holds `x`. Deleted members are skipped by searching again
/// just past them.
#[derive(Clone, Debug)]
pub struct UnitDiskQuery {
    centers: Vec<Point>,
    ids: Vec<usize>,
    nodes: Vec<Node>,
    root: Option<usize>,
    deleted: Vec<bool>,
    log: Vec<usize>,
}

fn unit_center(o: &GeomObject) -> Option<Point> {
    match o.shape {
        Shape::Disk { center, radius } if radius == 1.0 => Some(center),
        _ => None,
    }
}

fn in_expansion(c: Point, x: Point) -> bool {
    // Same comparison as the closed disk-disk test with radii summing to 2.
    c.dist2(x) <= 4.0 + 4.0 * REL_EPS
}

impl UnitDiskQuery {
    /// Fails with `InvalidObject` on a member that is not a unit disk and
    /// with `PointNotInterior` on one that does not contain `q`.
    pub fn new(members: &[GeomObject], q: GridPoint) -> Result<Self> {
        let qp = Point::new(q.x as f64, q.y as f64);
        let mut centers = Vec::with_capacity(members.len());
        for m in members {
            let c = unit_center(m).ok_or(Error::InvalidObject(m.id))?;
            if !m.contains_point(qp) {
                return Err(Error::PointNotInterior(m.id));
            }
            centers.push(c);
        }
        let mut s = UnitDiskQuery {
            ids: members.iter().map(|m| m.id).collect(),
            deleted: vec![false; centers.len()],
            centers,
            nodes: Vec::new(),
            root: None,
            log: Vec::new(),
        };
        if !s.centers.is_empty() {
            s.root = Some(s.build(qp, 0, s.centers.len()));
        }
        Ok(s)
    }

    fn build(&mut self, q: Point, lo: usize, hi: usize) -> usize {
        let (children, region) = if hi - lo == 1 {
            (None, union_of_circles(q, &[(self.centers[lo], 2.0)]))
        } else {
            let mid = (lo + hi) / 2;
            let l = self.build(q, lo, mid);
            let r = self.build(q, mid, hi);
            let region = self.nodes[l].region.union_with(&self.nodes[r].region);
            (Some((l, r)), region)
        };
        self.nodes.push(Node { lo, hi, children, region });
        self.nodes.len() - 1
    }

    /// Smallest index `i ≥ a` with `x ∈ W_i`, ignoring deletions.
    pub fn query_from(&self, x: Point, a: usize) -> Option<usize> {
        self.root.and_then(|r| self.find(r, x, a))
    }

    fn find(&self, t: usize, x: Point, a: usize) -> Option<usize> {
        let nd = &self.nodes[t];
        if nd.hi <= a || !nd.region.contains_with(x, REGION_SLACK) {
            return None;
        }
        match nd.children {
            None => in_expansion(self.centers[nd.lo], x).then_some(nd.lo),
            Some((l, r)) => self.find(l, x, a).or_else(|| self.find(r, x, a)),
        }
    }

    /// Object ids of the members, in index order.
    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    /// Total arc count over all node regions.
    pub fn region_arcs(&self) -> usize {
        self.nodes.iter().map(|n| n.region.arc_count()).sum()
    }
}

impl ClusterQuery for UnitDiskQuery {
    fn len(&self) -> usize {
        self.centers.len()
    }

    /// Panics if `probe` is not a unit disk.
    fn query(&mut self, probe: &GeomObject) -> Option<usize> {
        let x = unit_center(probe).expect("unit-disk structure takes unit-disk probes");
        let mut a = 0;
        while let Some(i) = self.query_from(x, a) {
            if !self.deleted[i] {
                return Some(i);
            }
            a = i + 1;
        }
        None
    }

    fn delete(&mut self, i: usize) {
        if !self.deleted[i] {
            self.deleted[i] = true;
            self.log.push(i);
        }
    }

    fn rollback_all(&mut self) {
        for i in self.log.drain(..) {
            self.deleted[i] = false;
        }
    }
}
