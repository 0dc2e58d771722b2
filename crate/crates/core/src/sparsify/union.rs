use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geom::{GeomObject, Point, Shape, REL_EPS};

/// Boundary of a union of disks that share an interior point `q`, as the
/// upper envelope of the ray-exit distances from `q`. Piece `i` covers the
/// angles `[start_i, start_{i+1})`; the first starts at 0 and the last runs
/// to `2π`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnionBoundary {
    q: Point,
    disks: Vec<(Point, f64)>,
    /// `(start angle, disk index)`.
    pieces: Vec<(f64, usize)>,
}

fn angle_of(q: Point, p: Point) -> f64 {
    let a = (p.y - q.y).atan2(p.x - q.x);
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

/// Distance from `q` to where the ray at angle `theta` leaves the disk.
fn exit_distance(q: Point, (c, r): (Point, f64), theta: f64) -> f64 {
    let (dx, dy) = (c.x - q.x, c.y - q.y);
    let b = dx * theta.cos() + dy * theta.sin();
    let disc = r * r - (dx * dx + dy * dy) + b * b;
    b + disc.max(0.0).sqrt()
}

/// Angles from `q` of the intersection points of two circles.
fn crossing_angles(q: Point, (c1, r1): (Point, f64), (c2, r2): (Point, f64)) -> Vec<f64> {
    let (dx, dy) = (c2.x - c1.x, c2.y - c1.y);
    let d2 = dx * dx + dy * dy;
    let d = d2.sqrt();
    if d == 0.0 || d > r1 + r2 || d < (r1 - r2).abs() {
        return Vec::new();
    }
    let a = (r1 * r1 - r2 * r2 + d2) / (2.0 * d);
    let h = (r1 * r1 - a * a).max(0.0).sqrt();
    let (mx, my) = (c1.x + a * dx / d, c1.y + a * dy / d);
    let (ox, oy) = (-dy * h / d, dx * h / d);
    vec![
        angle_of(q, Point::new(mx + ox, my + oy)),
        angle_of(q, Point::new(mx - ox, my - oy)),
    ]
}

impl UnionBoundary {
    pub fn pierce_point(&self) -> Point {
        self.q
    }

    /// `(start angle, index of the source disk)` per arc.
    pub fn pieces(&self) -> &[(f64, usize)] {
        &self.pieces
    }

    pub fn arc_count(&self) -> usize {
        self.pieces.len()
    }

    fn piece_end(&self, i: usize) -> f64 {
        self.pieces.get(i + 1).map_or(TAU, |p| p.0)
    }

    fn single(q: Point, disks: &[(Point, f64)], i: usize) -> Self {
        UnionBoundary {
            q,
            disks: disks.to_vec(),
            pieces: vec![(0.0, i)],
        }
    }

    fn merge(q: Point, disks: &[(Point, f64)], a: &[(f64, usize)], b: &[(f64, usize)]) -> Vec<(f64, usize)> {
        let mut cuts: Vec<f64> = a.iter().chain(b).map(|p| p.0).collect();
        cuts.sort_unstable_by(f64::total_cmp);
        cuts.dedup();
        let owner = |env: &[(f64, usize)], theta: f64| {
            let k = env.partition_point(|p| p.0 <= theta);
            env[k.saturating_sub(1)].1
        };
        let mut out: Vec<(f64, usize)> = Vec::with_capacity(a.len() + b.len());
        for (k, &lo) in cuts.iter().enumerate() {
            let hi = cuts.get(k + 1).copied().unwrap_or(TAU);
            let (da, db) = (owner(a, lo), owner(b, lo));
            let mut stops = vec![lo];
            let mut inner: Vec<f64> = crossing_angles(q, disks[da], disks[db])
                .into_iter()
                .filter(|&t| t > lo && t < hi)
                .collect();
            inner.sort_unstable_by(f64::total_cmp);
            stops.extend(inner);
            for (s, &from) in stops.iter().enumerate() {
                let to = stops.get(s + 1).copied().unwrap_or(hi);
                let mid = 0.5 * (from + to);
                let (ea, eb) = (exit_distance(q, disks[da], mid), exit_distance(q, disks[db], mid));
                let win = if ea > eb || (ea == eb && da < db) { da } else { db };
                if out.last().is_none_or(|p| p.1 != win) {
                    out.push((from, win));
                }
            }
        }
        out
    }

    fn build(q: Point, disks: &[(Point, f64)], lo: usize, hi: usize) -> Vec<(f64, usize)> {
        if hi - lo == 1 {
            return vec![(0.0, lo)];
        }
        let mid = (lo + hi) / 2;
        let a = Self::build(q, disks, lo, mid);
        let b = Self::build(q, disks, mid, hi);
        Self::merge(q, disks, &a, &b)
    }

    /// Merges two boundaries around the same point into the boundary of the
    /// union of their disks.
    pub(crate) fn union_with(&self, other: &UnionBoundary) -> UnionBoundary {
        let offset = self.disks.len();
        let mut disks = self.disks.clone();
        disks.extend_from_slice(&other.disks);
        let b: Vec<(f64, usize)> = other.pieces.iter().map(|&(t, i)| (t, i + offset)).collect();
        let pieces = Self::merge(self.q, &disks, &self.pieces, &b);
        UnionBoundary { q: self.q, disks, pieces }
    }

    /// Membership of `x`, closed, with the same tolerance as
    /// [`GeomObject::contains_point`]. Locates the arc hit by the ray from
    /// the pierce point and tests its disk and two arcs to either side.
    pub fn contains(&self, x: Point) -> bool {
        self.contains_with(x, REL_EPS)
    }

    /// Membership with relative slack `rel` on squared radii.
    pub(crate) fn contains_with(&self, x: Point, rel: f64) -> bool {
        if x == self.q {
            return true;
        }
        let theta = angle_of(self.q, x);
        let k = self.pieces.partition_point(|p| p.0 <= theta).saturating_sub(1);
        let m = self.pieces.len() as isize;
        (-2..=2).any(|off: isize| {
            let i = (k as isize + off).rem_euclid(m) as usize;
            let (c, r) = self.disks[self.pieces[i].1];
            c.dist2(x) <= r * r * (1.0 + rel)
        })
    }

    /// Disk index covering angle `theta` on the boundary.
    pub fn owner(&self, theta: f64) -> usize {
        let t = theta.rem_euclid(TAU);
        let k = self.pieces.partition_point(|p| p.0 <= t).saturating_sub(1);
        self.pieces[k].1
    }

    /// Angular extent of arc `i`.
    pub fn arc_span(&self, i: usize) -> (f64, f64) {
        (self.pieces[i].0, self.piece_end(i))
    }
}

/// Boundary of the union of `disks`, all of which must contain `q` in their
/// interior. Disk indices in the result refer to positions in `disks`.
pub fn union_pierced(disks: &[GeomObject], q: Point) -> Result<UnionBoundary> {
    let mut circles = Vec::with_capacity(disks.len());
    for d in disks {
        match d.shape {
            Shape::Disk { center, radius } if center.dist2(q) < radius * radius * (1.0 - 1e-12) => {
                circles.push((center, radius));
            }
            _ => return Err(Error::PointNotInterior(d.id)),
        }
    }
    if circles.is_empty() {
        return Err(Error::InvalidParams("union of no disks".into()));
    }
    Ok(union_of_circles(q, &circles))
}

pub(crate) fn union_of_circles(q: Point, circles: &[(Point, f64)]) -> UnionBoundary {
    if circles.len() == 1 {
        return UnionBoundary::single(q, circles, 0);
    }
    let pieces = UnionBoundary::build(q, circles, 0, circles.len());
    UnionBoundary {
        q,
        disks: circles.to_vec(),
        pieces,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn one_and_duplicate() {
        let q = Point::new(0.0, 0.0);
        let u = union_pierced(&[GeomObject::disk(0, 0.5, 0.0, 1.0)], q).unwrap();
        assert_eq!(u.arc_count(), 1);
        let d = GeomObject::disk(0, 0.2, 0.1, 1.0);
        let u = union_pierced(&[d, GeomObject { id: 1, ..d }], q).unwrap();
        assert_eq!(u.arc_count(), 1);
        assert!(u.contains(Point::new(1.1, 0.1)));
        assert!(!u.contains(Point::new(1.3, 0.1)));
    }

    #[test]
    fn rejects_boundary_point() {
        let q = Point::new(0.0, 0.0);
        let r = union_pierced(&[GeomObject::disk(0, 1.0, 0.0, 2.0), GeomObject::disk(7, 1.0, 0.0, 1.0)], q);
        assert!(matches!(r, Err(Error::PointNotInterior(7))));
    }

    #[test]
    fn membership_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let q = Point::new(0.0, 0.0);
        for _ in 0..5 {
            let disks: Vec<_> = (0..50)
                .map(|i| {
                    let r = rng.gen_range(0.5..3.0);
                    let a = rng.gen_range(0.0..TAU);
                    let d = rng.gen_range(0.0..r * 0.95);
                    GeomObject::disk(i, d * a.cos(), d * a.sin(), r)
                })
                .collect();
            let u = union_pierced(&disks, q).unwrap();
            assert!(u.arc_count() <= 2 * disks.len() - 1);
            for _ in 0..2000 {
                let x = Point::new(rng.gen_range(-6.0..6.0), rng.gen_range(-6.0..6.0));
                assert_eq!(u.contains(x), disks.iter().any(|d| d.contains_point(x)));
            }
        }
    }
}
