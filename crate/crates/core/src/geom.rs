//! Planar shapes, intersection predicates, grid piercing, and depth/density
//! measurement.
//!
//! All shapes are closed: boundary contact counts as intersection.

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack applied to squared-distance comparisons involving disks.
///
/// Exactly representable inputs (integer or dyadic centers and radii) compare
/// exactly; the slack only matters for coordinates like `sqrt(3)` that cannot
/// be represented, where a tangency would otherwise be lost to rounding.
pub const REL_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist2(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn dist(self, other: Point) -> f64 {
        self.dist2(other).sqrt()
    }
}

/// A point of the integer lattice. Ordered lexicographically (x, then y).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GridPoint {
    pub x: i64,
    pub y: i64,
}

impl GridPoint {
    pub const fn new(x: i64, y: i64) -> Self {
        GridPoint { x, y }
    }

    pub fn linf(self, other: GridPoint) -> i64 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    Disk { center: Point, radius: f64 },
    /// Axis-parallel box `[lo.x, hi.x] x [lo.y, hi.y]`.
    Box { lo: Point, hi: Point },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObjectKind {
    Disk,
    Box,
    /// A disk of radius exactly one; these admit the Minkowski-sum query
    /// structure used by the sparsifier.
    UnitDiskTranslate,
}

/// A shape together with its dense index in the owning family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeomObject {
    pub id: usize,
    pub shape: Shape,
}

#[inline]
fn disks_meet(c1: Point, r1: f64, c2: Point, r2: f64) -> bool {
    let s = r1 + r2;
    let s2 = s * s;
    c1.dist2(c2) <= s2 + s2 * REL_EPS
}

#[inline]
fn disk_box_meet(c: Point, r: f64, lo: Point, hi: Point) -> bool {
    let qx = c.x.clamp(lo.x, hi.x);
    let qy = c.y.clamp(lo.y, hi.y);
    let r2 = r * r;
    c.dist2(Point::new(qx, qy)) <= r2 + r2 * REL_EPS
}

impl GeomObject {
    pub fn disk(id: usize, cx: f64, cy: f64, r: f64) -> Self {
        GeomObject {
            id,
            shape: Shape::Disk {
                center: Point::new(cx, cy),
                radius: r,
            },
        }
    }

    pub fn unit_disk(id: usize, cx: f64, cy: f64) -> Self {
        Self::disk(id, cx, cy, 1.0)
    }

    pub fn rect(id: usize, x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        GeomObject {
            id,
            shape: Shape::Box {
                lo: Point::new(x0, y0),
                hi: Point::new(x1, y1),
            },
        }
    }

    pub fn kind(&self) -> ObjectKind {
        match self.shape {
            Shape::Disk { radius, .. } if radius == 1.0 => ObjectKind::UnitDiskTranslate,
            Shape::Disk { .. } => ObjectKind::Disk,
            Shape::Box { .. } => ObjectKind::Box,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.shape {
            Shape::Disk { center, radius } => {
                radius > 0.0 && radius.is_finite() && center.x.is_finite() && center.y.is_finite()
            }
            Shape::Box { lo, hi } => {
                lo.x < hi.x
                    && lo.y < hi.y
                    && lo.x.is_finite()
                    && lo.y.is_finite()
                    && hi.x.is_finite()
                    && hi.y.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidObject(self.id))
        }
    }

    /// Center of the disk or of the box. Used as the representative point of
    /// the object by the separator and the hierarchical grid.
    pub fn anchor(&self) -> Point {
        match self.shape {
            Shape::Disk { center, .. } => center,
            Shape::Box { lo, hi } => Point::new(0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y)),
        }
    }

    pub fn bbox(&self) -> (Point, Point) {
        match self.shape {
            Shape::Disk { center, radius } => (
                Point::new(center.x - radius, center.y - radius),
                Point::new(center.x + radius, center.y + radius),
            ),
            Shape::Box { lo, hi } => (lo, hi),
        }
    }

    pub fn contains_point(&self, p: Point) -> bool {
        match self.shape {
            Shape::Disk { center, radius } => {
                let r2 = radius * radius;
                center.dist2(p) <= r2 + r2 * REL_EPS
            }
            Shape::Box { lo, hi } => lo.x <= p.x && p.x <= hi.x && lo.y <= p.y && p.y <= hi.y,
        }
    }

    /// Euclidean distance from `p` to the object (zero inside).
    pub fn distance_to(&self, p: Point) -> f64 {
        match self.shape {
            Shape::Disk { center, radius } => (center.dist(p) - radius).max(0.0),
            Shape::Box { lo, hi } => {
                let dx = (lo.x - p.x).max(0.0).max(p.x - hi.x);
                let dy = (lo.y - p.y).max(0.0).max(p.y - hi.y);
                dx.hypot(dy)
            }
        }
    }

    /// Does the closed object meet the closed disk `disk(c, r)`?
    pub fn meets_disk(&self, c: Point, r: f64) -> bool {
        match self.shape {
            Shape::Disk { center, radius } => disks_meet(center, radius, c, r),
            Shape::Box { lo, hi } => disk_box_meet(c, r, lo, hi),
        }
    }

    /// Does the object contain an axis-parallel unit square and fit in an
    /// axis-parallel square of side `psi`?
    pub fn fits_psi(&self, psi: f64) -> bool {
        let slack = 1e-9;
        match self.shape {
            Shape::Disk { radius, .. } => {
                2.0 * radius * radius >= 1.0 - slack && 2.0 * radius <= psi + slack
            }
            Shape::Box { lo, hi } => {
                let w = hi.x - lo.x;
                let h = hi.y - lo.y;
                w >= 1.0 - slack && h >= 1.0 - slack && w <= psi + slack && h <= psi + slack
            }
        }
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        let shape = match self.shape {
            Shape::Disk { center, radius } => Shape::Disk {
                center: Point::new(center.x + dx, center.y + dy),
                radius,
            },
            Shape::Box { lo, hi } => Shape::Box {
                lo: Point::new(lo.x + dx, lo.y + dy),
                hi: Point::new(hi.x + dx, hi.y + dy),
            },
        };
        GeomObject { id: self.id, shape }
    }
}

/// Closed-set intersection test. Symmetric.
pub fn intersects(a: &GeomObject, b: &GeomObject) -> bool {
    match (a.shape, b.shape) {
        (
            Shape::Disk {
                center: c1,
                radius: r1,
            },
            Shape::Disk {
                center: c2,
                radius: r2,
            },
        ) => disks_meet(c1, r1, c2, r2),
        (Shape::Box { lo: l1, hi: h1 }, Shape::Box { lo: l2, hi: h2 }) => {
            l1.x <= h2.x && l2.x <= h1.x && l1.y <= h2.y && l2.y <= h1.y
        }
        (Shape::Disk { center, radius }, Shape::Box { lo, hi })
        | (Shape::Box { lo, hi }, Shape::Disk { center, radius }) => {
            disk_box_meet(center, radius, lo, hi)
        }
    }
}

pub fn diameter(a: &GeomObject) -> f64 {
    match a.shape {
        Shape::Disk { radius, .. } => 2.0 * radius,
        Shape::Box { lo, hi } => (hi.x - lo.x).hypot(hi.y - lo.y),
    }
}

/// All lattice points inside `a`, lexicographically ordered.
pub fn pierce_points(a: &GeomObject) -> Result<Vec<GridPoint>> {
    let (lo, hi) = a.bbox();
    let (x0, x1) = (lo.x.ceil() as i64, hi.x.floor() as i64);
    let (y0, y1) = (lo.y.ceil() as i64, hi.y.floor() as i64);
    let mut out = Vec::new();
    for x in x0..=x1 {
        for y in y0..=y1 {
            if a.contains_point(Point::new(x as f64, y as f64)) {
                out.push(GridPoint::new(x, y));
            }
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyPiercing(a.id));
    }
    Ok(out)
}

/// Lexicographically smallest lattice point inside `a`.
pub fn min_pierce_point(a: &GeomObject) -> Result<GridPoint> {
    let (lo, hi) = a.bbox();
    let (x0, x1) = (lo.x.ceil() as i64, hi.x.floor() as i64);
    let (y0, y1) = (lo.y.ceil() as i64, hi.y.floor() as i64);
    for x in x0..=x1 {
        for y in y0..=y1 {
            if a.contains_point(Point::new(x as f64, y as f64)) {
                return Ok(GridPoint::new(x, y));
            }
        }
    }
    Err(Error::EmptyPiercing(a.id))
}

/// Uniform bucket grid over object bounding boxes, for local point and
/// neighborhood queries.
pub(crate) struct BucketGrid {
    cell: f64,
    buckets: FxHashMap<(i64, i64), Vec<usize>>,
}

impl BucketGrid {
    pub(crate) fn new(objects: &[GeomObject]) -> Self {
        let max_extent = objects
            .iter()
            .map(|o| {
                let (lo, hi) = o.bbox();
                (hi.x - lo.x).max(hi.y - lo.y)
            })
            .fold(0.0f64, f64::max);
        let cell = if max_extent > 0.0 { max_extent } else { 1.0 };
        let mut buckets: FxHashMap<(i64, i64), Vec<usize>> = FxHashMap::default();
        for (i, o) in objects.iter().enumerate() {
            let (lo, hi) = o.bbox();
            let (cx0, cy0) = Self::key(cell, lo);
            let (cx1, cy1) = Self::key(cell, hi);
            for cx in cx0..=cx1 {
                for cy in cy0..=cy1 {
                    buckets.entry((cx, cy)).or_default().push(i);
                }
            }
        }
        BucketGrid { cell, buckets }
    }

    fn key(cell: f64, p: Point) -> (i64, i64) {
        ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64)
    }

    /// Indices of objects whose bounding box may contain `p`.
    pub(crate) fn at(&self, p: Point) -> &[usize] {
        self.buckets
            .get(&Self::key(self.cell, p))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Indices (deduplicated, ascending) of objects whose bounding box may be
    /// within distance `r` of `p`.
    pub(crate) fn near(&self, p: Point, r: f64) -> Vec<usize> {
        let (cx0, cy0) = Self::key(self.cell, Point::new(p.x - r, p.y - r));
        let (cx1, cy1) = Self::key(self.cell, Point::new(p.x + r, p.y + r));
        let mut out = Vec::new();
        for cx in cx0..=cx1 {
            for cy in cy0..=cy1 {
                if let Some(b) = self.buckets.get(&(cx, cy)) {
                    out.extend_from_slice(b);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn circle_circle_points(c1: Point, r1: f64, c2: Point, r2: f64) -> Vec<Point> {
    let d2 = c1.dist2(c2);
    let d = d2.sqrt();
    if d == 0.0 || d > r1 + r2 || d < (r1 - r2).abs() {
        return Vec::new();
    }
    let a = (r1 * r1 - r2 * r2 + d2) / (2.0 * d);
    let h = (r1 * r1 - a * a).max(0.0).sqrt();
    let ux = (c2.x - c1.x) / d;
    let uy = (c2.y - c1.y) / d;
    let mx = c1.x + a * ux;
    let my = c1.y + a * uy;
    if h == 0.0 {
        vec![Point::new(mx, my)]
    } else {
        vec![
            Point::new(mx - h * uy, my + h * ux),
            Point::new(mx + h * uy, my - h * ux),
        ]
    }
}

fn circle_segment_points(c: Point, r: f64, a: Point, b: Point) -> Vec<Point> {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let fx = a.x - c.x;
    let fy = a.y - c.y;
    let qa = dx * dx + dy * dy;
    let qb = 2.0 * (fx * dx + fy * dy);
    let qc = fx * fx + fy * fy - r * r;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 || qa == 0.0 {
        return Vec::new();
    }
    let s = disc.sqrt();
    [(-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa)]
        .into_iter()
        .filter(|t| (0.0..=1.0).contains(t))
        .map(|t| Point::new(a.x + t * dx, a.y + t * dy))
        .collect()
}

fn box_corners(lo: Point, hi: Point) -> [Point; 4] {
    [
        lo,
        Point::new(hi.x, lo.y),
        hi,
        Point::new(lo.x, hi.y),
    ]
}

/// Points where the boundaries of `a` and `b` meet. For two boxes this is the
/// corner set of their intersection rectangle.
fn boundary_crossings(a: &GeomObject, b: &GeomObject) -> Vec<Point> {
    match (a.shape, b.shape) {
        (
            Shape::Disk {
                center: c1,
                radius: r1,
            },
            Shape::Disk {
                center: c2,
                radius: r2,
            },
        ) => circle_circle_points(c1, r1, c2, r2),
        (Shape::Box { lo: l1, hi: h1 }, Shape::Box { lo: l2, hi: h2 }) => {
            let lo = Point::new(l1.x.max(l2.x), l1.y.max(l2.y));
            let hi = Point::new(h1.x.min(h2.x), h1.y.min(h2.y));
            if lo.x <= hi.x && lo.y <= hi.y {
                box_corners(lo, hi).to_vec()
            } else {
                Vec::new()
            }
        }
        (Shape::Disk { center, radius }, Shape::Box { lo, hi })
        | (Shape::Box { lo, hi }, Shape::Disk { center, radius }) => {
            let c = box_corners(lo, hi);
            (0..4)
                .flat_map(|i| circle_segment_points(center, radius, c[i], c[(i + 1) % 4]))
                .collect()
        }
    }
}

/// Unit inward normal of `a` at a boundary point `p` (zero if undefined).
fn inward_normal(a: &GeomObject, p: Point) -> (f64, f64) {
    match a.shape {
        Shape::Disk { center, .. } => {
            let dx = center.x - p.x;
            let dy = center.y - p.y;
            let n = dx.hypot(dy);
            if n == 0.0 {
                (0.0, 0.0)
            } else {
                (dx / n, dy / n)
            }
        }
        Shape::Box { lo, hi } => {
            let c = Point::new(0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y));
            let dx = (c.x - p.x).signum() * ((p.x - lo.x).abs().min((p.x - hi.x).abs()) < 1e-12) as i32 as f64;
            let dy = (c.y - p.y).signum() * ((p.y - lo.y).abs().min((p.y - hi.y).abs()) < 1e-12) as i32 as f64;
            let n = dx.hypot(dy);
            if n == 0.0 {
                (0.0, 0.0)
            } else {
                (dx / n, dy / n)
            }
        }
    }
}

fn intersecting_pairs(objects: &[GeomObject], grid: &BucketGrid) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for (i, a) in objects.iter().enumerate() {
        let (lo, hi) = a.bbox();
        let c = Point::new(0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y));
        let reach = 0.5 * (hi.x - lo.x).hypot(hi.y - lo.y);
        for j in grid.near(c, reach) {
            if j > i && intersects(a, &objects[j]) {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

fn cover_count(objects: &[GeomObject], grid: &BucketGrid, p: Point) -> usize {
    grid.at(p)
        .iter()
        .filter(|&&i| objects[i].contains_point(p))
        .count()
}

/// Maximum number of objects covering a single point.
///
/// The maximum is searched over a finite candidate set. For a family of
/// closed disks and boxes, a face of maximum depth in the arrangement is
/// either a whole object (then its anchor lies in that face, otherwise a
/// deeper face would sit inside it), or it has a vertex on its boundary. At
/// such a vertex the face lies locally inside every object whose boundary
/// passes through it, since stepping across a boundary from outside to
/// inside raises the count. Vertices are pairwise boundary crossings and box
/// corners, so the crossing points themselves (closed sets), the crossings
/// nudged inward along the sum of both inward normals, and the box corners
/// nudged inward cover every maximal face.
pub fn depth(objects: &[GeomObject]) -> usize {
    if objects.is_empty() {
        return 0;
    }
    let grid = BucketGrid::new(objects);
    let scale = objects.iter().map(diameter).fold(0.0f64, f64::max).max(1.0);
    let nudge = 1e-7 * scale;
    let mut best = 0usize;
    let mut probe = |p: Point| {
        best = best.max(cover_count(objects, &grid, p));
    };
    for o in objects {
        probe(o.anchor());
        if let Shape::Box { lo, hi } = o.shape {
            for c in box_corners(lo, hi) {
                probe(c);
                let (nx, ny) = inward_normal(o, c);
                probe(Point::new(c.x + nudge * nx, c.y + nudge * ny));
            }
        }
    }
    for (i, j) in intersecting_pairs(objects, &grid) {
        let (a, b) = (&objects[i], &objects[j]);
        for p in boundary_crossings(a, b) {
            probe(p);
            let (ax, ay) = inward_normal(a, p);
            let (bx, by) = inward_normal(b, p);
            let (sx, sy) = (ax + bx, ay + by);
            let n = sx.hypot(sy);
            if n > 0.0 {
                probe(Point::new(p.x + nudge * sx / n, p.y + nudge * sy / n));
            }
        }
    }
    best
}

/// For each candidate center, the largest number of objects `U` meeting a
/// disk `X` around it with `diam(U) >= diam(X)`, over radii drawn from
/// `{0} ∪ {diam(U)/2}`.
pub(crate) fn density_over_centers(
    objects: &[GeomObject],
    grid: &BucketGrid,
    centers: &[Point],
) -> usize {
    let max_half = objects.iter().map(diameter).fold(0.0f64, f64::max) * 0.5;
    let mut best = 0usize;
    let mut events: Vec<(f64, f64)> = Vec::new();
    for &c in centers {
        events.clear();
        for j in grid.near(c, max_half) {
            let o = &objects[j];
            let d = o.distance_to(c);
            let half = 0.5 * diameter(o);
            // `X = disk(c, r)` meets `o` iff r >= d; `o` is large enough iff r <= half.
            if d <= half || o.meets_disk(c, half) {
                events.push((d.min(half), half));
            }
        }
        // Evaluate at every right endpoint: moving r up to the nearest right
        // endpoint never loses an interval.
        for &(_, r) in events.iter() {
            let cnt = events
                .iter()
                .filter(|&&(lo, hi)| lo <= r && r <= hi)
                .count();
            best = best.max(cnt);
        }
    }
    best
}

fn density_candidates(objects: &[GeomObject], grid: &BucketGrid) -> Vec<Point> {
    let mut centers: Vec<Point> = objects.iter().map(|o| o.anchor()).collect();
    for (i, j) in intersecting_pairs(objects, grid) {
        centers.extend(boundary_crossings(&objects[i], &objects[j]));
    }
    centers
}

/// Lower-bound estimate of the density, restricting the test region to disks
/// centered at anchors and pairwise boundary crossings.
pub fn density_estimate(objects: &[GeomObject]) -> usize {
    if objects.is_empty() {
        return 0;
    }
    let grid = BucketGrid::new(objects);
    let centers = density_candidates(objects, &grid);
    density_over_centers(objects, &grid, &centers).max(1)
}

/// Density restricted to disks centered at anchors only. A coarser candidate
/// set than [`density_estimate`], hence never larger.
pub fn density_estimate_anchors(objects: &[GeomObject]) -> usize {
    if objects.is_empty() {
        return 0;
    }
    let grid = BucketGrid::new(objects);
    let centers: Vec<Point> = objects.iter().map(|o| o.anchor()).collect();
    density_over_centers(objects, &grid, &centers).max(1)
}

/// Exhaustive density over a richer finite family of test regions: every
/// candidate disk of [`density_estimate`], every object itself, and disks
/// centered at box corners. Quadratic and cubic pieces make it suitable only
/// for small families.
pub fn density_exhaustive(objects: &[GeomObject]) -> usize {
    if objects.is_empty() {
        return 0;
    }
    let grid = BucketGrid::new(objects);
    let mut centers = density_candidates(objects, &grid);
    for o in objects {
        if let Shape::Box { lo, hi } = o.shape {
            centers.extend(box_corners(lo, hi));
        }
    }
    let mut best = density_over_centers(objects, &grid, &centers);
    for x in objects {
        let dx = diameter(x);
        let cnt = objects
            .iter()
            .filter(|u| diameter(u) >= dx && intersects(u, x))
            .count();
        best = best.max(cnt);
    }
    best.max(1)
}

/// Family of objects as stored on disk.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub psi: f64,
    pub objects: Vec<GeomObject>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum ObjectRecord {
    Disk { cx: f64, cy: f64, r: f64 },
    Box { x0: f64, y0: f64, x1: f64, y1: f64 },
}

#[derive(Serialize, Deserialize)]
struct InstanceRecord {
    psi: f64,
    objects: Vec<ObjectRecord>,
}

impl Instance {
    pub fn new(psi: f64, objects: Vec<GeomObject>) -> Self {
        let objects = objects
            .into_iter()
            .enumerate()
            .map(|(i, o)| GeomObject { id: i, ..o })
            .collect();
        Instance { psi, objects }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rec: InstanceRecord = serde_json::from_str(s)?;
        if !(rec.psi >= 1.0) {
            return Err(Error::InvalidParams(format!("psi must be >= 1, got {}", rec.psi)));
        }
        let objects: Vec<GeomObject> = rec
            .objects
            .into_iter()
            .enumerate()
            .map(|(i, r)| match r {
                ObjectRecord::Disk { cx, cy, r } => GeomObject::disk(i, cx, cy, r),
                ObjectRecord::Box { x0, y0, x1, y1 } => GeomObject::rect(i, x0, y0, x1, y1),
            })
            .collect();
        for o in &objects {
            o.validate()?;
        }
        Ok(Instance {
            psi: rec.psi,
            objects,
        })
    }

    pub fn to_json(&self) -> String {
        let rec = InstanceRecord {
            psi: self.psi,
            objects: self
                .objects
                .iter()
                .map(|o| match o.shape {
                    Shape::Disk { center, radius } => ObjectRecord::Disk {
                        cx: center.x,
                        cy: center.y,
                        r: radius,
                    },
                    Shape::Box { lo, hi } => ObjectRecord::Box {
                        x0: lo.x,
                        y0: lo.y,
                        x1: hi.x,
                        y1: hi.y,
                    },
                })
                .collect(),
        };
        serde_json::to_string(&rec).expect("instance serializes")
    }

    /// Checks the sparsifier's size assumptions: every object contains an
    /// axis-parallel unit square and fits in a square of side `psi`.
    pub fn check_psi_bounds(&self) -> Result<()> {
        match self.objects.iter().find(|o| !o.fits_psi(self.psi)) {
            Some(o) => Err(Error::PsiBoundViolated {
                id: o.id,
                psi: self.psi,
            }),
            None => Ok(()),
        }
    }
}
