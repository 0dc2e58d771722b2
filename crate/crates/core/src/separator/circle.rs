use rand::Rng;

use super::{SeparatorParams, Separation};
use crate::error::{Error, Result};
use crate::geom::{density_estimate, GeomObject, Point, Shape};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

#[derive(Clone, Debug)]
pub struct CircleSeparator {
    pub circle: Circle,
    pub separation: Separation,
    /// Rejected attempts before this one was accepted.
    pub retries: usize,
    pub rho: usize,
}

/// Keeps objects that merely come close to the circle out of both sides, so
/// that an inside and an outside object never pass the tolerant
/// intersection test.
const MARGIN: f64 = 1e-7;

fn farthest(o: &GeomObject, c: Point) -> f64 {
    match o.shape {
        Shape::Disk { center, radius } => center.dist(c) + radius,
        Shape::Box { lo, hi } => {
            let dx = (c.x - lo.x).abs().max((c.x - hi.x).abs());
            let dy = (c.y - lo.y).abs().max((c.y - hi.y).abs());
            dx.hypot(dy)
        }
    }
}

fn classify(objects: &[GeomObject], circle: Circle) -> Separation {
    let mut s = Separation::default();
    let r = circle.radius;
    for (i, o) in objects.iter().enumerate() {
        if farthest(o, circle.center) < r * (1.0 - MARGIN) {
            s.x.push(i);
        } else if o.distance_to(circle.center) > r * (1.0 + MARGIN) {
            s.y.push(i);
        } else {
            s.z.push(i);
        }
    }
    s
}

/// Random circle separator. Each attempt samples candidate centers among the
/// anchors, keeps the one whose `ceil(n/20)`-th nearest other anchor is
/// closest,
/// and scales that radius by a uniform factor in `[1, 2]`. Objects strictly
/// inside form `x`, strictly outside `y`, the rest `z`.
///
/// `rho` defaults to [`density_estimate`] of `objects`.
pub fn circle_separator<R: Rng + ?Sized>(
    objects: &[GeomObject],
    rho: Option<usize>,
    params: &SeparatorParams,
    rng: &mut R,
) -> Result<CircleSeparator> {
    let n = objects.len();
    let rho = rho.unwrap_or_else(|| density_estimate(objects)).max(1);
    if n <= params.leaf_cap(rho) {
        return Err(Error::InvalidParams(format!(
            "separator requested for {n} objects, at most the leaf capacity {}",
            params.leaf_cap(rho)
        )));
    }
    let anchors: Vec<Point> = objects.iter().map(|o| o.anchor()).collect();
    let kth = n.div_ceil(20).max(1);
    let z_cap = params.c * ((rho * n) as f64).sqrt();
    let side_cap = params.alpha * n as f64;
    let mut dists = vec![0.0f64; n];
    for attempt in 0..params.max_retries {
        let mut best: Option<(f64, Point)> = None;
        for _ in 0..params.candidates {
            let c = anchors[rng.gen_range(0..n)];
            for (d, a) in dists.iter_mut().zip(&anchors) {
                *d = a.dist(c);
            }
            // The sampled anchor itself sits at distance zero; rank the others.
            let (_, r0, _) = dists.select_nth_unstable_by(kth.min(n - 1), |a, b| a.total_cmp(b));
            let r0 = *r0;
            if best.is_none_or(|(br, _)| r0 < br) {
                best = Some((r0, c));
            }
        }
        let (r0, center) = best.expect("at least one candidate");
        let scale: f64 = rng.gen_range(1.0..=2.0);
        let circle = Circle {
            center,
            radius: (r0 * scale).max(f64::MIN_POSITIVE),
        };
        let sep = classify(objects, circle);
        let ok = (sep.z.len() as f64) <= z_cap
            && ((sep.x.len() + sep.z.len()) as f64) <= side_cap
            && ((sep.y.len() + sep.z.len()) as f64) <= side_cap;
        if ok {
            return Ok(CircleSeparator {
                circle,
                separation: sep,
                retries: attempt,
                rho,
            });
        }
    }
    Err(Error::SeparatorNotFound(params.max_retries))
}
