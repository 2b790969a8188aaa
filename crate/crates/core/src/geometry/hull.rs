//! Convex hull (monotone chain) and the k-nearest-neighbours concave hull.
//!
//! The concave hull walks the boundary counter-clockwise starting from the
//! lowest point. At every step the `k` nearest unvisited points are ranked
//! by how far they turn clockwise from the direction we arrived from, and
//! the first one whose connecting edge does not cross the partial hull is
//! taken. A walk that gets stuck, self-intersects or leaves a point outside
//! is retried with `k + 1`; once `k` reaches the number of distinct points
//! the convex hull is returned instead.

use super::index::{PointGrid, RingIndex};
use super::polygon::{is_simple, orient, segments_intersect, signed_area, Outline};
use super::{GeometryError, Point2, PointSet};
use std::collections::HashSet;
use std::f64::consts::TAU;

/// Distinct points in first-appearance order.
pub(crate) fn dedup_points(points: &[Point2]) -> Vec<Point2> {
    let mut seen = HashSet::with_capacity(points.len());
    points
        .iter()
        .copied()
        .filter(|p| seen.insert((p.x.to_bits(), p.y.to_bits())))
        .collect()
}

fn validate(points: &PointSet) -> Result<Vec<Point2>, GeometryError> {
    if points.points.iter().any(|p| !p.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    let unique = dedup_points(&points.points);
    if unique.len() < 3 {
        return Err(GeometryError::TooFewPoints(unique.len()));
    }
    let a = unique[0];
    let far = unique
        .iter()
        .copied()
        .max_by(|p, q| p.distance_squared(a).total_cmp(&q.distance_squared(a)))
        .unwrap();
    if !unique.iter().any(|&p| orient(a, far, p) != 0.0) {
        return Err(GeometryError::CollinearInput);
    }
    Ok(unique)
}

/// Smallest convex polygon containing every point; collinear boundary points
/// are not emitted as vertices.
pub fn convex_hull(points: &PointSet) -> Result<Outline, GeometryError> {
    let unique = validate(points)?;
    Ok(Outline::from_ccw_unchecked(monotone_chain(unique)))
}

fn monotone_chain(mut pts: Vec<Point2>) -> Vec<Point2> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    let mut hull: Vec<Point2> = Vec::with_capacity(pts.len() + 1);
    for &p in &pts {
        while hull.len() >= 2 && orient(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len
            && orient(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Concave hull with automatic `k` escalation. `k` below 3 is raised to 3.
pub fn concave_hull(points: &PointSet, k: usize) -> Result<Outline, GeometryError> {
    let (ring, _) = escalate(validate(points)?, k);
    Ok(Outline::from_ccw_unchecked(ring))
}

/// Which `k` the escalation settles on, or `None` when it falls back to the
/// convex hull.
pub fn concave_hull_k(points: &PointSet, k: usize) -> Result<Option<usize>, GeometryError> {
    Ok(escalate(validate(points)?, k).1)
}

/// Concave hull together with the `k` it settled on.
pub fn concave_hull_with_k(
    points: &PointSet,
    k: usize,
) -> Result<(Outline, Option<usize>), GeometryError> {
    let (ring, k) = escalate(validate(points)?, k);
    Ok((Outline::from_ccw_unchecked(ring), k))
}

fn escalate(unique: Vec<Point2>, k: usize) -> (Vec<Point2>, Option<usize>) {
    let k = k.max(3);
    if unique.len() == 3 {
        let mut tri = unique;
        if signed_area(&tri) < 0.0 {
            tri.reverse();
        }
        return (tri, Some(k));
    }
    let grid = PointGrid::new(&unique);
    for k in k..unique.len() {
        if let Some(ring) = knn_walk(&unique, &grid, k) {
            if covers_all(&ring, &unique) {
                return (ring, Some(k));
            }
        }
    }
    (monotone_chain(unique), None)
}

fn covers_all(ring: &[Point2], points: &[Point2]) -> bool {
    let idx = RingIndex::new(ring);
    points.iter().all(|&p| idx.locate(p).is_covered())
}

/// Clockwise turn from `back` to `dir`, in `[0, 2pi)`.
fn clockwise_angle(back: Point2, dir: Point2) -> f64 {
    let ccw = back.cross(dir).atan2(back.dot(dir));
    let cw = -ccw;
    if cw < 0.0 {
        cw + TAU
    } else if cw >= TAU {
        cw - TAU
    } else {
        cw
    }
}

fn knn_walk(pts: &[Point2], grid: &PointGrid, k: usize) -> Option<Vec<Point2>> {
    let n = pts.len();
    let first = (0..n)
        .min_by(|&a, &b| {
            pts[a]
                .y
                .total_cmp(&pts[b].y)
                .then(pts[a].x.total_cmp(&pts[b].x))
        })
        .unwrap();
    let mut active = vec![true; n];
    active[first] = false;
    let mut remaining = n - 1;
    let mut hull: Vec<usize> = vec![first];
    let mut current = first;
    let mut back = Point2::new(-1.0, 0.0);
    let mut first_restored = false;

    loop {
        if hull.len() == 4 && !first_restored {
            active[first] = true;
            remaining += 1;
            first_restored = true;
        }
        if remaining == 0 {
            break;
        }
        let cur = pts[current];
        let mut cands: Vec<(f64, usize)> = grid
            .nearest(cur, k, &active)
            .into_iter()
            .map(|i| (clockwise_angle(back, pts[i] - cur), i))
            .collect();
        // widest clockwise turn first; nearer point on ties (stable, knn order)
        cands.sort_by(|a, b| b.0.total_cmp(&a.0));

        let chosen = cands.into_iter().map(|(_, i)| i).find(|&c| {
            let closing = c == first;
            if closing && hull.len() < 3 {
                return false;
            }
            let p = pts[c];
            let h = hull.len();
            if h >= 2 {
                // moving straight back along the previous edge
                let prev = pts[hull[h - 2]];
                if orient(prev, cur, p) == 0.0 && (p - cur).dot(prev - cur) > 0.0 {
                    return false;
                }
            }
            let last_checked = h.saturating_sub(2);
            let start = usize::from(closing);
            (start..last_checked)
                .all(|j| !segments_intersect(cur, p, pts[hull[j]], pts[hull[j + 1]]))
        })?;

        back = cur - pts[chosen];
        if chosen == first {
            break;
        }
        active[chosen] = false;
        remaining -= 1;
        hull.push(chosen);
        current = chosen;
    }

    if hull.len() < 3 {
        return None;
    }
    let mut ring: Vec<Point2> = hull.into_iter().map(|i| pts[i]).collect();
    if !is_simple(&ring) {
        return None;
    }
    let area = signed_area(&ring);
    if area == 0.0 {
        return None;
    }
    if area < 0.0 {
        ring.reverse();
    }
    Some(ring)
}
