use super::index::RingIndex;
use super::polygon::{is_simple, signed_area, Location, Outline};
use super::{GeometryError, Point2};

/// Miter displacement never exceeds this multiple of the offset distance.
pub const MITER_LIMIT: f64 = 4.0;

/// Push every vertex outward by `b` along the bisector of its two edge
/// normals (miter join, capped at `4 b`).
pub fn offset_outline(outline: &Outline, b: f64) -> Result<Outline, GeometryError> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(GeometryError::InvalidParameter(format!(
            "offset must be positive and finite, got {b}"
        )));
    }
    let v = outline.vertices();
    let n = v.len();
    let out: Vec<Point2> = (0..n)
        .map(|i| {
            let prev = v[(i + n - 1) % n];
            let cur = v[i];
            let next = v[(i + 1) % n];
            let e1 = (cur - prev).normalized().unwrap_or_default();
            let e2 = (next - cur).normalized().unwrap_or_default();
            // outward normals of a CCW ring point to the right of each edge
            let n1 = -e1.perp();
            let n2 = -e2.perp();
            let (dir, len) = match (n1 + n2).normalized() {
                Some(m) => {
                    // cosine of the half angle between the two normals
                    let c = m.dot(n1);
                    let len = if c > 0.0 { b / c } else { f64::INFINITY };
                    (m, len.min(MITER_LIMIT * b))
                }
                // hairpin: continue along the incoming edge
                None => (e1, MITER_LIMIT * b),
            };
            cur + dir * len
        })
        .collect();
    if !is_simple(&out) || signed_area(&out) <= 0.0 {
        return Err(GeometryError::OffsetSelfIntersection { offset: b });
    }
    let idx = RingIndex::new(&out);
    if v.iter().any(|&p| idx.locate(p) != Location::Inside) {
        return Err(GeometryError::OffsetSelfIntersection { offset: b });
    }
    Ok(Outline::from_ccw_unchecked(out))
}
