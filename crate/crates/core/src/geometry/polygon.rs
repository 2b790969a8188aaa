use super::{BBox, GeometryError, Point2};
use serde::{Deserialize, Serialize};

/// Relative tolerance for boundary detection, scaled by the bounding-box diagonal.
pub const BOUNDARY_EPS: f64 = 1e-12;

/// Where a point lies with respect to a polygon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    Inside,
    Boundary,
    Outside,
}

impl Location {
    /// Boundary hits count as inside.
    pub fn is_covered(self) -> bool {
        self != Location::Outside
    }
}

/// Twice the signed area of triangle (a, b, c); positive when counter-clockwise.
pub fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

/// Signed shoelace area; positive for counter-clockwise rings.
pub fn signed_area(ring: &[Point2]) -> f64 {
    let n = ring.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    0.5 * acc
}

fn on_segment(a: Point2, b: Point2, p: Point2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test: touching endpoints and collinear overlap count.
pub fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// Strict crossing of the interiors of two segments.
pub fn segments_cross(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Distance from `p` to the closed segment `a`-`b`.
pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

/// Even-odd location of `p` in `ring`, with an absolute boundary tolerance.
pub fn locate_in_ring(p: Point2, ring: &[Point2], eps: f64) -> Location {
    let n = ring.len();
    let mut inside = false;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        if point_segment_distance(p, a, b) <= eps {
            return Location::Boundary;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    if inside {
        Location::Inside
    } else {
        Location::Outside
    }
}

/// True when no two non-adjacent edges of the closed ring intersect and no
/// adjacent pair folds back over itself.
pub fn is_simple(ring: &[Point2]) -> bool {
    let n = ring.len();
    if n < 3 {
        return false;
    }
    let edge = |i: usize| (ring[i], ring[(i + 1) % n]);
    for i in 0..n {
        let (a, b) = edge(i);
        if a == b {
            return false;
        }
    }
    // sweep over edges ordered by min x
    let mut order: Vec<usize> = (0..n).collect();
    let min_x = |i: usize| {
        let (a, b) = edge(i);
        a.x.min(b.x)
    };
    order.sort_by(|&i, &j| min_x(i).total_cmp(&min_x(j)).then(i.cmp(&j)));
    for (oi, &i) in order.iter().enumerate() {
        let (a, b) = edge(i);
        let max_x = a.x.max(b.x);
        let (lo_y, hi_y) = (a.y.min(b.y), a.y.max(b.y));
        for &j in &order[oi + 1..] {
            let (c, d) = edge(j);
            if c.x.min(d.x) > max_x {
                break;
            }
            if c.y.min(d.y) > hi_y || c.y.max(d.y) < lo_y {
                continue;
            }
            let adjacent = (i + 1) % n == j || (j + 1) % n == i;
            if adjacent {
                if n == 3 {
                    continue;
                }
                // shared vertex; reject only collinear fold-back
                let (shared, p, q) = if (i + 1) % n == j {
                    (b, a, d)
                } else {
                    (a, b, c)
                };
                if orient(p, shared, q) == 0.0 && (p - shared).dot(q - shared) > 0.0 {
                    return false;
                }
                continue;
            }
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Simple counter-clockwise polygon with an implicit closing edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outline {
    vertices: Vec<Point2>,
}

impl Outline {
    /// Validate a vertex ring: drops repeated and closing vertices, checks
    /// simplicity and re-orients to counter-clockwise.
    pub fn new(vertices: Vec<Point2>) -> Result<Outline, GeometryError> {
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let mut ring: Vec<Point2> = Vec::with_capacity(vertices.len());
        for p in vertices {
            if ring.last() != Some(&p) {
                ring.push(p);
            }
        }
        while ring.len() > 1 && ring.first() == ring.last() {
            ring.pop();
        }
        if ring.len() < 3 {
            return Err(GeometryError::TooFewVertices(ring.len()));
        }
        let area = signed_area(&ring);
        if area == 0.0 || !is_simple(&ring) {
            return Err(GeometryError::SelfIntersectingOutline);
        }
        if area < 0.0 {
            ring.reverse();
        }
        Ok(Outline { vertices: ring })
    }

    /// Caller guarantees a simple CCW ring.
    pub(crate) fn from_ccw_unchecked(vertices: Vec<Point2>) -> Outline {
        debug_assert!(vertices.len() >= 3);
        Outline { vertices }
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn bbox(&self) -> BBox {
        BBox::of(&self.vertices).expect("outline has vertices")
    }

    pub fn signed_area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.distance(b)).sum()
    }

    /// Insert evenly spaced vertices so no edge is longer than `max_spacing`.
    /// Original vertices are kept in place.
    pub fn densified(&self, max_spacing: f64) -> Outline {
        if !(max_spacing > 0.0) {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.vertices.len());
        for (a, b) in self.edges() {
            out.push(a);
            let pieces = (a.distance(b) / max_spacing).ceil() as usize;
            for j in 1..pieces {
                out.push(a.lerp(b, j as f64 / pieces as f64));
            }
        }
        Outline { vertices: out }
    }
}

/// Location of `p` relative to `poly` (even-odd rule, boundary within
/// `1e-12` of the bounding-box diagonal).
pub fn point_in_polygon(p: Point2, poly: &Outline) -> Location {
    let eps = BOUNDARY_EPS * poly.bbox().diagonal();
    locate_in_ring(p, poly.vertices(), eps)
}

/// Absolute shoelace area.
pub fn polygon_area(poly: &Outline) -> f64 {
    poly.signed_area().abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Outline {
        Outline::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn square_locations() {
        let sq = square();
        assert_eq!(
            point_in_polygon(Point2::new(0.5, 0.5), &sq),
            Location::Inside
        );
        assert_eq!(
            point_in_polygon(Point2::new(1.0, 0.5), &sq),
            Location::Boundary
        );
        assert_eq!(
            point_in_polygon(Point2::new(1.5, 0.5), &sq),
            Location::Outside
        );
        assert_eq!(
            point_in_polygon(Point2::new(0.0, 0.0), &sq),
            Location::Boundary
        );
    }

    #[test]
    fn areas() {
        assert_eq!(polygon_area(&square()), 1.0);
        let tri = Outline::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(0.0, 2.0),
        ])
        .unwrap();
        assert_eq!(polygon_area(&tri), 2.0);
    }

    #[test]
    fn cw_ring_is_reoriented() {
        let o = Outline::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 0.0),
        ])
        .unwrap();
        assert_eq!(o.len(), 4);
        assert!(o.signed_area() > 0.0);
    }

    #[test]
    fn bow_tie_rejected() {
        let r = Outline::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ]);
        assert_eq!(r, Err(GeometryError::SelfIntersectingOutline));
    }

    #[test]
    fn too_few_vertices() {
        let r = Outline::new(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]);
        assert_eq!(r, Err(GeometryError::TooFewVertices(2)));
    }

    #[test]
    fn fold_back_is_not_simple() {
        let ring = [
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
        ];
        assert!(!is_simple(&ring));
    }

    #[test]
    fn densify_keeps_vertices_and_bounds_spacing() {
        let d = square().densified(0.3);
        assert_eq!(d.len(), 16);
        assert!(d.edges().all(|(a, b)| a.distance(b) <= 0.3 + 1e-12));
        assert!((polygon_area(&d) - 1.0).abs() < 1e-12);
    }
}
