use super::polygon::{
    locate_in_ring, orient, point_segment_distance, segments_intersect, signed_area, Location,
    Outline,
};
use super::Point2;

/// Bridge notches whose mouth is narrower than `width`.
///
/// A chord between two vertices closer than `width` that runs through the
/// exterior cuts a pocket off the outside of the polygon. The pocket is
/// dropped, which adds its area. Chords are tried shortest first and the
/// scan restarts after every change.
pub fn close_notches(outline: &Outline, width: f64) -> Outline {
    if !(width > 0.0) {
        return outline.clone();
    }
    let mut ring: Vec<Point2> = outline.vertices().to_vec();
    'restart: loop {
        let m = ring.len();
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for i in 0..m {
            for j in i + 2..m {
                if i == 0 && j == m - 1 {
                    continue;
                }
                let d = ring[i].distance(ring[j]);
                if d < width {
                    pairs.push((d, i, j));
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        for (_, i, j) in pairs {
            if let Some(next) = bridge(&ring, i, j) {
                ring = next;
                continue 'restart;
            }
        }
        break;
    }
    Outline::new(ring).unwrap_or_else(|_| outline.clone())
}

fn bridge(ring: &[Point2], i: usize, j: usize) -> Option<Vec<Point2>> {
    let m = ring.len();
    let (a, b) = (ring[i], ring[j]);
    let mid = a.midpoint(b);
    if locate_in_ring(mid, ring, 0.0) != Location::Outside {
        return None;
    }
    let touches = (0..m).any(|k| {
        let l = (k + 1) % m;
        k != i && l != i && k != j && l != j && segments_intersect(a, b, ring[k], ring[l])
    });
    if touches {
        return None;
    }
    let pocket: Vec<Point2> = ring[i..=j].to_vec();
    let next: Vec<Point2> = if signed_area(&pocket) < 0.0 {
        ring[..=i].iter().chain(&ring[j..]).copied().collect()
    } else {
        ring[i..=j].to_vec()
    };
    (next.len() >= 3 && signed_area(&next) > signed_area(ring)).then_some(next)
}

/// Remove reflex vertices whose notch is shallower than `depth`.
///
/// Dropping a reflex vertex `v` between `a` and `c` adds the triangle
/// `(a, v, c)` to the polygon, so the result contains the input. A removal
/// is skipped when the new edge `a c` would touch any other edge. Passes
/// repeat until nothing changes.
pub fn fill_dents(outline: &Outline, depth: f64) -> Outline {
    if !(depth > 0.0) {
        return outline.clone();
    }
    let mut ring: Vec<Point2> = outline.vertices().to_vec();
    loop {
        let mut changed = false;
        let mut i = 0;
        while i < ring.len() && ring.len() > 3 {
            let m = ring.len();
            let a = ring[(i + m - 1) % m];
            let v = ring[i];
            let c = ring[(i + 1) % m];
            let reflex = orient(a, v, c) < 0.0;
            if reflex && point_segment_distance(v, a, c) < depth && clear_chord(&ring, i) {
                ring.remove(i);
                changed = true;
            } else {
                i += 1;
            }
        }
        if !changed {
            break;
        }
    }
    Outline::new(ring).unwrap_or_else(|_| outline.clone())
}

/// Round off reflex corners by corner cutting.
///
/// Each pass replaces every reflex vertex `v` by the two points a quarter of
/// the way towards its neighbours. The cut triangle lies outside the polygon,
/// so the polygon only grows. Cuts that would touch another edge are skipped.
pub fn round_reflex_corners(outline: &Outline, passes: usize) -> Outline {
    let mut ring: Vec<Point2> = outline.vertices().to_vec();
    for _ in 0..passes {
        let m = ring.len();
        let mut next = Vec::with_capacity(2 * m);
        let mut changed = false;
        for i in 0..m {
            let a = ring[(i + m - 1) % m];
            let v = ring[i];
            let c = ring[(i + 1) % m];
            if orient(a, v, c) < -REFLEX_EPS * a.distance(v) * v.distance(c) {
                let p = v.lerp(a, 0.25);
                let q = v.lerp(c, 0.25);
                if clear_segment(&ring, i, p, q) {
                    next.push(p);
                    next.push(q);
                    changed = true;
                    continue;
                }
            }
            next.push(v);
        }
        if !changed {
            break;
        }
        ring = next;
    }
    Outline::new(ring).unwrap_or_else(|_| outline.clone())
}

/// Sine of the smallest turn treated as a corner.
const REFLEX_EPS: f64 = 1e-3;

/// Whether segment `p q`, which replaces the corner at vertex `i`, misses
/// every edge other than the two at that corner.
fn clear_segment(ring: &[Point2], i: usize, p: Point2, q: Point2) -> bool {
    let m = ring.len();
    let ia = (i + m - 1) % m;
    (0..m).all(|j| j == ia || j == i || !segments_intersect(p, q, ring[j], ring[(j + 1) % m]))
}

/// Whether the chord that replaces vertex `i` misses every edge not incident
/// to its endpoints.
fn clear_chord(ring: &[Point2], i: usize) -> bool {
    let m = ring.len();
    let ia = (i + m - 1) % m;
    let ic = (i + 1) % m;
    let (a, c) = (ring[ia], ring[ic]);
    (0..m).all(|j| {
        let k = (j + 1) % m;
        if j == ia || j == i || k == ia || j == ic {
            return true;
        }
        !segments_intersect(a, c, ring[j], ring[k])
    })
}
