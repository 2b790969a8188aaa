//! Uniform-grid accelerators for neighbour queries and containment tests.

use super::polygon::{locate_in_ring, point_segment_distance, Location, BOUNDARY_EPS};
use super::{BBox, Point2};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Copy)]
struct GridFrame {
    origin: Point2,
    cell: f64,
    cols: usize,
    rows: usize,
}

impl GridFrame {
    fn new(bbox: BBox, target_cells: usize) -> GridFrame {
        let w = bbox.width().max(f64::MIN_POSITIVE);
        let h = bbox.height().max(f64::MIN_POSITIVE);
        let target = target_cells.max(1) as f64;
        let mut cell = (w * h / target).sqrt();
        if !(cell > 0.0) || !cell.is_finite() {
            cell = w.max(h).max(1e-300);
        }
        // degenerate thin boxes: keep the grid bounded
        cell = cell.max(w.max(h) / 4096.0);
        let cols = ((w / cell).floor() as usize + 1).max(1);
        let rows = ((h / cell).floor() as usize + 1).max(1);
        GridFrame {
            origin: bbox.min,
            cell,
            cols,
            rows,
        }
    }

    fn col(&self, x: f64) -> usize {
        (((x - self.origin.x) / self.cell).floor().max(0.0) as usize).min(self.cols - 1)
    }

    fn row(&self, y: f64) -> usize {
        (((y - self.origin.y) / self.cell).floor().max(0.0) as usize).min(self.rows - 1)
    }
}

#[derive(Debug, PartialEq)]
struct Candidate {
    dist2: f64,
    index: usize,
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist2
            .total_cmp(&other.dist2)
            .then(self.index.cmp(&other.index))
    }
}

/// Bucketed point set supporting k-nearest queries restricted to an active mask.
#[derive(Debug, Clone)]
pub struct PointGrid {
    frame: GridFrame,
    cells: Vec<Vec<usize>>,
    points: Vec<Point2>,
}

impl PointGrid {
    pub fn new(points: &[Point2]) -> PointGrid {
        let bbox = BBox::of(points).unwrap_or(BBox {
            min: Point2::default(),
            max: Point2::new(1.0, 1.0),
        });
        let frame = GridFrame::new(bbox, points.len() / 2 + 1);
        let mut cells = vec![Vec::new(); frame.cols * frame.rows];
        for (i, p) in points.iter().enumerate() {
            cells[frame.row(p.y) * frame.cols + frame.col(p.x)].push(i);
        }
        PointGrid {
            frame,
            cells,
            points: points.to_vec(),
        }
    }

    /// Up to `k` active points nearest to `q`, ordered by (distance, index).
    pub fn nearest(&self, q: Point2, k: usize, active: &[bool]) -> Vec<usize> {
        if k == 0 {
            return Vec::new();
        }
        let f = &self.frame;
        let qc = f.col(q.x) as isize;
        let qr = f.row(q.y) as isize;
        let mut heap: BinaryHeap<Candidate> = BinaryHeap::new();
        let max_ring = f.cols.max(f.rows) as isize;
        for ring in 0..=max_ring {
            // every unvisited cell is at least this far from q
            if heap.len() == k {
                let reach = (ring - 1).max(0) as f64 * f.cell;
                let worst = heap.peek().map(|c| c.dist2).unwrap_or(f64::INFINITY);
                if reach * reach > worst {
                    break;
                }
            }
            let mut visit = |c: isize, r: isize| {
                if c < 0 || r < 0 || c >= f.cols as isize || r >= f.rows as isize {
                    return;
                }
                for &i in &self.cells[r as usize * f.cols + c as usize] {
                    if !active[i] {
                        continue;
                    }
                    let cand = Candidate {
                        dist2: self.points[i].distance_squared(q),
                        index: i,
                    };
                    if heap.len() < k {
                        heap.push(cand);
                    } else if cand < *heap.peek().unwrap() {
                        heap.pop();
                        heap.push(cand);
                    }
                }
            };
            if ring == 0 {
                visit(qc, qr);
                continue;
            }
            for dc in -ring..=ring {
                visit(qc + dc, qr - ring);
                visit(qc + dc, qr + ring);
            }
            for dr in (-ring + 1)..ring {
                visit(qc - ring, qr + dr);
                visit(qc + ring, qr + dr);
            }
        }
        let mut out = heap.into_vec();
        out.sort();
        out.into_iter().map(|c| c.index).collect()
    }
}

/// Horizontal-strip index over a closed ring for fast even-odd location.
#[derive(Debug, Clone)]
pub struct RingIndex {
    ring: Vec<Point2>,
    min_y: f64,
    strip_h: f64,
    strips: Vec<Vec<usize>>,
    eps: f64,
}

impl RingIndex {
    pub fn new(ring: &[Point2]) -> RingIndex {
        let bbox = BBox::of(ring).expect("non-empty ring");
        let eps = BOUNDARY_EPS * bbox.diagonal();
        let n = ring.len();
        let nstrips = (n / 2).clamp(1, 8192);
        let strip_h = (bbox.height() / nstrips as f64).max(f64::MIN_POSITIVE);
        let mut strips = vec![Vec::new(); nstrips];
        let strip_of = |y: f64| -> usize {
            (((y - bbox.min.y) / strip_h).floor().max(0.0) as usize).min(nstrips - 1)
        };
        for i in 0..n {
            let a = ring[i];
            let b = ring[(i + 1) % n];
            let lo = strip_of(a.y.min(b.y) - eps);
            let hi = strip_of(a.y.max(b.y) + eps);
            for s in strips.iter_mut().take(hi + 1).skip(lo) {
                s.push(i);
            }
        }
        RingIndex {
            ring: ring.to_vec(),
            min_y: bbox.min.y,
            strip_h,
            strips,
            eps,
        }
    }

    pub fn ring(&self) -> &[Point2] {
        &self.ring
    }

    pub fn locate(&self, p: Point2) -> Location {
        let ns = self.strips.len();
        let max_y = self.min_y + self.strip_h * ns as f64;
        if p.y < self.min_y - self.eps || p.y > max_y + self.eps {
            return Location::Outside;
        }
        let s = (((p.y - self.min_y) / self.strip_h).floor().max(0.0) as usize).min(ns - 1);
        let n = self.ring.len();
        let mut inside = false;
        for &i in &self.strips[s] {
            let a = self.ring[i];
            let b = self.ring[(i + 1) % n];
            if point_segment_distance(p, a, b) <= self.eps {
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

    /// Brute-force location, for cross-checking the strip index.
    pub fn locate_slow(&self, p: Point2) -> Location {
        locate_in_ring(p, &self.ring, self.eps)
    }
}

/// Grid of item bounding boxes for candidate lookup by point.
#[derive(Debug, Clone)]
pub struct BoxGrid {
    frame: GridFrame,
    cells: Vec<Vec<usize>>,
}

impl BoxGrid {
    pub fn new(boxes: &[BBox]) -> BoxGrid {
        let all = boxes.iter().skip(1).fold(
            boxes.first().copied().unwrap_or(BBox {
                min: Point2::default(),
                max: Point2::new(1.0, 1.0),
            }),
            |acc, b| acc.union(b),
        );
        let frame = GridFrame::new(all, boxes.len().max(1));
        let mut cells = vec![Vec::new(); frame.cols * frame.rows];
        for (i, b) in boxes.iter().enumerate() {
            for r in frame.row(b.min.y)..=frame.row(b.max.y) {
                for c in frame.col(b.min.x)..=frame.col(b.max.x) {
                    cells[r * frame.cols + c].push(i);
                }
            }
        }
        BoxGrid { frame, cells }
    }

    /// Items whose box cell covers `p`, in ascending index order.
    pub fn candidates(&self, p: Point2) -> &[usize] {
        let f = &self.frame;
        let c = ((p.x - f.origin.x) / f.cell).floor();
        let r = ((p.y - f.origin.y) / f.cell).floor();
        if c < 0.0 || r < 0.0 || c >= f.cols as f64 || r >= f.rows as f64 {
            return &[];
        }
        &self.cells[r as usize * f.cols + c as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn knn_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Point2> = (0..500)
            .map(|_| Point2::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..3.0)))
            .collect();
        let grid = PointGrid::new(&pts);
        let mut active = vec![true; pts.len()];
        for i in (0..pts.len()).step_by(3) {
            active[i] = false;
        }
        for _ in 0..50 {
            let q = Point2::new(rng.gen_range(-1.0..11.0), rng.gen_range(-1.0..4.0));
            let mut brute: Vec<usize> = (0..pts.len()).filter(|&i| active[i]).collect();
            brute.sort_by(|&a, &b| {
                pts[a]
                    .distance_squared(q)
                    .total_cmp(&pts[b].distance_squared(q))
                    .then(a.cmp(&b))
            });
            brute.truncate(7);
            assert_eq!(grid.nearest(q, 7, &active), brute);
        }
    }

    #[test]
    fn ring_index_matches_slow_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ring: Vec<Point2> = (0..60)
            .map(|i| {
                let t = i as f64 / 60.0 * std::f64::consts::TAU;
                let r = 1.0 + 0.3 * (5.0 * t).sin();
                Point2::new(r * t.cos(), r * t.sin())
            })
            .collect();
        let idx = RingIndex::new(&ring);
        for _ in 0..2000 {
            let p = Point2::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
            assert_eq!(idx.locate(p), idx.locate_slow(p));
        }
        for v in &ring {
            assert_eq!(idx.locate(*v), Location::Boundary);
        }
    }
}
