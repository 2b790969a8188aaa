//! Closed interpolating curve through an outline and its equal-arc-length
//! segmentation.
//!
//! The curve is a periodic cubic spline with chord-length knot spacing. It
//! is C2 in the spline parameter and is stored as one cubic Bezier piece per
//! outline edge.

use crate::geometry::index::RingIndex;
use crate::geometry::{is_simple, signed_area, BBox, Outline, Point2};
use thiserror::Error;

/// Relative (to the bbox diagonal) chord tolerance for flattening.
pub const FLATTEN_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("outline has fewer than 3 distinct vertices")]
    DegenerateOutline,
    #[error("segment count must be at least 16, got {0}")]
    BadSegmentCount(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicBezier {
    pub p0: Point2,
    pub p1: Point2,
    pub p2: Point2,
    pub p3: Point2,
}

// 8-point Gauss-Legendre nodes/weights on [-1, 1]
const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

impl CubicBezier {
    pub fn line(a: Point2, b: Point2) -> Self {
        CubicBezier {
            p0: a,
            p1: a.lerp(b, 1.0 / 3.0),
            p2: a.lerp(b, 2.0 / 3.0),
            p3: b,
        }
    }

    pub fn eval(&self, t: f64) -> Point2 {
        let s = 1.0 - t;
        let a = s * s * s;
        let b = 3.0 * s * s * t;
        let c = 3.0 * s * t * t;
        let d = t * t * t;
        Point2::new(
            a * self.p0.x + b * self.p1.x + c * self.p2.x + d * self.p3.x,
            a * self.p0.y + b * self.p1.y + c * self.p2.y + d * self.p3.y,
        )
    }

    pub fn derivative(&self, t: f64) -> Point2 {
        let s = 1.0 - t;
        (self.p1 - self.p0) * (3.0 * s * s)
            + (self.p2 - self.p1) * (6.0 * s * t)
            + (self.p3 - self.p2) * (3.0 * t * t)
    }

    pub fn second_derivative(&self, t: f64) -> Point2 {
        let a = self.p2 - self.p1 * 2.0 + self.p0;
        let b = self.p3 - self.p2 * 2.0 + self.p1;
        (a * (1.0 - t) + b * t) * 6.0
    }

    /// Arc length between local parameters `t0 <= t1`.
    pub fn arc_length(&self, t0: f64, t1: f64) -> f64 {
        if t1 <= t0 {
            return 0.0;
        }
        const SUB: usize = 4;
        let h = (t1 - t0) / SUB as f64;
        let mut total = 0.0;
        for k in 0..SUB {
            let a = t0 + h * k as f64;
            let mid = a + 0.5 * h;
            let half = 0.5 * h;
            for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
                total += w * half * self.derivative(mid - half * x).norm();
                total += w * half * self.derivative(mid + half * x).norm();
            }
        }
        total
    }
}

/// Closed composite cubic Bezier curve. Piece `j` ends where piece `j + 1`
/// starts (cyclically).
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedCurve {
    pieces: Vec<CubicBezier>,
    spans: Vec<f64>,
    period: f64,
    bbox: BBox,
}

/// A point on the curve with its global parameter (`piece index + local t`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub param: f64,
    pub point: Point2,
}

impl ClosedCurve {
    fn from_parts(pieces: Vec<CubicBezier>, spans: Vec<f64>) -> ClosedCurve {
        let period = pieces.iter().map(|p| p.arc_length(0.0, 1.0)).sum();
        let starts: Vec<Point2> = pieces.iter().map(|p| p.p0).collect();
        let bbox = BBox::of(&starts).expect("non-empty curve");
        ClosedCurve {
            pieces,
            spans,
            period,
            bbox,
        }
    }

    /// The polygon itself, one straight piece per edge.
    pub fn from_polygon(outline: &Outline) -> ClosedCurve {
        let (pieces, spans) = outline
            .edges()
            .map(|(a, b)| (CubicBezier::line(a, b), a.distance(b)))
            .unzip();
        ClosedCurve::from_parts(pieces, spans)
    }

    /// Wrap pieces that already join end to start (within `1e-12` of the
    /// bbox diagonal).
    pub fn from_pieces(pieces: Vec<CubicBezier>) -> Result<ClosedCurve, CurveError> {
        if pieces.len() < 2 {
            return Err(CurveError::DegenerateOutline);
        }
        let starts: Vec<Point2> = pieces.iter().map(|p| p.p0).collect();
        let tol = 1e-12 * BBox::of(&starts).unwrap().diagonal();
        let m = pieces.len();
        if (0..m).any(|i| pieces[i].p3.distance(pieces[(i + 1) % m].p0) > tol) {
            return Err(CurveError::DegenerateOutline);
        }
        let spans = pieces.iter().map(|p| p.p0.distance(p.p3)).collect();
        Ok(ClosedCurve::from_parts(pieces, spans))
    }

    /// Counter-clockwise circle from `arcs` cubic arcs.
    pub fn circle(center: Point2, radius: f64, arcs: usize) -> ClosedCurve {
        let arcs = arcs.max(4);
        let sweep = std::f64::consts::TAU / arcs as f64;
        let k = 4.0 / 3.0 * (sweep / 4.0).tan() * radius;
        let pieces = (0..arcs)
            .map(|i| {
                let a0 = sweep * i as f64;
                let a1 = a0 + sweep;
                let (s0, c0) = a0.sin_cos();
                let (s1, c1) = a1.sin_cos();
                let p0 = center + Point2::new(c0, s0) * radius;
                let p3 = center + Point2::new(c1, s1) * radius;
                CubicBezier {
                    p0,
                    p1: p0 + Point2::new(-s0, c0) * k,
                    p2: p3 - Point2::new(-s1, c1) * k,
                    p3,
                }
            })
            .collect::<Vec<_>>();
        let mut pieces = pieces;
        // close exactly
        let first = pieces[0].p0;
        pieces.last_mut().unwrap().p3 = first;
        let spans = pieces.iter().map(|p| p.p0.distance(p.p3)).collect();
        ClosedCurve::from_parts(pieces, spans)
    }

    pub fn pieces(&self) -> &[CubicBezier] {
        &self.pieces
    }

    /// Spline parameter length of each piece (chord length of its edge).
    pub fn spans(&self) -> &[f64] {
        &self.spans
    }

    /// Total arc length.
    pub fn period(&self) -> f64 {
        self.period
    }

    /// Bounding box of the interpolated vertices.
    pub fn bbox(&self) -> BBox {
        self.bbox
    }

    /// End of the global parameter range; `param_end() == pieces().len()`.
    pub fn param_end(&self) -> f64 {
        self.pieces.len() as f64
    }

    fn split_param(&self, u: f64) -> (usize, f64) {
        let m = self.pieces.len();
        let u = u.rem_euclid(m as f64);
        let i = (u.floor() as usize).min(m - 1);
        (i, (u - i as f64).clamp(0.0, 1.0))
    }

    pub fn position(&self, u: f64) -> Point2 {
        let (i, t) = self.split_param(u);
        self.pieces[i].eval(t)
    }

    /// Derivative with respect to the local Bezier parameter.
    pub fn derivative(&self, u: f64) -> Point2 {
        let (i, t) = self.split_param(u);
        self.pieces[i].derivative(t)
    }

    /// Signed curvature; positive where the curve turns left.
    pub fn curvature(&self, u: f64) -> f64 {
        let (i, t) = self.split_param(u);
        let d1 = self.pieces[i].derivative(t);
        let d2 = self.pieces[i].second_derivative(t);
        let speed = d1.norm();
        if speed == 0.0 {
            return 0.0;
        }
        d1.cross(d2) / (speed * speed * speed)
    }

    /// Position at spline parameter `s` in `[0, sum(spans))`.
    pub fn spline_position(&self, s: f64) -> Point2 {
        let total: f64 = self.spans.iter().sum();
        let mut s = s.rem_euclid(total);
        for (piece, &h) in self.pieces.iter().zip(&self.spans) {
            if s <= h {
                return piece.eval(s / h);
            }
            s -= h;
        }
        self.pieces[0].p0
    }

    /// Arc length travelling forward from `u0` to `u1` (wrapping once if
    /// `u1 < u0`).
    pub fn arc_length_between(&self, u0: f64, u1: f64) -> f64 {
        let m = self.param_end();
        let mut a = u0.rem_euclid(m);
        let mut b = u1.rem_euclid(m);
        if u1 >= u0 + m {
            return self.period;
        }
        if b < a {
            b += m;
        }
        let mut total = 0.0;
        while a < b {
            let i = a.floor();
            let end = (i + 1.0).min(b);
            let piece = &self.pieces[(i as usize) % self.pieces.len()];
            total += piece.arc_length(a - i, end - i);
            a = end;
        }
        total
    }

    /// Adaptive flattening. Consecutive samples are within `tol` of the curve
    /// chord-wise and no more than `max_len` apart. The closing sample (the
    /// start point again) is not repeated.
    pub fn flatten(&self, tol: f64, max_len: f64) -> Vec<CurveSample> {
        let mut out = Vec::new();
        for (i, piece) in self.pieces.iter().enumerate() {
            let base = i as f64;
            let mut stack = vec![(0.0f64, 1.0f64, 0u32)];
            while let Some((t0, t1, depth)) = stack.pop() {
                let a = piece.eval(t0);
                let b = piece.eval(t1);
                let dev = [0.25, 0.5, 0.75]
                    .iter()
                    .map(|f| {
                        crate::geometry::point_segment_distance(
                            piece.eval(t0 + (t1 - t0) * f),
                            a,
                            b,
                        )
                    })
                    .fold(0.0, f64::max);
                let long = a.distance(b) > max_len;
                if (dev > tol || long) && depth < 30 {
                    let tm = 0.5 * (t0 + t1);
                    // right half first so the left half pops next
                    stack.push((tm, t1, depth + 1));
                    stack.push((t0, tm, depth + 1));
                } else {
                    out.push(CurveSample {
                        param: base + t0,
                        point: a,
                    });
                }
            }
        }
        out
    }
}

fn solve_tridiagonal(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let n = d.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = c[0] / b[0];
    dp[0] = d[0] / b[0];
    for i in 1..n {
        let m = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / m;
        dp[i] = (d[i] - a[i] * dp[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}

/// Solve a cyclic tridiagonal system (Sherman-Morrison). Row `i` reads
/// `a[i] x[i-1] + b[i] x[i] + c[i] x[i+1] = d[i]` with indices mod n.
fn solve_cyclic(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let n = d.len();
    let alpha = c[n - 1];
    let beta = a[0];
    let gamma = -b[0];
    let mut bb = b.to_vec();
    bb[0] = b[0] - gamma;
    bb[n - 1] = b[n - 1] - alpha * beta / gamma;
    let x = solve_tridiagonal(a, &bb, c, d);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = solve_tridiagonal(a, &bb, c, &u);
    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

/// Closed C2 cubic spline through the outline vertices, in order.
pub fn fit_closed_bezier(outline: &Outline) -> Result<ClosedCurve, CurveError> {
    let mut k: Vec<Point2> = Vec::with_capacity(outline.len());
    for &p in outline.vertices() {
        if k.last() != Some(&p) {
            k.push(p);
        }
    }
    while k.len() > 1 && k.first() == k.last() {
        k.pop();
    }
    let m = k.len();
    if m < 3 {
        return Err(CurveError::DegenerateOutline);
    }
    let h: Vec<f64> = (0..m).map(|i| k[i].distance(k[(i + 1) % m])).collect();
    let prev = |i: usize| (i + m - 1) % m;
    let a: Vec<f64> = (0..m).map(|i| h[prev(i)]).collect();
    let b: Vec<f64> = (0..m).map(|i| 2.0 * (h[prev(i)] + h[i])).collect();
    let c: Vec<f64> = h.clone();
    let slope = |i: usize| (k[(i + 1) % m] - k[i]) * (1.0 / h[i]);
    let rhs: Vec<Point2> = (0..m).map(|i| (slope(i) - slope(prev(i))) * 6.0).collect();
    let mx = solve_cyclic(&a, &b, &c, &rhs.iter().map(|p| p.x).collect::<Vec<_>>());
    let my = solve_cyclic(&a, &b, &c, &rhs.iter().map(|p| p.y).collect::<Vec<_>>());
    let second: Vec<Point2> = mx.into_iter().zip(my).map(Point2::from).collect();

    let pieces = (0..m)
        .map(|i| {
            let j = (i + 1) % m;
            let hi = h[i];
            let chord = slope(i);
            let d0 = chord - (second[i] * 2.0 + second[j]) * (hi / 6.0);
            let d1 = chord + (second[i] + second[j] * 2.0) * (hi / 6.0);
            CubicBezier {
                p0: k[i],
                p1: k[i] + d0 * (hi / 3.0),
                p2: k[j] - d1 * (hi / 3.0),
                p3: k[j],
            }
        })
        .collect();
    Ok(ClosedCurve::from_parts(pieces, h))
}

/// A closed curve cut into `n` arcs of equal length.
#[derive(Debug, Clone)]
pub struct SegmentedCurve {
    curve: ClosedCurve,
    params: Vec<f64>,
    divisors: Vec<Point2>,
    inward_normals: Vec<Point2>,
    arc_lengths: Vec<f64>,
    samples: Vec<CurveSample>,
    boundary: RingIndex,
    diagonal: f64,
}

impl SegmentedCurve {
    pub fn curve(&self) -> &ClosedCurve {
        &self.curve
    }

    pub fn len(&self) -> usize {
        self.divisors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.divisors.is_empty()
    }

    pub fn divisors(&self) -> &[Point2] {
        &self.divisors
    }

    /// Divisor `i` with cyclic indexing, so `divisor(n) == divisor(0)`.
    pub fn divisor(&self, i: usize) -> Point2 {
        self.divisors[i % self.divisors.len()]
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn inward_normals(&self) -> &[Point2] {
        &self.inward_normals
    }

    pub fn arc_lengths(&self) -> &[f64] {
        &self.arc_lengths
    }

    /// Flattened curve used for containment and distance queries.
    pub fn samples(&self) -> &[CurveSample] {
        &self.samples
    }

    pub fn boundary(&self) -> &RingIndex {
        &self.boundary
    }

    /// Bounding-box diagonal that scales every tolerance.
    pub fn diagonal(&self) -> f64 {
        self.diagonal
    }

    /// Area enclosed by the flattened curve.
    pub fn enclosed_area(&self) -> f64 {
        signed_area(self.boundary.ring()).abs()
    }

    /// Check for self-intersection of the flattened curve.
    pub fn is_self_intersecting(&self) -> bool {
        !is_simple(self.boundary.ring())
    }
}

/// Place `n` divisors at equal arc-length spacing, starting at the curve
/// start point.
pub fn segment_curve(curve: &ClosedCurve, n: usize) -> Result<SegmentedCurve, CurveError> {
    if n < 16 {
        return Err(CurveError::BadSegmentCount(n));
    }
    let diagonal = curve.bbox().diagonal();
    let samples = curve.flatten(
        FLATTEN_TOLERANCE * diagonal,
        curve.period() / (4 * n) as f64,
    );
    let ring: Vec<Point2> = samples.iter().map(|s| s.point).collect();
    let orientation = if signed_area(&ring) < 0.0 { -1.0 } else { 1.0 };
    let ms = samples.len();
    let mut cum = Vec::with_capacity(ms + 1);
    cum.push(0.0);
    for j in 0..ms {
        let next = samples[(j + 1) % ms].point;
        cum.push(cum[j] + samples[j].point.distance(next));
    }
    let total = cum[ms];
    let end = curve.param_end();

    let params: Vec<f64> = (0..n)
        .map(|i| {
            let target = total * i as f64 / n as f64;
            let e = cum
                .partition_point(|&c| c <= target)
                .saturating_sub(1)
                .min(ms - 1);
            let len = cum[e + 1] - cum[e];
            let frac = if len > 0.0 {
                (target - cum[e]) / len
            } else {
                0.0
            };
            let u0 = samples[e].param;
            let u1 = if e + 1 == ms {
                end
            } else {
                samples[e + 1].param
            };
            let u = u0 + (u1 - u0) * frac;
            if u >= end {
                u - end
            } else {
                u
            }
        })
        .collect();

    let divisors: Vec<Point2> = params.iter().map(|&u| curve.position(u)).collect();
    let inward_normals: Vec<Point2> = params
        .iter()
        .enumerate()
        .map(|(i, &u)| {
            let tangent = curve.derivative(u).normalized().unwrap_or_else(|| {
                // cusp: fall back to the chord between neighbouring divisors
                let a = curve.position(params[(i + n - 1) % n]);
                let b = curve.position(params[(i + 1) % n]);
                (b - a).normalized().unwrap_or(Point2::new(1.0, 0.0))
            });
            tangent.perp() * orientation
        })
        .collect();
    let arc_lengths = (0..n)
        .map(|i| curve.arc_length_between(params[i], params[(i + 1) % n]))
        .collect();

    Ok(SegmentedCurve {
        curve: curve.clone(),
        params,
        divisors,
        inward_normals,
        arc_lengths,
        samples,
        boundary: RingIndex::new(&ring),
        diagonal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{point_segment_distance, Location};
    use std::f64::consts::TAU;

    fn regular(m: usize, r: f64) -> Outline {
        Outline::new(
            (0..m)
                .map(|i| {
                    let t = TAU * i as f64 / m as f64;
                    Point2::new(r * t.cos(), r * t.sin())
                })
                .collect(),
        )
        .unwrap()
    }

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
    fn cyclic_solver_matches_dense() {
        let a = [1.0, 2.0, 0.5, 1.5, 0.3];
        let b = [5.0, 6.0, 4.0, 7.0, 3.0];
        let c = [0.7, 1.1, 0.9, 2.0, 1.0];
        let d = [1.0, -2.0, 3.0, 0.5, 4.0];
        let x = solve_cyclic(&a, &b, &c, &d);
        let n = 5;
        for i in 0..n {
            let r = a[i] * x[(i + n - 1) % n] + b[i] * x[i] + c[i] * x[(i + 1) % n];
            assert!((r - d[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn interpolates_triangle_vertices() {
        let tri = Outline::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.5, 3f64.sqrt() / 2.0),
        ])
        .unwrap();
        let c = fit_closed_bezier(&tri).unwrap();
        let eps = 1e-9 * tri.bbox().diagonal();
        for (i, v) in tri.vertices().iter().enumerate() {
            assert!(c.position(i as f64).distance(*v) <= eps);
        }
        // closure: last piece ends on the first piece's start
        let last = c.pieces().last().unwrap();
        assert_eq!(last.p3, c.pieces()[0].p0);
    }

    #[test]
    fn hexagon_close_to_circumcircle() {
        let hex = regular(6, 1.0);
        let c = fit_closed_bezier(&hex).unwrap();
        let worst = (0..1000)
            .map(|i| (c.position(6.0 * i as f64 / 1000.0).norm() - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(worst < 0.02, "max radial deviation {worst}");
    }

    #[test]
    fn flatten_respects_max_len() {
        let c = fit_closed_bezier(&square()).unwrap();
        let s = c.flatten(1e-4, 0.01);
        let n = s.len();
        for j in 0..n {
            assert!(s[j].point.distance(s[(j + 1) % n].point) <= 0.01 + 1e-12);
        }
        // params strictly increasing
        assert!(s.windows(2).all(|w| w[0].param < w[1].param));
    }

    #[test]
    fn polygon_curve_is_the_polygon() {
        let c = ClosedCurve::from_polygon(&square());
        assert!((c.period() - 4.0).abs() < 1e-12);
        assert_eq!(c.position(0.5), Point2::new(0.5, 0.0));
        assert_eq!(c.curvature(1.3), 0.0);
    }

    #[test]
    fn bad_segment_count() {
        let c = fit_closed_bezier(&square()).unwrap();
        assert_eq!(
            segment_curve(&c, 15).unwrap_err(),
            CurveError::BadSegmentCount(15)
        );
    }

    #[test]
    fn divisors_close_and_normals_point_inside() {
        let c = fit_closed_bezier(&square()).unwrap();
        let seg = segment_curve(&c, 3000).unwrap();
        assert_eq!(seg.len(), 3000);
        assert_eq!(seg.divisor(3000), seg.divisor(0));
        assert_eq!(seg.divisor(0), Point2::new(0.0, 0.0));
        let delta = 1e-3 * seg.diagonal();
        for (v, nrm) in seg.divisors().iter().zip(seg.inward_normals()) {
            assert_eq!(seg.boundary().locate(*v + *nrm * delta), Location::Inside);
        }
        let ring: Vec<Point2> = seg.samples().iter().map(|s| s.point).collect();
        for v in seg.divisors() {
            let d = (0..ring.len())
                .map(|j| point_segment_distance(*v, ring[j], ring[(j + 1) % ring.len()]))
                .fold(f64::INFINITY, f64::min);
            assert!(d <= FLATTEN_TOLERANCE * seg.diagonal());
        }
    }
}
